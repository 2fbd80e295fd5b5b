#include "jexplore/csv.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "jexplore/errors.hpp"

namespace jexplore {

void validate_record(const SampleRecord& record, const MeterSet& meters) {
    if (record.sample_id.empty()) {
        throw ArgumentError("record has an empty sample_id");
    }
    if (record.client_id.empty()) {
        throw ArgumentError("record has an empty client_id");
    }
    if (record.status == SampleStatus::Ok) {
        if (meters.time_enabled != record.time_s.has_value() ||
            meters.power_enabled != record.power_w.has_value() ||
            meters.memory_enabled != record.memory_mb.has_value()) {
            throw ArgumentError("ok record " + record.sample_id +
                                " must carry exactly the enabled metrics");
        }
    } else if (record.time_s || record.power_w || record.memory_mb) {
        throw ArgumentError("failed record " + record.sample_id + " must not carry metrics");
    }
}

double round_metric(double value) {
    if (!std::isfinite(value)) {
        throw ArgumentError("metric value must be finite");
    }
    return std::round(value * 1e6) / 1e6;
}

std::string format_metric(double value) {
    if (!std::isfinite(value)) {
        throw ArgumentError("metric value must be finite");
    }
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.6f", value);
    std::string text(buffer);
    std::size_t end = text.size();
    while (end > 0 && text[end - 1] == '0') {
        --end;
    }
    if (end > 0 && text[end - 1] == '.') {
        ++end;  // keep one decimal: "20.0"
    }
    text.resize(end);
    return text;
}

namespace {

// Free-text cells share rows with the comma separator, so they must not
// contain separators or quoting; ids and timestamps are machine-formatted.
void require_csv_safe(const std::string& cell, const char* what) {
    if (cell.find_first_of(",\"\r\n") != std::string::npos) {
        throw ArgumentError(std::string(what) + " contains CSV separator characters: " + cell);
    }
}

std::string format_row(const SampleRecord& record) {
    require_csv_safe(record.sample_id, "sample_id");
    require_csv_safe(record.client_id, "client_id");
    require_csv_safe(record.timestamp, "timestamp");
    std::ostringstream row;
    row << record.sample_id << ',' << record.client_id;
    for (std::size_t i = 0; i < kConfigParamCount; ++i) {
        row << ',' << config_value(record.config, i);
    }
    for (const auto& metric : {record.time_s, record.power_w, record.memory_mb}) {
        row << ',';
        if (metric) {
            row << format_metric(*metric);
        }
    }
    row << ',' << to_string(record.status) << ',' << record.timestamp << '\n';
    return row.str();
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    for (const char c : line) {
        if (c == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    fields.push_back(std::move(current));
    return fields;
}

std::int64_t parse_int_cell(const std::string& cell, std::size_t line, const char* column) {
    try {
        std::size_t consumed = 0;
        const std::int64_t value = std::stoll(cell, &consumed);
        if (consumed != cell.size() || cell.empty()) {
            throw std::invalid_argument(cell);
        }
        return value;
    } catch (const std::exception&) {
        throw RowError(line, std::string("cell \"") + cell + "\" in column " + column +
                                 " is not an integer");
    }
}

std::optional<double> parse_metric_cell(const std::string& cell, std::size_t line,
                                        const char* column) {
    if (cell.empty()) {
        return std::nullopt;
    }
    try {
        std::size_t consumed = 0;
        const double value = std::stod(cell, &consumed);
        if (consumed != cell.size() || !std::isfinite(value)) {
            throw std::invalid_argument(cell);
        }
        return value;
    } catch (const std::exception&) {
        throw RowError(line, std::string("cell \"") + cell + "\" in column " + column +
                                 " is not a number");
    }
}

}  // namespace

CsvWriter::CsvWriter(const std::filesystem::path& path) : out_(path, std::ios::binary) {
    if (!out_) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out_ << kCsvHeader << '\n';
    bytes_ += kCsvHeader.size() + 1;
    flush();
}

void CsvWriter::append(const SampleRecord& record) {
    const std::string row = format_row(record);
    out_ << row;
    bytes_ += row.size();
    flush();
}

void CsvWriter::flush() {
    out_.flush();
    if (!out_) {
        throw IoError("write to the CSV output failed");
    }
}

std::uint64_t write_csv(const std::vector<SampleRecord>& records,
                        const std::filesystem::path& path) {
    CsvWriter writer(path);
    for (const SampleRecord& record : records) {
        writer.append(record);
    }
    return writer.bytes_written();
}

std::vector<SampleRecord> read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string() + " for reading");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw SchemaError("file is empty, expected the header \"" + std::string(kCsvHeader) +
                          "\"");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    if (line != kCsvHeader) {
        throw SchemaError("header mismatch: expected \"" + std::string(kCsvHeader) +
                          "\", got \"" + line + "\"");
    }

    static const char* kColumns[] = {"sample_id",    "client_id",    "cores_c1",
                                     "cores_c2",     "cores_c3",     "freq_c1_khz",
                                     "freq_c2_khz",  "freq_c3_khz",  "gpu_freq_khz",
                                     "emc_freq_khz", "time_s",       "power_w",
                                     "memory_mb",    "status",       "timestamp"};
    constexpr std::size_t kColumnCount = std::size(kColumns);

    std::vector<SampleRecord> records;
    std::size_t line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const std::vector<std::string> fields = split_fields(line);
        if (fields.size() != kColumnCount) {
            throw RowError(line_number, "expected " + std::to_string(kColumnCount) +
                                            " fields, got " + std::to_string(fields.size()));
        }
        SampleRecord record;
        record.sample_id = fields[0];
        record.client_id = fields[1];
        if (record.sample_id.empty()) {
            throw RowError(line_number, "sample_id is empty");
        }
        for (std::size_t i = 0; i < kConfigParamCount; ++i) {
            set_config_value(record.config, i,
                             parse_int_cell(fields[2 + i], line_number, kColumns[2 + i]));
        }
        record.time_s = parse_metric_cell(fields[10], line_number, kColumns[10]);
        record.power_w = parse_metric_cell(fields[11], line_number, kColumns[11]);
        record.memory_mb = parse_metric_cell(fields[12], line_number, kColumns[12]);
        try {
            record.status = sample_status_from_string(fields[13]);
        } catch (const ArgumentError& e) {
            throw RowError(line_number, e.what());
        }
        record.timestamp = fields[14];
        records.push_back(std::move(record));
    }
    return records;
}

}  // namespace jexplore
