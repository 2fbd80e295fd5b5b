#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "jexplore/records.hpp"

namespace jexplore {

inline constexpr std::string_view kCsvHeader =
    "sample_id,client_id,cores_c1,cores_c2,cores_c3,freq_c1_khz,freq_c2_khz,"
    "freq_c3_khz,gpu_freq_khz,emc_freq_khz,time_s,power_w,memory_mb,status,timestamp";

/// Rounds a metric to the 6 decimals the CSV format carries. Records built
/// from measurements are rounded up front so that write/read round-trips are
/// exact identities.
double round_metric(double value);

/// Fixed-point rendering with up to 6 decimals, no exponent, trailing zeros
/// trimmed down to one decimal ("20.0", "14.490587").
std::string format_metric(double value);

/// Streams records to a CSV file, header first, flushing after every row so
/// an aborted run leaves a readable partial file.
class CsvWriter {
public:
    explicit CsvWriter(const std::filesystem::path& path);

    void append(const SampleRecord& record);
    void flush();
    std::uint64_t bytes_written() const noexcept { return bytes_; }

private:
    std::ofstream out_;
    std::uint64_t bytes_ = 0;
};

/// Writes header plus one row per record; returns the byte count.
std::uint64_t write_csv(const std::vector<SampleRecord>& records,
                        const std::filesystem::path& path);

/// Inverse of write_csv. Throws SchemaError on a wrong header and RowError
/// (with the 1-based line number) on an unparsable cell.
std::vector<SampleRecord> read_csv(const std::filesystem::path& path);

}  // namespace jexplore
