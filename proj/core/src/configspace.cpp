#include "jexplore/configspace.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "jexplore/errors.hpp"

namespace jexplore {

namespace {

// Linear grid between lo and hi inclusive, rounded to the nearest kHz
// (half away from zero).
std::vector<std::int64_t> linear_grid(std::int64_t lo, std::int64_t hi, std::size_t count) {
    std::vector<std::int64_t> values;
    values.reserve(count);
    if (count == 1) {
        values.push_back(lo);
        return values;
    }
    const double span = static_cast<double>(hi - lo);
    for (std::size_t i = 0; i < count; ++i) {
        const double offset = static_cast<double>(i) * span / static_cast<double>(count - 1);
        values.push_back(lo + std::llround(offset));
    }
    return values;
}

std::vector<std::int64_t> integer_range(std::int64_t lo, std::int64_t hi) {
    std::vector<std::int64_t> values;
    values.reserve(static_cast<std::size_t>(hi - lo + 1));
    for (std::int64_t v = lo; v <= hi; ++v) {
        values.push_back(v);
    }
    return values;
}

void require_eight_params(const ConfigSpace& space) {
    if (space.params.size() != kConfigParamCount) {
        throw ArgumentError("configuration operations need an 8-parameter space, got " +
                            std::to_string(space.params.size()));
    }
}

// Grid position of value, or npos if absent.
std::size_t grid_position(const ParameterDef& param, std::int64_t value) {
    const auto it = std::lower_bound(param.values.begin(), param.values.end(), value);
    if (it == param.values.end() || *it != value) {
        return std::string::npos;
    }
    return static_cast<std::size_t>(it - param.values.begin());
}

}  // namespace

std::string_view to_string(ParamKind kind) noexcept {
    return kind == ParamKind::CoreCount ? "core-count" : "frequency";
}

ParamKind param_kind_from_string(std::string_view s) {
    if (s == "core-count") {
        return ParamKind::CoreCount;
    }
    if (s == "frequency") {
        return ParamKind::Frequency;
    }
    throw ArgumentError("unknown parameter kind: " + std::string(s));
}

std::int64_t config_value(const Configuration& config, std::size_t param_index) {
    switch (param_index) {
        case 0: return config.cores_c1;
        case 1: return config.cores_c2;
        case 2: return config.cores_c3;
        case 3: return config.freq_c1_khz;
        case 4: return config.freq_c2_khz;
        case 5: return config.freq_c3_khz;
        case 6: return config.gpu_freq_khz;
        case 7: return config.emc_freq_khz;
        default: throw RangeError("parameter index out of range: " + std::to_string(param_index));
    }
}

void set_config_value(Configuration& config, std::size_t param_index, std::int64_t value) {
    switch (param_index) {
        case 0: config.cores_c1 = static_cast<int>(value); break;
        case 1: config.cores_c2 = static_cast<int>(value); break;
        case 2: config.cores_c3 = static_cast<int>(value); break;
        case 3: config.freq_c1_khz = value; break;
        case 4: config.freq_c2_khz = value; break;
        case 5: config.freq_c3_khz = value; break;
        case 6: config.gpu_freq_khz = value; break;
        case 7: config.emc_freq_khz = value; break;
        default: throw RangeError("parameter index out of range: " + std::to_string(param_index));
    }
}

ConfigSpace build_orin_space() {
    ConfigSpace space;
    space.params = {
        {"cores_c1", ParamKind::CoreCount, integer_range(1, 4)},
        {"cores_c2", ParamKind::CoreCount, integer_range(0, 4)},
        {"cores_c3", ParamKind::CoreCount, integer_range(0, 4)},
        {"freq_c1_khz", ParamKind::Frequency, linear_grid(115000, 2200000, 29)},
        {"freq_c2_khz", ParamKind::Frequency, linear_grid(115000, 2200000, 29)},
        {"freq_c3_khz", ParamKind::Frequency, linear_grid(115000, 2200000, 29)},
        {"gpu_freq_khz", ParamKind::Frequency, linear_grid(306000, 1300000, 11)},
        {"emc_freq_khz", ParamKind::Frequency, linear_grid(204000, 3200000, 4)},
    };
    return space;
}

void validate_space(const ConfigSpace& space) {
    if (space.params.empty()) {
        throw ArgumentError("space has no parameters");
    }
    for (const ParameterDef& param : space.params) {
        if (param.name.empty()) {
            throw ArgumentError("parameter with empty name");
        }
        if (param.values.empty()) {
            throw ArgumentError("parameter " + param.name + " has no values");
        }
        for (std::size_t i = 0; i < param.values.size(); ++i) {
            const std::int64_t v = param.values[i];
            if (param.kind == ParamKind::Frequency && v <= 0) {
                throw ArgumentError("parameter " + param.name +
                                    " has non-positive frequency " + std::to_string(v));
            }
            if (param.kind == ParamKind::CoreCount && v < 0) {
                throw ArgumentError("parameter " + param.name + " has negative core count " +
                                    std::to_string(v));
            }
            if (i > 0 && param.values[i - 1] >= v) {
                throw ArgumentError("parameter " + param.name +
                                    " values are not strictly increasing");
            }
        }
    }
}

void validate_config(const ConfigSpace& space, const Configuration& config) {
    require_eight_params(space);
    for (std::size_t i = 0; i < kConfigParamCount; ++i) {
        const ParameterDef& param = space.params[i];
        const std::int64_t value = config_value(config, i);
        if (grid_position(param, value) == std::string::npos) {
            throw MembershipError(param.name, "value " + std::to_string(value) +
                                                  " of field " + param.name +
                                                  " is not on its grid");
        }
    }
}

std::uint64_t cardinality(const ConfigSpace& space) {
    validate_space(space);
    std::uint64_t product = 1;
    for (const ParameterDef& param : space.params) {
        const std::uint64_t count = param.values.size();
        if (product > std::numeric_limits<std::uint64_t>::max() / count) {
            throw RangeError("space cardinality overflows 64 bits");
        }
        product *= count;
    }
    return product;
}

std::uint64_t encode_index(const ConfigSpace& space, const Configuration& config) {
    require_eight_params(space);
    std::uint64_t index = 0;
    for (std::size_t i = 0; i < kConfigParamCount; ++i) {
        const ParameterDef& param = space.params[i];
        const std::size_t digit = grid_position(param, config_value(config, i));
        if (digit == std::string::npos) {
            throw MembershipError(param.name,
                                  "value " + std::to_string(config_value(config, i)) +
                                      " of field " + param.name + " is not on its grid");
        }
        index = index * param.values.size() + digit;
    }
    return index;
}

Configuration decode_index(const ConfigSpace& space, std::uint64_t index) {
    require_eight_params(space);
    const std::uint64_t total = cardinality(space);
    if (index >= total) {
        throw RangeError("index " + std::to_string(index) + " not below cardinality " +
                         std::to_string(total));
    }
    Configuration config;
    for (std::size_t i = kConfigParamCount; i-- > 0;) {
        const ParameterDef& param = space.params[i];
        const std::uint64_t radix = param.values.size();
        set_config_value(config, i, param.values[static_cast<std::size_t>(index % radix)]);
        index /= radix;
    }
    return config;
}

IndexSampler::IndexSampler(const ConfigSpace& space, std::uint64_t seed)
    : space_(&space), cardinality_(cardinality(space)), rng_(seed) {}

std::uint64_t IndexSampler::next_index() {
    return rng_.next_below(cardinality_);
}

Configuration IndexSampler::next() {
    return decode_index(*space_, next_index());
}

std::vector<Configuration> random_sample(const ConfigSpace& space, std::uint64_t seed,
                                         std::size_t n) {
    IndexSampler sampler(space, seed);
    std::vector<Configuration> configs;
    configs.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        configs.push_back(sampler.next());
    }
    return configs;
}

std::string space_to_json(const ConfigSpace& space) {
    nlohmann::ordered_json doc;
    doc["params"] = nlohmann::ordered_json::array();
    for (const ParameterDef& param : space.params) {
        nlohmann::ordered_json p;
        p["name"] = param.name;
        p["kind"] = std::string(to_string(param.kind));
        p["values"] = param.values;
        doc["params"].push_back(std::move(p));
    }
    return doc.dump(2) + "\n";
}

ConfigSpace space_from_json(std::string_view json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("space definition is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("params") || !doc["params"].is_array()) {
        throw ParseError("space definition must be an object with a \"params\" array");
    }
    ConfigSpace space;
    for (const auto& p : doc["params"]) {
        if (!p.is_object() || !p.contains("name") || !p.contains("kind") ||
            !p.contains("values") || !p["name"].is_string() || !p["kind"].is_string() ||
            !p["values"].is_array()) {
            throw ParseError("each parameter needs string name/kind and a values array");
        }
        ParameterDef param;
        param.name = p["name"].get<std::string>();
        param.kind = param_kind_from_string(p["kind"].get<std::string>());
        for (const auto& v : p["values"]) {
            if (!v.is_number_integer()) {
                throw ParseError("parameter " + param.name + " has a non-integer value");
            }
            param.values.push_back(v.get<std::int64_t>());
        }
        space.params.push_back(std::move(param));
    }
    validate_space(space);
    return space;
}

ConfigSpace load_space_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open space file " + path.string());
    }
    std::ostringstream text;
    text << in.rdbuf();
    return space_from_json(text.str());
}

}  // namespace jexplore
