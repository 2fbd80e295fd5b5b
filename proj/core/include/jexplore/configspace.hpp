#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "jexplore/rng.hpp"

namespace jexplore {

enum class ParamKind { CoreCount, Frequency };

std::string_view to_string(ParamKind kind) noexcept;
ParamKind param_kind_from_string(std::string_view s);

/// One tunable hardware parameter and its admissible value grid.
/// Core counts are unitless; frequencies are in kHz.
struct ParameterDef {
    std::string name;
    ParamKind kind = ParamKind::Frequency;
    std::vector<std::int64_t> values;  // strictly increasing, non-empty

    bool operator==(const ParameterDef&) const = default;
};

/// An ordered list of parameters spanning a discrete configuration space.
struct ConfigSpace {
    std::vector<ParameterDef> params;

    bool operator==(const ConfigSpace&) const = default;
};

/// One point in an 8-parameter space, in grid row order:
/// cluster core counts, cluster CPU frequencies, GPU frequency, EMC frequency.
struct Configuration {
    int cores_c1 = 0;
    int cores_c2 = 0;
    int cores_c3 = 0;
    std::int64_t freq_c1_khz = 0;
    std::int64_t freq_c2_khz = 0;
    std::int64_t freq_c3_khz = 0;
    std::int64_t gpu_freq_khz = 0;
    std::int64_t emc_freq_khz = 0;

    bool operator==(const Configuration&) const = default;
};

inline constexpr std::size_t kConfigParamCount = 8;

/// Field value by parameter position (0..7).
std::int64_t config_value(const Configuration& config, std::size_t param_index);
void set_config_value(Configuration& config, std::size_t param_index, std::int64_t value);

/// The canonical Jetson Orin space: parameter counts (4,5,5,29,29,29,11,4)
/// with grids linearly spaced between the endpoint frequencies, rounded to
/// the nearest kHz. Deterministic; always returns the same space.
ConfigSpace build_orin_space();

/// Checks per-parameter invariants (non-empty, strictly increasing, value
/// signs by kind). Throws ArgumentError on violation.
void validate_space(const ConfigSpace& space);

/// Throws MembershipError naming the first field whose value is not on its
/// grid. The space must have exactly 8 parameters.
void validate_config(const ConfigSpace& space, const Configuration& config);

/// Exact number of points in the space (product of grid sizes).
std::uint64_t cardinality(const ConfigSpace& space);

/// Mixed-radix index of a configuration: digit order follows the parameter
/// order, first parameter most significant, last (EMC) least significant.
std::uint64_t encode_index(const ConfigSpace& space, const Configuration& config);

/// Inverse of encode_index. Throws RangeError if index >= cardinality.
Configuration decode_index(const ConfigSpace& space, std::uint64_t index);

/// Uniform stream of configurations over the space indices, drawn with
/// replacement from a splitmix64 stream seeded with `seed`. Successive calls
/// continue the same stream.
class IndexSampler {
public:
    IndexSampler(const ConfigSpace& space, std::uint64_t seed);

    std::uint64_t next_index();
    Configuration next();

private:
    const ConfigSpace* space_;
    std::uint64_t cardinality_;
    SplitMix64 rng_;
};

/// n uniform draws (with replacement) from the space under the fixed PRNG.
/// Deterministic for a given (seed, n).
std::vector<Configuration> random_sample(const ConfigSpace& space, std::uint64_t seed,
                                         std::size_t n);

/// JSON space definition: {"params":[{"name":...,"kind":...,"values":[...]}]}
std::string space_to_json(const ConfigSpace& space);
ConfigSpace space_from_json(std::string_view json_text);
ConfigSpace load_space_file(const std::filesystem::path& path);

}  // namespace jexplore
