#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "jexplore/configspace.hpp"
#include "jexplore/measurement.hpp"
#include "jexplore/protocol.hpp"

namespace jexplore {

/// Named simulated workload: latency at the all-max configuration and a
/// flat memory footprint.
struct WorkloadPreset {
    std::string name;
    double t_ref_s = 0.0;
    double mem_base_mb = 0.0;

    bool operator==(const WorkloadPreset&) const = default;
};

WorkloadPreset llama_preset();  // t_ref 20 s, 26000 MB
WorkloadPreset llava_preset();  // t_ref 15 s, 28000 MB

/// Constants of the closed-form latency/power model.
///
/// With normalized rates G = gpu/gpu_max, C = sum(cores_i*freq_i)/cpu_norm,
/// E = emc/emc_max and floored rates C' = c_floor + (1-c_floor)*C,
/// E' = e_floor + (1-e_floor)*E:
///
///   latency  = t_ref * (alpha/G + beta/E' + gamma/C') * (kappa at lowest EMC)
///   power    = p_min + (p_max - p_min) * (w_g*G + w_e*E + w_c*C)
///   memory   = mem_base (configuration-independent)
///
/// kappa multiplies latency only when the EMC frequency sits on the lowest
/// grid value, which separates those samples into their own time cluster.
struct DeviceModel {
    double alpha = 0.50;
    double beta = 0.25;
    double gamma = 0.25;
    double kappa = 3.5;
    double c_floor = 0.15;
    double e_floor = 0.35;
    double p_min_w = 10.0;
    double p_max_w = 42.0;
    double w_g = 0.55;
    double w_e = 0.15;
    double w_c = 0.30;
    double noise_std = 0.0;  // relative Gaussian noise on latency/power; 0 = exact
    std::uint64_t noise_seed = 0;

    bool operator==(const DeviceModel&) const = default;
};

/// Evaluates the device model over one configuration space.
///
/// Construction validates the model constants, including the structural
/// separation condition: the slowest non-cutoff configuration must stay
/// strictly faster than the fastest lowest-EMC configuration, so the EMC
/// cut-off cluster can never blend into the main cloud.
class Simulator {
public:
    Simulator(DeviceModel model, ConfigSpace space);

    double latency_s(const WorkloadPreset& preset, const Configuration& config) const;
    double power_w(const Configuration& config) const;
    double memory_mb(const WorkloadPreset& preset, const Configuration& config) const;

    const DeviceModel& model() const noexcept { return model_; }
    const ConfigSpace& space() const noexcept { return space_; }

    /// Unitless latency bounds of the separation condition: max over non-cutoff
    /// configurations and min over lowest-EMC configurations, both divided by
    /// t_ref. Multiply by a preset's t_ref_s for seconds.
    double noncutoff_latency_max_ratio() const noexcept { return noncutoff_max_ratio_; }
    double cutoff_latency_min_ratio() const noexcept { return cutoff_min_ratio_; }

private:
    double gpu_rate(const Configuration& config) const;
    double cpu_rate(const Configuration& config) const;
    double emc_rate(const Configuration& config) const;
    double noise_factor() const;

    DeviceModel model_;
    ConfigSpace space_;
    double gpu_max_ = 0.0;
    double cpu_norm_ = 0.0;  // sum over clusters of max cores * max freq
    double emc_max_ = 0.0;
    std::int64_t emc_lowest_ = 0;
    double noncutoff_max_ratio_ = 0.0;
    double cutoff_min_ratio_ = 0.0;
    mutable std::mt19937_64 noise_rng_;
};

/// Applies a configuration to a device (the configuration-management role).
class ConfigApplier {
public:
    virtual ~ConfigApplier() = default;

    /// Makes the configuration current. Throws MembershipError for off-grid
    /// values; backends that cannot apply throw NotImplementedError.
    virtual void apply(const Configuration& config) = 0;
};

/// Stores the applied configuration for later model evaluation.
class SimConfigApplier final : public ConfigApplier {
public:
    explicit SimConfigApplier(ConfigSpace space);

    void apply(const Configuration& config) override;

    bool has_current() const noexcept { return current_.has_value(); }
    const Configuration& current() const;

private:
    ConfigSpace space_;
    std::optional<Configuration> current_;
};

/// Stub for real Jetson Orin hardware: validates the configuration and
/// reports the sysfs/nvpmodel writes it would perform, then refuses to
/// apply. Real hardware control is intentionally out of scope.
class JetsonOrinApplier final : public ConfigApplier {
public:
    explicit JetsonOrinApplier(ConfigSpace space);

    /// Always throws: MembershipError for invalid configurations, otherwise
    /// NotImplementedError whose message lists the intended writes.
    void apply(const Configuration& config) override;

    /// The sysfs/nvpmodel writes applying `config` would perform.
    std::vector<std::string> planned_writes(const Configuration& config) const;

private:
    ConfigSpace space_;
};

/// Model constants plus workload presets, as loaded from a model file.
struct ModelSpec {
    DeviceModel model;
    std::vector<WorkloadPreset> presets;  // built-ins unless overridden
};

ModelSpec default_model_spec();
/// Parses a JSON model file; absent fields keep their defaults.
ModelSpec model_spec_from_json(std::string_view json_text);
ModelSpec load_model_file(const std::filesystem::path& path);

/// Outcome of one measured sample on a device backend.
struct SampleOutcome {
    SampleStatus status = SampleStatus::Ok;
    MeasurementSet metrics;
    std::string error_msg;
};

/// One device as seen by the client daemon: configuration application plus
/// measured workload execution.
class DeviceBackend {
public:
    virtual ~DeviceBackend() = default;

    virtual DeviceKind kind() const noexcept = 0;
    virtual void apply(const Configuration& config) = 0;

    /// Runs the named workload under the applied configuration. Per-sample
    /// failures come back as an error/timeout outcome, not an exception.
    virtual SampleOutcome run_workload(const WorkloadSpec& workload, const MeterSet& meters,
                                       double timeout_s) = 0;
};

/// Simulated backend. With realtime=false runs use a virtual clock, so the
/// measured time equals the model latency exactly and suites finish in
/// milliseconds; realtime runs actually sleep for the modeled duration.
std::unique_ptr<DeviceBackend> make_sim_backend(ModelSpec spec, ConfigSpace space,
                                                std::string default_preset, bool realtime);

/// Jetson Orin stub backend; every sample fails with the planned-write list.
std::unique_ptr<DeviceBackend> make_jetson_orin_backend(ConfigSpace space);

}  // namespace jexplore
