#include "jexplore/simdevice.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "jexplore/errors.hpp"

namespace jexplore {

WorkloadPreset llama_preset() {
    return {"llama", 20.0, 26000.0};
}

WorkloadPreset llava_preset() {
    return {"llava", 15.0, 28000.0};
}

namespace {

void validate_model_constants(const DeviceModel& m) {
    const auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!positive(m.alpha) || !positive(m.beta) || !positive(m.gamma)) {
        throw ArgumentError("latency weights must be positive");
    }
    if (std::abs(m.alpha + m.beta + m.gamma - 1.0) > 1e-9) {
        throw ArgumentError("latency weights must sum to 1");
    }
    if (!positive(m.w_g) || !positive(m.w_e) || !positive(m.w_c)) {
        throw ArgumentError("power weights must be positive");
    }
    if (std::abs(m.w_g + m.w_e + m.w_c - 1.0) > 1e-9) {
        throw ArgumentError("power weights must sum to 1");
    }
    if (!(m.c_floor > 0.0 && m.c_floor <= 1.0) || !(m.e_floor > 0.0 && m.e_floor <= 1.0)) {
        throw ArgumentError("rate floors must lie in (0, 1]");
    }
    if (!std::isfinite(m.kappa) || m.kappa < 1.0) {
        throw ArgumentError("kappa must be >= 1");
    }
    if (!std::isfinite(m.p_min_w) || !std::isfinite(m.p_max_w) || m.p_min_w <= 0.0 ||
        m.p_max_w <= m.p_min_w) {
        throw ArgumentError("power bounds must satisfy 0 < p_min < p_max");
    }
    if (!std::isfinite(m.noise_std) || m.noise_std < 0.0) {
        throw ArgumentError("noise_std must be >= 0");
    }
}

}  // namespace

Simulator::Simulator(DeviceModel model, ConfigSpace space)
    : model_(model), space_(std::move(space)), noise_rng_(model.noise_seed) {
    validate_model_constants(model_);
    validate_space(space_);
    if (space_.params.size() != kConfigParamCount) {
        throw ArgumentError("device model needs an 8-parameter space");
    }
    gpu_max_ = static_cast<double>(space_.params[6].values.back());
    cpu_norm_ = 0.0;
    for (std::size_t cluster = 0; cluster < 3; ++cluster) {
        cpu_norm_ += static_cast<double>(space_.params[cluster].values.back()) *
                     static_cast<double>(space_.params[cluster + 3].values.back());
    }
    if (cpu_norm_ <= 0.0) {
        throw ArgumentError("space admits no active CPU core");
    }
    const auto& emc_values = space_.params[7].values;
    emc_max_ = static_cast<double>(emc_values.back());
    emc_lowest_ = emc_values.front();

    // Structural separation: slowest non-cutoff corner (everything minimal,
    // EMC one step above lowest) vs fastest cutoff corner (everything maximal,
    // EMC lowest). Both are unitless multiples of t_ref.
    if (emc_values.size() >= 2) {
        Configuration slow_noncut;
        Configuration fast_cut;
        for (std::size_t i = 0; i < kConfigParamCount; ++i) {
            set_config_value(slow_noncut, i, space_.params[i].values.front());
            set_config_value(fast_cut, i, space_.params[i].values.back());
        }
        slow_noncut.emc_freq_khz = emc_values[1];
        fast_cut.emc_freq_khz = emc_lowest_;

        const auto ratio = [this](const Configuration& c) {
            const double g = gpu_rate(c);
            const double cp = model_.c_floor + (1.0 - model_.c_floor) * cpu_rate(c);
            const double ep = model_.e_floor + (1.0 - model_.e_floor) * emc_rate(c);
            const double mult = c.emc_freq_khz == emc_lowest_ ? model_.kappa : 1.0;
            return (model_.alpha / g + model_.beta / ep + model_.gamma / cp) * mult;
        };
        noncutoff_max_ratio_ = ratio(slow_noncut);
        cutoff_min_ratio_ = ratio(fast_cut);
        if (cutoff_min_ratio_ <= noncutoff_max_ratio_) {
            throw ArgumentError(
                "model violates the EMC separation condition: kappa is too small "
                "to keep lowest-EMC latencies above all others");
        }
    } else {
        noncutoff_max_ratio_ = 0.0;
        cutoff_min_ratio_ = 0.0;
    }
}

double Simulator::gpu_rate(const Configuration& config) const {
    return static_cast<double>(config.gpu_freq_khz) / gpu_max_;
}

double Simulator::cpu_rate(const Configuration& config) const {
    const double weighted = static_cast<double>(config.cores_c1 * config.freq_c1_khz +
                                                config.cores_c2 * config.freq_c2_khz +
                                                config.cores_c3 * config.freq_c3_khz);
    return weighted / cpu_norm_;
}

double Simulator::emc_rate(const Configuration& config) const {
    return static_cast<double>(config.emc_freq_khz) / emc_max_;
}

double Simulator::noise_factor() const {
    if (model_.noise_std == 0.0) {
        return 1.0;
    }
    std::normal_distribution<double> dist(0.0, model_.noise_std);
    return std::max(0.05, 1.0 + dist(noise_rng_));
}

double Simulator::latency_s(const WorkloadPreset& preset, const Configuration& config) const {
    validate_config(space_, config);
    if (preset.t_ref_s <= 0.0 || preset.mem_base_mb <= 0.0) {
        throw ArgumentError("preset " + preset.name + " has non-positive constants");
    }
    const double g = gpu_rate(config);
    const double cp = model_.c_floor + (1.0 - model_.c_floor) * cpu_rate(config);
    const double ep = model_.e_floor + (1.0 - model_.e_floor) * emc_rate(config);
    const double multiplier = config.emc_freq_khz == emc_lowest_ ? model_.kappa : 1.0;
    const double latency =
        preset.t_ref_s * (model_.alpha / g + model_.beta / ep + model_.gamma / cp) * multiplier;
    return latency * noise_factor();
}

double Simulator::power_w(const Configuration& config) const {
    validate_config(space_, config);
    const double mix = model_.w_g * gpu_rate(config) + model_.w_e * emc_rate(config) +
                       model_.w_c * cpu_rate(config);
    const double power = model_.p_min_w + (model_.p_max_w - model_.p_min_w) * mix;
    return std::clamp(power * noise_factor(), model_.p_min_w, model_.p_max_w);
}

double Simulator::memory_mb(const WorkloadPreset& preset, const Configuration& config) const {
    validate_config(space_, config);
    return preset.mem_base_mb;
}

SimConfigApplier::SimConfigApplier(ConfigSpace space) : space_(std::move(space)) {}

void SimConfigApplier::apply(const Configuration& config) {
    validate_config(space_, config);
    current_ = config;
}

const Configuration& SimConfigApplier::current() const {
    if (!current_) {
        throw ArgumentError("no configuration applied yet");
    }
    return *current_;
}

JetsonOrinApplier::JetsonOrinApplier(ConfigSpace space) : space_(std::move(space)) {}

std::vector<std::string> JetsonOrinApplier::planned_writes(const Configuration& config) const {
    validate_config(space_, config);
    std::vector<std::string> writes;
    const int cores[] = {config.cores_c1, config.cores_c2, config.cores_c3};
    // Cluster n owns CPUs 4n..4n+3; CPU 0 stays online unconditionally.
    for (int cluster = 0; cluster < 3; ++cluster) {
        for (int cpu = cluster * 4; cpu < cluster * 4 + 4; ++cpu) {
            if (cpu == 0) {
                continue;
            }
            const int online = (cpu - cluster * 4) < cores[cluster] ? 1 : 0;
            writes.push_back("/sys/devices/system/cpu/cpu" + std::to_string(cpu) +
                             "/online <- " + std::to_string(online));
        }
    }
    const std::int64_t freqs[] = {config.freq_c1_khz, config.freq_c2_khz, config.freq_c3_khz};
    for (int cluster = 0; cluster < 3; ++cluster) {
        const std::string policy =
            "/sys/devices/system/cpu/cpufreq/policy" + std::to_string(cluster * 4);
        writes.push_back(policy + "/scaling_min_freq <- " + std::to_string(freqs[cluster]));
        writes.push_back(policy + "/scaling_max_freq <- " + std::to_string(freqs[cluster]));
    }
    const std::string gpu_hz = std::to_string(config.gpu_freq_khz * 1000);
    writes.push_back("/sys/devices/platform/17000000.gpu/devfreq/17000000.gpu/min_freq <- " +
                     gpu_hz);
    writes.push_back("/sys/devices/platform/17000000.gpu/devfreq/17000000.gpu/max_freq <- " +
                     gpu_hz);
    writes.push_back("/sys/kernel/debug/bpmp/debug/clk/emc/rate <- " +
                     std::to_string(config.emc_freq_khz * 1000));
    writes.push_back("/sys/kernel/debug/bpmp/debug/clk/emc/mrq_rate_locked <- 1");
    return writes;
}

void JetsonOrinApplier::apply(const Configuration& config) {
    const std::vector<std::string> writes = planned_writes(config);
    std::ostringstream message;
    message << "jetson-orin hardware control is not implemented; applying this "
               "configuration would write:";
    for (const std::string& w : writes) {
        message << "\n  " << w;
    }
    throw NotImplementedError(message.str());
}

ModelSpec default_model_spec() {
    ModelSpec spec;
    spec.presets = {llama_preset(), llava_preset()};
    return spec;
}

namespace {

void read_double(const nlohmann::json& obj, const char* key, double& out) {
    if (!obj.contains(key)) {
        return;
    }
    if (!obj[key].is_number()) {
        throw ParseError(std::string("model field ") + key + " must be a number");
    }
    out = obj[key].get<double>();
}

}  // namespace

ModelSpec model_spec_from_json(std::string_view json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("model file is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) {
        throw ParseError("model file must be a JSON object");
    }
    ModelSpec spec = default_model_spec();
    if (doc.contains("model")) {
        const auto& m = doc["model"];
        if (!m.is_object()) {
            throw ParseError("\"model\" must be an object");
        }
        read_double(m, "alpha", spec.model.alpha);
        read_double(m, "beta", spec.model.beta);
        read_double(m, "gamma", spec.model.gamma);
        read_double(m, "kappa", spec.model.kappa);
        read_double(m, "c_floor", spec.model.c_floor);
        read_double(m, "e_floor", spec.model.e_floor);
        read_double(m, "p_min_w", spec.model.p_min_w);
        read_double(m, "p_max_w", spec.model.p_max_w);
        read_double(m, "w_g", spec.model.w_g);
        read_double(m, "w_e", spec.model.w_e);
        read_double(m, "w_c", spec.model.w_c);
        read_double(m, "noise_std", spec.model.noise_std);
        if (m.contains("noise_seed")) {
            if (!m["noise_seed"].is_number_unsigned()) {
                throw ParseError("model noise_seed must be a non-negative integer");
            }
            spec.model.noise_seed = m["noise_seed"].get<std::uint64_t>();
        }
    }
    if (doc.contains("presets")) {
        const auto& presets = doc["presets"];
        if (!presets.is_object()) {
            throw ParseError("\"presets\" must be an object keyed by preset name");
        }
        for (const auto& item : presets.items()) {
            WorkloadPreset preset{item.key(), 0.0, 0.0};
            for (WorkloadPreset& existing : spec.presets) {
                if (existing.name == preset.name) {
                    preset = existing;
                    break;
                }
            }
            if (!item.value().is_object()) {
                throw ParseError("preset " + item.key() + " must be an object");
            }
            read_double(item.value(), "t_ref_s", preset.t_ref_s);
            read_double(item.value(), "mem_base_mb", preset.mem_base_mb);
            if (preset.t_ref_s <= 0.0 || preset.mem_base_mb <= 0.0) {
                throw ArgumentError("preset " + preset.name +
                                    " needs positive t_ref_s and mem_base_mb");
            }
            bool replaced = false;
            for (WorkloadPreset& existing : spec.presets) {
                if (existing.name == preset.name) {
                    existing = preset;
                    replaced = true;
                    break;
                }
            }
            if (!replaced) {
                spec.presets.push_back(preset);
            }
        }
    }
    return spec;
}

ModelSpec load_model_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open model file " + path.string());
    }
    std::ostringstream text;
    text << in.rdbuf();
    return model_spec_from_json(text.str());
}

namespace {

class SimBackend final : public DeviceBackend {
public:
    SimBackend(ModelSpec spec, ConfigSpace space, std::string default_preset, bool realtime)
        : simulator_(spec.model, space),
          applier_(std::move(space)),
          presets_(std::move(spec.presets)),
          default_preset_(std::move(default_preset)),
          realtime_(realtime) {
        resolve_preset(default_preset_);  // fail fast on an unknown default
    }

    DeviceKind kind() const noexcept override { return DeviceKind::Sim; }

    void apply(const Configuration& config) override { applier_.apply(config); }

    SampleOutcome run_workload(const WorkloadSpec& workload, const MeterSet& meters,
                               double timeout_s) override {
        SampleOutcome outcome;
        try {
            validate_meters(meters);
            if (!applier_.has_current()) {
                throw ArgumentError("no configuration applied before the workload run");
            }
            WorkloadPreset preset =
                resolve_preset(workload.name.empty() ? default_preset_ : workload.name);
            apply_workload_params(preset, workload.params);

            const Configuration& config = applier_.current();
            const double latency = simulator_.latency_s(preset, config);
            if (latency > timeout_s) {
                outcome.status = SampleStatus::Timeout;
                outcome.error_msg = "modeled latency exceeds the per-run timeout";
                return outcome;
            }
            outcome.metrics = measure_run(make_runner(preset, config, latency), meters);
            outcome.status = SampleStatus::Ok;
        } catch (const Error& e) {
            outcome.status = SampleStatus::Error;
            outcome.metrics = MeasurementSet{};
            outcome.error_msg = e.what();
        }
        return outcome;
    }

private:
    WorkloadPreset resolve_preset(const std::string& name) const {
        for (const WorkloadPreset& preset : presets_) {
            if (preset.name == name) {
                return preset;
            }
        }
        throw ArgumentError("unknown workload preset: " + name);
    }

    // Workload parameters may override the preset constants; unknown keys are
    // passed through untouched (the harness is agnostic to the workload).
    static void apply_workload_params(WorkloadPreset& preset,
                                      const std::map<std::string, std::string>& params) {
        for (const auto& [key, value] : params) {
            if (key != "t_ref_s" && key != "mem_base_mb") {
                continue;
            }
            double parsed = 0.0;
            try {
                std::size_t consumed = 0;
                parsed = std::stod(value, &consumed);
                if (consumed != value.size()) {
                    throw std::invalid_argument(value);
                }
            } catch (const std::exception&) {
                throw ArgumentError("workload param " + key + " is not a number: " + value);
            }
            if (parsed <= 0.0) {
                throw ArgumentError("workload param " + key + " must be positive");
            }
            (key == "t_ref_s" ? preset.t_ref_s : preset.mem_base_mb) = parsed;
        }
    }

    WorkloadRunner make_runner(const WorkloadPreset& preset, const Configuration& config,
                               double latency_s) {
        WorkloadRunner runner;
        const double power = simulator_.power_w(config);
        const double memory = simulator_.memory_mb(preset, config);
        runner.power_probe_w = [power] { return power; };
        runner.peak_memory_mb = [memory] { return memory; };
        if (realtime_) {
            runner.realtime = true;
            runner.run = [latency_s] {
                std::this_thread::sleep_for(std::chrono::duration<double>(latency_s));
            };
        } else {
            runner.run = [this, latency_s] { virtual_now_s_ += latency_s; };
            runner.clock_now_s = [this] { return virtual_now_s_; };
        }
        return runner;
    }

    Simulator simulator_;
    SimConfigApplier applier_;
    std::vector<WorkloadPreset> presets_;
    std::string default_preset_;
    bool realtime_;
    double virtual_now_s_ = 0.0;
};

class JetsonOrinBackend final : public DeviceBackend {
public:
    explicit JetsonOrinBackend(ConfigSpace space) : applier_(std::move(space)) {}

    DeviceKind kind() const noexcept override { return DeviceKind::JetsonOrin; }

    void apply(const Configuration& config) override { applier_.apply(config); }

    SampleOutcome run_workload(const WorkloadSpec&, const MeterSet&, double) override {
        SampleOutcome outcome;
        outcome.status = SampleStatus::Error;
        outcome.error_msg = "jetson-orin workload execution is not implemented";
        return outcome;
    }

private:
    JetsonOrinApplier applier_;
};

}  // namespace

std::unique_ptr<DeviceBackend> make_sim_backend(ModelSpec spec, ConfigSpace space,
                                                std::string default_preset, bool realtime) {
    return std::make_unique<SimBackend>(std::move(spec), std::move(space),
                                        std::move(default_preset), realtime);
}

std::unique_ptr<DeviceBackend> make_jetson_orin_backend(ConfigSpace space) {
    return std::make_unique<JetsonOrinBackend>(std::move(space));
}

}  // namespace jexplore
