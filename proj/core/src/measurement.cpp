#include "jexplore/measurement.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <numeric>
#include <thread>
#include <vector>

#include "jexplore/errors.hpp"

namespace jexplore {

void validate_meters(const MeterSet& meters) {
    if (!meters.time_enabled && !meters.power_enabled && !meters.memory_enabled) {
        throw ArgumentError("at least one meter must be enabled");
    }
    if (meters.power_sample_interval_ms < 1) {
        throw ArgumentError("power sample interval must be >= 1 ms");
    }
}

namespace {

double wall_clock_s() {
    const auto now = std::chrono::steady_clock::now().time_since_epoch();
    return std::chrono::duration<double>(now).count();
}

}  // namespace

MeasurementSet measure_run(const WorkloadRunner& runner, const MeterSet& meters) {
    validate_meters(meters);
    if (!runner.run) {
        throw ArgumentError("runner has no workload");
    }
    if (meters.power_enabled && !runner.power_probe_w) {
        throw ArgumentError("power meter enabled but runner has no power probe");
    }
    if (meters.memory_enabled && !runner.peak_memory_mb) {
        throw ArgumentError("memory meter enabled but runner has no memory probe");
    }
    const std::function<double()> clock = runner.clock_now_s ? runner.clock_now_s : wall_clock_s;

    std::vector<double> power_samples;
    if (meters.power_enabled) {
        power_samples.push_back(runner.power_probe_w());  // guaranteed start sample
    }

    std::atomic<bool> sampling{meters.power_enabled && runner.realtime};
    std::vector<double> threaded_samples;
    std::thread sampler;
    if (sampling.load()) {
        sampler = std::thread([&] {
            const auto interval = std::chrono::milliseconds(meters.power_sample_interval_ms);
            while (sampling.load(std::memory_order_relaxed)) {
                std::this_thread::sleep_for(interval);
                if (!sampling.load(std::memory_order_relaxed)) {
                    break;
                }
                threaded_samples.push_back(runner.power_probe_w());
            }
        });
    }

    const double t0 = clock();
    try {
        runner.run();
    } catch (...) {
        sampling.store(false);
        if (sampler.joinable()) {
            sampler.join();
        }
        throw;
    }
    const double t1 = clock();
    sampling.store(false);
    if (sampler.joinable()) {
        sampler.join();
        power_samples.insert(power_samples.end(), threaded_samples.begin(),
                             threaded_samples.end());
    }

    MeasurementSet result;
    if (meters.time_enabled) {
        result.time_s = std::max(0.0, t1 - t0);
    }
    if (meters.power_enabled) {
        const double sum = std::accumulate(power_samples.begin(), power_samples.end(), 0.0);
        result.power_w = sum / static_cast<double>(power_samples.size());
        result.power_peak_w = *std::max_element(power_samples.begin(), power_samples.end());
    }
    if (meters.memory_enabled) {
        result.memory_mb = runner.peak_memory_mb();
    }
    return result;
}

}  // namespace jexplore
