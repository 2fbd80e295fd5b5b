#pragma once

#include <functional>
#include <optional>

namespace jexplore {

/// Which meters wrap a workload run, and how often the power probe is read.
struct MeterSet {
    bool time_enabled = true;
    bool power_enabled = true;
    bool memory_enabled = true;
    int power_sample_interval_ms = 100;

    bool operator==(const MeterSet&) const = default;
};

/// Throws ArgumentError unless at least one meter is enabled and the power
/// sampling interval is at least 1 ms.
void validate_meters(const MeterSet& meters);

/// Metrics of one run. A field is present iff its meter was enabled.
struct MeasurementSet {
    std::optional<double> time_s;       // wall-clock workload duration
    std::optional<double> power_w;      // mean of sampled instantaneous power
    std::optional<double> power_peak_w; // max of the same samples
    std::optional<double> memory_mb;    // peak memory after completion

    bool operator==(const MeasurementSet&) const = default;
};

/// A unit of work plus the probes its device backend exposes around it.
///
/// `run` executes the workload (exceptions propagate to the caller of
/// measure_run). `clock_now_s` is the time source bracketing the run; omit
/// it to use the wall clock. With `realtime` set, the power probe is sampled
/// on a background thread every power_sample_interval_ms while the workload
/// runs; otherwise only the guaranteed start-of-run sample is taken, which
/// is exact for backends whose power draw is constant during a run.
struct WorkloadRunner {
    std::function<void()> run;
    std::function<double()> power_probe_w;
    std::function<double()> peak_memory_mb;
    std::function<double()> clock_now_s;
    bool realtime = false;
};

/// Runs the workload under the enabled meters and collects a MeasurementSet.
/// On workload failure the exception propagates and partial measurements are
/// discarded.
MeasurementSet measure_run(const WorkloadRunner& runner, const MeterSet& meters);

}  // namespace jexplore
