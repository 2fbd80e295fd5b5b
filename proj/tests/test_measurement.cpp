#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <chrono>
#include <thread>

#include "jexplore/errors.hpp"
#include "jexplore/measurement.hpp"

using namespace jexplore;

namespace {

// Virtual-clock runner advancing by `latency` when run; constant power.
WorkloadRunner virtual_runner(double* clock, double latency, double power, double memory) {
    WorkloadRunner runner;
    runner.run = [clock, latency] { *clock += latency; };
    runner.clock_now_s = [clock] { return *clock; };
    runner.power_probe_w = [power] { return power; };
    runner.peak_memory_mb = [memory] { return memory; };
    return runner;
}

}  // namespace

TEST_CASE("meter set invariants") {
    MeterSet none;
    none.time_enabled = none.power_enabled = none.memory_enabled = false;
    CHECK_THROWS_AS(validate_meters(none), ArgumentError);

    MeterSet zero_interval;
    zero_interval.power_sample_interval_ms = 0;
    CHECK_THROWS_AS(validate_meters(zero_interval), ArgumentError);

    CHECK_NOTHROW(validate_meters(MeterSet{}));
}

TEST_CASE("constant model power gives mean == peak == the constant") {
    double clock = 0.0;
    const MeasurementSet result =
        measure_run(virtual_runner(&clock, 1.0, 42.0, 26000.0), MeterSet{});
    CHECK(result.power_w == 42.0);
    CHECK(result.power_peak_w == 42.0);
    CHECK(result.memory_mb == 26000.0);
}

TEST_CASE("disabled meters leave fields absent") {
    MeterSet meters;
    meters.power_enabled = false;
    meters.memory_enabled = false;
    WorkloadRunner runner;
    runner.run = [] {};
    const MeasurementSet result = measure_run(runner, meters);
    REQUIRE(result.time_s.has_value());
    CHECK(*result.time_s >= 0.0);
    CHECK_FALSE(result.power_w.has_value());
    CHECK_FALSE(result.power_peak_w.has_value());
    CHECK_FALSE(result.memory_mb.has_value());
}

TEST_CASE("virtual clock makes the measured time exactly the model latency") {
    double clock = 100.0;
    const MeasurementSet result =
        measure_run(virtual_runner(&clock, 307.25602097458875, 14.5, 26000.0), MeterSet{});
    CHECK(*result.time_s == 307.25602097458875);
}

TEST_CASE("meter selection does not perturb the other meters") {
    double clock_a = 0.0;
    const MeasurementSet with_power =
        measure_run(virtual_runner(&clock_a, 2.5, 30.0, 26000.0), MeterSet{});

    MeterSet no_power;
    no_power.power_enabled = false;
    double clock_b = 0.0;
    const MeasurementSet without_power =
        measure_run(virtual_runner(&clock_b, 2.5, 30.0, 26000.0), no_power);

    CHECK(with_power.time_s == without_power.time_s);
    CHECK(with_power.memory_mb == without_power.memory_mb);
}

TEST_CASE("realtime sampling keeps the mean inside the sampled range") {
    std::atomic<int> tick{0};
    WorkloadRunner runner;
    runner.realtime = true;
    runner.run = [] { std::this_thread::sleep_for(std::chrono::milliseconds(30)); };
    runner.power_probe_w = [&tick] { return 20.0 + static_cast<double>(tick++ % 5); };
    runner.peak_memory_mb = [] { return 100.0; };
    MeterSet meters;
    meters.power_sample_interval_ms = 1;
    const MeasurementSet result = measure_run(runner, meters);
    REQUIRE(result.power_w.has_value());
    CHECK(*result.power_w >= 20.0);
    CHECK(*result.power_w <= 24.0);
    CHECK(*result.power_peak_w >= *result.power_w);
    CHECK(*result.time_s > 0.0);
}

TEST_CASE("workload failure propagates and discards partial measurements") {
    WorkloadRunner runner;
    runner.run = [] { throw IoError("workload exploded"); };
    runner.power_probe_w = [] { return 1.0; };
    runner.peak_memory_mb = [] { return 1.0; };
    CHECK_THROWS_AS(measure_run(runner, MeterSet{}), IoError);
}

TEST_CASE("missing probes for enabled meters are rejected") {
    WorkloadRunner runner;
    runner.run = [] {};
    CHECK_THROWS_AS(measure_run(runner, MeterSet{}), ArgumentError);  // no power probe
    WorkloadRunner no_work;
    CHECK_THROWS_AS(measure_run(no_work, MeterSet{}), ArgumentError);
}
