#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "jexplore/configspace.hpp"
#include "jexplore/measurement.hpp"
#include "jexplore/protocol.hpp"
#include "jexplore/records.hpp"
#include "jexplore/search.hpp"

namespace jexplore {

/// One exploration run: which clients to drive, which algorithm proposes,
/// how many samples to record, and where the CSV goes.
struct ExplorationPlan {
    std::vector<std::string> client_addresses;
    std::string algorithm = "random";
    std::map<std::string, std::string> algorithm_params;
    std::uint64_t seed = 0;
    std::uint64_t budget = 1;   // total samples to record
    std::size_t batch = 1;      // proposals requested from the algorithm at a time
    WorkloadSpec workload;
    MeterSet meters;
    std::filesystem::path output_path;
    bool deterministic = false;  // logical timestamps instead of wall-clock ones
};

void validate_plan(const ExplorationPlan& plan);

/// Drives the search over the connected clients: proposes up to `batch`
/// configurations at a time, assigns each to the first idle client (one
/// outstanding sample per client), records every RESULT exactly once (keyed
/// by sample_id), feeds completions back to the algorithm, and stops after
/// exactly `budget` records. Rows stream to the CSV as they complete. A
/// client lost mid-sample gets its sample reassigned; losing every client
/// aborts with the partial CSV flushed. Returns records in completion order.
std::vector<SampleRecord> explore(const ExplorationPlan& plan, const ConfigSpace& space,
                                  SearchAlgorithm& algorithm);

/// Convenience overload over the Orin space and the plan's named algorithm.
std::vector<SampleRecord> explore(const ExplorationPlan& plan);

/// In-process exploration against a virtual sim client (no sockets), for
/// fast local runs. Exercises the algorithm with the same propose/notify
/// policy as the socket host.
struct SimRunOptions {
    std::string preset = "llama";
    std::uint64_t samples = 1;
    std::uint64_t seed = 0;
    std::filesystem::path output_path;
    std::string algorithm = "random";
    std::map<std::string, std::string> algorithm_params;
    std::map<std::string, std::string> workload_params;
    std::size_t batch = 1;
    MeterSet meters;
    bool deterministic = false;
    bool realtime = false;
    double timeout_s = 3600.0;
    std::filesystem::path model_file;
    std::string client_id = "sim0";
};

std::vector<SampleRecord> run_sim_exploration(const SimRunOptions& options,
                                              const ConfigSpace& space,
                                              SearchAlgorithm& algorithm);
std::vector<SampleRecord> run_sim_exploration(const SimRunOptions& options);

}  // namespace jexplore
