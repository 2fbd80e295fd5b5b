#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "jexplore/configspace.hpp"
#include "jexplore/records.hpp"

namespace jexplore {

/// Result of the EMC cut-off detection over one run.
struct EmcCutoffReport {
    bool separated = false;
    double gap_s = 0.0;  // largest consecutive gap in sorted times
    std::vector<std::string> cluster_ids;  // high-time group when separated
    bool all_cluster_lowest_emc = false;
    bool all_lowest_emc_in_cluster = false;

    bool operator==(const EmcCutoffReport&) const = default;
};

/// Post-hoc summary of one exploration run.
struct AnalysisReport {
    std::size_t n_samples = 0;
    double power_min_w = 0.0;
    double power_max_w = 0.0;
    double time_min_s = 0.0;
    double time_max_s = 0.0;
    double spearman_rho = 0.0;
    std::vector<std::string> pareto_ids;
    EmcCutoffReport emc_cutoff;
};

/// sample_ids of the non-dominated set minimizing (power_w, time_s).
/// Duplicates of a frontier point are all included. Throws SchemaError if a
/// record lacks either metric.
std::vector<std::string> pareto_front(const std::vector<SampleRecord>& records);

/// Spearman rank correlation with average ranks for ties.
/// Throws ArgumentError on length mismatch or fewer than 2 points.
double spearman(std::span<const double> x, std::span<const double> y);

/// Detects the EMC cut-off cluster: sorts records by time, finds the largest
/// consecutive gap, and declares separation iff that gap exceeds
/// gap_threshold times the median gap. The cluster is the high-time group;
/// the report also says whether the cluster and the lowest-EMC sample set
/// coincide. Needs at least 4 records with time_s.
EmcCutoffReport emc_cutoff_report(const std::vector<SampleRecord>& records,
                                  const ConfigSpace& space, double gap_threshold = 3.0);

/// Reads a results CSV and composes ranges, spearman, pareto_front and
/// emc_cutoff_report over its ok records.
AnalysisReport analyze(const std::filesystem::path& csv_path, const ConfigSpace& space,
                       double gap_threshold = 3.0);

/// Report as JSON with a fixed key order (stable for golden files).
std::string report_to_json(const AnalysisReport& report);

/// Scatter plot of the run: time on x (s), power on y (W), Pareto points
/// highlighted, linear axes with labeled ticks.
std::string scatter_svg(const std::vector<SampleRecord>& records,
                        const std::vector<std::string>& pareto_ids);

}  // namespace jexplore
