#pragma once

#include <optional>
#include <string>

#include "jexplore/configspace.hpp"
#include "jexplore/measurement.hpp"
#include "jexplore/protocol.hpp"

namespace jexplore {

/// One explored sample: the configuration, its metrics and provenance.
/// Metric fields are present iff the corresponding meter was enabled and the
/// sample succeeded. The timestamp is ISO-8601 UTC, or a logical counter in
/// deterministic runs.
struct SampleRecord {
    std::string sample_id;
    std::string client_id;
    Configuration config;
    std::optional<double> time_s;
    std::optional<double> power_w;
    std::optional<double> memory_mb;
    SampleStatus status = SampleStatus::Ok;
    std::string timestamp;

    bool operator==(const SampleRecord&) const = default;
};

/// Checks the record invariants against the meters of its run: non-empty
/// ids, and status == ok implying exactly the enabled metrics are present.
void validate_record(const SampleRecord& record, const MeterSet& meters);

}  // namespace jexplore
