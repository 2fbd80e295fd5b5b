#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "jexplore/configspace.hpp"
#include "jexplore/records.hpp"
#include "jexplore/rng.hpp"

namespace jexplore {

/// Objective values under minimization, e.g. (power_w, time_s).
using Objectives = std::vector<double>;

/// a dominates b iff a <= b in every objective and a != b.
bool dominates(const Objectives& a, const Objectives& b);

/// Pluggable search contract driven by the exploration loop. Implementations
/// are stateful across calls and must tolerate notify arriving out of
/// proposal order. propose never returns invalid configurations and
/// propose(0) returns nothing; it may also return fewer than requested when
/// the algorithm is waiting for outstanding evaluations.
class SearchAlgorithm {
public:
    virtual ~SearchAlgorithm() = default;

    virtual std::vector<Configuration> propose(std::size_t n) = 0;
    virtual void notify(std::span<const SampleRecord> completed) = 0;
};

/// Seeded uniform sampling over the space. Successive propose calls continue
/// one splitmix64 stream, so propose(a) followed by propose(b) equals
/// random_sample(space, seed, a + b).
class RandomSearch final : public SearchAlgorithm {
public:
    RandomSearch(ConfigSpace space, std::uint64_t seed);

    std::vector<Configuration> propose(std::size_t n) override;
    void notify(std::span<const SampleRecord>) override {}

private:
    ConfigSpace space_;
    IndexSampler sampler_;
};

/// Fast non-dominated sorting: front 0 is the non-dominated set, front k the
/// non-dominated set once fronts < k are removed. Every index appears in
/// exactly one front. Throws ArgumentError on non-finite points or mixed
/// dimensions.
std::vector<std::vector<std::size_t>> nondominated_sort(const std::vector<Objectives>& points);

/// NSGA-II crowding distance of each member of one front; boundary points of
/// every objective get infinity.
std::vector<double> crowding_distance(const std::vector<Objectives>& points,
                                      const std::vector<std::size_t>& front);

/// Dominated hypervolume of a 2-D minimization point set against a reference
/// point; points not strictly better than the reference contribute nothing.
double hypervolume_2d(const std::vector<std::array<double, 2>>& points,
                      const std::array<double, 2>& reference);

struct EvolutionaryOptions {
    std::size_t population_size = 20;  // >= 4 and even
    bool memory_objective = false;     // add memory_mb as a third minimized objective
};

/// Generational multi-objective baseline: genomes are the mixed-radix digit
/// vectors, parents are picked by binary tournament on (rank, crowding),
/// offspring come from uniform crossover (per-gene swap probability 1/2) and
/// per-gene uniform-reset mutation with probability 1/8, and survivors are
/// chosen by (mu+lambda) selection on rank then crowding. Deterministic
/// under the seed via splitmix64; generation 0 equals the random-search
/// proposals for the same seed.
class EvolutionarySearch final : public SearchAlgorithm {
public:
    EvolutionarySearch(ConfigSpace space, std::uint64_t seed, EvolutionaryOptions options = {});

    std::vector<Configuration> propose(std::size_t n) override;
    void notify(std::span<const SampleRecord> completed) override;

    /// Completed samples that matched no outstanding proposal.
    std::size_t unknown_notify_count() const noexcept { return unknown_notevents_; }

private:
    struct Individual {
        std::vector<std::size_t> genes;
        Objectives objectives;
        std::size_t rank = 0;
        double crowding = 0.0;
    };

    std::vector<std::size_t> random_genome();
    Configuration genome_to_config(const std::vector<std::size_t>& genes) const;
    std::uint64_t genome_index(const std::vector<std::size_t>& genes) const;
    Objectives record_objectives(const SampleRecord& record) const;
    const Individual& tournament_pick();
    void refill_queue();
    void environmental_selection();

    ConfigSpace space_;
    SplitMix64 rng_;
    EvolutionaryOptions options_;
    std::uint64_t cardinality_;
    std::vector<Individual> population_;
    std::vector<Individual> evaluated_;
    std::deque<std::vector<std::size_t>> queue_;
    std::map<std::uint64_t, std::size_t> outstanding_;  // genome index -> in-flight count
    std::size_t outstanding_total_ = 0;
    std::size_t unknown_notevents_ = 0;
};

/// Third-party algorithms register by name; the host looks them up from the
/// CLI. Factories receive the space, the seed, and free-form parameters
/// (for example "population").
using AlgorithmFactory = std::function<std::unique_ptr<SearchAlgorithm>(
    const ConfigSpace& space, std::uint64_t seed,
    const std::map<std::string, std::string>& params)>;

void register_algorithm(const std::string& name, AlgorithmFactory factory);
std::unique_ptr<SearchAlgorithm> make_algorithm(
    const std::string& name, const ConfigSpace& space, std::uint64_t seed,
    const std::map<std::string, std::string>& params = {});
std::vector<std::string> algorithm_names();

}  // namespace jexplore
