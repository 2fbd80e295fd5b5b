#include "jexplore/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

#include "jexplore/errors.hpp"

namespace jexplore {

namespace {

// Worst-case objective assigned to failed samples so the selection steers
// away from them without special-casing missing metrics.
constexpr double kFailedObjective = std::numeric_limits<double>::max() / 4.0;

void check_points(const std::vector<Objectives>& points) {
    if (points.empty()) {
        return;
    }
    const std::size_t dim = points.front().size();
    if (dim == 0) {
        throw ArgumentError("objective vectors must be non-empty");
    }
    for (const Objectives& p : points) {
        if (p.size() != dim) {
            throw ArgumentError("objective vectors have mixed dimensions");
        }
        for (const double v : p) {
            if (!std::isfinite(v)) {
                throw ArgumentError("objective values must be finite");
            }
        }
    }
}

}  // namespace

bool dominates(const Objectives& a, const Objectives& b) {
    bool strictly_better = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] > b[i]) {
            return false;
        }
        if (a[i] < b[i]) {
            strictly_better = true;
        }
    }
    return strictly_better;
}

RandomSearch::RandomSearch(ConfigSpace space, std::uint64_t seed)
    : space_(std::move(space)), sampler_(space_, seed) {}

std::vector<Configuration> RandomSearch::propose(std::size_t n) {
    std::vector<Configuration> configs;
    configs.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        configs.push_back(sampler_.next());
    }
    return configs;
}

std::vector<std::vector<std::size_t>> nondominated_sort(const std::vector<Objectives>& points) {
    check_points(points);
    const std::size_t n = points.size();
    std::vector<std::vector<std::size_t>> fronts;
    if (n == 0) {
        return fronts;
    }

    std::vector<std::vector<std::size_t>> dominated_by(n);
    std::vector<std::size_t> domination_count(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (dominates(points[i], points[j])) {
                dominated_by[i].push_back(j);
                ++domination_count[j];
            } else if (dominates(points[j], points[i])) {
                dominated_by[j].push_back(i);
                ++domination_count[i];
            }
        }
    }
    std::vector<std::size_t> current;
    for (std::size_t i = 0; i < n; ++i) {
        if (domination_count[i] == 0) {
            current.push_back(i);
        }
    }

    while (!current.empty()) {
        fronts.push_back(current);
        std::vector<std::size_t> next;
        for (const std::size_t i : current) {
            for (const std::size_t j : dominated_by[i]) {
                if (--domination_count[j] == 0) {
                    next.push_back(j);
                }
            }
        }
        std::sort(next.begin(), next.end());
        current = std::move(next);
    }
    return fronts;
}

std::vector<double> crowding_distance(const std::vector<Objectives>& points,
                                      const std::vector<std::size_t>& front) {
    check_points(points);
    std::vector<double> distance(front.size(), 0.0);
    if (front.empty()) {
        return distance;
    }
    const std::size_t dim = points[front.front()].size();
    if (front.size() <= 2) {
        std::fill(distance.begin(), distance.end(),
                  std::numeric_limits<double>::infinity());
        return distance;
    }
    std::vector<std::size_t> order(front.size());
    for (std::size_t m = 0; m < dim; ++m) {
        for (std::size_t i = 0; i < order.size(); ++i) {
            order[i] = i;
        }
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return points[front[a]][m] < points[front[b]][m];
        });
        const double lo = points[front[order.front()]][m];
        const double hi = points[front[order.back()]][m];
        distance[order.front()] = std::numeric_limits<double>::infinity();
        distance[order.back()] = std::numeric_limits<double>::infinity();
        if (hi <= lo) {
            continue;  // degenerate objective: interior spacing adds nothing
        }
        for (std::size_t i = 1; i + 1 < order.size(); ++i) {
            const double gap =
                points[front[order[i + 1]]][m] - points[front[order[i - 1]]][m];
            distance[order[i]] += gap / (hi - lo);
        }
    }
    return distance;
}

double hypervolume_2d(const std::vector<std::array<double, 2>>& points,
                      const std::array<double, 2>& reference) {
    std::vector<std::array<double, 2>> inside;
    for (const auto& p : points) {
        if (!std::isfinite(p[0]) || !std::isfinite(p[1])) {
            throw ArgumentError("hypervolume points must be finite");
        }
        if (p[0] < reference[0] && p[1] < reference[1]) {
            inside.push_back(p);
        }
    }
    std::sort(inside.begin(), inside.end());
    double volume = 0.0;
    double previous_y = reference[1];
    for (const auto& [x, y] : inside) {
        if (y >= previous_y) {
            continue;  // dominated by an earlier (smaller-x) point
        }
        volume += (reference[0] - x) * (previous_y - y);
        previous_y = y;
    }
    return volume;
}

EvolutionarySearch::EvolutionarySearch(ConfigSpace space, std::uint64_t seed,
                                       EvolutionaryOptions options)
    : space_(std::move(space)),
      rng_(seed),
      options_(options),
      cardinality_(cardinality(space_)) {
    if (space_.params.size() != kConfigParamCount) {
        throw ArgumentError("evolutionary search needs an 8-parameter space");
    }
    if (options_.population_size < 4 || options_.population_size % 2 != 0) {
        throw ArgumentError("population_size must be even and >= 4");
    }
}

std::vector<std::size_t> EvolutionarySearch::random_genome() {
    // Draw one uniform space index and split it into digits, matching the
    // random-search stream exactly.
    std::uint64_t index = rng_.next_below(cardinality_);
    std::vector<std::size_t> genes(kConfigParamCount, 0);
    for (std::size_t i = kConfigParamCount; i-- > 0;) {
        const std::uint64_t radix = space_.params[i].values.size();
        genes[i] = static_cast<std::size_t>(index % radix);
        index /= radix;
    }
    return genes;
}

Configuration EvolutionarySearch::genome_to_config(const std::vector<std::size_t>& genes) const {
    Configuration config;
    for (std::size_t i = 0; i < kConfigParamCount; ++i) {
        set_config_value(config, i, space_.params[i].values[genes[i]]);
    }
    return config;
}

std::uint64_t EvolutionarySearch::genome_index(const std::vector<std::size_t>& genes) const {
    std::uint64_t index = 0;
    for (std::size_t i = 0; i < kConfigParamCount; ++i) {
        index = index * space_.params[i].values.size() + genes[i];
    }
    return index;
}

Objectives EvolutionarySearch::record_objectives(const SampleRecord& record) const {
    const std::size_t dim = options_.memory_objective ? 3 : 2;
    Objectives objectives(dim, kFailedObjective);
    if (record.status != SampleStatus::Ok) {
        return objectives;
    }
    if (record.power_w) {
        objectives[0] = *record.power_w;
    }
    if (record.time_s) {
        objectives[1] = *record.time_s;
    }
    if (options_.memory_objective && record.memory_mb) {
        objectives[2] = *record.memory_mb;
    }
    return objectives;
}

const EvolutionarySearch::Individual& EvolutionarySearch::tournament_pick() {
    const std::size_t a = rng_.next_below(population_.size());
    const std::size_t b = rng_.next_below(population_.size());
    const Individual& ia = population_[a];
    const Individual& ib = population_[b];
    if (ia.rank != ib.rank) {
        return ia.rank < ib.rank ? ia : ib;
    }
    return ia.crowding >= ib.crowding ? ia : ib;
}

void EvolutionarySearch::environmental_selection() {
    std::vector<Individual> pool = population_;
    pool.insert(pool.end(), evaluated_.begin(), evaluated_.end());
    evaluated_.clear();

    std::vector<Objectives> points;
    points.reserve(pool.size());
    for (const Individual& ind : pool) {
        points.push_back(ind.objectives);
    }
    const auto fronts = nondominated_sort(points);

    population_.clear();
    for (std::size_t rank = 0; rank < fronts.size(); ++rank) {
        const auto& front = fronts[rank];
        const std::vector<double> crowd = crowding_distance(points, front);
        std::vector<std::size_t> order(front.size());
        for (std::size_t i = 0; i < order.size(); ++i) {
            order[i] = i;
        }
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return crowd[a] > crowd[b]; });
        for (const std::size_t i : order) {
            if (population_.size() == options_.population_size) {
                break;
            }
            Individual survivor = pool[front[i]];
            survivor.rank = rank;
            survivor.crowding = crowd[i];
            population_.push_back(std::move(survivor));
        }
        if (population_.size() == options_.population_size) {
            break;
        }
    }
}

void EvolutionarySearch::refill_queue() {
    if (!queue_.empty() || outstanding_total_ > 0) {
        return;  // a generation is still in flight
    }
    if (!evaluated_.empty()) {
        environmental_selection();
    }
    if (population_.empty()) {
        // Generation 0: uniform genomes from the shared stream definition.
        for (std::size_t i = 0; i < options_.population_size; ++i) {
            queue_.push_back(random_genome());
        }
        return;
    }
    while (queue_.size() < options_.population_size) {
        const std::vector<std::size_t> parent_a = tournament_pick().genes;
        const std::vector<std::size_t> parent_b = tournament_pick().genes;
        std::vector<std::size_t> child_a = parent_a;
        std::vector<std::size_t> child_b = parent_b;
        for (std::size_t g = 0; g < kConfigParamCount; ++g) {
            if (rng_.next_below(2) == 1) {
                std::swap(child_a[g], child_b[g]);
            }
        }
        for (auto* child : {&child_a, &child_b}) {
            for (std::size_t g = 0; g < kConfigParamCount; ++g) {
                if (rng_.next_below(kConfigParamCount) == 0) {
                    (*child)[g] = static_cast<std::size_t>(
                        rng_.next_below(space_.params[g].values.size()));
                }
            }
        }
        queue_.push_back(std::move(child_a));
        if (queue_.size() < options_.population_size) {
            queue_.push_back(std::move(child_b));
        }
    }
}

std::vector<Configuration> EvolutionarySearch::propose(std::size_t n) {
    std::vector<Configuration> configs;
    if (n == 0) {
        return configs;
    }
    refill_queue();
    while (configs.size() < n && !queue_.empty()) {
        const std::vector<std::size_t> genes = std::move(queue_.front());
        queue_.pop_front();
        ++outstanding_[genome_index(genes)];
        ++outstanding_total_;
        configs.push_back(genome_to_config(genes));
    }
    return configs;
}

void EvolutionarySearch::notify(std::span<const SampleRecord> completed) {
    for (const SampleRecord& record : completed) {
        std::uint64_t index = 0;
        try {
            index = encode_index(space_, record.config);
        } catch (const Error&) {
            ++unknown_notevents_;
            continue;
        }
        const auto it = outstanding_.find(index);
        if (it == outstanding_.end()) {
            ++unknown_notevents_;
            continue;
        }
        if (--it->second == 0) {
            outstanding_.erase(it);
        }
        --outstanding_total_;

        Individual individual;
        individual.genes.resize(kConfigParamCount);
        std::uint64_t rest = index;
        for (std::size_t i = kConfigParamCount; i-- > 0;) {
            const std::uint64_t radix = space_.params[i].values.size();
            individual.genes[i] = static_cast<std::size_t>(rest % radix);
            rest /= radix;
        }
        individual.objectives = record_objectives(record);
        evaluated_.push_back(std::move(individual));
    }
}

namespace {

std::size_t parse_population(const std::map<std::string, std::string>& params) {
    const auto it = params.find("population");
    if (it == params.end()) {
        return EvolutionaryOptions{}.population_size;
    }
    try {
        std::size_t consumed = 0;
        const long value = std::stol(it->second, &consumed);
        if (consumed != it->second.size() || value < 4) {
            throw std::invalid_argument(it->second);
        }
        return static_cast<std::size_t>(value);
    } catch (const std::exception&) {
        throw ArgumentError("invalid population parameter: " + it->second);
    }
}

std::map<std::string, AlgorithmFactory>& registry() {
    static std::map<std::string, AlgorithmFactory> algorithms = {
        {"random",
         [](const ConfigSpace& space, std::uint64_t seed,
            const std::map<std::string, std::string>&) {
             return std::make_unique<RandomSearch>(space, seed);
         }},
        {"evolutionary",
         [](const ConfigSpace& space, std::uint64_t seed,
            const std::map<std::string, std::string>& params) {
             EvolutionaryOptions options;
             options.population_size = parse_population(params);
             options.memory_objective = params.contains("memory_objective") &&
                                        params.at("memory_objective") == "1";
             return std::make_unique<EvolutionarySearch>(space, seed, options);
         }},
    };
    return algorithms;
}

std::mutex& registry_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

void register_algorithm(const std::string& name, AlgorithmFactory factory) {
    const std::lock_guard<std::mutex> lock(registry_mutex());
    registry()[name] = std::move(factory);
}

std::unique_ptr<SearchAlgorithm> make_algorithm(const std::string& name,
                                                const ConfigSpace& space, std::uint64_t seed,
                                                const std::map<std::string, std::string>& params) {
    AlgorithmFactory factory;
    {
        const std::lock_guard<std::mutex> lock(registry_mutex());
        const auto it = registry().find(name);
        if (it == registry().end()) {
            throw ArgumentError("unknown search algorithm: " + name);
        }
        factory = it->second;
    }
    return factory(space, seed, params);
}

std::vector<std::string> algorithm_names() {
    const std::lock_guard<std::mutex> lock(registry_mutex());
    std::vector<std::string> names;
    for (const auto& [name, factory] : registry()) {
        names.push_back(name);
    }
    return names;
}

}  // namespace jexplore
