#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "jexplore/errors.hpp"
#include "jexplore/search.hpp"
#include "test_support.hpp"

using namespace jexplore;

namespace {

// Brute-force non-dominated set straight from the dominance definition.
std::vector<std::size_t> brute_force_front(const std::vector<Objectives>& points) {
    std::vector<std::size_t> front;
    for (std::size_t i = 0; i < points.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < points.size() && !dominated; ++j) {
            if (j == i) {
                continue;
            }
            bool leq = true;
            bool strict = false;
            for (std::size_t m = 0; m < points[i].size(); ++m) {
                leq = leq && points[j][m] <= points[i][m];
                strict = strict || points[j][m] < points[i][m];
            }
            dominated = leq && strict;
        }
        if (!dominated) {
            front.push_back(i);
        }
    }
    return front;
}

SampleRecord record_for(const ConfigSpace& space, const Configuration& config, double power,
                        double time) {
    static int counter = 0;
    SampleRecord record;
    record.sample_id = std::to_string(counter++);
    record.client_id = "t";
    record.config = config;
    record.power_w = power;
    record.time_s = time;
    record.memory_mb = 1.0;
    record.timestamp = "0";
    (void)space;
    return record;
}

}  // namespace

TEST_CASE("random search continues one sampling stream across calls") {
    const ConfigSpace space = build_orin_space();
    RandomSearch search(space, 42);
    CHECK(search.propose(0).empty());

    std::vector<Configuration> streamed = search.propose(100);
    const std::vector<Configuration> tail = search.propose(100);
    streamed.insert(streamed.end(), tail.begin(), tail.end());
    CHECK(streamed == random_sample(space, 42, 200));

    RandomSearch again(space, 42);
    CHECK(again.propose(50) == random_sample(space, 42, 50));

    // notify is a no-op and does not disturb the stream
    RandomSearch with_notify(space, 42);
    auto first = with_notify.propose(10);
    with_notify.notify({});
    auto second = with_notify.propose(10);
    first.insert(first.end(), second.begin(), second.end());
    CHECK(first == random_sample(space, 42, 20));
}

TEST_CASE("nondominated sorting on the worked example") {
    const std::vector<Objectives> points = {{1, 5}, {2, 2}, {5, 1}, {3, 3}};
    const auto fronts = nondominated_sort(points);
    REQUIRE(fronts.size() == 2);
    CHECK(fronts[0] == std::vector<std::size_t>{0, 1, 2});
    CHECK(fronts[1] == std::vector<std::size_t>{3});
}

TEST_CASE("single points and duplicates are non-dominated") {
    CHECK(nondominated_sort({{2, 7}}) ==
          std::vector<std::vector<std::size_t>>{{0}});
    const auto fronts = nondominated_sort({{1, 1}, {1, 1}});
    REQUIRE(fronts.size() == 1);
    CHECK(fronts[0] == std::vector<std::size_t>{0, 1});
}

TEST_CASE("front 0 matches the brute-force oracle on random points") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> value(0.0, 100.0);
    for (int round = 0; round < 10; ++round) {
        std::vector<Objectives> points;
        for (int i = 0; i < 1000; ++i) {
            points.push_back({value(rng), value(rng)});
        }
        const auto fronts = nondominated_sort(points);
        CHECK(fronts[0] == brute_force_front(points));
        std::size_t seen = 0;
        for (const auto& front : fronts) {
            seen += front.size();
        }
        CHECK(seen == points.size());
    }
}

TEST_CASE("nondominated sort rejects malformed inputs") {
    CHECK_THROWS_AS(nondominated_sort({{1.0, 2.0}, {1.0}}), ArgumentError);
    CHECK_THROWS_AS(nondominated_sort({{1.0, std::nan("")}}), ArgumentError);
    CHECK(nondominated_sort({}).empty());
}

TEST_CASE("crowding distance marks boundary points infinite") {
    const std::vector<Objectives> points = {{1, 5}, {2, 2}, {5, 1}, {3, 3}};
    const std::vector<std::size_t> front = {0, 1, 2};
    const std::vector<double> crowd = crowding_distance(points, front);
    CHECK(std::isinf(crowd[0]));
    CHECK(std::isinf(crowd[2]));
    CHECK(std::isfinite(crowd[1]));
    CHECK(crowd[1] > 0.0);

    const std::vector<double> pair = crowding_distance(points, {0, 1});
    CHECK(std::isinf(pair[0]));
    CHECK(std::isinf(pair[1]));
}

TEST_CASE("2-D hypervolume against hand-computed rectangles") {
    const std::array<double, 2> ref{45.0, 400.0};
    CHECK(hypervolume_2d({}, ref) == 0.0);
    CHECK(hypervolume_2d({{44.0, 399.0}}, ref) == doctest::Approx(1.0));
    CHECK(hypervolume_2d({{45.0, 10.0}}, ref) == 0.0);  // on the reference boundary
    // two trade-off points: union of their rectangles, overlap counted once
    const double hv = hypervolume_2d({{25.0, 300.0}, {35.0, 200.0}}, ref);
    CHECK(hv == doctest::Approx(2000.0 + 2000.0 - 1000.0));
    // dominated point adds nothing
    CHECK(hypervolume_2d({{25.0, 200.0}, {30.0, 250.0}}, ref) ==
          doctest::Approx(hypervolume_2d({{25.0, 200.0}}, ref)));
}

TEST_CASE("evolutionary generation 0 equals the random-search stream") {
    const ConfigSpace space = build_orin_space();
    EvolutionaryOptions options;
    options.population_size = 20;
    EvolutionarySearch evolutionary(space, 42, options);
    RandomSearch random(space, 42);
    CHECK(evolutionary.propose(20) == random.propose(20));
    CHECK(evolutionary.propose(0).empty());
}

TEST_CASE("evolutionary offspring stay on the grid across many generations") {
    const ConfigSpace space = testsupport::reduced_space();
    EvolutionaryOptions options;
    options.population_size = 10;
    EvolutionarySearch search(space, 7, options);
    std::mt19937_64 rng(3);
    std::size_t proposed_total = 0;
    while (proposed_total < 10000) {
        const std::vector<Configuration> batch = search.propose(3);
        REQUIRE(!batch.empty());
        std::vector<SampleRecord> completed;
        for (const Configuration& config : batch) {
            validate_config(space, config);
            ++proposed_total;
            completed.push_back(record_for(space, config,
                                           static_cast<double>(rng() % 1000),
                                           static_cast<double>(rng() % 1000)));
        }
        search.notify(completed);
    }
    CHECK(search.unknown_notify_count() == 0);
}

TEST_CASE("notify tolerates unknown and failed samples") {
    const ConfigSpace space = testsupport::reduced_space();
    EvolutionarySearch search(space, 1, {.population_size = 4, .memory_objective = false});
    const std::vector<Configuration> batch = search.propose(4);
    REQUIRE(batch.size() == 4);

    SampleRecord unknown = record_for(space, decode_index(space, 863), 1, 1);
    const bool was_proposed =
        std::find(batch.begin(), batch.end(), unknown.config) != batch.end();
    search.notify({&unknown, 1});
    if (!was_proposed) {
        CHECK(search.unknown_notify_count() == 1);
    }

    std::vector<SampleRecord> completed;
    for (const Configuration& config : batch) {
        SampleRecord record = record_for(space, config, 5, 5);
        record.status = SampleStatus::Error;  // failed samples rank worst
        record.power_w.reset();
        record.time_s.reset();
        record.memory_mb.reset();
        completed.push_back(record);
    }
    search.notify(completed);
    CHECK_FALSE(search.propose(4).empty());  // selection still proceeds
}

TEST_CASE("evolutionary constructor validates the population size") {
    const ConfigSpace space = build_orin_space();
    CHECK_THROWS_AS(EvolutionarySearch(space, 1, {.population_size = 3}), ArgumentError);
    CHECK_THROWS_AS(EvolutionarySearch(space, 1, {.population_size = 7}), ArgumentError);
}

TEST_CASE("algorithm registry resolves built-ins and rejects strangers") {
    const ConfigSpace space = build_orin_space();
    CHECK(make_algorithm("random", space, 42)->propose(3) == random_sample(space, 42, 3));
    CHECK_NOTHROW(make_algorithm("evolutionary", space, 42, {{"population", "8"}}));
    CHECK_THROWS_AS(make_algorithm("bayesian", space, 42), ArgumentError);
    CHECK_THROWS_AS(make_algorithm("evolutionary", space, 42, {{"population", "x"}}),
                    ArgumentError);

    const auto names = algorithm_names();
    CHECK(std::find(names.begin(), names.end(), "random") != names.end());
    CHECK(std::find(names.begin(), names.end(), "evolutionary") != names.end());

    register_algorithm("fixed", [](const ConfigSpace& s, std::uint64_t,
                                   const std::map<std::string, std::string>&) {
        return std::make_unique<RandomSearch>(s, 0);
    });
    CHECK_NOTHROW(make_algorithm("fixed", space, 9));
}
