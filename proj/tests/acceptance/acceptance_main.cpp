// Acceptance suite: runs every release criterion end to end and prints one
// pass/fail line per criterion. Exits non-zero if any criterion fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "jexplore/analysis.hpp"
#include "jexplore/channel.hpp"
#include "jexplore/client.hpp"
#include "jexplore/configspace.hpp"
#include "jexplore/csv.hpp"
#include "jexplore/errors.hpp"
#include "jexplore/host.hpp"
#include "jexplore/log.hpp"
#include "jexplore/protocol.hpp"
#include "jexplore/search.hpp"
#include "jexplore/simdevice.hpp"

using namespace jexplore;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void require(bool condition, const std::string& what) {
    if (!condition) {
        throw Error(what);
    }
}

void criterion(int number, const std::string& label,
               const std::function<std::string()>& body) {
    std::string detail;
    bool ok = false;
    try {
        detail = body();
        ok = true;
    } catch (const std::exception& e) {
        detail = e.what();
    }
    std::printf("[%s] criterion %2d: %s%s%s\n", ok ? "PASS" : "FAIL", number, label.c_str(),
                detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!ok) {
        ++g_failures;
    }
}

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

fs::path temp_file(const std::string& stem) {
    static std::mt19937_64 rng(std::random_device{}());
    return fs::temp_directory_path() /
           ("jexplore-acceptance-" + stem + "-" + std::to_string(rng()) + ".csv");
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

std::vector<SampleRecord> seed42_llama_run() {
    SimRunOptions options;
    options.preset = "llama";
    options.samples = 200;
    options.seed = 42;
    options.deterministic = true;
    options.output_path = temp_file("seed42");
    return run_sim_exploration(options);
}

std::string format_double(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

// Frozen regression anchors for the fixed seeds (independently cross-checked
// where an external route exists).
constexpr double kSeed42Spearman = -0.7639540988524713;
constexpr double kNoncutoffCornerMaxS = 83.427379612508631;
constexpr double kCutoffCornerMinS = 97.207009420405555;
constexpr double kRandomHvAnchor = 10215.29340214888;
constexpr double kEvolutionaryHvAnchor = 10667.510476813017;
constexpr bool kEvolutionaryAnchorFrozen = true;

double records_hypervolume(const std::vector<SampleRecord>& records,
                           std::array<double, 2> reference) {
    std::vector<std::array<double, 2>> points;
    for (const SampleRecord& record : records) {
        if (record.status == SampleStatus::Ok && record.power_w && record.time_s) {
            points.push_back({*record.power_w, *record.time_s});
        }
    }
    return hypervolume_2d(points, reference);
}

// --- criteria -----------------------------------------------------------

std::string power_band_calibration() {
    const auto start = Clock::now();
    const std::vector<SampleRecord> records = seed42_llama_run();
    require(records.size() == 200, "expected 200 records");
    for (const SampleRecord& record : records) {
        require(record.status == SampleStatus::Ok, "sample failed");
        require(*record.power_w >= 10.0 && *record.power_w <= 42.0,
                "power " + format_double(*record.power_w) + " outside [10, 42] W");
    }
    const ConfigSpace space = build_orin_space();
    const Simulator sim(DeviceModel{}, space);
    const Configuration all_max = decode_index(space, cardinality(space) - 1);
    const double probe = sim.power_w(all_max);
    require(std::abs(probe - 42.0) <= 1e-6,
            "max-config probe " + format_double(probe) + " != 42 +- 1e-6");
    const double elapsed = seconds_since(start);
    require(elapsed < 1.0, "run took " + format_double(elapsed) + " s (limit 1 s)");
    return "200 samples in [10, 42] W, max probe 42 W, " + format_double(elapsed) + " s";
}

std::string latency_anchor() {
    const ConfigSpace space = build_orin_space();
    const Simulator sim(DeviceModel{}, space);
    const Configuration all_max = decode_index(space, cardinality(space) - 1);
    const Configuration all_min = decode_index(space, 0);
    const double fastest = sim.latency_s(llama_preset(), all_max);
    require(fastest == 20.0, "all-max latency " + format_double(fastest) + " != 20.0 exactly");
    const double slowest = sim.latency_s(llama_preset(), all_min);
    require(std::abs(slowest - 307.25602097458875) <= 1e-3,
            "all-min corner " + format_double(slowest) + " != ~307.256 s");
    require(slowest < 500.0, "simulated range must stay below the real-hardware 500 s");
    return "all-max 20 s exact, all-min corner " + format_double(slowest) + " s";
}

std::string inverse_correlation() {
    const auto start = Clock::now();
    const std::vector<SampleRecord> records = seed42_llama_run();
    std::vector<double> power;
    std::vector<double> time;
    for (const SampleRecord& record : records) {
        power.push_back(*record.power_w);
        time.push_back(*record.time_s);
    }
    const double rho = spearman(power, time);
    require(rho <= -0.4, "spearman " + format_double(rho) + " > -0.4");
    require(std::abs(rho - kSeed42Spearman) <= 1e-9,
            "spearman " + format_double(rho) + " drifted from the frozen anchor " +
                format_double(kSeed42Spearman));
    const double elapsed = seconds_since(start);
    require(elapsed < 1.0, "run took " + format_double(elapsed) + " s (limit 1 s)");
    return "spearman " + format_double(rho);
}

std::string emc_cutoff() {
    const ConfigSpace space = build_orin_space();
    const std::vector<SampleRecord> records = seed42_llama_run();
    const EmcCutoffReport report = emc_cutoff_report(records, space);
    require(report.separated, "no separated cluster found");
    require(report.all_cluster_lowest_emc, "cluster contains a non-lowest-EMC sample");
    require(report.all_lowest_emc_in_cluster, "a lowest-EMC sample escaped the cluster");

    // corner enumeration: non-EMC parameters at min or max, all EMC values
    const Simulator sim(DeviceModel{}, space);
    double noncut_max = 0.0;
    double cut_min = std::numeric_limits<double>::infinity();
    for (unsigned mask = 0; mask < (1u << 7); ++mask) {
        Configuration corner;
        for (std::size_t i = 0; i < 7; ++i) {
            const auto& values = space.params[i].values;
            set_config_value(corner, i, (mask >> i) & 1 ? values.back() : values.front());
        }
        for (const std::int64_t emc : space.params[7].values) {
            corner.emc_freq_khz = emc;
            const double latency = sim.latency_s(llama_preset(), corner);
            if (emc == space.params[7].values.front()) {
                cut_min = std::min(cut_min, latency);
            } else {
                noncut_max = std::max(noncut_max, latency);
            }
        }
    }
    require(std::abs(noncut_max - kNoncutoffCornerMaxS) <= 1e-3,
            "non-cutoff corner max " + format_double(noncut_max) + " != ~83.427 s");
    require(std::abs(cut_min - kCutoffCornerMinS) <= 1e-3,
            "cutoff corner min " + format_double(cut_min) + " != ~97.207 s");
    require(cut_min > noncut_max, "corner bounds do not separate");
    return "cluster of " + std::to_string(report.cluster_ids.size()) + " samples, corners " +
           format_double(noncut_max) + " s vs " + format_double(cut_min) + " s";
}

std::string pareto_oracle_equivalence() {
    std::mt19937_64 rng(1000003);
    std::uniform_real_distribution<double> value(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<SampleRecord> records;
        std::vector<Objectives> points;
        for (int i = 0; i < 1000; ++i) {
            const double p = value(rng);
            const double t = value(rng);
            SampleRecord record;
            record.sample_id = std::to_string(i);
            record.client_id = "x";
            record.power_w = p;
            record.time_s = t;
            record.timestamp = "0";
            records.push_back(std::move(record));
            points.push_back({p, t});
        }
        // brute-force O(n^2) dominance oracle
        std::vector<std::string> oracle_front;
        std::vector<std::size_t> oracle_indices;
        for (std::size_t i = 0; i < points.size(); ++i) {
            bool dominated = false;
            for (std::size_t j = 0; j < points.size() && !dominated; ++j) {
                if (j == i) {
                    continue;
                }
                dominated = points[j][0] <= points[i][0] && points[j][1] <= points[i][1] &&
                            (points[j][0] < points[i][0] || points[j][1] < points[i][1]);
            }
            if (!dominated) {
                oracle_front.push_back(records[i].sample_id);
                oracle_indices.push_back(i);
            }
        }
        require(pareto_front(records) == oracle_front,
                "pareto_front mismatch in trial " + std::to_string(trial));
        require(nondominated_sort(points).front() == oracle_indices,
                "nondominated_sort front 0 mismatch in trial " + std::to_string(trial));
    }
    return "100 trials x 1000 points, exact match both routes";
}

std::string encoding_bijection() {
    const ConfigSpace space = build_orin_space();
    const std::uint64_t total = cardinality(space);
    std::mt19937_64 rng(55);
    for (int i = 0; i < 100000; ++i) {
        const std::uint64_t index = rng() % total;
        require(encode_index(space, decode_index(space, index)) == index,
                "identity failed at index " + std::to_string(index));
    }

    ConfigSpace reduced;
    reduced.params = {
        {"cores_c1", ParamKind::CoreCount, {1, 2}},
        {"cores_c2", ParamKind::CoreCount, {0, 1}},
        {"cores_c3", ParamKind::CoreCount, {0, 1}},
        {"freq_c1_khz", ParamKind::Frequency, {100000, 150000, 200000}},
        {"freq_c2_khz", ParamKind::Frequency, {100000, 150000, 200000}},
        {"freq_c3_khz", ParamKind::Frequency, {100000, 150000, 200000}},
        {"gpu_freq_khz", ParamKind::Frequency, {300000, 600000}},
        {"emc_freq_khz", ParamKind::Frequency, {200000, 400000}},
    };
    const std::uint64_t reduced_total = cardinality(reduced);
    require(reduced_total == 864, "reduced space cardinality");
    std::set<std::uint64_t> seen;
    for (std::uint64_t index = 0; index < reduced_total; ++index) {
        seen.insert(encode_index(reduced, decode_index(reduced, index)));
    }
    require(seen.size() == reduced_total, "collision in exhaustive reduced-space check");
    return "100000 random indices + exhaustive 864-point space, zero collisions";
}

std::string protocol_robustness() {
    // golden frame
    const std::string golden = frame_body("{}");
    const unsigned char expected[] = {0x00, 0x00, 0x00, 0x02, 0x7B, 0x7D};
    require(golden.size() == 6, "golden frame size");
    for (std::size_t i = 0; i < 6; ++i) {
        require(static_cast<unsigned char>(golden[i]) == expected[i], "golden frame bytes");
    }
    {
        FrameDecoder decoder;
        for (char byte : golden) {
            decoder.feed({&byte, 1});
        }
        require(decoder.next_body() == "{}", "byte-at-a-time decode");
    }
    {
        FrameDecoder decoder;
        const char header[] = {0x00, 0x00, 0x00, 0x0A};
        decoder.feed({header, 4});
        decoder.feed("1234");
        bool threw = false;
        try {
            decoder.finish();
        } catch (const IncompleteFrameError&) {
            threw = true;
        }
        require(threw, "truncation must raise incomplete-frame");
    }

    // round-trip identity over random envelopes
    const ConfigSpace space = build_orin_space();
    std::mt19937_64 rng(77);
    for (int i = 0; i < 10000; ++i) {
        MessageEnvelope envelope;
        envelope.seq = rng() % 100000;
        switch (rng() % 4) {
            case 0: {
                HelloPayload hello;
                hello.client_id = "c" + std::to_string(rng() % 1000);
                hello.device = rng() % 2 ? DeviceKind::Sim : DeviceKind::JetsonOrin;
                envelope.payload = hello;
                break;
            }
            case 1: {
                ConfigPayload config;
                config.sample_id = std::to_string(rng());
                config.config = decode_index(space, rng() % cardinality(space));
                config.workload.name = "llama";
                envelope.payload = config;
                break;
            }
            case 2: {
                ResultPayload result;
                result.sample_id = std::to_string(rng());
                result.metrics.time_s = static_cast<double>(rng() % 1000000) / 1024.0;
                result.metrics.power_w = static_cast<double>(rng() % 42000) / 1000.0;
                result.metrics.memory_mb = 26000.0;
                envelope.payload = result;
                break;
            }
            default:
                envelope.payload = ErrPayload{"e" + std::to_string(rng() % 10)};
                break;
        }
        require(decode_envelope(encode_envelope(envelope)) == envelope,
                "envelope round-trip failed at iteration " + std::to_string(i));
    }

    // fuzzing: random bytes never crash and only raise typed errors
    for (int round = 0; round < 10000; ++round) {
        const std::size_t length = rng() % 48;
        std::string junk(length, '\0');
        for (char& c : junk) {
            c = static_cast<char>(rng());
        }
        FrameDecoder decoder;
        try {
            decoder.feed(junk);
            while (decoder.next()) {
            }
            decoder.finish();
        } catch (const Error&) {
        }
    }
    return "10000 round-trips, 10000 fuzz rounds, golden frame ok";
}

struct AcceptanceClient {
    std::unique_ptr<ClientServer> server;
    std::thread thread;

    explicit AcceptanceClient(const std::string& id) {
        ClientSettings settings;
        settings.listen_address = "127.0.0.1:0";
        settings.client_id = id;
        settings.max_sessions = 1;
        server = std::make_unique<ClientServer>(std::move(settings));
        thread = std::thread([this] { server->run(); });
    }

    std::string address() const { return "127.0.0.1:" + std::to_string(server->port()); }

    ~AcceptanceClient() {
        server->request_stop();
        if (thread.joinable()) {
            thread.join();
        }
    }
};

void check_run_of_60(const fs::path& csv, const std::vector<SampleRecord>& records) {
    require(records.size() == 60, "expected 60 records, got " +
                                      std::to_string(records.size()));
    std::set<std::string> ids;
    for (const SampleRecord& record : records) {
        ids.insert(record.sample_id);
    }
    require(ids.size() == 60, "sample_ids are not unique");
    require(read_csv(csv).size() == 60, "CSV row count != 60");
}

std::string end_to_end_exactly_once() {
    const auto start = Clock::now();
    {
        AcceptanceClient a("a");
        AcceptanceClient b("b");
        AcceptanceClient c("c");
        ExplorationPlan plan;
        plan.client_addresses = {a.address(), b.address(), c.address()};
        plan.seed = 42;
        plan.budget = 60;
        plan.batch = 3;
        plan.workload.name = "llama";
        plan.deterministic = true;
        plan.output_path = temp_file("e2e");
        check_run_of_60(plan.output_path, explore(plan));
    }

    // repeat with one client that dies after 10 samples, mid-assignment
    {
        TcpListener flaky_listener = TcpListener::bind("127.0.0.1", 0);
        std::thread flaky([&flaky_listener] {
            auto connection = flaky_listener.accept();
            if (!connection) {
                return;
            }
            MessageChannel channel(std::move(*connection));
            HelloPayload hello;
            hello.client_id = "flaky";
            channel.send(hello);
            try {
                for (int handled = 0;; ++handled) {
                    const auto envelope = channel.receive();
                    if (!envelope || envelope->type() != MessageType::Config) {
                        return;
                    }
                    if (handled == 10) {
                        channel.connection().close();  // dies holding a sample
                        return;
                    }
                    ResultPayload result;
                    result.sample_id =
                        std::get<ConfigPayload>(envelope->payload).sample_id;
                    result.metrics.time_s = 1.0;
                    result.metrics.power_w = 20.0;
                    result.metrics.memory_mb = 100.0;
                    channel.send(result);
                }
            } catch (const Error&) {
            }
        });
        AcceptanceClient b("b");
        AcceptanceClient c("c");
        ExplorationPlan plan;
        plan.client_addresses = {"127.0.0.1:" + std::to_string(flaky_listener.port()),
                                 b.address(), c.address()};
        plan.seed = 42;
        plan.budget = 60;
        plan.batch = 3;
        plan.workload.name = "llama";
        plan.deterministic = true;
        plan.output_path = temp_file("e2e-kill");
        check_run_of_60(plan.output_path, explore(plan));
        flaky.join();
    }
    const double elapsed = seconds_since(start);
    require(elapsed < 5.0, "runs took " + format_double(elapsed) + " s (limit 5 s)");
    return "60/60 records with and without a mid-run client kill, " +
           format_double(elapsed) + " s";
}

std::string determinism_golden_file() {
    const char* binary = std::getenv("JEXPLORE_BIN");
    require(binary != nullptr, "JEXPLORE_BIN must point at the jexplore binary");
    const fs::path first = temp_file("golden-a");
    const fs::path second = temp_file("golden-b");
    const std::string base = std::string(binary) +
                             " sim --preset llama --samples 200 --seed 42 --deterministic";
    require(std::system((base + " --out " + first.string() + " 2>/dev/null").c_str()) == 0,
            "first CLI run failed");
    require(std::system((base + " --out " + second.string() + " 2>/dev/null").c_str()) == 0,
            "second CLI run failed");
    const std::string body = slurp(first);
    require(!body.empty() && body == slurp(second), "reruns are not byte-identical");

    const fs::path rewritten = temp_file("golden-rewrite");
    write_csv(read_csv(first), rewritten);
    require(slurp(rewritten) == body, "read -> write round-trip is not byte-identical");
    return "two CLI runs and a read/write round-trip, byte-identical";
}

std::string evolutionary_sanity() {
    const auto start = Clock::now();
    const std::array<double, 2> reference{45.0, 400.0};

    SimRunOptions random_run;
    random_run.preset = "llama";
    random_run.samples = 200;
    random_run.seed = 42;
    random_run.deterministic = true;
    random_run.algorithm = "random";
    random_run.output_path = temp_file("hv-random");
    const double hv_random = records_hypervolume(run_sim_exploration(random_run), reference);

    SimRunOptions evolutionary_run = random_run;
    evolutionary_run.algorithm = "evolutionary";
    evolutionary_run.algorithm_params["population"] = "20";
    evolutionary_run.output_path = temp_file("hv-evolutionary");
    const double hv_evolutionary =
        records_hypervolume(run_sim_exploration(evolutionary_run), reference);

    require(std::abs(hv_random - kRandomHvAnchor) <= 1e-6,
            "random hypervolume " + format_double(hv_random) +
                " drifted from the frozen anchor " + format_double(kRandomHvAnchor));
    if (kEvolutionaryAnchorFrozen) {
        require(std::abs(hv_evolutionary - kEvolutionaryHvAnchor) <= 1e-6,
                "evolutionary hypervolume " + format_double(hv_evolutionary) +
                    " drifted from the frozen anchor " +
                    format_double(kEvolutionaryHvAnchor));
    }
    require(hv_evolutionary >= hv_random,
            "evolutionary hv " + format_double(hv_evolutionary) + " < random hv " +
                format_double(hv_random));
    const double elapsed = seconds_since(start);
    require(elapsed < 5.0, "runs took " + format_double(elapsed) + " s (limit 5 s)");
    return "hv evolutionary " + format_double(hv_evolutionary) + " >= random " +
           format_double(hv_random) + ", " + format_double(elapsed) + " s";
}

}  // namespace

int main() {
    set_log_level(LogLevel::Error);  // keep criterion lines readable

    criterion(1, "power band calibration (10-42 W, max probe 42 W, <1 s)",
              power_band_calibration);
    criterion(2, "latency anchor (all-max exactly 20 s; corner ~307 s, not ~500 s)",
              latency_anchor);
    criterion(3, "inverse power/time correlation (spearman <= -0.4)", inverse_correlation);
    criterion(4, "EMC cut-off cluster and corner bounds (~83.4 s vs ~97.2 s)", emc_cutoff);
    criterion(5, "pareto front equals the brute-force oracle (100x1000, exact)",
              pareto_oracle_equivalence);
    criterion(6, "encoding bijection (1e5 random + exhaustive reduced space)",
              encoding_bijection);
    criterion(7, "protocol robustness (round-trips, fragmentation, fuzzing)",
              protocol_robustness);
    criterion(8, "end-to-end exactly-once with 3 clients and a mid-run kill",
              end_to_end_exactly_once);
    criterion(9, "determinism golden file (CLI reruns byte-identical)",
              determinism_golden_file);
    criterion(10, "evolutionary hypervolume >= random at equal budget",
              evolutionary_sanity);

    if (g_failures != 0) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
