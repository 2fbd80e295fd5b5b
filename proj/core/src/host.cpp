#include "jexplore/host.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <ctime>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <thread>

#include "jexplore/channel.hpp"
#include "jexplore/csv.hpp"
#include "jexplore/errors.hpp"
#include "jexplore/log.hpp"
#include "jexplore/net.hpp"
#include "jexplore/simdevice.hpp"

namespace jexplore {

void validate_plan(const ExplorationPlan& plan) {
    if (plan.budget < 1) {
        throw ArgumentError("budget must be >= 1");
    }
    if (plan.batch < 1) {
        throw ArgumentError("batch must be >= 1");
    }
    if (plan.client_addresses.empty()) {
        throw ArgumentError("at least one client address is required");
    }
    for (const std::string& address : plan.client_addresses) {
        parse_address(address);
    }
    if (plan.algorithm.empty()) {
        throw ArgumentError("algorithm name must be non-empty");
    }
    if (plan.workload.name.empty()) {
        throw ArgumentError("workload name must be non-empty");
    }
    if (plan.output_path.empty()) {
        throw ArgumentError("output path must be non-empty");
    }
    validate_meters(plan.meters);
}

namespace {

std::string format_sample_id(std::uint64_t proposal_index) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%06llu",
                  static_cast<unsigned long long>(proposal_index));
    return buffer;
}

std::string iso_utc_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm parts{};
    gmtime_r(&now, &parts);
    char buffer[32];
    std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &parts);
    return buffer;
}

struct Proposal {
    std::string sample_id;
    Configuration config;
};

// Turns a finished proposal into a record, rounding metrics to the CSV
// precision so persisted and in-memory values agree exactly.
SampleRecord make_record(const Proposal& proposal, const std::string& client_id,
                         SampleStatus status, const MetricValues& metrics,
                         const MeterSet& meters, std::string timestamp) {
    SampleRecord record;
    record.sample_id = proposal.sample_id;
    record.client_id = client_id;
    record.config = proposal.config;
    record.status = status;
    record.timestamp = std::move(timestamp);
    if (status == SampleStatus::Ok) {
        if (meters.time_enabled) {
            record.time_s = round_metric(metrics.time_s.value());
        }
        if (meters.power_enabled) {
            record.power_w = round_metric(metrics.power_w.value());
        }
        if (meters.memory_enabled) {
            record.memory_mb = round_metric(metrics.memory_mb.value());
        }
    }
    return record;
}

void check_result_metrics(const ResultPayload& result, const MeterSet& meters) {
    if (result.status != SampleStatus::Ok) {
        return;
    }
    if ((meters.time_enabled && !result.metrics.time_s) ||
        (meters.power_enabled && !result.metrics.power_w) ||
        (meters.memory_enabled && !result.metrics.memory_mb)) {
        throw ProtocolError("ok RESULT " + result.sample_id +
                            " lacks a metric for an enabled meter");
    }
}

struct Event {
    enum class Kind { Result, Gone };
    Kind kind = Kind::Gone;
    std::size_t client_index = 0;
    ResultPayload result;
    std::string reason;
};

class EventQueue {
public:
    void push(Event event) {
        {
            const std::lock_guard<std::mutex> lock(mutex_);
            events_.push_back(std::move(event));
        }
        ready_.notify_one();
    }

    Event pop() {
        std::unique_lock<std::mutex> lock(mutex_);
        ready_.wait(lock, [this] { return !events_.empty(); });
        Event event = std::move(events_.front());
        events_.pop_front();
        return event;
    }

private:
    std::mutex mutex_;
    std::condition_variable ready_;
    std::deque<Event> events_;
};

struct ClientLink {
    std::string id;
    std::unique_ptr<MessageChannel> channel;
    std::thread reader;
    bool alive = true;
    std::optional<Proposal> outstanding;
};

void reader_loop(ClientLink& link, std::size_t index, EventQueue& events) {
    try {
        for (;;) {
            std::optional<MessageEnvelope> envelope = link.channel->receive();
            if (!envelope) {
                events.push({Event::Kind::Gone, index, {}, "connection closed"});
                return;
            }
            if (const auto* result = std::get_if<ResultPayload>(&envelope->payload)) {
                events.push({Event::Kind::Result, index, *result, ""});
                continue;
            }
            if (const auto* err = std::get_if<ErrPayload>(&envelope->payload)) {
                events.push({Event::Kind::Gone, index, {}, "client reported: " + err->message});
                return;
            }
            events.push({Event::Kind::Gone, index, {},
                         "unexpected " + std::string(to_string(envelope->type())) +
                             " from client"});
            return;
        }
    } catch (const Error& e) {
        events.push({Event::Kind::Gone, index, {}, e.what()});
    }
}

void require_meter_superset(const HelloPayload& hello, const MeterSet& wanted) {
    const bool ok = (!wanted.time_enabled || hello.meters.time_enabled) &&
                    (!wanted.power_enabled || hello.meters.power_enabled) &&
                    (!wanted.memory_enabled || hello.meters.memory_enabled);
    if (!ok) {
        throw Error("client " + hello.client_id +
                    " does not provide every meter the plan needs");
    }
}

}  // namespace

std::vector<SampleRecord> explore(const ExplorationPlan& plan, const ConfigSpace& space,
                                  SearchAlgorithm& algorithm) {
    validate_plan(plan);
    validate_space(space);
    CsvWriter writer(plan.output_path);

    // Connect and greet every client before proposing anything.
    std::vector<std::unique_ptr<ClientLink>> links;
    for (const std::string& address : plan.client_addresses) {
        const auto [host, port] = parse_address(address);
        TcpConnection connection = TcpConnection::connect(host, port);
        connection.set_recv_timeout(std::chrono::milliseconds(10000));
        auto channel = std::make_unique<MessageChannel>(std::move(connection));
        std::optional<MessageEnvelope> envelope = channel->receive();
        if (!envelope) {
            throw Error("client at " + address + " closed before sending HELLO");
        }
        const auto* hello = std::get_if<HelloPayload>(&envelope->payload);
        if (hello == nullptr) {
            throw ProtocolError("client at " + address + " sent " +
                                std::string(to_string(envelope->type())) +
                                " instead of HELLO");
        }
        require_meter_superset(*hello, plan.meters);
        channel->connection().set_recv_timeout(std::chrono::milliseconds(0));
        auto link = std::make_unique<ClientLink>();
        link->id = hello->client_id;
        link->channel = std::move(channel);
        links.push_back(std::move(link));
        log_info("connected to client " + links.back()->id + " at " + address);
    }

    EventQueue events;
    for (std::size_t i = 0; i < links.size(); ++i) {
        ClientLink& link = *links[i];
        link.reader = std::thread(reader_loop, std::ref(link), i, std::ref(events));
    }
    const auto shutdown_links = [&](bool polite) {
        for (auto& link : links) {
            if (polite && link->alive) {
                try {
                    link->channel->send(ByePayload{});
                } catch (const Error&) {
                }
            }
            link->channel->connection().shutdown_both();
        }
        for (auto& link : links) {
            if (link->reader.joinable()) {
                link->reader.join();
            }
        }
    };

    std::vector<SampleRecord> records;
    std::deque<Proposal> pending;
    std::set<std::string> recorded_ids;
    std::uint64_t proposed = 0;
    std::uint64_t recorded = 0;
    std::uint64_t completion_counter = 0;

    const auto fail_link = [&](std::size_t index, const std::string& reason) {
        ClientLink& link = *links[index];
        if (!link.alive) {
            return;
        }
        link.alive = false;
        log_warn("client " + link.id + " lost: " + reason);
        if (link.outstanding) {
            pending.push_front(*link.outstanding);  // reassign to the next idle client
            link.outstanding.reset();
        }
        link.channel->connection().shutdown_both();
    };

    try {
        while (recorded < plan.budget) {
            const bool idle_alive =
                std::any_of(links.begin(), links.end(), [](const auto& link) {
                    return link->alive && !link->outstanding;
                });
            if (pending.empty() && proposed < plan.budget && idle_alive) {
                const std::size_t ask = static_cast<std::size_t>(
                    std::min<std::uint64_t>(plan.batch, plan.budget - proposed));
                for (Configuration& config : algorithm.propose(ask)) {
                    pending.push_back({format_sample_id(proposed++), std::move(config)});
                }
            }
            for (auto& link : links) {
                if (pending.empty()) {
                    break;
                }
                if (!link->alive || link->outstanding) {
                    continue;
                }
                const Proposal& next = pending.front();
                try {
                    link->channel->send(ConfigPayload{next.sample_id, next.config,
                                                      plan.workload});
                    link->outstanding = next;
                    pending.pop_front();
                } catch (const Error& e) {
                    const std::size_t index =
                        static_cast<std::size_t>(&link - links.data());
                    fail_link(index, e.what());
                }
            }

            const bool any_alive = std::any_of(links.begin(), links.end(),
                                               [](const auto& link) { return link->alive; });
            if (!any_alive) {
                throw Error("all clients lost after " + std::to_string(recorded) + " of " +
                            std::to_string(plan.budget) +
                            " samples; partial results flushed to " +
                            plan.output_path.string());
            }
            const bool any_outstanding = std::any_of(
                links.begin(), links.end(), [](const auto& link) {
                    return static_cast<bool>(link->outstanding);
                });
            if (!any_outstanding) {
                if (!pending.empty()) {
                    continue;  // an idle client freed up; assign on the next pass
                }
                throw Error("algorithm " + plan.algorithm +
                            " proposed nothing while no samples are outstanding");
            }

            Event event = events.pop();
            ClientLink& link = *links[event.client_index];
            if (event.kind == Event::Kind::Gone) {
                fail_link(event.client_index, event.reason);
                continue;
            }
            if (!link.alive) {
                continue;  // stale event from an already-failed client
            }
            if (!link.outstanding || link.outstanding->sample_id != event.result.sample_id) {
                fail_link(event.client_index,
                          "RESULT " + event.result.sample_id + " was never assigned to it");
                continue;
            }
            const Proposal finished = *link.outstanding;
            link.outstanding.reset();
            try {
                check_result_metrics(event.result, plan.meters);
            } catch (const Error& e) {
                pending.push_front(finished);
                fail_link(event.client_index, e.what());
                continue;
            }
            if (!recorded_ids.insert(finished.sample_id).second) {
                continue;  // duplicate delivery; the sample is already recorded
            }
            const std::string timestamp = plan.deterministic
                                              ? std::to_string(completion_counter)
                                              : iso_utc_now();
            ++completion_counter;
            SampleRecord record =
                make_record(finished, link.id, event.result.status, event.result.metrics,
                            plan.meters, timestamp);
            if (event.result.status != SampleStatus::Ok) {
                log_warn("sample " + record.sample_id + " on " + link.id + " failed: " +
                         event.result.error_msg);
            }
            writer.append(record);
            records.push_back(record);
            ++recorded;
            algorithm.notify({&records.back(), 1});
        }
    } catch (...) {
        writer.flush();
        shutdown_links(false);
        throw;
    }

    shutdown_links(true);
    return records;
}

std::vector<SampleRecord> explore(const ExplorationPlan& plan) {
    validate_plan(plan);
    const ConfigSpace space = build_orin_space();
    const std::unique_ptr<SearchAlgorithm> algorithm =
        make_algorithm(plan.algorithm, space, plan.seed, plan.algorithm_params);
    return explore(plan, space, *algorithm);
}

std::vector<SampleRecord> run_sim_exploration(const SimRunOptions& options,
                                              const ConfigSpace& space,
                                              SearchAlgorithm& algorithm) {
    if (options.samples < 1) {
        throw ArgumentError("samples must be >= 1");
    }
    if (options.batch < 1) {
        throw ArgumentError("batch must be >= 1");
    }
    if (options.output_path.empty()) {
        throw ArgumentError("output path must be non-empty");
    }
    validate_meters(options.meters);

    ModelSpec spec = options.model_file.empty() ? default_model_spec()
                                                : load_model_file(options.model_file);
    const std::unique_ptr<DeviceBackend> backend =
        make_sim_backend(std::move(spec), space, options.preset, options.realtime);
    const WorkloadSpec workload{options.preset, options.workload_params};

    CsvWriter writer(options.output_path);
    std::vector<SampleRecord> records;
    std::deque<Proposal> pending;
    std::uint64_t proposed = 0;
    std::uint64_t completion_counter = 0;

    while (records.size() < options.samples) {
        if (pending.empty()) {
            const std::size_t ask = static_cast<std::size_t>(
                std::min<std::uint64_t>(options.batch, options.samples - proposed));
            for (Configuration& config : algorithm.propose(ask)) {
                pending.push_back({format_sample_id(proposed++), std::move(config)});
            }
            if (pending.empty()) {
                throw Error("algorithm " + options.algorithm +
                            " proposed nothing while no samples are outstanding");
            }
        }
        const Proposal proposal = std::move(pending.front());
        pending.pop_front();

        SampleOutcome outcome;
        try {
            backend->apply(proposal.config);
            outcome = backend->run_workload(workload, options.meters, options.timeout_s);
        } catch (const Error& e) {
            outcome.status = SampleStatus::Error;
            outcome.error_msg = e.what();
        }
        MetricValues metrics;
        if (outcome.status == SampleStatus::Ok) {
            metrics.time_s = outcome.metrics.time_s;
            metrics.power_w = outcome.metrics.power_w;
            metrics.memory_mb = outcome.metrics.memory_mb;
        } else {
            log_warn("sample " + proposal.sample_id + " failed: " + outcome.error_msg);
        }
        const std::string timestamp = options.deterministic
                                          ? std::to_string(completion_counter)
                                          : iso_utc_now();
        ++completion_counter;
        SampleRecord record = make_record(proposal, options.client_id, outcome.status,
                                          metrics, options.meters, timestamp);
        writer.append(record);
        records.push_back(record);
        algorithm.notify({&records.back(), 1});
    }
    return records;
}

std::vector<SampleRecord> run_sim_exploration(const SimRunOptions& options) {
    const ConfigSpace space = build_orin_space();
    const std::unique_ptr<SearchAlgorithm> algorithm =
        make_algorithm(options.algorithm, space, options.seed, options.algorithm_params);
    return run_sim_exploration(options, space, *algorithm);
}

}  // namespace jexplore
