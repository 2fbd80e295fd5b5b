// jexplore - design space exploration harness for Jetson-style devices.
// Subcommands: space, client, host, sim, analyze.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "jexplore/analysis.hpp"
#include "jexplore/client.hpp"
#include "jexplore/configspace.hpp"
#include "jexplore/csv.hpp"
#include "jexplore/errors.hpp"
#include "jexplore/host.hpp"
#include "jexplore/log.hpp"
#include "jexplore/search.hpp"
#include "jexplore/version.hpp"

namespace {

using namespace jexplore;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

std::map<std::string, std::string> parse_key_values(const std::vector<std::string>& items,
                                                    const char* option) {
    std::map<std::string, std::string> parsed;
    for (const std::string& item : items) {
        const std::size_t eq = item.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw CLI::ValidationError(option, "expected KEY=VALUE, got \"" + item + "\"");
        }
        parsed[item.substr(0, eq)] = item.substr(eq + 1);
    }
    return parsed;
}

MeterSet parse_meters(const std::string& list) {
    MeterSet meters;
    meters.time_enabled = meters.power_enabled = meters.memory_enabled = false;
    std::istringstream stream(list);
    std::string name;
    while (std::getline(stream, name, ',')) {
        if (name == "time") {
            meters.time_enabled = true;
        } else if (name == "power") {
            meters.power_enabled = true;
        } else if (name == "memory") {
            meters.memory_enabled = true;
        } else {
            throw CLI::ValidationError("--meters", "unknown meter \"" + name +
                                                       "\" (expected time,power,memory)");
        }
    }
    validate_meters(meters);
    return meters;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out << text;
    if (!out.flush()) {
        throw IoError("write to " + path.string() + " failed");
    }
}

void print_space_info(const ConfigSpace& space) {
    std::printf("%-14s %-11s %6s %12s %12s\n", "parameter", "kind", "count", "min", "max");
    for (const ParameterDef& param : space.params) {
        std::printf("%-14s %-11s %6zu %12lld %12lld\n", param.name.c_str(),
                    std::string(to_string(param.kind)).c_str(), param.values.size(),
                    static_cast<long long>(param.values.front()),
                    static_cast<long long>(param.values.back()));
    }
    std::printf("cardinality: %llu\n",
                static_cast<unsigned long long>(cardinality(space)));
}

int run_cli(int argc, char** argv) {
    CLI::App app{"jexplore - multi-client hardware/software design space exploration"};
    app.require_subcommand(0, 1);
    app.set_version_flag("--version", std::string("jexplore ") + kVersion);

    std::string log_level_name = "info";
    app.add_option("--log-level", log_level_name, "Diagnostic verbosity")
        ->check(CLI::IsMember({"debug", "info", "warn", "error"}));

    // --- space ---------------------------------------------------------
    auto* space_cmd = app.add_subcommand("space", "Inspect or export the configuration space");
    auto* space_info = space_cmd->add_subcommand("info", "Print the parameter table");
    std::string space_file;
    space_info->add_option("--space", space_file, "Space definition JSON instead of the built-in");
    auto* space_export = space_cmd->add_subcommand("export", "Write the built-in space as JSON");
    std::string space_out = "-";
    space_export->add_option("--out", space_out, "Output file, or - for standard output");
    space_cmd->require_subcommand(1);

    // --- client ---------------------------------------------------------
    auto* client_cmd = app.add_subcommand("client", "Run the measurement client daemon");
    ClientSettings client_settings;
    std::string client_device = "sim";
    std::string client_meters = "time,power,memory";
    std::string client_model_file;
    bool client_deterministic = false;
    client_cmd->add_option("--listen", client_settings.listen_address, "HOST:PORT to listen on")
        ->required();
    client_cmd->add_option("--id", client_settings.client_id, "Client identifier")->required();
    client_cmd->add_option("--device", client_device, "Device backend")
        ->check(CLI::IsMember({"sim", "jetson-orin"}));
    client_cmd->add_option("--preset", client_settings.preset,
                           "Default workload preset (llama|llava or one from --model)");
    client_cmd->add_option("--meters", client_meters, "Enabled meters, comma separated");
    client_cmd->add_option("--timeout-s", client_settings.timeout_s, "Per-run timeout in seconds")
        ->check(CLI::PositiveNumber);
    client_cmd->add_option("--model", client_model_file, "Model constants JSON file");
    auto* deterministic_flag = client_cmd->add_flag(
        "--deterministic", client_deterministic,
        "Measure on the virtual clock (the default; kept explicit for scripts)");
    auto* realtime_flag = client_cmd->add_flag("--realtime", client_settings.realtime,
                                               "Actually sleep for the modeled duration");
    realtime_flag->excludes(deterministic_flag);
    client_cmd->add_option("--max-sessions", client_settings.max_sessions,
                           "Exit after this many host sessions (0 = serve forever)");

    // --- host -----------------------------------------------------------
    auto* host_cmd = app.add_subcommand("host", "Drive a search over connected clients");
    ExplorationPlan plan;
    std::string host_meters = "time,power,memory";
    std::string host_out;
    std::size_t host_population = 20;
    bool host_memory_objective = false;
    host_cmd->add_option("--client", plan.client_addresses, "Client HOST:PORT (repeatable)")
        ->required();
    host_cmd->add_option("--algo", plan.algorithm, "Search algorithm (random|evolutionary)");
    host_cmd->add_option("--seed", plan.seed, "Algorithm seed");
    host_cmd->add_option("--budget", plan.budget, "Total samples to record")
        ->check(CLI::PositiveNumber);
    host_cmd->add_option("--batch", plan.batch, "Proposals requested per algorithm call")
        ->check(CLI::PositiveNumber);
    host_cmd->add_option("--workload", plan.workload.name, "Workload name (llama|llava)")
        ->required();
    std::vector<std::string> host_params;
    host_cmd->add_option("--param", host_params, "Workload parameter KEY=VALUE (repeatable)");
    host_cmd->add_option("--meters", host_meters, "Meters to record, comma separated");
    host_cmd->add_option("--out", host_out, "Results CSV path")->required();
    host_cmd->add_flag("--deterministic", plan.deterministic,
                       "Logical timestamps for byte-identical reruns");
    host_cmd->add_option("--population", host_population,
                         "Population size for --algo evolutionary");
    host_cmd->add_flag("--memory-objective", host_memory_objective,
                       "Add memory as a third minimized objective");

    // --- sim ------------------------------------------------------------
    auto* sim_cmd = app.add_subcommand("sim", "Explore in-process against a virtual client");
    SimRunOptions sim;
    std::string sim_meters = "time,power,memory";
    std::string sim_out;
    std::string sim_model_file;
    std::size_t sim_population = 20;
    bool sim_memory_objective = false;
    sim_cmd->add_option("--preset", sim.preset, "Workload preset")->required();
    sim_cmd->add_option("--samples", sim.samples, "Samples to record")
        ->required()
        ->check(CLI::PositiveNumber);
    sim_cmd->add_option("--seed", sim.seed, "Algorithm seed");
    sim_cmd->add_option("--out", sim_out, "Results CSV path")->required();
    sim_cmd->add_option("--algo", sim.algorithm, "Search algorithm (random|evolutionary)");
    sim_cmd->add_option("--batch", sim.batch, "Proposals requested per algorithm call")
        ->check(CLI::PositiveNumber);
    sim_cmd->add_option("--meters", sim_meters, "Meters to record, comma separated");
    sim_cmd->add_flag("--deterministic", sim.deterministic,
                      "Logical timestamps for byte-identical reruns");
    sim_cmd->add_option("--model", sim_model_file, "Model constants JSON file");
    sim_cmd->add_option("--population", sim_population,
                        "Population size for --algo evolutionary");
    sim_cmd->add_flag("--memory-objective", sim_memory_objective,
                      "Add memory as a third minimized objective");
    std::vector<std::string> sim_params;
    sim_cmd->add_option("--param", sim_params, "Workload parameter KEY=VALUE (repeatable)");
    sim_cmd->add_option("--client-id", sim.client_id, "client_id written to the CSV");

    // --- analyze ---------------------------------------------------------
    auto* analyze_cmd = app.add_subcommand("analyze", "Summarize a results CSV");
    std::string analyze_in;
    std::string analyze_report;
    std::string analyze_svg;
    double gap_threshold = 3.0;
    analyze_cmd->add_option("--in", analyze_in, "Results CSV to analyze")->required();
    analyze_cmd->add_option("--report", analyze_report, "Report JSON path")->required();
    analyze_cmd->add_option("--svg", analyze_svg, "Optional scatter plot SVG path");
    analyze_cmd->add_option("--gap-threshold", gap_threshold,
                            "Cut-off gap as a multiple of the median gap")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e);
        return kExitOk;
    } catch (const CLI::CallForVersion& e) {
        app.exit(e);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }
    set_log_level(log_level_from_string(log_level_name));

    if (space_info->parsed()) {
        const ConfigSpace space =
            space_file.empty() ? build_orin_space() : load_space_file(space_file);
        print_space_info(space);
        return kExitOk;
    }
    if (space_export->parsed()) {
        const std::string json = space_to_json(build_orin_space());
        if (space_out == "-") {
            std::fputs(json.c_str(), stdout);
        } else {
            write_text_file(space_out, json);
        }
        return kExitOk;
    }
    if (client_cmd->parsed()) {
        client_settings.device = device_kind_from_string(client_device);
        client_settings.meters = parse_meters(client_meters);
        if (!client_model_file.empty()) {
            client_settings.model_file = client_model_file;
        }
        const ServeSummary summary = serve(std::move(client_settings));
        log_info("served " + std::to_string(summary.sessions) + " sessions, " +
                 std::to_string(summary.samples_total) + " samples (" +
                 std::to_string(summary.samples_ok) + " ok, " +
                 std::to_string(summary.samples_error) + " error, " +
                 std::to_string(summary.samples_timeout) + " timeout)");
        return kExitOk;
    }
    if (host_cmd->parsed()) {
        plan.meters = parse_meters(host_meters);
        plan.output_path = host_out;
        plan.workload.params = parse_key_values(host_params, "--param");
        plan.algorithm_params["population"] = std::to_string(host_population);
        if (host_memory_objective) {
            plan.algorithm_params["memory_objective"] = "1";
        }
        const std::vector<SampleRecord> records = explore(plan);
        log_info("recorded " + std::to_string(records.size()) + " samples to " +
                 plan.output_path.string());
        return kExitOk;
    }
    if (sim_cmd->parsed()) {
        sim.meters = parse_meters(sim_meters);
        sim.output_path = sim_out;
        sim.workload_params = parse_key_values(sim_params, "--param");
        if (!sim_model_file.empty()) {
            sim.model_file = sim_model_file;
        }
        sim.algorithm_params["population"] = std::to_string(sim_population);
        if (sim_memory_objective) {
            sim.algorithm_params["memory_objective"] = "1";
        }
        const std::vector<SampleRecord> records = run_sim_exploration(sim);
        log_info("recorded " + std::to_string(records.size()) + " samples to " +
                 sim.output_path.string());
        return kExitOk;
    }
    if (analyze_cmd->parsed()) {
        const AnalysisReport report = analyze(analyze_in, build_orin_space(), gap_threshold);
        write_text_file(analyze_report, report_to_json(report));
        if (!analyze_svg.empty()) {
            const std::vector<SampleRecord> records = read_csv(analyze_in);
            write_text_file(analyze_svg, scatter_svg(records, report.pareto_ids));
        }
        log_info("report written to " + analyze_report);
        return kExitOk;
    }

    std::fputs(app.help().c_str(), stderr);
    return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const CLI::Error&) {
        return kExitUsage;  // CLI11_PARSE handles printing; defensive only
    } catch (const jexplore::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "unexpected error: %s\n", e.what());
        return kExitRuntime;
    }
}
