#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>

#include "jexplore/csv.hpp"
#include "test_support.hpp"

using jexplore::testsupport::temp_path;

namespace {

struct CommandResult {
    int exit_code = -1;
    std::string output;  // stdout only
};

std::string binary_path() {
    const char* path = std::getenv("JEXPLORE_BIN");
    REQUIRE_MESSAGE(path != nullptr, "JEXPLORE_BIN must point at the jexplore binary");
    return path;
}

CommandResult run(const std::string& args) {
    const std::string command = binary_path() + " " + args + " 2>/dev/null";
    FILE* pipe = popen(command.c_str(), "r");
    REQUIRE(pipe != nullptr);
    CommandResult result;
    char buffer[4096];
    while (std::fgets(buffer, sizeof(buffer), pipe) != nullptr) {
        result.output += buffer;
    }
    const int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

}  // namespace

TEST_CASE("space info prints the table and the cardinality") {
    const CommandResult result = run("space info");
    CHECK(result.exit_code == 0);
    CHECK(result.output.find("cardinality: 107311600") != std::string::npos);
    CHECK(result.output.find("emc_freq_khz") != std::string::npos);
}

TEST_CASE("version flag reports a semantic version") {
    const CommandResult result = run("--version");
    CHECK(result.exit_code == 0);
    CHECK(result.output.find("0.1.0") != std::string::npos);
}

TEST_CASE("usage errors exit with code 1") {
    CHECK(run("host").exit_code == 1);                       // missing required flags
    CHECK(run("frobnicate").exit_code == 1);                 // unknown subcommand
    CHECK(run("sim --samples 5").exit_code == 1);            // missing required flags
    CHECK(run("space info --bogus-flag").exit_code == 1);    // unknown flag
    CHECK(run("").exit_code == 1);                           // no subcommand
}

TEST_CASE("conflicting clock flags are rejected") {
    const CommandResult result =
        run("client --listen 127.0.0.1:0 --id c1 --deterministic --realtime");
    CHECK(result.exit_code == 1);
}

TEST_CASE("runtime failures exit with code 2") {
    CHECK(run("analyze --in /nonexistent.csv --report /tmp/r.json").exit_code == 2);
    // an unreachable client is a runtime error, not a usage error
    CHECK(run("host --client 127.0.0.1:1 --workload llama --out /tmp/x.csv").exit_code == 2);
}

TEST_CASE("sim subcommand writes a readable results file") {
    const auto csv = temp_path("cli-sim");
    const CommandResult result = run("sim --preset llava --samples 5 --seed 3 "
                                     "--deterministic --out " + csv.string());
    CHECK(result.exit_code == 0);
    CHECK(jexplore::read_csv(csv).size() == 5);
}

TEST_CASE("space export emits the documented JSON schema") {
    const CommandResult result = run("space export");
    CHECK(result.exit_code == 0);
    CHECK(result.output.find("\"params\"") != std::string::npos);
    CHECK(result.output.find("\"emc_freq_khz\"") != std::string::npos);
    CHECK(result.output.find("core-count") != std::string::npos);
}

TEST_CASE("space info accepts an exported space definition file") {
    const auto json = temp_path("cli-space");
    CHECK(run("space export --out " + json.string()).exit_code == 0);
    const CommandResult result = run("space info --space " + json.string());
    CHECK(result.exit_code == 0);
    CHECK(result.output.find("cardinality: 107311600") != std::string::npos);
}

TEST_CASE("sim and host+client produce identical CSV bodies in deterministic mode") {
    const auto sim_csv = temp_path("cli-ident-sim");
    CHECK(run("sim --preset llama --samples 8 --seed 42 --deterministic --out " +
              sim_csv.string())
              .exit_code == 0);

    // a socket client with the same id as the sim runner's virtual client
    const std::string port = "46211";
    const std::string daemon = binary_path() +
                               " client --listen 127.0.0.1:" + port +
                               " --id sim0 --max-sessions 1 2>/dev/null &";
    REQUIRE(std::system(daemon.c_str()) == 0);
    std::this_thread::sleep_for(std::chrono::milliseconds(300));

    const auto host_csv = temp_path("cli-ident-host");
    CHECK(run("host --client 127.0.0.1:" + port +
              " --workload llama --seed 42 --budget 8 --deterministic --out " +
              host_csv.string())
              .exit_code == 0);

    std::ifstream a(sim_csv, std::ios::binary);
    std::ifstream b(host_csv, std::ios::binary);
    std::ostringstream sa;
    std::ostringstream sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    REQUIRE(!sa.str().empty());
    CHECK(sa.str() == sb.str());
}
