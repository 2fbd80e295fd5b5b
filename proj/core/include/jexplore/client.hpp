#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>

#include "jexplore/measurement.hpp"
#include "jexplore/net.hpp"
#include "jexplore/protocol.hpp"
#include "jexplore/simdevice.hpp"

namespace jexplore {

/// Settings of one client daemon.
struct ClientSettings {
    std::string listen_address = "127.0.0.1:5555";
    std::string client_id;
    DeviceKind device = DeviceKind::Sim;
    std::string preset = "llama";  // default workload when a CONFIG names none
    MeterSet meters;
    double timeout_s = 3600.0;  // per-run cap; overruns report status=timeout
    bool realtime = false;      // actually sleep for the modeled duration
    std::filesystem::path model_file;  // optional constants override
    std::size_t max_sessions = 0;      // stop after this many host sessions; 0 = serve forever
};

void validate_client_settings(const ClientSettings& settings);

struct ServeSummary {
    std::size_t sessions = 0;
    std::size_t samples_total = 0;
    std::size_t samples_ok = 0;
    std::size_t samples_error = 0;
    std::size_t samples_timeout = 0;
};

/// The client daemon: accepts one host connection at a time, greets with
/// HELLO, then answers every CONFIG with exactly one RESULT (same sample_id,
/// in order, one sample in flight at a time so measurements stay
/// unperturbed). Failed samples produce error results and the loop
/// continues; BYE or a lost host returns the daemon to the listening state.
class ClientServer {
public:
    explicit ClientServer(ClientSettings settings);

    /// Port actually bound (ephemeral ports resolve here).
    std::uint16_t port() const noexcept;

    /// Serves sessions until max_sessions is reached or request_stop fires.
    ServeSummary run();

    /// Safe to call from another thread; wakes blocking accepts and reads.
    void request_stop() noexcept;

private:
    void serve_session(TcpConnection connection);

    ClientSettings settings_;
    std::unique_ptr<DeviceBackend> backend_;
    TcpListener listener_;
    Interrupt stop_;
    ServeSummary summary_;
};

/// Binds, serves, and returns the run summary (convenience wrapper).
ServeSummary serve(ClientSettings settings);

}  // namespace jexplore
