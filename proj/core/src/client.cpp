#include "jexplore/client.hpp"

#include "jexplore/channel.hpp"
#include "jexplore/errors.hpp"
#include "jexplore/log.hpp"

namespace jexplore {

void validate_client_settings(const ClientSettings& settings) {
    if (settings.client_id.empty()) {
        throw ArgumentError("client_id must be non-empty");
    }
    if (settings.client_id.find_first_of(",\"\r\n") != std::string::npos) {
        throw ArgumentError("client_id must not contain CSV separator characters");
    }
    if (!(settings.timeout_s > 0.0)) {
        throw ArgumentError("timeout_s must be positive");
    }
    validate_meters(settings.meters);
    parse_address(settings.listen_address);
}

namespace {

std::unique_ptr<DeviceBackend> build_backend(const ClientSettings& settings) {
    const ConfigSpace space = build_orin_space();
    if (settings.device == DeviceKind::JetsonOrin) {
        return make_jetson_orin_backend(space);
    }
    ModelSpec spec = settings.model_file.empty() ? default_model_spec()
                                                 : load_model_file(settings.model_file);
    return make_sim_backend(std::move(spec), space, settings.preset, settings.realtime);
}

}  // namespace

ClientServer::ClientServer(ClientSettings settings) : settings_(std::move(settings)) {
    validate_client_settings(settings_);
    backend_ = build_backend(settings_);
    const auto [host, port] = parse_address(settings_.listen_address);
    listener_ = TcpListener::bind(host, port);
    log_info("client " + settings_.client_id + " listening on " + host + ":" +
             std::to_string(listener_.port()));
}

std::uint16_t ClientServer::port() const noexcept {
    return listener_.port();
}

ServeSummary ClientServer::run() {
    while (settings_.max_sessions == 0 || summary_.sessions < settings_.max_sessions) {
        std::optional<TcpConnection> connection = listener_.accept(&stop_);
        if (!connection) {
            break;  // stop requested
        }
        ++summary_.sessions;
        serve_session(std::move(*connection));
    }
    return summary_;
}

void ClientServer::request_stop() noexcept {
    stop_.trigger();
}

void ClientServer::serve_session(TcpConnection connection) {
    MessageChannel channel(std::move(connection));
    std::size_t session_samples = 0;
    try {
        HelloPayload hello;
        hello.client_id = settings_.client_id;
        hello.device = backend_->kind();
        hello.meters = settings_.meters;
        channel.send(hello);

        for (;;) {
            std::optional<MessageEnvelope> envelope = channel.receive(&stop_);
            if (!envelope) {
                if (stop_.triggered()) {
                    return;
                }
                log_info("host connection closed; back to listening");
                return;
            }
            if (envelope->type() == MessageType::Bye) {
                log_info("session finished after " + std::to_string(session_samples) +
                         " samples");
                return;
            }
            const auto* request = std::get_if<ConfigPayload>(&envelope->payload);
            if (request == nullptr) {
                throw ProtocolError("client expects CONFIG or BYE, got " +
                                    std::string(to_string(envelope->type())));
            }

            // One sample at a time: apply, run under the meters, answer.
            SampleOutcome outcome;
            try {
                backend_->apply(request->config);
                outcome =
                    backend_->run_workload(request->workload, settings_.meters,
                                           settings_.timeout_s);
            } catch (const Error& e) {
                outcome.status = SampleStatus::Error;
                outcome.metrics = MeasurementSet{};
                outcome.error_msg = e.what();
            }

            ResultPayload result;
            result.sample_id = request->sample_id;
            result.status = outcome.status;
            if (outcome.status == SampleStatus::Ok) {
                result.metrics.time_s = outcome.metrics.time_s;
                result.metrics.power_w = outcome.metrics.power_w;
                result.metrics.memory_mb = outcome.metrics.memory_mb;
            } else {
                result.error_msg =
                    outcome.error_msg.empty() ? "sample failed" : outcome.error_msg;
            }
            channel.send(result);

            ++session_samples;
            ++summary_.samples_total;
            switch (outcome.status) {
                case SampleStatus::Ok: ++summary_.samples_ok; break;
                case SampleStatus::Error: ++summary_.samples_error; break;
                case SampleStatus::Timeout: ++summary_.samples_timeout; break;
            }
        }
    } catch (const IoError& e) {
        log_warn(std::string("session lost: ") + e.what());
    } catch (const Error& e) {
        // Protocol violation: tell the host why, then drop the connection.
        log_warn(std::string("protocol failure: ") + e.what());
        try {
            channel.send(ErrPayload{e.what()});
        } catch (const Error&) {
        }
        channel.connection().shutdown_both();
    }
}

ServeSummary serve(ClientSettings settings) {
    ClientServer server(std::move(settings));
    return server.run();
}

}  // namespace jexplore
