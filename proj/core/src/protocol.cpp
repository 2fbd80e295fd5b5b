#include "jexplore/protocol.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "jexplore/errors.hpp"

namespace jexplore {

namespace {

using ojson = nlohmann::ordered_json;

constexpr std::string_view kMetricKeys[] = {"time_s", "power_w", "memory_mb"};

MessageType message_type_from_string(std::string_view s) {
    if (s == "HELLO") return MessageType::Hello;
    if (s == "CONFIG") return MessageType::Config;
    if (s == "RESULT") return MessageType::Result;
    if (s == "BYE") return MessageType::Bye;
    if (s == "ERR") return MessageType::Err;
    throw ProtocolError("unknown message type: " + std::string(s));
}

void validate_envelope(const MessageEnvelope& envelope) {
    if (const auto* hello = std::get_if<HelloPayload>(&envelope.payload)) {
        if (hello->client_id.empty()) {
            throw ProtocolError("HELLO client_id must be non-empty");
        }
        if (hello->protocol_version != kProtocolVersion) {
            throw ProtocolError("HELLO protocol_version must be " +
                                std::to_string(kProtocolVersion));
        }
        validate_meters(hello->meters);
    } else if (const auto* config = std::get_if<ConfigPayload>(&envelope.payload)) {
        if (config->sample_id.empty()) {
            throw ProtocolError("CONFIG sample_id must be non-empty");
        }
    } else if (const auto* result = std::get_if<ResultPayload>(&envelope.payload)) {
        if (result->sample_id.empty()) {
            throw ProtocolError("RESULT sample_id must be non-empty");
        }
        const bool has_metrics = result->metrics.time_s || result->metrics.power_w ||
                                 result->metrics.memory_mb;
        if (result->status == SampleStatus::Ok) {
            if (!has_metrics) {
                throw ProtocolError("ok RESULT must carry metrics");
            }
            if (!result->error_msg.empty()) {
                throw ProtocolError("ok RESULT must not carry error_msg");
            }
        } else {
            if (result->error_msg.empty()) {
                throw ProtocolError("failed RESULT must carry a non-empty error_msg");
            }
            if (has_metrics) {
                throw ProtocolError("failed RESULT must not carry metrics");
            }
        }
        for (const auto& value :
             {result->metrics.time_s, result->metrics.power_w, result->metrics.memory_mb}) {
            if (value && !std::isfinite(*value)) {
                throw ProtocolError("RESULT metrics must be finite");
            }
        }
    } else if (const auto* err = std::get_if<ErrPayload>(&envelope.payload)) {
        if (err->message.empty()) {
            throw ProtocolError("ERR message must be non-empty");
        }
    }
}

ojson hello_to_json(const HelloPayload& hello) {
    ojson p;
    p["client_id"] = hello.client_id;
    p["protocol_version"] = hello.protocol_version;
    p["device"] = std::string(to_string(hello.device));
    ojson meters = ojson::array();
    if (hello.meters.time_enabled) meters.push_back("time");
    if (hello.meters.power_enabled) meters.push_back("power");
    if (hello.meters.memory_enabled) meters.push_back("memory");
    p["meters"] = std::move(meters);
    return p;
}

ojson config_to_json(const ConfigPayload& payload) {
    ojson c;
    c["cores_c1"] = payload.config.cores_c1;
    c["cores_c2"] = payload.config.cores_c2;
    c["cores_c3"] = payload.config.cores_c3;
    c["freq_c1_khz"] = payload.config.freq_c1_khz;
    c["freq_c2_khz"] = payload.config.freq_c2_khz;
    c["freq_c3_khz"] = payload.config.freq_c3_khz;
    c["gpu_freq_khz"] = payload.config.gpu_freq_khz;
    c["emc_freq_khz"] = payload.config.emc_freq_khz;
    ojson w;
    w["name"] = payload.workload.name;
    ojson params = ojson::object();
    for (const auto& [key, value] : payload.workload.params) {
        params[key] = value;  // std::map iterates sorted, so params are canonical
    }
    w["params"] = std::move(params);
    ojson p;
    p["sample_id"] = payload.sample_id;
    p["config"] = std::move(c);
    p["workload"] = std::move(w);
    return p;
}

ojson result_to_json(const ResultPayload& result) {
    ojson p;
    p["sample_id"] = result.sample_id;
    p["status"] = std::string(to_string(result.status));
    const std::optional<double> values[] = {result.metrics.time_s, result.metrics.power_w,
                                            result.metrics.memory_mb};
    bool any = false;
    ojson metrics;
    for (std::size_t i = 0; i < 3; ++i) {
        if (values[i]) {
            metrics[std::string(kMetricKeys[i])] = *values[i];
            any = true;
        }
    }
    if (any) {
        p["metrics"] = std::move(metrics);
    }
    if (!result.error_msg.empty()) {
        p["error_msg"] = result.error_msg;
    }
    return p;
}

const nlohmann::json& expect_member(const nlohmann::json& obj, const char* key,
                                    const char* where) {
    const auto it = obj.find(key);
    if (it == obj.end()) {
        throw ParseError(std::string(where) + " is missing key \"" + key + "\"");
    }
    return *it;
}

std::string expect_string(const nlohmann::json& obj, const char* key, const char* where) {
    const auto& value = expect_member(obj, key, where);
    if (!value.is_string()) {
        throw ParseError(std::string(where) + " key \"" + key + "\" must be a string");
    }
    return value.get<std::string>();
}

void expect_only_keys(const nlohmann::json& obj, std::initializer_list<std::string_view> keys,
                      const char* where) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const std::string_view key : keys) {
            if (item.key() == key) {
                known = true;
                break;
            }
        }
        if (!known) {
            throw ParseError(std::string(where) + " has unexpected key \"" + item.key() + "\"");
        }
    }
}

HelloPayload hello_from_json(const nlohmann::json& p) {
    expect_only_keys(p, {"client_id", "protocol_version", "device", "meters"}, "HELLO payload");
    HelloPayload hello;
    hello.client_id = expect_string(p, "client_id", "HELLO payload");
    const auto& version = expect_member(p, "protocol_version", "HELLO payload");
    if (!version.is_number_integer()) {
        throw ParseError("HELLO protocol_version must be an integer");
    }
    hello.protocol_version = version.get<int>();
    if (hello.protocol_version != kProtocolVersion) {
        throw ProtocolError("unsupported protocol_version " +
                            std::to_string(hello.protocol_version) + ", expected " +
                            std::to_string(kProtocolVersion));
    }
    try {
        hello.device = device_kind_from_string(expect_string(p, "device", "HELLO payload"));
    } catch (const ArgumentError& e) {
        throw ProtocolError(e.what());
    }
    const auto& meters = expect_member(p, "meters", "HELLO payload");
    if (!meters.is_array()) {
        throw ParseError("HELLO meters must be an array");
    }
    MeterSet set;
    set.time_enabled = set.power_enabled = set.memory_enabled = false;
    for (const auto& m : meters) {
        if (!m.is_string()) {
            throw ParseError("HELLO meters entries must be strings");
        }
        const std::string name = m.get<std::string>();
        bool* flag = nullptr;
        if (name == "time") flag = &set.time_enabled;
        else if (name == "power") flag = &set.power_enabled;
        else if (name == "memory") flag = &set.memory_enabled;
        if (flag == nullptr) {
            throw ProtocolError("unknown meter name: " + name);
        }
        if (*flag) {
            throw ProtocolError("duplicate meter name: " + name);
        }
        *flag = true;
    }
    if (!set.time_enabled && !set.power_enabled && !set.memory_enabled) {
        throw ProtocolError("HELLO must enable at least one meter");
    }
    hello.meters = set;
    if (hello.client_id.empty()) {
        throw ProtocolError("HELLO client_id must be non-empty");
    }
    return hello;
}

ConfigPayload config_from_json(const nlohmann::json& p) {
    expect_only_keys(p, {"sample_id", "config", "workload"}, "CONFIG payload");
    ConfigPayload payload;
    payload.sample_id = expect_string(p, "sample_id", "CONFIG payload");
    if (payload.sample_id.empty()) {
        throw ProtocolError("CONFIG sample_id must be non-empty");
    }
    const auto& c = expect_member(p, "config", "CONFIG payload");
    if (!c.is_object()) {
        throw ParseError("CONFIG config must be an object");
    }
    static const char* kFieldNames[] = {"cores_c1",    "cores_c2",    "cores_c3",
                                        "freq_c1_khz", "freq_c2_khz", "freq_c3_khz",
                                        "gpu_freq_khz", "emc_freq_khz"};
    expect_only_keys(c,
                     {"cores_c1", "cores_c2", "cores_c3", "freq_c1_khz", "freq_c2_khz",
                      "freq_c3_khz", "gpu_freq_khz", "emc_freq_khz"},
                     "CONFIG config");
    for (std::size_t i = 0; i < kConfigParamCount; ++i) {
        const auto& field = expect_member(c, kFieldNames[i], "CONFIG config");
        if (!field.is_number_integer()) {
            throw ParseError(std::string("CONFIG config field ") + kFieldNames[i] +
                             " must be an integer");
        }
        set_config_value(payload.config, i, field.get<std::int64_t>());
    }
    const auto& w = expect_member(p, "workload", "CONFIG payload");
    if (!w.is_object()) {
        throw ParseError("CONFIG workload must be an object");
    }
    expect_only_keys(w, {"name", "params"}, "CONFIG workload");
    payload.workload.name = expect_string(w, "name", "CONFIG workload");
    const auto& params = expect_member(w, "params", "CONFIG workload");
    if (!params.is_object()) {
        throw ParseError("CONFIG workload params must be an object");
    }
    for (const auto& item : params.items()) {
        if (!item.value().is_string()) {
            throw ParseError("CONFIG workload params values must be strings");
        }
        payload.workload.params[item.key()] = item.value().get<std::string>();
    }
    return payload;
}

ResultPayload result_from_json(const nlohmann::json& p) {
    expect_only_keys(p, {"sample_id", "status", "metrics", "error_msg"}, "RESULT payload");
    ResultPayload result;
    result.sample_id = expect_string(p, "sample_id", "RESULT payload");
    if (result.sample_id.empty()) {
        throw ProtocolError("RESULT sample_id must be non-empty");
    }
    try {
        result.status = sample_status_from_string(expect_string(p, "status", "RESULT payload"));
    } catch (const ArgumentError& e) {
        throw ProtocolError(e.what());
    }
    if (p.contains("metrics")) {
        const auto& metrics = p["metrics"];
        if (!metrics.is_object()) {
            throw ParseError("RESULT metrics must be an object");
        }
        expect_only_keys(metrics, {"time_s", "power_w", "memory_mb"}, "RESULT metrics");
        std::optional<double>* const slots[] = {&result.metrics.time_s, &result.metrics.power_w,
                                                &result.metrics.memory_mb};
        for (std::size_t i = 0; i < 3; ++i) {
            if (metrics.contains(std::string(kMetricKeys[i]))) {
                const auto& v = metrics[std::string(kMetricKeys[i])];
                if (!v.is_number()) {
                    throw ParseError("RESULT metric " + std::string(kMetricKeys[i]) +
                                     " must be a number");
                }
                *slots[i] = v.get<double>();
            }
        }
    }
    if (p.contains("error_msg")) {
        const auto& msg = p["error_msg"];
        if (!msg.is_string()) {
            throw ParseError("RESULT error_msg must be a string");
        }
        result.error_msg = msg.get<std::string>();
    }
    const bool has_metrics =
        result.metrics.time_s || result.metrics.power_w || result.metrics.memory_mb;
    if (result.status == SampleStatus::Ok) {
        if (!has_metrics) {
            throw ProtocolError("ok RESULT must carry metrics");
        }
        if (!result.error_msg.empty()) {
            throw ProtocolError("ok RESULT must not carry error_msg");
        }
    } else {
        if (result.error_msg.empty()) {
            throw ProtocolError("failed RESULT must carry a non-empty error_msg");
        }
        if (has_metrics) {
            throw ProtocolError("failed RESULT must not carry metrics");
        }
    }
    return result;
}

}  // namespace

std::string_view to_string(MessageType type) noexcept {
    switch (type) {
        case MessageType::Hello: return "HELLO";
        case MessageType::Config: return "CONFIG";
        case MessageType::Result: return "RESULT";
        case MessageType::Bye: return "BYE";
        case MessageType::Err: return "ERR";
    }
    return "?";
}

std::string_view to_string(DeviceKind device) noexcept {
    return device == DeviceKind::Sim ? "sim" : "jetson-orin";
}

std::string_view to_string(SampleStatus status) noexcept {
    switch (status) {
        case SampleStatus::Ok: return "ok";
        case SampleStatus::Error: return "error";
        case SampleStatus::Timeout: return "timeout";
    }
    return "?";
}

DeviceKind device_kind_from_string(std::string_view s) {
    if (s == "sim") return DeviceKind::Sim;
    if (s == "jetson-orin") return DeviceKind::JetsonOrin;
    throw ArgumentError("unknown device kind: " + std::string(s));
}

SampleStatus sample_status_from_string(std::string_view s) {
    if (s == "ok") return SampleStatus::Ok;
    if (s == "error") return SampleStatus::Error;
    if (s == "timeout") return SampleStatus::Timeout;
    throw ArgumentError("unknown sample status: " + std::string(s));
}

MessageType MessageEnvelope::type() const noexcept {
    return static_cast<MessageType>(payload.index());
}

std::string encode_envelope(const MessageEnvelope& envelope) {
    validate_envelope(envelope);
    ojson body;
    body["type"] = std::string(to_string(envelope.type()));
    body["seq"] = envelope.seq;
    body["payload"] = std::visit(
        [](const auto& payload) -> ojson {
            using T = std::decay_t<decltype(payload)>;
            if constexpr (std::is_same_v<T, HelloPayload>) {
                return hello_to_json(payload);
            } else if constexpr (std::is_same_v<T, ConfigPayload>) {
                return config_to_json(payload);
            } else if constexpr (std::is_same_v<T, ResultPayload>) {
                return result_to_json(payload);
            } else if constexpr (std::is_same_v<T, ByePayload>) {
                return ojson::object();
            } else {
                ojson p;
                p["message"] = payload.message;
                return p;
            }
        },
        envelope.payload);
    return body.dump();
}

MessageEnvelope decode_envelope(std::string_view body) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("frame body is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) {
        throw ParseError("envelope must be a JSON object");
    }
    expect_only_keys(doc, {"type", "seq", "payload"}, "envelope");
    const MessageType type = message_type_from_string(expect_string(doc, "type", "envelope"));
    const auto& seq = expect_member(doc, "seq", "envelope");
    if (!seq.is_number_unsigned()) {
        throw ParseError("envelope seq must be a non-negative integer");
    }
    const auto& payload = expect_member(doc, "payload", "envelope");
    if (!payload.is_object()) {
        throw ParseError("envelope payload must be an object");
    }

    MessageEnvelope envelope;
    envelope.seq = seq.get<std::uint64_t>();
    switch (type) {
        case MessageType::Hello:
            envelope.payload = hello_from_json(payload);
            break;
        case MessageType::Config:
            envelope.payload = config_from_json(payload);
            break;
        case MessageType::Result:
            envelope.payload = result_from_json(payload);
            break;
        case MessageType::Bye:
            if (!payload.empty()) {
                throw ParseError("BYE payload must be an empty object");
            }
            envelope.payload = ByePayload{};
            break;
        case MessageType::Err: {
            expect_only_keys(payload, {"message"}, "ERR payload");
            ErrPayload err;
            err.message = expect_string(payload, "message", "ERR payload");
            if (err.message.empty()) {
                throw ProtocolError("ERR message must be non-empty");
            }
            envelope.payload = std::move(err);
            break;
        }
    }
    return envelope;
}

std::string frame_body(std::string_view body) {
    if (body.size() > kMaxFrameBody) {
        throw FrameTooLargeError("frame body of " + std::to_string(body.size()) +
                                 " bytes exceeds the limit of " + std::to_string(kMaxFrameBody));
    }
    std::string frame;
    frame.reserve(4 + body.size());
    const auto length = static_cast<std::uint32_t>(body.size());
    frame.push_back(static_cast<char>((length >> 24) & 0xFF));
    frame.push_back(static_cast<char>((length >> 16) & 0xFF));
    frame.push_back(static_cast<char>((length >> 8) & 0xFF));
    frame.push_back(static_cast<char>(length & 0xFF));
    frame.append(body);
    return frame;
}

std::string encode_frame(const MessageEnvelope& envelope) {
    return frame_body(encode_envelope(envelope));
}

void FrameDecoder::check_poisoned() const {
    if (poisoned_) {
        throw ProtocolError("frame stream unusable after error: " + poison_reason_);
    }
}

void FrameDecoder::feed(std::string_view bytes) {
    check_poisoned();
    buffer_.append(bytes);
}

std::optional<std::string> FrameDecoder::next_body() {
    check_poisoned();
    const std::size_t available = buffer_.size() - scan_offset_;
    if (available < 4) {
        return std::nullopt;
    }
    const auto* bytes = reinterpret_cast<const unsigned char*>(buffer_.data() + scan_offset_);
    const std::uint32_t length = (std::uint32_t{bytes[0]} << 24) |
                                 (std::uint32_t{bytes[1]} << 16) |
                                 (std::uint32_t{bytes[2]} << 8) | std::uint32_t{bytes[3]};
    if (length > kMaxFrameBody) {
        poisoned_ = true;
        poison_reason_ = "declared frame length " + std::to_string(length) + " exceeds limit";
        throw FrameTooLargeError(poison_reason_);
    }
    if (available - 4 < length) {
        return std::nullopt;
    }
    std::string body = buffer_.substr(scan_offset_ + 4, length);
    scan_offset_ += 4 + static_cast<std::size_t>(length);
    if (scan_offset_ == buffer_.size() || scan_offset_ >= 4096) {
        buffer_.erase(0, scan_offset_);
        scan_offset_ = 0;
    }
    return body;
}

std::optional<MessageEnvelope> FrameDecoder::next() {
    const std::optional<std::string> body = next_body();
    if (!body) {
        return std::nullopt;
    }
    return decode_envelope(*body);
}

void FrameDecoder::finish() const {
    check_poisoned();
    if (buffer_.size() != scan_offset_) {
        throw IncompleteFrameError("stream ended inside a frame with " +
                                   std::to_string(buffer_.size() - scan_offset_) +
                                   " unconsumed bytes");
    }
}

}  // namespace jexplore
