#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "jexplore/configspace.hpp"
#include "jexplore/measurement.hpp"

namespace jexplore {

inline constexpr int kProtocolVersion = 1;

/// Wire frames are a 4-byte big-endian body length followed by the body:
/// one UTF-8 JSON envelope with keys in the fixed order (type, seq, payload)
/// and no insignificant whitespace. Bodies are capped at 2^24 bytes.
inline constexpr std::size_t kMaxFrameBody = std::size_t{1} << 24;

enum class MessageType { Hello, Config, Result, Bye, Err };
enum class DeviceKind { Sim, JetsonOrin };
enum class SampleStatus { Ok, Error, Timeout };

std::string_view to_string(MessageType type) noexcept;
std::string_view to_string(DeviceKind device) noexcept;
std::string_view to_string(SampleStatus status) noexcept;
DeviceKind device_kind_from_string(std::string_view s);
SampleStatus sample_status_from_string(std::string_view s);

/// Client greeting, sent once per connection.
struct HelloPayload {
    std::string client_id;
    int protocol_version = kProtocolVersion;
    DeviceKind device = DeviceKind::Sim;
    MeterSet meters;  // only the enable flags travel on the wire

    bool operator==(const HelloPayload&) const = default;
};

/// Workload selection: a name plus free-form string parameters.
struct WorkloadSpec {
    std::string name;
    std::map<std::string, std::string> params;

    bool operator==(const WorkloadSpec&) const = default;
};

/// Host-to-client sample request.
struct ConfigPayload {
    std::string sample_id;
    Configuration config;
    WorkloadSpec workload;

    bool operator==(const ConfigPayload&) const = default;
};

/// Metric values carried by a RESULT. Each field is present iff its meter is
/// enabled and the sample succeeded.
struct MetricValues {
    std::optional<double> time_s;
    std::optional<double> power_w;
    std::optional<double> memory_mb;

    bool operator==(const MetricValues&) const = default;
};

/// Client-to-host sample outcome, joined to the request by sample_id.
struct ResultPayload {
    std::string sample_id;
    SampleStatus status = SampleStatus::Ok;
    MetricValues metrics;
    std::string error_msg;  // non-empty iff status != ok

    bool operator==(const ResultPayload&) const = default;
};

struct ByePayload {
    bool operator==(const ByePayload&) const = default;
};

struct ErrPayload {
    std::string message;

    bool operator==(const ErrPayload&) const = default;
};

/// One protocol message. The variant alternative determines the wire type.
/// seq starts at 0 per connection and increments by 1 per message sent by
/// the same side.
struct MessageEnvelope {
    std::uint64_t seq = 0;
    std::variant<HelloPayload, ConfigPayload, ResultPayload, ByePayload, ErrPayload> payload;

    MessageType type() const noexcept;

    bool operator==(const MessageEnvelope&) const = default;
};

/// Canonical JSON body of an envelope (fixed key order, no whitespace).
std::string encode_envelope(const MessageEnvelope& envelope);

/// Parses and validates one body. Throws ParseError for malformed JSON or
/// shape, ProtocolError for unknown type strings, a wrong protocol_version
/// in HELLO, or payload invariant violations.
MessageEnvelope decode_envelope(std::string_view body);

/// Wraps an opaque body in a length-prefixed frame.
/// Throws FrameTooLargeError if the body exceeds kMaxFrameBody.
std::string frame_body(std::string_view body);

/// encode_envelope composed with frame_body.
std::string encode_frame(const MessageEnvelope& envelope);

/// Incremental frame parser tolerating arbitrary read fragmentation.
///
/// Feed raw bytes as they arrive, then poll next_body()/next() until they
/// return nothing. Call finish() at end of stream; it throws
/// IncompleteFrameError if the stream stopped inside a frame. After any
/// throw the decoder is poisoned and keeps rethrowing.
class FrameDecoder {
public:
    void feed(std::string_view bytes);

    /// Extracts the next complete frame body, if buffered.
    std::optional<std::string> next_body();

    /// Like next_body, but decodes the body into an envelope.
    std::optional<MessageEnvelope> next();

    void finish() const;

    std::size_t buffered_bytes() const noexcept { return buffer_.size(); }

private:
    void check_poisoned() const;

    std::string buffer_;
    std::size_t scan_offset_ = 0;
    bool poisoned_ = false;
    std::string poison_reason_;
};

}  // namespace jexplore
