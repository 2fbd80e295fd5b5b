#pragma once

#include <cstdint>
#include <optional>
#include <utility>

#include "jexplore/net.hpp"
#include "jexplore/protocol.hpp"

namespace jexplore {

/// Envelope-level view of one TCP connection: frames outgoing payloads with
/// this side's seq counter and verifies the peer's counter on receive.
/// One reader and one writer may use a channel concurrently; two concurrent
/// writers (or readers) are not allowed.
class MessageChannel {
public:
    explicit MessageChannel(TcpConnection connection) : connection_(std::move(connection)) {}

    /// Sends one payload, stamping and advancing the local seq counter.
    template <typename Payload>
    void send(Payload payload) {
        MessageEnvelope envelope;
        envelope.seq = next_send_seq_++;
        envelope.payload = std::move(payload);
        const std::string frame = encode_frame(envelope);
        connection_.write_all({frame.data(), frame.size()});
    }

    /// Receives the next envelope. Returns nullopt on orderly EOF at a frame
    /// boundary or when the interrupt fires. Throws IncompleteFrameError on
    /// EOF inside a frame and ProtocolError on a seq mismatch.
    std::optional<MessageEnvelope> receive(const Interrupt* interrupt = nullptr);

    TcpConnection& connection() noexcept { return connection_; }

private:
    TcpConnection connection_;
    FrameDecoder decoder_;
    std::uint64_t next_send_seq_ = 0;
    std::uint64_t next_recv_seq_ = 0;
};

}  // namespace jexplore
