#include "jexplore/channel.hpp"

#include <array>

#include "jexplore/errors.hpp"

namespace jexplore {

std::optional<MessageEnvelope> MessageChannel::receive(const Interrupt* interrupt) {
    for (;;) {
        if (std::optional<MessageEnvelope> envelope = decoder_.next()) {
            if (envelope->seq != next_recv_seq_) {
                throw ProtocolError("peer seq " + std::to_string(envelope->seq) +
                                    ", expected " + std::to_string(next_recv_seq_));
            }
            ++next_recv_seq_;
            return envelope;
        }
        std::array<char, 16384> buffer;
        const std::optional<std::size_t> n =
            connection_.read_some({buffer.data(), buffer.size()}, interrupt);
        if (!n) {
            return std::nullopt;  // interrupted
        }
        if (*n == 0) {
            decoder_.finish();  // throws if EOF landed inside a frame
            return std::nullopt;
        }
        decoder_.feed({buffer.data(), *n});
    }
}

}  // namespace jexplore
