#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>

namespace jexplore {

/// "host:port" -> (host, port). Throws ArgumentError on malformed input.
std::pair<std::string, std::uint16_t> parse_address(const std::string& address);

/// Cross-thread wakeup for blocking accept/read loops, backed by a pipe.
class Interrupt {
public:
    Interrupt();
    ~Interrupt();
    Interrupt(const Interrupt&) = delete;
    Interrupt& operator=(const Interrupt&) = delete;

    void trigger() noexcept;
    bool triggered() const noexcept;
    int read_fd() const noexcept { return fds_[0]; }

private:
    int fds_[2];
};

/// One connected TCP stream (RAII over the socket descriptor).
class TcpConnection {
public:
    TcpConnection() = default;
    explicit TcpConnection(int fd) noexcept : fd_(fd) {}
    ~TcpConnection();
    TcpConnection(TcpConnection&& other) noexcept;
    TcpConnection& operator=(TcpConnection&& other) noexcept;
    TcpConnection(const TcpConnection&) = delete;
    TcpConnection& operator=(const TcpConnection&) = delete;

    static TcpConnection connect(const std::string& host, std::uint16_t port);

    bool is_open() const noexcept { return fd_ >= 0; }

    /// Reads up to buffer.size() bytes; 0 means orderly EOF. When an
    /// interrupt is given, returns nullopt if it fires before data arrives.
    std::optional<std::size_t> read_some(std::span<char> buffer,
                                         const Interrupt* interrupt = nullptr);

    void write_all(std::span<const char> data);

    void set_recv_timeout(std::chrono::milliseconds timeout);
    void shutdown_both() noexcept;
    void close() noexcept;

private:
    int fd_ = -1;
};

/// Listening socket; bind to port 0 for an ephemeral port.
class TcpListener {
public:
    TcpListener() = default;
    ~TcpListener();
    TcpListener(TcpListener&& other) noexcept;
    TcpListener& operator=(TcpListener&& other) noexcept;
    TcpListener(const TcpListener&) = delete;
    TcpListener& operator=(const TcpListener&) = delete;

    static TcpListener bind(const std::string& host, std::uint16_t port);

    std::uint16_t port() const noexcept { return port_; }

    /// Blocks until a peer connects; nullopt if the interrupt fires first.
    std::optional<TcpConnection> accept(const Interrupt* interrupt = nullptr);

    void close() noexcept;

private:
    int fd_ = -1;
    std::uint16_t port_ = 0;
};

}  // namespace jexplore
