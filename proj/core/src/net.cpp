#include "jexplore/net.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "jexplore/errors.hpp"

namespace jexplore {

std::pair<std::string, std::uint16_t> parse_address(const std::string& address) {
    const std::size_t colon = address.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == address.size()) {
        throw ArgumentError("address must look like HOST:PORT, got \"" + address + "\"");
    }
    const std::string host = address.substr(0, colon);
    const std::string port_text = address.substr(colon + 1);
    int port = 0;
    try {
        std::size_t consumed = 0;
        port = std::stoi(port_text, &consumed);
        if (consumed != port_text.size()) {
            throw std::invalid_argument(port_text);
        }
    } catch (const std::exception&) {
        throw ArgumentError("invalid port in address \"" + address + "\"");
    }
    if (port < 0 || port > 65535) {
        throw ArgumentError("port out of range in address \"" + address + "\"");
    }
    return {host, static_cast<std::uint16_t>(port)};
}

namespace {

[[noreturn]] void throw_errno(const std::string& what) {
    throw IoError(what + ": " + std::strerror(errno));
}

struct ResolvedAddress {
    sockaddr_storage storage{};
    socklen_t length = 0;
    int family = AF_INET;
};

ResolvedAddress resolve(const std::string& host, std::uint16_t port) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* result = nullptr;
    const std::string service = std::to_string(port);
    const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &result);
    if (rc != 0 || result == nullptr) {
        throw IoError("cannot resolve " + host + ": " + gai_strerror(rc));
    }
    ResolvedAddress resolved;
    std::memcpy(&resolved.storage, result->ai_addr, result->ai_addrlen);
    resolved.length = result->ai_addrlen;
    resolved.family = result->ai_family;
    ::freeaddrinfo(result);
    return resolved;
}

// Waits for readability on fd, or the interrupt. True = fd is readable.
bool wait_readable(int fd, const Interrupt* interrupt) {
    pollfd fds[2];
    fds[0].fd = fd;
    fds[0].events = POLLIN;
    nfds_t count = 1;
    if (interrupt != nullptr) {
        fds[1].fd = interrupt->read_fd();
        fds[1].events = POLLIN;
        count = 2;
    }
    for (;;) {
        const int rc = ::poll(fds, count, -1);
        if (rc < 0) {
            if (errno == EINTR) {
                continue;
            }
            throw_errno("poll failed");
        }
        if (interrupt != nullptr && (fds[1].revents & POLLIN) != 0) {
            return false;
        }
        if ((fds[0].revents & (POLLIN | POLLHUP | POLLERR)) != 0) {
            return true;
        }
    }
}

}  // namespace

Interrupt::Interrupt() {
    if (::pipe(fds_) != 0) {
        throw_errno("cannot create interrupt pipe");
    }
}

Interrupt::~Interrupt() {
    ::close(fds_[0]);
    ::close(fds_[1]);
}

void Interrupt::trigger() noexcept {
    const char byte = 1;
    [[maybe_unused]] const ssize_t rc = ::write(fds_[1], &byte, 1);
}

bool Interrupt::triggered() const noexcept {
    pollfd p{fds_[0], POLLIN, 0};
    return ::poll(&p, 1, 0) > 0 && (p.revents & POLLIN) != 0;
}

TcpConnection::~TcpConnection() {
    close();
}

TcpConnection::TcpConnection(TcpConnection&& other) noexcept : fd_(other.fd_) {
    other.fd_ = -1;
}

TcpConnection& TcpConnection::operator=(TcpConnection&& other) noexcept {
    if (this != &other) {
        close();
        fd_ = other.fd_;
        other.fd_ = -1;
    }
    return *this;
}

TcpConnection TcpConnection::connect(const std::string& host, std::uint16_t port) {
    const ResolvedAddress address = resolve(host, port);
    const int fd = ::socket(address.family, SOCK_STREAM, 0);
    if (fd < 0) {
        throw_errno("cannot create socket");
    }
    if (::connect(fd, reinterpret_cast<const sockaddr*>(&address.storage), address.length) != 0) {
        const int saved = errno;
        ::close(fd);
        errno = saved;
        throw_errno("cannot connect to " + host + ":" + std::to_string(port));
    }
    const int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    return TcpConnection(fd);
}

std::optional<std::size_t> TcpConnection::read_some(std::span<char> buffer,
                                                    const Interrupt* interrupt) {
    if (fd_ < 0) {
        throw IoError("read on a closed connection");
    }
    if (interrupt != nullptr && !wait_readable(fd_, interrupt)) {
        return std::nullopt;
    }
    for (;;) {
        const ssize_t n = ::recv(fd_, buffer.data(), buffer.size(), 0);
        if (n >= 0) {
            return static_cast<std::size_t>(n);
        }
        if (errno == EINTR) {
            continue;
        }
        throw_errno("recv failed");
    }
}

void TcpConnection::write_all(std::span<const char> data) {
    if (fd_ < 0) {
        throw IoError("write on a closed connection");
    }
    std::size_t sent = 0;
    while (sent < data.size()) {
        const ssize_t n = ::send(fd_, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) {
                continue;
            }
            throw_errno("send failed");
        }
        sent += static_cast<std::size_t>(n);
    }
}

void TcpConnection::set_recv_timeout(std::chrono::milliseconds timeout) {
    timeval tv{};
    tv.tv_sec = static_cast<time_t>(timeout.count() / 1000);
    tv.tv_usec = static_cast<suseconds_t>((timeout.count() % 1000) * 1000);
    if (::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv)) != 0) {
        throw_errno("cannot set receive timeout");
    }
}

void TcpConnection::shutdown_both() noexcept {
    if (fd_ >= 0) {
        ::shutdown(fd_, SHUT_RDWR);
    }
}

void TcpConnection::close() noexcept {
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

TcpListener::~TcpListener() {
    close();
}

TcpListener::TcpListener(TcpListener&& other) noexcept : fd_(other.fd_), port_(other.port_) {
    other.fd_ = -1;
    other.port_ = 0;
}

TcpListener& TcpListener::operator=(TcpListener&& other) noexcept {
    if (this != &other) {
        close();
        fd_ = other.fd_;
        port_ = other.port_;
        other.fd_ = -1;
        other.port_ = 0;
    }
    return *this;
}

TcpListener TcpListener::bind(const std::string& host, std::uint16_t port) {
    const ResolvedAddress address = resolve(host, port);
    const int fd = ::socket(address.family, SOCK_STREAM, 0);
    if (fd < 0) {
        throw_errno("cannot create listening socket");
    }
    const int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    if (::bind(fd, reinterpret_cast<const sockaddr*>(&address.storage), address.length) != 0) {
        const int saved = errno;
        ::close(fd);
        errno = saved;
        throw_errno("cannot bind " + host + ":" + std::to_string(port));
    }
    if (::listen(fd, 16) != 0) {
        const int saved = errno;
        ::close(fd);
        errno = saved;
        throw_errno("cannot listen on " + host + ":" + std::to_string(port));
    }
    sockaddr_storage bound{};
    socklen_t length = sizeof(bound);
    if (::getsockname(fd, reinterpret_cast<sockaddr*>(&bound), &length) != 0) {
        const int saved = errno;
        ::close(fd);
        errno = saved;
        throw_errno("cannot read the bound address");
    }
    TcpListener listener;
    listener.fd_ = fd;
    if (bound.ss_family == AF_INET) {
        listener.port_ = ntohs(reinterpret_cast<const sockaddr_in*>(&bound)->sin_port);
    } else {
        listener.port_ = ntohs(reinterpret_cast<const sockaddr_in6*>(&bound)->sin6_port);
    }
    return listener;
}

std::optional<TcpConnection> TcpListener::accept(const Interrupt* interrupt) {
    if (fd_ < 0) {
        throw IoError("accept on a closed listener");
    }
    if (!wait_readable(fd_, interrupt)) {
        return std::nullopt;
    }
    for (;;) {
        const int fd = ::accept(fd_, nullptr, nullptr);
        if (fd >= 0) {
            const int one = 1;
            ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
            return TcpConnection(fd);
        }
        if (errno == EINTR) {
            continue;
        }
        throw_errno("accept failed");
    }
}

void TcpListener::close() noexcept {
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

}  // namespace jexplore
