#include "feedtune/wire.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <stdexcept>

#include <json.hpp>

#include "feedtune/errors.hpp"

namespace feedtune {

namespace {

using nlohmann::json;

constexpr std::size_t kMaxFrame = 1u << 26; // 64 MiB

void write_all(int fd, const char* buf, std::size_t n) {
    while (n > 0) {
        const ssize_t rv = ::write(fd, buf, n);
        if (rv <= 0) {
            if (rv < 0 && errno == EINTR) continue;
            throw protocol_error("wire: write failed");
        }
        buf += rv;
        n -= static_cast<std::size_t>(rv);
    }
}

bool read_full(int fd, char* buf, std::size_t n) {
    while (n > 0) {
        const ssize_t rv = ::read(fd, buf, n);
        if (rv == 0) return false; // peer closed
        if (rv < 0) {
            if (errno == EINTR) continue;
            throw protocol_error("wire: read failed");
        }
        buf += rv;
        n -= static_cast<std::size_t>(rv);
    }
    return true;
}

void write_frame(int fd, const std::string& payload) {
    if (payload.size() > kMaxFrame) throw protocol_error("wire: frame too large");
    unsigned char hdr[4];
    const std::uint32_t len = static_cast<std::uint32_t>(payload.size());
    hdr[0] = static_cast<unsigned char>(len >> 24);
    hdr[1] = static_cast<unsigned char>(len >> 16);
    hdr[2] = static_cast<unsigned char>(len >> 8);
    hdr[3] = static_cast<unsigned char>(len);
    write_all(fd, reinterpret_cast<const char*>(hdr), 4);
    write_all(fd, payload.data(), payload.size());
}

/// Returns false on clean EOF before a frame starts.
bool read_frame(int fd, std::string& out) {
    unsigned char hdr[4];
    if (!read_full(fd, reinterpret_cast<char*>(hdr), 4)) return false;
    const std::uint32_t len = (static_cast<std::uint32_t>(hdr[0]) << 24) |
                              (static_cast<std::uint32_t>(hdr[1]) << 16) |
                              (static_cast<std::uint32_t>(hdr[2]) << 8) |
                              static_cast<std::uint32_t>(hdr[3]);
    if (len > kMaxFrame) throw protocol_error("wire: oversized frame");
    out.resize(len);
    if (!read_full(fd, out.data(), len)) throw protocol_error("wire: truncated frame");
    return true;
}

json error_msg(const std::string& code) {
    return json{{"type", "error"}, {"code", code}};
}

int make_listener(const std::string& host, std::uint16_t port, std::uint16_t& bound_port) {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw protocol_error("wire: socket() failed");
    const int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        ::close(fd);
        throw protocol_error("wire: bad bind address " + host);
    }
    if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 || ::listen(fd, 1) < 0) {
        ::close(fd);
        throw protocol_error("wire: bind/listen on " + host + ":" + std::to_string(port) +
                             " failed");
    }
    sockaddr_in actual{};
    socklen_t len = sizeof actual;
    ::getsockname(fd, reinterpret_cast<sockaddr*>(&actual), &len);
    bound_port = ntohs(actual.sin_port);
    return fd;
}

ParameterVector theta_from(const json& msg) {
    const auto& arr = msg.at("theta");
    if (!arr.is_array()) throw protocol_error("wire: theta must be an array");
    std::vector<double> values;
    values.reserve(arr.size());
    for (const auto& v : arr) {
        if (!v.is_number()) throw protocol_error("wire: theta entries must be numbers");
        values.push_back(v.get<double>());
    }
    return ParameterVector(std::move(values));
}

} // namespace

OracleServer::OracleServer(FeedbackOracle& oracle, const std::string& bind_host,
                           std::uint16_t port)
    : oracle_(oracle) {
    listen_fd_ = make_listener(bind_host, port, port_);
}

OracleServer::~OracleServer() {
    if (listen_fd_ >= 0) ::close(listen_fd_);
}

void OracleServer::run() {
    for (;;) {
        const int client = ::accept(listen_fd_, nullptr, nullptr);
        if (client < 0) {
            if (errno == EINTR) continue;
            throw protocol_error("wire: accept failed");
        }
        const bool reported = serve_session(client);
        ::close(client);
        if (reported) return;
    }
}

bool OracleServer::serve_session(int fd) {
    std::string buf;

    // Session opens with a version handshake.
    if (!read_frame(fd, buf)) return false;
    json hello = json::parse(buf, nullptr, false);
    if (hello.is_discarded() || hello.value("type", "") != "hello" ||
        hello.value("version", -1) != kWireVersion) {
        write_frame(fd, error_msg("version_mismatch").dump());
        return false;
    }
    write_frame(fd, json{{"type", "hello"},
                         {"version", kWireVersion},
                         {"remaining", oracle_.remaining()},
                         {"arity", oracle_.arity()}}
                        .dump());

    while (read_frame(fd, buf)) {
        json msg = json::parse(buf, nullptr, false);
        if (msg.is_discarded() || !msg.is_object() || !msg.contains("type")) {
            write_frame(fd, error_msg("bad_message").dump());
            return false;
        }
        const std::string type = msg.value("type", "");
        try {
            if (type == "query") {
                const ParameterVector theta = theta_from(msg);
                const ScoreTuple scores = oracle_.submit(theta);
                write_frame(fd, json{{"type", "feedback"},
                                     {"id", msg.value("id", 0ULL)},
                                     {"scores", scores},
                                     {"remaining", oracle_.remaining()}}
                                    .dump());
            } else if (type == "final_report") {
                const ParameterVector theta = theta_from(msg);
                oracle_.finish();
                const auto [support, holdout] = oracle_.final_report(theta);
                write_frame(fd, json{{"type", "report"},
                                     {"support", support},
                                     {"holdout", holdout}}
                                    .dump());
                return true;
            } else {
                write_frame(fd, error_msg("bad_message").dump());
                return false;
            }
        } catch (const budget_exhausted_error&) {
            write_frame(fd, error_msg("budget_exhausted").dump());
        } catch (const dimension_mismatch_error&) {
            write_frame(fd, error_msg("dim_mismatch").dump());
        } catch (const protocol_error&) {
            write_frame(fd, error_msg("bad_message").dump());
            return false;
        } catch (const std::logic_error&) {
            write_frame(fd, error_msg("report_unavailable").dump());
        }
    }
    return false;
}

RemoteChannel::RemoteChannel(const std::string& host, std::uint16_t port) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) throw protocol_error("wire: socket() failed");
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        ::close(fd_);
        fd_ = -1;
        throw protocol_error("wire: bad host " + host);
    }
    if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) {
        ::close(fd_);
        fd_ = -1;
        throw protocol_error("wire: connect to " + host + ":" + std::to_string(port) + " failed");
    }
    const int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);

    const std::string reply =
        request(json{{"type", "hello"}, {"version", kWireVersion}}.dump());
    json hello = json::parse(reply, nullptr, false);
    if (hello.is_discarded() || hello.value("type", "") != "hello" ||
        hello.value("version", -1) != kWireVersion) {
        throw protocol_error("wire: handshake failed");
    }
    remaining_ = hello.value("remaining", 0ULL);
    arity_ = hello.value("arity", 1ULL);
}

RemoteChannel::~RemoteChannel() {
    if (fd_ >= 0) ::close(fd_);
}

std::string RemoteChannel::request(const std::string& payload) {
    write_frame(fd_, payload);
    bytes_sent_ += payload.size() + 4;
    std::string reply;
    if (!read_frame(fd_, reply)) throw protocol_error("wire: holder closed the connection");
    bytes_received_ += reply.size() + 4;
    if (rx_tap_) rx_tap_(reply);
    return reply;
}

ScoreTuple RemoteChannel::submit(const ParameterVector& candidate) {
    const std::string reply = request(json{{"type", "query"},
                                           {"id", next_id_++},
                                           {"theta", candidate.values()}}
                                          .dump());
    json msg = json::parse(reply, nullptr, false);
    if (msg.is_discarded()) throw protocol_error("wire: unparsable reply");
    const std::string type = msg.value("type", "");
    if (type == "error") {
        const std::string code = msg.value("code", "");
        if (code == "budget_exhausted") throw budget_exhausted_error();
        if (code == "dim_mismatch") throw dimension_mismatch_error("wire: dim_mismatch");
        throw protocol_error("wire: holder error " + code);
    }
    if (type != "feedback") throw protocol_error("wire: unexpected reply type " + type);
    remaining_ = msg.value("remaining", 0ULL);
    return msg.at("scores").get<ScoreTuple>();
}

std::pair<ScoreTuple, ScoreTuple> RemoteChannel::final_report(const ParameterVector& candidate) {
    const std::string reply =
        request(json{{"type", "final_report"}, {"theta", candidate.values()}}.dump());
    json msg = json::parse(reply, nullptr, false);
    if (msg.is_discarded()) throw protocol_error("wire: unparsable report");
    if (msg.value("type", "") != "report") {
        throw protocol_error("wire: expected report, got " + msg.value("type", std::string()));
    }
    return {msg.at("support").get<ScoreTuple>(), msg.at("holdout").get<ScoreTuple>()};
}

} // namespace feedtune
