#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>

#include "feedtune/channel.hpp"
#include "feedtune/oracle.hpp"

namespace feedtune {

inline constexpr int kWireVersion = 1;

/// Holder-side TCP server. Messages are one JSON object per frame with a
/// 4-byte big-endian length prefix:
///   -> {"type":"hello","version":1}
///   <- {"type":"hello","version":1,"remaining":Q,"arity":k}
///   -> {"type":"query","id":n,"theta":[...]}
///   <- {"type":"feedback","id":n,"scores":[...],"remaining":m}
///   <- {"type":"error","code":"dim_mismatch"|"budget_exhausted"|...}
///   -> {"type":"final_report","theta":[...]}
///   <- {"type":"report","support":[...],"holdout":[...]}
/// The holder never sends features, labels, gradients, or split sizes.
class OracleServer {
public:
    /// Binds and listens; port 0 picks an ephemeral port.
    OracleServer(FeedbackOracle& oracle, const std::string& bind_host, std::uint16_t port);
    ~OracleServer();

    OracleServer(const OracleServer&) = delete;
    OracleServer& operator=(const OracleServer&) = delete;

    std::uint16_t port() const { return port_; }

    /// Serves one provider connection at a time; returns after a session in
    /// which the provider collected its final report.
    void run();

private:
    bool serve_session(int client_fd);

    FeedbackOracle& oracle_;
    int listen_fd_ = -1;
    std::uint16_t port_ = 0;
};

/// Provider-side channel over the wire; satisfies the same submit contract
/// as the in-process oracle.
class RemoteChannel final : public FeedbackChannel {
public:
    RemoteChannel(const std::string& host, std::uint16_t port);
    ~RemoteChannel();

    RemoteChannel(const RemoteChannel&) = delete;
    RemoteChannel& operator=(const RemoteChannel&) = delete;

    std::size_t remaining() const override { return remaining_; }
    std::size_t arity() const override { return arity_; }
    ScoreTuple submit(const ParameterVector& candidate) override;

    std::pair<ScoreTuple, ScoreTuple> final_report(const ParameterVector& candidate);

    /// Observes every raw holder-to-provider frame; used by the firewall
    /// tests to assert nothing but scores ever crosses.
    void set_rx_tap(std::function<void(const std::string&)> tap) { rx_tap_ = std::move(tap); }

    std::uint64_t bytes_sent() const { return bytes_sent_; }
    std::uint64_t bytes_received() const { return bytes_received_; }

private:
    std::string request(const std::string& payload);

    int fd_ = -1;
    std::size_t remaining_ = 0;
    std::size_t arity_ = 1;
    std::uint64_t next_id_ = 0;
    std::uint64_t bytes_sent_ = 0;
    std::uint64_t bytes_received_ = 0;
    std::function<void(const std::string&)> rx_tap_;
};

} // namespace feedtune
