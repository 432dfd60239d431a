#include <doctest.h>

#include <arpa/inet.h>
#include <sys/socket.h>
#include <unistd.h>

#include <thread>

#include <json.hpp>

#include "feedtune/datasets.hpp"
#include "feedtune/oracle.hpp"
#include "feedtune/pps.hpp"
#include "feedtune/wire.hpp"

using namespace feedtune;

namespace {

// Minimal independent client speaking the documented frame format: 4-byte
// big-endian length prefix, one JSON object per frame.
struct RawClient {
    int fd = -1;

    explicit RawClient(std::uint16_t port) {
        fd = ::socket(AF_INET, SOCK_STREAM, 0);
        REQUIRE(fd >= 0);
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_port = htons(port);
        ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
        REQUIRE(::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
    }
    ~RawClient() {
        if (fd >= 0) ::close(fd);
    }

    void send(const std::string& payload) {
        unsigned char hdr[4] = {static_cast<unsigned char>(payload.size() >> 24),
                                static_cast<unsigned char>(payload.size() >> 16),
                                static_cast<unsigned char>(payload.size() >> 8),
                                static_cast<unsigned char>(payload.size())};
        REQUIRE(::write(fd, hdr, 4) == 4);
        REQUIRE(::write(fd, payload.data(), payload.size()) ==
                static_cast<ssize_t>(payload.size()));
    }

    std::string recv_frame() {
        unsigned char hdr[4];
        std::size_t got = 0;
        while (got < 4) {
            const ssize_t rv = ::read(fd, hdr + got, 4 - got);
            REQUIRE(rv > 0);
            got += static_cast<std::size_t>(rv);
        }
        const std::size_t len = (std::size_t(hdr[0]) << 24) | (std::size_t(hdr[1]) << 16) |
                                (std::size_t(hdr[2]) << 8) | std::size_t(hdr[3]);
        std::string out(len, '\0');
        got = 0;
        while (got < len) {
            const ssize_t rv = ::read(fd, out.data() + got, len - got);
            REQUIRE(rv > 0);
            got += static_cast<std::size_t>(rv);
        }
        return out;
    }

    bool closed_by_peer() {
        char byte;
        return ::read(fd, &byte, 1) == 0;
    }
};

struct WireFixture {
    MlpModel model = make_mlp(2, {6}, 1, false, SeededRng(8));
    TunableSelection selection = TunableSelection::last_layer_weights(model);
    LabeledDataset support, holdout;

    WireFixture() {
        TwoGaussiansSpec spec;
        spec.per_class = 40;
        spec.seed = 2;
        auto [sup, hol] = split_dataset(gen_two_gaussians(spec), 0.5, 7);
        support = std::move(sup);
        holdout = std::move(hol);
    }

    FeedbackOracle make(std::size_t budget, int decimals = -1) {
        return FeedbackOracle(model, selection, support, holdout, MetricSpec::accuracy(), budget,
                              decimals);
    }
};

} // namespace

TEST_CASE("remote channel mirrors the in-process oracle") {
    WireFixture fx;
    const ParameterVector theta0 = pack_parameters(fx.model, fx.selection).theta;

    FeedbackOracle local = fx.make(60);
    PpsConfig cfg;
    cfg.sigma = 0.3;
    cfg.learning_rate = 0.2;
    cfg.seed = 14;
    const OptimResult ref = pps_run(theta0, local, cfg);
    local.finish();
    const auto ref_report = local.final_report(ref.best);

    FeedbackOracle served = fx.make(60);
    OracleServer server(served, "127.0.0.1", 0);
    std::thread holder([&server] { server.run(); });
    {
        RemoteChannel channel("127.0.0.1", server.port());
        CHECK(channel.remaining() == 60);
        CHECK(channel.arity() == 1);
        const OptimResult remote = pps_run(theta0, channel, cfg);
        CHECK(remote.best == ref.best);
        CHECK(remote.trace.final_iterate == ref.trace.final_iterate);
        CHECK(remote.trace.raw_best_at_query == ref.trace.raw_best_at_query);

        const auto [sup, hol] = channel.final_report(remote.best);
        CHECK(sup == ref_report.first);
        CHECK(hol == ref_report.second);

        // Provider-side traffic is dominated by Q * |theta| doubles.
        CHECK(channel.bytes_sent() > 60 * theta0.size() * 8);
    }
    holder.join();
}

TEST_CASE("dimension mismatch is refused without charging") {
    WireFixture fx;
    FeedbackOracle served = fx.make(5);
    OracleServer server(served, "127.0.0.1", 0);
    std::thread holder([&server] { server.run(); });
    {
        RemoteChannel channel("127.0.0.1", server.port());
        CHECK_THROWS_AS(channel.submit(ParameterVector::zeros(2)), dimension_mismatch_error);
        // Not charged: a full-dimension probe still sees 5 -> 4.
        const ParameterVector theta0 = pack_parameters(fx.model, fx.selection).theta;
        (void)channel.submit(theta0);
        CHECK(channel.remaining() == 4);
        (void)channel.final_report(theta0);
    }
    holder.join();
    CHECK(served.audit_log().size() == 1);
}

TEST_CASE("budget exhaustion travels as a typed message") {
    WireFixture fx;
    FeedbackOracle served = fx.make(2);
    OracleServer server(served, "127.0.0.1", 0);
    std::thread holder([&server] { server.run(); });
    {
        RemoteChannel channel("127.0.0.1", server.port());
        const ParameterVector theta0 = pack_parameters(fx.model, fx.selection).theta;
        (void)channel.submit(theta0);
        (void)channel.submit(theta0);
        CHECK_THROWS_AS(channel.submit(theta0), budget_exhausted_error);
        (void)channel.final_report(theta0);
    }
    holder.join();
}

TEST_CASE("holder replies carry only scores, budget, and framing") {
    WireFixture fx;
    FeedbackOracle served = fx.make(10, 2);
    OracleServer server(served, "127.0.0.1", 0);
    std::thread holder([&server] { server.run(); });
    {
        RemoteChannel channel("127.0.0.1", server.port());
        std::vector<std::string> frames;
        channel.set_rx_tap([&frames](const std::string& f) { frames.push_back(f); });
        const ParameterVector theta0 = pack_parameters(fx.model, fx.selection).theta;
        for (int i = 0; i < 10; ++i) (void)channel.submit(theta0);
        (void)channel.final_report(theta0);

        REQUIRE(!frames.empty());
        for (const auto& frame : frames) {
            const auto msg = nlohmann::json::parse(frame);
            const std::string type = msg.at("type").get<std::string>();
            CHECK((type == "feedback" || type == "report" || type == "error"));
            CHECK(!msg.contains("features"));
            CHECK(!msg.contains("labels"));
            if (type == "feedback") {
                // scores arrive at the holder's configured precision
                for (double s : msg.at("scores").get<std::vector<double>>()) {
                    CHECK(s == quantize_feedback(s, 2));
                }
            }
        }
    }
    holder.join();
}

TEST_CASE("wire format is enforced frame by frame") {
    WireFixture fx;
    FeedbackOracle served = fx.make(4);
    OracleServer server(served, "127.0.0.1", 0);
    std::thread holder([&server] { server.run(); });

    {
        RawClient bad_version(server.port());
        bad_version.send(R"({"type":"hello","version":99})");
        const auto reply = nlohmann::json::parse(bad_version.recv_frame());
        CHECK(reply.at("code") == "version_mismatch");
        CHECK(bad_version.closed_by_peer());
    }
    {
        RawClient garbled(server.port());
        garbled.send(R"({"type":"hello","version":1})");
        (void)garbled.recv_frame(); // hello ack
        garbled.send("this is not json");
        const auto reply = nlohmann::json::parse(garbled.recv_frame());
        CHECK(reply.at("type") == "error");
        CHECK(reply.at("code") == "bad_message");
        CHECK(garbled.closed_by_peer()); // malformed input ends the session
    }
    {
        // A well-formed session still works after the bad ones, and replies
        // carry the exact documented fields.
        RawClient good(server.port());
        good.send(R"({"type":"hello","version":1})");
        const auto hello = nlohmann::json::parse(good.recv_frame());
        CHECK(hello.at("type") == "hello");
        CHECK(hello.at("remaining") == 4);

        nlohmann::json query{{"type", "query"}, {"id", 7}, {"theta", std::vector<double>(6, 0.0)}};
        good.send(query.dump());
        const auto feedback = nlohmann::json::parse(good.recv_frame());
        CHECK(feedback.at("type") == "feedback");
        CHECK(feedback.at("id") == 7);
        CHECK(feedback.at("remaining") == 3);
        REQUIRE(feedback.at("scores").is_array());

        nlohmann::json report{{"type", "final_report"}, {"theta", std::vector<double>(6, 0.0)}};
        good.send(report.dump());
        const auto rep = nlohmann::json::parse(good.recv_frame());
        CHECK(rep.at("type") == "report");
    }
    holder.join();
}

TEST_CASE("server survives a client that disconnects before reporting") {
    WireFixture fx;
    FeedbackOracle served = fx.make(6);
    OracleServer server(served, "127.0.0.1", 0);
    std::thread holder([&server] { server.run(); });
    const ParameterVector theta0 = pack_parameters(fx.model, fx.selection).theta;
    {
        RemoteChannel first("127.0.0.1", server.port());
        (void)first.submit(theta0);
        // dropped without final_report
    }
    {
        RemoteChannel second("127.0.0.1", server.port());
        CHECK(second.remaining() == 5); // budget persisted across sessions
        (void)second.submit(theta0);
        (void)second.final_report(theta0);
    }
    holder.join();
}
