// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "pwe/service.hpp"
#include "test_support.hpp"

using namespace pwe;
using namespace pwe::test;
using json = nlohmann::json;

namespace {

struct Fixture {
    PweGraph graph;
    ChannelParams params;
    Fixture() {
        Room room(4, 4, 3, 2.0);
        graph = build_graph(room.plan, room.placements,
                            {make_user("tx", {1, 1, 1.2}), make_user("rx", {3, 3, 1.2})},
                            default_codebooks(), 60e9);
        params.include_los = true;
    }
};

// Blocking client: sends the payload, reads n response lines.
std::vector<std::string> talk(int port, const std::vector<std::string>& lines) {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    REQUIRE(fd >= 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<uint16_t>(port));
    ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
    REQUIRE(::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0);
    std::string payload;
    for (const auto& l : lines) payload += l + "\n";
    REQUIRE(::write(fd, payload.data(), payload.size()) ==
            static_cast<ssize_t>(payload.size()));
    std::vector<std::string> out;
    std::string buffer;
    char chunk[4096];
    while (out.size() < lines.size()) {
        const ssize_t n = ::read(fd, chunk, sizeof(chunk));
        if (n <= 0) break;
        buffer.append(chunk, static_cast<std::size_t>(n));
        std::size_t pos;
        while ((pos = buffer.find('\n')) != std::string::npos) {
            out.push_back(buffer.substr(0, pos));
            buffer.erase(0, pos + 1);
        }
    }
    ::close(fd);
    return out;
}

}  // namespace

TEST_CASE("request handling delegates to the channel model") {
    Fixture f;
    const std::string resp =
        handle_pdp_request(f.graph, Configuration{}, f.params, R"({"tx_id":"tx","rx_id":"rx"})");
    const json r = json::parse(resp);
    CHECK(r["status"] == "ok");
    const auto pdp = compute_pdp(f.graph, Configuration{}, "tx", "rx", f.params);
    REQUIRE(r["entries"].size() == pdp.size());
    for (std::size_t i = 0; i < pdp.size(); ++i) {
        CHECK(r["entries"][i]["power_dbm"].get<double>() ==
              doctest::Approx(watts_to_dbm(pdp.entries[i].power_w)));
        CHECK(r["entries"][i]["delay_ns"].get<double>() ==
              doctest::Approx(pdp.entries[i].delay_s * 1e9));
    }
    // entries ascend by delay
    for (std::size_t i = 1; i < r["entries"].size(); ++i)
        CHECK(r["entries"][i]["delay_ns"].get<double>() >=
              r["entries"][i - 1]["delay_ns"].get<double>());
}

TEST_CASE("unknown users and malformed requests answer with status") {
    Fixture f;
    json r = json::parse(
        handle_pdp_request(f.graph, {}, f.params, R"({"tx_id":"tx","rx_id":"ghost"})"));
    CHECK(r["status"] == "unknown_user");
    CHECK(r["entries"].empty());
    r = json::parse(handle_pdp_request(f.graph, {}, f.params, "{broken"));
    CHECK(r["status"] == "invalid_config");
    r = json::parse(handle_pdp_request(f.graph, {}, f.params, R"({"rx_id":"rx"})"));
    CHECK(r["status"] == "invalid_config");
    r = json::parse(handle_pdp_request(f.graph, {}, f.params,
                                       R"({"tx_id":"tx","rx_id":"rx","overrides":{"t":"x"}})"));
    CHECK(r["status"] == "invalid_config");
}

TEST_CASE("rx position overrides apply per request without shared state") {
    Fixture f;
    const std::string moved = handle_pdp_request(
        f.graph, {}, f.params,
        R"({"tx_id":"tx","rx_id":"rx","rx_position":[2.0,2.0,1.0]})");
    CHECK(json::parse(moved)["status"] == "ok");
    // the snapshot graph is untouched: a plain request still matches the library
    const std::string plain =
        handle_pdp_request(f.graph, {}, f.params, R"({"tx_id":"tx","rx_id":"rx"})");
    const auto pdp = compute_pdp(f.graph, Configuration{}, "tx", "rx", f.params);
    CHECK(json::parse(plain)["entries"].size() == pdp.size());
}

TEST_CASE("steer overrides change the profile") {
    Fixture f;
    // configure one tile to steer tx->rx explicitly
    const int ti = 0;
    const LinkIndex in = f.graph.user_link_of(ti, f.graph.user_index("tx"));
    const LinkIndex out = f.graph.user_link_of(ti, f.graph.user_index("rx"));
    if (in >= 0 && out >= 0) {
        const std::string desc = "steer:" + f.graph.link_name(in) + ">" +
                                 f.graph.link_name(out);
        json req{{"tx_id", "tx"}, {"rx_id", "rx"}, {"overrides", {{f.graph.tile(ti).id, desc}}}};
        const json r = json::parse(handle_pdp_request(f.graph, {}, f.params, req.dump()));
        CHECK(r["status"] == "ok");
    }
}

TEST_CASE("stdio pipe mode answers line by line in order") {
    Fixture f;
    std::istringstream in(R"({"tx_id":"tx","rx_id":"rx"}
{"tx_id":"tx","rx_id":"ghost"}
)");
    std::ostringstream out;
    serve_pdp_stdio(f.graph, {}, f.params, in, out);
    std::istringstream res(out.str());
    std::string l1, l2;
    std::getline(res, l1);
    std::getline(res, l2);
    CHECK(json::parse(l1)["status"] == "ok");
    CHECK(json::parse(l2)["status"] == "unknown_user");
}

TEST_CASE("tcp service: order preserved, errors keep the connection open") {
    Fixture f;
    std::atomic<bool> stop{false};
    std::atomic<int> port{0};
    std::thread server([&]() {
        serve_pdp(f.graph, Configuration{}, f.params, "127.0.0.1", 0, stop, &port);
    });
    while (port.load() == 0) std::this_thread::sleep_for(std::chrono::milliseconds(5));

    const auto replies = talk(port.load(), {R"({"tx_id":"tx","rx_id":"rx"})", "{bad",
                                            R"({"tx_id":"tx","rx_id":"rx"})"});
    REQUIRE(replies.size() == 3);
    CHECK(json::parse(replies[0])["status"] == "ok");
    CHECK(json::parse(replies[1])["status"] == "invalid_config");
    CHECK(json::parse(replies[2])["status"] == "ok");
    CHECK(replies[0] == replies[2]);  // pure function of (snapshot, request)

    // a burst of concurrent identical requests returns identical bytes
    std::vector<std::thread> clients;
    std::vector<std::string> results(24);
    for (int i = 0; i < 24; ++i)
        clients.emplace_back([&, i]() {
            const auto r = talk(port.load(), {R"({"tx_id":"tx","rx_id":"rx"})"});
            if (!r.empty()) results[i] = r[0];
        });
    for (auto& c : clients) c.join();
    for (const auto& r : results) CHECK(r == replies[0]);

    stop = true;
    server.join();
}
