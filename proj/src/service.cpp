// SPDX-License-Identifier: Apache-2.0
#include "pwe/service.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>
#include <istream>
#include <ostream>
#include <thread>
#include <vector>

#include <json.hpp>

#include "pwe/errors.hpp"
#include "pwe/pathfind.hpp"

namespace pwe {

using json = nlohmann::ordered_json;

namespace {

// "steer:<a~b>><c~d>" resolved against live link names, or "absorb".
bool apply_override(const PweGraph& g, Configuration& cfg, const std::string& tile_id,
                    const std::string& descriptor) {
    const int ti = g.tile_index(tile_id);
    if (ti < 0) return false;
    const TileNode& tile = g.tile(ti);
    if (descriptor == "clear") {
        cfg.assignment.erase(tile_id);
        return true;
    }
    if (!tile.codebook) return false;
    if (descriptor == "absorb") {
        cfg.assignment[tile_id] = merge({tile.codebook->make_absorb()});
        return true;
    }
    const std::string prefix = "steer:";
    if (descriptor.rfind(prefix, 0) != 0) return false;
    const auto gt = descriptor.find('>', prefix.size());
    if (gt == std::string::npos) return false;
    const std::string in_name = descriptor.substr(prefix.size(), gt - prefix.size());
    const std::string out_name = descriptor.substr(gt + 1);
    LinkIndex in = -1, out = -1;
    for (LinkIndex li : tile.links) {
        const std::string name = g.link_name(li);
        if (name == in_name) in = li;
        if (name == out_name) out = li;
    }
    if (in < 0 || out < 0 || in == out) return false;
    std::vector<EmFunction> parts{make_tile_steer(g, ti, in, out)};
    if (const MergedFunction* existing = cfg.find(tile_id))
        for (const auto& c : existing->constituents)
            if (c.id != parts.front().id) parts.push_back(c);
    cfg.assignment[tile_id] = merge(parts);
    return true;
}

json error_response(const std::string& status, const std::string& detail) {
    json r;
    r["status"] = status;
    if (!detail.empty()) r["detail"] = detail;
    r["entries"] = json::array();
    return r;
}

}  // namespace

std::string handle_pdp_request(const PweGraph& graph, const Configuration& base_config,
                               const ChannelParams& params, const std::string& request_line) {
    json req;
    try {
        req = json::parse(request_line);
    } catch (const std::exception&) {
        return error_response("invalid_config", "request is not valid JSON").dump();
    }
    if (!req.contains("tx_id") || !req.contains("rx_id"))
        return error_response("invalid_config", "tx_id and rx_id are required").dump();
    const std::string tx = req["tx_id"].get<std::string>();
    const std::string rx = req["rx_id"].get<std::string>();

    const PweGraph* g = &graph;
    PweGraph moved;
    if (req.contains("rx_position")) {
        const auto& p = req["rx_position"];
        if (!p.is_array() || p.size() != 3)
            return error_response("invalid_config", "rx_position must be [x,y,z]").dump();
        if (graph.user_index(rx) < 0)
            return error_response("unknown_user", "no user '" + rx + "'").dump();
        moved = graph.with_user_position(
            rx, {p[0].get<double>(), p[1].get<double>(), p[2].get<double>()});
        g = &moved;
    }

    if (g->user_index(tx) < 0) return error_response("unknown_user", "no user '" + tx + "'").dump();
    if (g->user_index(rx) < 0) return error_response("unknown_user", "no user '" + rx + "'").dump();

    Configuration cfg = base_config;
    if (req.contains("overrides")) {
        if (!req["overrides"].is_object())
            return error_response("invalid_config", "overrides must be an object").dump();
        for (const auto& [tile, fn] : req["overrides"].items()) {
            if (!fn.is_string() ||
                !apply_override(*g, cfg, tile, fn.get<std::string>()))
                return error_response("invalid_config",
                                      "bad override for tile '" + tile + "'")
                    .dump();
        }
    }

    PowerDelayProfile pdp;
    try {
        pdp = compute_pdp(*g, cfg, tx, rx, params);
    } catch (const UnknownUser& e) {
        return error_response("unknown_user", e.what()).dump();
    } catch (const Error& e) {
        return error_response("invalid_config", e.what()).dump();
    }

    json resp;
    resp["status"] = "ok";
    resp["entries"] = json::array();
    for (const auto& e : pdp.entries) {  // compute_pdp sorts by ascending delay
        json je;
        je["power_dbm"] = watts_to_dbm(e.power_w);
        je["delay_ns"] = e.delay_s * 1e9;
        je["arrival"] = json::array({e.arrival.x, e.arrival.y, e.arrival.z});
        resp["entries"].push_back(je);
    }
    return resp.dump();
}

void serve_pdp_stdio(const PweGraph& graph, const Configuration& config,
                     const ChannelParams& params, std::istream& in, std::ostream& out) {
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        out << handle_pdp_request(graph, config, params, line) << "\n";
        out.flush();
    }
}

int serve_pdp(const PweGraph& graph, const Configuration& config, const ChannelParams& params,
              const std::string& host, int port, std::atomic<bool>& stop,
              std::atomic<int>* bound_port) {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw Error("socket() failed");
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<uint16_t>(port));
    if (host.empty() || host == "0.0.0.0") {
        addr.sin_addr.s_addr = INADDR_ANY;
    } else if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        ::close(fd);
        throw Error("cannot parse bind address '" + host + "'");
    }
    if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) {
        ::close(fd);
        throw Error("bind() failed on " + host + ":" + std::to_string(port));
    }
    socklen_t len = sizeof(addr);
    ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
    const int actual_port = ntohs(addr.sin_port);
    if (bound_port) *bound_port = actual_port;
    if (::listen(fd, 128) < 0) {
        ::close(fd);
        throw Error("listen() failed");
    }

    std::vector<std::thread> workers;
    while (!stop.load()) {
        timeval tv{0, 200000};
        fd_set rfds;
        FD_ZERO(&rfds);
        FD_SET(fd, &rfds);
        const int rc = ::select(fd + 1, &rfds, nullptr, nullptr, &tv);
        if (rc <= 0) continue;
        const int client = ::accept(fd, nullptr, nullptr);
        if (client < 0) continue;
        workers.emplace_back([&, client]() {
            std::string buffer;
            char chunk[4096];
            while (true) {
                const ssize_t n = ::read(client, chunk, sizeof(chunk));
                if (n <= 0) break;
                buffer.append(chunk, static_cast<std::size_t>(n));
                std::size_t pos;
                while ((pos = buffer.find('\n')) != std::string::npos) {
                    const std::string line = buffer.substr(0, pos);
                    buffer.erase(0, pos + 1);
                    if (line.empty()) continue;
                    const std::string resp =
                        handle_pdp_request(graph, config, params, line) + "\n";
                    std::size_t sent = 0;
                    while (sent < resp.size()) {
                        const ssize_t w =
                            ::write(client, resp.data() + sent, resp.size() - sent);
                        if (w <= 0) break;
                        sent += static_cast<std::size_t>(w);
                    }
                }
            }
            ::close(client);
        });
    }
    for (auto& w : workers)
        if (w.joinable()) w.join();
    ::close(fd);
    return actual_port;
}

}  // namespace pwe
