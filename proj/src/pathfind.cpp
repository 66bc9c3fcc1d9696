// SPDX-License-Identifier: Apache-2.0
#include "pwe/pathfind.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "pwe/errors.hpp"

namespace pwe {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTieEps = 1e-9;

Vec3 to_local(const TilePlacement& p, const Vec3& world_dir) {
    return {world_dir.dot(p.axis_u), world_dir.dot(p.axis_v), world_dir.dot(p.normal)};
}

double db_of(double linear) { return -10.0 * std::log10(linear); }

}  // namespace

EmFunction make_tile_steer(const PweGraph& graph, int tile_idx, LinkIndex in_link,
                           LinkIndex out_link) {
    const TileNode& tile = graph.tile(tile_idx);
    if (!tile.codebook)
        throw MissingCodebook("tile '" + tile.id + "' is virtual and cannot steer");
    const NodeRef self{NodeRef::Kind::Tile, tile_idx};
    const Vec3 in_dir = graph.direction_from(self, graph.link(in_link));
    const Vec3 out_dir = graph.direction_from(self, graph.link(out_link));
    const std::string id =
        "steer:" + graph.link_name(in_link) + ">" + graph.link_name(out_link);
    return tile.codebook->make_steer(id, in_link, out_link, to_local(tile.placement, in_dir),
                                     to_local(tile.placement, out_dir),
                                     tile.placement.side_length);
}

void commit_path_steers(const PweGraph& graph, const std::vector<LinkIndex>& path_links,
                        Configuration& config) {
    for (std::size_t i = 0; i + 1 < path_links.size(); ++i) {
        const Link& a = graph.link(path_links[i]);
        const Link& b = graph.link(path_links[i + 1]);
        int tile_idx = -1;
        for (const NodeRef& n : {a.a, a.b}) {
            if (n.kind != NodeRef::Kind::Tile) continue;
            if ((b.a == n) || (b.b == n)) tile_idx = n.index;
        }
        if (tile_idx < 0) throw Error("path links are not adjacent");
        const EmFunction steer =
            make_tile_steer(graph, tile_idx, path_links[i], path_links[i + 1]);
        const std::string& tid = graph.tile(tile_idx).id;
        std::vector<EmFunction> parts;
        if (const MergedFunction* existing = config.find(tid)) {
            bool already = false;
            for (const auto& c : existing->constituents) {
                if (c.id == steer.id) already = true;
                parts.push_back(c);
            }
            if (already) continue;
        }
        parts.push_back(steer);
        config.assignment[tid] = merge(parts);
    }
}

namespace {

// Costed transitions over the non-re-entrant state graph of one user pair.
// A state is an arrival (tile, in_link); every interior tile, the exit tile
// included, pays the true merged-efficiency steer penalty against the
// tentative configuration.
class PairRouter {
  public:
    PairRouter(const PweGraph& graph, const UserObjective& obj, const ChannelParams& params,
               const Configuration& tentative)
        : g_(graph), obj_(obj), params_(params), tentative_(tentative) {
        tx_ = g_.user_index(obj.tx_id);
        rx_ = g_.user_index(obj.rx_id);
        if (tx_ < 0) throw UnknownUser("no user '" + obj.tx_id + "'");
        if (rx_ < 0) throw UnknownUser("no user '" + obj.rx_id + "'");
        for (const auto& name : obj.forbidden_links) forbidden_names_.insert(name);
        if (!obj.eavesdropper_id.empty()) {
            for (const auto& tid : first_contact_tiles(g_, obj.eavesdropper_id))
                eaves_tiles_.insert(g_.tile_index(tid));
        }
    }

    bool link_allowed(LinkIndex li) const {
        const Link& l = g_.link(li);
        if (!forbidden_names_.empty() && forbidden_names_.count(g_.link_name(li))) return false;
        for (const NodeRef& n : {l.a, l.b})
            if (n.kind == NodeRef::Kind::Tile && eaves_tiles_.count(n.index)) return false;
        return true;
    }

    double entry_cost(LinkIndex li) const {
        if (!link_allowed(li)) return kInf;
        const Link& l = g_.link(li);
        const NodeRef u{NodeRef::Kind::User, tx_};
        const double mask = g_.user(tx_).antenna.efficiency(g_.direction_from(u, l));
        if (mask <= 0.0) return kInf;
        return link_loss_db(l, params_) + db_of(mask);
    }

    double through_cost(int tile_idx, LinkIndex in_link, LinkIndex out_link,
                        const Configuration& cfg) const {
        if (!link_allowed(out_link)) return kInf;
        const double eff = steer_efficiency(cfg, tile_idx, in_link, out_link);
        if (eff <= 0.0) return kInf;
        return db_of(eff) + link_loss_db(g_.link(out_link), params_);
    }

    double exit_cost(int tile_idx, LinkIndex in_link, LinkIndex user_link,
                     const Configuration& cfg) const {
        if (!link_allowed(user_link)) return kInf;
        const Link& l = g_.link(user_link);
        if (obj_.final_link_perpendicular) {
            const Vec3 traj = obj_.trajectory.normalized();
            const Vec3 eval_pos = g_.user(rx_).position + traj * obj_.perp_eval_offset_m;
            const Vec3 dir = (eval_pos - g_.tile(tile_idx).placement.center).normalized();
            if (std::abs(dir.dot(traj)) > obj_.perp_tolerance) return kInf;
        }
        const NodeRef t{NodeRef::Kind::Tile, tile_idx};
        const Vec3 dir_from_tile = g_.direction_from(t, l);
        const double mask = g_.user(rx_).antenna.efficiency(dir_from_tile * -1.0);
        if (mask <= 0.0) return kInf;
        const double eff = steer_efficiency(cfg, tile_idx, in_link, user_link);
        if (eff <= 0.0) return kInf;
        return db_of(eff) + link_loss_db(l, params_) + db_of(mask);
    }

    // Merged efficiency the new steer would keep at this tile, respecting the
    // simultaneous-function cap. Zero means infeasible.
    double steer_efficiency(const Configuration& cfg, int tile_idx, LinkIndex in_link,
                            LinkIndex out_link) const {
        const TileNode& tile = g_.tile(tile_idx);
        if (!tile.codebook) return 0.0;  // virtual tiles cannot hold a steer
        const MergedFunction* existing = cfg.find(tile.id);
        if (!existing) return tile.codebook->steer_efficiency();  // fresh tile, no merge
        const EmFunction steer = make_tile_steer(g_, tile_idx, in_link, out_link);
        std::vector<EmFunction> parts = existing->constituents;
        bool already = false;
        for (const auto& c : parts)
            if (c.id == steer.id) already = true;
        if (!already) {
            if (static_cast<int>(parts.size()) >= obj_.max_functions_per_tile) return 0.0;
            parts.push_back(steer);
        }
        return merge(parts).per_constituent_efficiency.at(steer.id);
    }

    // Full-path score against the tentative config plus this path's own
    // steers as they accumulate along it; infeasible paths score infinite.
    double path_cost(const std::vector<LinkIndex>& links) const {
        if (links.size() < 2) return kInf;
        Configuration scratch = tentative_;
        double cost = entry_cost(links.front());
        if (cost >= kInf) return kInf;
        NodeRef at = g_.other_end(g_.link(links.front()), NodeRef{NodeRef::Kind::User, tx_});
        for (std::size_t i = 0; i + 1 < links.size(); ++i) {
            if (at.kind != NodeRef::Kind::Tile) return kInf;
            const int tile = at.index;
            const bool last = (i + 2 == links.size());
            const double c = last ? exit_cost(tile, links[i], links[i + 1], scratch)
                                  : through_cost(tile, links[i], links[i + 1], scratch);
            if (c >= kInf) return kInf;
            cost += c;
            std::vector<LinkIndex> step{links[i], links[i + 1]};
            commit_path_steers(g_, step, scratch);
            at = g_.other_end(g_.link(links[i + 1]), at);
        }
        if (!(at.kind == NodeRef::Kind::User && at.index == rx_)) return kInf;
        return cost;
    }

    int tx() const { return tx_; }
    int rx() const { return rx_; }
    const PweGraph& graph() const { return g_; }
    const Configuration& tentative() const { return tentative_; }

  private:
    const PweGraph& g_;
    const UserObjective& obj_;
    const ChannelParams& params_;
    const Configuration& tentative_;
    int tx_ = -1, rx_ = -1;
    std::set<std::string> forbidden_names_;
    std::set<int> eaves_tiles_;
};

struct Ban {
    std::set<std::pair<int, LinkIndex>> next_link;  // state index (or kEntryState) -> link
    std::set<int> tiles;
};

constexpr int kEntryState = -1;

struct SpurStart {
    bool from_entry = true;
    int tile = -1;
    LinkIndex in_link = -1;
};

// Least-cost continuation from the start (the transmitter or a spur state)
// to the receiver, honoring bans. Returns the link sequence from the start.
// Arrival states are indexed 2*link + side for array addressing.
std::vector<LinkIndex> dijkstra_states(const PairRouter& r, const Ban& ban,
                                       const SpurStart& start, double* total_cost) {
    const PweGraph& g = r.graph();
    const Configuration& cfg = r.tentative();
    const int n_states = 2 * static_cast<int>(g.links().size());

    auto key_of = [&](int tile, LinkIndex in) {
        const Link& l = g.link(in);
        const int side = (l.b.kind == NodeRef::Kind::Tile && l.b.index == tile) ? 1 : 0;
        return 2 * in + side;
    };

    struct QItem {
        double dist;
        int key;
        bool operator>(const QItem& o) const {
            return dist != o.dist ? dist > o.dist : key > o.key;
        }
    };
    std::vector<double> dist(n_states, kInf);
    std::vector<int> parent(n_states, kEntryState);
    std::vector<LinkIndex> parent_link(n_states, -1);
    std::vector<char> settled(n_states, 0);
    std::priority_queue<QItem, std::vector<QItem>, std::greater<QItem>> pq;

    double best_exit = kInf;
    int best_state = kEntryState;
    LinkIndex best_exit_link = -1;

    auto tile_of = [&](int key) {
        const Link& l = g.link(key / 2);
        return (key % 2) ? l.b.index : l.a.index;
    };

    auto expand = [&](int key, int tile, LinkIndex in, double d) {
        for (LinkIndex li : g.tile(tile).links) {
            if (li == in) continue;
            if (!ban.next_link.empty() && ban.next_link.count({key, li})) continue;
            const Link& l = g.link(li);
            const NodeRef to = g.other_end(l, NodeRef{NodeRef::Kind::Tile, tile});
            if (to.kind == NodeRef::Kind::User) {
                if (to.index != r.rx()) continue;
                const double c = r.exit_cost(tile, in, li, cfg);
                if (c >= kInf) continue;
                if (d + c < best_exit) {
                    best_exit = d + c;
                    best_state = key;
                    best_exit_link = li;
                }
                continue;
            }
            if (!ban.tiles.empty() && ban.tiles.count(to.index)) continue;
            const double c = r.through_cost(tile, in, li, cfg);
            if (c >= kInf) continue;
            const int nkey = key_of(to.index, li);
            if (d + c < dist[nkey] - kTieEps) {
                dist[nkey] = d + c;
                parent[nkey] = key;
                parent_link[nkey] = li;
                pq.push({d + c, nkey});
            }
        }
    };

    if (start.from_entry) {
        const NodeRef txr{NodeRef::Kind::User, r.tx()};
        for (LinkIndex li : g.user(r.tx()).links) {
            if (!ban.next_link.empty() && ban.next_link.count({kEntryState, li})) continue;
            const double c = r.entry_cost(li);
            if (c >= kInf) continue;
            const NodeRef to = g.other_end(g.link(li), txr);
            if (to.kind != NodeRef::Kind::Tile) continue;
            if (!ban.tiles.empty() && ban.tiles.count(to.index)) continue;
            const int key = key_of(to.index, li);
            if (c < dist[key] - kTieEps) {
                dist[key] = c;
                parent[key] = kEntryState;
                parent_link[key] = li;
                pq.push({c, key});
            }
        }
    } else {
        expand(kEntryState, start.tile, start.in_link, 0.0);
    }

    while (!pq.empty()) {
        auto [d, key] = pq.top();
        pq.pop();
        if (settled[key]) continue;
        settled[key] = 1;
        if (d >= best_exit) break;
        expand(key, tile_of(key), key / 2, d);
    }

    if (best_exit >= kInf) return {};
    std::vector<LinkIndex> links{best_exit_link};
    int cur = best_state;
    while (cur != kEntryState) {
        links.push_back(parent_link[cur]);
        cur = parent[cur];
    }
    std::reverse(links.begin(), links.end());
    if (total_cost) *total_cost = best_exit;
    return links;
}

// Tiles a path occupies, in visit order; empty when the walk is inconsistent.
std::vector<int> tiles_of_path(const PweGraph& g, const std::vector<LinkIndex>& links, int tx) {
    std::vector<int> tiles;
    NodeRef at{NodeRef::Kind::User, tx};
    for (std::size_t i = 0; i + 1 < links.size(); ++i) {
        at = g.other_end(g.link(links[i]), at);
        if (at.kind != NodeRef::Kind::Tile) return {};
        tiles.push_back(at.index);
    }
    return tiles;
}

bool is_simple(const PweGraph& g, const std::vector<LinkIndex>& links, int tx) {
    auto tiles = tiles_of_path(g, links, tx);
    if (tiles.empty() && links.size() > 1) return false;
    std::set<int> seen(tiles.begin(), tiles.end());
    if (seen.size() != tiles.size()) return false;
    std::set<LinkIndex> ls(links.begin(), links.end());
    return ls.size() == links.size();
}

double pair_graph_distance(const PweGraph& g, const std::string& a, const std::string& b,
                           const ChannelParams& params) {
    const int ai = g.user_index(a), bi = g.user_index(b);
    if (ai < 0 || bi < 0) throw UnknownUser("pair endpoint missing from graph");
    std::vector<double> dist(g.tiles().size(), kInf);
    using QI = std::pair<double, int>;
    std::priority_queue<QI, std::vector<QI>, std::greater<QI>> pq;
    for (LinkIndex li : g.user(ai).links) {
        const NodeRef t = g.other_end(g.link(li), NodeRef{NodeRef::Kind::User, ai});
        if (t.kind != NodeRef::Kind::Tile) continue;
        const double c = link_loss_db(g.link(li), params);
        if (c < dist[t.index]) {
            dist[t.index] = c;
            pq.push({c, t.index});
        }
    }
    std::vector<bool> done(g.tiles().size(), false);
    while (!pq.empty()) {
        auto [d, t] = pq.top();
        pq.pop();
        if (done[t]) continue;
        done[t] = true;
        for (LinkIndex li : g.tile(t).links) {
            const NodeRef to = g.other_end(g.link(li), NodeRef{NodeRef::Kind::Tile, t});
            if (to.kind != NodeRef::Kind::Tile) continue;
            const double nd = d + link_loss_db(g.link(li), params);
            if (nd < dist[to.index]) {
                dist[to.index] = nd;
                pq.push({nd, to.index});
            }
        }
    }
    double best = kInf;
    for (LinkIndex li : g.user(bi).links) {
        const NodeRef t = g.other_end(g.link(li), NodeRef{NodeRef::Kind::User, bi});
        if (t.kind != NodeRef::Kind::Tile || dist[t.index] >= kInf) continue;
        best = std::min(best, dist[t.index] + link_loss_db(g.link(li), params));
    }
    return best;
}

}  // namespace

PathfindResult k_shortest_configure(const PweGraph& graph,
                                    const std::vector<UserObjective>& objectives, int k,
                                    const ChannelParams& params, const Configuration& base) {
    if (k < 1) throw Error("k_shortest_configure needs k >= 1");
    PathfindResult result;
    result.config = base;

    std::vector<std::size_t> idx(objectives.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::vector<double> distances;
    for (const auto& o : objectives)
        distances.push_back(pair_graph_distance(graph, o.tx_id, o.rx_id, params));
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return distances[a] > distances[b]; });

    for (std::size_t oi : idx) {
        const UserObjective& obj = objectives[oi];
        if (first_contact_tiles(graph, obj.tx_id).empty() ||
            first_contact_tiles(graph, obj.rx_id).empty())
            throw NoFeasiblePath("pair (" + obj.tx_id + "," + obj.rx_id +
                                 ") has an empty first-contact set");

        std::vector<std::vector<LinkIndex>> selected;
        std::vector<std::vector<LinkIndex>> pool;

        for (int j = 0; j < k; ++j) {
            PairRouter router(graph, obj, params, result.config);
            std::vector<LinkIndex> chosen;
            double chosen_cost = kInf;

            if (selected.empty()) {
                double c = kInf;
                auto cand = dijkstra_states(router, Ban{}, SpurStart{}, &c);
                if (!cand.empty() && is_simple(graph, cand, router.tx())) {
                    chosen = std::move(cand);
                    chosen_cost = c;
                }
            } else {
                // Deviations of the last selected path feed the pool.
                const auto base_path = selected.back();
                const auto base_tiles = tiles_of_path(graph, base_path, router.tx());
                for (std::size_t spur = 0; spur + 1 < base_path.size(); ++spur) {
                    Ban ban;
                    const std::vector<LinkIndex> root(base_path.begin(),
                                                      base_path.begin() + spur);
                    SpurStart start;
                    if (spur > 0) {
                        start.from_entry = false;
                        start.tile = base_tiles[spur - 1];
                        start.in_link = base_path[spur - 1];
                    }
                    // Spur expansions are keyed on the entry sentinel.
                    for (const auto& p : selected) {
                        if (p.size() <= spur) continue;
                        if (!std::equal(root.begin(), root.end(), p.begin())) continue;
                        ban.next_link.insert({kEntryState, p[spur]});
                    }
                    // Tiles of the root stay off-limits, the spur tile excepted.
                    for (std::size_t i = 0; i + 1 < spur; ++i) ban.tiles.insert(base_tiles[i]);
                    auto spur_path = dijkstra_states(router, ban, start, nullptr);
                    if (spur_path.empty()) continue;
                    std::vector<LinkIndex> cand = root;
                    cand.insert(cand.end(), spur_path.begin(), spur_path.end());
                    if (!is_simple(graph, cand, router.tx())) continue;
                    pool.push_back(std::move(cand));
                }
                std::sort(pool.begin(), pool.end());
                pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
                for (const auto& cand : pool) {
                    if (std::find(selected.begin(), selected.end(), cand) != selected.end())
                        continue;
                    const double c = router.path_cost(cand);
                    if (c < chosen_cost) {
                        chosen_cost = c;
                        chosen = cand;
                    }
                }
            }

            if (chosen.empty() || chosen_cost >= kInf) {
                if (j == 0)
                    throw NoFeasiblePath("no feasible path for pair (" + obj.tx_id + "," +
                                         obj.rx_id + ")");
                break;
            }
            selected.push_back(chosen);
            commit_path_steers(graph, chosen, result.config);
            result.paths.push_back({obj.tx_id, obj.rx_id, chosen, chosen_cost});
        }
    }
    return result;
}

PathfindResult lexicographic_greedy(
    const PweGraph& graph, const std::vector<std::pair<std::string, std::string>>& pairs,
    const ChannelParams& params) {
    if (pairs.empty()) throw NoFeasiblePath("lexicographic_greedy needs at least one pair");

    std::vector<std::size_t> idx(pairs.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::vector<double> distances;
    for (const auto& p : pairs)
        distances.push_back(pair_graph_distance(graph, p.first, p.second, params));
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return distances[a] < distances[b]; });

    PathfindResult result;
    std::set<int> reused;

    for (std::size_t pi : idx) {
        const auto& [tx_id, rx_id] = pairs[pi];
        const int txi = graph.user_index(tx_id);
        const int rxi = graph.user_index(rx_id);
        if (txi < 0 || rxi < 0) throw UnknownUser("pair endpoint missing from graph");

        // Best-first over tiles; equal distances prefer already-reused tiles.
        struct QItem {
            double dist;
            bool fresh;
            int tile;
            bool operator>(const QItem& o) const {
                if (std::abs(dist - o.dist) > kTieEps) return dist > o.dist;
                if (fresh != o.fresh) return fresh && !o.fresh;
                return tile > o.tile;
            }
        };
        const std::size_t nt = graph.tiles().size();
        std::vector<double> dist(nt, kInf);
        std::vector<LinkIndex> via(nt, -1);
        std::priority_queue<QItem, std::vector<QItem>, std::greater<QItem>> pq;
        for (LinkIndex li : graph.user(txi).links) {
            const NodeRef t = graph.other_end(graph.link(li), NodeRef{NodeRef::Kind::User, txi});
            if (t.kind != NodeRef::Kind::Tile || !graph.tile(t.index).codebook) continue;
            const double c = link_loss_db(graph.link(li), params);
            if (c < dist[t.index]) {
                dist[t.index] = c;
                via[t.index] = li;
                pq.push({c, reused.count(t.index) == 0, t.index});
            }
        }
        std::vector<bool> done(nt, false);
        while (!pq.empty()) {
            auto top = pq.top();
            pq.pop();
            if (done[top.tile]) continue;
            done[top.tile] = true;
            for (LinkIndex li : graph.tile(top.tile).links) {
                const NodeRef to =
                    graph.other_end(graph.link(li), NodeRef{NodeRef::Kind::Tile, top.tile});
                if (to.kind != NodeRef::Kind::Tile || !graph.tile(to.index).codebook) continue;
                const double nd = dist[top.tile] + link_loss_db(graph.link(li), params);
                if (nd < dist[to.index] - kTieEps) {
                    dist[to.index] = nd;
                    via[to.index] = li;
                    pq.push({nd, reused.count(to.index) == 0, to.index});
                }
            }
        }

        double best = kInf;
        int best_tile = -1;
        LinkIndex best_exit = -1;
        for (LinkIndex li : graph.user(rxi).links) {
            const NodeRef t = graph.other_end(graph.link(li), NodeRef{NodeRef::Kind::User, rxi});
            if (t.kind != NodeRef::Kind::Tile || dist[t.index] >= kInf) continue;
            const double c = dist[t.index] + link_loss_db(graph.link(li), params);
            if (c < best) {
                best = c;
                best_tile = t.index;
                best_exit = li;
            }
        }
        if (best_tile < 0)
            throw NoFeasiblePath("no feasible path for pair (" + tx_id + "," + rx_id + ")");

        std::vector<LinkIndex> links{best_exit};
        int cur = best_tile;
        while (cur >= 0) {
            const LinkIndex li = via[cur];
            links.push_back(li);
            const NodeRef from = graph.other_end(graph.link(li), NodeRef{NodeRef::Kind::Tile, cur});
            cur = from.kind == NodeRef::Kind::Tile ? from.index : -1;
        }
        std::reverse(links.begin(), links.end());

        for (int t : tiles_of_path(graph, links, txi)) reused.insert(t);
        commit_path_steers(graph, links, result.config);
        result.paths.push_back({tx_id, rx_id, links, best});
    }
    return result;
}

std::map<std::string, MergedFunction> doppler_guard_absorb(
    const PweGraph& graph, const std::string& rx_id, const Vec3& trajectory, double guard_cos,
    const std::set<std::string>& exclude_tiles) {
    const int rxi = graph.user_index(rx_id);
    if (rxi < 0) throw UnknownUser("no user '" + rx_id + "'");
    const UserNode& rx = graph.user(rxi);
    const Vec3 traj = trajectory.normalized();

    std::map<std::string, MergedFunction> out;
    for (LinkIndex li : rx.links) {
        const NodeRef t = graph.other_end(graph.link(li), NodeRef{NodeRef::Kind::User, rxi});
        if (t.kind != NodeRef::Kind::Tile) continue;
        const TileNode& tile = graph.tile(t.index);
        if (!tile.codebook) continue;  // virtual tiles cannot absorb
        if (exclude_tiles.count(tile.id)) continue;
        const Vec3 bearing = (tile.placement.center - rx.position).normalized();
        if (std::abs(bearing.dot(traj)) <= guard_cos) continue;
        if (rx.antenna.efficiency(bearing) <= 0.0) continue;
        out[tile.id] = merge({tile.codebook->make_absorb()});
    }
    return out;
}

}  // namespace pwe
