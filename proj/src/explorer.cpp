// SPDX-License-Identifier: Apache-2.0
#include "pwe/explorer.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "pwe/errors.hpp"
#include "pwe/pathfind.hpp"

namespace pwe {

namespace {

struct Walker {
    std::uint64_t id = 0;
    int tile = -1;
    LinkIndex in_link = -1;
    int rx_target = -1;
    double acc = 1.0;
    double denom = 1.0;
    double run_len = 0.0;
    int run_links = 0;
    double delay = 0.0;
    std::vector<LinkIndex> trace;
    std::vector<std::tuple<int, LinkIndex, LinkIndex>> choices;  // (tile, in, out)
};

double run_exp(double len, int links, const ChannelParams& p) {
    if (links <= 1) return len <= p.near_field_radius_m ? p.a_near : p.a_far;
    return p.a_far;
}

}  // namespace

ExplorerResult explorer_search(const PweGraph& graph, const std::string& tx_id,
                               const std::vector<std::string>& rx_ids,
                               const ExplorerParams& eparams, const ChannelParams& params) {
    if (eparams.power_threshold_w <= 0.0) throw Error("power_threshold must be > 0 W");
    if (eparams.rounds < 1) throw Error("rounds must be >= 1");
    const int txi = graph.user_index(tx_id);
    if (txi < 0) throw UnknownUser("no user '" + tx_id + "'");
    std::vector<int> rx_idx;
    for (const auto& r : rx_ids) {
        const int i = graph.user_index(r);
        if (i < 0) throw UnknownUser("no user '" + r + "'");
        rx_idx.push_back(i);
    }
    if (rx_idx.empty()) throw Error("explorer_search needs at least one receiver");

    const UserNode& tx = graph.user(txi);
    const double pre = std::pow(4.0 * M_PI * params.frequency_hz / kSpeedOfLight, 2.0);
    const double pt = params.tx_power_w;

    // Heuristic weights per (tile, arrival link, departure link).
    std::map<std::tuple<int, LinkIndex, LinkIndex>, double> weights;
    auto weight_of = [&](int tile, LinkIndex in, LinkIndex out) {
        auto it = weights.find({tile, in, out});
        return it == weights.end() ? 1.0 : it->second;  // uniform until updated
    };

    std::mt19937_64 rng(eparams.seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    // Entry links weighted by the transmitter antenna mask.
    std::vector<std::pair<LinkIndex, double>> entries;
    const NodeRef txr{NodeRef::Kind::User, txi};
    for (LinkIndex li : tx.links) {
        const Link& l = graph.link(li);
        const double mask = tx.antenna.efficiency(graph.direction_from(txr, l));
        if (mask <= 0.0) continue;
        const NodeRef to = graph.other_end(l, txr);
        if (to.kind != NodeRef::Kind::Tile) continue;
        entries.push_back({li, mask});
    }
    if (entries.empty()) throw NoArrivals("transmitter has no usable first-contact links");

    ExplorerResult result;
    std::map<int, std::vector<std::pair<double, Walker>>> top;  // rx index -> (power, walker)

    std::vector<Walker> alive;
    std::uint64_t next_id = 0;

    auto optimistic_power = [&](const Walker& w) {
        const double open = std::max(
            1.0, pre * std::min(std::pow(w.run_len, params.a_near),
                                std::pow(w.run_len, params.a_far)));
        return pt * w.acc / (w.denom * open);
    };

    for (int round = 0; round < eparams.rounds; ++round) {
        // Release fresh explorers, round-robin over the receivers.
        for (int r = 0; r < eparams.release_per_round; ++r) {
            double total = 0.0;
            for (const auto& [li, m] : entries) total += m;
            double pick = uni(rng) * total;
            LinkIndex li = entries.back().first;
            double mask = entries.back().second;
            for (const auto& [cand, m] : entries) {
                if (pick < m) {
                    li = cand;
                    mask = m;
                    break;
                }
                pick -= m;
            }
            const Link& l = graph.link(li);
            Walker w;
            w.id = next_id++;
            w.tile = graph.other_end(l, txr).index;
            w.in_link = li;
            w.rx_target = rx_idx[(round * eparams.release_per_round + r) % rx_idx.size()];
            w.acc = mask * l.nlos_factor;
            w.run_len = l.length_m;
            w.run_links = 1;
            w.delay = l.delay_s;
            w.trace = {li};
            if (optimistic_power(w) >= eparams.power_threshold_w) alive.push_back(std::move(w));
        }

        std::sort(alive.begin(), alive.end(),
                  [](const Walker& a, const Walker& b) { return a.id < b.id; });
        std::vector<Walker> next_alive;

        for (Walker& w : alive) {
            const TileNode& tile = graph.tile(w.tile);
            const NodeRef here{NodeRef::Kind::Tile, w.tile};

            // Candidate departures and their forwarded fractions.
            std::vector<std::tuple<LinkIndex, double, bool>> outs;  // (link, fraction, active)
            if (tile.codebook) {
                // Free tile: sample one steer by the heuristic distribution.
                std::vector<std::pair<LinkIndex, double>> options;
                double total = 0.0;
                for (LinkIndex li : tile.links) {
                    if (li == w.in_link) continue;
                    if (std::find(w.trace.begin(), w.trace.end(), li) != w.trace.end()) continue;
                    const Link& l = graph.link(li);
                    const NodeRef to = graph.other_end(l, here);
                    if (to.kind == NodeRef::Kind::User &&
                        std::find(rx_idx.begin(), rx_idx.end(), to.index) == rx_idx.end())
                        continue;
                    const double wgt = weight_of(w.tile, w.in_link, li);
                    options.push_back({li, wgt});
                    total += wgt;
                }
                if (!options.empty()) {
                    double pick = uni(rng) * total;
                    LinkIndex sel = options.back().first;
                    for (const auto& [li, wgt] : options) {
                        if (pick < wgt) {
                            sel = li;
                            break;
                        }
                        pick -= wgt;
                    }
                    outs.push_back({sel, tile.codebook->steer_efficiency(), true});
                    w.choices.push_back({w.tile, w.in_link, sel});
                }
            } else {
                // Virtual tile: natural specular behavior.
                const auto fwd =
                    forward_detailed(graph.port_view(w.tile), nullptr, w.in_link,
                                     params.forwarding);
                std::vector<std::pair<double, LinkIndex>> ranked;
                for (const auto& [li, fo] : fwd) ranked.push_back({fo.fraction, li});
                std::sort(ranked.rbegin(), ranked.rend());
                for (int i = 0; i < std::min<int>(eparams.spawn_fanout, ranked.size()); ++i)
                    outs.push_back({ranked[i].second, ranked[i].first, false});
            }

            for (const auto& [out_link, fraction, active] : outs) {
                if (fraction <= 0.0) continue;
                if (std::find(w.trace.begin(), w.trace.end(), out_link) != w.trace.end())
                    continue;
                const Link& l = graph.link(out_link);
                Walker c = w;
                c.id = next_id++;
                const bool closes = active && tile.placement.collimating;
                if (closes) {
                    c.denom *= pre * std::pow(c.run_len, run_exp(c.run_len, c.run_links, params));
                    c.run_len = l.length_m;
                    c.run_links = 1;
                } else {
                    c.run_len += l.length_m;
                    c.run_links += 1;
                }
                c.acc *= fraction * l.nlos_factor;
                c.delay += l.delay_s;
                c.trace.push_back(out_link);

                const NodeRef to = graph.other_end(l, here);
                if (to.kind == NodeRef::Kind::User) {
                    if (to.index != c.rx_target) continue;  // interference, not service
                    const UserNode& rx = graph.user(to.index);
                    const Vec3 arrival = (graph.position(here) - rx.position).normalized();
                    const double mask = rx.antenna.efficiency(arrival);
                    if (mask <= 0.0) continue;
                    const double final_denom =
                        c.denom * pre *
                        std::pow(c.run_len, run_exp(c.run_len, c.run_links, params));
                    const double p = pt * c.acc * mask / final_denom;
                    if (p < eparams.power_threshold_w) continue;
                    std::string route;
                    for (LinkIndex t : c.trace) {
                        if (!route.empty()) route += ';';
                        route += graph.link_name(t);
                    }
                    result.arrivals_by_route[route] += 1;
                    auto& list = top[to.index];
                    list.push_back({p, c});
                    std::stable_sort(list.begin(), list.end(), [](const auto& a, const auto& b) {
                        return a.first > b.first;
                    });
                    if (static_cast<int>(list.size()) > eparams.top_n) list.resize(eparams.top_n);
                    // Reinforce the weights along the successful trace.
                    const double gain = eparams.reinforcement * (p / pt);
                    for (const auto& [ct, ci, co] : c.choices) {
                        auto key = std::make_tuple(ct, ci, co);
                        auto it = weights.find(key);
                        weights[key] = (it == weights.end() ? 1.0 : it->second) + gain;
                    }
                    continue;
                }
                c.tile = to.index;
                c.in_link = out_link;
                if (optimistic_power(c) < eparams.power_threshold_w) continue;
                if (static_cast<int>(c.trace.size()) / 1 >= params.max_bounces) continue;
                next_alive.push_back(std::move(c));
            }
        }
        alive = std::move(next_alive);

        // Evaporate.
        for (auto& [key, val] : weights) val *= (1.0 - eparams.pheromone_decay);
    }

    bool any = false;
    for (const auto& [rxidx, list] : top) {
        if (list.empty()) continue;
        any = true;
        auto& out_list = result.top_paths[graph.user(rxidx).id];
        for (const auto& [p, w] : list) {
            PathRecord r;
            r.trace = w.trace;
            r.power_w = p;
            r.delay_s = w.delay;
            const Link& last = graph.link(w.trace.back());
            const NodeRef rxref{NodeRef::Kind::User, rxidx};
            r.arrival = graph.direction_from(rxref, last);
            r.phase_radians = std::fmod(2.0 * M_PI * params.frequency_hz * r.delay_s, 2.0 * M_PI);
            out_list.push_back(std::move(r));
        }
        // Best route becomes configuration steers.
        commit_path_steers(graph, list.front().second.trace, result.config);
    }
    if (!any) throw NoArrivals("no explorer reached a receiver within " +
                               std::to_string(eparams.rounds) + " rounds");
    return result;
}

}  // namespace pwe
