// SPDX-License-Identifier: Apache-2.0
#include "pwe/channel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "pwe/errors.hpp"

namespace pwe {

double dbm_to_watts(double dbm) { return std::pow(10.0, dbm / 10.0) * 1e-3; }
double watts_to_dbm(double watts) { return 10.0 * std::log10(watts / 1e-3); }

double ChannelParams::min_power_floor_w() const { return dbm_to_watts(min_power_floor_dbm); }

void ChannelParams::validate() const {
    std::vector<std::string> issues;
    if (!(a_near < a_far)) issues.push_back("a_near must be < a_far");
    if (!(a_far <= 2.0)) issues.push_back("a_far must be <= 2");
    if (max_bounces < 1) issues.push_back("max_bounces must be >= 1");
    if (frequency_hz <= 0.0) issues.push_back("frequency_hz must be > 0");
    if (tx_power_w <= 0.0) issues.push_back("tx power must be > 0");
    if (near_field_radius_m <= 0.0) issues.push_back("near_field_radius_m must be > 0");
    if (!issues.empty()) throw ValidationError(std::move(issues));
}

double PowerDelayProfile::total_power_w() const {
    double p = 0.0;
    for (const auto& e : entries) p += e.power_w;
    return p;
}

double link_loss_db(const Link& link, const ChannelParams& params) {
    const double pre = std::pow(4.0 * M_PI * params.frequency_hz / kSpeedOfLight, 2.0);
    const double a =
        link.length_m <= params.near_field_radius_m ? params.a_near : params.a_far;
    const double denom = pre * std::pow(link.length_m, a);
    return 10.0 * std::log10(denom) - 10.0 * std::log10(link.nlos_factor);
}

namespace {

struct TraversalState {
    int tile = -1;
    LinkIndex in_link = -1;
    double acc = 1.0;          // antenna mask, forwarding fractions, near-LOS factors
    double denom = 1.0;        // product of closed spreading terms
    double run_len = 0.0;      // open spreading run
    int run_links = 0;
    double delay = 0.0;
    double phase = 0.0;
    int bounces = 0;
    std::vector<LinkIndex> trace;
};

double run_exponent(double len, int links, const ChannelParams& p) {
    if (links <= 1) return len <= p.near_field_radius_m ? p.a_near : p.a_far;
    return p.a_far;  // a maximal run of plain reflections spreads far-field
}

// A configuration can be older than the snapshot: a steer aimed at a user who
// has since moved references a tombstoned link. Its output remaps onto the
// tile's live link to that user, attenuated by the misalignment lobe; with no
// live link the constituent goes dark.
MergedFunction resolve_stale(const PweGraph& g, int tile_idx, const MergedFunction& m,
                             const ForwardOptions& opts, bool* changed) {
    *changed = false;
    auto remap = [&](LinkIndex li, double* lobe) -> LinkIndex {
        const Link& l = g.link(li);
        if (!l.dead) return li;
        *changed = true;
        if (!l.user_link) return -1;
        int user = -1;
        for (const NodeRef& n : {l.a, l.b})
            if (n.kind == NodeRef::Kind::User) user = n.index;
        const LinkIndex live = g.user_link_of(tile_idx, user);
        if (live < 0) return -1;
        const double c = l.user_dir_from_tile.dot(g.link(live).user_dir_from_tile);
        if (c <= 0.0) return -1;
        *lobe *= std::pow(c, opts.stale_sharpness);
        return live;
    };

    MergedFunction out = m;
    std::vector<EmFunction> kept;
    for (auto& f : out.constituents) {
        double lobe = 1.0;
        bool drop = false;
        if (f.in_port) {
            const LinkIndex ni = remap(*f.in_port, &lobe);
            if (ni < 0) drop = true;
            f.in_port = ni;
        }
        for (auto& o : f.out_ports) {
            const LinkIndex no = remap(o, &lobe);
            if (no < 0) drop = true;
            o = no;
        }
        if (drop) {
            out.per_constituent_efficiency.erase(f.id);
            *changed = true;
            continue;
        }
        if (lobe < 1.0) out.per_constituent_efficiency[f.id] *= lobe;
        kept.push_back(std::move(f));
    }
    out.constituents = std::move(kept);
    return out;
}

}  // namespace

PowerDelayProfile compute_pdp(const PweGraph& graph, const Configuration& config,
                              const std::string& tx_user, const std::string& rx_user,
                              const ChannelParams& params) {
    params.validate();
    if (tx_user == rx_user) throw Error("compute_pdp: tx and rx must differ");
    const int txi = graph.user_index(tx_user);
    const int rxi = graph.user_index(rx_user);
    if (txi < 0) throw UnknownUser("graph has no user '" + tx_user + "'");
    if (rxi < 0) throw UnknownUser("graph has no user '" + rx_user + "'");

    const UserNode& tx = graph.user(txi);
    const UserNode& rx = graph.user(rxi);
    const double pre = std::pow(4.0 * M_PI * params.frequency_hz / kSpeedOfLight, 2.0);
    const double floor_w = params.min_power_floor_w();
    const double pt = params.tx_power_w;
    // Pruning on the optimistic completion bound is only sound when every
    // spreading term exceeds 1, which holds from the VHF range upward.
    const bool prune = pre >= 10.0;

    PowerDelayProfile pdp;

    // Direct component when the users see each other.
    if (params.include_los) {
        if (auto vis = graph.user_user_visibility(txi, rxi);
            vis && vis->kind != VisibilityKind::Blocked) {
            const double d = tx.position.distance(rx.position);
            const Vec3 dir = (rx.position - tx.position).normalized();
            const double a = run_exponent(d, 1, params);
            const double p = pt * tx.antenna.efficiency(dir) *
                             rx.antenna.efficiency(dir * -1.0) * vis->attenuation_factor /
                             (pre * std::pow(d, a));
            if (p >= floor_w) {
                PathRecord r;
                r.power_w = p;
                r.delay_s = d / kSpeedOfLight;
                r.arrival = (tx.position - rx.position).normalized();
                r.phase_radians = std::fmod(2.0 * M_PI * params.frequency_hz * r.delay_s, 2.0 * M_PI);
                pdp.entries.push_back(std::move(r));
            }
        }
    }

    // Port views and resolved assignments are reused across the traversal.
    std::vector<TilePortView> views(graph.tiles().size());
    std::vector<bool> views_ready(graph.tiles().size(), false);
    auto view_of = [&](int tile) -> const TilePortView& {
        if (!views_ready[tile]) {
            views[tile] = graph.port_view(tile);
            views_ready[tile] = true;
        }
        return views[tile];
    };
    std::map<int, MergedFunction> resolved_store;
    std::vector<int> resolved_state(graph.tiles().size(), 0);  // 0 new, 1 as-is, 2 stored
    auto active_of = [&](int tile) -> const MergedFunction* {
        if (resolved_state[tile] == 1) return config.find(graph.tile(tile).id);
        if (resolved_state[tile] == 2) {
            auto it = resolved_store.find(tile);
            return it == resolved_store.end() ? nullptr : &it->second;
        }
        const MergedFunction* raw = config.find(graph.tile(tile).id);
        if (!raw) {
            resolved_state[tile] = 1;
            return nullptr;
        }
        bool changed = false;
        MergedFunction fixed = resolve_stale(graph, tile, *raw, params.forwarding, &changed);
        if (!changed) {
            resolved_state[tile] = 1;
            return raw;
        }
        resolved_state[tile] = 2;
        auto [it, ok] = resolved_store.emplace(tile, std::move(fixed));
        return &it->second;
    };

    std::vector<TraversalState> stack;
    const NodeRef tx_ref{NodeRef::Kind::User, txi};
    for (LinkIndex li : tx.links) {
        const Link& l = graph.link(li);
        const Vec3 dir = graph.direction_from(tx_ref, l);
        const double mask = tx.antenna.efficiency(dir);
        if (mask <= 0.0) continue;
        const NodeRef other = graph.other_end(l, tx_ref);
        if (other.kind != NodeRef::Kind::Tile) continue;
        TraversalState s;
        s.tile = other.index;
        s.in_link = li;
        s.acc = mask * l.nlos_factor;
        s.run_len = l.length_m;
        s.run_links = 1;
        s.delay = l.delay_s;
        s.trace = {li};
        stack.push_back(std::move(s));
    }

    while (!stack.empty()) {
        TraversalState s = std::move(stack.back());
        stack.pop_back();
        if (s.bounces >= params.max_bounces) continue;

        const TileNode& tile = graph.tile(s.tile);
        const MergedFunction* active = active_of(s.tile);
        const auto outs =
            forward_detailed(view_of(s.tile), active, s.in_link, params.forwarding);
        const NodeRef here{NodeRef::Kind::Tile, s.tile};

        for (const auto& [out_link, fo] : outs) {
            if (fo.fraction <= 0.0) continue;
            if (std::find(s.trace.begin(), s.trace.end(), out_link) != s.trace.end())
                continue;  // ordered selection of links without repetition
            const Link& l = graph.link(out_link);

            const bool closes = fo.active && tile.placement.collimating;
            double denom = s.denom;
            double run_len = s.run_len;
            int run_links = s.run_links;
            if (closes) {
                denom *= pre * std::pow(run_len, run_exponent(run_len, run_links, params));
                run_len = l.length_m;
                run_links = 1;
            } else {
                run_len += l.length_m;
                run_links += 1;
            }
            const double acc = s.acc * fo.fraction * l.nlos_factor;
            const double delay = s.delay + l.delay_s;
            const double phase = s.phase + fo.phase_add;

            const NodeRef to = graph.other_end(l, here);
            if (to.kind == NodeRef::Kind::User) {
                if (to.index != rxi) continue;  // other receivers absorb silently
                const Vec3 arrival = (graph.position(here) - rx.position).normalized();
                const double mask = rx.antenna.efficiency(arrival);
                if (mask <= 0.0) continue;
                const double final_denom =
                    denom * pre * std::pow(run_len, run_exponent(run_len, run_links, params));
                const double p = pt * acc * mask / final_denom;
                if (p < floor_w) continue;
                PathRecord r;
                r.trace = s.trace;
                r.trace.push_back(out_link);
                r.power_w = p;
                r.delay_s = delay;
                r.arrival = arrival;
                r.phase_radians =
                    std::fmod(2.0 * M_PI * params.frequency_hz * delay + phase, 2.0 * M_PI);
                pdp.entries.push_back(std::move(r));
                continue;
            }

            if (prune) {
                const double open_term =
                    std::max(1.0, pre * std::min(std::pow(run_len, params.a_near),
                                                 std::pow(run_len, params.a_far)));
                if (pt * acc / (denom * open_term) < floor_w) continue;
            }

            TraversalState next;
            next.tile = to.index;
            next.in_link = out_link;
            next.acc = acc;
            next.denom = denom;
            next.run_len = run_len;
            next.run_links = run_links;
            next.delay = delay;
            next.phase = phase;
            next.bounces = s.bounces + 1;
            next.trace = s.trace;
            next.trace.push_back(out_link);
            stack.push_back(std::move(next));
        }
    }

    std::sort(pdp.entries.begin(), pdp.entries.end(),
              [](const PathRecord& a, const PathRecord& b) {
                  if (a.delay_s != b.delay_s) return a.delay_s < b.delay_s;
                  if (a.power_w != b.power_w) return a.power_w > b.power_w;
                  return a.trace < b.trace;
              });
    return pdp;
}

double rms_delay_spread(const PowerDelayProfile& pdp) {
    if (pdp.empty()) throw EmptyProfile("rms_delay_spread over an empty profile");
    double psum = 0.0, m1 = 0.0, m2 = 0.0;
    for (const auto& e : pdp.entries) {
        psum += e.power_w;
        m1 += e.power_w * e.delay_s;
        m2 += e.power_w * e.delay_s * e.delay_s;
    }
    if (psum <= 0.0) throw EmptyProfile("rms_delay_spread needs positive total power");
    m1 /= psum;
    m2 /= psum;
    return std::sqrt(std::max(0.0, m2 - m1 * m1));
}

double doppler_spread(const PowerDelayProfile& pdp, const Vec3& rx_velocity,
                      double frequency_hz, std::optional<double> window_db) {
    if (pdp.empty()) throw EmptyProfile("doppler_spread over an empty profile");
    double strongest = 0.0;
    for (const auto& e : pdp.entries) strongest = std::max(strongest, e.power_w);
    const double cutoff =
        window_db ? strongest * std::pow(10.0, -*window_db / 10.0) : 0.0;

    bool any = false;
    double fmin = 0.0, fmax = 0.0, single = 0.0;
    int count = 0;
    for (const auto& e : pdp.entries) {
        if (window_db && e.power_w < cutoff) continue;
        const double shift = frequency_hz / kSpeedOfLight * rx_velocity.dot(e.arrival);
        if (!any) {
            fmin = fmax = shift;
            any = true;
        } else {
            fmin = std::min(fmin, shift);
            fmax = std::max(fmax, shift);
        }
        single = shift;
        ++count;
    }
    if (!any) throw EmptyProfile("doppler_spread: no path within the power window");
    if (count == 1) return std::abs(single);
    return fmax - fmin;
}

std::string pdp_to_csv(const PowerDelayProfile& pdp, const PweGraph& graph) {
    std::string out = "path_index,power_dbm,delay_ns,arrival_x,arrival_y,arrival_z,trace\n";
    char buf[256];
    int index = 0;
    for (const auto& e : pdp.entries) {
        std::snprintf(buf, sizeof(buf), "%d,%.12g,%.12g,%.12g,%.12g,%.12g,", index++,
                      watts_to_dbm(e.power_w), e.delay_s * 1e9, e.arrival.x, e.arrival.y,
                      e.arrival.z);
        out += buf;
        for (std::size_t i = 0; i < e.trace.size(); ++i) {
            if (i) out += ';';
            out += graph.link_name(e.trace[i]);
        }
        out += '\n';
    }
    return out;
}

}  // namespace pwe
