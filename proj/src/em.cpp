// SPDX-License-Identifier: Apache-2.0
#include "pwe/em.hpp"

#include <algorithm>
#include <cmath>

#include "pwe/errors.hpp"

namespace pwe {

namespace {
constexpr double kSpeedOfLight = 299792458.0;
}

std::string to_string(EmKind k) {
    switch (k) {
        case EmKind::Steer: return "steer";
        case EmKind::Split: return "split";
        case EmKind::Absorb: return "absorb";
        case EmKind::Specular: return "specular";
        case EmKind::PhaseShift: return "phase_shift";
        case EmKind::Polarize: return "polarize";
    }
    return "?";
}

bool EmFunction::same_behavior(const EmFunction& o) const {
    return kind == o.kind && in_port == o.in_port && out_ports == o.out_ports &&
           bias == o.bias && efficiency == o.efficiency &&
           phase_radians == o.phase_radians;
}

bool MergedFunction::operator==(const MergedFunction& o) const {
    if (merged_bias != o.merged_bias) return false;
    if (constituents.size() != o.constituents.size()) return false;
    // Order-insensitive comparison by id; merge() sorts ids already.
    for (std::size_t i = 0; i < constituents.size(); ++i)
        if (!constituents[i].same_behavior(o.constituents[i])) return false;
    return true;
}

MergedFunction merge(const std::vector<EmFunction>& functions) {
    if (functions.empty()) throw EmptyFunctionList("merge() needs at least one function");
    const std::size_t cells = functions.front().bias.size();
    for (const auto& f : functions)
        if (f.bias.size() != cells)
            throw MismatchedCellCount("merge(): function '" + f.id + "' has " +
                                      std::to_string(f.bias.size()) + " cells, expected " +
                                      std::to_string(cells));

    MergedFunction m;
    m.constituents = functions;
    std::sort(m.constituents.begin(), m.constituents.end(),
              [](const EmFunction& a, const EmFunction& b) { return a.id < b.id; });

    m.merged_bias.resize(cells);
    for (std::size_t i = 0; i < cells; ++i) {
        // Mode across constituents, ties broken by the lowest cell state.
        std::map<int, int> counts;
        for (const auto& f : m.constituents) counts[f.bias[i]]++;
        int best_v = 0, best_c = -1;
        for (const auto& [v, c] : counts) {
            if (c > best_c) {  // map iterates ascending, so ties keep the low value
                best_c = c;
                best_v = v;
            }
        }
        m.merged_bias[i] = best_v;
    }

    for (const auto& f : m.constituents) {
        double overlap = 1.0;
        if (cells > 0) {
            int agree = 0;
            for (std::size_t i = 0; i < cells; ++i)
                if (f.bias[i] == m.merged_bias[i]) ++agree;
            overlap = static_cast<double>(agree) / static_cast<double>(cells);
        }
        m.per_constituent_efficiency[f.id] = f.efficiency * overlap;
    }
    return m;
}

Codebook::Codebook(int cell_grid, int bias_levels, double steer_efficiency,
                   double absorb_efficiency, double frequency_hz)
    : cell_grid_(cell_grid),
      bias_levels_(bias_levels),
      steer_efficiency_(steer_efficiency),
      absorb_efficiency_(absorb_efficiency),
      frequency_hz_(frequency_hz) {
    if (cell_grid_ < 1 || bias_levels_ < 2)
        throw Error("codebook needs cell_grid >= 1 and bias_levels >= 2");
    if (steer_efficiency_ <= 0.0 || steer_efficiency_ > 1.0)
        throw Error("steer_efficiency must be in (0,1]");
}

void Codebook::insert(const EmFunction& fn) {
    if (fn.kind != EmKind::Specular &&
        fn.bias.size() != static_cast<std::size_t>(cell_count()))
        throw MismatchedCellCount("codebook entry '" + fn.id + "' has " +
                                  std::to_string(fn.bias.size()) + " cells, expected " +
                                  std::to_string(cell_count()));
    entries_[fn.id] = fn;
}

const EmFunction& Codebook::lookup(const std::string& function_id) const {
    auto it = entries_.find(function_id);
    if (it == entries_.end())
        throw UnknownFunction("codebook has no function '" + function_id + "'");
    return it->second;
}

const EmFunction& codebook_lookup(const Codebook& codebook, const std::string& function_id) {
    return codebook.lookup(function_id);
}

EmFunction Codebook::make_steer(const std::string& id, LinkIndex in_port, LinkIndex out_port,
                                const Vec3& in_dir_local, const Vec3& out_dir_local,
                                double side_length) const {
    EmFunction f;
    f.id = id;
    f.kind = EmKind::Steer;
    f.in_port = in_port;
    f.out_ports = {out_port};
    f.efficiency = steer_efficiency_;
    // Reflectarray-style linear phase gradient across the cell grid. The
    // in-plane difference of the arrival and departure directions fixes the
    // gradient; quantization to bias_levels yields the cell states.
    const double k = 2.0 * M_PI * frequency_hz_ / kSpeedOfLight;
    const double gx = k * (in_dir_local.x - out_dir_local.x);
    const double gy = k * (in_dir_local.y - out_dir_local.y);
    const double pitch = side_length / cell_grid_;
    f.bias.resize(cell_count());
    for (int j = 0; j < cell_grid_; ++j) {
        for (int i = 0; i < cell_grid_; ++i) {
            const double px = (i + 0.5) * pitch - side_length / 2.0;
            const double py = (j + 0.5) * pitch - side_length / 2.0;
            double phase = std::fmod(gx * px + gy * py, 2.0 * M_PI);
            if (phase < 0) phase += 2.0 * M_PI;
            int level = static_cast<int>(std::floor(phase / (2.0 * M_PI) * bias_levels_));
            f.bias[j * cell_grid_ + i] = std::min(level, bias_levels_ - 1);
        }
    }
    return f;
}

EmFunction Codebook::make_absorb() const {
    EmFunction f;
    f.id = "absorb";
    f.kind = EmKind::Absorb;
    f.efficiency = absorb_efficiency_;
    f.bias.assign(cell_count(), 0);
    return f;
}

EmFunction Codebook::make_specular(double efficiency) const {
    EmFunction f;
    f.id = "specular";
    f.kind = EmKind::Specular;
    f.efficiency = efficiency;
    return f;
}

const TilePort* TilePortView::find(LinkIndex link) const {
    for (const auto& p : ports)
        if (p.link == link) return &p;
    return nullptr;
}

namespace {

// Specular departures around the mirror image of the arrival: the reflected
// beam continues over the best-aligned tile port, while receiver ports inside
// the lobe tap their own share (a user does not consume the beam). The lobe
// factor cos^sharpness(delta) decays misaligned components and the cutoff
// drops them entirely.
std::vector<std::pair<LinkIndex, double>> specular_targets(const TilePortView& tile,
                                                           const TilePort& in,
                                                           const ForwardOptions& opts) {
    const Vec3 n = tile.placement->normal;
    const Vec3 incoming = in.direction * -1.0;          // propagation direction into the tile
    const Vec3 mirror = reflect(incoming, n);           // departure direction
    LinkIndex best = -1;
    double best_cos = opts.specular_cutoff_cos;
    std::vector<std::pair<LinkIndex, double>> out;
    for (const auto& p : tile.ports) {
        if (p.link == in.link) continue;
        const double c = p.direction.dot(mirror);
        if (p.user_link) {
            if (c > opts.specular_cutoff_cos)
                out.push_back({p.link, std::pow(c, opts.specular_sharpness)});
        } else if (c > best_cos) {
            best_cos = c;
            best = p.link;
        }
    }
    if (best >= 0) out.push_back({best, std::pow(best_cos, opts.specular_sharpness)});
    return out;
}

}  // namespace

std::map<LinkIndex, ForwardOut> forward_detailed(const TilePortView& tile,
                                                 const MergedFunction* active,
                                                 LinkIndex in_port, const ForwardOptions& opts) {
    const TilePort* in = tile.find(in_port);
    if (!in) throw UnknownPort("tile has no port for link " + std::to_string(in_port));

    std::map<LinkIndex, ForwardOut> out;
    const double spec_eff = tile.placement ? tile.placement->specular_efficiency : 1.0;

    auto add_specular = [&](double scale) {
        for (const auto& [link, lobe] : specular_targets(tile, *in, opts))
            if (scale * lobe > 0.0) out[link].fraction += scale * lobe;
    };

    if (!active) {
        add_specular(spec_eff);  // deactivated: natural behavior
        return out;
    }
    if (active->constituents.empty()) {
        add_specular(opts.unintended_fraction);  // configured but nothing addressable
        return out;
    }

    bool matched = false;
    bool absorbing_surface = true;  // all constituents are unbound absorbs
    for (const auto& f : active->constituents) {
        if (!(f.kind == EmKind::Absorb && !f.in_port)) absorbing_surface = false;
    }

    for (const auto& f : active->constituents) {
        const double eff = active->per_constituent_efficiency.count(f.id)
                               ? active->per_constituent_efficiency.at(f.id)
                               : f.efficiency;
        switch (f.kind) {
            case EmKind::Absorb:
                if (!f.in_port || *f.in_port == in_port) matched = true;  // swallowed
                break;
            case EmKind::Steer:
            case EmKind::PhaseShift:
            case EmKind::Polarize:
                if (f.in_port && *f.in_port == in_port && !f.out_ports.empty()) {
                    matched = true;
                    if (!tile.find(f.out_ports.front()))
                        throw UnknownPort("function '" + f.id + "' departs by a link " +
                                          "that is not a port of this tile");
                    ForwardOut& o = out[f.out_ports.front()];
                    o.fraction += eff;
                    o.active = true;
                    if (f.kind == EmKind::PhaseShift) o.phase_add += f.phase_radians;
                }
                break;
            case EmKind::Split:
                if (f.in_port && *f.in_port == in_port && !f.out_ports.empty()) {
                    matched = true;
                    const double share = eff / static_cast<double>(f.out_ports.size());
                    for (LinkIndex o : f.out_ports) {
                        out[o].fraction += share;
                        out[o].active = true;
                    }
                }
                break;
            case EmKind::Specular:
                matched = true;
                add_specular(f.efficiency);
                break;
        }
    }

    if (!matched && !absorbing_surface) {
        // Arrival the configuration does not address: residual specular
        // reflection at a fixed fraction.
        add_specular(opts.unintended_fraction);
    }

    // Energy conservation at the tile boundary.
    double total = 0.0;
    for (const auto& [l, v] : out) total += v.fraction;
    if (total > 1.0) {
        for (auto& [l, v] : out) v.fraction /= total;
    }
    return out;
}

std::map<LinkIndex, double> forward(const TilePortView& tile, const MergedFunction* active,
                                    LinkIndex in_port, const ForwardOptions& opts) {
    std::map<LinkIndex, double> flat;
    for (const auto& [l, o] : forward_detailed(tile, active, in_port, opts))
        flat[l] = o.fraction;
    return flat;
}

}  // namespace pwe
