// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pwe/geometry.hpp"

namespace pwe {

using LinkIndex = int;

enum class EmKind { Steer, Split, Absorb, Specular, PhaseShift, Polarize };

std::string to_string(EmKind k);

// One wave-manipulation template plus the cell bias vector realizing it.
// Port bindings refer to graph links incident to the owning tile (ports are
// discretized by links, with no extra angular binning).
struct EmFunction {
    std::string id;
    EmKind kind = EmKind::Specular;
    std::optional<LinkIndex> in_port;   // Absorb with no in_port absorbs every arrival
    std::vector<LinkIndex> out_ports;   // Steer/PhaseShift/Polarize: one; Split: several
    std::vector<int> bias;              // empty for Specular (natural behavior)
    double efficiency = 1.0;            // in (0,1]
    double phase_radians = 0.0;         // PhaseShift only

    bool same_behavior(const EmFunction& o) const;
};

// Per-function efficiency bookkeeping after a mode merge.
struct MergedFunction {
    std::vector<EmFunction> constituents;
    std::vector<int> merged_bias;
    std::map<std::string, double> per_constituent_efficiency;

    bool operator==(const MergedFunction& o) const;
};

// Mode rule over cell bias vectors: merged_bias[i] is the most frequent value
// at cell i, ties broken toward the smallest value. Each constituent keeps
// efficiency eps * (fraction of cells where its bias agrees with the merge).
MergedFunction merge(const std::vector<EmFunction>& functions);

// Manufacturing-time function database for one tile design. Explicit entries
// are served by codebook_lookup; steer/absorb entries are synthesized on
// demand (the table is a service, not an exhaustive list).
class Codebook {
  public:
    Codebook(int cell_grid, int bias_levels, double steer_efficiency,
             double absorb_efficiency, double frequency_hz);

    int cell_count() const { return cell_grid_ * cell_grid_; }
    int cell_grid() const { return cell_grid_; }
    int bias_levels() const { return bias_levels_; }
    double steer_efficiency() const { return steer_efficiency_; }

    void insert(const EmFunction& fn);
    const EmFunction& lookup(const std::string& function_id) const;
    bool contains(const std::string& function_id) const { return entries_.count(function_id) > 0; }
    const std::map<std::string, EmFunction>& entries() const { return entries_; }

    // Deterministic steer synthesis: a linear phase-gradient bias pattern for
    // the (arrival, departure) direction pair, quantized to bias_levels.
    // Directions are in the tile local frame; side_length scales cell pitch.
    EmFunction make_steer(const std::string& id, LinkIndex in_port, LinkIndex out_port,
                          const Vec3& in_dir_local, const Vec3& out_dir_local,
                          double side_length) const;
    EmFunction make_absorb() const;
    EmFunction make_specular(double efficiency) const;

  private:
    int cell_grid_;
    int bias_levels_;
    double steer_efficiency_;
    double absorb_efficiency_;
    double frequency_hz_;
    std::map<std::string, EmFunction> entries_;
};

const EmFunction& codebook_lookup(const Codebook& codebook, const std::string& function_id);

// Geometry a forwarding lookup needs about one tile: its ports (incident
// links) with world-frame directions toward the far end.
struct TilePort {
    LinkIndex link = -1;
    Vec3 direction;        // unit, tile center toward the other endpoint
    bool user_link = false;
};

struct TilePortView {
    const TilePlacement* placement = nullptr;
    std::vector<TilePort> ports;

    const TilePort* find(LinkIndex link) const;
};

struct ForwardOptions {
    double unintended_fraction = 0.25;  // residual specular power for arrivals a steer ignores
    double specular_sharpness = 80.0;   // lobe exponent around the mirror direction
    double specular_cutoff_cos = 0.9659258262890683;  // cos(15 deg)
    double stale_sharpness = 8.0;       // lobe exponent for steers aimed at a moved receiver
};

struct ForwardOut {
    double fraction = 0.0;
    bool active = false;        // produced by a steering-family function (collimates)
    double phase_add = 0.0;     // explicit phase override contribution
};

// Router-model lookup: power distribution over departure ports for a wave
// arriving on in_port, given the active merged function (nullptr means the
// tile is deactivated and behaves as a natural specular reflector). The
// returned fractions sum to at most 1; the deficit is scattering or
// absorption loss.
std::map<LinkIndex, ForwardOut> forward_detailed(const TilePortView& tile,
                                                 const MergedFunction* active,
                                                 LinkIndex in_port,
                                                 const ForwardOptions& opts = {});

std::map<LinkIndex, double> forward(const TilePortView& tile, const MergedFunction* active,
                                    LinkIndex in_port, const ForwardOptions& opts = {});

}  // namespace pwe
