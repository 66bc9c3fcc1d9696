// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pwe/graph.hpp"

namespace pwe {

struct ChannelParams {
    double frequency_hz = 60e9;
    double tx_power_w = 1.0;             // 30 dBm
    double min_power_floor_dbm = -250.0;
    int max_bounces = 50;
    double a_near = 1.0;                 // spreading exponent inside the near field
    double a_far = 2.0;                  // and beyond it
    double near_field_radius_m = 2.0;
    bool include_los = true;             // direct Tx-Rx component when user-user LOS exists
    ForwardOptions forwarding;

    double min_power_floor_w() const;
    void validate() const;               // a_near < a_far <= 2, max_bounces >= 1
};

struct PathRecord {
    std::vector<LinkIndex> trace;  // ordered links, no repetition
    double power_w = 0.0;
    double delay_s = 0.0;
    Vec3 arrival;                  // unit, receiver toward the last scatterer
    double phase_radians = 0.0;    // delay-derived, plus explicit phase overrides
};

struct PowerDelayProfile {
    std::vector<PathRecord> entries;

    double total_power_w() const;
    bool empty() const { return entries.empty(); }
    std::size_t size() const { return entries.size(); }
};

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);

// Free-space style loss of one link in dB, including the near-LOS factor;
// the spreading exponent follows the near/far-field rule for the hop length.
double link_loss_db(const Link& link, const ChannelParams& params);

// Depth-bounded traversal from every Tx first-contact tile, applying the
// router-model forwarding at each tile. Per-path power uses per-hop spreading
// terms for collimating tiles and one summed-length term across each maximal
// run of plain reflections; paths below the floor are pruned. A direct Tx-Rx
// component joins the profile when user-user LOS exists (and include_los).
PowerDelayProfile compute_pdp(const PweGraph& graph, const Configuration& config,
                              const std::string& tx_user, const std::string& rx_user,
                              const ChannelParams& params);

// R_sigma = sqrt(mean(tau^2) - mean(tau)^2) with power-weighted moments.
double rms_delay_spread(const PowerDelayProfile& pdp);

// Per-path shift f_k = (f/c) (v . u_k); spread is max - min across paths,
// or |f_1| for a single path (measured against the unshifted carrier).
// window_db, when set, restricts the spread to paths within that many dB of
// the strongest one (receiver dynamic range).
double doppler_spread(const PowerDelayProfile& pdp, const Vec3& rx_velocity,
                      double frequency_hz, std::optional<double> window_db = std::nullopt);

// Stable CSV emission: path_index, power_dbm, delay_ns, arrival_x/y/z, trace.
std::string pdp_to_csv(const PowerDelayProfile& pdp, const PweGraph& graph);

}  // namespace pwe
