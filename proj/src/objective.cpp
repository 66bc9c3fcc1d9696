// SPDX-License-Identifier: Apache-2.0
#include "pwe/objective.hpp"

#include "pwe/errors.hpp"

namespace pwe {

Metric metric_from_string(const std::string& name) {
    if (name == "MAX_RX_POWER") return Metric::MaxRxPower;
    if (name == "MIN_RMS_DS") return Metric::MinRmsDelaySpread;
    if (name == "MIN_DOPPLER_SPREAD") return Metric::MinDopplerSpread;
    if (name == "MIN_EAVESDROP_EXPOSURE") return Metric::MinEavesdropExposure;
    if (name == "MIN_DELAY") return Metric::MinDelay;
    throw UnknownMetric("unknown metric '" + name + "'");
}

std::string to_string(Metric m) {
    switch (m) {
        case Metric::MaxRxPower: return "MAX_RX_POWER";
        case Metric::MinRmsDelaySpread: return "MIN_RMS_DS";
        case Metric::MinDopplerSpread: return "MIN_DOPPLER_SPREAD";
        case Metric::MinEavesdropExposure: return "MIN_EAVESDROP_EXPOSURE";
        case Metric::MinDelay: return "MIN_DELAY";
    }
    return "?";
}

int comparator(const MergedFunction* f, const MergedFunction* f_star) {
    if (!f && !f_star) return 1;
    if (!f || !f_star) return 0;
    return *f == *f_star ? 1 : 0;
}

int comparator(const Configuration& cfg, const std::string& tile_id,
               const Configuration& other) {
    return comparator(cfg.find(tile_id), other.find(tile_id));
}

ObjectiveReport evaluate(const PweGraph& graph, const Configuration& config_prev,
                         const Configuration& config_now,
                         const std::vector<UserObjective>& objectives,
                         const ChannelParams& params, const ObjectiveLimits& limits) {
    ObjectiveReport rep;

    for (const auto& tile : graph.tiles()) {
        rep.touches += 1 - comparator(config_prev, tile.id, config_now);
        if (comparator(config_now.find(tile.id), nullptr)) rep.free_tiles += 1;
    }

    for (const auto& obj : objectives) {
        if (obj.metrics.empty()) throw UnknownMetric("objective with empty metric set");
        auto& values = rep.metric_values[obj.rx_id];
        PowerDelayProfile pdp;
        bool have_pdp = false;
        auto ensure_pdp = [&]() {
            if (!have_pdp) {
                pdp = compute_pdp(graph, config_now, obj.tx_id, obj.rx_id, params);
                have_pdp = true;
            }
        };
        for (Metric m : obj.metrics) {
            switch (m) {
                case Metric::MaxRxPower: {
                    ensure_pdp();
                    const double p = pdp.total_power_w();
                    values[to_string(m)] =
                        p > 0 ? watts_to_dbm(p) : params.min_power_floor_dbm;
                    break;
                }
                case Metric::MinRmsDelaySpread: {
                    ensure_pdp();
                    values[to_string(m)] = pdp.empty() ? 0.0 : rms_delay_spread(pdp);
                    break;
                }
                case Metric::MinDopplerSpread: {
                    ensure_pdp();
                    values[to_string(m)] =
                        pdp.empty() ? 0.0
                                    : doppler_spread(pdp, obj.trajectory, params.frequency_hz);
                    break;
                }
                case Metric::MinEavesdropExposure: {
                    if (obj.eavesdropper_id.empty())
                        throw UnknownMetric("MIN_EAVESDROP_EXPOSURE needs an eavesdropper id");
                    const auto eaves =
                        compute_pdp(graph, config_now, obj.tx_id, obj.eavesdropper_id, params);
                    const double p = eaves.total_power_w();
                    values[to_string(m)] =
                        p > 0 ? watts_to_dbm(p) : params.min_power_floor_dbm;
                    break;
                }
                case Metric::MinDelay: {
                    ensure_pdp();
                    double psum = 0.0, dsum = 0.0;
                    for (const auto& e : pdp.entries) {
                        psum += e.power_w;
                        dsum += e.power_w * e.delay_s;
                    }
                    values[to_string(m)] = psum > 0 ? dsum / psum : 0.0;
                    break;
                }
            }
        }
    }

    if (limits.max_touches) rep.touch_limit_ok = rep.touches <= *limits.max_touches;
    if (limits.min_free_tiles) rep.free_tile_limit_ok = rep.free_tiles >= *limits.min_free_tiles;
    return rep;
}

}  // namespace pwe
