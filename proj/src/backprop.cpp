// SPDX-License-Identifier: Apache-2.0
#include "pwe/backprop.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "pwe/errors.hpp"
#include "pwe/pathfind.hpp"

namespace pwe {

namespace {
double relu(double x) { return x > 0 ? x : 0; }
}

RampNetwork::RampNetwork(std::vector<int> layer_sizes, std::uint64_t seed)
    : sizes_(std::move(layer_sizes)) {
    if (sizes_.size() < 2) throw Error("network needs at least two layers");
    int total = 0;
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
        offset_.push_back(total);
        total += sizes_[l] * sizes_[l + 1];
    }
    w_.resize(total);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.05, 0.5);
    for (double& v : w_) v = uni(rng);
}

std::vector<std::vector<double>> RampNetwork::forward(const std::vector<double>& input) const {
    std::vector<std::vector<double>> acts{input};
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
        std::vector<double> next(sizes_[l + 1], 0.0);
        for (int j = 0; j < sizes_[l + 1]; ++j) {
            double s = 0.0;
            for (int i = 0; i < sizes_[l]; ++i) s += weight(l, j, i) * acts[l][i];
            next[j] = relu(s);
        }
        acts.push_back(std::move(next));
    }
    return acts;
}

double RampNetwork::loss(const std::vector<double>& input,
                         const std::vector<double>& target) const {
    const auto acts = forward(input);
    const auto& out = acts.back();
    double e = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double d = out[i] - target[i];
        e += d * d;
    }
    return 0.5 * e;
}

std::vector<double> RampNetwork::gradient(const std::vector<double>& input,
                                          const std::vector<double>& target) const {
    const auto acts = forward(input);
    std::vector<double> grad(w_.size(), 0.0);

    // Backpropagate through the ramp: the subgradient at 0 is taken as 0.
    const int L = static_cast<int>(sizes_.size());
    std::vector<double> delta(sizes_[L - 1]);
    for (int i = 0; i < sizes_[L - 1]; ++i) {
        const double pre_active = acts[L - 1][i];
        delta[i] = (pre_active - target[i]) * (pre_active > 0 ? 1.0 : 0.0);
    }
    for (int l = L - 2; l >= 0; --l) {
        for (int j = 0; j < sizes_[l + 1]; ++j)
            for (int i = 0; i < sizes_[l]; ++i)
                grad[offset_[l] + j * sizes_[l] + i] = delta[j] * acts[l][i];
        if (l == 0) break;
        std::vector<double> prev(sizes_[l], 0.0);
        for (int i = 0; i < sizes_[l]; ++i) {
            double s = 0.0;
            for (int j = 0; j < sizes_[l + 1]; ++j) s += weight(l, j, i) * delta[j];
            prev[i] = s * (acts[l][i] > 0 ? 1.0 : 0.0);
        }
        delta = std::move(prev);
    }
    return grad;
}

void RampNetwork::train(const std::vector<double>& input, const std::vector<double>& target,
                        const BackpropParams& params, double* final_loss, bool* converged) {
    double best = loss(input, target);
    for (int epoch = 0; epoch < params.epochs; ++epoch) {
        const auto g = gradient(input, target);
        for (std::size_t i = 0; i < w_.size(); ++i) w_[i] -= params.learning_rate * g[i];
        best = loss(input, target);
        if (best <= params.tolerance) break;
    }
    if (final_loss) *final_loss = best;
    if (converged) *converged = best <= params.tolerance;
}

BackpropResult backprop_configure(const PweGraph& graph,
                                  const std::vector<std::vector<std::string>>& wall_route,
                                  const std::string& tx_id, const std::string& rx_id,
                                  const std::vector<double>& target_rx_power_pattern,
                                  const BackpropParams& tparams, const ChannelParams& params) {
    if (wall_route.empty()) throw EmptyWallRoute("wall route has no layers");
    for (const auto& layer : wall_route)
        if (layer.empty()) throw EmptyWallRoute("wall route has an empty layer");
    const int txi = graph.user_index(tx_id);
    const int rxi = graph.user_index(rx_id);
    if (txi < 0 || rxi < 0) throw UnknownUser("backprop endpoints missing from graph");

    std::vector<std::vector<int>> layers;
    for (const auto& wall : wall_route) {
        std::vector<int> tiles;
        for (const auto& tid : wall) {
            const int ti = graph.tile_index(tid);
            if (ti < 0) throw UnknownUser("wall route names unknown tile '" + tid + "'");
            tiles.push_back(ti);
        }
        layers.push_back(std::move(tiles));
    }
    if (target_rx_power_pattern.size() != layers.back().size())
        throw Error("target pattern length must match the last wall's tile count");

    auto link_between = [&](const NodeRef& a, int tile) -> LinkIndex {
        for (LinkIndex li : graph.tile(tile).links)
            if (graph.other_end(graph.link(li), NodeRef{NodeRef::Kind::Tile, tile}) == a)
                return li;
        return -1;
    };

    // Transmitter-side conditions: normalized incident amplitude per tile of
    // the first wall.
    const NodeRef txr{NodeRef::Kind::User, txi};
    std::vector<double> input;
    {
        double peak = 0.0;
        for (int ti : layers.front()) {
            const LinkIndex li = link_between(txr, ti);
            double v = 0.0;
            if (li >= 0) {
                const Link& l = graph.link(li);
                const double mask =
                    graph.user(txi).antenna.efficiency(graph.direction_from(txr, l));
                v = std::sqrt(std::max(0.0, mask * l.nlos_factor) /
                              std::max(1e-12, std::pow(l.length_m, params.a_far)));
            }
            input.push_back(v);
            peak = std::max(peak, v);
        }
        if (peak > 0)
            for (double& v : input) v /= peak;
    }

    BackpropResult result;

    if (layers.size() == 1) {
        // Single wall: the route is a direct reflection layer; neurons map
        // against the target pattern itself.
        const NodeRef rxr{NodeRef::Kind::User, rxi};
        for (std::size_t i = 0; i < layers[0].size(); ++i) {
            if (target_rx_power_pattern[i] <= 0.0 || input[i] <= 0.0) continue;
            const int ti = layers[0][i];
            const LinkIndex in = link_between(txr, ti);
            const LinkIndex out = link_between(rxr, ti);
            if (in < 0 || out < 0) continue;
            Configuration& cfg = result.config;
            commit_path_steers(graph, {in, out}, cfg);
        }
        result.converged = true;
        result.final_loss = 0.0;
        if (result.config.assignment.empty())
            throw NoFeasiblePath("single-wall route has no serviceable tile");
        return result;
    }

    std::vector<int> sizes;
    for (const auto& l : layers) sizes.push_back(static_cast<int>(l.size()));
    RampNetwork net(sizes, tparams.seed);

    // Normalize the target to the activation scale.
    std::vector<double> target = target_rx_power_pattern;
    {
        double peak = 0.0;
        for (double v : target) peak = std::max(peak, v);
        if (peak > 0)
            for (double& v : target) v /= peak;
    }

    net.train(input, target, tparams, &result.final_loss, &result.converged);
    const auto acts = net.forward(input);

    // Map neurons to steer functions: candidate profiles toward the next
    // layer are unit vectors scaled by the steer efficiency, so the maximal
    // cosine picks the strongest positive outgoing weight.
    const NodeRef rxr{NodeRef::Kind::User, rxi};
    for (std::size_t l = 0; l < layers.size(); ++l) {
        for (std::size_t i = 0; i < layers[l].size(); ++i) {
            if (acts[l][i] <= 1e-9) continue;  // silent neuron stays deactivated
            const int ti = layers[l][i];

            LinkIndex in = -1;
            if (l == 0) {
                in = link_between(txr, ti);
            } else {
                // Strongest contributor from the previous layer.
                double best = 0.0;
                int from = -1;
                for (std::size_t j = 0; j < layers[l - 1].size(); ++j) {
                    const double c = net.weight(static_cast<int>(l - 1), static_cast<int>(i),
                                                static_cast<int>(j)) *
                                     acts[l - 1][j];
                    if (c > best) {
                        best = c;
                        from = layers[l - 1][j];
                    }
                }
                if (from >= 0) in = link_between(NodeRef{NodeRef::Kind::Tile, from}, ti);
            }
            if (in < 0) continue;

            LinkIndex out = -1;
            if (l + 1 == layers.size()) {
                out = link_between(rxr, ti);
                if (target[i] <= 0.0) continue;
            } else {
                double best = 0.0;
                int to = -1;
                for (std::size_t j = 0; j < layers[l + 1].size(); ++j) {
                    const double wj =
                        net.weight(static_cast<int>(l), static_cast<int>(j),
                                   static_cast<int>(i));
                    if (wj > best) {
                        best = wj;
                        to = layers[l + 1][j];
                    }
                }
                if (to >= 0) out = link_between(NodeRef{NodeRef::Kind::Tile, to}, ti);
            }
            if (out < 0) continue;
            commit_path_steers(graph, {in, out}, result.config);
        }
    }
    return result;
}

}  // namespace pwe
