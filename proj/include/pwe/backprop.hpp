// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pwe/channel.hpp"

namespace pwe {

struct BackpropParams {
    double learning_rate = 0.05;
    int epochs = 2000;
    double tolerance = 1e-4;   // training target for the output loss
    std::uint64_t seed = 1;
};

// Feed-forward network mirroring a per-wall route: one layer per wall, one
// neuron per tile, linear-ramp (relu) activations. Weights are trained by
// gradient descent on the squared error of the output power pattern.
class RampNetwork {
  public:
    RampNetwork(std::vector<int> layer_sizes, std::uint64_t seed);

    int layers() const { return static_cast<int>(sizes_.size()); }
    const std::vector<int>& sizes() const { return sizes_; }
    std::vector<double>& weights() { return w_; }
    const std::vector<double>& weights() const { return w_; }
    // Weight from neuron i of layer l to neuron j of layer l+1.
    double weight(int l, int j, int i) const { return w_[offset_[l] + j * sizes_[l] + i]; }
    double& weight(int l, int j, int i) { return w_[offset_[l] + j * sizes_[l] + i]; }

    std::vector<std::vector<double>> forward(const std::vector<double>& input) const;
    double loss(const std::vector<double>& input, const std::vector<double>& target) const;
    // Analytic gradient of loss with respect to every weight (flat layout).
    std::vector<double> gradient(const std::vector<double>& input,
                                 const std::vector<double>& target) const;
    void train(const std::vector<double>& input, const std::vector<double>& target,
               const BackpropParams& params, double* final_loss, bool* converged);

  private:
    std::vector<int> sizes_;
    std::vector<int> offset_;  // flat offset of each weight matrix
    std::vector<double> w_;
};

struct BackpropResult {
    Configuration config;
    bool converged = false;   // false is a warning, the best effort still applies
    double final_loss = 0.0;
};

// Trains a network over the wall route (layers of tile ids, transmitter side
// first) toward the target receiver-side power pattern, then maps every
// trained neuron to the codebook function whose port-level scattering
// profile best matches its outgoing weights (cosine similarity).
BackpropResult backprop_configure(const PweGraph& graph,
                                  const std::vector<std::vector<std::string>>& wall_route,
                                  const std::string& tx_id, const std::string& rx_id,
                                  const std::vector<double>& target_rx_power_pattern,
                                  const BackpropParams& tparams, const ChannelParams& params);

}  // namespace pwe
