// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <iosfwd>
#include <string>

#include "pwe/scenario.hpp"

namespace pwe {

// One request record (a single JSON line) against a fixed graph snapshot.
// Fields: tx_id, rx_id, optional overrides (tile -> steer descriptor or
// "absorb"), optional rx_position [x,y,z]. The response carries status and
// delay-ascending entries {power_dbm, delay_ns, arrival}.
std::string handle_pdp_request(const PweGraph& graph, const Configuration& base_config,
                               const ChannelParams& params, const std::string& request_line);

// Newline-delimited request/response service over TCP. Blocks until
// stop becomes true (checked between accepts). Returns the bound port.
int serve_pdp(const PweGraph& graph, const Configuration& config, const ChannelParams& params,
              const std::string& host, int port, std::atomic<bool>& stop,
              std::atomic<int>* bound_port = nullptr);

// Pipe mode: one response line per request line, order preserving.
void serve_pdp_stdio(const PweGraph& graph, const Configuration& config,
                     const ChannelParams& params, std::istream& in, std::ostream& out);

}  // namespace pwe
