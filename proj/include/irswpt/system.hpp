#pragma once

#include "irswpt/core.hpp"

#include <numeric>
#include <vector>

namespace irswpt {

/// Dimensions, power budget and iteration controls shared by every module.
struct SystemConfig {
  int subcarriers = 16;           // N
  int elements = 20;              // L
  int users = 1;                  // K
  double power_w = dbm_to_watts(36.0);
  double carrier_hz = 5.18e9;
  double bandwidth_hz = 10e6;
  std::vector<double> user_weights{1.0};  // xi_q, one per user
  double tolerance = 1e-4;        // relative-change stopping threshold
  int max_iterations = 200;
  int randomization_candidates = 1000;

  double subcarrier_spacing() const {
    return bandwidth_hz / static_cast<double>(subcarriers);
  }

  /// Resizes the weight list to K entries of 1 when it does not match.
  void reset_weights() { user_weights.assign(static_cast<std::size_t>(users), 1.0); }

  void validate() const {
    require_arg(subcarriers >= 1, "subcarriers must be >= 1");
    require_arg(elements >= 1, "elements must be >= 1");
    require_arg(users >= 1, "users must be >= 1");
    require_arg(power_w > 0.0, "power must be positive");
    require_arg(bandwidth_hz > 0.0, "bandwidth must be positive");
    require_arg(carrier_hz > 0.0, "carrier must be positive");
    require_arg(static_cast<int>(user_weights.size()) == users,
                "user_weights must have one entry per user");
    bool any_positive = false;
    for (double w : user_weights) {
      require_arg(w >= 0.0, "user weights must be non-negative");
      any_positive = any_positive || w > 0.0;
    }
    require_arg(any_positive, "at least one user weight must be positive");
    require_arg(tolerance > 0.0, "tolerance must be positive");
    require_arg(max_iterations >= 1, "max_iterations must be >= 1");
    require_arg(randomization_candidates >= 1,
                "randomization_candidates must be >= 1");
  }
};

}  // namespace irswpt
