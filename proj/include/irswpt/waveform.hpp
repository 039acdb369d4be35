#pragma once

// Waveform subproblem: one linearized step for any number of users, and the
// single-user power allocation loop over aligned real amplitudes.

#include "irswpt/core.hpp"
#include "irswpt/quartic.hpp"
#include "irswpt/rectenna.hpp"
#include "irswpt/solvers.hpp"

#include <cmath>
#include <vector>

namespace irswpt {

struct WaveformStepResult {
  Waveform s;
  double lambda_min = 0.0;  // smallest eigenvalue of K3
  double surrogate = 0.0;   // s^H K3 s = 2P lambda_min for a regular step
  bool degenerate = false;  // lambda_min >= 0; previous waveform returned
};

inline WaveformStepResult waveform_step(const std::vector<CVector>& channels,
                                        const std::vector<CVector>& b_prev, const Waveform& previous,
                                        const std::vector<double>& weights, double power_w,
                                        const RectennaParams& params) {
  require(!channels.empty(), "need at least one user channel");
  require_arg(power_w > 0.0, "power must be positive");
  std::vector<DiagonalBank> banks;
  for (const auto& h : channels) banks.push_back(build_B_bank(h));
  const CMatrix k3 = build_K3(banks, b_prev, weights, params);
  const auto pair = smallest_eigenpair(k3);
  WaveformStepResult out;
  out.lambda_min = pair.value;
  if (pair.value >= 0.0) {
    out.s = previous;
    out.surrogate = (previous.adjoint() * k3 * previous)(0, 0).real();
    out.degenerate = true;
    return out;
  }
  out.s = std::sqrt(2.0 * power_w) * pair.vector;
  out.surrogate = 2.0 * power_w * pair.value;
  return out;
}

/// Linearizes at the previous waveform over the supplied channels.
inline WaveformStepResult waveform_step(const std::vector<CVector>& channels, const Waveform& previous,
                                        const std::vector<double>& weights, double power_w,
                                        const RectennaParams& params) {
  std::vector<CVector> b_prev;
  for (const auto& h : channels) b_prev.push_back(correlation_coefficients(received_tones(previous, h)));
  return waveform_step(channels, b_prev, previous, weights, power_w, params);
}

struct PowerAllocation {
  RVector p;                  // amplitudes w_n, ||p||^2 = 2P
  std::vector<double> trace;  // current after each iteration, trace[0] initial
  int iterations = 0;
  bool converged = false;
};

// kStrongest puts all power on the largest amplitude, a fixed point of the
// iteration that is sometimes better than where the uniform start ends up.
enum class PowerInit { kUniform, kRandom, kStrongest };

/// Current of amplitudes p over real channel amplitudes A.
inline double real_idc(const RVector& amplitudes, const RVector& p, const RectennaParams& params) {
  const RVector b = real_coefficients(amplitudes, p);
  double tail = 0.0;
  for (Eigen::Index k = 1; k < b.size(); ++k) tail += b[k] * b[k];
  return 0.5 * params.k2 * b[0] + 0.375 * params.k4 * b[0] * b[0] + 0.75 * params.k4 * tail;
}

inline PowerAllocation su_power_allocation(const RVector& amplitudes, double power_w,
                                           const RectennaParams& params, double epsilon,
                                           int max_iterations, PowerInit init = PowerInit::kUniform,
                                           Rng* rng = nullptr) {
  const Eigen::Index n = amplitudes.size();
  require_arg(n >= 1, "need at least one subcarrier");
  require_arg(power_w > 0.0 && epsilon > 0.0 && max_iterations >= 1,
              "invalid power allocation parameters");
  require_arg((amplitudes.array() >= 0.0).all(), "aligned amplitudes must be non-negative");
  require_arg(amplitudes.maxCoeff() > 0.0, "aligned amplitudes are all zero");

  PowerAllocation out;
  if (init == PowerInit::kRandom) {
    require_arg(rng != nullptr, "random initialization needs an RNG");
    std::uniform_real_distribution<double> u(0.0, 1.0);
    out.p.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) out.p[i] = u(*rng);
    out.p *= std::sqrt(2.0 * power_w) / out.p.norm();
  } else if (init == PowerInit::kStrongest) {
    Eigen::Index best = 0;
    amplitudes.maxCoeff(&best);
    out.p = RVector::Zero(n);
    out.p[best] = std::sqrt(2.0 * power_w);
  } else {
    out.p = RVector::Constant(n, std::sqrt(2.0 * power_w / static_cast<double>(n)));
  }
  double current = real_idc(amplitudes, out.p, params);
  out.trace.push_back(current);
  for (int it = 1; it <= max_iterations; ++it) {
    const RMatrix k4 = build_K4(amplitudes, real_coefficients(amplitudes, out.p), params);
    const auto pair = smallest_eigenpair(k4);
    if (pair.value >= 0.0) break;
    // K4 has non-positive entries, so the minimizing eigenvector can be
    // taken entrywise non-negative.
    const RVector p_new = std::sqrt(2.0 * power_w) * pair.vector.cwiseAbs();
    const double next = real_idc(amplitudes, p_new, params);
    out.iterations = it;
    if (next < current) {  // rounding floor reached
      out.converged = current - next <= 1e-12 * current;
      break;
    }
    out.p = p_new;
    out.trace.push_back(next);
    const double change = std::abs(next - current) / std::max(std::abs(next), 1e-30);
    current = next;
    if (change <= epsilon) {
      out.converged = true;
      break;
    }
  }
  return out;
}

/// s_n = p_n conj(h_n) / |h_n|.
inline Waveform assemble_su_waveform(const RVector& p, const CVector& h) {
  require(p.size() == h.size(), "allocation and channel lengths differ");
  const double scale = p.size() > 0 ? p.cwiseAbs().maxCoeff() : 0.0;
  Waveform s(p.size());
  for (Eigen::Index n = 0; n < p.size(); ++n) {
    const double mag = std::abs(h[n]);
    if (mag == 0.0) {
      require(std::abs(p[n]) <= 1e-12 * scale, "positive power on a zero channel");
      s[n] = 0.0;
      continue;
    }
    s[n] = p[n] * std::conj(h[n]) / mag;
  }
  return s;
}

}  // namespace irswpt
