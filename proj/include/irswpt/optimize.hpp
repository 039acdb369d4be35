#pragma once

// Alternating-optimization drivers, baselines, phase quantization and the
// large-scale current approximation.

#include "irswpt/beamform.hpp"
#include "irswpt/channel.hpp"
#include "irswpt/core.hpp"
#include "irswpt/rectenna.hpp"
#include "irswpt/system.hpp"
#include "irswpt/waveform.hpp"

#include <cmath>
#include <vector>

namespace irswpt {

struct OptimizationResult {
  Waveform s;
  PhaseConfig phases;
  std::vector<double> trace;      // weighted-sum current; trace[0] is the initial point
  std::vector<double> surrogate;  // linearized waveform objective per iteration
  std::vector<bool> randomized;   // per iteration: FF extraction was randomized
  int iterations = 0;
  bool converged = false;
  int randomized_steps = 0;
  int degenerate_steps = 0;
  std::vector<double> user_currents;

  double current() const { return trace.empty() ? 0.0 : trace.back(); }
};

struct DriverOptions {
  SdpOptions sdp;
};

namespace detail {

inline double relative_change(double previous, double current) {
  const double denom = std::abs(current);
  if (denom < 1e-30) return std::abs(current - previous) < 1e-30 ? 0.0 : 1.0;
  return std::abs(current - previous) / denom;
}

inline std::vector<CVector> composite_channels(const ChannelRealization& ch, const PhaseConfig& phases) {
  std::vector<CVector> out;
  for (int q = 0; q < ch.users(); ++q) out.push_back(composite_channel(ch, phases, q));
  return out;
}

inline std::vector<CVector> direct_channels(const ChannelRealization& ch) {
  std::vector<CVector> out;
  for (int q = 0; q < ch.users(); ++q) out.push_back(ch.direct.row(q).transpose());
  return out;
}

inline double weighted_current(const std::vector<CVector>& channels, const Waveform& s,
                               const std::vector<double>& weights, const RectennaParams& params) {
  double total = 0.0;
  for (std::size_t q = 0; q < channels.size(); ++q)
    if (weights[q] != 0.0) total += weights[q] * idc(s, channels[q], params);
  return total;
}

inline std::vector<double> user_currents(const std::vector<CVector>& channels, const Waveform& s,
                                         const RectennaParams& params) {
  std::vector<double> out;
  for (const auto& h : channels) out.push_back(idc(s, h, params));
  return out;
}

}  // namespace detail

/// Waveform-only loop over fixed channels, starting from s0.
inline OptimizationResult run_waveform_only(const std::vector<CVector>& channels, Waveform s0,
                                            const SystemConfig& config,
                                            const RectennaParams& params) {
  OptimizationResult res;
  res.s = std::move(s0);
  double current = detail::weighted_current(channels, res.s, config.user_weights, params);
  res.trace.push_back(current);
  for (int it = 1; it <= config.max_iterations; ++it) {
    const WaveformStepResult ws =
        waveform_step(channels, res.s, config.user_weights, config.power_w, params);
    res.s = ws.s;
    res.degenerate_steps += ws.degenerate ? 1 : 0;
    const double next = detail::weighted_current(channels, res.s, config.user_weights, params);
    res.trace.push_back(next);
    res.surrogate.push_back(ws.surrogate);
    res.randomized.push_back(false);
    res.iterations = it;
    const double change = detail::relative_change(current, next);
    current = next;
    if (change <= config.tolerance) {
      res.converged = true;
      break;
    }
  }
  res.user_currents = detail::user_currents(channels, res.s, params);
  return res;
}

/// Frequency-flat IRS: SDP phase step, then waveform step, per iteration.
inline OptimizationResult run_mu_ff(const ChannelRealization& ch, const SystemConfig& config,
                                    const RectennaParams& params, Rng& rng,
                                    const DriverOptions& options = {}) {
  ch.check();
  const auto& w = config.user_weights;
  OptimizationResult res;
  res.phases = PhaseConfig::random(IrsMode::kFrequencyFlat, ch.subcarriers(), ch.elements(), rng);
  res.s = uniform_waveform(ch.subcarriers(), config.power_w);
  double current = weighted_sum_idc(res.s, res.phases, ch, params, w);
  res.trace.push_back(current);
  const FfStepOptions step_opt{options.sdp, config.randomization_candidates};
  for (int it = 1; it <= config.max_iterations; ++it) {
    const FfStepResult ff = ff_step(ch, res.s, res.phases, w, params, rng, step_opt);
    res.phases = ff.phases;
    res.randomized.push_back(ff.randomized);
    res.randomized_steps += ff.randomized ? 1 : 0;
    const auto channels = detail::composite_channels(ch, res.phases);
    const WaveformStepResult ws = waveform_step(channels, res.s, w, config.power_w, params);
    res.s = ws.s;
    res.degenerate_steps += ws.degenerate ? 1 : 0;
    const double next = detail::weighted_current(channels, res.s, w, params);
    res.trace.push_back(next);
    res.surrogate.push_back(ws.surrogate);
    res.iterations = it;
    const double change = detail::relative_change(current, next);
    current = next;
    if (change <= config.tolerance) {
      res.converged = true;
      break;
    }
  }
  res.user_currents = per_user_idc(res.s, res.phases, ch, params);
  return res;
}

/// Frequency-selective IRS: element-wise phase sweep, then waveform step.
inline OptimizationResult run_mu_fs(const ChannelRealization& ch, const SystemConfig& config,
                                    const RectennaParams& params, Rng& rng) {
  ch.check();
  const auto& w = config.user_weights;
  OptimizationResult res;
  res.phases =
      PhaseConfig::random(IrsMode::kFrequencySelective, ch.subcarriers(), ch.elements(), rng);
  res.s = uniform_waveform(ch.subcarriers(), config.power_w);
  double current = weighted_sum_idc(res.s, res.phases, ch, params, w);
  res.trace.push_back(current);
  for (int it = 1; it <= config.max_iterations; ++it) {
    const FsStepResult fs = fs_ewu_step(ch, res.s, res.phases, w, params);
    res.phases = fs.phases;
    res.s = absorb_auxiliary(res.s, fs.auxiliary);
    res.randomized.push_back(false);
    const auto channels = detail::composite_channels(ch, res.phases);
    const WaveformStepResult ws = waveform_step(channels, res.s, w, config.power_w, params);
    res.s = ws.s;
    res.degenerate_steps += ws.degenerate ? 1 : 0;
    const double next = detail::weighted_current(channels, res.s, w, params);
    res.trace.push_back(next);
    res.surrogate.push_back(ws.surrogate);
    res.iterations = it;
    const double change = detail::relative_change(current, next);
    current = next;
    if (change <= config.tolerance) {
      res.converged = true;
      break;
    }
  }
  res.user_currents = per_user_idc(res.s, res.phases, ch, params);
  return res;
}

/// Single-user FS-IRS: closed-form phases, then power allocation over the
/// aligned amplitudes from the uniform and the single-tone start, keeping
/// the better. Consumes no randomness.
inline OptimizationResult run_su_fs(const ChannelRealization& ch, const SystemConfig& config,
                                    const RectennaParams& params) {
  ch.check();
  require(ch.users() == 1, "the single-user FS design requires K = 1");
  const SuFsPhases aligned = su_fs_phases(ch);
  const RVector amplitudes = aligned_amplitudes(ch);
  PowerAllocation alloc = su_power_allocation(amplitudes, config.power_w, params, config.tolerance,
                                              config.max_iterations);
  const PowerAllocation single = su_power_allocation(amplitudes, config.power_w, params, config.tolerance,
                                                     config.max_iterations, PowerInit::kStrongest);
  if (single.trace.back() > alloc.trace.back()) alloc = single;
  OptimizationResult res;
  res.phases = aligned.psi;
  res.s = assemble_su_waveform(alloc.p, composite_channel(ch, res.phases, 0));
  res.trace = alloc.trace;
  res.randomized.assign(alloc.trace.size() - 1, false);
  res.iterations = alloc.iterations;
  res.converged = alloc.converged;
  res.user_currents = per_user_idc(res.s, res.phases, ch, params);
  const double w = config.user_weights.front();
  for (double& t : res.trace) t *= w;
  return res;
}

/// Conventional design without an IRS: waveform loop on the direct channels.
inline OptimizationResult run_no_irs(const ChannelRealization& ch, const SystemConfig& config,
                                     const RectennaParams& params) {
  ch.check();
  OptimizationResult res = run_waveform_only(detail::direct_channels(ch),
                                             uniform_waveform(ch.subcarriers(), config.power_w),
                                             config, params);
  res.phases = PhaseConfig::flat(CVector());
  return res;
}

/// One random FF configuration, then the waveform loop on it.
inline OptimizationResult run_rand_phase(const ChannelRealization& ch, const SystemConfig& config,
                                         const RectennaParams& params, Rng& rng) {
  ch.check();
  const PhaseConfig phases =
      PhaseConfig::random(IrsMode::kFrequencyFlat, ch.subcarriers(), ch.elements(), rng);
  OptimizationResult res = run_waveform_only(detail::composite_channels(ch, phases),
                                             uniform_waveform(ch.subcarriers(), config.power_w),
                                             config, params);
  res.phases = phases;
  return res;
}

enum class AssMode { kFsAligned, kNoIrs };

/// All power on the subcarrier with the largest |h_n|; scored with the
/// nonlinear model.
inline OptimizationResult run_ass(const ChannelRealization& ch, const SystemConfig& config,
                                  const RectennaParams& params, AssMode mode) {
  ch.check();
  require(ch.users() == 1, "the single-sinewave baseline requires K = 1");
  OptimizationResult res;
  CVector h;
  if (mode == AssMode::kFsAligned) {
    res.phases = su_fs_phases(ch).psi;
    h = composite_channel(ch, res.phases, 0);
  } else {
    res.phases = PhaseConfig::flat(CVector());
    h = ch.direct.row(0).transpose();
  }
  Eigen::Index best = 0;
  for (Eigen::Index n = 1; n < h.size(); ++n)
    if (std::abs(h[n]) > std::abs(h[best])) best = n;
  res.s = Waveform::Zero(h.size());
  res.s[best] = std::sqrt(2.0 * config.power_w) * unit_phasor(std::conj(h[best]));
  const double current = idc(res.s, h, params);
  res.trace = {config.user_weights.front() * current};
  res.user_currents = {current};
  res.converged = true;
  return res;
}

/// Equally spaced phase set {0, d, ..., d (2^M - 1)}, d = 2 pi / 2^M.
struct QuantizationScheme {
  int bits = 1;

  int levels() const { return 1 << bits; }
  double step() const { return kTwoPi / levels(); }
  void validate() const { require_arg(bits >= 1 && bits <= 16, "resolution bits must be in [1, 16]"); }
};

/// Nearest level on the circle; exact ties go to the smaller level.
inline double quantize_angle(double psi, const QuantizationScheme& scheme) {
  scheme.validate();
  double a = std::fmod(psi, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  const double pos = a / scheme.step();
  const long lo = static_cast<long>(std::floor(pos));
  const double frac = pos - static_cast<double>(lo);
  const long n = scheme.levels();
  const long lo_idx = ((lo % n) + n) % n;
  const long hi_idx = (lo_idx + 1) % n;
  long idx;
  if (std::abs(frac - 0.5) <= 1e-12)
    idx = std::min(lo_idx, hi_idx);
  else
    idx = frac < 0.5 ? lo_idx : hi_idx;
  return static_cast<double>(idx) * scheme.step();
}

inline PhaseConfig quantize_phases(const PhaseConfig& phases, const QuantizationScheme& scheme) {
  PhaseConfig out = phases;
  for (Eigen::Index i = 0; i < out.theta.size(); ++i)
    out.theta.data()[i] = std::polar(1.0, quantize_angle(std::arg(phases.theta.data()[i]), scheme));
  return out;
}

/// k2 P Lam + 3/2 k4 P^2 Lam^2 + 3 k4 P^2 Lam^2 N with Lam = Ld + Li Lr L^2.
inline double large_scale_idc(double lambda_d, double lambda_i, double lambda_r, int elements,
                              int subcarriers, double power_w, const RectennaParams& params) {
  require_arg(lambda_d >= 0.0 && lambda_i >= 0.0 && lambda_r >= 0.0, "gains must be non-negative");
  const double l2 = static_cast<double>(elements) * elements;
  const double lam = lambda_d + lambda_i * lambda_r * l2;
  const double p2 = power_w * power_w;
  return params.k2 * power_w * lam + 1.5 * params.k4 * p2 * lam * lam +
         3.0 * params.k4 * p2 * lam * lam * subcarriers;
}

}  // namespace irswpt
