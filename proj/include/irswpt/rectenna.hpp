#pragma once

// Truncated (4th order) diode model of the harvested DC current.

#include "irswpt/channel.hpp"
#include "irswpt/core.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace irswpt {

struct RectennaParams {
  // Diode parameters are kept for reference; k2 and k4 drive the model.
  double i_s = 5e-6;
  double n_prime = 1.05;
  double v_t = 25.86e-3;
  double r_ant = 50.0;
  double k2 = 0.17;
  double k4 = 957.25;
  int truncation_order = 4;

  /// beta_i = i_s / (i! (n' v_t)^i), k_i = beta_i R_ant^(i/2).
  static RectennaParams from_diode(double i_s, double n_prime, double v_t, double r_ant) {
    RectennaParams p;
    p.i_s = i_s;
    p.n_prime = n_prime;
    p.v_t = v_t;
    p.r_ant = r_ant;
    const double nvt = n_prime * v_t;
    p.k2 = i_s / (2.0 * nvt * nvt) * r_ant;
    p.k4 = i_s / (24.0 * std::pow(nvt, 4)) * r_ant * r_ant;
    return p;
  }

  void validate() const {
    require_arg(k2 > 0.0 && k4 > 0.0, "k2 and k4 must be positive");
    require_arg(truncation_order == 4, "only truncation order 4 is supported");
  }
};

/// Complex per-subcarrier weights s_n. Power is 0.5 * ||s||^2.
using Waveform = CVector;

inline double waveform_power(const Waveform& s) { return 0.5 * s.squaredNorm(); }

inline Waveform uniform_waveform(int n, double power_w) {
  return Waveform::Constant(n, cdouble(std::sqrt(2.0 * power_w / n), 0.0));
}

enum class IrsMode { kFrequencyFlat, kFrequencySelective };

/// IRS reflection phasors. FF stores a 1 x L row, FS stores N x L.
struct PhaseConfig {
  IrsMode mode = IrsMode::kFrequencyFlat;
  CMatrix theta;

  static PhaseConfig flat(const CVector& phasors) {
    return {IrsMode::kFrequencyFlat, phasors.transpose()};
  }
  static PhaseConfig selective(CMatrix phasors) {
    return {IrsMode::kFrequencySelective, std::move(phasors)};
  }
  static PhaseConfig flat_angles(const RVector& psi) {
    CVector t(psi.size());
    for (Eigen::Index l = 0; l < psi.size(); ++l) t[l] = std::polar(1.0, psi[l]);
    return flat(t);
  }
  static PhaseConfig random(IrsMode mode, int n, int l, Rng& rng) {
    const int rows = mode == IrsMode::kFrequencyFlat ? 1 : n;
    CMatrix t(rows, l);
    for (int r = 0; r < rows; ++r)
      for (int e = 0; e < l; ++e) t(r, e) = std::polar(1.0, sample_uniform_phase(rng));
    return {mode, t};
  }
  static PhaseConfig ones(IrsMode mode, int n, int l) {
    return {mode, CMatrix::Ones(mode == IrsMode::kFrequencyFlat ? 1 : n, l)};
  }

  int elements() const { return static_cast<int>(theta.cols()); }
  bool selective_mode() const { return mode == IrsMode::kFrequencySelective; }

  /// Phasor applied by element l on subcarrier n.
  cdouble at(int n, int l) const { return selective_mode() ? theta(n, l) : theta(0, l); }

  /// Row of phasors used on subcarrier n.
  CVector row(int n) const {
    return (selective_mode() ? theta.row(n) : theta.row(0)).transpose();
  }

  double max_modulus_error() const {
    double err = 0.0;
    for (Eigen::Index i = 0; i < theta.size(); ++i)
      err = std::max(err, std::abs(std::abs(theta.data()[i]) - 1.0));
    return err;
  }
};

/// h_{q,n} = h_d + sum_l h_r theta h_i.
inline CVector composite_channel(const ChannelRealization& ch, const PhaseConfig& phases,
                                 int user) {
  require(user >= 0 && user < ch.users(), "user index out of range");
  require(phases.elements() == ch.elements(), "phase count does not match L");
  require(!phases.selective_mode() || phases.theta.rows() == ch.subcarriers(),
          "FS phase configuration must have N rows");
  const CMatrix& refl = ch.reflected[static_cast<std::size_t>(user)];
  const int n_sub = ch.subcarriers();
  CVector h(n_sub);
  for (int n = 0; n < n_sub; ++n) {
    cdouble acc = ch.direct(user, n);
    for (int l = 0; l < ch.elements(); ++l) acc += refl(n, l) * phases.at(n, l) * ch.incident(n, l);
    h[n] = acc;
  }
  return h;
}

namespace detail {

inline double checked_real(cdouble value, double scale, const char* what) {
  if (std::abs(value.imag()) > 1e-8 * std::max(scale, 1e-300))
    throw NumericalError(std::string(what) + ": imaginary residue above tolerance");
  return value.real();
}

}  // namespace detail

/// b_k = sum_n conj(x_n) x_{n+k} with x_n = h_n s_n.
inline CVector correlation_coefficients(const CVector& x) {
  const Eigen::Index n = x.size();
  CVector b = CVector::Zero(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    cdouble acc = 0.0;
    for (Eigen::Index i = 0; i + k < n; ++i) acc += std::conj(x[i]) * x[i + k];
    b[k] = acc;
  }
  if (n > 0) b[0] = b[0].real();
  return b;
}

inline CVector received_tones(const Waveform& s, const CVector& h) {
  require(s.size() == h.size(), "waveform and channel lengths differ");
  return h.cwiseProduct(s);
}

/// Quadruple-sum evaluation; an oracle for N <= 16.
inline double idc_direct(const Waveform& s, const CVector& h, const RectennaParams& params) {
  const CVector x = received_tones(s, h);
  const int n = static_cast<int>(x.size());
  require(n <= 16, "idc_direct enumerates quadruples only for N <= 16");
  double second = 0.0;
  for (int i = 0; i < n; ++i) second += std::norm(x[i]);
  cdouble fourth = 0.0;
  double scale = 0.0;
  for (int n1 = 0; n1 < n; ++n1)
    for (int n2 = 0; n2 < n; ++n2)
      for (int n3 = 0; n3 < n; ++n3) {
        const int n4 = n1 + n3 - n2;
        if (n4 < 0 || n4 >= n) continue;
        const cdouble term = x[n1] * std::conj(x[n2]) * x[n3] * std::conj(x[n4]);
        fourth += term;
        scale += std::abs(term);
      }
  const double quartic = detail::checked_real(fourth, scale, "idc_direct");
  return 0.5 * params.k2 * second + 0.375 * params.k4 * quartic;
}

inline double idc_compact(const CVector& b, const RectennaParams& params) {
  if (b.size() == 0) return 0.0;
  const double b0 = detail::checked_real(b[0], std::abs(b[0]), "idc_compact");
  require(b0 >= -1e-12 * std::max(1.0, std::abs(b0)), "b_0 must be non-negative");
  double tail = 0.0;
  for (Eigen::Index k = 1; k < b.size(); ++k) tail += std::norm(b[k]);
  return 0.5 * params.k2 * b0 + 0.375 * params.k4 * b0 * b0 + 0.75 * params.k4 * tail;
}

/// Current through the O(N^2) correlation path; valid for any N.
inline double idc(const Waveform& s, const CVector& h, const RectennaParams& params) {
  return idc_compact(correlation_coefficients(received_tones(s, h)), params);
}

/// Time average of k2 y^2 + k4 y^4 over one period. The tones sit on a
/// virtual carrier at offset N (in units of the spacing) so that the
/// sampled passband signal averages exactly.
inline double idc_time_oracle(const Waveform& s, const CVector& h, const RectennaParams& params,
                              int n_samples = 100000) {
  const CVector x = received_tones(s, h);
  const int n = static_cast<int>(x.size());
  const int carrier = std::max(n, 1);
  require_arg(n_samples >= 10000, "time oracle needs at least 1e4 samples");
  require_arg(n_samples > 4 * (carrier + n), "too few samples for exact averaging");
  double acc2 = 0.0, acc4 = 0.0;
  for (int t = 0; t < n_samples; ++t) {
    double y = 0.0;
    for (int i = 0; i < n; ++i) {
      const double phase = kTwoPi * static_cast<double>((carrier + i) * static_cast<long long>(t) %
                                                        n_samples) / n_samples;
      y += x[i].real() * std::cos(phase) - x[i].imag() * std::sin(phase);
    }
    const double y2 = y * y;
    acc2 += y2;
    acc4 += y2 * y2;
  }
  return (params.k2 * acc2 + params.k4 * acc4) / n_samples;
}

inline std::vector<double> per_user_idc(const Waveform& s, const PhaseConfig& phases,
                                        const ChannelRealization& ch,
                                        const RectennaParams& params) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(ch.users()));
  for (int q = 0; q < ch.users(); ++q)
    out.push_back(idc(s, composite_channel(ch, phases, q), params));
  return out;
}

inline double weighted_sum_idc(const Waveform& s, const PhaseConfig& phases,
                               const ChannelRealization& ch, const RectennaParams& params,
                               const std::vector<double>& weights) {
  require(static_cast<int>(weights.size()) == ch.users(), "one weight per user required");
  double total = 0.0;
  for (int q = 0; q < ch.users(); ++q) {
    if (weights[static_cast<std::size_t>(q)] == 0.0) continue;
    total += weights[static_cast<std::size_t>(q)] * idc(s, composite_channel(ch, phases, q), params);
  }
  return total;
}

}  // namespace irswpt
