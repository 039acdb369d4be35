#pragma once

// One passive-beamforming step per IRS variant.

#include "irswpt/core.hpp"
#include "irswpt/quartic.hpp"
#include "irswpt/rectenna.hpp"
#include "irswpt/solvers.hpp"

#include <vector>

namespace irswpt {

/// theta_ext = [theta, 1] for an FF configuration, as a row stored in a vector.
inline CVector extended_flat_phases(const PhaseConfig& phases) {
  require(!phases.selective_mode(), "expected an FF phase configuration");
  CVector t(phases.elements() + 1);
  t.head(phases.elements()) = phases.row(0);
  t[phases.elements()] = 1.0;
  return t;
}

struct FfStepResult {
  PhaseConfig phases;
  SdpSolution sdp;
  bool randomized = false;     // extraction used Gaussian randomization
  bool kept_previous = false;  // new candidate was worse than the incumbent
  double current = 0.0;        // weighted-sum current at the returned phases
};

struct FfStepOptions {
  SdpOptions sdp;
  int randomization_candidates = 1000;
};

inline FfStepResult ff_step(const ChannelRealization& ch, const Waveform& s,
                            const PhaseConfig& previous, const std::vector<double>& weights,
                            const RectennaParams& params, Rng& rng,
                            const FfStepOptions& options = {}) {
  require(!previous.selective_mode() && previous.elements() == ch.elements(),
          "ff_step needs an FF configuration with L phases");
  const CVector theta_prev = extended_flat_phases(previous);
  std::vector<BlockBank> banks;
  std::vector<CVector> d_prev;
  for (int q = 0; q < ch.users(); ++q) {
    banks.push_back(build_D_bank(build_z_rows(ch, q, s)));
    d_prev.push_back(compute_coefficients(banks.back(), theta_prev));
  }
  const CMatrix k1 = build_K1(banks, d_prev, weights, params);

  SdpOptions sdp_opt = options.sdp;
  sdp_opt.warm_start = theta_prev.conjugate();
  FfStepResult out;
  out.sdp = solve_unit_diag_sdp(k1, sdp_opt);

  // X ~ u u^H with u = theta^H, so phases come back conjugated.
  auto to_phases = [](const CVector& u) {
    return PhaseConfig::flat(normalize_by_auxiliary(u.conjugate()));
  };
  auto evaluate = [&](const CVector& u) {
    return weighted_sum_idc(s, to_phases(u), ch, params, weights);
  };
  const RandomizationOutcome pick =
      gaussian_randomization(out.sdp, evaluate, options.randomization_candidates, rng);
  out.randomized = pick.randomized;
  out.phases = to_phases(pick.vector);
  out.current = pick.value;

  const double before = weighted_sum_idc(s, previous, ch, params, weights);
  if (out.current < before) {
    out.phases = previous;
    out.current = before;
    out.kept_previous = true;
  }
  return out;
}

/// One ascending sweep of theta_m <- exp(-j arg C_m), C_m = sum_{j != m}
/// K_mj conj(theta_j), maximizing theta K theta^H for a dense Hermitian K.
/// The optional callback sees the objective after every update.
inline CVector ewu_sweep(const CMatrix& k, CVector theta,
                         const std::function<void(double)>& after_update = nullptr) {
  require(k.rows() == k.cols() && k.rows() == theta.size(), "EWU dimension mismatch");
  const Eigen::Index m = k.rows();
  for (Eigen::Index i = 0; i < m; ++i) {
    cdouble c = 0.0;
    for (Eigen::Index j = 0; j < m; ++j)
      if (j != i) c += k(i, j) * std::conj(theta[j]);
    if (std::abs(c) >= 1e-14) theta[i] = std::polar(1.0, -std::arg(c));
    if (after_update) after_update((theta.transpose() * k * theta.conjugate())(0, 0).real());
  }
  return theta;
}

struct FsStepResult {
  PhaseConfig phases;  // N x L after dividing each block by its auxiliary entry
  CVector auxiliary;   // m_n per subcarrier
  CMatrix raw;         // N x (L+1) sweep output before normalization
};

/// theta rows [theta_n, m_n] with every auxiliary entry set to 1.
inline CMatrix extended_selective_phases(const PhaseConfig& phases, int n_sub) {
  require(phases.selective_mode() && phases.theta.rows() == n_sub,
          "expected an FS phase configuration with N rows");
  CMatrix t(n_sub, phases.elements() + 1);
  t.leftCols(phases.elements()) = phases.theta;
  t.col(phases.elements()).setOnes();
  return t;
}

/// EWU sweep over the N(L+1) FS variables on K = -K2, held implicitly.
/// Per-user composite tones x_{q,n} and G_{q,n} = sum_n' g_q(n,n') conj(x_{q,n'})
/// are updated incrementally, so each coordinate costs O(K N).
inline CMatrix ewu_sweep_implicit(const ImplicitK2& k2, CMatrix theta) {
  const int n_sub = k2.subcarriers(), m = k2.block(), users = k2.users();
  require(theta.rows() == n_sub && theta.cols() == m, "theta shape does not match K2 blocks");
  std::vector<CMatrix> g(static_cast<std::size_t>(users));
  std::vector<CVector> x(static_cast<std::size_t>(users)), big_g(static_cast<std::size_t>(users));
  for (int q = 0; q < users; ++q) {
    CMatrix& gq = g[static_cast<std::size_t>(q)];
    gq.resize(n_sub, n_sub);
    for (int a = 0; a < n_sub; ++a)
      for (int b = 0; b < n_sub; ++b) gq(a, b) = k2.g(q, a, b);
    x[static_cast<std::size_t>(q)] = phased_tones(k2.z(q), theta);
    big_g[static_cast<std::size_t>(q)] = gq * x[static_cast<std::size_t>(q)].conjugate();
  }
  for (int n = 0; n < n_sub; ++n) {
    for (int a = 0; a < m; ++a) {
      cdouble c = 0.0;
      for (int q = 0; q < users; ++q) {
        const double w = k2.weight(q);
        if (w == 0.0) continue;
        const auto qi = static_cast<std::size_t>(q);
        const cdouble zq = k2.z(q)(n, a);
        const double diag = w * g[qi](n, n).real() * std::norm(zq);
        c -= w * zq * big_g[qi][n] - diag * std::conj(theta(n, a));
      }
      if (std::abs(c) < 1e-14) continue;
      const cdouble updated = std::polar(1.0, -std::arg(c));
      const cdouble delta = updated - theta(n, a);
      theta(n, a) = updated;
      for (int q = 0; q < users; ++q) {
        const auto qi = static_cast<std::size_t>(q);
        const cdouble dz = delta * k2.z(q)(n, a);
        x[qi][n] += dz;
        big_g[qi] += g[qi].col(n) * std::conj(dz);
      }
    }
  }
  return theta;
}

inline FsStepResult fs_ewu_step(const ChannelRealization& ch, const Waveform& s,
                                const PhaseConfig& previous, const std::vector<double>& weights,
                                const RectennaParams& params) {
  const int n_sub = ch.subcarriers(), l = ch.elements();
  require(previous.elements() == l, "phase count does not match L");
  const CMatrix theta_prev = extended_selective_phases(previous, n_sub);
  std::vector<CMatrix> z;
  std::vector<CVector> e_prev;
  for (int q = 0; q < ch.users(); ++q) {
    z.push_back(build_z_rows(ch, q, s));
    e_prev.push_back(e_coefficients(z.back(), theta_prev));
  }
  const ImplicitK2 k2(std::move(z), e_prev, weights, params);
  FsStepResult out;
  out.raw = ewu_sweep_implicit(k2, theta_prev);
  out.auxiliary = out.raw.col(l);
  CMatrix phases(n_sub, l);
  for (int n = 0; n < n_sub; ++n)
    for (int e = 0; e < l; ++e) phases(n, e) = unit_phasor(out.raw(n, e) / out.auxiliary[n]);
  out.phases = PhaseConfig::selective(phases);
  return out;
}

/// Absorbs the auxiliary entries into the waveform: s_n * m_n. Together with
/// the normalized phases this reproduces the swept composite tones exactly.
inline Waveform absorb_auxiliary(const Waveform& s, const CVector& auxiliary) {
  require(s.size() == auxiliary.size(), "auxiliary length != N");
  return s.cwiseProduct(auxiliary);
}

struct SuFsPhases {
  RVector gamma;      // waveform phases, length N
  PhaseConfig psi;    // FS configuration, N x L
};

/// gamma_n = -arg h_d,n; psi_{n,l} = -(gamma_n + arg h_i + arg h_r).
inline SuFsPhases su_fs_phases(const ChannelRealization& ch) {
  require(ch.users() == 1, "closed-form FS phases are single-user only");
  const int n_sub = ch.subcarriers(), l = ch.elements();
  SuFsPhases out;
  out.gamma.resize(n_sub);
  CMatrix psi(n_sub, l);
  const CMatrix& refl = ch.reflected.front();
  for (int n = 0; n < n_sub; ++n) {
    out.gamma[n] = -std::arg(ch.direct(0, n));
    for (int e = 0; e < l; ++e)
      psi(n, e) = std::polar(1.0, -(out.gamma[n] + std::arg(ch.incident(n, e)) +
                                    std::arg(refl(n, e))));
  }
  out.psi = PhaseConfig::selective(psi);
  return out;
}

/// A_n = |h_d,n| + sum_l |h_r||h_i|.
inline RVector aligned_amplitudes(const ChannelRealization& ch) {
  require(ch.users() == 1, "aligned amplitudes are single-user only");
  RVector a(ch.subcarriers());
  for (int n = 0; n < ch.subcarriers(); ++n) {
    double acc = std::abs(ch.direct(0, n));
    for (int e = 0; e < ch.elements(); ++e)
      acc += std::abs(ch.reflected.front()(n, e)) * std::abs(ch.incident(n, e));
    a[n] = acc;
  }
  return a;
}

}  // namespace irswpt
