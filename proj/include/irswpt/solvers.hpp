#pragma once

// Numerical kernels: extreme Hermitian eigenpairs, the unit-diagonal SDP
//   min Tr(K X)  s.t.  X_ii = 1, X >= 0,
// and Gaussian randomization for extracting unit-modulus vectors.

#include "irswpt/core.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>

namespace irswpt {

template <typename Scalar>
using DynMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using DynVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct EigenPair {
  double value;
  DynVector<Scalar> vector;
};

namespace detail {

template <typename Scalar>
DynMatrix<Scalar> checked_hermitian(const DynMatrix<Scalar>& h, double tol = 1e-10) {
  require(h.rows() == h.cols() && h.rows() > 0, "matrix must be square and non-empty");
  require(h.allFinite(), "matrix has non-finite entries");
  const double norm = h.norm();
  const double asym = (h - h.adjoint()).norm();
  require(asym <= tol * std::max(norm, 1e-300) || asym == 0.0, "matrix is not Hermitian");
  return (h + h.adjoint()) * 0.5;
}

/// Rotates v so its largest-magnitude entry (first on ties) is real positive.
template <typename Scalar>
void fix_phase(DynVector<Scalar>& v) {
  Eigen::Index best = 0;
  double best_abs = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v[i]);
    if (a > best_abs * (1.0 + 1e-12)) {
      best_abs = a;
      best = i;
    }
  }
  if (best_abs <= 0.0) return;
  if constexpr (std::is_same_v<Scalar, double>) {
    if (v[best] < 0.0) v = -v;
  } else {
    v *= std::conj(v[best]) / best_abs;
    v[best] = best_abs;
  }
}

}  // namespace detail

template <typename Scalar>
EigenPair<Scalar> smallest_eigenpair(const DynMatrix<Scalar>& h) {
  const DynMatrix<Scalar> sym = detail::checked_hermitian(h);
  Eigen::SelfAdjointEigenSolver<DynMatrix<Scalar>> es(sym);
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  DynVector<Scalar> v = es.eigenvectors().col(0);
  v.normalize();
  detail::fix_phase(v);
  return {es.eigenvalues()[0], v};
}

template <typename Scalar>
EigenPair<Scalar> largest_eigenpair(const DynMatrix<Scalar>& h) {
  const DynMatrix<Scalar> sym = detail::checked_hermitian(h);
  Eigen::SelfAdjointEigenSolver<DynMatrix<Scalar>> es(sym);
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  const Eigen::Index last = sym.rows() - 1;
  DynVector<Scalar> v = es.eigenvectors().col(last);
  v.normalize();
  detail::fix_phase(v);
  return {es.eigenvalues()[last], v};
}

inline EigenPair<cdouble> smallest_eigenpair(const CMatrix& h) {
  return smallest_eigenpair<cdouble>(h);
}
inline EigenPair<double> smallest_eigenpair(const RMatrix& h) {
  return smallest_eigenpair<double>(h);
}

struct KktResiduals {
  double primal = 0.0;          // max |X_ii - 1| plus PSD violation
  double dual = 0.0;            // PSD violation of Upsilon = K + diag(tau)
  double complementarity = 0.0; // ||Upsilon X||_F
  double max() const { return std::max({primal, dual, complementarity}); }
};

struct SdpSolution {
  CMatrix X;
  double objective = 0.0;
  KktResiduals kkt;
  double rank1_ratio = 0.0;  // lambda_2 / lambda_1
  int iterations = 0;
  bool converged = false;
  std::string backend;
};

enum class SdpBackend { kAuto, kAdmm, kLowRank };

struct SdpOptions {
  double tolerance = 1e-7;
  int max_iterations = 5000;
  SdpBackend backend = SdpBackend::kAuto;
  std::optional<CVector> warm_start;  // unit-modulus guess u, X ~ u u^H
};

/// KKT residuals of X for the Frobenius-normalized cost. Multipliers tau
/// are the least-squares fit of row-wise stationarity (K X)_i + tau_i X_i = 0.
inline KktResiduals kkt_residuals(const CMatrix& k, const CMatrix& x) {
  const double scale = k.norm();
  const CMatrix kn = scale > 0.0 ? CMatrix(k / scale) : CMatrix(k);
  const Eigen::Index m = k.rows();
  const CMatrix kx = kn * x;
  RVector tau(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double nrm = x.row(i).squaredNorm();
    tau[i] = nrm > 0.0 ? -(x.row(i).conjugate().cwiseProduct(kx.row(i))).sum().real() / nrm : 0.0;
  }
  CMatrix ups = kn;
  ups.diagonal() += tau.cast<cdouble>();
  KktResiduals r;
  double diag_err = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) diag_err = std::max(diag_err, std::abs(x(i, i) - 1.0));
  Eigen::SelfAdjointEigenSolver<CMatrix> ex((x + x.adjoint()) * 0.5, Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<CMatrix> eu((ups + ups.adjoint()) * 0.5, Eigen::EigenvaluesOnly);
  r.primal = diag_err + std::max(0.0, -ex.eigenvalues()[0]);
  r.dual = std::max(0.0, -eu.eigenvalues()[0]);
  r.complementarity = (ups * x).norm();
  return r;
}

inline double rank1_ratio(const CMatrix& x) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es((x + x.adjoint()) * 0.5, Eigen::EigenvaluesOnly);
  const Eigen::Index m = x.rows();
  if (m < 2) return 0.0;
  const double l1 = es.eigenvalues()[m - 1];
  if (l1 <= 0.0) return 1.0;
  return std::max(0.0, es.eigenvalues()[m - 2]) / l1;
}

namespace detail {

inline CMatrix project_psd(const CMatrix& a) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es((a + a.adjoint()) * 0.5);
  const RVector lam = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * lam.cast<cdouble>().asDiagonal() * es.eigenvectors().adjoint();
}

/// Congruence D^{-1/2} X D^{-1/2}; keeps PSD and forces a unit diagonal.
inline CMatrix unit_diagonal_scaling(const CMatrix& x) {
  const Eigen::Index m = x.rows();
  RVector s(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double d = x(i, i).real();
    s[i] = d > 1e-300 ? 1.0 / std::sqrt(d) : 0.0;
  }
  CMatrix y = s.cast<cdouble>().asDiagonal() * x * s.cast<cdouble>().asDiagonal();
  for (Eigen::Index i = 0; i < m; ++i) {
    if (s[i] == 0.0) {
      y.row(i).setZero();
      y.col(i).setZero();
    }
    y(i, i) = 1.0;
  }
  return (y + y.adjoint()) * 0.5;
}

inline SdpSolution finish(const CMatrix& k, CMatrix x, int iterations, const std::string& backend,
                          double tol) {
  SdpSolution sol;
  sol.X = std::move(x);
  sol.objective = (k.cwiseProduct(sol.X.transpose())).sum().real();  // Tr(K X)
  sol.kkt = kkt_residuals(k, sol.X);
  sol.rank1_ratio = rank1_ratio(sol.X);
  sol.iterations = iterations;
  sol.converged = sol.kkt.max() <= tol;
  sol.backend = backend;
  return sol;
}

/// ADMM on X in PSD, Z with unit diagonal, X = Z. Cost normalized to unit
/// Frobenius norm; over-relaxation and residual-balancing penalty updates.
/// The diagonal of K is dropped first: with diag(X) = 1 it only adds a
/// constant, and a large diagonal (direct path vs IRS entries) stalls ADMM.
inline SdpSolution solve_admm(const CMatrix& k, const SdpOptions& opt) {
  const Eigen::Index m = k.rows();
  CMatrix off = k;
  off.diagonal().setZero();
  const double scale = off.norm();
  if (scale == 0.0) return finish(k, CMatrix::Identity(m, m), 0, "admm", opt.tolerance);
  const CMatrix kn = off / scale;
  const double alpha = 1.6;
  double rho = 1.0;
  CMatrix z = CMatrix::Identity(m, m);
  if (opt.warm_start) z = (*opt.warm_start) * opt.warm_start->adjoint();
  CMatrix u = CMatrix::Zero(m, m);
  CMatrix x = z;
  const double feas_tol = opt.tolerance * 0.1;
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    x = project_psd(z - u - kn / rho);
    const CMatrix xr = alpha * x + (1.0 - alpha) * z;
    const CMatrix z_old = z;
    z = xr + u;
    for (Eigen::Index i = 0; i < m; ++i) z(i, i) = 1.0;
    u += xr - z;
    const double r_primal = (x - z).norm() / std::sqrt(static_cast<double>(m));
    const double r_dual = rho * (z - z_old).norm() / std::sqrt(static_cast<double>(m));
    if (r_primal < feas_tol && r_dual < feas_tol && it % 10 == 0) {
      const CMatrix cand = unit_diagonal_scaling(project_psd(z));
      if (kkt_residuals(k, cand).max() <= opt.tolerance)
        return finish(k, cand, it + 1, "admm", opt.tolerance);
    }
    if (r_primal > 10.0 * r_dual) {
      rho *= 2.0;
      u *= 0.5;
    } else if (r_dual > 10.0 * r_primal) {
      rho *= 0.5;
      u *= 2.0;
    }
  }
  return finish(k, unit_diagonal_scaling(project_psd(z)), it, "admm", opt.tolerance);
}

/// Block coordinate descent on X = V V^H with unit-norm rows of V; each row
/// update v_i = -g_i / |g_i| with g_i = sum_{j != i} K_ij v_j.
inline int mixing_sweeps(const CMatrix& kn, CMatrix& v, int max_sweeps, double step_tol) {
  const Eigen::Index m = v.rows();
  CMatrix g = kn * v;  // running K V
  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    double max_move = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      Eigen::RowVectorXcd gi = g.row(i) - kn(i, i) * v.row(i);
      const double nrm = gi.norm();
      if (nrm < 1e-300) continue;
      const Eigen::RowVectorXcd vi = -gi / nrm;
      const Eigen::RowVectorXcd delta = vi - v.row(i);
      const double move = delta.norm();
      if (move == 0.0) continue;
      max_move = std::max(max_move, move);
      v.row(i) = vi;
      g.noalias() += kn.col(i) * delta;
    }
    if (max_move < step_tol) {
      ++sweep;
      break;
    }
  }
  return sweep;
}

/// Low-rank backend. Tries a certified rank-1 point first, then a rank-r
/// factorization; returns nothing when neither passes the KKT check.
inline std::optional<SdpSolution> solve_low_rank(const CMatrix& k, const SdpOptions& opt) {
  const Eigen::Index m = k.rows();
  const CMatrix kn = k / k.norm();
  Rng rng(0x5eedULL + static_cast<std::uint64_t>(m));
  CVector start(m);
  if (opt.warm_start) {
    for (Eigen::Index i = 0; i < m; ++i) start[i] = unit_phasor((*opt.warm_start)[i]);
  } else {
    for (Eigen::Index i = 0; i < m; ++i) start[i] = std::polar(1.0, sample_uniform_phase(rng));
  }
  int total = 0;

  auto certify_rank1 = [&](CVector u, int budget) -> std::optional<SdpSolution> {
    CMatrix v1 = u;
    total += mixing_sweeps(kn, v1, budget, 1e-13);
    CMatrix x = v1 * v1.adjoint();
    x = unit_diagonal_scaling(x);
    SdpSolution sol = finish(k, x, total, "low_rank", opt.tolerance);
    if (sol.converged) return sol;
    return std::nullopt;
  };

  if (auto sol = certify_rank1(start, 2000)) return sol;

  const Eigen::Index r = std::min<Eigen::Index>(
      m, static_cast<Eigen::Index>(std::ceil(std::sqrt(2.0 * static_cast<double>(m)))) + 1);
  CMatrix v(m, r);
  for (Eigen::Index i = 0; i < m; ++i) {
    v(i, 0) = start[i];
    for (Eigen::Index c = 1; c < r; ++c) v(i, c) = 0.1 * sample_cscg(rng);
    v.row(i).normalize();
  }
  total += mixing_sweeps(kn, v, opt.max_iterations, 1e-12);
  CMatrix x = unit_diagonal_scaling(v * v.adjoint());
  if (rank1_ratio(x) < 1e-3) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(x);
    CVector u = es.eigenvectors().col(m - 1);
    for (Eigen::Index i = 0; i < m; ++i) u[i] = unit_phasor(u[i]);
    if (auto sol = certify_rank1(u, 2000)) return sol;
  }
  SdpSolution sol = finish(k, x, total, "low_rank", opt.tolerance);
  if (sol.converged) return sol;
  return std::nullopt;
}

}  // namespace detail

inline SdpSolution solve_unit_diag_sdp(const CMatrix& k, const SdpOptions& opt = {}) {
  const CMatrix kh = detail::checked_hermitian<cdouble>(k);
  const Eigen::Index m = kh.rows();
  require_arg(opt.tolerance > 0.0 && opt.max_iterations >= 1, "invalid SDP options");
  if (m == 1) return detail::finish(kh, CMatrix::Ones(1, 1), 0, "closed_form", opt.tolerance);
  if (kh.norm() == 0.0)
    return detail::finish(kh, CMatrix::Ones(m, m), 0, "closed_form", opt.tolerance);
  if (opt.backend != SdpBackend::kAdmm) {
    if (auto sol = detail::solve_low_rank(kh, opt)) return *sol;
    if (opt.backend == SdpBackend::kLowRank) {
      SdpOptions fallback = opt;
      fallback.backend = SdpBackend::kAdmm;
      return detail::solve_admm(kh, fallback);
    }
  }
  return detail::solve_admm(kh, opt);
}

/// Unit-modulus projection of the dominant direction of X, or the best of
/// n_candidates Gaussian draws with covariance X under the callback.
struct RandomizationOutcome {
  CVector vector;
  double value = 0.0;
  bool randomized = false;
};

inline CVector unit_modulus(const CVector& v) {
  CVector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = unit_phasor(v[i]);
  return out;
}

inline RandomizationOutcome gaussian_randomization(
    const SdpSolution& sol, const std::function<double(const CVector&)>& objective,
    int n_candidates, Rng& rng) {
  require_arg(n_candidates >= 1, "need at least one randomization candidate");
  const Eigen::Index m = sol.X.rows();
  Eigen::SelfAdjointEigenSolver<CMatrix> es((sol.X + sol.X.adjoint()) * 0.5);
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  RVector lam = es.eigenvalues();
  if (lam[0] < -1e-8 * std::max(1.0, lam[m - 1]))
    throw NumericalError("SDP solution is not positive semidefinite");
  if (sol.rank1_ratio <= 1e-6) {
    CVector v = es.eigenvectors().col(m - 1);
    detail::fix_phase(v);
    const CVector u = unit_modulus(v);
    return {u, objective(u), false};
  }
  lam = lam.cwiseMax(0.0);
  const CMatrix root = es.eigenvectors() * lam.cwiseSqrt().cast<cdouble>().asDiagonal();
  RandomizationOutcome best;
  best.randomized = true;
  best.value = -std::numeric_limits<double>::infinity();
  CVector w(m);
  for (int c = 0; c < n_candidates; ++c) {
    for (Eigen::Index i = 0; i < m; ++i) w[i] = sample_cscg(rng);
    const CVector cand = unit_modulus(root * w);
    const double val = objective(cand);
    if (val > best.value || best.vector.size() == 0) {
      best.value = val;
      best.vector = cand;
    }
  }
  return best;
}

/// Divides by the last (auxiliary) entry and drops it.
inline CVector normalize_by_auxiliary(const CVector& theta) {
  require(theta.size() >= 1, "vector must contain the auxiliary entry");
  const cdouble aux = theta[theta.size() - 1];
  require(std::abs(aux) > 0.0, "auxiliary entry is zero");
  CVector out(theta.size() - 1);
  for (Eigen::Index i = 0; i + 1 < theta.size(); ++i) out[i] = unit_phasor(theta[i] / aux);
  return out;
}

}  // namespace irswpt
