#pragma once

// Structured matrices behind the compact quadratic forms of the 4th-order
// current, and the linearized (SCA) cost matrices built from them.
//
// Stacked phase vectors follow the row convention theta D theta^H. Entry
// (n, a) of an FS vector lives at index n * (L + 1) + a; a == L is the
// auxiliary entry that multiplies the direct path.

#include "irswpt/core.hpp"
#include "irswpt/rectenna.hpp"

#include <vector>

namespace irswpt {

/// [h_r .* h_i ; h_d] for one user and subcarrier.
inline CVector build_aug_channel(const ChannelRealization& ch, int user, int subcarrier) {
  require(user >= 0 && user < ch.users(), "user index out of range");
  require(subcarrier >= 0 && subcarrier < ch.subcarriers(), "subcarrier out of range");
  const int l = ch.elements();
  CVector v(l + 1);
  const CMatrix& refl = ch.reflected[static_cast<std::size_t>(user)];
  for (int e = 0; e < l; ++e) v[e] = refl(subcarrier, e) * ch.incident(subcarrier, e);
  v[l] = ch.direct(user, subcarrier);
  return v;
}

/// Concatenation of v_n * s_n.
inline CVector build_z(const std::vector<CVector>& v, const Waveform& s) {
  require(v.size() == static_cast<std::size_t>(s.size()), "one augmented channel per subcarrier");
  if (v.empty()) return CVector();
  const Eigen::Index m = v.front().size();
  CVector z(static_cast<Eigen::Index>(v.size()) * m);
  for (std::size_t n = 0; n < v.size(); ++n) {
    require(v[n].size() == m, "augmented channels differ in length");
    z.segment(static_cast<Eigen::Index>(n) * m, m) = v[n] * s[static_cast<Eigen::Index>(n)];
  }
  return z;
}

/// z rows for one user: row n is z_{q,n}^T, shape N x (L+1).
inline CMatrix build_z_rows(const ChannelRealization& ch, int user, const Waveform& s) {
  require(s.size() == ch.subcarriers(), "waveform length != N");
  CMatrix z(ch.subcarriers(), ch.elements() + 1);
  for (int n = 0; n < ch.subcarriers(); ++n)
    z.row(n) = build_aug_channel(ch, user, n).transpose() * s[n];
  return z;
}

/// Superdiagonal slices of h^H h. Entry (n, n+k) of slice k is conj(h_n) h_{n+k}.
struct DiagonalBank {
  CVector h;

  int size() const { return static_cast<int>(h.size()); }

  CMatrix slice(int k) const {
    const int n = size();
    require(k >= 0 && k < n, "slice index out of range");
    CMatrix b = CMatrix::Zero(n, n);
    for (int i = 0; i + k < n; ++i) b(i, i + k) = std::conj(h[i]) * h[i + k];
    return b;
  }
};

inline DiagonalBank build_B_bank(const CVector& h) { return {h}; }

/// b_k = s^H B_k s.
inline CVector compute_coefficients(const DiagonalBank& bank, const Waveform& s) {
  return correlation_coefficients(received_tones(s, bank.h));
}

/// D_k = sum_n z_n z_{n+k}^H over block indices, k = 0..N-1.
struct BlockBank {
  std::vector<CMatrix> d;

  int size() const { return static_cast<int>(d.size()); }
};

inline BlockBank build_D_bank(const CVector& z, int n_sub, int l) {
  const Eigen::Index m = l + 1;
  require(z.size() == n_sub * m, "stacked vector length != N(L+1)");
  BlockBank bank;
  bank.d.assign(static_cast<std::size_t>(n_sub), CMatrix::Zero(m, m));
  for (int k = 0; k < n_sub; ++k)
    for (int n = 0; n + k < n_sub; ++n)
      bank.d[static_cast<std::size_t>(k)].noalias() +=
          z.segment(n * m, m) * z.segment((n + k) * m, m).adjoint();
  return bank;
}

inline BlockBank build_D_bank(const CMatrix& z_rows) {
  const CVector z = Eigen::Map<const CVector>(CMatrix(z_rows.transpose()).data(), z_rows.size());
  return build_D_bank(z, static_cast<int>(z_rows.rows()), static_cast<int>(z_rows.cols()) - 1);
}

namespace detail {

inline void realify_first(CVector& c, const char* what) {
  if (c.size() == 0) return;
  const double scale = std::max(std::abs(c[0]), 1e-300);
  if (std::abs(c[0].imag()) > 1e-10 * scale && std::abs(c[0].imag()) > 1e-300)
    throw NumericalError(std::string(what) + ": entry 0 is not real");
  c[0] = c[0].real();
}

}  // namespace detail

/// d_k = theta D_k theta^H for a row vector theta of length L+1.
inline CVector compute_coefficients(const BlockBank& bank, const CVector& theta) {
  CVector d(bank.size());
  const CVector u = theta.conjugate();
  for (int k = 0; k < bank.size(); ++k)
    d[k] = u.dot(bank.d[static_cast<std::size_t>(k)] * u);  // u^H D u
  detail::realify_first(d, "d coefficients");
  return d;
}

/// Composite tones theta_n . z_n per subcarrier for an N x (L+1) theta.
inline CVector phased_tones(const CMatrix& z_rows, const CMatrix& theta_rows) {
  require(z_rows.rows() == theta_rows.rows() && z_rows.cols() == theta_rows.cols(),
          "phase block shape does not match z");
  return z_rows.cwiseProduct(theta_rows).rowwise().sum();
}

/// e_k = theta E_k theta^H = sum_n x_n conj(x_{n+k}).
inline CVector e_coefficients(const CMatrix& z_rows, const CMatrix& theta_rows) {
  CVector e = correlation_coefficients(phased_tones(z_rows, theta_rows)).conjugate();
  detail::realify_first(e, "e coefficients");
  return e;
}

/// Per-lag weights c_k of J = sum_k c_k M_k: c_0 = -(k2/4 + 3/8 k4 c0_prev),
/// c_k = -3/4 k4 conj(prev_k).
inline CVector linearization_weights(const CVector& prev, const RectennaParams& params) {
  CVector c(prev.size());
  if (prev.size() == 0) return c;
  c[0] = -(0.25 * params.k2 + 0.375 * params.k4 * prev[0].real());
  for (Eigen::Index k = 1; k < prev.size(); ++k) c[k] = -0.75 * params.k4 * std::conj(prev[k]);
  return c;
}

inline CMatrix hermitian_part_doubled(const CMatrix& j) {
  CMatrix k = j + j.adjoint();
  return k;
}

/// K1 = J1 + J1^H from per-user D banks and d^{(i-1)}.
inline CMatrix build_K1(const std::vector<BlockBank>& banks, const std::vector<CVector>& d_prev,
                        const std::vector<double>& weights, const RectennaParams& params) {
  require(!banks.empty() && banks.size() == d_prev.size() && banks.size() == weights.size(),
          "build_K1 needs one bank, coefficient vector and weight per user");
  const Eigen::Index m = banks.front().d.front().rows();
  CMatrix j = CMatrix::Zero(m, m);
  for (std::size_t q = 0; q < banks.size(); ++q) {
    if (weights[q] == 0.0) continue;
    const CVector c = linearization_weights(d_prev[q], params);
    for (int k = 0; k < banks[q].size(); ++k)
      j.noalias() += weights[q] * c[k] * banks[q].d[static_cast<std::size_t>(k)];
  }
  return hermitian_part_doubled(j);
}

/// K3 = J3 + J3^H from per-user composite channels and b^{(i-1)}.
inline CMatrix build_K3(const std::vector<DiagonalBank>& banks, const std::vector<CVector>& b_prev,
                        const std::vector<double>& weights, const RectennaParams& params) {
  require(!banks.empty() && banks.size() == b_prev.size() && banks.size() == weights.size(),
          "build_K3 needs one bank, coefficient vector and weight per user");
  const int n = banks.front().size();
  CMatrix j = CMatrix::Zero(n, n);
  for (std::size_t q = 0; q < banks.size(); ++q) {
    if (weights[q] == 0.0) continue;
    require(banks[q].size() == n, "channel lengths differ across users");
    const CVector c = linearization_weights(b_prev[q], params);
    const CVector& h = banks[q].h;
    for (int k = 0; k < n; ++k)
      for (int i = 0; i + k < n; ++i) j(i, i + k) += weights[q] * c[k] * std::conj(h[i]) * h[i + k];
  }
  return hermitian_part_doubled(j);
}

/// Single-user K4 over real aligned amplitudes A; b from the real allocation p.
inline RMatrix build_K4(const RVector& amplitudes, const RVector& b_prev,
                        const RectennaParams& params) {
  const Eigen::Index n = amplitudes.size();
  require(b_prev.size() == n, "b length != N");
  RMatrix k = RMatrix::Zero(n, n);
  for (Eigen::Index lag = 0; lag < n; ++lag) {
    const double c = lag == 0 ? -(0.25 * params.k2 + 0.375 * params.k4 * b_prev[0])
                              : -0.75 * params.k4 * b_prev[lag];
    for (Eigen::Index i = 0; i + lag < n; ++i) {
      const double v = c * amplitudes[i] * amplitudes[i + lag];
      k(i, i + lag) += v;
      k(i + lag, i) += v;
    }
  }
  return k;
}

/// Real correlation b_k = sum_n p_n A_n A_{n+k} p_{n+k}.
inline RVector real_coefficients(const RVector& amplitudes, const RVector& p) {
  const RVector x = amplitudes.cwiseProduct(p);
  const Eigen::Index n = x.size();
  RVector b = RVector::Zero(n);
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index i = 0; i + k < n; ++i) b[k] += x[i] * x[i + k];
  return b;
}

/// K2 = J2 + J2^H for the FS problem, held implicitly. Entry
/// ((n,a),(n',b)) = sum_q xi_q g_q(n,n') z_{q,n,a} conj(z_{q,n',b}), with
/// g_q(n,n') = c_{n'-n} above the block diagonal, conj(c_{n-n'}) below and
/// 2 Re c_0 on it.
class ImplicitK2 {
 public:
  ImplicitK2(std::vector<CMatrix> z_rows, const std::vector<CVector>& e_prev,
             std::vector<double> weights, const RectennaParams& params)
      : z_(std::move(z_rows)), weights_(std::move(weights)) {
    require(!z_.empty() && z_.size() == e_prev.size() && z_.size() == weights_.size(),
            "ImplicitK2 needs one z, coefficient vector and weight per user");
    n_ = static_cast<int>(z_.front().rows());
    m_ = static_cast<int>(z_.front().cols());
    for (std::size_t q = 0; q < z_.size(); ++q) {
      require(z_[q].rows() == n_ && z_[q].cols() == m_, "z shapes differ across users");
      c_.push_back(linearization_weights(e_prev[q], params));
    }
  }

  int subcarriers() const { return n_; }
  int block() const { return m_; }
  int dimension() const { return n_ * m_; }
  int users() const { return static_cast<int>(z_.size()); }
  const CMatrix& z(int q) const { return z_[static_cast<std::size_t>(q)]; }
  double weight(int q) const { return weights_[static_cast<std::size_t>(q)]; }

  cdouble g(int q, int n, int np) const {
    const CVector& c = c_[static_cast<std::size_t>(q)];
    if (np > n) return c[np - n];
    if (n > np) return std::conj(c[n - np]);
    return 2.0 * c[0].real();
  }

  cdouble entry(int row, int col) const {
    const int n = row / m_, a = row % m_, np = col / m_, b = col % m_;
    cdouble acc = 0.0;
    for (int q = 0; q < users(); ++q) {
      if (weight(q) == 0.0) continue;
      acc += weight(q) * g(q, n, np) * z_[static_cast<std::size_t>(q)](n, a) *
             std::conj(z_[static_cast<std::size_t>(q)](np, b));
    }
    return acc;
  }

  CVector row(int r) const {
    CVector out(dimension());
    for (int c = 0; c < dimension(); ++c) out[c] = entry(r, c);
    return out;
  }

  CMatrix dense() const {
    require(dimension() <= 1024, "dense K2 is limited to N(L+1) <= 1024");
    CMatrix k(dimension(), dimension());
    for (int r = 0; r < dimension(); ++r) k.row(r) = row(r).transpose();
    return k;
  }

 private:
  std::vector<CMatrix> z_;
  std::vector<double> weights_;
  std::vector<CVector> c_;
  int n_ = 0;
  int m_ = 0;
};

/// K2 assembled densely from E_k block diagonals; reference path for tests.
inline CMatrix build_K2_dense(const std::vector<CMatrix>& z_rows, const std::vector<CVector>& e_prev,
                              const std::vector<double>& weights, const RectennaParams& params) {
  require(!z_rows.empty() && z_rows.size() == e_prev.size() && z_rows.size() == weights.size(),
          "build_K2_dense needs one z, coefficient vector and weight per user");
  const int n = static_cast<int>(z_rows.front().rows());
  const int m = static_cast<int>(z_rows.front().cols());
  require(n * m <= 1024, "dense K2 is limited to N(L+1) <= 1024");
  CMatrix j = CMatrix::Zero(n * m, n * m);
  for (std::size_t q = 0; q < z_rows.size(); ++q) {
    if (weights[q] == 0.0) continue;
    const CVector c = linearization_weights(e_prev[q], params);
    for (int k = 0; k < n; ++k)
      for (int b = 0; b + k < n; ++b)
        j.block(b * m, (b + k) * m, m, m) += weights[q] * c[k] * z_rows[q].row(b).transpose() *
                                            z_rows[q].row(b + k).conjugate();
  }
  return hermitian_part_doubled(j);
}

}  // namespace irswpt
