#pragma once

#include "irswpt/irswpt.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

namespace irswpt::testing {

inline CVector random_cvector(int n, Rng& rng, double variance = 1.0) {
  CVector v(n);
  for (int i = 0; i < n; ++i) v[i] = sample_cscg(rng, variance);
  return v;
}

inline CVector random_phasors(int n, Rng& rng) {
  CVector v(n);
  for (int i = 0; i < n; ++i) v[i] = std::polar(1.0, sample_uniform_phase(rng));
  return v;
}

inline CMatrix random_hermitian(int m, Rng& rng) {
  CMatrix a(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) a(i, j) = sample_cscg(rng);
  return (a + a.adjoint()) * 0.5;
}

/// i.i.d. CSCG channels with the given per-link variances (no delay profile).
inline ChannelRealization random_realization(int n, int l, int k, Rng& rng, double var_d = 1.0,
                                             double var_i = 1.0, double var_r = 1.0) {
  ChannelRealization ch;
  ch.direct.resize(k, n);
  ch.incident.resize(n, l);
  ch.reflected.assign(static_cast<std::size_t>(k), CMatrix(n, l));
  for (int q = 0; q < k; ++q)
    for (int i = 0; i < n; ++i) ch.direct(q, i) = sample_cscg(rng, var_d);
  for (int i = 0; i < n; ++i)
    for (int e = 0; e < l; ++e) ch.incident(i, e) = sample_cscg(rng, var_i);
  for (int q = 0; q < k; ++q)
    for (int i = 0; i < n; ++i)
      for (int e = 0; e < l; ++e) ch.reflected[static_cast<std::size_t>(q)](i, e) = sample_cscg(rng, var_r);
  return ch;
}

/// Channels scaled so that currents sit in the regime of the default layout.
inline ChannelRealization realistic_realization(int n, int l, int k, Rng& rng) {
  SystemConfig cfg;
  cfg.subcarriers = n;
  cfg.elements = l;
  cfg.users = k;
  cfg.reset_weights();
  return generate_realization(cfg, Layout{}, rng);
}

inline SystemConfig make_config(int n, int l, int k) {
  SystemConfig cfg;
  cfg.subcarriers = n;
  cfg.elements = l;
  cfg.users = k;
  cfg.reset_weights();
  return cfg;
}

inline double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace irswpt::testing
