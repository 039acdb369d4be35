#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace irswpt {

using cdouble = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

/// Engine used for every stochastic draw. Streams are derived, never shared.
using Rng = std::mt19937_64;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Raised when a caller breaks a documented precondition (dimension
/// mismatch, wrong mode, K > 1 for single-user routines, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Raised when a numerical self-check fails, e.g. a quantity that must be
/// real carries an imaginary residue above tolerance.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ContractViolation(message);
}

inline void require_arg(bool condition, const std::string& message) {
  if (!condition) throw std::invalid_argument(message);
}

// SplitMix64 finalizer; used to derive independent stream seeds.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for stream (master, a, b, c). Distinct tuples give unrelated seeds.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t h = mix64(master);
  h = mix64(h ^ (a + 0x1234567ULL));
  h = mix64(h ^ (b + 0x89abcdefULL));
  h = mix64(h ^ (c + 0x5bd1e995ULL));
  return h;
}

inline Rng make_rng(std::uint64_t master, std::uint64_t a = 0,
                    std::uint64_t b = 0, std::uint64_t c = 0) {
  return Rng(derive_seed(master, a, b, c));
}

/// Circularly-symmetric complex Gaussian sample with E|x|^2 = variance.
inline cdouble sample_cscg(Rng& rng, double variance = 1.0) {
  std::normal_distribution<double> normal(0.0, std::sqrt(variance / 2.0));
  const double re = normal(rng);
  const double im = normal(rng);
  return {re, im};
}

inline double sample_uniform_phase(Rng& rng) {
  std::uniform_real_distribution<double> uniform(0.0, kTwoPi);
  return uniform(rng);
}

inline double dbm_to_watts(double dbm) { return std::pow(10.0, dbm / 10.0) * 1e-3; }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

/// Unit phasor with the phase of z; returns 1 for z == 0.
inline cdouble unit_phasor(cdouble z) {
  const double a = std::abs(z);
  return a > 0.0 ? z / a : cdouble(1.0, 0.0);
}

}  // namespace irswpt
