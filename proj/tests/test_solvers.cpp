#include "test_support.hpp"

using namespace irswpt;
using namespace irswpt::testing;

namespace {

SdpOptions with_backend(SdpBackend b) {
  SdpOptions o;
  o.backend = b;
  return o;
}

double max_diag_error(const CMatrix& x) {
  double e = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) e = std::max(e, std::abs(x(i, i) - 1.0));
  return e;
}

double form(const CMatrix& k, const CVector& u) { return u.dot(k * u).real(); }

}  // namespace

TEST(Eigenpairs, DiagonalMatrices) {
  RMatrix d = RMatrix::Zero(3, 3);
  d.diagonal() << 3.0, -2.0, 5.0;
  const auto lo = smallest_eigenpair(d);
  EXPECT_DOUBLE_EQ(lo.value, -2.0);
  EXPECT_NEAR(std::abs(lo.vector[1]), 1.0, 1e-15);
  const auto hi = largest_eigenpair<double>(d);
  EXPECT_DOUBLE_EQ(hi.value, 5.0);
}

TEST(Eigenpairs, ResidualAndPhaseFixing) {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const CMatrix h = random_hermitian(2 + trial % 6, rng);
    const auto p = smallest_eigenpair(h);
    EXPECT_LT((h * p.vector - p.value * p.vector).norm(), 1e-10 * h.norm());
    EXPECT_NEAR(p.vector.norm(), 1.0, 1e-12);
    Eigen::Index big = 0;
    p.vector.cwiseAbs().maxCoeff(&big);
    EXPECT_NEAR(p.vector[big].imag(), 0.0, 1e-12);
    EXPECT_GT(p.vector[big].real(), 0.0);
  }
}

TEST(Eigenpairs, RejectsNonHermitian) {
  CMatrix a = CMatrix::Zero(2, 2);
  a(0, 1) = 1.0;
  EXPECT_THROW(smallest_eigenpair(a), ContractViolation);
}

TEST(Sdp, ClosedFormTwoByTwo) {
  // min a + b + 2 Re(c conj x), |x| <= 1: optimum a + b - 2|c|.
  Rng rng(2);
  for (auto backend : {SdpBackend::kAdmm, SdpBackend::kLowRank, SdpBackend::kAuto}) {
    for (int trial = 0; trial < 50; ++trial) {
      const CMatrix k = random_hermitian(2, rng);
      const double expected = k(0, 0).real() + k(1, 1).real() - 2.0 * std::abs(k(0, 1));
      const SdpSolution sol = solve_unit_diag_sdp(k, with_backend(backend));
      EXPECT_NEAR(sol.objective, expected, 1e-6 * std::max(1.0, k.norm()));
      EXPECT_LE(max_diag_error(sol.X), 1e-8);
    }
  }
}

TEST(Sdp, TrivialCases) {
  CMatrix one(1, 1);
  one(0, 0) = -4.0;
  const auto a = solve_unit_diag_sdp(one);
  EXPECT_EQ(a.backend, "closed_form");
  EXPECT_DOUBLE_EQ(a.objective, -4.0);
  const auto b = solve_unit_diag_sdp(CMatrix::Zero(3, 3));
  EXPECT_TRUE(b.converged);
  EXPECT_EQ(b.objective, 0.0);
}

// Property: KKT residuals and diagonal feasibility on random problems of
// size up to 8 for both backends.
TEST(Sdp, KktOnRandomProblems) {
  Rng rng(3);
  for (auto backend : {SdpBackend::kAdmm, SdpBackend::kLowRank}) {
    for (int trial = 0; trial < 40; ++trial) {
      const int m = 2 + trial % 7;
      const CMatrix k = random_hermitian(m, rng);
      const SdpSolution sol = solve_unit_diag_sdp(k, with_backend(backend));
      EXPECT_LE(sol.kkt.max(), 1e-6) << "m=" << m;
      EXPECT_LE(max_diag_error(sol.X), 1e-8);
      EXPECT_TRUE(sol.converged);
    }
  }
}

TEST(Sdp, RelaxationLowerBoundsRankOneForms) {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 3 + trial % 5;
    const CMatrix k = random_hermitian(m, rng);
    const SdpSolution sol = solve_unit_diag_sdp(k);
    for (int c = 0; c < 20; ++c)
      EXPECT_LE(sol.objective, form(k, random_phasors(m, rng)) + 1e-6 * k.norm());
  }
}

TEST(Sdp, BackendsAgree) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const CMatrix k = random_hermitian(2 + trial % 6, rng);
    const double a = solve_unit_diag_sdp(k, with_backend(SdpBackend::kAdmm)).objective;
    const double b = solve_unit_diag_sdp(k, with_backend(SdpBackend::kLowRank)).objective;
    EXPECT_NEAR(a, b, 1e-6 * k.norm());
  }
}

TEST(Sdp, WarmStartDoesNotChangeOptimum) {
  Rng rng(6);
  const CMatrix k = random_hermitian(6, rng);
  SdpOptions warm;
  warm.warm_start = random_phasors(6, rng);
  EXPECT_NEAR(solve_unit_diag_sdp(k).objective, solve_unit_diag_sdp(k, warm).objective, 1e-6 * k.norm());
}

TEST(Sdp, NegatedRankOneCostHasRankOneSolution) {
  Rng rng(7);
  const CVector u = random_phasors(5, rng);
  const CMatrix k = -u * u.adjoint();
  const SdpSolution sol = solve_unit_diag_sdp(k);
  EXPECT_NEAR(sol.objective, -25.0, 1e-6);
  EXPECT_LE(sol.rank1_ratio, 1e-6);
}

TEST(Kkt, DetectsInfeasibility) {
  const CMatrix k = -CMatrix::Ones(2, 2);
  EXPECT_LE(kkt_residuals(k, CMatrix::Ones(2, 2)).max(), 1e-12);
  const CMatrix bad = CMatrix::Identity(2, 2) * 2.0;
  EXPECT_GE(kkt_residuals(k, bad).primal, 1.0);
  CMatrix indefinite = CMatrix::Ones(2, 2);
  indefinite(0, 1) = indefinite(1, 0) = 3.0;
  EXPECT_GT(kkt_residuals(k, indefinite).primal, 1.0);
}

TEST(Randomization, RankOneExtractsExactly) {
  Rng rng(8);
  const CVector u = random_phasors(4, rng);
  SdpSolution sol;
  sol.X = u * u.adjoint();
  sol.rank1_ratio = rank1_ratio(sol.X);
  int calls = 0;
  const auto out = gaussian_randomization(sol, [&](const CVector&) { return ++calls, 1.0; }, 100, rng);
  EXPECT_FALSE(out.randomized);
  EXPECT_EQ(calls, 1);
  // Equal up to a common phase.
  const cdouble rot = out.vector[0] / u[0];
  EXPECT_LT((out.vector - rot * u).norm(), 1e-10);
}

TEST(Randomization, PicksBestCandidate) {
  Rng rng(9);
  SdpSolution sol;
  sol.X = CMatrix::Identity(3, 3);
  sol.rank1_ratio = rank1_ratio(sol.X);
  std::vector<double> seen;
  auto objective = [&](const CVector& v) {
    const double val = v.sum().real();
    seen.push_back(val);
    return val;
  };
  const auto out = gaussian_randomization(sol, objective, 50, rng);
  EXPECT_TRUE(out.randomized);
  EXPECT_EQ(seen.size(), 50u);
  EXPECT_DOUBLE_EQ(out.value, *std::max_element(seen.begin(), seen.end()));
  for (Eigen::Index i = 0; i < out.vector.size(); ++i) EXPECT_NEAR(std::abs(out.vector[i]), 1.0, 1e-15);
}

TEST(Randomization, DeterministicForSeed) {
  SdpSolution sol;
  sol.X = CMatrix::Identity(4, 4);
  sol.rank1_ratio = 1.0;
  auto obj = [](const CVector& v) { return v.sum().real(); };
  Rng a(10), b(10);
  EXPECT_EQ(gaussian_randomization(sol, obj, 30, a).vector, gaussian_randomization(sol, obj, 30, b).vector);
}

TEST(Randomization, RejectsIndefinite) {
  SdpSolution sol;
  sol.X = CMatrix::Identity(2, 2);
  sol.X(1, 1) = -1.0;
  sol.rank1_ratio = 1.0;
  Rng rng(11);
  EXPECT_THROW(gaussian_randomization(sol, [](const CVector&) { return 0.0; }, 5, rng), NumericalError);
}

TEST(Auxiliary, NormalizesByLastEntry) {
  CVector t(3);
  t << std::polar(1.0, 0.4), std::polar(1.0, -1.1), std::polar(1.0, 0.9);
  const CVector out = normalize_by_auxiliary(t);
  ASSERT_EQ(out.size(), 2);
  EXPECT_NEAR(std::arg(out[0]), 0.4 - 0.9, 1e-14);
  EXPECT_NEAR(std::arg(out[1]), -1.1 - 0.9, 1e-14);
}
