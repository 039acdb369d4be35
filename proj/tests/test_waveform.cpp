#include "test_support.hpp"

using namespace irswpt;
using namespace irswpt::testing;

namespace {

const RectennaParams kParams;

}  // namespace

TEST(WaveformStep, MeetsPowerConstraint) {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 8;
    const double p = 0.5 + trial;
    const auto step = waveform_step({random_cvector(n, rng, 1e-3)}, uniform_waveform(n, p), {1.0}, p, kParams);
    EXPECT_FALSE(step.degenerate);
    EXPECT_NEAR(waveform_power(step.s), p, 1e-12 * p);
    EXPECT_NEAR(step.surrogate, 2.0 * p * step.lambda_min, 1e-12 * std::abs(step.surrogate));
  }
}

// Property: the minorize-maximize step never lowers the current.
TEST(WaveformStep, AscentProperty) {
  Rng rng(2);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + trial % 12, users = 1 + trial % 2;
    std::vector<CVector> h;
    std::vector<double> w;
    for (int q = 0; q < users; ++q) {
      h.push_back(random_cvector(n, rng, 1e-4));
      w.push_back(0.2 + q);
    }
    const double p = 4.0;
    CVector prev = random_cvector(n, rng);
    prev *= std::sqrt(2.0 * p) / prev.norm();
    double before = 0.0, after = 0.0;
    const auto step = waveform_step(h, prev, w, p, kParams);
    for (int q = 0; q < users; ++q) {
      before += w[q] * idc(prev, h[q], kParams);
      after += w[q] * idc(step.s, h[q], kParams);
    }
    EXPECT_GE(after, before * (1 - 1e-12));
  }
}

TEST(WaveformStep, SurrogateLowerBoundsCurrent) {
  // -s^H K3 s minorizes the quartic current at the linearization point.
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 6;
    const CVector h = random_cvector(n, rng, 1e-4);
    const CVector prev = uniform_waveform(n, 4.0);
    const auto step = waveform_step({h}, prev, {1.0}, 4.0, kParams);
    const CVector b = correlation_coefficients(received_tones(prev, h));
    const double f_prev = 0.375 * kParams.k4 * b[0].real() * b[0].real() + 0.75 * kParams.k4 * b.tail(n - 1).squaredNorm();
    EXPECT_LE(-step.surrogate - f_prev, idc(step.s, h, kParams) * (1 + 1e-10));
  }
}

TEST(WaveformStep, ZeroWeightsAreDegenerate) {
  Rng rng(4);
  const CVector prev = uniform_waveform(3, 1.0);
  const auto step = waveform_step({random_cvector(3, rng)}, prev, {0.0}, 1.0, kParams);
  EXPECT_TRUE(step.degenerate);
  EXPECT_EQ(step.s, prev);
}

TEST(WaveformStep, RejectsNonPositivePower) {
  EXPECT_THROW(waveform_step({CVector::Ones(2)}, CVector::Ones(2), {1.0}, 0.0, kParams), std::invalid_argument);
}

TEST(RealIdc, MatchesComplexModel) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 8;
    const CVector h = random_cvector(n, rng);
    RVector p(n);
    for (int i = 0; i < n; ++i) p[i] = std::abs(sample_cscg(rng));
    const Waveform s = assemble_su_waveform(p, h);
    EXPECT_LT(rel_diff(real_idc(h.cwiseAbs(), p, kParams), idc(s, h, kParams)), 1e-12);
    EXPECT_NEAR(s.norm(), p.norm(), 1e-12 * p.norm());
  }
}

TEST(PowerAllocation, MonotoneAndFeasible) {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 16;
    RVector a(n);
    for (int i = 0; i < n; ++i) a[i] = 1e-2 * std::abs(sample_cscg(rng));
    const auto alloc = su_power_allocation(a, 4.0, kParams, 1e-8, 500);
    EXPECT_TRUE(alloc.converged);
    EXPECT_NEAR(alloc.p.squaredNorm(), 8.0, 1e-10);
    EXPECT_GE(alloc.p.minCoeff(), 0.0);
    for (std::size_t i = 1; i < alloc.trace.size(); ++i) EXPECT_GE(alloc.trace[i], alloc.trace[i - 1]);
    EXPECT_NEAR(alloc.trace.back(), real_idc(a, alloc.p, kParams), 1e-12 * alloc.trace.back());
  }
}

TEST(PowerAllocation, RandomStartsReachSameValue) {
  Rng rng(7);
  RVector a(8);
  for (int i = 0; i < 8; ++i) a[i] = 1e-2 * std::abs(sample_cscg(rng));
  const double ref = su_power_allocation(a, 4.0, kParams, 1e-10, 2000).trace.back();
  for (int trial = 0; trial < 5; ++trial) {
    const double v = su_power_allocation(a, 4.0, kParams, 1e-10, 2000, PowerInit::kRandom, &rng).trace.back();
    EXPECT_LT(rel_diff(v, ref), 1e-4);
  }
}

TEST(PowerAllocation, BeatsUniformAndSingleTone) {
  Rng rng(8);
  RVector a(6);
  for (int i = 0; i < 6; ++i) a[i] = 1e-2 * std::abs(sample_cscg(rng));
  const auto alloc = su_power_allocation(a, 4.0, kParams, 1e-8, 500);
  EXPECT_GE(alloc.trace.back(), real_idc(a, RVector::Constant(6, std::sqrt(8.0 / 6)), kParams));
  Eigen::Index best = 0;
  a.maxCoeff(&best);
  RVector single = RVector::Zero(6);
  single[best] = std::sqrt(8.0);
  EXPECT_GE(alloc.trace.back(), real_idc(a, single, kParams) * (1 - 1e-9));
}

TEST(PowerAllocation, InvalidInputs) {
  EXPECT_THROW(su_power_allocation(RVector::Zero(3), 1.0, kParams, 1e-6, 10), std::invalid_argument);
  EXPECT_THROW(su_power_allocation(RVector::Ones(3), -1.0, kParams, 1e-6, 10), std::invalid_argument);
  EXPECT_THROW(su_power_allocation(RVector::Ones(3), 1.0, kParams, 1e-6, 10, PowerInit::kRandom), std::invalid_argument);
}

TEST(AssembleWaveform, ZeroChannelNeedsZeroPower) {
  CVector h(2);
  h << 1.0, 0.0;
  RVector p(2);
  p << 1.0, 0.0;
  EXPECT_EQ(assemble_su_waveform(p, h)[1], cdouble(0.0));
  p[1] = 1.0;
  EXPECT_THROW(assemble_su_waveform(p, h), ContractViolation);
}

TEST(PowerAllocation, SingleToneStartIsFixedPoint) {
  RVector a(4);
  a << 0.01, 0.03, 0.02, 0.005;
  const auto alloc = su_power_allocation(a, 4.0, kParams, 1e-8, 50, PowerInit::kStrongest);
  EXPECT_TRUE(alloc.converged);
  EXPECT_NEAR(alloc.p[1], std::sqrt(8.0), 1e-12);
  EXPECT_NEAR(alloc.p.squaredNorm(), 8.0, 1e-12);
}
