#include "test_support.hpp"

using namespace irswpt;
using namespace irswpt::testing;

namespace {

const RectennaParams kParams;

void expect_monotone(const std::vector<double>& trace) {
  for (std::size_t i = 1; i < trace.size(); ++i)
    EXPECT_GE(trace[i], trace[i - 1] * (1 - 1e-12)) << "iteration " << i;
}

}  // namespace

TEST(Drivers, FfTraceMonotoneAndFeasible) {
  Rng rng(1);
  for (int trial = 0; trial < 4; ++trial) {
    const int users = 1 + trial % 2;
    const auto cfg = make_config(4, 5, users);
    const auto ch = realistic_realization(4, 5, users, rng);
    const auto res = run_mu_ff(ch, cfg, kParams, rng);
    expect_monotone(res.trace);
    EXPECT_TRUE(res.converged);
    EXPECT_NEAR(waveform_power(res.s), cfg.power_w, 1e-9 * cfg.power_w);
    EXPECT_LT(res.phases.max_modulus_error(), 1e-14);
    double total = 0.0;
    for (std::size_t q = 0; q < res.user_currents.size(); ++q) total += cfg.user_weights[q] * res.user_currents[q];
    EXPECT_LT(rel_diff(total, res.current()), 1e-10);
  }
}

TEST(Drivers, FsTraceMonotoneAndFeasible) {
  Rng rng(2);
  for (int trial = 0; trial < 4; ++trial) {
    const int users = 1 + trial % 2;
    const auto cfg = make_config(8, 5, users);
    const auto ch = realistic_realization(8, 5, users, rng);
    const auto res = run_mu_fs(ch, cfg, kParams, rng);
    expect_monotone(res.trace);
    EXPECT_TRUE(res.converged);
    EXPECT_NEAR(waveform_power(res.s), cfg.power_w, 1e-9 * cfg.power_w);
    EXPECT_TRUE(res.phases.selective_mode());
    EXPECT_LT(rel_diff(weighted_sum_idc(res.s, res.phases, ch, kParams, cfg.user_weights), res.current()), 1e-10);
  }
}

TEST(Drivers, SingleUserDesignsAgree) {
  Rng rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const auto cfg = make_config(8, 10, 1);
    const auto ch = realistic_realization(8, 10, 1, rng);
    const double su = run_su_fs(ch, cfg, kParams).current();
    const double fs = run_mu_fs(ch, cfg, kParams, rng).current();
    const double ff = run_mu_ff(ch, cfg, kParams, rng).current();
    EXPECT_LT(rel_diff(su, fs), 0.01);
    EXPECT_GE(fs, ff - 1e-9);
  }
}

TEST(Drivers, SingleSubcarrierFlatEqualsSelective) {
  Rng rng(4);
  const auto cfg = make_config(1, 6, 1);
  for (int trial = 0; trial < 5; ++trial) {
    const auto ch = realistic_realization(1, 6, 1, rng);
    EXPECT_LT(rel_diff(run_mu_ff(ch, cfg, kParams, rng).current(), run_su_fs(ch, cfg, kParams).current()), 1e-6);
  }
}

TEST(Drivers, BaselinesBelowJointDesign) {
  Rng rng(5);
  const auto cfg = make_config(8, 10, 1);
  for (int trial = 0; trial < 5; ++trial) {
    const auto ch = realistic_realization(8, 10, 1, rng);
    const double su = run_su_fs(ch, cfg, kParams).current();
    EXPECT_LE(run_ass(ch, cfg, kParams, AssMode::kFsAligned).current(), su * (1 + 1e-12));
    EXPECT_LT(run_no_irs(ch, cfg, kParams).current(), su);
    EXPECT_LE(run_ass(ch, cfg, kParams, AssMode::kNoIrs).current(),
              run_ass(ch, cfg, kParams, AssMode::kFsAligned).current() * (1 + 1e-12));
  }
}

TEST(Drivers, NoIrsIgnoresReflection) {
  Rng rng(6);
  const auto cfg = make_config(4, 3, 1);
  auto ch = realistic_realization(4, 3, 1, rng);
  const double a = run_no_irs(ch, cfg, kParams).current();
  ch.incident *= 10.0;
  EXPECT_EQ(run_no_irs(ch, cfg, kParams).current(), a);
  EXPECT_EQ(run_no_irs(ch, cfg, kParams).phases.elements(), 0);
}

TEST(Drivers, DeterministicForSeed) {
  Rng chan(7);
  const auto cfg = make_config(4, 4, 2);
  const auto ch = realistic_realization(4, 4, 2, chan);
  Rng a(99), b(99);
  const auto ra = run_mu_ff(ch, cfg, kParams, a), rb = run_mu_ff(ch, cfg, kParams, b);
  EXPECT_EQ(ra.trace, rb.trace);
  EXPECT_EQ(ra.s, rb.s);
}

TEST(Drivers, AssSingleToneOnStrongestSubcarrier) {
  Rng rng(8);
  const auto cfg = make_config(6, 4, 1);
  const auto ch = realistic_realization(6, 4, 1, rng);
  const auto res = run_ass(ch, cfg, kParams, AssMode::kNoIrs);
  int active = 0;
  for (Eigen::Index n = 0; n < res.s.size(); ++n) active += std::abs(res.s[n]) > 0.0;
  EXPECT_EQ(active, 1);
  EXPECT_NEAR(waveform_power(res.s), cfg.power_w, 1e-12 * cfg.power_w);
}

TEST(Drivers, MultiUserOnlyDesignsRejectSingleUserCalls) {
  Rng rng(9);
  const auto cfg = make_config(2, 2, 2);
  const auto ch = random_realization(2, 2, 2, rng);
  EXPECT_THROW(run_su_fs(ch, cfg, kParams), ContractViolation);
  EXPECT_THROW(run_ass(ch, cfg, kParams, AssMode::kNoIrs), ContractViolation);
}

TEST(Quantization, Examples) {
  const QuantizationScheme one{1};
  EXPECT_DOUBLE_EQ(quantize_angle(0.3, one), 0.0);
  EXPECT_DOUBLE_EQ(quantize_angle(3.0, one), kPi);
  EXPECT_DOUBLE_EQ(quantize_angle(kPi / 2, one), 0.0);  // tie
  EXPECT_DOUBLE_EQ(quantize_angle(kTwoPi - 0.1, one), 0.0);
  EXPECT_DOUBLE_EQ(quantize_angle(-0.2, one), 0.0);
  const QuantizationScheme two{2};
  EXPECT_DOUBLE_EQ(quantize_angle(1.5, two), kPi / 2);
  EXPECT_DOUBLE_EQ(quantize_angle(-1.5, two), 3 * kPi / 2);
  EXPECT_THROW(quantize_angle(0.0, QuantizationScheme{0}), std::invalid_argument);
}

TEST(Quantization, ErrorBoundedByHalfStep) {
  Rng rng(10);
  for (int bits = 1; bits <= 6; ++bits) {
    const QuantizationScheme q{bits};
    const auto p = PhaseConfig::random(IrsMode::kFrequencySelective, 3, 7, rng);
    const auto out = quantize_phases(p, q);
    EXPECT_LT(out.max_modulus_error(), 1e-15);
    for (Eigen::Index i = 0; i < p.theta.size(); ++i) {
      const double d = std::abs(std::arg(out.theta.data()[i] / p.theta.data()[i]));
      EXPECT_LE(d, q.step() / 2 + 1e-12);
      const double level = std::arg(out.theta.data()[i]) / q.step();
      EXPECT_NEAR(level, std::round(level), 1e-9);
    }
  }
}

TEST(Quantization, FinerGridLosesLess) {
  Rng rng(11);
  const auto cfg = make_config(4, 10, 1);
  for (int trial = 0; trial < 5; ++trial) {
    const auto ch = realistic_realization(4, 10, 1, rng);
    const auto res = run_su_fs(ch, cfg, kParams);
    double prev = 0.0;
    for (int bits : {1, 3, 8}) {
      const auto q = quantize_phases(res.phases, QuantizationScheme{bits});
      const double v = weighted_sum_idc(res.s, q, ch, kParams, cfg.user_weights);
      EXPECT_LE(v, res.current() * (1 + 1e-9));
      if (bits > 1) {
        EXPECT_GE(v, prev * 0.98);
      }
      prev = v;
    }
  }
}

TEST(LargeScale, ClosedFormAndSlope) {
  const double ld = 1e-6, li = 1e-4, lr = 1e-4, p = 4.0;
  const double lam = ld;
  EXPECT_NEAR(large_scale_idc(ld, li, lr, 0, 1, p, kParams),
              kParams.k2 * p * lam + 4.5 * kParams.k4 * p * p * lam * lam, 1e-20);
  // Large L: the quartic term makes current grow like L^4.
  const double a = large_scale_idc(ld, li, lr, 1000, 16, p, kParams);
  const double b = large_scale_idc(ld, li, lr, 2000, 16, p, kParams);
  EXPECT_NEAR(std::log2(b / a), 4.0, 0.01);
  EXPECT_THROW(large_scale_idc(-1.0, li, lr, 1, 1, p, kParams), std::invalid_argument);
}
