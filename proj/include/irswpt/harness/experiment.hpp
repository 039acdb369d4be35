#pragma once

// Seeded Monte-Carlo execution of an ExperimentSpec. Each task owns its RNG
// streams, so results do not depend on the number of worker threads.

#include "irswpt/harness/config.hpp"
#include "irswpt/harness/results.hpp"
#include "irswpt/optimize.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <limits>
#include <map>
#include <optional>
#include <thread>
#include <utility>
#include <vector>

namespace irswpt::harness {

namespace detail {

inline constexpr std::uint64_t kRealizationStream = 1;
inline constexpr std::uint64_t kAlgorithmStream = 100;

inline std::uint64_t algorithm_index(const std::string& alg) {
  const auto& ids = algorithm_ids();
  return static_cast<std::uint64_t>(std::find(ids.begin(), ids.end(), alg) - ids.begin());
}

inline std::uint64_t pack(int sweep, int trial) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(sweep)) << 32) |
         static_cast<std::uint32_t>(trial);
}

inline Rng realization_rng(const ExperimentSpec& spec, int sweep, int trial) {
  return make_rng(spec.seed, kRealizationStream, pack(sweep, trial));
}

inline Rng algorithm_rng(const ExperimentSpec& spec, const std::string& alg, int sweep, int trial) {
  return make_rng(spec.seed, kAlgorithmStream, pack(sweep, trial), algorithm_index(alg));
}

/// System and layout for one sweep point.
inline std::pair<SystemConfig, Layout> configure(const ExperimentSpec& spec, double value) {
  SystemConfig cfg = spec.system;
  Layout layout = spec.layout;
  const std::string& s = spec.scenario;
  if (s == "idc_vs_N" || (s == "scaling_check" && spec.scaling_parameter == "N"))
    cfg.subcarriers = static_cast<int>(value);
  else if (s == "idc_vs_L" || (s == "scaling_check" && spec.scaling_parameter == "L"))
    cfg.elements = static_cast<int>(value);
  else if (s == "bandwidth_sweep")
    cfg.bandwidth_hz = value;
  else if (s == "layout_sweep")
    layout.horizontal_m = value;
  else if (s == "current_region") {
    const double phi = value * kPi / 180.0;
    cfg.user_weights = {std::cos(phi) * std::cos(phi), std::sin(phi) * std::sin(phi)};
  }
  return {cfg, layout};
}

inline OptimizationResult run_algorithm(const std::string& alg, const ChannelRealization& ch,
                                        const SystemConfig& cfg, const RectennaParams& params,
                                        Rng& rng, const DriverOptions& options) {
  if (alg == "su_fs") return run_su_fs(ch, cfg, params);
  if (alg == "mu_fs") return run_mu_fs(ch, cfg, params, rng);
  if (alg == "mu_ff") return run_mu_ff(ch, cfg, params, rng, options);
  if (alg == "no_irs") return run_no_irs(ch, cfg, params);
  if (alg == "rand_phase") return run_rand_phase(ch, cfg, params, rng);
  if (alg == "ass_fs") return run_ass(ch, cfg, params, AssMode::kFsAligned);
  if (alg == "ass_no_irs") return run_ass(ch, cfg, params, AssMode::kNoIrs);
  throw std::invalid_argument("unknown algorithm '" + alg + "'");
}

struct Timed {
  OptimizationResult result;
  double wall_ms = 0.0;
  bool failed = false;
};

template <typename F>
Timed timed(bool timing, F&& body) {
  Timed out;
  const auto start = std::chrono::steady_clock::now();
  try {
    out.result = body();
  } catch (const std::exception&) {
    out.failed = true;
  }
  if (timing)
    out.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return out;
}

struct Task {
  int sweep = 0;  // -1: the task covers every sweep value
  int trial = 0;
};

struct TaskOutput {
  std::vector<std::pair<int, ResultRow>> rows;  // (sweep index, row)
  std::map<std::string, long> randomized_steps;
};

class RowFactory {
 public:
  RowFactory(const ExperimentSpec& spec) : spec_(spec), name_(spec.sweep_name()) {}

  ResultRow make(const std::string& alg, int sweep, int trial, const Timed& run, double current) const {
    ResultRow r;
    r.scenario = spec_.scenario;
    r.algorithm = alg;
    r.sweep_name = name_;
    r.sweep_value = spec_.sweep[static_cast<std::size_t>(sweep)];
    r.trial = trial;
    r.wall_ms = run.wall_ms;
    if (run.failed || !std::isfinite(current)) {
      r.current_amps = std::nan("");
      r.iterations = 0;
      r.converged = false;
    } else {
      r.current_amps = current;
      r.iterations = run.result.iterations;
      r.converged = run.result.converged;
    }
    return r;
  }

 private:
  const ExperimentSpec& spec_;
  std::string name_;
};

inline TaskOutput run_task(const ExperimentSpec& spec, const PowerDelayProfile& pdp, const Task& task) {
  TaskOutput out;
  const RowFactory rows(spec);
  const DriverOptions options{spec.sdp};
  const std::string& scenario = spec.scenario;
  const int n_sweep = static_cast<int>(spec.sweep.size());
  auto note = [&](const std::string& alg, const Timed& run) {
    if (!run.failed) out.randomized_steps[alg] += run.result.randomized_steps;
  };
  auto realization = [&](const SystemConfig& cfg, const Layout& layout, int sweep_key)
      -> std::optional<ChannelRealization> {
    try {
      Rng rng = realization_rng(spec, sweep_key, task.trial);
      ChannelRealization ch = generate_realization(cfg, layout, rng, pdp);
      if (!ch.all_finite()) return std::nullopt;
      return ch;
    } catch (const std::exception&) {
      return std::nullopt;
    }
  };
  const Timed failed_run{{}, 0.0, true};

  if (scenario == "convergence") {
    const auto [cfg, layout] = configure(spec, 0.0);
    const auto ch = realization(cfg, layout, 0);
    for (const auto& alg : spec.algorithms) {
      Rng rng = algorithm_rng(spec, alg, 0, task.trial);
      const Timed run = ch ? timed(spec.timing, [&] {
        return run_algorithm(alg, *ch, cfg, spec.rectenna, rng, options);
      }) : failed_run;
      note(alg, run);
      for (int i = 0; i < n_sweep; ++i) {
        double value = std::nan("");
        if (!run.failed && !run.result.trace.empty()) {
          const auto at = std::min<std::size_t>(static_cast<std::size_t>(spec.sweep[static_cast<std::size_t>(i)]),
                                                run.result.trace.size() - 1);
          value = run.result.trace[at];
        }
        out.rows.emplace_back(i, rows.make(alg, i, task.trial, run, value));
      }
    }
    return out;
  }

  if (scenario == "discrete_bits") {
    const auto [cfg, layout] = configure(spec, 0.0);
    const auto ch = realization(cfg, layout, 0);
    for (const auto& alg : spec.algorithms) {
      Rng rng = algorithm_rng(spec, alg, 0, task.trial);
      const Timed run = ch ? timed(spec.timing, [&] {
        return run_algorithm(alg, *ch, cfg, spec.rectenna, rng, options);
      }) : failed_run;
      note(alg, run);
      for (int i = 0; i < n_sweep; ++i) {
        const int bits = static_cast<int>(spec.sweep[static_cast<std::size_t>(i)]);
        Timed scored = run;
        double value = run.failed ? std::nan("") : run.result.current();
        if (!run.failed && bits > 0 && run.result.phases.elements() > 0) {
          try {
            const PhaseConfig q = quantize_phases(run.result.phases, QuantizationScheme{bits});
            if (spec.quantize_refine) {
              scored.result = run_waveform_only(irswpt::detail::composite_channels(*ch, q),
                                                run.result.s, cfg, spec.rectenna);
              value = scored.result.current();
            } else {
              value = weighted_sum_idc(run.result.s, q, *ch, spec.rectenna, cfg.user_weights);
            }
          } catch (const std::exception&) {
            scored.failed = true;
          }
        }
        out.rows.emplace_back(i, rows.make(alg, i, task.trial, scored, value));
      }
    }
    return out;
  }

  // One realization per (sweep value, trial). current_region and
  // scaling_check reuse one stream per trial across the sweep, giving
  // paired samples (nested IRS draws for an L sweep).
  const int i = task.sweep;
  const auto [cfg, layout] = configure(spec, spec.sweep[static_cast<std::size_t>(i)]);
  const bool shared = scenario == "current_region" || scenario == "scaling_check";
  const auto ch = realization(cfg, layout, shared ? 0 : i);
  for (const auto& alg : spec.algorithms) {
    Rng rng = algorithm_rng(spec, alg, i, task.trial);
    const Timed run = ch ? timed(spec.timing, [&] {
      return run_algorithm(alg, *ch, cfg, spec.rectenna, rng, options);
    }) : failed_run;
    note(alg, run);
    const double value = run.failed ? std::nan("") : run.result.current();
    out.rows.emplace_back(i, rows.make(alg, i, task.trial, run, value));
    if (scenario == "current_region") {
      for (std::size_t q = 0; q < 2; ++q) {
        const double user = !run.failed && run.result.user_currents.size() > q
                                ? run.result.user_currents[q]
                                : std::nan("");
        out.rows.emplace_back(i, rows.make(alg + "/user" + std::to_string(q + 1), i, task.trial, run, user));
      }
    }
  }
  return out;
}

inline void add_fits(const ExperimentSpec& spec, ExperimentResult& result) {
  if (spec.scenario != "scaling_check") return;
  const bool loglog = spec.scaling_parameter == "L";
  nlohmann::ordered_json fits = nlohmann::ordered_json::object();
  for (const auto& alg : spec.algorithms) {
    std::vector<double> x, y;
    for (const auto& r : result.rows) {
      if (!r.aggregate() || r.algorithm != alg || !(r.current_amps > 0.0)) continue;
      x.push_back(loglog ? std::log(r.sweep_value) : r.sweep_value);
      y.push_back(loglog ? std::log(r.current_amps) : r.current_amps);
    }
    const LineFit fit = fit_line(x, y);
    nlohmann::ordered_json f;
    f["model"] = loglog ? "log(current) vs log(L)" : "current vs N";
    f["slope"] = std::stod(format_number(fit.slope));
    f["intercept"] = std::stod(format_number(fit.intercept));
    f["r_squared"] = std::stod(format_number(fit.r_squared));
    f["points"] = x.size();
    fits[alg] = std::move(f);
  }
  result.metadata["fits"] = std::move(fits);
}

}  // namespace detail

inline ExperimentResult run_experiment(const ExperimentSpec& spec, int parallelism = 1) {
  spec.validate();
  require_arg(parallelism >= 1, "parallelism must be >= 1");
  const PowerDelayProfile pdp = spec.channel.build();
  const bool per_trial = spec.scenario == "convergence" || spec.scenario == "discrete_bits";
  std::vector<detail::Task> tasks;
  if (per_trial) {
    for (int t = 0; t < spec.trials; ++t) tasks.push_back({-1, t});
  } else {
    for (int i = 0; i < static_cast<int>(spec.sweep.size()); ++i)
      for (int t = 0; t < spec.trials; ++t) tasks.push_back({i, t});
  }

  std::vector<detail::TaskOutput> outputs(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < tasks.size(); k = next++) outputs[k] = detail::run_task(spec, pdp, tasks[k]);
  };
  const int workers = std::min<int>(parallelism, static_cast<int>(std::max<std::size_t>(tasks.size(), 1)));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  // Ordered assembly: sweep value, then trial, then algorithm; aggregates
  // follow the trial rows of each sweep value.
  ExperimentResult result;
  std::map<std::string, long> randomized;
  for (const auto& o : outputs)
    for (const auto& [alg, n] : o.randomized_steps) randomized[alg] += n;
  long failed = 0;
  for (int i = 0; i < static_cast<int>(spec.sweep.size()); ++i) {
    std::vector<std::string> order;
    std::map<std::string, std::vector<const ResultRow*>> groups;
    std::vector<ResultRow> block;
    for (const auto& o : outputs)
      for (const auto& [idx, row] : o.rows)
        if (idx == i) block.push_back(row);
    for (const auto& row : block) {
      result.rows.push_back(row);
      failed += row.failed() ? 1 : 0;
    }
    const std::size_t base = result.rows.size() - block.size();
    for (std::size_t k = base; k < result.rows.size(); ++k) {
      const ResultRow& row = result.rows[k];
      if (!groups.count(row.algorithm)) order.push_back(row.algorithm);
      groups[row.algorithm].push_back(&row);
    }
    std::vector<ResultRow> aggregates;
    for (const auto& alg : order) aggregates.push_back(aggregate_rows(groups[alg]));
    for (auto& a : aggregates) result.rows.push_back(std::move(a));
  }

  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(fnv1a64(spec.canonical())));
  auto& meta = result.metadata;
  meta["tool"] = "irswpt";
  meta["version"] = kToolVersion;
  meta["scenario"] = spec.scenario;
  meta["sweep_name"] = spec.sweep_name();
  meta["seed"] = spec.seed;
  meta["trials"] = spec.trials;
  meta["config_hash"] = hash;
  meta["failed_rows"] = failed;
  nlohmann::ordered_json rand = nlohmann::ordered_json::object();
  for (const auto& alg : spec.algorithms)
    if (alg == "mu_ff") rand[alg] = randomized.count(alg) ? randomized[alg] : 0;
  meta["randomized_extractions"] = std::move(rand);
  detail::add_fits(spec, result);
  return result;
}

}  // namespace irswpt::harness
