#pragma once

// Flat, sectioned key = value experiment configuration.
//
//   # comment
//   [experiment]
//   scenario = idc_vs_N
//   algorithms = mu_fs, mu_ff
//   sweep = 1, 2, 4, 8
//
// Unknown sections or keys and repeated keys are rejected with the line
// number. Power is given in dBm, the reference gain in dB.

#include "irswpt/channel.hpp"
#include "irswpt/rectenna.hpp"
#include "irswpt/solvers.hpp"
#include "irswpt/system.hpp"

#include <cstdint>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace irswpt::harness {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline const std::vector<std::string>& scenario_ids() {
  static const std::vector<std::string> ids = {
      "idc_vs_N",      "idc_vs_L",       "convergence",   "bandwidth_sweep",
      "current_region", "discrete_bits", "layout_sweep", "scaling_check"};
  return ids;
}

inline const std::vector<std::string>& algorithm_ids() {
  static const std::vector<std::string> ids = {"su_fs",      "mu_fs",  "mu_ff",     "no_irs",
                                               "rand_phase", "ass_fs", "ass_no_irs"};
  return ids;
}

inline bool single_user_only(const std::string& alg) {
  return alg == "su_fs" || alg == "ass_fs" || alg == "ass_no_irs";
}

struct ChannelSpec {
  std::string profile = "model_d";  // model_d | exponential | file
  std::string profile_file;
  int exp_taps = 18;
  double exp_spacing_ns = 10.0;
  double exp_decay_ns = 50.0;

  PowerDelayProfile build() const {
    if (profile == "model_d") return PowerDelayProfile::model_d();
    if (profile == "exponential")
      return PowerDelayProfile::exponential(exp_taps, exp_spacing_ns * 1e-9, exp_decay_ns * 1e-9);
    return PowerDelayProfile::load(profile_file);
  }
};

struct ExperimentSpec {
  std::string scenario = "idc_vs_N";
  std::vector<std::string> algorithms{"mu_fs", "mu_ff"};
  std::vector<double> sweep;  // empty until defaults are applied
  int trials = 100;
  std::uint64_t seed = 1;
  std::string scaling_parameter = "L";  // scaling_check only: L or N
  bool timing = true;
  bool quantize_refine = false;  // discrete_bits: rerun the waveform loop on quantized phases

  SystemConfig system;
  Layout layout;
  RectennaParams rectenna;
  ChannelSpec channel;
  SdpOptions sdp;

  std::string sweep_name() const {
    if (scenario == "idc_vs_N") return "N";
    if (scenario == "idc_vs_L") return "L";
    if (scenario == "convergence") return "iteration";
    if (scenario == "bandwidth_sweep") return "bandwidth_hz";
    if (scenario == "current_region") return "weight_angle_deg";
    if (scenario == "discrete_bits") return "bits";
    if (scenario == "layout_sweep") return "horizontal_m";
    return scaling_parameter;
  }

  std::vector<double> default_sweep() const {
    if (scenario == "idc_vs_N") return {1, 2, 4, 8, 16};
    if (scenario == "idc_vs_L") return {5, 10, 20, 40};
    if (scenario == "convergence") {
      std::vector<double> v;
      for (int i = 0; i <= 20; ++i) v.push_back(i);
      return v;
    }
    if (scenario == "bandwidth_sweep") return {1e6, 5e6, 10e6, 20e6};
    if (scenario == "current_region") return {0, 15, 30, 45, 60, 75, 90};
    if (scenario == "discrete_bits") return {0, 1, 2, 3};
    if (scenario == "layout_sweep") return {1, 3, 5, 7, 9, 11, 13};
    if (scaling_parameter == "N") return {16, 32, 64};
    return {10, 20, 40};
  }

  void validate() const;
  std::string canonical() const;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline double parse_double(const std::string& s) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("expected a number, got '" + s + "'");
  }
  if (pos != s.size()) throw std::invalid_argument("expected a number, got '" + s + "'");
  return v;
}

inline long long parse_int(const std::string& s) {
  const double v = parse_double(s);
  if (v != std::floor(v) || std::abs(v) > 9e15)
    throw std::invalid_argument("expected an integer, got '" + s + "'");
  return static_cast<long long>(v);
}

inline bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw std::invalid_argument("expected a boolean, got '" + s + "'");
}

inline std::string fmt(double v) {
  std::ostringstream out;
  out << std::setprecision(12) << v;
  return out.str();
}

inline std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + fmt(v[i]);
  return out;
}

inline std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + v[i];
  return out;
}

using Setter = std::function<void(ExperimentSpec&, const std::string&)>;

inline const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto num = [](auto field) {
      return [field](ExperimentSpec& s, const std::string& v) { field(s) = parse_double(v); };
    };
    auto integer = [](auto field) {
      return [field](ExperimentSpec& s, const std::string& v) {
        field(s) = static_cast<int>(parse_int(v));
      };
    };
    t["experiment.scenario"] = [](ExperimentSpec& s, const std::string& v) { s.scenario = v; };
    t["experiment.algorithms"] = [](ExperimentSpec& s, const std::string& v) {
      s.algorithms = split_list(v);
    };
    t["experiment.sweep"] = [](ExperimentSpec& s, const std::string& v) {
      s.sweep.clear();
      for (const auto& item : split_list(v)) s.sweep.push_back(parse_double(item));
      if (s.sweep.empty()) throw std::invalid_argument("sweep list is empty");
    };
    t["experiment.trials"] = integer([](ExperimentSpec& s) -> int& { return s.trials; });
    t["experiment.seed"] = [](ExperimentSpec& s, const std::string& v) {
      const long long seed = parse_int(v);
      if (seed < 0) throw std::invalid_argument("seed must be non-negative");
      s.seed = static_cast<std::uint64_t>(seed);
    };
    t["experiment.scaling_parameter"] = [](ExperimentSpec& s, const std::string& v) {
      s.scaling_parameter = v;
    };
    t["experiment.timing"] = [](ExperimentSpec& s, const std::string& v) { s.timing = parse_bool(v); };
    t["experiment.quantize_refine"] = [](ExperimentSpec& s, const std::string& v) {
      s.quantize_refine = parse_bool(v);
    };

    t["system.subcarriers"] = integer([](ExperimentSpec& s) -> int& { return s.system.subcarriers; });
    t["system.elements"] = integer([](ExperimentSpec& s) -> int& { return s.system.elements; });
    t["system.users"] = integer([](ExperimentSpec& s) -> int& { return s.system.users; });
    t["system.power_dbm"] = [](ExperimentSpec& s, const std::string& v) {
      s.system.power_w = dbm_to_watts(parse_double(v));
    };
    t["system.carrier_hz"] = num([](ExperimentSpec& s) -> double& { return s.system.carrier_hz; });
    t["system.bandwidth_hz"] = num([](ExperimentSpec& s) -> double& { return s.system.bandwidth_hz; });
    t["system.weights"] = [](ExperimentSpec& s, const std::string& v) {
      s.system.user_weights.clear();
      for (const auto& item : split_list(v)) s.system.user_weights.push_back(parse_double(item));
    };
    t["system.tolerance"] = num([](ExperimentSpec& s) -> double& { return s.system.tolerance; });
    t["system.max_iterations"] =
        integer([](ExperimentSpec& s) -> int& { return s.system.max_iterations; });
    t["system.randomization_candidates"] =
        integer([](ExperimentSpec& s) -> int& { return s.system.randomization_candidates; });

    t["layout.horizontal_m"] = num([](ExperimentSpec& s) -> double& { return s.layout.horizontal_m; });
    t["layout.vertical_m"] = num([](ExperimentSpec& s) -> double& { return s.layout.vertical_m; });
    t["layout.direct_m"] = num([](ExperimentSpec& s) -> double& { return s.layout.direct_m; });
    t["layout.exponent_direct"] =
        num([](ExperimentSpec& s) -> double& { return s.layout.exponent_direct; });
    t["layout.exponent_incident"] =
        num([](ExperimentSpec& s) -> double& { return s.layout.exponent_incident; });
    t["layout.exponent_reflected"] =
        num([](ExperimentSpec& s) -> double& { return s.layout.exponent_reflected; });
    t["layout.reference_gain_db"] = [](ExperimentSpec& s, const std::string& v) {
      s.layout.reference_gain = db_to_linear(parse_double(v));
    };
    t["layout.reference_m"] = num([](ExperimentSpec& s) -> double& { return s.layout.reference_m; });

    t["rectenna.k2"] = num([](ExperimentSpec& s) -> double& { return s.rectenna.k2; });
    t["rectenna.k4"] = num([](ExperimentSpec& s) -> double& { return s.rectenna.k4; });

    t["channel.profile"] = [](ExperimentSpec& s, const std::string& v) { s.channel.profile = v; };
    t["channel.profile_file"] = [](ExperimentSpec& s, const std::string& v) {
      s.channel.profile_file = v;
    };
    t["channel.exp_taps"] = integer([](ExperimentSpec& s) -> int& { return s.channel.exp_taps; });
    t["channel.exp_spacing_ns"] =
        num([](ExperimentSpec& s) -> double& { return s.channel.exp_spacing_ns; });
    t["channel.exp_decay_ns"] = num([](ExperimentSpec& s) -> double& { return s.channel.exp_decay_ns; });

    t["solver.sdp_tolerance"] = num([](ExperimentSpec& s) -> double& { return s.sdp.tolerance; });
    t["solver.sdp_max_iterations"] =
        integer([](ExperimentSpec& s) -> int& { return s.sdp.max_iterations; });
    t["solver.sdp_backend"] = [](ExperimentSpec& s, const std::string& v) {
      if (v == "auto") s.sdp.backend = SdpBackend::kAuto;
      else if (v == "admm") s.sdp.backend = SdpBackend::kAdmm;
      else if (v == "low_rank") s.sdp.backend = SdpBackend::kLowRank;
      else throw std::invalid_argument("unknown SDP backend '" + v + "'");
    };
    return t;
  }();
  return table;
}

inline std::string backend_name(SdpBackend b) {
  switch (b) {
    case SdpBackend::kAdmm: return "admm";
    case SdpBackend::kLowRank: return "low_rank";
    default: return "auto";
  }
}

}  // namespace detail

inline void ExperimentSpec::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  bool known = false;
  for (const auto& id : scenario_ids()) known = known || id == scenario;
  if (!known) fail("unknown scenario '" + scenario + "'");
  if (trials < 1) fail("trials must be >= 1");
  if (algorithms.empty()) fail("algorithm list is empty");
  std::set<std::string> seen;
  for (const auto& alg : algorithms) {
    bool ok = false;
    for (const auto& id : algorithm_ids()) ok = ok || id == alg;
    if (!ok) fail("unknown algorithm '" + alg + "'");
    if (!seen.insert(alg).second) fail("algorithm '" + alg + "' listed twice");
  }
  if (sweep.empty()) fail("sweep values are empty");
  if (scaling_parameter != "L" && scaling_parameter != "N")
    fail("scaling_parameter must be L or N");
  if (scenario == "current_region" && system.users != 2)
    fail("current_region requires users = 2");
  for (const auto& alg : algorithms)
    if (single_user_only(alg) && system.users != 1)
      fail("algorithm '" + alg + "' requires users = 1");
  if (channel.profile != "model_d" && channel.profile != "exponential" && channel.profile != "file")
    fail("channel profile must be model_d, exponential or file");
  if (channel.profile == "file" && channel.profile_file.empty())
    fail("channel profile 'file' needs profile_file");
  for (double v : sweep) {
    const bool integral = v == std::floor(v);
    if ((scenario == "idc_vs_N" || scenario == "idc_vs_L" || scenario == "convergence" ||
         scenario == "discrete_bits" || scenario == "scaling_check") && !integral)
      fail("sweep values must be integers for scenario " + scenario);
    if ((scenario == "idc_vs_N" || scenario == "idc_vs_L" || scenario == "scaling_check") && v < 1)
      fail("sweep values must be >= 1");
    if ((scenario == "convergence" || scenario == "discrete_bits") && v < 0)
      fail("sweep values must be >= 0");
    if (scenario == "discrete_bits" && v > 16) fail("at most 16 resolution bits");
    if (scenario == "bandwidth_sweep" && v <= 0) fail("bandwidth must be positive");
    if (scenario == "current_region" && (v < 0 || v > 90)) fail("weight angles must lie in [0, 90]");
    if (scenario == "layout_sweep" && v < 0) fail("horizontal distance must be >= 0");
  }
  try {
    system.validate();
    layout.validate();
    rectenna.validate();
    if (sdp.tolerance <= 0 || sdp.max_iterations < 1) throw std::invalid_argument("invalid SDP options");
    if (channel.profile == "exponential")
      PowerDelayProfile::exponential(channel.exp_taps, channel.exp_spacing_ns * 1e-9,
                                     channel.exp_decay_ns * 1e-9);
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
}

/// Every setting as key = value, sorted by section; also the hash input.
inline std::string ExperimentSpec::canonical() const {
  using detail::fmt;
  std::ostringstream o;
  o << "[experiment]\n"
    << "scenario = " << scenario << "\n"
    << "algorithms = " << detail::join(algorithms) << "\n"
    << "sweep = " << detail::join(sweep) << "\n"
    << "trials = " << trials << "\n"
    << "seed = " << seed << "\n"
    << "scaling_parameter = " << scaling_parameter << "\n"
    << "timing = " << (timing ? "true" : "false") << "\n"
    << "quantize_refine = " << (quantize_refine ? "true" : "false") << "\n\n"
    << "[system]\n"
    << "subcarriers = " << system.subcarriers << "\n"
    << "elements = " << system.elements << "\n"
    << "users = " << system.users << "\n"
    << "power_dbm = " << fmt(10.0 * std::log10(system.power_w * 1e3)) << "\n"
    << "carrier_hz = " << fmt(system.carrier_hz) << "\n"
    << "bandwidth_hz = " << fmt(system.bandwidth_hz) << "\n"
    << "weights = " << detail::join(system.user_weights) << "\n"
    << "tolerance = " << fmt(system.tolerance) << "\n"
    << "max_iterations = " << system.max_iterations << "\n"
    << "randomization_candidates = " << system.randomization_candidates << "\n\n"
    << "[layout]\n"
    << "horizontal_m = " << fmt(layout.horizontal_m) << "\n"
    << "vertical_m = " << fmt(layout.vertical_m) << "\n"
    << "direct_m = " << fmt(layout.direct_m) << "\n"
    << "exponent_direct = " << fmt(layout.exponent_direct) << "\n"
    << "exponent_incident = " << fmt(layout.exponent_incident) << "\n"
    << "exponent_reflected = " << fmt(layout.exponent_reflected) << "\n"
    << "reference_gain_db = " << fmt(10.0 * std::log10(layout.reference_gain)) << "\n"
    << "reference_m = " << fmt(layout.reference_m) << "\n\n"
    << "[rectenna]\n"
    << "k2 = " << fmt(rectenna.k2) << "\n"
    << "k4 = " << fmt(rectenna.k4) << "\n\n"
    << "[channel]\n"
    << "profile = " << channel.profile << "\n";
  if (!channel.profile_file.empty()) o << "profile_file = " << channel.profile_file << "\n";
  o << "exp_taps = " << channel.exp_taps << "\n"
    << "exp_spacing_ns = " << fmt(channel.exp_spacing_ns) << "\n"
    << "exp_decay_ns = " << fmt(channel.exp_decay_ns) << "\n\n"
    << "[solver]\n"
    << "sdp_tolerance = " << fmt(sdp.tolerance) << "\n"
    << "sdp_max_iterations = " << sdp.max_iterations << "\n"
    << "sdp_backend = " << detail::backend_name(sdp.backend) << "\n";
  return o.str();
}

/// Parses and validates. Missing settings keep their defaults; a missing
/// sweep takes the scenario's default list; weights default to 1 per user.
inline ExperimentSpec parse_config(std::istream& in, const std::string& source = "<config>") {
  ExperimentSpec spec;
  std::string section, line;
  std::set<std::string> seen;
  bool weights_given = false;
  int line_no = 0;
  auto where = [&](int n) { return source + ":" + std::to_string(n) + ": "; };
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where(line_no) + "malformed section header");
      section = detail::trim(line.substr(1, line.size() - 2));
      static const std::set<std::string> kSections = {"experiment", "system", "layout",
                                                      "rectenna",   "channel", "solver"};
      if (!kSections.count(section))
        throw ConfigError(where(line_no) + "unknown section '" + section + "'");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where(line_no) + "expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (section.empty())
      throw ConfigError(where(line_no) + "key '" + key + "' appears before any section");
    const std::string full = section + "." + key;
    const auto it = detail::setters().find(full);
    if (it == detail::setters().end())
      throw ConfigError(where(line_no) + "unknown key '" + key + "' in section [" + section + "]");
    if (!seen.insert(full).second)
      throw ConfigError(where(line_no) + "key '" + key + "' given twice");
    if (value.empty()) throw ConfigError(where(line_no) + "key '" + key + "' has no value");
    try {
      it->second(spec, value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(where(line_no) + key + ": " + e.what());
    }
    weights_given = weights_given || full == "system.weights";
  }
  if (!weights_given) spec.system.reset_weights();
  if (spec.sweep.empty()) spec.sweep = spec.default_sweep();
  try {
    spec.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return spec;
}

inline ExperimentSpec parse_config_string(const std::string& text,
                                          const std::string& source = "<string>") {
  std::istringstream in(text);
  return parse_config(in, source);
}

inline ExperimentSpec load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  return parse_config(in, path);
}

inline std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace irswpt::harness
