#pragma once

// Frequency-selective Rayleigh fading for the BS -> user (direct),
// BS -> IRS (incident) and IRS -> user (reflected) links.

#include "irswpt/core.hpp"
#include "irswpt/system.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

namespace irswpt {

/// BS at the origin, user at horizontal distance D_d, IRS at horizontal
/// offset D_h and height D_v above the BS-user line.
struct Layout {
  double horizontal_m = 2.0;  // D_h
  double vertical_m = 2.0;    // D_v
  double direct_m = 15.0;     // D_d
  double exponent_direct = 2.0;
  double exponent_incident = 2.0;
  double exponent_reflected = 2.0;
  double reference_gain = 3.1622776601683794e-04;  // r0 = -35 dB
  double reference_m = 1.0;                         // d0

  void validate() const {
    require_arg(horizontal_m >= 0.0, "horizontal distance must be >= 0");
    require_arg(vertical_m >= 0.0, "vertical distance must be >= 0");
    require_arg(direct_m > 0.0, "direct distance must be positive");
    require_arg(exponent_direct >= 0.0 && exponent_incident >= 0.0 &&
                    exponent_reflected >= 0.0,
                "pathloss exponents must be >= 0");
    require_arg(reference_gain > 0.0, "reference gain must be positive");
    require_arg(reference_m > 0.0, "reference distance must be positive");
    const double di = std::hypot(horizontal_m, vertical_m);
    const double dr = std::hypot(vertical_m, direct_m - horizontal_m);
    require_arg(di > 0.0 && dr > 0.0, "IRS must not coincide with BS or user");
  }
};

struct LinkDistances {
  double incident_m;
  double reflected_m;
};

/// r0 * (d / d0)^-exponent.
inline double pathloss(double distance_m, double exponent, const Layout& layout) {
  require_arg(distance_m > 0.0, "pathloss distance must be positive");
  return layout.reference_gain * std::pow(distance_m / layout.reference_m, -exponent);
}

inline LinkDistances layout_distances(const Layout& layout) {
  return {std::hypot(layout.horizontal_m, layout.vertical_m),
          std::hypot(layout.vertical_m, layout.direct_m - layout.horizontal_m)};
}

/// Large-scale gains (Lambda_d, Lambda_i, Lambda_r) of the three links.
struct LinkGains {
  double direct;
  double incident;
  double reflected;
};

inline LinkGains link_gains(const Layout& layout) {
  const LinkDistances d = layout_distances(layout);
  return {pathloss(layout.direct_m, layout.exponent_direct, layout),
          pathloss(d.incident_m, layout.exponent_incident, layout),
          pathloss(d.reflected_m, layout.exponent_reflected, layout)};
}

/// Tapped delay line profile. Powers are normalized to unit sum on
/// construction.
class PowerDelayProfile {
 public:
  PowerDelayProfile(std::vector<double> delays_s, std::vector<double> powers)
      : delays_(std::move(delays_s)), powers_(std::move(powers)) {
    require_arg(!delays_.empty(), "power delay profile needs at least one tap");
    require_arg(delays_.size() == powers_.size(),
                "tap delay and power lists differ in length");
    double total = 0.0;
    for (std::size_t t = 0; t < delays_.size(); ++t) {
      require_arg(std::isfinite(delays_[t]) && delays_[t] >= 0.0,
                  "tap delays must be non-negative");
      if (t > 0)
        require_arg(delays_[t] > delays_[t - 1], "tap delays must be strictly increasing");
      require_arg(std::isfinite(powers_[t]) && powers_[t] >= 0.0,
                  "tap powers must be non-negative");
      total += powers_[t];
    }
    require_arg(total > 0.0, "tap powers must not all be zero");
    for (double& p : powers_) p /= total;
  }

  static PowerDelayProfile from_db(const std::vector<double>& delays_ns,
                                   const std::vector<double>& powers_db) {
    std::vector<double> delays, powers;
    for (double d : delays_ns) delays.push_back(d * 1e-9);
    for (double p : powers_db) powers.push_back(db_to_linear(p));
    return {std::move(delays), std::move(powers)};
  }

  /// IEEE 802.11 TGn channel model D, 18 taps, cluster powers combined.
  static PowerDelayProfile model_d() {
    static const std::vector<double> kDelaysNs = {
        0, 10, 20, 30, 40, 50, 60, 70, 80, 90, 110, 140, 170, 200, 240, 290, 340, 390};
    static const std::vector<double> kPowersDb = {
        0.0,   -0.9,  -1.7,   -2.6,   -3.5,   -4.3,   -5.2,   -6.1,   -6.9,
        -7.8,  -4.63, -7.22,  -9.82,  -12.42, -13.65, -17.95, -22.34, -26.7};
    return from_db(kDelaysNs, kPowersDb);
  }

  /// Exponentially decaying profile: power ~ exp(-delay / decay).
  static PowerDelayProfile exponential(int taps, double spacing_s, double decay_s) {
    require_arg(taps >= 1 && spacing_s > 0.0 && decay_s > 0.0,
                "invalid exponential profile parameters");
    std::vector<double> delays, powers;
    for (int t = 0; t < taps; ++t) {
      delays.push_back(t * spacing_s);
      powers.push_back(std::exp(-t * spacing_s / decay_s));
    }
    return {std::move(delays), std::move(powers)};
  }

  /// Two columns per line: delay_ns power_db. '#' starts a comment.
  static PowerDelayProfile parse(std::istream& in, const std::string& source = "<pdp>") {
    std::vector<double> delays_ns, powers_db;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      std::istringstream fields(line);
      double delay = 0.0, power = 0.0;
      if (!(fields >> delay)) {
        fields.clear();
        std::string rest;
        if (fields >> rest)
          throw std::invalid_argument(source + ":" + std::to_string(line_no) +
                                      ": expected 'delay_ns power_db'");
        continue;  // blank or comment-only line
      }
      std::string extra;
      if (!(fields >> power) || (fields >> extra))
        throw std::invalid_argument(source + ":" + std::to_string(line_no) +
                                    ": expected 'delay_ns power_db'");
      delays_ns.push_back(delay);
      powers_db.push_back(power);
    }
    if (delays_ns.empty()) throw std::invalid_argument(source + ": no taps found");
    return from_db(delays_ns, powers_db);
  }

  static PowerDelayProfile load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open power delay profile: " + path);
    return parse(in, path);
  }

  const std::vector<double>& delays() const { return delays_; }
  const std::vector<double>& powers() const { return powers_; }
  std::size_t size() const { return delays_.size(); }

 private:
  std::vector<double> delays_;
  std::vector<double> powers_;
};

/// Independent CSCG taps, tap t with variance powers()[t].
inline CVector generate_taps(const PowerDelayProfile& pdp, Rng& rng) {
  CVector taps(static_cast<Eigen::Index>(pdp.size()));
  for (std::size_t t = 0; t < pdp.size(); ++t)
    taps[static_cast<Eigen::Index>(t)] = sample_cscg(rng, pdp.powers()[t]);
  return taps;
}

/// Baseband response at offsets n * spacing, n = 0..N-1.
inline CVector frequency_response(const CVector& taps, const PowerDelayProfile& pdp,
                                  int n_subcarriers, double spacing_hz) {
  require_arg(n_subcarriers >= 1, "need at least one subcarrier");
  require_arg(spacing_hz > 0.0, "subcarrier spacing must be positive");
  require(static_cast<std::size_t>(taps.size()) == pdp.size(),
          "tap vector does not match the delay profile");
  CVector response = CVector::Zero(n_subcarriers);
  for (int n = 0; n < n_subcarriers; ++n) {
    cdouble acc = 0.0;
    for (std::size_t t = 0; t < pdp.size(); ++t) {
      const double phase = -kTwoPi * n * spacing_hz * pdp.delays()[t];
      acc += taps[static_cast<Eigen::Index>(t)] * std::polar(1.0, phase);
    }
    response[n] = acc;
  }
  return response;
}

/// Frequency-domain channels of one realization.
struct ChannelRealization {
  CMatrix direct;                  // K x N, h_d,q,n
  CMatrix incident;                // N x L, h_i at subcarrier n, element l
  std::vector<CMatrix> reflected;  // K entries of N x L, h_r,q at (n, l)

  int users() const { return static_cast<int>(direct.rows()); }
  int subcarriers() const { return static_cast<int>(direct.cols()); }
  int elements() const { return static_cast<int>(incident.cols()); }

  void check() const {
    require(static_cast<int>(reflected.size()) == users(), "reflected channel count != K");
    require(incident.rows() == direct.cols(), "incident channel rows != N");
    for (const auto& r : reflected)
      require(r.rows() == direct.cols() && r.cols() == incident.cols(),
              "reflected channel must be N x L");
  }

  bool all_finite() const {
    bool ok = direct.allFinite() && incident.allFinite();
    for (const auto& r : reflected) ok = ok && r.allFinite();
    return ok;
  }
};

/// Draws one realization. Draw order is fixed: direct per user, then per
/// element the incident link followed by each user's reflected link, so
/// the first L' elements of an L-element draw match an L'-element draw
/// from the same stream.
inline ChannelRealization generate_realization(const SystemConfig& config,
                                               const Layout& layout, Rng& rng,
                                               const PowerDelayProfile& pdp) {
  config.validate();
  layout.validate();
  const int n = config.subcarriers, l = config.elements, k = config.users;
  const double spacing = config.subcarrier_spacing();
  const LinkGains gains = link_gains(layout);
  const double amp_d = std::sqrt(gains.direct);
  const double amp_i = std::sqrt(gains.incident);
  const double amp_r = std::sqrt(gains.reflected);

  ChannelRealization ch;
  ch.direct.resize(k, n);
  ch.incident.resize(n, l);
  ch.reflected.assign(static_cast<std::size_t>(k), CMatrix(n, l));
  for (int q = 0; q < k; ++q)
    ch.direct.row(q) = amp_d * frequency_response(generate_taps(pdp, rng), pdp, n, spacing).transpose();
  for (int e = 0; e < l; ++e) {
    ch.incident.col(e) = amp_i * frequency_response(generate_taps(pdp, rng), pdp, n, spacing);
    for (int q = 0; q < k; ++q)
      ch.reflected[static_cast<std::size_t>(q)].col(e) =
          amp_r * frequency_response(generate_taps(pdp, rng), pdp, n, spacing);
  }
  return ch;
}

inline ChannelRealization generate_realization(const SystemConfig& config,
                                               const Layout& layout, Rng& rng) {
  static const PowerDelayProfile kModelD = PowerDelayProfile::model_d();
  return generate_realization(config, layout, rng, kModelD);
}

}  // namespace irswpt
