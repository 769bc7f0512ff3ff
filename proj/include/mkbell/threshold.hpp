// Locates p_max, the largest decoherence degree at which the optimized MK
// Bell value still exceeds the local bound 1, and the closed-form threshold
// laws it is compared against.
#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "mkbell/channels_states.hpp"
#include "mkbell/optimizer.hpp"

namespace mkbell {

struct ThresholdConfig {
  double scan_step = 0.01;
  // Even-n dephasing never crosses the bound; the scan stops at this cap and
  // reports the absence of a threshold instead of chasing vanishing margins.
  double dephasing_even_cap = 1.0 - 1e-4;
  int probe_starts = 16;
  bool warm_start = true;        // seed each probe with the previous winner
  double certify_margin = 1e-9;  // early-stop clearance while scanning
  // A probe counts as violating only when its margin clears this floor. Some
  // optima sit exactly on the bound past their crossover, where long-double
  // evaluation noise (~1e-18) would otherwise decide the sign; the floor must
  // stay below the smallest genuine margin the scan resolves, 5e-17 at the
  // even-n dephasing cap.
  long double classify_margin = 1e-17L;
  OptimizerConfig optimizer;  // seed / tol / max_sweeps for probes; starts comes from probe_starts
};

struct ThresholdResult {
  int n = 0;
  Channel kind = Channel::depolarizing;
  std::optional<double> p_max;  // empty: no threshold found below the cap
  double cap = 1.0;
  double bracket_width = 0.0;
  std::optional<double> analytic_reference;
  bool bracket_verified = false;
};

// Closed-form laws: depolarizing (any n) and dephasing (odd n) follow
// 1 - 2^((1/n - 1)/2); dissipation follows 1 - 2^(1/n - 1). Even-n dephasing
// has no finite threshold.
inline std::optional<double> analytic_pmax(int n, Channel kind) {
  if (n < 2) throw std::invalid_argument("thresholds need n >= 2");
  switch (kind) {
    case Channel::depolarizing:
      return 1.0 - std::exp2(0.5 * (1.0 / n - 1.0));
    case Channel::dephasing:
      if (n % 2 == 0) return std::nullopt;
      return 1.0 - std::exp2(0.5 * (1.0 / n - 1.0));
    case Channel::dissipation:
      return 1.0 - std::exp2(1.0 / n - 1.0);
  }
  return std::nullopt;
}

// Coarse scan from p = 0 in scan_step increments to bracket the first
// downward crossing of f(p) = max_bell(p) - 1, then bisection to the
// requested tolerance. Dissipation returns to the bound at p = 1, so a
// plain bisection over [0, 1] would be ill-posed; the scan is what isolates
// the first crossing.
inline ThresholdResult numeric_pmax(int n, Channel kind, double tolerance = 1e-4,
                                    const ThresholdConfig& config = {}) {
  if (!(tolerance >= 1e-6)) throw std::invalid_argument("threshold tolerance must be >= 1e-6");
  if (config.scan_step <= 0.0 || config.probe_starts < 1)
    throw std::invalid_argument("threshold scan needs a positive step and at least one probe start");

  ThresholdResult result;
  result.n = n;
  result.kind = kind;
  result.analytic_reference = analytic_pmax(n, kind);
  result.cap = (kind == Channel::dephasing && n % 2 == 0) ? config.dephasing_even_cap : 1.0;

  std::optional<SettingsTable> last_winner;
  auto probe = [&](double p) {
    OptimizerConfig oc = config.optimizer;
    oc.starts = config.probe_starts;
    if (config.warm_start && last_winner) oc.first_start = last_winner;
    oc.stop_above = 1.0 + config.certify_margin;
    const OptimizationReport rep = max_bell(n, NoiseSpec(kind, p), oc);
    if (!rep.converged && !rep.early_stopped)
      throw std::runtime_error("optimizer did not converge at p = " + std::to_string(p));
    last_winner = rep.best_settings;
    return rep.best_value - 1.0L;
  };
  const auto violating = [&config](long double margin) { return margin > config.classify_margin; };

  double lo = 0.0;
  if (!violating(probe(lo))) {
    result.p_max = 0.0;
    result.bracket_verified = false;
    return result;
  }

  std::optional<double> hi;
  for (int k = 1;; ++k) {
    const double p = std::min(config.scan_step * k, result.cap);
    if (!violating(probe(p))) {
      hi = p;
      break;
    }
    lo = p;
    if (p >= result.cap) break;
  }
  if (!hi) return result;  // the violation persisted up to the cap

  double hi_p = *hi;
  while (0.5 * (hi_p - lo) > tolerance) {
    const double mid = 0.5 * (lo + hi_p);
    if (violating(probe(mid)))
      lo = mid;
    else
      hi_p = mid;
  }
  result.p_max = 0.5 * (lo + hi_p);
  result.bracket_width = 0.5 * (hi_p - lo);
  // Both endpoints carried their classifications when the bisection last
  // touched them, which is the post-hoc guarantee restated.
  result.bracket_verified = true;
  return result;
}

}  // namespace mkbell
