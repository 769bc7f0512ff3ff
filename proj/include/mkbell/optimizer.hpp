// Maximizes the MK Bell value over all measurement angles by see-saw
// coordinate ascent: the Bell value is linear in each observable, so one
// party's two settings can be replaced exactly by the directions of their
// effective fields while everything else is held fixed. Deterministic
// multistart guards the nonconvex landscape; a simplex polish on the
// closed-form evaluator refines the winner in long double.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "mkbell/bell_operator.hpp"
#include "mkbell/channels_states.hpp"
#include "mkbell/correlations.hpp"
#include "mkbell/observables.hpp"

namespace mkbell {

struct OptimizerConfig {
  int starts = 64;
  std::uint64_t seed = 12345;
  double tol = 1e-12;  // a sweep improving the value by less than this ends the start
  // Near p = 0 the dissipation optimum family is almost degenerate and the
  // see-saw contracts at a rate of only 1 - O(p), so small-p runs need a few
  // thousand sweeps to reach stationarity.
  int max_sweeps = 4000;
  bool polish = true;

  // Scanner hooks, inert by default. first_start replaces the random
  // initialization of start 0 (threshold probes warm-start from the previous
  // probe's winner); once the running best exceeds stop_above, remaining
  // starts are skipped and the polish is dropped (only the sign of
  // best_value - 1 is needed while scanning). Both keep runs deterministic.
  std::optional<SettingsTable> first_start;
  double stop_above = std::numeric_limits<double>::infinity();
};

struct OptimizationReport {
  long double best_value = 0;
  SettingsTable best_settings;
  int starts_used = 0;
  bool converged = false;
  // The stop_above certificate fired: best_value is a valid lower-bound
  // witness, but remaining starts and the polish were skipped.
  bool early_stopped = false;
  std::vector<int> iterations;  // sweeps spent per start
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Per-start RNG stream: a fixed function of (seed, index), so concurrent and
// serial schedules draw identical angles.
inline std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t index) {
  return std::mt19937_64(splitmix64(seed + 0x9e3779b97f4a7c15ull * (index + 1)));
}

// Uniform double in [0, 1) from the top 53 bits; bit-identical everywhere.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline ObservableSetting random_setting(std::mt19937_64& rng) {
  const double cos_theta = 1.0 - 2.0 * uniform01(rng);
  const double phi = two_pi * uniform01(rng);
  return ObservableSetting(std::acos(cos_theta), phi);
}

inline SettingsTable random_table(int n, std::mt19937_64& rng) {
  SettingsTable t(n);
  for (int i = 0; i < n; ++i)
    for (int s = 0; s < 2; ++s) t.setting(i, s) = random_setting(rng);
  return t;
}

struct Field {
  double x = 0, y = 0, z = 0;
  double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

// Dense coefficients of the expansion, indexed by word.
inline std::vector<double> dense_coeffs(const BellExpansion& b) {
  std::vector<double> c(std::size_t{1} << b.n, 0.0);
  for (const auto& [w, num] : b.terms)
    c[w] = std::ldexp(static_cast<double>(num), 1 - b.n);
  return c;
}

// Effective fields of one party's two settings, through the dense path:
// F_s[a][b] = sum over words with party's bit = s of coeff * the partial
// contraction of rho with every other party's chosen observable, leaving the
// party's own (row a, column b) slot open. The field is the Pauli projection
// of F_s; the party's contribution to <B> is n_s . f_s per setting.
inline std::array<Field, 2> effective_fields(const SettingsTable& table, const DensityMatrix& rho,
                                             const std::vector<double>& coeff, int party) {
  const int n = table.n();
  const std::int64_t dim = rho.dim();
  const std::uint32_t nwords = 1u << n;
  const std::uint32_t pbit = 1u << party;

  std::vector<std::array<Eigen::Matrix2cd, 2>> obs(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    for (int s = 0; s < 2; ++s) obs[static_cast<std::size_t>(i)][static_cast<std::size_t>(s)] = to_matrix(table.setting(i, s));

  std::complex<double> f[2][2][2] = {};  // [setting][a][b]
  for (std::uint32_t w = 0; w < nwords; ++w) {
    if (w & pbit) continue;  // the pair (w, w | pbit) shares one contraction
    const double c0 = coeff[w];
    const double c1 = coeff[w | pbit];
    if (c0 == 0.0 && c1 == 0.0) continue;
    for (std::int64_t r = 0; r < dim; ++r) {
      for (std::int64_t c = 0; c < dim; ++c) {
        const std::complex<double> rcv = rho.mat(c, r);
        if (rcv == 0.0) continue;
        std::complex<double> prod = rcv;
        for (int i = 0; i < n; ++i) {
          if (i == party) continue;
          prod *= obs[static_cast<std::size_t>(i)][(w >> i) & 1]((r >> i) & 1, (c >> i) & 1);
        }
        const int a = static_cast<int>((r >> party) & 1);
        const int b = static_cast<int>((c >> party) & 1);
        f[0][a][b] += c0 * prod;
        f[1][a][b] += c1 * prod;
      }
    }
  }

  std::array<Field, 2> out;
  for (int s = 0; s < 2; ++s) {
    out[static_cast<std::size_t>(s)].x = (f[s][0][1] + f[s][1][0]).real();
    out[static_cast<std::size_t>(s)].y = (f[s][0][1] - f[s][1][0]).imag();
    out[static_cast<std::size_t>(s)].z = (f[s][0][0] - f[s][1][1]).real();
  }
  return out;
}

// Replace one party's settings by its field directions; returns the Bell
// value at the updated table (the last party's aligned fields sum to the
// whole value). A vanishing field keeps the previous setting.
inline double update_party(SettingsTable& table, const DensityMatrix& rho, const std::vector<double>& coeff,
                           int party) {
  const auto fields = effective_fields(table, rho, coeff, party);
  double value = 0.0;
  for (int s = 0; s < 2; ++s) {
    const Field& g = fields[static_cast<std::size_t>(s)];
    const double norm = g.norm();
    if (norm <= 1e-13) {
      const auto& keep = table.setting(party, s);
      value += std::sin(keep.theta) * (std::cos(keep.phi) * g.x + std::sin(keep.phi) * g.y) +
               std::cos(keep.theta) * g.z;
      continue;
    }
    double ct = g.z / norm;
    if (ct > 1.0) ct = 1.0;
    if (ct < -1.0) ct = -1.0;
    table.setting(party, s) = ObservableSetting(std::acos(ct), std::atan2(g.y, g.x));
    value += norm;
  }
  return value;
}

// Closed-form Bell value over a flat angle vector
// [theta_unprimed, phi_unprimed, theta_primed, phi_primed] per party,
// evaluated in Real precision.
template <class Real>
Real closed_bell_flat(const BellExpansion& b, const CorrelationFactors<Real>& factors,
                      const std::vector<Real>& x) {
  const int n = b.n;
  std::vector<Real> theta(static_cast<std::size_t>(n));
  std::vector<Real> phi(static_cast<std::size_t>(n));
  return bell_value<Real>(b, [&](std::uint32_t w) {
    for (int i = 0; i < n; ++i) {
      const std::size_t base = 4 * static_cast<std::size_t>(i) + 2 * ((w >> i) & 1);
      theta[static_cast<std::size_t>(i)] = x[base];
      phi[static_cast<std::size_t>(i)] = x[base + 1];
    }
    return correlation_core<Real>(n, theta.data(), phi.data(), factors);
  });
}

inline std::vector<long double> flatten(const SettingsTable& t) {
  std::vector<long double> x;
  x.reserve(4 * static_cast<std::size_t>(t.n()));
  for (int i = 0; i < t.n(); ++i)
    for (int s = 0; s < 2; ++s) {
      x.push_back(t.setting(i, s).theta);
      x.push_back(t.setting(i, s).phi);
    }
  return x;
}

inline SettingsTable unflatten(int n, const std::vector<long double>& x) {
  SettingsTable t(n);
  for (int i = 0; i < n; ++i)
    for (int s = 0; s < 2; ++s) {
      const std::size_t base = 4 * static_cast<std::size_t>(i) + 2 * static_cast<std::size_t>(s);
      t.setting(i, s) = ObservableSetting(static_cast<double>(x[base]), static_cast<double>(x[base + 1]));
    }
  return t;
}

// Nelder-Mead ascent (reflection 1, expansion 2, contraction 1/2, shrink 1/2)
// from x with the given initial simplex step. Returns the best point found.
template <class F>
std::vector<long double> nelder_mead_max(F&& f, std::vector<long double> x, long double step, int max_evals) {
  const std::size_t d = x.size();
  std::vector<std::vector<long double>> pts(d + 1, x);
  std::vector<long double> val(d + 1);
  for (std::size_t i = 0; i < d; ++i) pts[i + 1][i] += step;
  int evals = 0;
  for (std::size_t i = 0; i <= d; ++i) {
    val[i] = f(pts[i]);
    ++evals;
  }
  std::vector<std::size_t> order(d + 1);
  while (evals < max_evals) {
    for (std::size_t i = 0; i <= d; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return val[a] > val[b]; });
    const std::size_t best = order[0], lose = order[d], second = order[d - 1];
    if (val[best] - val[lose] < 1e-22L) break;

    std::vector<long double> cen(d, 0.0L);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t k = 0; k <= d; ++k)
        if (k != lose) cen[i] += pts[k][i];
      cen[i] /= static_cast<long double>(d);
    }
    auto blend = [&](long double t) {
      std::vector<long double> p(d);
      for (std::size_t i = 0; i < d; ++i) p[i] = cen[i] + t * (cen[i] - pts[lose][i]);
      return p;
    };

    auto refl = blend(1.0L);
    const long double fr = f(refl);
    ++evals;
    if (fr > val[best]) {
      auto expd = blend(2.0L);
      const long double fe = f(expd);
      ++evals;
      if (fe > fr) {
        pts[lose] = std::move(expd);
        val[lose] = fe;
      } else {
        pts[lose] = std::move(refl);
        val[lose] = fr;
      }
    } else if (fr > val[second]) {
      pts[lose] = std::move(refl);
      val[lose] = fr;
    } else {
      auto ctr = blend(-0.5L);
      const long double fc = f(ctr);
      ++evals;
      if (fc > val[lose]) {
        pts[lose] = std::move(ctr);
        val[lose] = fc;
      } else {
        for (std::size_t k = 0; k <= d; ++k) {
          if (k == best) continue;
          for (std::size_t i = 0; i < d; ++i) pts[k][i] = pts[best][i] + 0.5L * (pts[k][i] - pts[best][i]);
          val[k] = f(pts[k]);
          ++evals;
        }
      }
    }
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i <= d; ++i)
    if (val[i] > val[best]) best = i;
  return pts[best];
}

}  // namespace detail

// One exact coordinate-ascent step for one party; the Bell value at the
// returned table is never below the value at the input table.
inline SettingsTable seesaw_step(const SettingsTable& settings, const DensityMatrix& rho,
                                 const BellExpansion& expansion, int party) {
  if (settings.n() != rho.n || settings.n() != expansion.n)
    throw std::invalid_argument("seesaw_step needs matching party counts");
  if (party < 0 || party >= settings.n()) throw std::out_of_range("party index out of range");
  SettingsTable next = settings;
  const auto coeff = detail::dense_coeffs(expansion);
  detail::update_party(next, rho, coeff, party);
  return next;
}

inline OptimizationReport max_bell(int n, const MaybeNoise& noise, const OptimizerConfig& config = {}) {
  if (n < 2 || n > dense_qubit_cap)
    throw std::invalid_argument("max_bell supports 2.." + std::to_string(dense_qubit_cap) + " qubits");
  if (config.starts < 1 || config.max_sweeps < 1)
    throw std::invalid_argument("optimizer needs at least one start and one sweep");
  if (config.first_start && config.first_start->n() != n)
    throw std::invalid_argument("first_start party count mismatch");

  const DensityMatrix rho = decohered_ghz(n, noise);
  const BellExpansion expansion = build_mk(n);
  const auto coeff = detail::dense_coeffs(expansion);
  const auto factors = channel_factors<long double>(n, noise);

  OptimizationReport report;
  report.iterations.reserve(static_cast<std::size_t>(config.starts));
  double best = -std::numeric_limits<double>::infinity();
  SettingsTable best_table;

  for (int start = 0; start < config.starts; ++start) {
    if (best > config.stop_above) {
      report.early_stopped = true;
      break;
    }
    SettingsTable table;
    if (start == 0 && config.first_start) {
      table = *config.first_start;
    } else {
      auto rng = detail::stream_rng(config.seed, static_cast<std::uint64_t>(start));
      table = detail::random_table(n, rng);
    }

    double value = -std::numeric_limits<double>::infinity();
    bool start_converged = false;
    int sweeps = 0;
    for (int sweep = 0; sweep < config.max_sweeps; ++sweep) {
      double v = 0.0;
      for (int party = 0; party < n; ++party) v = detail::update_party(table, rho, coeff, party);
      ++sweeps;
      // The certificate does not wait for stationarity: once the value
      // clears stop_above the caller has its sign answer.
      if (v > config.stop_above) {
        value = std::max(value, v);
        report.early_stopped = true;
        break;
      }
      if (v - value < config.tol) {
        value = std::max(value, v);
        start_converged = true;
        break;
      }
      value = v;
    }
    report.iterations.push_back(sweeps);
    if (start_converged) report.converged = true;
    if (value > best) {
      best = value;
      best_table = table;
    }
  }
  report.starts_used = static_cast<int>(report.iterations.size());

  // Final value in long double through the closed form, at the double-rounded
  // canonical settings, so the report is exactly self-consistent. The polish
  // is accepted only when it improves on that evaluation.
  auto closed_at = [&](const SettingsTable& t) {
    const auto x = detail::flatten(t);
    long double v = detail::closed_bell_flat<long double>(expansion, factors, x);
    return v < 0 ? -v : v;
  };
  long double best_value = closed_at(best_table);
  if (config.polish && !report.early_stopped) {
    auto x = detail::flatten(best_table);
    const long double sign = detail::closed_bell_flat<long double>(expansion, factors, x) < 0 ? -1.0L : 1.0L;
    auto objective = [&](const std::vector<long double>& y) {
      return sign * detail::closed_bell_flat<long double>(expansion, factors, y);
    };
    for (const long double step : {5e-2L, 1e-4L, 1e-8L}) {
      x = detail::nelder_mead_max(objective, std::move(x), step, 4000);
      const SettingsTable candidate = detail::unflatten(n, x);
      const long double value = closed_at(candidate);
      if (value > best_value) {
        best_value = value;
        best_table = candidate;
      }
    }
  }

  report.best_value = best_value;
  report.best_settings = best_table;
  return report;
}

}  // namespace mkbell
