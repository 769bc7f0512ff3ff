// Cross-path audit: the closed-form correlations against dense-matrix
// expectations, and the closed-form state constructors against qubit-by-qubit
// channel application. The two paths share no evaluation code, so agreement
// within tight tolerances vouches for both.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mkbell/channels_states.hpp"
#include "mkbell/correlations.hpp"
#include "mkbell/optimizer.hpp"

namespace mkbell {

struct VerifyOptions {
  int n_max = 5;
  int trials = 50;  // random settings tables per (n, channel, p)
  std::uint64_t seed = 12345;
  double correlation_tol = 1e-12;
  double state_tol = 1e-13;
};

struct VerifyIssue {
  std::string what;  // "correlation" or "state"
  int n = 0;
  std::string channel;
  double p = 0.0;
  std::uint64_t table_seed = 0;  // stream seed of the offending table; 0 for state issues
  double deviation = 0.0;
};

struct VerifyReport {
  double max_correlation_deviation = 0.0;
  double max_state_deviation = 0.0;
  std::vector<VerifyIssue> issues;
  bool pass = false;
};

namespace detail {

inline std::vector<ObservableSetting> resolve_word(const SettingsTable& table, std::uint32_t word) {
  std::vector<ObservableSetting> chosen(static_cast<std::size_t>(table.n()));
  for (int i = 0; i < table.n(); ++i)
    chosen[static_cast<std::size_t>(i)] = table.setting(i, (word >> i) & 1);
  return chosen;
}

}  // namespace detail

// The audit core, over any candidate closed-form correlator with the shape of
// correlate_word; tests inject a deliberately broken one to confirm the audit
// has teeth.
template <class CorrFn>
VerifyReport verify_paths(const VerifyOptions& options, CorrFn&& correlate) {
  if (options.n_max < 2 || options.n_max > dense_qubit_cap || options.trials < 1)
    throw std::invalid_argument("verification needs 2 <= n_max <= dense cap and at least one trial");

  VerifyReport report;
  const auto note = [&report](VerifyIssue issue) {
    if (report.issues.size() < 100) report.issues.push_back(std::move(issue));
  };

  const std::array<double, 5> p_grid{0.0, 0.25, 0.5, 0.75, 1.0};
  const std::array<std::optional<Channel>, 4> kinds{std::nullopt, Channel::depolarizing, Channel::dephasing,
                                                    Channel::dissipation};
  for (int n = 2; n <= options.n_max; ++n) {
    const std::uint32_t nwords = 1u << n;
    for (std::size_t ki = 0; ki < kinds.size(); ++ki) {
      const std::size_t p_count = kinds[ki] ? p_grid.size() : 1;
      for (std::size_t pi = 0; pi < p_count; ++pi) {
        const MaybeNoise noise = kinds[ki] ? MaybeNoise(NoiseSpec(*kinds[ki], p_grid[pi])) : std::nullopt;
        const DensityMatrix rho = decohered_ghz(n, noise);
        for (int trial = 0; trial < options.trials; ++trial) {
          const std::uint64_t table_seed =
              detail::splitmix64(options.seed + 1000003ull * static_cast<std::uint64_t>(n) +
                                 10007ull * ki + 101ull * pi + static_cast<std::uint64_t>(trial));
          auto rng = std::mt19937_64(table_seed);
          const SettingsTable table = detail::random_table(n, rng);
          for (std::uint32_t word = 0; word < nwords; ++word) {
            const double closed = correlate(table, noise, word);
            const double dense = expectation(rho, detail::resolve_word(table, word));
            const double dev = std::abs(closed - dense);
            report.max_correlation_deviation = std::max(report.max_correlation_deviation, dev);
            if (dev > options.correlation_tol)
              note({"correlation", n, channel_name(noise), noise ? noise->p : 0.0, table_seed, dev});
          }
        }
      }
    }
  }

  for (int n = 2; n <= options.n_max; ++n) {
    for (const Channel kind : {Channel::depolarizing, Channel::dephasing, Channel::dissipation}) {
      for (int step = 0; step <= 10; ++step) {
        const double p = 0.1 * step;
        const NoiseSpec noise(kind, p);
        const DensityMatrix direct = decohered_ghz_closedform(n, noise);
        const DensityMatrix applied = decohered_ghz_channelwise(n, noise);
        const double dev = (direct.mat - applied.mat).cwiseAbs().maxCoeff();
        report.max_state_deviation = std::max(report.max_state_deviation, dev);
        if (dev > options.state_tol) note({"state", n, channel_name(kind), p, 0, dev});
      }
    }
  }

  report.pass = report.issues.empty();
  return report;
}

inline VerifyReport run_verification(const VerifyOptions& options = {}) {
  return verify_paths(options, [](const SettingsTable& table, const MaybeNoise& noise, std::uint32_t word) {
    return correlate_word(table, noise, word);
  });
}

}  // namespace mkbell
