// Closed-form correlations of pure and decohered GHZ states. Every channel
// reduces to the same two-term shape
//   alpha * prod_i cos(theta_i) + beta * cos(sum_i phi_i) * prod_i sin(theta_i)
// with channel-dependent factors (alpha, beta); the pure state has
// alpha = parity = (1 + (-1)^n)/2 and beta = 1.
#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mkbell/bell_operator.hpp"
#include "mkbell/channels_states.hpp"
#include "mkbell/observables.hpp"

namespace mkbell {

template <class Real>
struct CorrelationFactors {
  Real alpha = 0;
  Real beta = 0;
};

template <class Real = double>
CorrelationFactors<Real> channel_factors(int n, const MaybeNoise& noise) {
  const Real parity = (n % 2 == 0) ? Real(1) : Real(0);
  if (!noise) return {parity, Real(1)};
  const Real p = static_cast<Real>(noise->p);
  const Real one = 1;
  switch (noise->kind) {
    case Channel::depolarizing: {
      const Real f = std::pow(one - p, Real(n));
      return {parity * f, f};
    }
    case Channel::dephasing:
      return {parity, std::pow(one - p, Real(n))};
    case Channel::dissipation:
      return {(one + std::pow(2 * p - one, Real(n))) / 2, std::pow(one - p, Real(n) / 2)};
  }
  return {};
}

// The shared evaluation core over raw angle arrays.
template <class Real>
Real correlation_core(int n, const Real* theta, const Real* phi, const CorrelationFactors<Real>& f) {
  Real cos_prod = 1;
  Real sin_prod = 1;
  Real phi_sum = 0;
  for (int i = 0; i < n; ++i) {
    cos_prod *= std::cos(theta[i]);
    sin_prod *= std::sin(theta[i]);
    phi_sum += phi[i];
  }
  return f.alpha * cos_prod + f.beta * std::cos(phi_sum) * sin_prod;
}

// One concrete measurement choice per party, pure state or a channel.
struct CorrelationQuery {
  std::vector<ObservableSetting> settings;
  MaybeNoise noise;

  int n() const { return static_cast<int>(settings.size()); }
};

inline double correlation_for(const std::vector<ObservableSetting>& settings, const MaybeNoise& noise) {
  const int n = static_cast<int>(settings.size());
  if (n < 1) throw std::invalid_argument("correlation needs at least one setting");
  std::vector<double> theta(settings.size());
  std::vector<double> phi(settings.size());
  for (std::size_t i = 0; i < settings.size(); ++i) {
    theta[i] = settings[i].theta;
    phi[i] = settings[i].phi;
  }
  return correlation_core<double>(n, theta.data(), phi.data(), channel_factors<double>(n, noise));
}

inline double correlation_ghz(const CorrelationQuery& q) {
  if (q.noise) throw std::invalid_argument("correlation_ghz takes a noiseless query");
  return correlation_for(q.settings, std::nullopt);
}

inline double correlation_noisy(const CorrelationQuery& q) {
  if (!q.noise) throw std::invalid_argument("correlation_noisy needs a channel");
  return correlation_for(q.settings, q.noise);
}

// Resolve each party's primed/unprimed choice from the setting-choice word
// (bit i-1 selects party i), then evaluate the closed form.
inline double correlate_word(const SettingsTable& table, const MaybeNoise& noise, std::uint32_t word) {
  const int n = table.n();
  if (n < 31 && word >= (1u << n)) throw std::out_of_range("setting-choice word out of range");
  std::vector<ObservableSetting> chosen(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) chosen[static_cast<std::size_t>(i)] = table.setting(i, (word >> i) & 1);
  return correlation_for(chosen, noise);
}

}  // namespace mkbell
