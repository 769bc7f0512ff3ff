// Dichotomic qubit observables as Bloch-sphere directions (theta, phi),
// plus the per-party two-setting tables the optimizer searches over.
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace mkbell {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Hard cap on the dense 2^n x 2^n density-matrix path. Shared here so the
// Bell-expansion metadata can flag party counts the dense path cannot serve.
inline constexpr int dense_qubit_cap = 12;

// Angles are radians. Canonical ranges: theta in [0, pi], phi in [0, 2*pi).
// Construction canonicalizes: phi is wrapped mod 2*pi, and an out-of-range
// theta is reflected into [0, pi] with phi shifted by pi, which leaves the
// Bloch vector (and the induced matrix) unchanged.
struct ObservableSetting {
  double theta = 0.0;
  double phi = 0.0;

  ObservableSetting() = default;

  ObservableSetting(double theta_raw, double phi_raw) {
    if (!std::isfinite(theta_raw) || !std::isfinite(phi_raw))
      throw std::invalid_argument("observable angles must be finite");
    double t = std::fmod(theta_raw, two_pi);
    if (t < 0.0) t += two_pi;
    double f = phi_raw;
    if (t > pi) {
      t = two_pi - t;
      f += pi;
    }
    f = std::fmod(f, two_pi);
    if (f < 0.0) f += two_pi;
    theta = t;
    phi = f;
  }
};

inline ObservableSetting canonicalize(double theta_raw, double phi_raw) {
  return ObservableSetting(theta_raw, phi_raw);
}

// A = sin(theta) cos(phi) sx + sin(theta) sin(phi) sy + cos(theta) sz.
// Interprets the stored angles literally, so raw and canonicalized settings
// give the same matrix.
inline Eigen::Matrix2cd to_matrix(const ObservableSetting& s) {
  const double ct = std::cos(s.theta);
  const double st = std::sin(s.theta);
  const std::complex<double> e(std::cos(s.phi), std::sin(s.phi));
  Eigen::Matrix2cd m;
  m(0, 0) = ct;
  m(0, 1) = st * std::conj(e);
  m(1, 0) = st * e;
  m(1, 1) = -ct;
  return m;
}

// Two settings per party; index 0 is the unprimed setting, 1 the primed one.
// Everywhere a setting-choice word appears, bit i-1 of the word selects
// party i's entry, matching the Bell-expansion convention.
struct SettingsTable {
  std::vector<std::array<ObservableSetting, 2>> parties;

  SettingsTable() = default;
  explicit SettingsTable(int n) : parties(static_cast<std::size_t>(n)) {
    if (n < 2) throw std::invalid_argument("settings table needs n >= 2");
  }

  int n() const { return static_cast<int>(parties.size()); }

  const ObservableSetting& setting(int party, int primed) const {
    return parties[static_cast<std::size_t>(party)][static_cast<std::size_t>(primed)];
  }
  ObservableSetting& setting(int party, int primed) {
    return parties[static_cast<std::size_t>(party)][static_cast<std::size_t>(primed)];
  }
};

}  // namespace mkbell
