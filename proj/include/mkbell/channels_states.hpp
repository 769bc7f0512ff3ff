// GHZ and decohered-GHZ density matrices, built two independent ways: from
// the closed-form matrices, and by applying the element-wise single-qubit
// channels qubit-by-qubit. Each path audits the other.
#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mkbell/observables.hpp"

namespace mkbell {

enum class Channel { depolarizing, dephasing, dissipation };

inline const char* channel_name(Channel k) {
  switch (k) {
    case Channel::depolarizing: return "depolarizing";
    case Channel::dephasing: return "dephasing";
    case Channel::dissipation: return "dissipation";
  }
  return "?";
}

struct NoiseSpec {
  Channel kind = Channel::depolarizing;
  double p = 0.0;

  NoiseSpec() = default;
  NoiseSpec(Channel k, double degree) : kind(k), p(degree) {
    if (!(degree >= 0.0 && degree <= 1.0))
      throw std::invalid_argument("decoherence degree p must lie in [0, 1]");
  }
};

// "none" is the absence of a channel; the pure GHZ state.
using MaybeNoise = std::optional<NoiseSpec>;

inline std::string channel_name(const MaybeNoise& noise) {
  return noise ? channel_name(noise->kind) : "none";
}

struct DensityMatrix {
  int n = 0;
  Eigen::MatrixXcd mat;

  explicit DensityMatrix(int qubits)
      : n(qubits), mat(Eigen::MatrixXcd::Zero(std::int64_t{1} << qubits, std::int64_t{1} << qubits)) {
    if (qubits < 1 || qubits > dense_qubit_cap)
      throw std::invalid_argument("dense path supports 1.." + std::to_string(dense_qubit_cap) + " qubits");
  }

  std::int64_t dim() const { return std::int64_t{1} << n; }

  double trace_real() const { return mat.trace().real(); }

  double hermiticity_error() const { return (mat - mat.adjoint()).cwiseAbs().maxCoeff(); }

  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(mat, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }
};

// (|0...0> + |1...1>)/sqrt(2) as a rank-1 projector: four entries of 1/2.
inline DensityMatrix ghz(int n) {
  if (n < 2 || n > dense_qubit_cap)
    throw std::invalid_argument("ghz supports 2.." + std::to_string(dense_qubit_cap) + " qubits");
  DensityMatrix rho(n);
  const std::int64_t last = rho.dim() - 1;
  rho.mat(0, 0) = 0.5;
  rho.mat(0, last) = 0.5;
  rho.mat(last, 0) = 0.5;
  rho.mat(last, last) = 0.5;
  return rho;
}

// Element-wise single-qubit maps on the targeted qubit's index pair (i, j):
//   depolarizing: |i><j| -> (1-p)|i><j| + p d_ij I/2
//   dephasing:    diagonal fixed, off-diagonal scaled by (1-p)
//   dissipation:  |i><i| -> (1-p)|i><i| + p|0><0|, off-diagonal scaled by sqrt(1-p)
inline DensityMatrix apply_local_channel(const DensityMatrix& rho, const NoiseSpec& noise, int qubit) {
  if (qubit < 0 || qubit >= rho.n) throw std::out_of_range("qubit index out of range");
  const std::int64_t dim = rho.dim();
  const std::int64_t bit = std::int64_t{1} << qubit;
  const double p = noise.p;

  DensityMatrix out(rho.n);
  for (std::int64_t r = 0; r < dim; ++r) {
    for (std::int64_t c = 0; c < dim; ++c) {
      const bool ri = (r & bit) != 0;
      const bool ci = (c & bit) != 0;
      const std::complex<double> v = rho.mat(r, c);
      switch (noise.kind) {
        case Channel::depolarizing:
          if (ri == ci)
            out.mat(r, c) = (1.0 - p) * v + 0.5 * p * (rho.mat(r & ~bit, c & ~bit) + rho.mat(r | bit, c | bit));
          else
            out.mat(r, c) = (1.0 - p) * v;
          break;
        case Channel::dephasing:
          out.mat(r, c) = (ri == ci) ? v : (1.0 - p) * v;
          break;
        case Channel::dissipation:
          if (ri != ci)
            out.mat(r, c) = std::sqrt(1.0 - p) * v;
          else if (ri)
            out.mat(r, c) = (1.0 - p) * v;
          else
            out.mat(r, c) = v + p * rho.mat(r | bit, c | bit);
          break;
      }
    }
  }
  return out;
}

// The channel applied once to every qubit; order does not matter.
inline DensityMatrix decohered_ghz_channelwise(int n, const NoiseSpec& noise) {
  DensityMatrix rho = ghz(n);
  for (int q = 0; q < n; ++q) rho = apply_local_channel(rho, noise, q);
  return rho;
}

// Closed-form decohered GHZ states. All three are a diagonal population part
// plus a single pair of corner coherences:
//   depolarizing: 1/2 [(1-p/2)|0><0| + (p/2)|1><1|]^n + 1/2 [mirrored]^n,
//                 corners (1-p)^n / 2
//   dephasing:    populations of the GHZ mixture, corners (1-p)^n / 2
//   dissipation:  1/2 |0...0><0...0| + 1/2 [p|0><0| + (1-p)|1><1|]^n,
//                 corners (1-p)^(n/2) / 2
inline DensityMatrix decohered_ghz_closedform(int n, const NoiseSpec& noise) {
  if (n < 2 || n > dense_qubit_cap)
    throw std::invalid_argument("closed-form states support 2.." + std::to_string(dense_qubit_cap) + " qubits");
  DensityMatrix rho(n);
  const std::int64_t dim = rho.dim();
  const std::int64_t last = dim - 1;
  const double p = noise.p;

  double corner = 0.0;
  switch (noise.kind) {
    case Channel::depolarizing: {
      const double a = 1.0 - 0.5 * p;
      const double b = 0.5 * p;
      for (std::int64_t r = 0; r < dim; ++r) {
        const int ones = std::popcount(static_cast<std::uint64_t>(r));
        const int zeros = n - ones;
        rho.mat(r, r) = 0.5 * (std::pow(a, zeros) * std::pow(b, ones) + std::pow(b, zeros) * std::pow(a, ones));
      }
      corner = 0.5 * std::pow(1.0 - p, n);
      break;
    }
    case Channel::dephasing: {
      rho.mat(0, 0) = 0.5;
      rho.mat(last, last) = 0.5;
      corner = 0.5 * std::pow(1.0 - p, n);
      break;
    }
    case Channel::dissipation: {
      for (std::int64_t r = 0; r < dim; ++r) {
        const int ones = std::popcount(static_cast<std::uint64_t>(r));
        const int zeros = n - ones;
        rho.mat(r, r) = 0.5 * std::pow(p, zeros) * std::pow(1.0 - p, ones);
      }
      rho.mat(0, 0) += 0.5;
      corner = 0.5 * std::pow(1.0 - p, 0.5 * n);
      break;
    }
  }
  rho.mat(0, last) += corner;
  rho.mat(last, 0) += corner;
  return rho;
}

inline DensityMatrix decohered_ghz(int n, const MaybeNoise& noise) {
  return noise ? decohered_ghz_closedform(n, *noise) : ghz(n);
}

// <A x B x ... x K> = Tr((A x B x ... x K) rho), with party i acting on bit
// i-1 of the computational index. The trace of a Hermitian product is real;
// the imaginary residue stays below 1e-12 and is discarded.
inline double expectation(const DensityMatrix& rho, const std::vector<ObservableSetting>& settings) {
  if (static_cast<int>(settings.size()) != rho.n)
    throw std::invalid_argument("expectation needs one setting per qubit");
  const std::int64_t dim = rho.dim();
  std::vector<Eigen::Matrix2cd> obs;
  obs.reserve(settings.size());
  for (const auto& s : settings) obs.push_back(to_matrix(s));

  std::complex<double> acc = 0.0;
  for (std::int64_t r = 0; r < dim; ++r) {
    for (std::int64_t c = 0; c < dim; ++c) {
      const std::complex<double> rcv = rho.mat(c, r);
      if (rcv == 0.0) continue;
      std::complex<double> prod = 1.0;
      for (int i = 0; i < rho.n; ++i) prod *= obs[static_cast<std::size_t>(i)]((r >> i) & 1, (c >> i) & 1);
      acc += prod * rcv;
    }
  }
  return acc.real();
}

// Debug dump: row-major "re,im" pairs, one matrix row per line.
inline void dump(const DensityMatrix& rho, std::ostream& os) {
  const std::int64_t dim = rho.dim();
  for (std::int64_t r = 0; r < dim; ++r) {
    for (std::int64_t c = 0; c < dim; ++c) {
      if (c) os << ' ';
      os << rho.mat(r, c).real() << ',' << rho.mat(r, c).imag();
    }
    os << '\n';
  }
}

}  // namespace mkbell
