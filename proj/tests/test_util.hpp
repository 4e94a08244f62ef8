#pragma once

#include <cmath>
#include <numeric>
#include <vector>

#include "spectralforge/core_spectra.hpp"
#include "spectralforge/lp_simplex.hpp"
#include "spectralforge/rng.hpp"

namespace sf_test {

using namespace spectralforge;

inline Permutation random_permutation(std::size_t n, Rng& rng) {
  std::vector<int> m(n);
  std::iota(m.begin(), m.end(), 0);
  for (std::size_t i = n - 1; i > 0; --i) std::swap(m[i], m[rng.index(i + 1)]);
  return Permutation(std::move(m));
}

/// Convex mixture of `terms` random permutations with random weights; exact
/// bi-stochastic up to rounding.
inline BistochasticMatrix random_bistochastic(std::size_t n, Rng& rng, std::size_t terms = 0) {
  if (terms == 0) terms = n * n;
  const auto k = static_cast<Eigen::Index>(n);
  RealMatrix r = RealMatrix::Zero(k, k);
  std::vector<double> w(terms);
  double total = 0.0;
  for (auto& x : w) total += (x = -std::log(1.0 - rng.uniform()));
  for (std::size_t i = 0; i < terms; ++i) r += (w[i] / total) * random_permutation(n, rng).weight_matrix();
  return BistochasticMatrix(r);
}

inline Spectrum random_spectrum(std::size_t n, Rng& rng, double lo = -3.0, double hi = 3.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return Spectrum(std::move(v), "random");
}

inline ProbeState random_probe(std::size_t n, Rng& rng) {
  ComplexVector c(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = rng.complex_normal();
  return ProbeState::normalized(c);
}

/// Haar unitary: QR of a complex Ginibre matrix with the R-diagonal phases
/// divided out.
inline ComplexMatrix haar_unitary(std::size_t n, Rng& rng) {
  const auto k = static_cast<Eigen::Index>(n);
  ComplexMatrix z(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) z(i, j) = rng.complex_normal();
  Eigen::HouseholderQR<ComplexMatrix> qr(z);
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(k, k);
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < k; ++j) q.col(j) *= r(j, j) / std::abs(r(j, j));
  return q;
}

/// max_j |c'_j - c_j exp(-i phase_j)|
inline double phase_mismatch(const ProbeState& before, const ProbeState& after, const RealVector& phases) {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < phases.size(); ++j) {
    const auto expected = before.amplitudes()(j) * std::polar(1.0, -phases(j));
    worst = std::max(worst, std::abs(after.amplitudes()(j) - expected));
  }
  return worst;
}

// Brute-force vertex enumeration for box-bounded equality LPs: choose a set
// of m basic columns, fix the rest at either bound, solve for the basics.
inline double vertex_oracle(const LinearProgram& lp, bool& feasible) {
  const auto m = lp.equality.rows();
  const auto n = lp.equality.cols();
  double best = lp.maximize ? -kInfinity : kInfinity;
  feasible = false;
  for (unsigned basis = 0; basis < (1u << n); ++basis) {
    if (__builtin_popcount(basis) != m) continue;
    std::vector<Eigen::Index> b, nb;
    for (Eigen::Index j = 0; j < n; ++j) ((basis >> j) & 1u ? b : nb).push_back(j);
    RealMatrix ab(m, m);
    for (Eigen::Index k = 0; k < m; ++k) ab.col(k) = lp.equality.col(b[static_cast<std::size_t>(k)]);
    Eigen::FullPivLU<RealMatrix> lu(ab);
    if (lu.rank() < m) continue;
    for (unsigned bounds = 0; bounds < (1u << nb.size()); ++bounds) {
      RealVector x = RealVector::Zero(n);
      for (std::size_t k = 0; k < nb.size(); ++k) x(nb[k]) = (bounds >> k) & 1u ? lp.upper(nb[k]) : lp.lower(nb[k]);
      RealVector rhs = lp.rhs - lp.equality * x;
      const RealVector xb = lu.solve(rhs);
      bool ok = true;
      for (Eigen::Index k = 0; k < m; ++k) {
        const auto j = b[static_cast<std::size_t>(k)];
        x(j) = xb(k);
        ok = ok && x(j) >= lp.lower(j) - 1e-9 && x(j) <= lp.upper(j) + 1e-9;
      }
      if (!ok) continue;
      feasible = true;
      const double obj = lp.cost.dot(x);
      best = lp.maximize ? std::max(best, obj) : std::min(best, obj);
    }
  }
  return best;
}

}  // namespace sf_test
