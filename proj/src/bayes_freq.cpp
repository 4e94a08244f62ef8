#include "spectralforge/bayes_freq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "spectralforge/errors.hpp"
#include "spectralforge/parallel.hpp"
#include "spectralforge/rng.hpp"

namespace spectralforge {

namespace {

using cd = std::complex<double>;

constexpr double kSupportThreshold = 1e-12;
constexpr double kOffSupportTolerance = 1e-9;
constexpr double kQfiCutoff = 1e-14;
constexpr std::uint64_t kRestartStream = 0x62667271;  // "bfrq"
constexpr std::uint64_t kCurveStream = 0x63757276;    // "curv"

void check_sizes(const ProbeState& probe, const Spectrum& s) {
  if (probe.size() != s.size())
    throw Error(ErrorCode::DimensionMismatch, "probe and spectrum sizes differ");
}

ComplexMatrix hermitian_part(const ComplexMatrix& m) { return 0.5 * (m + m.adjoint()); }

ProbeState haar_probe(std::size_t n, Rng& rng) {
  ComplexVector c(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = rng.complex_normal();
  return ProbeState::normalized(c);
}

}  // namespace

GaussianPrior::GaussianPrior(double variance) : variance_(variance) {
  if (!std::isfinite(variance) || variance <= 0.0)
    throw Error(ErrorCode::InvalidArgument, "prior variance must be finite and positive");
}

double GaussianPrior::stddev() const { return std::sqrt(variance_); }

EffectiveOperators effective_operators(const ProbeState& probe, const Spectrum& s, double tau) {
  check_sizes(probe, s);
  if (!(tau >= 0.0)) throw Error(ErrorCode::InvalidArgument, "tau must be nonnegative");
  const auto n = static_cast<Eigen::Index>(s.size());
  const auto& c = probe.amplitudes();
  EffectiveOperators ops{ComplexMatrix(n, n), ComplexMatrix(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double d = s[i] - s[j];
      const double damp = std::exp(-0.5 * tau * tau * d * d);
      const cd cc = c(i) * std::conj(c(j));
      ops.gamma(i, j) = cc * damp;
      ops.eta(i, j) = cd(0.0, -tau * d) * cc * damp;
    }
  }
  return ops;
}

EffectiveOperators effective_operators(const ProbeState& probe, const Spectrum& s, double t,
                                       const GaussianPrior& prior) {
  const double sigma = prior.stddev();
  auto ops = effective_operators(probe, s, t * sigma);
  ops.eta *= sigma;
  return ops;
}

ComplexMatrix solve_sylvester(const EffectiveOperators& ops) {
  const auto n = ops.gamma.rows();
  if (ops.gamma.cols() != n || ops.eta.rows() != n || ops.eta.cols() != n)
    throw Error(ErrorCode::DimensionMismatch, "gamma and eta must be square and equal-sized");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(ops.gamma));
  const RealVector& g = es.eigenvalues();
  const ComplexMatrix& v = es.eigenvectors();
  const double cut = kSupportThreshold * std::max(g.cwiseAbs().maxCoeff(), 0.0);
  const ComplexMatrix et = v.adjoint() * hermitian_part(ops.eta) * v;
  const double scale = std::max(1.0, et.norm());
  ComplexMatrix lt = ComplexMatrix::Zero(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      const bool in_a = g(a) > cut;
      const bool in_b = g(b) > cut;
      if (!in_a && !in_b) {
        if (std::abs(et(a, b)) > kOffSupportTolerance * scale)
          throw Error(ErrorCode::SingularSupport, "eta has weight outside the support of gamma");
        continue;
      }
      lt(a, b) = 2.0 * et(a, b) / (std::max(g(a), 0.0) + std::max(g(b), 0.0));
    }
  }
  return hermitian_part(v * lt * v.adjoint());
}

double bmse(const EffectiveOperators& ops, const ComplexMatrix& L, double prior_variance) {
  return prior_variance - (ops.gamma * L * L).trace().real();
}

double qfi_effective(const ComplexMatrix& gamma, const Spectrum& generator, double t) {
  const auto n = gamma.rows();
  if (static_cast<std::size_t>(n) != generator.size())
    throw Error(ErrorCode::DimensionMismatch, "gamma and generator sizes differ");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(gamma));
  const RealVector& g = es.eigenvalues();
  const ComplexMatrix& v = es.eigenvectors();
  const ComplexMatrix gt = v.adjoint() * generator.as_vector().cast<cd>().asDiagonal() * v;
  double f = 0.0;
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      const double sum = g(a) + g(b);
      if (sum < kQfiCutoff) continue;
      const double diff = g(a) - g(b);
      f += std::norm(gt(a, b)) * diff * diff / sum;
    }
  }
  return 2.0 * t * t * f;
}

ComplexMatrix probe_update_operator(const ComplexMatrix& L, const Spectrum& s, double tau) {
  const auto n = L.rows();
  const ComplexMatrix l2 = L * L;
  ComplexMatrix t(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double d = s[i] - s[j];
      const double damp = std::exp(-0.5 * tau * tau * d * d);
      t(i, j) = damp * (l2(i, j) - cd(0.0, 2.0 * tau * d) * L(i, j));
    }
  }
  return hermitian_part(t);
}

FreqEstimationResult evaluate_probe(const ProbeState& probe, const Spectrum& s, double tau) {
  const auto ops = effective_operators(probe, s, tau);
  FreqEstimationResult r;
  r.L = solve_sylvester(ops);
  r.bmse = bmse(ops, r.L);
  r.qfi = qfi_effective(ops.gamma, s, tau);
  r.probe = probe;
  r.tau = tau;
  return r;
}

FreqEstimationResult refine_probe(const ProbeState& start, const Spectrum& s, double tau,
                                  int max_iter, double tol) {
  auto best = evaluate_probe(start, s, tau);
  best.history.push_back(best.bmse);
  best.worst_increase = -std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iter; ++it) {
    const ComplexMatrix t = probe_update_operator(best.L, s, tau);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(t);
    auto next = evaluate_probe(ProbeState::normalized(es.eigenvectors().col(0)), s, tau);
    const double gain = best.bmse - next.bmse;
    best.worst_increase = std::max(best.worst_increase, -gain);
    best.history.push_back(next.bmse);
    ++best.iterations;
    if (gain >= 0.0) {
      best.probe = next.probe;
      best.L = std::move(next.L);
      best.bmse = next.bmse;
      best.qfi = next.qfi;
    }
    if (gain < tol) {
      best.converged = true;
      break;
    }
  }
  return best;
}

FreqEstimationResult optimize_probe(const Spectrum& s, double tau, std::uint64_t seed,
                                    const ProbeOptions& options, const ProbeState* warm_start) {
  if (options.restarts < 1) throw Error(ErrorCode::InvalidArgument, "restarts must be >= 1");
  const int total = options.restarts + (warm_start ? 1 : 0);
  std::vector<FreqEstimationResult> runs(static_cast<std::size_t>(total));
  parallel_for(runs.size(), [&](std::size_t r) {
    if (warm_start && r + 1 == runs.size()) {
      runs[r] = refine_probe(*warm_start, s, tau, options.max_iter, options.tol);
      return;
    }
    Rng rng(split_seed(seed, kRestartStream, r));
    runs[r] = refine_probe(haar_probe(s.size(), rng), s, tau, options.max_iter, options.tol);
  });
  std::size_t win = 0;
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < runs.size(); ++r) {
    worst = std::max(worst, runs[r].worst_increase);
    if (runs[r].bmse < runs[win].bmse) win = r;
  }
  auto result = std::move(runs[win]);
  result.restart_winner = static_cast<int>(win);
  result.worst_increase = worst;
  return result;
}

BmseCurve bmse_curve(const Spectrum& s, std::span<const double> tau_grid, std::uint64_t seed,
                     const ProbeOptions& options) {
  std::vector<FreqEstimationResult> results(tau_grid.size());
  parallel_for(results.size(), [&](std::size_t i) {
    results[i] = optimize_probe(s, tau_grid[i], split_seed(seed, kCurveStream, i), options);
  });
  BmseCurve curve;
  curve.worst_increase = -std::numeric_limits<double>::infinity();
  for (const auto& r : results) {
    curve.rows.push_back({r.tau, r.bmse, r.qfi, r.restart_winner, r.iterations});
    curve.probes.push_back(r.probe);
    curve.worst_increase = std::max(curve.worst_increase, r.worst_increase);
  }
  return curve;
}

MinBmse min_bmse_over_tau(const Spectrum& s, std::uint64_t seed, const ProbeOptions& options,
                          int grid_points) {
  const double range = spectral_range(s);
  if (range <= 0.0) throw Error(ErrorCode::DegenerateRange, "spectrum has zero range");
  if (grid_points < 3) throw Error(ErrorCode::InvalidArgument, "grid_points must be >= 3");
  // BMSE depends on tau only through tau * lambda; the grid spans phase
  // spreads up to 2 pi per unit gap of the equally spaced spectrum.
  const double n1 = static_cast<double>(s.size() - 1);
  const double tau_max = 2.0 * std::numbers::pi * n1 / range;
  std::vector<double> grid(static_cast<std::size_t>(grid_points));
  for (std::size_t i = 0; i < grid.size(); ++i)
    grid[i] = tau_max * static_cast<double>(i + 1) / static_cast<double>(grid.size());
  const auto curve = bmse_curve(s, grid, seed, options);
  std::size_t k = 0;
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (curve.rows[i].bmse < curve.rows[k].bmse) k = i;

  MinBmse best{grid[k], curve.rows[k].bmse, curve.worst_increase};
  const ProbeState warm = curve.probes[k];
  auto eval = [&](double tau, std::uint64_t index) {
    ProbeOptions o = options;
    o.restarts = std::max(1, options.restarts / 2);
    const auto r = optimize_probe(s, tau, split_seed(seed, kCurveStream, 1000 + index), o, &warm);
    best.worst_increase = std::max(best.worst_increase, r.worst_increase);
    if (r.bmse < best.bmse) {
      best.bmse = r.bmse;
      best.tau = tau;
    }
    return r.bmse;
  };
  const double step = tau_max / static_cast<double>(grid.size());
  double lo = std::max(0.0, grid[k] - step);
  double hi = grid[k] + step;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - phi * (hi - lo);
  double x2 = lo + phi * (hi - lo);
  double f1 = eval(x1, 0);
  double f2 = eval(x2, 1);
  for (std::uint64_t it = 2; it < 22; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = eval(x1, it);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = eval(x2, it);
    }
  }
  return best;
}

}  // namespace spectralforge
