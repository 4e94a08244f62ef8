#include "spectralforge/design_lp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "spectralforge/errors.hpp"
#include "spectralforge/parallel.hpp"

namespace spectralforge {

namespace {

constexpr double kRatioTolerance = 1e-7;

void check_inputs(const Spectrum& s, const TargetVector& t) {
  if (s.size() != t.size()) throw Error(ErrorCode::DimensionMismatch, "spectrum and target sizes differ");
  if (!(spectral_range(s) > 0.0)) throw Error(ErrorCode::DegenerateRange, "spectral range is zero");
}

// Spectral rows of the target system, in R (or eps) coordinates:
// sum_j lambda_j [R_ij - (1 - t_i) R_aj - t_i R_bj] = 0 for i not in {a, b}.
RealMatrix spectral_rows(const Spectrum& s, const TargetVector& t, std::size_t a, std::size_t b) {
  const std::size_t n = s.size();
  const auto nn = static_cast<Eigen::Index>(n * n);
  RealMatrix rows = RealMatrix::Zero(static_cast<Eigen::Index>(n - 2), nn);
  Eigen::Index r = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == a || i == b) continue;
    for (std::size_t j = 0; j < n; ++j) {
      rows(r, static_cast<Eigen::Index>(i * n + j)) += s[j];
      rows(r, static_cast<Eigen::Index>(a * n + j)) -= (1.0 - t[i]) * s[j];
      rows(r, static_cast<Eigen::Index>(b * n + j)) -= t[i] * s[j];
    }
    ++r;
  }
  return rows;
}

// Row sums (n) followed by column sums (n, or n-1 when drop_last_column).
RealMatrix sum_rows(std::size_t n, bool drop_last_column) {
  const std::size_t cols = drop_last_column ? n - 1 : n;
  RealMatrix rows = RealMatrix::Zero(static_cast<Eigen::Index>(n + cols), static_cast<Eigen::Index>(n * n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      rows(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i * n + j)) = 1.0;
      if (j < cols) rows(static_cast<Eigen::Index>(n + j), static_cast<Eigen::Index>(i * n + j)) = 1.0;
    }
  return rows;
}

RealVector range_cost(const Spectrum& s, std::size_t a, std::size_t b) {
  const std::size_t n = s.size();
  RealVector f = RealVector::Zero(static_cast<Eigen::Index>(n * n));
  for (std::size_t j = 0; j < n; ++j) {
    f(static_cast<Eigen::Index>(a * n + j)) -= s[j];
    f(static_cast<Eigen::Index>(b * n + j)) += s[j];
  }
  return f;
}

RealMatrix unflatten(const RealVector& v, std::size_t n) {
  RealMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v(static_cast<Eigen::Index>(i * n + j));
  return m;
}

DesignResult finish(const Spectrum& s, const TargetVector& t, RealMatrix weights, DesignMethod method) {
  BistochasticMatrix r(std::move(weights));
  Spectrum eff = apply_weights(r, s);
  const double range = spectral_range(eff);
  if (!(range > 0.0) || ratio_mismatch(eff, t) > kRatioTolerance) {
    std::ostringstream os;
    os << to_string(method) << " design missed the target ratios (range " << range << ")";
    throw std::logic_error(os.str());
  }
  return DesignResult{std::move(r), std::move(eff), range, method};
}

std::string lp_failure(const LpSolution& sol) {
  if (sol.status == LpStatus::Numerical) {
    std::ostringstream os;
    os << "range LP lost precision: residual=" << sol.residual;
    throw std::logic_error(os.str());
  }
  std::ostringstream os;
  os << "range LP failed: status=" << static_cast<int>(sol.status) << " iterations=" << sol.iterations;
  return os.str();
}

}  // namespace

std::string_view to_string(DesignMethod method) {
  switch (method) {
    case DesignMethod::Analytic: return "analytic";
    case DesignMethod::Lp: return "lp";
    case DesignMethod::Minimal: return "minimal";
  }
  return "unknown";
}

RangeLp build_range_lp(const Spectrum& s, const TargetVector& t) {
  check_inputs(s, t);
  const std::size_t n = s.size();
  const std::size_t a = t.low_index();
  const std::size_t b = t.high_index();
  const RealMatrix spec = spectral_rows(s, t, a, b);
  const RealMatrix sums = sum_rows(n, true);
  RangeLp lp;
  lp.equality.resize(spec.rows() + sums.rows(), spec.cols());
  lp.equality << spec, sums;
  lp.cost = range_cost(s, a, b);
  const double inv = 1.0 / static_cast<double>(n);
  lp.lower = RealVector::Constant(static_cast<Eigen::Index>(n * n), -inv);
  lp.upper = RealVector::Constant(static_cast<Eigen::Index>(n * n), 1.0 - inv);
  lp.low_level = a;
  lp.high_level = b;
  return lp;
}

KernelDirection analytic_direction(const Spectrum& s, const TargetVector& t) {
  check_inputs(s, t);
  const std::size_t n = s.size();
  const std::size_t a = t.low_index();
  const std::size_t b = t.high_index();
  const RealMatrix spec = spectral_rows(s, t, a, b);
  const RealMatrix sums = sum_rows(n, false);
  RealMatrix system(spec.rows() + sums.rows(), spec.cols());
  system << spec, sums;

  Eigen::JacobiSVD<RealMatrix> svd(system, Eigen::ComputeFullV);
  const RealVector& sv = svd.singularValues();
  const double cutoff = 1e-10 * std::max(1.0, sv.size() > 0 ? sv(0) : 0.0);
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) > cutoff) ++rank;
  const RealMatrix kernel = svd.matrixV().rightCols(system.cols() - rank);

  const RealVector f = range_cost(s, a, b);
  const RealVector coords = kernel.transpose() * f;
  if (coords.norm() <= 1e-12 * std::max(1.0, f.norm()))
    throw Error(ErrorCode::NoDirection, "kernel has no direction with positive effective range");
  const RealVector eps = kernel * coords;

  const double inv = 1.0 / static_cast<double>(n);
  double scale = kInfinity;
  for (Eigen::Index k = 0; k < eps.size(); ++k) {
    if (eps(k) > 0.0) scale = std::min(scale, (1.0 - inv) / eps(k));
    if (eps(k) < 0.0) scale = std::min(scale, inv / -eps(k));
  }
  return KernelDirection{unflatten(eps, n), scale};
}

DesignResult analytic_design(const Spectrum& s, const TargetVector& t) {
  const auto dir = analytic_direction(s, t);
  const auto n = static_cast<Eigen::Index>(s.size());
  RealMatrix r = RealMatrix::Constant(n, n, 1.0 / static_cast<double>(n)) + dir.max_scale * dir.epsilon;
  return finish(s, t, std::move(r), DesignMethod::Analytic);
}

DesignResult lp_max_range_design(const Spectrum& s, const TargetVector& t) {
  const RangeLp range = build_range_lp(s, t);
  LinearProgram lp;
  lp.cost = range.cost;
  lp.equality = range.equality;
  lp.rhs = RealVector::Zero(range.equality.rows());
  lp.lower = range.lower;
  lp.upper = range.upper;
  lp.maximize = true;
  const LpSolution sol = solve_lp(lp);
  if (sol.status != LpStatus::Optimal) throw Error(ErrorCode::Infeasible, lp_failure(sol));
  const std::size_t n = s.size();
  const auto k = static_cast<Eigen::Index>(n);
  RealMatrix r = RealMatrix::Constant(k, k, 1.0 / static_cast<double>(n)) + unflatten(sol.x, n);
  return finish(s, t, std::move(r), DesignMethod::Lp);
}

DesignResult lp_max_range_design_standard_form(const Spectrum& s, const TargetVector& t) {
  check_inputs(s, t);
  const std::size_t n = s.size();
  const std::size_t a = t.low_index();
  const std::size_t b = t.high_index();
  const RealMatrix spec = spectral_rows(s, t, a, b);
  const RealMatrix sums = sum_rows(n, false);
  RealMatrix at(spec.rows() + sums.rows(), spec.cols());
  at << spec, sums;
  RealVector rhs = RealVector::Zero(at.rows());
  rhs.tail(sums.rows()).setOnes();

  // [A; -A] v + slack = [b; -b], v >= 0, slack >= 0.
  const Eigen::Index rows = 2 * at.rows();
  const Eigen::Index vars = at.cols();
  LinearProgram lp;
  lp.equality = RealMatrix::Zero(rows, vars + rows);
  lp.equality.topLeftCorner(at.rows(), vars) = at;
  lp.equality.bottomLeftCorner(at.rows(), vars) = -at;
  lp.equality.rightCols(rows).setIdentity();
  lp.rhs.resize(rows);
  lp.rhs << rhs, -rhs;
  lp.cost = RealVector::Zero(vars + rows);
  lp.cost.head(vars) = range_cost(s, a, b);
  lp.lower = RealVector::Zero(vars + rows);
  lp.upper = RealVector::Constant(vars + rows, kInfinity);
  lp.maximize = true;
  const LpSolution sol = solve_lp(lp);
  if (sol.status != LpStatus::Optimal) throw Error(ErrorCode::Infeasible, lp_failure(sol));
  return finish(s, t, unflatten(sol.x.head(vars), n), DesignMethod::Lp);
}

double edge_range(const Spectrum& canonical, int m) {
  if (!canonical.is_canonical()) throw Error(ErrorCode::InvalidArgument, "edge_range needs an ascending spectrum");
  const int n = static_cast<int>(canonical.size());
  if (m < 1 || m > n - 1) throw Error(ErrorCode::IndexOutOfRange, "edge index m must be in [1, n-1]");
  double low = 0.0, high = 0.0;
  for (int i = 0; i < m; ++i) low += canonical[static_cast<std::size_t>(i)];
  for (int i = m; i < n; ++i) high += canonical[static_cast<std::size_t>(i)];
  return high / (n - m) - low / m;
}

std::pair<double, int> min_edge_range(const Spectrum& s) {
  const Spectrum sorted = s.canonical();
  const int n = static_cast<int>(sorted.size());
  std::pair<double, int> best{edge_range(sorted, 1), 1};
  for (int m = 2; m < n; ++m) {
    const double d = edge_range(sorted, m);
    if (d < best.first - 1e-12 * std::max(1.0, std::abs(best.first))) best = {d, m};
  }
  return best;
}

Spectrum sample_study_spectrum(int n, Rng& rng) {
  std::vector<double> levels(static_cast<std::size_t>(n));
  for (auto& v : levels) v = rng.uniform(0.0, n - 1.0);
  const auto [lo, hi] = std::minmax_element(levels.begin(), levels.end());
  const auto lo_at = lo - levels.begin();
  const auto hi_at = hi - levels.begin();
  levels[static_cast<std::size_t>(lo_at)] = 0.0;
  levels[static_cast<std::size_t>(hi_at)] = n - 1.0;
  return Spectrum(std::move(levels), "random");
}

TargetVector sample_study_target(int n, Rng& rng) {
  std::vector<double> t(static_cast<std::size_t>(n));
  for (auto& v : t) v = rng.uniform();
  const auto [lo, hi] = std::minmax_element(t.begin(), t.end());
  const auto lo_at = lo - t.begin();
  const auto hi_at = hi - t.begin();
  t[static_cast<std::size_t>(lo_at)] = 0.0;
  t[static_cast<std::size_t>(hi_at)] = 1.0;
  return TargetVector(std::move(t));
}

std::vector<ReductionStudyRow> reduction_study(std::span<const int> n_values, int samples, std::uint64_t seed) {
  if (samples < 1) throw Error(ErrorCode::InvalidArgument, "samples must be >= 1");
  std::vector<ReductionStudyRow> rows;
  for (int n : n_values) {
    if (n < 2) throw Error(ErrorCode::InvalidArgument, "study n must be >= 2");
    std::vector<double> ranges(static_cast<std::size_t>(samples));
    std::vector<double> minima(static_cast<std::size_t>(samples));
    parallel_for(static_cast<std::size_t>(samples), [&](std::size_t i) {
      Rng rng(split_seed(seed, static_cast<std::uint64_t>(n), i));
      const Spectrum s = sample_study_spectrum(n, rng);
      const TargetVector t = sample_study_target(n, rng);
      ranges[i] = lp_max_range_design(s, t).achieved_range;
      minima[i] = min_edge_range(s).first;
    });
    double sum_range = 0.0, sum_min = 0.0;
    for (std::size_t i = 0; i < ranges.size(); ++i) {
      sum_range += ranges[i];
      sum_min += minima[i];
    }
    rows.push_back({n, sum_range / samples, sum_min / samples, samples, seed});
  }
  return rows;
}

double fit_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw Error(ErrorCode::InvalidArgument, "slope fit needs >= 2 points");
  const double k = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= k;
  my /= k;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace spectralforge
