#include "spectralforge/schedule_synth.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "spectralforge/errors.hpp"
#include "spectralforge/lp_simplex.hpp"
#include "spectralforge/parallel.hpp"
#include "spectralforge/rng.hpp"

namespace spectralforge {

namespace {

constexpr double kSupportThreshold = 1e-12;

// Kuhn's augmenting paths, skipping taken columns.
bool augment(const RealMatrix& m, Eigen::Index row, const std::vector<char>& taken, std::vector<char>& seen,
             std::vector<Eigen::Index>& col_owner) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    const auto uc = static_cast<std::size_t>(c);
    if (m(row, c) <= kSupportThreshold || taken[uc] || seen[uc]) continue;
    seen[uc] = 1;
    if (col_owner[uc] < 0 || augment(m, col_owner[uc], taken, seen, col_owner)) {
      col_owner[uc] = row;
      return true;
    }
  }
  return false;
}

bool completable(const RealMatrix& m, Eigen::Index first_row, const std::vector<char>& taken) {
  const auto n = static_cast<std::size_t>(m.rows());
  std::vector<Eigen::Index> col_owner(n, -1);
  for (Eigen::Index r = first_row; r < m.rows(); ++r) {
    std::vector<char> seen(n, 0);
    if (!augment(m, r, taken, seen, col_owner)) return false;
  }
  return true;
}

// Lexicographically smallest perfect matching on the support: each row takes
// the smallest column that still leaves the remaining rows matchable.
std::optional<std::vector<int>> perfect_matching(const RealMatrix& m) {
  const Eigen::Index n = m.rows();
  std::vector<char> taken(static_cast<std::size_t>(n), 0);
  if (!completable(m, 0, taken)) return std::nullopt;
  std::vector<int> row_to_col(static_cast<std::size_t>(n), -1);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) {
      const auto uc = static_cast<std::size_t>(c);
      if (taken[uc] || m(r, c) <= kSupportThreshold) continue;
      taken[uc] = 1;
      if (completable(m, r + 1, taken)) {
        row_to_col[static_cast<std::size_t>(r)] = static_cast<int>(c);
        break;
      }
      taken[uc] = 0;
    }
    if (row_to_col[static_cast<std::size_t>(r)] < 0) throw std::logic_error("matching extension failed");
  }
  return row_to_col;
}

// Rebalances sums left off by up to the validation tolerance so the greedy
// loop does not strand sub-threshold dust without a matching.
RealMatrix sinkhorn_balance(RealMatrix m) {
  for (int it = 0; it < 1000; ++it) {
    const RealVector rows = m.rowwise().sum();
    const RealVector cols = m.colwise().sum().transpose();
    const double dev = std::max((rows.array() - 1.0).abs().maxCoeff(), (cols.array() - 1.0).abs().maxCoeff());
    if (dev <= 1e-15) break;
    m = rows.cwiseInverse().asDiagonal() * m;
    m = m * m.colwise().sum().transpose().cwiseInverse().asDiagonal();
  }
  return m;
}

}  // namespace

double BirkhoffDecomposition::total_weight() const {
  double sum = 0.0;
  for (const auto& term : terms) sum += term.weight;
  return sum;
}

RealMatrix BirkhoffDecomposition::reconstruct() const {
  const auto n = static_cast<Eigen::Index>(dimension());
  RealMatrix out = RealMatrix::Zero(n, n);
  for (const auto& term : terms) out += term.weight * term.perm.weight_matrix();
  return out;
}

BirkhoffDecomposition birkhoff_decompose(const BistochasticMatrix& r) {
  RealMatrix residual = r.entries();
  residual = residual.unaryExpr([](double v) { return v <= kSupportThreshold ? 0.0 : v; });
  residual = sinkhorn_balance(std::move(residual));
  const std::size_t n = r.size();

  BirkhoffDecomposition out;
  while (residual.maxCoeff() > kSupportThreshold) {
    const auto match = perfect_matching(residual);
    if (!match) throw Error(ErrorCode::MatchingFailed, "no perfect matching on the residual support");
    double theta = kInfinity;
    for (std::size_t i = 0; i < n; ++i) theta = std::min(theta, residual(static_cast<Eigen::Index>(i), (*match)[i]));
    for (std::size_t i = 0; i < n; ++i) {
      double& entry = residual(static_cast<Eigen::Index>(i), (*match)[i]);
      entry -= theta;
      if (entry <= kSupportThreshold) entry = 0.0;
    }
    out.terms.push_back({theta, Permutation(*match)});
    if (out.terms.size() > n * n) throw std::logic_error("Birkhoff loop failed to terminate");
  }
  return out;
}

std::vector<Swap> permutation_to_transpositions(const Permutation& p) {
  const std::size_t n = p.size();
  std::vector<int> arr(n);
  std::iota(arr.begin(), arr.end(), 0);
  std::vector<Swap> swaps;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (arr[i] == p(i)) continue;
    std::size_t k = i + 1;
    while (arr[k] != p(i)) ++k;
    std::swap(arr[i], arr[k]);
    swaps.emplace_back(static_cast<int>(i), static_cast<int>(k));
  }
  return swaps;
}

Permutation compose_transpositions(std::size_t n, const std::vector<Swap>& swaps) {
  std::vector<int> arr(n);
  std::iota(arr.begin(), arr.end(), 0);
  for (const auto& [i, j] : swaps) std::swap(arr.at(static_cast<std::size_t>(i)), arr.at(static_cast<std::size_t>(j)));
  return Permutation(std::move(arr));
}

SwitchingSchedule build_schedule(const BirkhoffDecomposition& d, double total_time) {
  if (d.terms.empty()) throw Error(ErrorCode::InvalidArgument, "empty decomposition");
  std::vector<BirkhoffTerm> terms = d.terms;
  std::stable_sort(terms.begin(), terms.end(),
                   [](const BirkhoffTerm& a, const BirkhoffTerm& b) { return a.weight > b.weight; });
  const double total = d.total_weight();
  std::vector<ScheduleSegment> segments;
  segments.reserve(terms.size());
  for (auto& term : terms) segments.push_back({term.weight / total, std::move(term.perm)});
  return SwitchingSchedule(std::move(segments), total_time);
}

std::size_t switch_count(const SwitchingSchedule& schedule) {
  std::size_t count = 0;
  for (const auto& seg : schedule.segments()) count += permutation_to_transpositions(seg.perm).size();
  return count;
}

BistochasticMatrix MinimalDesign::implied_weights() const {
  const auto n = static_cast<Eigen::Index>(perms.front().size());
  RealMatrix r = RealMatrix::Zero(n, n);
  for (std::size_t c = 0; c < perms.size(); ++c) r += weights[c] * perms[c].weight_matrix();
  return BistochasticMatrix(std::move(r));
}

std::size_t MinimalDesign::active_swaps() const {
  std::size_t last = 0;
  for (std::size_t c = 0; c < weights.size(); ++c)
    if (weights[c] > 1e-12) last = c;
  return last;
}

std::optional<MinimalDesign> solve_chain(const Spectrum& s, const TargetVector& t, const std::vector<Swap>& chain) {
  const std::size_t n = s.size();
  if (t.size() != n) throw Error(ErrorCode::DimensionMismatch, "spectrum and target sizes differ");
  std::vector<Permutation> perms{Permutation::identity(n)};
  for (const auto& [i, j] : chain)
    perms.push_back(perms.back().then(Permutation::transposition(n, i, j)));

  const std::size_t a = t.low_index();
  const std::size_t b = t.high_index();
  const auto vars = static_cast<Eigen::Index>(perms.size());
  LinearProgram lp;
  lp.equality = RealMatrix::Zero(static_cast<Eigen::Index>(n - 1), vars);
  lp.cost.resize(vars);
  for (Eigen::Index c = 0; c < vars; ++c) {
    const Permutation& p = perms[static_cast<std::size_t>(c)];
    auto lam = [&](std::size_t level) { return s[static_cast<std::size_t>(p(level))]; };
    Eigen::Index row = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == a || j == b) continue;
      lp.equality(row++, c) = lam(j) - (1.0 - t[j]) * lam(a) - t[j] * lam(b);
    }
    lp.equality(row, c) = 1.0;
    lp.cost(c) = lam(b) - lam(a);
  }
  lp.rhs = RealVector::Zero(static_cast<Eigen::Index>(n - 1));
  lp.rhs(static_cast<Eigen::Index>(n - 2)) = 1.0;
  lp.lower = RealVector::Zero(vars);
  lp.upper = RealVector::Ones(vars);
  lp.maximize = true;

  const LpSolution sol = solve_lp(lp);
  if (sol.status != LpStatus::Optimal || sol.objective <= 1e-9 || sol.residual > 1e-9) return std::nullopt;

  MinimalDesign design{std::vector<double>(sol.x.data(), sol.x.data() + sol.x.size()), chain, std::move(perms),
                       s, 0.0};
  design.effective = apply_weights(design.implied_weights(), s);
  design.achieved_range = spectral_range(design.effective);
  if (ratio_mismatch(design.effective, t) > 1e-7) return std::nullopt;
  return design;
}

namespace {

std::size_t pair_count(std::size_t n) { return n * (n - 1) / 2; }

Swap pair_at(std::size_t n, std::size_t index) {
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (index-- == 0) return {static_cast<int>(i), static_cast<int>(j)};
  throw std::logic_error("pair index out of range");
}

void check_minimal_inputs(const Spectrum& s, const TargetVector& t, int k) {
  if (s.size() != t.size()) throw Error(ErrorCode::DimensionMismatch, "spectrum and target sizes differ");
  if (!(spectral_range(s) > 0.0)) throw Error(ErrorCode::DegenerateRange, "spectral range is zero");
  if (k < static_cast<int>(s.size()) - 2) throw Error(ErrorCode::InvalidArgument, "chain length k must be >= n-2");
}

bool better(const std::optional<MinimalDesign>& candidate, const std::optional<MinimalDesign>& best) {
  return candidate && (!best || candidate->achieved_range > best->achieved_range + 1e-12);
}

}  // namespace

MinimalDesign minimal_switch_design(const Spectrum& s, const TargetVector& t, int k, int tries, std::uint64_t seed) {
  check_minimal_inputs(s, t, k);
  if (tries < 1) throw Error(ErrorCode::InvalidArgument, "tries must be >= 1");
  const std::size_t n = s.size();
  const std::size_t pairs = pair_count(n);

  std::vector<std::optional<MinimalDesign>> found(static_cast<std::size_t>(tries));
  parallel_for(found.size(), [&](std::size_t i) {
    Rng rng(split_seed(seed, 0x5157, i));
    std::vector<std::size_t> pool(pairs);
    std::iota(pool.begin(), pool.end(), 0);
    std::vector<Swap> chain;
    for (int c = 0; c < k; ++c) {
      // Distinct swaps while the pool lasts; after that only avoid repeating
      // the previous swap (which would cancel it).
      std::size_t pick;
      if (static_cast<std::size_t>(c) < pairs) {
        const std::size_t at = static_cast<std::size_t>(c) + rng.index(pairs - static_cast<std::size_t>(c));
        std::swap(pool[static_cast<std::size_t>(c)], pool[at]);
        pick = pool[static_cast<std::size_t>(c)];
      } else {
        do pick = rng.index(pairs);
        while (pairs > 1 && pair_at(n, pick) == chain.back());
      }
      chain.push_back(pair_at(n, pick));
    }
    found[i] = solve_chain(s, t, chain);
  });

  std::optional<MinimalDesign> best;
  for (auto& f : found)
    if (better(f, best)) best = std::move(f);
  if (!best) throw Error(ErrorCode::NoFeasibleChain, "no sampled chain realizes the target; raise k or tries");
  return std::move(*best);
}

MinimalDesign minimal_switch_design_exhaustive(const Spectrum& s, const TargetVector& t, int k) {
  check_minimal_inputs(s, t, k);
  const std::size_t n = s.size();
  if (n > 4) throw Error(ErrorCode::InvalidArgument, "exhaustive chain search is limited to n <= 4");
  const std::size_t pairs = pair_count(n);
  if (static_cast<std::size_t>(k) > pairs) throw Error(ErrorCode::InvalidArgument, "k exceeds the number of distinct swaps");

  std::optional<MinimalDesign> best;
  std::vector<Swap> chain;
  std::vector<char> used(pairs, 0);
  std::function<void()> recurse = [&] {
    if (chain.size() == static_cast<std::size_t>(k)) {
      auto candidate = solve_chain(s, t, chain);
      if (better(candidate, best)) best = std::move(candidate);
      return;
    }
    for (std::size_t p = 0; p < pairs; ++p) {
      if (used[p]) continue;
      used[p] = 1;
      chain.push_back(pair_at(n, p));
      recurse();
      chain.pop_back();
      used[p] = 0;
    }
  };
  recurse();
  if (!best) throw Error(ErrorCode::NoFeasibleChain, "no chain of this length realizes the target");
  return std::move(*best);
}

}  // namespace spectralforge
