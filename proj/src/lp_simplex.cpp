#include "spectralforge/lp_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "spectralforge/errors.hpp"

namespace spectralforge {

namespace {

enum class VarState : unsigned char { Basic, AtLower, AtUpper };

// Tableau over shifted variables y = x - lower, so every variable has
// range [0, width]. Columns [0, n) are structural, [n, n + m) artificial.
class BoundedSimplex {
 public:
  BoundedSimplex(const LinearProgram& lp, const SimplexOptions& opt) : opt_(opt) {
    m_ = lp.equality.rows();
    n_ = lp.equality.cols();
    const Eigen::Index total = n_ + m_;
    tableau_ = RealMatrix::Zero(m_, total);
    width_ = RealVector::Constant(total, kInfinity);
    width_.head(n_) = lp.upper - lp.lower;
    value_ = RealVector::Zero(total);
    state_.assign(static_cast<std::size_t>(total), VarState::AtLower);
    basis_.resize(static_cast<std::size_t>(m_));

    const RealVector shifted_rhs = lp.rhs - lp.equality * lp.lower;
    for (Eigen::Index r = 0; r < m_; ++r) {
      const double sign = shifted_rhs(r) < 0.0 ? -1.0 : 1.0;
      tableau_.row(r).head(n_) = sign * lp.equality.row(r);
      tableau_(r, n_ + r) = 1.0;
      value_(n_ + r) = sign * shifted_rhs(r);
      basis_[static_cast<std::size_t>(r)] = n_ + r;
      state_[static_cast<std::size_t>(n_ + r)] = VarState::Basic;
    }
  }

  LpStatus run(const RealVector& cost, int& iterations) {
    while (true) {
      if (iterations >= opt_.max_iterations) return LpStatus::IterationLimit;
      const Eigen::Index entering = choose_entering(cost);
      if (entering < 0) return LpStatus::Optimal;
      const double dir = state_[static_cast<std::size_t>(entering)] == VarState::AtLower ? 1.0 : -1.0;

      // Ratio test. Basic i moves by -dir * theta * alpha_i.
      double best = width_(entering);
      Eigen::Index leave_row = -1;
      bool leave_at_upper = false;
      for (Eigen::Index r = 0; r < m_; ++r) {
        const double alpha = tableau_(r, entering);
        if (std::abs(alpha) <= opt_.pivot_tolerance) continue;
        const double rate = -dir * alpha;
        const Eigen::Index b = basis_[static_cast<std::size_t>(r)];
        double limit;
        bool to_upper;
        if (rate < 0.0) {
          limit = std::max(0.0, value_(b)) / -rate;
          to_upper = false;
        } else {
          if (!std::isfinite(width_(b))) continue;
          limit = std::max(0.0, width_(b) - value_(b)) / rate;
          to_upper = true;
        }
        // Bland: among ties keep the basic variable with the smallest index.
        const double slack = 1e-12 * std::max(1.0, std::isfinite(best) ? best : 1.0);
        const bool better = limit < best - slack;
        const bool tie_wins = leave_row >= 0 && limit <= best + slack &&
                              b < basis_[static_cast<std::size_t>(leave_row)];
        if (better || tie_wins) {
          best = std::min(best, limit);
          leave_row = r;
          leave_at_upper = to_upper;
        }
      }
      if (!std::isfinite(best)) return LpStatus::Unbounded;
      ++iterations;

      for (Eigen::Index r = 0; r < m_; ++r) {
        const Eigen::Index b = basis_[static_cast<std::size_t>(r)];
        value_(b) -= dir * best * tableau_(r, entering);
      }
      value_(entering) += dir * best;

      if (leave_row < 0) {
        // Bound flip of the entering variable; basis unchanged.
        state_[static_cast<std::size_t>(entering)] =
            dir > 0 ? VarState::AtUpper : VarState::AtLower;
        value_(entering) = dir > 0 ? width_(entering) : 0.0;
        continue;
      }
      const Eigen::Index leaving = basis_[static_cast<std::size_t>(leave_row)];
      state_[static_cast<std::size_t>(leaving)] = leave_at_upper ? VarState::AtUpper : VarState::AtLower;
      value_(leaving) = leave_at_upper ? width_(leaving) : 0.0;
      pivot(leave_row, entering);
    }
  }

  // Phase-1 exit: swap zero-valued artificials out of the basis, and drop
  // rows that turn out to be linearly dependent.
  void purge_artificials() {
    for (Eigen::Index r = 0; r < m_;) {
      const Eigen::Index b = basis_[static_cast<std::size_t>(r)];
      if (b < n_) {
        ++r;
        continue;
      }
      Eigen::Index col = -1;
      double biggest = 1e-9;
      for (Eigen::Index j = 0; j < n_; ++j) {
        if (state_[static_cast<std::size_t>(j)] == VarState::Basic) continue;
        if (std::abs(tableau_(r, j)) > biggest) {
          biggest = std::abs(tableau_(r, j));
          col = j;
        }
      }
      if (col >= 0) {
        state_[static_cast<std::size_t>(b)] = VarState::AtLower;
        value_(b) = 0.0;
        pivot(r, col);
        ++r;
      } else {
        remove_row(r);
      }
    }
    for (Eigen::Index j = n_; j < width_.size(); ++j) {
      width_(j) = 0.0;
      if (state_[static_cast<std::size_t>(j)] != VarState::Basic) value_(j) = 0.0;
    }
  }

  RealVector structural_values() const { return value_.head(n_); }

  std::vector<Eigen::Index> basic_structurals() const {
    std::vector<Eigen::Index> out;
    for (auto b : basis_)
      if (b < n_) out.push_back(b);
    return out;
  }

  double artificial_sum() const { return value_.tail(value_.size() - n_).sum(); }

 private:
  Eigen::Index choose_entering(const RealVector& cost) const {
    // Reduced costs d_j = c_j - c_B^T T_j (minimization).
    RealVector cb(m_);
    for (Eigen::Index r = 0; r < m_; ++r) cb(r) = cost(basis_[static_cast<std::size_t>(r)]);
    const RealVector reduced = cost - (cb.transpose() * tableau_).transpose();
    for (Eigen::Index j = 0; j < cost.size(); ++j) {
      const VarState st = state_[static_cast<std::size_t>(j)];
      if (st == VarState::Basic || width_(j) <= 0.0) continue;
      if (st == VarState::AtLower && reduced(j) < -opt_.optimality_tolerance) return j;
      if (st == VarState::AtUpper && reduced(j) > opt_.optimality_tolerance) return j;
    }
    return -1;
  }

  void pivot(Eigen::Index row, Eigen::Index col) {
    const double p = tableau_(row, col);
    tableau_.row(row) /= p;
    for (Eigen::Index r = 0; r < m_; ++r) {
      if (r == row) continue;
      const double f = tableau_(r, col);
      if (f != 0.0) tableau_.row(r) -= f * tableau_.row(row);
    }
    state_[static_cast<std::size_t>(col)] = VarState::Basic;
    basis_[static_cast<std::size_t>(row)] = col;
  }

  void remove_row(Eigen::Index row) {
    const Eigen::Index b = basis_[static_cast<std::size_t>(row)];
    state_[static_cast<std::size_t>(b)] = VarState::AtLower;
    value_(b) = 0.0;
    RealMatrix next(m_ - 1, tableau_.cols());
    next.topRows(row) = tableau_.topRows(row);
    next.bottomRows(m_ - 1 - row) = tableau_.bottomRows(m_ - 1 - row);
    tableau_ = std::move(next);
    basis_.erase(basis_.begin() + row);
    --m_;
  }

  SimplexOptions opt_;
  Eigen::Index m_ = 0;
  Eigen::Index n_ = 0;
  RealMatrix tableau_;
  RealVector width_;
  RealVector value_;
  std::vector<VarState> state_;
  std::vector<Eigen::Index> basis_;
};

}  // namespace

namespace {

LpSolution solve_once(const LinearProgram& lp, const SimplexOptions& options) {
  const Eigen::Index n = lp.equality.cols();
  const Eigen::Index m = lp.equality.rows();
  if (lp.cost.size() != n || lp.rhs.size() != m || lp.lower.size() != n || lp.upper.size() != n)
    throw Error(ErrorCode::DimensionMismatch, "linear program dimensions are inconsistent");
  for (Eigen::Index j = 0; j < n; ++j) {
    if (!std::isfinite(lp.lower(j))) throw Error(ErrorCode::InvalidArgument, "lower bounds must be finite");
    if (lp.upper(j) < lp.lower(j)) throw Error(ErrorCode::Infeasible, "empty variable range");
  }

  LpSolution sol;
  BoundedSimplex simplex(lp, options);

  RealVector phase1 = RealVector::Zero(n + m);
  phase1.tail(m).setOnes();
  sol.status = simplex.run(phase1, sol.iterations);
  if (sol.status != LpStatus::Optimal) return sol;
  if (simplex.artificial_sum() > options.feasibility_tolerance) {
    sol.status = LpStatus::Infeasible;
    return sol;
  }
  simplex.purge_artificials();

  RealVector phase2 = RealVector::Zero(n + m);
  phase2.head(n) = lp.maximize ? RealVector(-lp.cost) : lp.cost;
  sol.status = simplex.run(phase2, sol.iterations);
  if (sol.status != LpStatus::Optimal) return sol;

  // Refine the basic values from the original data: nonbasics sit exactly
  // on their bounds, basics solve A_B x_B = b - A_N x_N.
  RealVector x = simplex.structural_values() + lp.lower;
  const auto basic = simplex.basic_structurals();
  if (!basic.empty()) {
    RealVector rhs = lp.rhs;
    RealMatrix ab(m, static_cast<Eigen::Index>(basic.size()));
    std::vector<char> is_basic(static_cast<std::size_t>(n), 0);
    for (std::size_t k = 0; k < basic.size(); ++k) {
      ab.col(static_cast<Eigen::Index>(k)) = lp.equality.col(basic[k]);
      is_basic[static_cast<std::size_t>(basic[k])] = 1;
    }
    for (Eigen::Index j = 0; j < n; ++j)
      if (!is_basic[static_cast<std::size_t>(j)]) rhs -= lp.equality.col(j) * x(j);
    const RealVector xb = ab.colPivHouseholderQr().solve(rhs);
    for (std::size_t k = 0; k < basic.size(); ++k) x(basic[k]) = xb(static_cast<Eigen::Index>(k));
  }
  x = x.cwiseMax(lp.lower).cwiseMin(lp.upper);
  sol.x = x;
  sol.objective = lp.cost.dot(x);
  sol.residual = m > 0 ? (lp.equality * x - lp.rhs).cwiseAbs().maxCoeff() : 0.0;
  return sol;
}

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& options) {
  SimplexOptions opt = options;
  int iterations = 0;
  for (int attempt = 0;; ++attempt) {
    LpSolution sol = solve_once(lp, opt);
    iterations += sol.iterations;
    sol.iterations = iterations;
    if (sol.status != LpStatus::Optimal) return sol;
    if (lp.equality.size() == 0 || sol.x.size() == 0) return sol;
    const double scale = std::max({1.0, lp.equality.cwiseAbs().maxCoeff() * sol.x.cwiseAbs().maxCoeff(),
                                   lp.rhs.cwiseAbs().maxCoeff()});
    if (sol.residual <= opt.feasibility_tolerance * scale) return sol;
    if (attempt == opt.pivot_retries) {
      sol.status = LpStatus::Numerical;
      return sol;
    }
    opt.pivot_tolerance *= 10.0;
  }
}

}  // namespace spectralforge
