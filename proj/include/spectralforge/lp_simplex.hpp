#pragma once

#include <limits>

#include "spectralforge/core_spectra.hpp"

namespace spectralforge {

/// optimize cost^T x  subject to  A x = b,  lower <= x <= upper.
/// Lower bounds must be finite; upper bounds may be +infinity.
struct LinearProgram {
  RealVector cost;
  RealMatrix equality;
  RealVector rhs;
  RealVector lower;
  RealVector upper;
  bool maximize = false;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit, Numerical };

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  RealVector x;
  double objective = 0.0;
  int iterations = 0;
  /// Max |A x - b| of the returned point (after basis refinement).
  double residual = 0.0;
};

struct SimplexOptions {
  double pivot_tolerance = 1e-10;
  double feasibility_tolerance = 1e-9;
  double optimality_tolerance = 1e-10;
  int max_iterations = 200000;
  /// When the returned point misses A x = b by more than the feasibility
  /// tolerance, re-solve with the pivot tolerance raised tenfold, up to this
  /// many times. Numerical status if none succeeds.
  int pivot_retries = 4;
};

/// Dense bounded-variable primal simplex, two phases, Bland's rule for both
/// the entering and leaving choice.
LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& options = {});

constexpr double kInfinity = std::numeric_limits<double>::infinity();

}  // namespace spectralforge
