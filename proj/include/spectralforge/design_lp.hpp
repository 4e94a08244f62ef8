#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "spectralforge/core_spectra.hpp"
#include "spectralforge/lp_simplex.hpp"
#include "spectralforge/rng.hpp"

namespace spectralforge {

enum class DesignMethod { Analytic, Lp, Minimal };

std::string_view to_string(DesignMethod method);

struct DesignResult {
  BistochasticMatrix weights;
  Spectrum effective;
  double achieved_range;
  DesignMethod method;
};

/// Range-maximization problem over the deviations eps = R - 1/n, flattened
/// row-major (v[i*n + j] = eps_ij). Rows: one spectral row per level other
/// than the target's low/high anchors, then n row sums and n-1 column sums.
struct RangeLp {
  RealVector cost;
  RealMatrix equality;
  RealVector lower;
  RealVector upper;
  std::size_t low_level;
  std::size_t high_level;
};

RangeLp build_range_lp(const Spectrum& s, const TargetVector& t);

/// A nonzero kernel element of the homogeneous target system and the largest
/// scale keeping 1/n + scale * eps inside [0, 1].
struct KernelDirection {
  RealMatrix epsilon;
  double max_scale;
};

/// Projection of the range functional onto the kernel (via SVD). Throws
/// NoDirection when every kernel element has zero effective range.
KernelDirection analytic_direction(const Spectrum& s, const TargetVector& t);

DesignResult analytic_design(const Spectrum& s, const TargetVector& t);

/// Maximizes the effective range for the target with the bounded simplex.
DesignResult lp_max_range_design(const Spectrum& s, const TargetVector& t);

/// Same optimum through the inequality-doubled, nonnegative-variable form
/// (A v <= b, -A v <= -b, v >= 0). Kept as a cross-check of the native form.
DesignResult lp_max_range_design_standard_form(const Spectrum& s, const TargetVector& t);

/// Mean of the top n-m levels minus mean of the bottom m (sorted input).
double edge_range(const Spectrum& canonical, int m);

/// (min_m edge_range, argmin m), smallest m on ties. Sorts internally.
std::pair<double, int> min_edge_range(const Spectrum& s);

struct ReductionStudyRow {
  int n;
  double mean_range;
  double mean_min_range;
  int samples;
  std::uint64_t seed;
};

/// n i.i.d. uniform levels on [0, n-1] with the smallest pinned to 0 and the
/// largest to n-1.
Spectrum sample_study_spectrum(int n, Rng& rng);

/// n i.i.d. uniform ratios on [0, 1] with the smallest pinned to 0 and the
/// largest to 1.
TargetVector sample_study_target(int n, Rng& rng);

std::vector<ReductionStudyRow> reduction_study(std::span<const int> n_values, int samples,
                                               std::uint64_t seed);

/// Least-squares slope of y against x.
double fit_slope(std::span<const double> x, std::span<const double> y);

}  // namespace spectralforge
