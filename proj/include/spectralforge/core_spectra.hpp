#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace spectralforge {

using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Eigenvalues of the generator in a fixed level order. Level identity
/// matters (probe amplitudes refer to it), so storage is unsorted; use
/// canonical() for the ascending view.
class Spectrum {
 public:
  explicit Spectrum(std::vector<double> levels, std::string label = {});

  std::size_t size() const noexcept { return levels_.size(); }
  const std::vector<double>& levels() const noexcept { return levels_; }
  const std::string& label() const noexcept { return label_; }
  double operator[](std::size_t i) const { return levels_[i]; }

  double min() const;
  double max() const;
  bool is_canonical() const;
  Spectrum canonical() const;
  RealVector as_vector() const;

 private:
  std::vector<double> levels_;
  std::string label_;
};

/// Relative positions t_i in [0,1] of the effective levels; 0 and 1 present.
class TargetVector {
 public:
  explicit TargetVector(std::vector<double> ratios);

  std::size_t size() const noexcept { return ratios_.size(); }
  const std::vector<double>& ratios() const noexcept { return ratios_; }
  double operator[](std::size_t i) const { return ratios_[i]; }

  /// First index holding 0 and first index holding 1.
  std::size_t low_index() const;
  std::size_t high_index() const;

 private:
  std::vector<double> ratios_;
};

/// Nonnegative weights with unit row and column sums. Entries within
/// tolerance of zero are clamped to zero on construction.
class BistochasticMatrix {
 public:
  static constexpr double kDefaultTolerance = 1e-9;

  explicit BistochasticMatrix(RealMatrix entries,
                              double tolerance = kDefaultTolerance);

  static BistochasticMatrix identity(std::size_t n);

  std::size_t size() const noexcept { return static_cast<std::size_t>(entries_.rows()); }
  const RealMatrix& entries() const noexcept { return entries_; }
  double tolerance() const noexcept { return tolerance_; }
  double operator()(std::size_t i, std::size_t j) const {
    return entries_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

  /// Throws Error(InvalidArgument) when m violates the invariants.
  static void validate(const RealMatrix& m, double tolerance = kDefaultTolerance);

 private:
  RealMatrix entries_;
  double tolerance_;
};

/// Bijection j -> image(j) on {0..n-1}. As a weight pattern it puts level
/// j's weight on original level image(j).
class Permutation {
 public:
  explicit Permutation(std::vector<int> mapping);

  static Permutation identity(std::size_t n);
  static Permutation transposition(std::size_t n, int i, int j);

  std::size_t size() const noexcept { return mapping_.size(); }
  const std::vector<int>& mapping() const noexcept { return mapping_; }
  int operator()(std::size_t j) const { return mapping_[j]; }

  bool is_identity() const;
  Permutation inverse() const;
  /// (*this then other): j -> other(this(j)).
  Permutation then(const Permutation& other) const;
  /// Weight pattern W with W(j, image(j)) = 1.
  RealMatrix weight_matrix() const;

  friend bool operator==(const Permutation&, const Permutation&) = default;

 private:
  std::vector<int> mapping_;
};

struct ScheduleSegment {
  double fraction;
  Permutation perm;
};

/// Conjugation segments: during segment k level j evolves with eigenvalue
/// lambda[perm_k(j)]; the net relabeling over the schedule is the identity.
class SwitchingSchedule {
 public:
  SwitchingSchedule(std::vector<ScheduleSegment> segments, double total_time);

  const std::vector<ScheduleSegment>& segments() const noexcept { return segments_; }
  double total_time() const noexcept { return total_time_; }
  std::size_t dimension() const { return segments_.front().perm.size(); }

  /// Sum_k fraction_k * W(perm_k).
  BistochasticMatrix weights() const;

 private:
  std::vector<ScheduleSegment> segments_;
  double total_time_;
};

class ProbeState {
 public:
  explicit ProbeState(ComplexVector amplitudes);

  /// Rescales to unit norm; throws on a zero vector.
  static ProbeState normalized(ComplexVector amplitudes);
  static ProbeState uniform(std::size_t n);

  std::size_t size() const noexcept { return static_cast<std::size_t>(amplitudes_.size()); }
  const ComplexVector& amplitudes() const noexcept { return amplitudes_; }
  std::complex<double> operator[](std::size_t i) const {
    return amplitudes_(static_cast<Eigen::Index>(i));
  }

 private:
  ComplexVector amplitudes_;
};

double spectral_range(const Spectrum& s);

/// (lambda_i - min) / (max - min). Throws DegenerateRange on a flat spectrum.
TargetVector target_ratios(const Spectrum& s);

/// lambda_eff = R * lambda.
Spectrum apply_weights(const BistochasticMatrix& r, const Spectrum& s);

/// Exact piecewise evolution of the amplitudes under the schedule, built
/// from dense permutation and propagator matrices.
ProbeState simulate_schedule(const Spectrum& s, const SwitchingSchedule& schedule,
                             double omega, const ProbeState& probe);

/// p_jm = (1/sum d) sum_i d_i |U_i(j,m)|^2 for arbitrary unitary control.
BistochasticMatrix general_control_weights(std::span<const ComplexMatrix> unitaries,
                                           std::span<const double> durations);

/// Max |ratio difference|; used to check that a design realizes a target.
double ratio_mismatch(const Spectrum& effective, const TargetVector& target);

}  // namespace spectralforge
