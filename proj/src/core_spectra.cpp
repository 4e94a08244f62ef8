#include "spectralforge/core_spectra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "spectralforge/errors.hpp"

namespace spectralforge {

namespace {

[[noreturn]] void invalid(const std::string& what) {
  throw Error(ErrorCode::InvalidArgument, what);
}

}  // namespace

// ---------------------------------------------------------------- Spectrum

Spectrum::Spectrum(std::vector<double> levels, std::string label)
    : levels_(std::move(levels)), label_(std::move(label)) {
  if (levels_.size() < 2) throw Error(ErrorCode::TooFewLevels, "spectrum needs at least 2 levels");
  for (double v : levels_)
    if (!std::isfinite(v)) invalid("spectrum level is not finite");
}

double Spectrum::min() const { return *std::min_element(levels_.begin(), levels_.end()); }
double Spectrum::max() const { return *std::max_element(levels_.begin(), levels_.end()); }

bool Spectrum::is_canonical() const { return std::is_sorted(levels_.begin(), levels_.end()); }

Spectrum Spectrum::canonical() const {
  auto sorted = levels_;
  std::sort(sorted.begin(), sorted.end());
  return Spectrum(std::move(sorted), label_);
}

RealVector Spectrum::as_vector() const {
  return Eigen::Map<const RealVector>(levels_.data(), static_cast<Eigen::Index>(levels_.size()));
}

// ------------------------------------------------------------ TargetVector

TargetVector::TargetVector(std::vector<double> ratios) : ratios_(std::move(ratios)) {
  if (ratios_.size() < 2) throw Error(ErrorCode::TooFewLevels, "target vector needs at least 2 entries");
  for (double t : ratios_)
    if (!std::isfinite(t) || t < 0.0 || t > 1.0) invalid("target ratio outside [0,1]");
  const auto [lo, hi] = std::minmax_element(ratios_.begin(), ratios_.end());
  if (*lo != 0.0 || *hi != 1.0) invalid("target vector must contain 0 and 1");
}

std::size_t TargetVector::low_index() const {
  return static_cast<std::size_t>(std::find(ratios_.begin(), ratios_.end(), 0.0) - ratios_.begin());
}

std::size_t TargetVector::high_index() const {
  return static_cast<std::size_t>(std::find(ratios_.begin(), ratios_.end(), 1.0) - ratios_.begin());
}

// ------------------------------------------------------ BistochasticMatrix

void BistochasticMatrix::validate(const RealMatrix& m, double tolerance) {
  if (m.rows() != m.cols() || m.rows() < 1) invalid("weight matrix must be square and nonempty");
  if (!m.allFinite()) invalid("weight matrix has non-finite entries");
  if (m.minCoeff() < -tolerance) {
    std::ostringstream os;
    os << "weight matrix has negative entry " << m.minCoeff();
    invalid(os.str());
  }
  const RealVector rows = m.rowwise().sum();
  const RealVector cols = m.colwise().sum().transpose();
  const double dev = std::max((rows.array() - 1.0).abs().maxCoeff(),
                              (cols.array() - 1.0).abs().maxCoeff());
  if (dev > tolerance) {
    std::ostringstream os;
    os << "weight matrix row/column sums deviate from 1 by " << dev;
    invalid(os.str());
  }
}

BistochasticMatrix::BistochasticMatrix(RealMatrix entries, double tolerance)
    : entries_(std::move(entries)), tolerance_(tolerance) {
  validate(entries_, tolerance_);
  entries_ = entries_.cwiseMax(0.0);
}

BistochasticMatrix BistochasticMatrix::identity(std::size_t n) {
  const auto k = static_cast<Eigen::Index>(n);
  return BistochasticMatrix(RealMatrix::Identity(k, k));
}

// ------------------------------------------------------------- Permutation

Permutation::Permutation(std::vector<int> mapping) : mapping_(std::move(mapping)) {
  std::vector<char> seen(mapping_.size(), 0);
  for (int v : mapping_) {
    if (v < 0 || static_cast<std::size_t>(v) >= mapping_.size() || seen[static_cast<std::size_t>(v)])
      invalid("permutation image is not {0..n-1}");
    seen[static_cast<std::size_t>(v)] = 1;
  }
}

Permutation Permutation::identity(std::size_t n) {
  std::vector<int> m(n);
  std::iota(m.begin(), m.end(), 0);
  return Permutation(std::move(m));
}

Permutation Permutation::transposition(std::size_t n, int i, int j) {
  std::vector<int> m(n);
  std::iota(m.begin(), m.end(), 0);
  std::swap(m.at(static_cast<std::size_t>(i)), m.at(static_cast<std::size_t>(j)));
  return Permutation(std::move(m));
}

bool Permutation::is_identity() const {
  for (std::size_t j = 0; j < mapping_.size(); ++j)
    if (mapping_[j] != static_cast<int>(j)) return false;
  return true;
}

Permutation Permutation::inverse() const {
  std::vector<int> inv(mapping_.size());
  for (std::size_t j = 0; j < mapping_.size(); ++j) inv[static_cast<std::size_t>(mapping_[j])] = static_cast<int>(j);
  return Permutation(std::move(inv));
}

Permutation Permutation::then(const Permutation& other) const {
  if (other.size() != size()) throw Error(ErrorCode::DimensionMismatch, "permutation sizes differ");
  std::vector<int> out(mapping_.size());
  for (std::size_t j = 0; j < mapping_.size(); ++j) out[j] = other(static_cast<std::size_t>(mapping_[j]));
  return Permutation(std::move(out));
}

RealMatrix Permutation::weight_matrix() const {
  const auto n = static_cast<Eigen::Index>(size());
  RealMatrix w = RealMatrix::Zero(n, n);
  for (std::size_t j = 0; j < size(); ++j) w(static_cast<Eigen::Index>(j), mapping_[j]) = 1.0;
  return w;
}

// ------------------------------------------------------- SwitchingSchedule

SwitchingSchedule::SwitchingSchedule(std::vector<ScheduleSegment> segments, double total_time)
    : segments_(std::move(segments)), total_time_(total_time) {
  if (segments_.empty()) invalid("schedule has no segments");
  if (!(total_time_ > 0.0) || !std::isfinite(total_time_)) invalid("schedule total_time must be positive");
  const std::size_t n = segments_.front().perm.size();
  double sum = 0.0;
  for (const auto& seg : segments_) {
    if (seg.perm.size() != n) throw Error(ErrorCode::DimensionMismatch, "schedule permutations differ in size");
    if (!(seg.fraction > 0.0) || seg.fraction > 1.0) invalid("segment fraction outside (0,1]");
    sum += seg.fraction;
  }
  if (std::abs(sum - 1.0) > 1e-12) invalid("segment fractions do not sum to 1");
}

BistochasticMatrix SwitchingSchedule::weights() const {
  const auto n = static_cast<Eigen::Index>(dimension());
  RealMatrix w = RealMatrix::Zero(n, n);
  for (const auto& seg : segments_) w += seg.fraction * seg.perm.weight_matrix();
  return BistochasticMatrix(std::move(w));
}

// -------------------------------------------------------------- ProbeState

ProbeState::ProbeState(ComplexVector amplitudes) : amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.size() < 1) invalid("probe state is empty");
  if (!amplitudes_.allFinite()) invalid("probe amplitudes are not finite");
  if (std::abs(amplitudes_.squaredNorm() - 1.0) > 1e-12) invalid("probe state is not normalized");
}

ProbeState ProbeState::normalized(ComplexVector amplitudes) {
  const double norm = amplitudes.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) invalid("cannot normalize a zero probe");
  amplitudes /= norm;
  return ProbeState(std::move(amplitudes));
}

ProbeState ProbeState::uniform(std::size_t n) {
  const auto k = static_cast<Eigen::Index>(n);
  return ProbeState(ComplexVector::Constant(k, 1.0 / std::sqrt(static_cast<double>(n))));
}

// -------------------------------------------------------------- operations

double spectral_range(const Spectrum& s) { return s.max() - s.min(); }

TargetVector target_ratios(const Spectrum& s) {
  const double lo = s.min();
  const double range = s.max() - lo;
  if (!(range > 0.0)) throw Error(ErrorCode::DegenerateRange, "spectral range is zero; ratios undefined");
  std::vector<double> t(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) t[i] = (s[i] - lo) / range;
  // Pin the endpoints exactly; rounding can leave max at 1 - ulp.
  t[static_cast<std::size_t>(std::min_element(s.levels().begin(), s.levels().end()) - s.levels().begin())] = 0.0;
  t[static_cast<std::size_t>(std::max_element(s.levels().begin(), s.levels().end()) - s.levels().begin())] = 1.0;
  return TargetVector(std::move(t));
}

Spectrum apply_weights(const BistochasticMatrix& r, const Spectrum& s) {
  if (r.size() != s.size()) throw Error(ErrorCode::DimensionMismatch, "weights and spectrum sizes differ");
  const RealVector eff = r.entries() * s.as_vector();
  return Spectrum(std::vector<double>(eff.data(), eff.data() + eff.size()), s.label());
}

ProbeState simulate_schedule(const Spectrum& s, const SwitchingSchedule& schedule, double omega,
                             const ProbeState& probe) {
  const std::size_t n = s.size();
  if (schedule.dimension() != n || probe.size() != n)
    throw Error(ErrorCode::DimensionMismatch, "schedule, spectrum and probe sizes differ");
  const auto k = static_cast<Eigen::Index>(n);
  ComplexVector state = probe.amplitudes();
  for (const auto& seg : schedule.segments()) {
    // P|j> = |perm(j)>, so P^dag G P carries lambda[perm(j)] on level j.
    ComplexMatrix p = ComplexMatrix::Zero(k, k);
    for (std::size_t j = 0; j < n; ++j) p(seg.perm(j), static_cast<Eigen::Index>(j)) = 1.0;
    const double dt = seg.fraction * schedule.total_time();
    ComplexMatrix propagator = ComplexMatrix::Zero(k, k);
    for (Eigen::Index j = 0; j < k; ++j)
      propagator(j, j) = std::polar(1.0, -omega * dt * s[static_cast<std::size_t>(j)]);
    state = p.adjoint() * (propagator * (p * state));
  }
  return ProbeState::normalized(std::move(state));
}

BistochasticMatrix general_control_weights(std::span<const ComplexMatrix> unitaries,
                                           std::span<const double> durations) {
  if (unitaries.empty() || unitaries.size() != durations.size())
    throw Error(ErrorCode::DimensionMismatch, "need one duration per unitary");
  const Eigen::Index n = unitaries.front().rows();
  double total = 0.0;
  for (double d : durations) {
    if (!(d >= 0.0) || !std::isfinite(d)) invalid("durations must be nonnegative");
    total += d;
  }
  if (!(total > 0.0)) invalid("durations sum to zero");
  RealMatrix p = RealMatrix::Zero(n, n);
  for (std::size_t i = 0; i < unitaries.size(); ++i) {
    const auto& u = unitaries[i];
    if (u.rows() != n || u.cols() != n) throw Error(ErrorCode::DimensionMismatch, "unitaries differ in size");
    const double defect = (u.adjoint() * u - ComplexMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
    if (defect > 1e-10) throw Error(ErrorCode::NotUnitary, "control matrix is not unitary");
    p += (durations[i] / total) * u.cwiseAbs2();
  }
  return BistochasticMatrix(std::move(p));
}

double ratio_mismatch(const Spectrum& effective, const TargetVector& target) {
  if (effective.size() != target.size()) throw Error(ErrorCode::DimensionMismatch, "target size differs");
  const auto achieved = target_ratios(effective);
  double worst = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) worst = std::max(worst, std::abs(achieved[i] - target[i]));
  return worst;
}

}  // namespace spectralforge
