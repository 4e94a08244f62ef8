#pragma once

#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

#include "spectralforge/core_spectra.hpp"

namespace spectralforge {

struct DeltaPeak {
  double w;
  double x;
};

/// Prior on a phase in (-pi, pi], p(phi) = (1/2pi) sum_k p_k e^{ik phi}.
class PhasePrior {
 public:
  enum class Kind { Flat, Delta, Fourier };

  static PhasePrior flat();
  /// Weights must be nonnegative and sum to one; locations are wrapped
  /// into (-pi, pi].
  static PhasePrior delta(std::vector<DeltaPeak> peaks);
  /// Coefficients (k, p_k). Missing negative partners are filled in as
  /// conjugates; p_0 must be 1.
  static PhasePrior fourier(std::vector<std::pair<int, std::complex<double>>> coeffs);

  Kind kind() const noexcept { return kind_; }
  const std::vector<DeltaPeak>& peaks() const noexcept { return peaks_; }
  /// Sorted by k, both signs present.
  const std::vector<std::pair<int, std::complex<double>>>& coefficients() const noexcept {
    return coeffs_;
  }

  /// p_k = int p(phi) e^{-ik phi} dphi.
  std::complex<double> coefficient(int k) const;

 private:
  Kind kind_ = Kind::Flat;
  std::vector<DeltaPeak> peaks_;
  std::vector<std::pair<int, std::complex<double>>> coeffs_;
};

/// Three-peak benchmark prior.
PhasePrior three_peak_prior();

/// Wrapped Gaussian for phase omega * t with omega ~ N(0, variance).
PhasePrior wrap_gaussian_prior(double variance, double t);

/// Truncation used by wrap_gaussian_prior.
int wrapped_gaussian_cutoff(double variance, double t);

/// K_ij = int p(phi) e^{i phi (1 - (lambda_i - lambda_j))} dphi.
ComplexMatrix prior_kernel(const Spectrum& s, const PhasePrior& prior);

/// (R01)_ij = rho_ij K_ij / 2.
ComplexMatrix build_R01(const ProbeState& probe, const Spectrum& s, const PhasePrior& prior);

struct PhaseMeasurement {
  double phase;
  ComplexVector vector;
};

struct PhaseEstimationResult {
  double cost = 2.0;
  double trace_norm = 0.0;
  ProbeState probe{ComplexVector::Ones(1)};
  std::vector<PhaseMeasurement> measurement;
  int iterations = 0;
  int restart_winner = 0;
  bool converged = false;
  std::vector<double> history;
  /// Largest per-step decrease of the trace norm; <= 0 for a monotone run.
  double worst_decrease = 0.0;
};

/// Cost 4(1/2 - ||R01||_1) and the measurement from U = V_R U_R^dagger.
PhaseEstimationResult phase_cost(const ComplexMatrix& r01);

/// Unitary U = V_R U_R^dagger maximizing Re tr(R01 U).
ComplexMatrix optimal_measurement_unitary(const ComplexMatrix& r01);

struct PhaseOptions {
  int restarts = 8;
  int max_iter = 20000;
  double tol = 1e-15;
};

PhaseEstimationResult refine_phase_probe(const ProbeState& start, const ComplexMatrix& kernel,
                                         int max_iter, double tol);

PhaseEstimationResult optimize_phase_probe(const Spectrum& s, const PhasePrior& prior,
                                           std::uint64_t seed, const PhaseOptions& options = {});

/// 2 (1 - cos(pi / (n + 1))).
double flat_linear_phase_cost(int n);

struct FlatFrequencyMap {
  double t_opt;
  double phase_cost;
  double bmse;
};

/// Flat frequency prior on [0, W0], rescaled linear generator with range
/// delta.
FlatFrequencyMap flat_prior_frequency_map(int n, double W0, double delta);

}  // namespace spectralforge
