#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "spectralforge/core_spectra.hpp"

namespace spectralforge {

/// Zero-mean Gaussian prior on the frequency.
class GaussianPrior {
 public:
  explicit GaussianPrior(double variance);

  double variance() const noexcept { return variance_; }
  double stddev() const;

 private:
  double variance_;
};

/// Prior-averaged state Gamma and first moment eta.
struct EffectiveOperators {
  ComplexMatrix gamma;
  ComplexMatrix eta;
};

struct FreqEstimationResult {
  double bmse = 1.0;
  ProbeState probe{ComplexVector::Ones(1)};
  ComplexMatrix L;
  double qfi = 0.0;
  double tau = 0.0;
  int iterations = 0;
  int restart_winner = 0;
  bool converged = false;
  /// BMSE after each iteration of the winning restart (first entry is the
  /// random start).
  std::vector<double> history;
  /// Largest per-step BMSE increase seen over all restarts; <= 0 for a
  /// monotone run.
  double worst_increase = 0.0;
};

struct ProbeOptions {
  int restarts = 8;
  int max_iter = 500;
  double tol = 1e-10;
};

/// Unit prior variance, tau = t * Delta omega.
EffectiveOperators effective_operators(const ProbeState& probe, const Spectrum& s, double tau);

/// Physical units: interrogation time t and an arbitrary prior variance.
EffectiveOperators effective_operators(const ProbeState& probe, const Spectrum& s, double t,
                                       const GaussianPrior& prior);

/// Hermitian L with L Gamma + Gamma L = 2 eta on the support of Gamma.
ComplexMatrix solve_sylvester(const EffectiveOperators& ops);

/// prior_variance - tr(Gamma L^2).
double bmse(const EffectiveOperators& ops, const ComplexMatrix& L, double prior_variance = 1.0);

/// 2 t^2 sum |<a|G|b>|^2 (g_a - g_b)^2 / (g_a + g_b) over eigenpairs of gamma.
double qfi_effective(const ComplexMatrix& gamma, const Spectrum& generator, double t);

/// T = int p(w) e^{iwtG} (L^2 - 2 w L) e^{-iwtG}; BMSE(rho, L) = 1 + tr(rho T).
ComplexMatrix probe_update_operator(const ComplexMatrix& L, const Spectrum& s, double tau);

/// One evaluation at a fixed probe: L, BMSE and QFI.
FreqEstimationResult evaluate_probe(const ProbeState& probe, const Spectrum& s, double tau);

/// Iterative probe optimization from a single start.
FreqEstimationResult refine_probe(const ProbeState& start, const Spectrum& s, double tau,
                                  int max_iter = 500, double tol = 1e-10);

/// Best of `restarts` Haar-random starts, plus the optional warm start.
FreqEstimationResult optimize_probe(const Spectrum& s, double tau, std::uint64_t seed,
                                    const ProbeOptions& options = {},
                                    const ProbeState* warm_start = nullptr);

struct CurveRow {
  double tau;
  double bmse;
  double qfi;
  int restart_winner;
  int iters;
};

struct BmseCurve {
  std::vector<CurveRow> rows;
  std::vector<ProbeState> probes;
  double worst_increase = 0.0;
};

BmseCurve bmse_curve(const Spectrum& s, std::span<const double> tau_grid, std::uint64_t seed,
                     const ProbeOptions& options = {});

/// Grid scan followed by golden-section refinement around the best point.
struct MinBmse {
  double tau;
  double bmse;
  double worst_increase;
};
MinBmse min_bmse_over_tau(const Spectrum& s, std::uint64_t seed, const ProbeOptions& options = {},
                          int grid_points = 24);

}  // namespace spectralforge
