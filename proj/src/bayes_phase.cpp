#include "spectralforge/bayes_phase.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "spectralforge/errors.hpp"
#include "spectralforge/parallel.hpp"
#include "spectralforge/rng.hpp"

namespace spectralforge {

namespace {

using cd = std::complex<double>;
constexpr double kPi = std::numbers::pi;
constexpr double kGaussianTail = 1e-14;
constexpr int kMaxCutoff = 20000;
constexpr std::uint64_t kPhaseStream = 0x70687365;  // "phse"

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

double wrap_phase(double x) {
  double y = std::remainder(x, 2.0 * kPi);
  if (y <= -kPi) y += 2.0 * kPi;
  return y;
}

}  // namespace

PhasePrior PhasePrior::flat() { return PhasePrior{}; }

PhasePrior PhasePrior::delta(std::vector<DeltaPeak> peaks) {
  if (peaks.empty()) throw Error(ErrorCode::InvalidArgument, "delta prior needs at least one peak");
  double total = 0.0;
  for (auto& p : peaks) {
    if (!std::isfinite(p.w) || !std::isfinite(p.x) || p.w < 0.0)
      throw Error(ErrorCode::InvalidArgument, "delta peak weights must be finite and nonnegative");
    p.x = wrap_phase(p.x);
    total += p.w;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw Error(ErrorCode::InvalidArgument, "delta peak weights must sum to 1");
  PhasePrior prior;
  prior.kind_ = Kind::Delta;
  prior.peaks_ = std::move(peaks);
  return prior;
}

PhasePrior PhasePrior::fourier(std::vector<std::pair<int, cd>> coeffs) {
  std::map<int, cd> table;
  for (const auto& [k, v] : coeffs) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw Error(ErrorCode::InvalidArgument, "Fourier coefficients must be finite");
    if (!table.emplace(k, v).second)
      throw Error(ErrorCode::InvalidArgument, "duplicate Fourier coefficient index");
  }
  const auto zero = table.find(0);
  if (zero == table.end() || std::abs(zero->second - cd(1.0)) > 1e-12)
    throw Error(ErrorCode::InvalidArgument, "Fourier prior needs p_0 = 1");
  zero->second = 1.0;
  for (const auto& [k, v] : std::map<int, cd>(table)) {
    const auto partner = table.find(-k);
    if (partner == table.end()) {
      table.emplace(-k, std::conj(v));
    } else if (std::abs(partner->second - std::conj(v)) > 1e-12) {
      throw Error(ErrorCode::InvalidArgument, "Fourier coefficients must satisfy p_-k = conj(p_k)");
    }
  }
  PhasePrior prior;
  prior.kind_ = Kind::Fourier;
  prior.coeffs_.assign(table.begin(), table.end());
  return prior;
}

cd PhasePrior::coefficient(int k) const {
  switch (kind_) {
    case Kind::Flat:
      return k == 0 ? cd(1.0) : cd(0.0);
    case Kind::Delta: {
      cd sum = 0.0;
      for (const auto& p : peaks_) sum += p.w * std::polar(1.0, -k * p.x);
      return sum;
    }
    case Kind::Fourier: {
      const auto it = std::lower_bound(coeffs_.begin(), coeffs_.end(), k,
                                       [](const auto& e, int key) { return e.first < key; });
      return it != coeffs_.end() && it->first == k ? it->second : cd(0.0);
    }
  }
  return 0.0;
}

PhasePrior three_peak_prior() {
  return PhasePrior::delta({{0.34, 2.1}, {0.15, -2.5}, {0.51, -2.7}});
}

int wrapped_gaussian_cutoff(double variance, double t) {
  const double a = 0.5 * t * t * variance;
  std::vector<double> terms;
  for (int j = 1; j <= kMaxCutoff + 1; ++j) {
    terms.push_back(std::exp(-a * j * j));
    if (terms.back() < 1e-3 * kGaussianTail) break;
  }
  // Two-sided tail beyond K is 2 * sum_{j > K} terms[j - 1]; the part past
  // the last stored term is bounded by a geometric series.
  const double last = static_cast<double>(terms.size());
  double tail = std::exp(-a * (last + 1) * (last + 1)) / -std::expm1(-a * (2 * last + 3));
  int k = static_cast<int>(terms.size());
  while (k > 0 && 2.0 * (tail + terms[static_cast<std::size_t>(k - 1)]) < kGaussianTail)
    tail += terms[static_cast<std::size_t>(--k)];
  return std::min(k, kMaxCutoff);
}

PhasePrior wrap_gaussian_prior(double variance, double t) {
  if (!(variance > 0.0) || !(t > 0.0) || !std::isfinite(variance) || !std::isfinite(t))
    throw Error(ErrorCode::InvalidArgument, "variance and t must be positive");
  const int K = wrapped_gaussian_cutoff(variance, t);
  const double a = 0.5 * t * t * variance;
  std::vector<std::pair<int, cd>> coeffs;
  coeffs.reserve(2 * static_cast<std::size_t>(K) + 1);
  for (int k = -K; k <= K; ++k) coeffs.emplace_back(k, std::exp(-a * k * k));
  return PhasePrior::fourier(std::move(coeffs));
}

ComplexMatrix prior_kernel(const Spectrum& s, const PhasePrior& prior) {
  const auto n = static_cast<Eigen::Index>(s.size());
  ComplexMatrix k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double c = 1.0 - (s[i] - s[j]);
      cd sum = 0.0;
      switch (prior.kind()) {
        case PhasePrior::Kind::Flat:
          sum = sinc(kPi * c);
          break;
        case PhasePrior::Kind::Delta:
          for (const auto& p : prior.peaks()) sum += p.w * std::polar(1.0, p.x * c);
          break;
        case PhasePrior::Kind::Fourier:
          for (const auto& [m, v] : prior.coefficients()) sum += v * sinc(kPi * (m + c));
          break;
      }
      k(i, j) = sum;
    }
  }
  return k;
}

ComplexMatrix build_R01(const ProbeState& probe, const Spectrum& s, const PhasePrior& prior) {
  if (probe.size() != s.size())
    throw Error(ErrorCode::DimensionMismatch, "probe and spectrum sizes differ");
  const auto& c = probe.amplitudes();
  return 0.5 * (c * c.adjoint()).cwiseProduct(prior_kernel(s, prior));
}

ComplexMatrix optimal_measurement_unitary(const ComplexMatrix& r01) {
  Eigen::JacobiSVD<ComplexMatrix> svd(r01, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixV() * svd.matrixU().adjoint();
}

PhaseEstimationResult phase_cost(const ComplexMatrix& r01) {
  Eigen::JacobiSVD<ComplexMatrix> svd(r01, Eigen::ComputeFullU | Eigen::ComputeFullV);
  PhaseEstimationResult r;
  r.trace_norm = svd.singularValues().sum();
  r.cost = 4.0 * (0.5 - r.trace_norm);
  const ComplexMatrix u = svd.matrixV() * svd.matrixU().adjoint();
  // U is normal, so its Schur form is diagonal and the Schur vectors are
  // orthonormal eigenvectors.
  Eigen::ComplexSchur<ComplexMatrix> schur(u);
  const ComplexMatrix& z = schur.matrixU();
  for (Eigen::Index k = 0; k < u.rows(); ++k)
    r.measurement.push_back({-std::arg(schur.matrixT()(k, k)), z.col(k)});
  return r;
}

PhaseEstimationResult refine_phase_probe(const ProbeState& start, const ComplexMatrix& kernel,
                                         int max_iter, double tol) {
  auto r01 = [&](const ComplexVector& c) {
    return ComplexMatrix(0.5 * (c * c.adjoint()).cwiseProduct(kernel));
  };
  ComplexVector c = start.amplitudes();
  Eigen::JacobiSVD<ComplexMatrix> svd0(r01(c));
  double norm = svd0.singularValues().sum();
  PhaseEstimationResult out;
  out.history.push_back(norm);
  out.worst_decrease = -std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iter; ++it) {
    const ComplexMatrix u = optimal_measurement_unitary(r01(c));
    // Re tr(R01(c) U) = c^dagger H c with B_ji = K_ij U_ji / 2.
    const ComplexMatrix b = 0.5 * kernel.transpose().cwiseProduct(u);
    const ComplexMatrix h = 0.5 * (b + b.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
    const ComplexVector next = es.eigenvectors().col(h.rows() - 1).normalized();
    Eigen::JacobiSVD<ComplexMatrix> svd(r01(next));
    const double next_norm = svd.singularValues().sum();
    const double gain = next_norm - norm;
    out.worst_decrease = std::max(out.worst_decrease, -gain);
    out.history.push_back(next_norm);
    ++out.iterations;
    if (gain >= 0.0) {
      c = next;
      norm = next_norm;
    }
    if (gain < tol) {
      out.converged = true;
      break;
    }
  }
  auto eval = phase_cost(r01(c));
  eval.probe = ProbeState(c);
  eval.iterations = out.iterations;
  eval.converged = out.converged;
  eval.history = std::move(out.history);
  eval.worst_decrease = out.worst_decrease;
  return eval;
}

PhaseEstimationResult optimize_phase_probe(const Spectrum& s, const PhasePrior& prior,
                                           std::uint64_t seed, const PhaseOptions& options) {
  if (options.restarts < 1) throw Error(ErrorCode::InvalidArgument, "restarts must be >= 1");
  const ComplexMatrix kernel = prior_kernel(s, prior);
  std::vector<PhaseEstimationResult> runs(static_cast<std::size_t>(options.restarts));
  parallel_for(runs.size(), [&](std::size_t r) {
    Rng rng(split_seed(seed, kPhaseStream, r));
    ComplexVector c(static_cast<Eigen::Index>(s.size()));
    for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = rng.complex_normal();
    runs[r] = refine_phase_probe(ProbeState::normalized(c), kernel, options.max_iter, options.tol);
  });
  std::size_t win = 0;
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < runs.size(); ++r) {
    worst = std::max(worst, runs[r].worst_decrease);
    if (runs[r].trace_norm > runs[win].trace_norm) win = r;
  }
  auto result = std::move(runs[win]);
  result.restart_winner = static_cast<int>(win);
  result.worst_decrease = worst;
  return result;
}

double flat_linear_phase_cost(int n) {
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "n must be >= 2");
  return 2.0 * (1.0 - std::cos(kPi / (n + 1)));
}

FlatFrequencyMap flat_prior_frequency_map(int n, double W0, double delta) {
  if (n < 2 || !(W0 > 0.0) || !(delta > 0.0))
    throw Error(ErrorCode::InvalidArgument, "need n >= 2 and positive W0, delta");
  const double t = 2.0 * kPi * (n - 1) / (W0 * delta);
  // phi = omega t delta / (n - 1), so d phi / d omega = 2 pi / W0.
  const double jacobian = t * delta / (n - 1);
  const double cost = flat_linear_phase_cost(n);
  return {t, cost, cost / (jacobian * jacobian)};
}

}  // namespace spectralforge
