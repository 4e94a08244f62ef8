#include <doctest.h>

#include "spectralforge/core_spectra.hpp"
#include "spectralforge/errors.hpp"
#include "test_util.hpp"

using namespace spectralforge;
using namespace sf_test;

TEST_CASE("spectral_range") {
  CHECK(spectral_range(Spectrum({0, 1, 2, 3})) == 3.0);
  CHECK(spectral_range(Spectrum({5, 5, 5})) == 0.0);
  CHECK(spectral_range(Spectrum({-2, 0, 0, 2})) == 4.0);
}

TEST_CASE("target_ratios") {
  auto t = target_ratios(Spectrum({0, 1, 2, 3}));
  CHECK(t[0] == 0.0);
  CHECK(t[1] == doctest::Approx(1.0 / 3));
  CHECK(t[2] == doctest::Approx(2.0 / 3));
  CHECK(t[3] == 1.0);
  CHECK(target_ratios(Spectrum({-1, 1})).ratios() == std::vector<double>{0, 1});
  CHECK(target_ratios(Spectrum({0, 0, 0, 3})).ratios() == std::vector<double>{0, 0, 0, 1});

  try {
    target_ratios(Spectrum({2, 2}));
    FAIL("expected DegenerateRange");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateRange);
  }
}

TEST_CASE("type invariants are enforced") {
  CHECK_THROWS_AS(Spectrum({1.0}), Error);
  CHECK_THROWS_AS(Spectrum({0.0, std::nan("")}), Error);
  CHECK_THROWS_AS(TargetVector({0.2, 1.0}), Error);
  CHECK_THROWS_AS(TargetVector({0.0, 1.5}), Error);
  CHECK_THROWS_AS(Permutation({0, 0, 1}), Error);
  CHECK_THROWS_AS(ProbeState(ComplexVector::Ones(2)), Error);

  RealMatrix bad(2, 2);
  bad << 1.1, -0.1, -0.1, 1.1;
  CHECK_THROWS_AS(BistochasticMatrix{bad}, Error);
  bad << 0.5, 0.5, 0.5, 0.6;
  CHECK_THROWS_AS(BistochasticMatrix{bad}, Error);
  RealMatrix tiny(2, 2);
  tiny << 1.0 + 1e-10, -1e-10, -1e-10, 1.0 + 1e-10;
  const BistochasticMatrix clamped(tiny);
  CHECK(clamped(0, 1) == 0.0);

  CHECK_THROWS_AS(SwitchingSchedule({{0.5, Permutation::identity(2)}}, 1.0), Error);
  CHECK_THROWS_AS(SwitchingSchedule({{1.0, Permutation::identity(2)}}, 0.0), Error);
}

TEST_CASE("permutation algebra") {
  const Permutation p({1, 2, 0});
  CHECK(p.then(p.inverse()).is_identity());
  CHECK((p.weight_matrix() * p.inverse().weight_matrix()).isIdentity());
  // W(a) W(b) = W(a then b)
  const Permutation q({0, 2, 1});
  CHECK((p.weight_matrix() * q.weight_matrix()).isApprox(p.then(q).weight_matrix()));
}

TEST_CASE("apply_weights examples") {
  const Spectrum s({0.3, -1.2, 2.0});
  CHECK(apply_weights(BistochasticMatrix::identity(3), s).levels() == s.levels());

  RealMatrix half(2, 2);
  half << 0.5, 0.5, 0.5, 0.5;
  const auto mid = apply_weights(BistochasticMatrix(half), Spectrum({0, 1}));
  CHECK(mid[0] == doctest::Approx(0.5));
  CHECK(mid[1] == doctest::Approx(0.5));

  const auto flat = apply_weights(BistochasticMatrix(RealMatrix::Constant(3, 3, 1.0 / 3)), Spectrum({0, 0, 3}));
  for (double v : flat.levels()) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));

  CHECK_THROWS_AS(apply_weights(BistochasticMatrix::identity(2), s), Error);
}

TEST_CASE("apply_weights preserves the level sum and shrinks the range") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.index(7);
    const auto s = random_spectrum(n, rng);
    const auto r = random_bistochastic(n, rng, 1 + rng.index(n * n));
    const auto eff = apply_weights(r, s);
    const double before = s.as_vector().sum();
    CHECK(std::abs(eff.as_vector().sum() - before) <= 1e-12 * std::max(1.0, std::abs(before)) + 1e-12);
    CHECK(spectral_range(eff) <= spectral_range(s) + 1e-12);
    CHECK(eff.min() >= s.min() - 1e-12);
    CHECK(eff.max() <= s.max() + 1e-12);
  }
}

TEST_CASE("simulate_schedule: free evolution") {
  Rng rng(3);
  const Spectrum s({0.0, 0.7, 2.5, -1.0});
  const auto probe = random_probe(4, rng);
  const SwitchingSchedule sched({{1.0, Permutation::identity(4)}}, 1.3);
  const double omega = 0.9;
  const auto out = simulate_schedule(s, sched, omega, probe);
  CHECK(phase_mismatch(probe, out, omega * 1.3 * s.as_vector()) < 1e-12);
}

TEST_CASE("simulate_schedule: single switch gives convex midpoints") {
  const double li = 0.4, lj = 2.2, r0 = 0.3, t = 2.0, omega = 1.7;
  const Spectrum s({li, lj});
  const SwitchingSchedule sched({{r0, Permutation::identity(2)}, {1 - r0, Permutation({1, 0})}}, t);
  const auto probe = ProbeState::uniform(2);
  const auto out = simulate_schedule(s, sched, omega, probe);
  RealVector phases(2);
  phases << omega * t * (r0 * li + (1 - r0) * lj), omega * t * (r0 * lj + (1 - r0) * li);
  CHECK(phase_mismatch(probe, out, phases) < 1e-12);
}

TEST_CASE("simulate_schedule matches the schedule's weights on random inputs") {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.index(5);
    std::vector<ScheduleSegment> segs;
    const std::size_t k = 1 + rng.index(5);
    std::vector<double> w(k);
    double total = 0.0;
    for (auto& x : w) total += (x = 0.1 + rng.uniform());
    for (std::size_t i = 0; i < k; ++i) segs.push_back({w[i] / total, random_permutation(n, rng)});
    double sum = 0.0;
    for (auto& seg : segs) sum += seg.fraction;
    segs.back().fraction += 1.0 - sum;
    const SwitchingSchedule sched(segs, 0.5 + rng.uniform());
    const auto s = random_spectrum(n, rng);
    const auto probe = random_probe(n, rng);
    const double omega = rng.uniform(-2, 2);
    const auto out = simulate_schedule(s, sched, omega, probe);
    const RealVector phases = omega * sched.total_time() * (sched.weights().entries() * s.as_vector());
    CHECK(phase_mismatch(probe, out, phases) < 1e-10);
  }
}

TEST_CASE("general_control_weights") {
  const ComplexMatrix id = ComplexMatrix::Identity(3, 3);
  const std::vector<double> one{1.0};
  CHECK(general_control_weights(std::span(&id, 1), one).entries().isIdentity());

  const Permutation p({2, 0, 1});
  const ComplexMatrix pm = p.weight_matrix().cast<std::complex<double>>();
  CHECK(general_control_weights(std::span(&pm, 1), one).entries() == p.weight_matrix());

  Rng rng(17);
  std::vector<ComplexMatrix> us;
  std::vector<double> durations;
  for (int i = 0; i < 10; ++i) {
    us.push_back(haar_unitary(4, rng));
    durations.push_back(rng.uniform());
  }
  const auto w = general_control_weights(us, durations);
  CHECK((w.entries().rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-10);
  CHECK((w.entries().colwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-10);
  CHECK(w.entries().minCoeff() >= 0.0);

  ComplexMatrix not_unitary = ComplexMatrix::Identity(3, 3);
  not_unitary(0, 1) = 0.1;
  try {
    general_control_weights(std::span(&not_unitary, 1), one);
    FAIL("expected NotUnitary");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotUnitary);
  }
}
