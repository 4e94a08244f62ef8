#include <doctest.h>

#include "spectralforge/design_lp.hpp"
#include "spectralforge/errors.hpp"
#include "spectralforge/schedule_synth.hpp"
#include "test_util.hpp"

using namespace spectralforge;
using namespace sf_test;

TEST_CASE("Birkhoff of a permutation matrix is a single term") {
  const Permutation p({2, 0, 3, 1});
  const auto d = birkhoff_decompose(BistochasticMatrix(p.weight_matrix()));
  REQUIRE(d.terms.size() == 1);
  CHECK(d.terms[0].weight == 1.0);
  CHECK(d.terms[0].perm == p);
}

TEST_CASE("Birkhoff of the 2x2 averaging matrix") {
  RealMatrix half = RealMatrix::Constant(2, 2, 0.5);
  const auto d = birkhoff_decompose(BistochasticMatrix(half));
  REQUIRE(d.terms.size() == 2);
  CHECK(d.terms[0].weight == doctest::Approx(0.5));
  CHECK(d.terms[0].perm.is_identity());
  CHECK(d.terms[1].perm == Permutation({1, 0}));
}

TEST_CASE("Birkhoff round trip on a mixture of five permutations") {
  Rng rng(31);
  const auto r = random_bistochastic(6, rng, 5);
  const auto d = birkhoff_decompose(r);
  CHECK(d.terms.size() <= max_birkhoff_terms(6));
  CHECK(max_birkhoff_terms(6) == 26);
  CHECK((d.reconstruct() - r.entries()).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(d.total_weight() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("Birkhoff bounds hold on random dense matrices") {
  Rng rng(32);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.index(7);
    const auto r = random_bistochastic(n, rng);
    const auto d = birkhoff_decompose(r);
    CHECK(d.terms.size() <= max_birkhoff_terms(n));
    CHECK((d.reconstruct() - r.entries()).cwiseAbs().maxCoeff() <= 1e-10);
    for (const auto& term : d.terms) CHECK(term.weight > 0.0);
    CHECK(switch_count(build_schedule(d, 1.0)) <= max_schedule_switches(n));
  }
}

TEST_CASE("Birkhoff tolerates sums off by the validation tolerance") {
  RealMatrix m(2, 2);
  m << 0.5 + 4e-10, 0.5, 0.5, 0.5;
  const auto d = birkhoff_decompose(BistochasticMatrix(m));
  CHECK((d.reconstruct() - m).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(d.total_weight() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("permutation_to_transpositions") {
  CHECK(permutation_to_transpositions(Permutation::identity(4)).empty());
  CHECK(permutation_to_transpositions(Permutation({1, 0, 2, 3})) == std::vector<Swap>{{0, 1}});
  const Permutation cycle({1, 2, 0});
  const auto swaps = permutation_to_transpositions(cycle);
  CHECK(swaps.size() == 2);
  CHECK(compose_transpositions(3, swaps) == cycle);

  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.index(9);
    const auto p = random_permutation(n, rng);
    const auto s = permutation_to_transpositions(p);
    CHECK(s.size() <= n - 1);
    CHECK(compose_transpositions(n, s) == p);
  }
}

TEST_CASE("build_schedule orders by weight and reproduces midpoints") {
  RealMatrix half = RealMatrix::Constant(2, 2, 0.5);
  const auto sched = build_schedule(birkhoff_decompose(BistochasticMatrix(half)), 2.0);
  REQUIRE(sched.segments().size() == 2);
  CHECK(sched.segments()[0].perm.is_identity());
  CHECK(sched.segments()[0].fraction == doctest::Approx(0.5));
  const Spectrum s({0, 1});
  const auto probe = ProbeState::uniform(2);
  const auto out = simulate_schedule(s, sched, 1.0, probe);
  CHECK(phase_mismatch(probe, out, RealVector::Constant(2, 2.0 * 0.5)) < 1e-12);

  const auto single = build_schedule(birkhoff_decompose(BistochasticMatrix::identity(3)), 1.0);
  REQUIRE(single.segments().size() == 1);
  CHECK(single.segments()[0].fraction == 1.0);

  Rng rng(5);
  const auto d = birkhoff_decompose(random_bistochastic(5, rng));
  const auto segs = build_schedule(d, 1.0).segments();
  for (std::size_t i = 1; i < segs.size(); ++i) CHECK(segs[i - 1].fraction >= segs[i].fraction);
}

TEST_CASE("compiled schedules reproduce R lambda through the simulator") {
  Rng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.index(7);
    const auto r = random_bistochastic(n, rng, 1 + rng.index(n * n));
    const auto s = random_spectrum(n, rng);
    const double t = 0.5 + rng.uniform();
    const double omega = rng.uniform(-2, 2);
    const auto sched = build_schedule(birkhoff_decompose(r), t);
    const auto probe = random_probe(n, rng);
    const RealVector phases = omega * t * apply_weights(r, s).as_vector();
    CHECK(phase_mismatch(probe, simulate_schedule(s, sched, omega, probe), phases) <= 1e-10);
  }
}

TEST_CASE("minimal design with the spectrum's own ratios uses only the identity") {
  const Spectrum s({0, 1, 2});
  const auto d = minimal_switch_design(s, target_ratios(s), 1, 8, 1);
  CHECK(d.active_swaps() == 0);
  CHECK(d.weights[0] == doctest::Approx(1.0));
  CHECK(d.achieved_range == doctest::Approx(2.0));
}

TEST_CASE("single-swap design for (0,1,2) -> (0,1,1)") {
  // Enumerating the three swaps by hand: (0 1) is infeasible, (0 2) has zero
  // range, (1 2) with r = (1/2, 1/2) gives (0, 3/2, 3/2).
  const Spectrum s({0, 1, 2});
  const TargetVector t({0, 1, 1});
  CHECK_FALSE(solve_chain(s, t, {{0, 1}}).has_value());
  CHECK_FALSE(solve_chain(s, t, {{0, 2}}).has_value());
  const auto best = solve_chain(s, t, {{1, 2}});
  REQUIRE(best.has_value());
  CHECK(best->achieved_range == doctest::Approx(1.5));

  const auto exhaustive = minimal_switch_design_exhaustive(s, t, 1);
  CHECK(exhaustive.chain == std::vector<Swap>{{1, 2}});
  const auto sampled = minimal_switch_design(s, t, 1, 16, 3);
  CHECK(sampled.achieved_range == doctest::Approx(1.5));
  CHECK(ratio_mismatch(apply_weights(sampled.implied_weights(), s), t) < 1e-7);
}

TEST_CASE("minimal designs are valid and never beat the full LP") {
  Rng rng(9);
  int feasible = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 3 + rng.index(3);
    const auto s = sample_study_spectrum(static_cast<int>(n), rng);
    const auto t = sample_study_target(static_cast<int>(n), rng);
    try {
      const auto d = minimal_switch_design(s, t, static_cast<int>(n), 64, trial);
      ++feasible;
      CHECK(d.chain.size() == n);
      CHECK(ratio_mismatch(d.effective, t) < 1e-7);
      CHECK(d.achieved_range <= lp_max_range_design(s, t).achieved_range + 1e-8);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NoFeasibleChain);
    }
  }
  CHECK(feasible > 30);
}

TEST_CASE("minimal design preconditions") {
  const Spectrum s({0, 1, 2, 3});
  CHECK_THROWS_AS(minimal_switch_design(s, target_ratios(s), 1, 4, 0), Error);
  CHECK_THROWS_AS(minimal_switch_design_exhaustive(Spectrum({0, 1, 2, 3, 4}), target_ratios(Spectrum({0, 1, 2, 3, 4})), 3),
                  Error);
}
