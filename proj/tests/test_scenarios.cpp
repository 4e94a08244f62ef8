#include <doctest.h>

#include <filesystem>

#include "spectralforge/errors.hpp"
#include "spectralforge/io.hpp"
#include "spectralforge/scenarios.hpp"
#include "test_util.hpp"

using namespace spectralforge;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("spectralforge_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("degenerate qubit spectra") {
  CHECK(degenerate_qubit_spectrum(1).levels() == std::vector<double>{-1, 1});
  CHECK(degenerate_qubit_spectrum(2).levels() == std::vector<double>{-2, 0, 0, 2});
  CHECK(degenerate_qubit_spectrum(3).levels() == std::vector<double>{-3, -1, -1, -1, 1, 1, 1, 3});
  CHECK(degenerate_qubit_spectrum(5).size() == 32);
}

TEST_CASE("linear spectra") {
  CHECK(linear_spectrum(2).levels() == std::vector<double>{0, 1});
  CHECK(linear_spectrum(5).levels() == std::vector<double>{0, 1, 2, 3, 4});
  const auto t = target_ratios(linear_spectrum(5));
  for (int i = 0; i < 5; ++i) CHECK(t[i] == doctest::Approx(i / 4.0));
}

TEST_CASE("ancilla augmentation") {
  const Spectrum q({-1.0, 1.0});
  CHECK(augment_with_ancilla(q, 1).levels() == q.levels());
  CHECK(augment_with_ancilla(q, 2).levels() == std::vector<double>{-1, -1, 1, 1});
  const auto aug = augment_with_ancilla(linear_spectrum(5), 2);
  CHECK(aug.size() == 10);
  CHECK(spectral_range(aug) == 4.0);
  std::vector<double> t(10);
  for (int i = 0; i < 10; ++i) t[i] = i / 9.0;
  const auto r = adapt_to_target(aug, TargetVector(t));
  CHECK(std::abs(r.design.achieved_range - 4.0) <= 1e-9);
  CHECK((r.schedule.weights().entries() - r.design.weights.entries()).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK_THROWS_AS(augment_with_ancilla(q, 0), Error);
}

TEST_CASE("level tables") {
  SUBCASE("plain values") {
    const auto l = parse_levels("label,energy,unit\na,0,cm-1\nb,10,cm-1\nc,30,cm-1\n", LevelNormalization::None);
    CHECK(l.spectrum.levels() == std::vector<double>{0, 10, 30});
    CHECK(l.rows[2].label == "c");
  }
  SUBCASE("shift and scale keep target ratios and record the map") {
    const std::string text = "# comment\nx,120.5,cm-1\ny,100,cm-1\nz,180,cm-1\nw,150,cm-1\n";
    const auto raw = parse_levels(text, LevelNormalization::None);
    const auto norm = parse_levels(text, LevelNormalization::ShiftScale);
    CHECK(norm.spectrum.min() == 0.0);
    CHECK(spectral_range(norm.spectrum) == doctest::Approx(3.0));
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(target_ratios(norm.spectrum)[i] == doctest::Approx(target_ratios(raw.spectrum)[i]).epsilon(1e-14));
      CHECK(norm.offset + norm.scale * norm.spectrum[i] == doctest::Approx(raw.spectrum[i]));
    }
  }
  SUBCASE("errors") {
    auto code = [](const std::string& text) {
      try {
        parse_levels(text, LevelNormalization::None);
      } catch (const Error& e) {
        return e.code();
      }
      return ErrorCode::InvalidArgument;
    };
    CHECK(code("a,1,cm-1\n") == ErrorCode::TooFewLevels);
    CHECK(code("a,1,cm-1\nb,x,cm-1\n") == ErrorCode::ParseError);
    CHECK(code("a,1,cm-1\nb,2\n") == ErrorCode::ParseError);
    CHECK(code("a,1,cm-1\nb,2,dimensionless\n") == ErrorCode::ParseError);
    CHECK(code("a,1,eV\nb,2,eV\n") == ErrorCode::ParseError);
  }
}

TEST_CASE("target from interior ratios") {
  const Spectrum base({2.0, -1.0, 5.0, 0.0});
  const auto t = target_from_interior(base, {0.9, 0.2});
  CHECK(t.ratios() == std::vector<double>{0.9, 0.0, 1.0, 0.2});
  CHECK_THROWS_AS(target_from_interior(base, {0.5}), Error);
}

TEST_CASE("optimized degenerate spectrum beats the degenerate one") {
  const auto r = optimize_target_spectrum(degenerate_qubit_spectrum(2), MinBmseObjective{}, {20, 2}, 5);
  CHECK(r.objective < 0.95 * r.baseline);
  CHECK(ratio_mismatch(r.design.effective, r.target) <= 1e-7);
  CHECK((r.schedule.weights().entries() - r.design.weights.entries()).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("linear spectrum is close to optimal for a Gaussian prior") {
  const auto r = optimize_target_spectrum(linear_spectrum(3), MinBmseObjective{}, {16, 2}, 6);
  CHECK(r.objective <= r.baseline + 1e-12);
  CHECK((r.baseline - r.objective) / r.baseline < 0.015);
}

TEST_CASE("three-peak prior rewards spectral design") {
  const auto r = optimize_target_spectrum(linear_spectrum(3), PhaseCostObjective{three_peak_prior()}, {30, 2}, 7);
  CHECK(r.objective < 0.9 * r.baseline);
}

TEST_CASE("search is deterministic") {
  const PhaseCostObjective obj{three_peak_prior()};
  const auto a = optimize_target_spectrum(linear_spectrum(3), obj, {12, 2}, 9);
  const auto b = optimize_target_spectrum(linear_spectrum(3), obj, {12, 2}, 9);
  CHECK(a.objective == b.objective);
  CHECK(a.target.ratios() == b.target.ratios());
}

TEST_CASE("figure reproduction") {
  SUBCASE("unknown id") {
    try {
      reproduce_figure("fig99", scratch_dir("unknown"), 1);
      FAIL("expected UnknownFigure");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::UnknownFigure);
    }
  }
  SUBCASE("figA is idempotent") {
    FigureOptions o;
    o.study_samples = 20;
    const auto d1 = scratch_dir("figA1");
    const auto d2 = scratch_dir("figA2");
    const auto f1 = reproduce_figure("figA", d1, 3, o);
    reproduce_figure("figA", d2, 3, o);
    CHECK(io::read_text(d1 / "figA.csv") == io::read_text(d2 / "figA.csv"));
    CHECK(fs::exists(d1 / "figA_manifest.json"));
    const auto m = io::read_json(d1 / "figA_manifest.json");
    CHECK(m["seed"] == 3);
    CHECK(m["outputs"].size() == 1);
  }
  SUBCASE("fig6 needs a level table") {
    CHECK_THROWS_AS(reproduce_figure("fig6", scratch_dir("fig6none"), 1), Error);
    const auto dir = scratch_dir("fig6");
    io::write_text_atomic(dir / "levels.csv", "label,energy,unit\na,0,cm-1\nb,3,cm-1\nc,4,cm-1\n");
    FigureOptions o;
    o.levels_file = dir / "levels.csv";
    o.budget = 6;
    const auto files = reproduce_figure("fig6", dir / "out", 2, o);
    CHECK(files.size() == 4);
    const auto m = io::read_json(dir / "out" / "fig6_manifest.json");
    CHECK(m["inputs"].size() == 1);
    CHECK(m["details"]["levels_scale"].get<double>() == doctest::Approx(2.0));
  }
}
