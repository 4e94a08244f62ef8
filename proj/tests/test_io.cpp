#include <doctest.h>

#include <cstdlib>
#include <filesystem>

#include "spectralforge/errors.hpp"
#include "spectralforge/io.hpp"
#include "test_util.hpp"

using namespace spectralforge;
using namespace sf_test;
namespace fs = std::filesystem;

TEST_CASE("doubles round-trip at 17 digits") {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double x = std::ldexp(rng.uniform(-1.0, 1.0), static_cast<int>(rng.index(200)) - 100);
    CHECK(std::strtod(io::format_double(x).c_str(), nullptr) == x);
  }
  CHECK(io::format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("FNV-1a reference values") {
  CHECK(io::hex64(io::fnv1a64("")) == "cbf29ce484222325");
  CHECK(io::hex64(io::fnv1a64("a")) == "af63dc4c8601ec8c");
}

TEST_CASE("JSON round trips") {
  Rng rng(2);
  SUBCASE("spectrum and target") {
    const Spectrum s({0.1, 2.0 / 3.0, -5.0}, "abc");
    const auto back = io::spectrum_from_json(io::parse_json(io::dump_json(io::to_json(s))));
    CHECK(back.levels() == s.levels());
    CHECK(back.label() == "abc");
    const TargetVector t({0.0, 1.0 / 3.0, 1.0});
    CHECK(io::target_from_json(io::parse_json(io::dump_json(io::to_json(t)))).ratios() == t.ratios());
  }
  SUBCASE("weights and schedule") {
    const auto r = random_bistochastic(4, rng);
    const auto back = io::weights_from_json(io::parse_json(io::dump_json(io::to_json(r))));
    CHECK(back.entries() == r.entries());
    const SwitchingSchedule sched({{0.25, Permutation({1, 0, 2})}, {0.75, Permutation::identity(3)}}, 2.0);
    const auto sb = io::schedule_from_json(io::parse_json(io::dump_json(io::to_json(sched))));
    CHECK(sb.total_time() == 2.0);
    CHECK(sb.segments()[0].perm == sched.segments()[0].perm);
    CHECK(sb.segments()[1].fraction == 0.75);
  }
  SUBCASE("priors") {
    const auto d = io::prior_from_json(io::to_json(three_peak_prior()));
    CHECK(d.kind() == PhasePrior::Kind::Delta);
    CHECK(d.peaks()[2].x == -2.7);
    CHECK(io::prior_from_json(io::parse_json(R"({"type":"flat"})")).kind() == PhasePrior::Kind::Flat);
    const auto f = io::prior_from_json(io::parse_json(R"({"type":"fourier","coeffs":[[0,1,0],[1,0.5,0.25]]})"));
    CHECK(f.coefficient(-1) == std::complex<double>(0.5, -0.25));
  }
  SUBCASE("probe") {
    const auto p = random_probe(3, rng);
    const auto back = io::probe_from_json(io::parse_json(io::dump_json(io::to_json(p))));
    CHECK((back.amplitudes() - p.amplitudes()).norm() <= 1e-15);
    CHECK(io::probe_from_json(io::parse_json(R"({"amplitudes":[1,1]})"))[0].real() == doctest::Approx(std::sqrt(0.5)));
  }
}

TEST_CASE("malformed inputs raise ParseError") {
  auto code = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  CHECK(code([] { io::parse_json("{"); }) == ErrorCode::ParseError);
  CHECK(code([] { io::spectrum_from_json(io::parse_json("{}")); }) == ErrorCode::ParseError);
  CHECK(code([] { io::spectrum_from_json(io::parse_json(R"({"levels":"x"})")); }) == ErrorCode::ParseError);
  CHECK(code([] { io::prior_from_json(io::parse_json(R"({"type":"gauss"})")); }) == ErrorCode::ParseError);
  CHECK(code([] { io::read_text("/nonexistent/file.json"); }) == ErrorCode::ParseError);
}

TEST_CASE("atomic write and manifest") {
  const auto dir = fs::temp_directory_path() / "spectralforge_test_io";
  fs::remove_all(dir);
  const auto path = dir / "sub" / "out.csv";
  io::write_text_atomic(path, "a,b\n1,2\n");
  CHECK(io::read_text(path) == "a,b\n1,2\n");
  CHECK(!fs::exists(dir / "sub" / "out.csv.tmp"));
  io::RunManifest m;
  m.seed = 42;
  m.add_output(path);
  const auto j = m.to_json();
  CHECK(j["outputs"][0]["fnv1a64"] == io::hex64(io::fnv1a64("a,b\n1,2\n")));
  CHECK(j["seed"] == 42);
}

TEST_CASE("CSV table") {
  io::CsvTable t({"n", "cost"});
  t.row({"2", "1"});
  CHECK(t.str() == "n,cost\n2,1\n");
  CHECK_THROWS_AS(t.row({"1"}), std::logic_error);
}
