#include "spectralforge/scenarios.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include "spectralforge/errors.hpp"
#include "spectralforge/io.hpp"
#include "spectralforge/parallel.hpp"
#include "spectralforge/rng.hpp"

namespace spectralforge {

namespace {

constexpr std::uint64_t kSearchStream = 0x73726368;  // "srch"
constexpr std::uint64_t kInnerStream = 0x696e6e72;   // "innr"

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double squash(double x) {
  const double s = std::sin(x);
  return s * s;
}

std::vector<double> tau_grid(double tau_max, int points) {
  std::vector<double> g(static_cast<std::size_t>(points) + 1);
  for (int k = 0; k <= points; ++k) g[static_cast<std::size_t>(k)] = tau_max * k / points;
  return g;
}

}  // namespace

Spectrum degenerate_qubit_spectrum(int m) {
  if (m < 1 || m > 20) throw Error(ErrorCode::InvalidArgument, "m must be in [1, 20]");
  std::vector<double> levels;
  levels.reserve(std::size_t{1} << m);
  for (unsigned b = 0; b < (1u << m); ++b) levels.push_back(2.0 * std::popcount(b) - m);
  std::sort(levels.begin(), levels.end());
  return Spectrum(std::move(levels), "degenerate_m" + std::to_string(m));
}

Spectrum linear_spectrum(int n) {
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "n must be >= 2");
  std::vector<double> levels(static_cast<std::size_t>(n));
  std::iota(levels.begin(), levels.end(), 0.0);
  return Spectrum(std::move(levels), "linear_n" + std::to_string(n));
}

Spectrum augment_with_ancilla(const Spectrum& s, int d_A) {
  if (d_A < 1) throw Error(ErrorCode::InvalidArgument, "d_A must be >= 1");
  std::vector<double> levels;
  levels.reserve(s.size() * static_cast<std::size_t>(d_A));
  for (double l : s.levels())
    for (int j = 0; j < d_A; ++j) levels.push_back(l);
  return Spectrum(std::move(levels), s.label() + "_dA" + std::to_string(d_A));
}

LoadedLevels parse_levels(const std::string& text, LevelNormalization normalization) {
  std::vector<LevelTableRow> rows;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split_csv(line);
    if (cells.size() != 3)
      throw Error(ErrorCode::ParseError, "levels line " + std::to_string(line_no) + ": expected label,energy,unit");
    if (rows.empty() && cells[0] == "label" && cells[1] == "energy") continue;
    double e = 0.0;
    try {
      std::size_t used = 0;
      e = std::stod(cells[1], &used);
      if (used != cells[1].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, "levels line " + std::to_string(line_no) + ": bad energy '" + cells[1] + "'");
    }
    if (!std::isfinite(e))
      throw Error(ErrorCode::ParseError, "levels line " + std::to_string(line_no) + ": energy is not finite");
    std::string unit = cells[2];
    if (unit == "cm-1" || unit == "cm^-1" || unit == "1/cm") unit = "cm-1";
    if (unit != "cm-1" && unit != "dimensionless")
      throw Error(ErrorCode::ParseError, "levels line " + std::to_string(line_no) + ": unknown unit '" + cells[2] + "'");
    if (!rows.empty() && rows.front().unit != unit)
      throw Error(ErrorCode::ParseError, "levels line " + std::to_string(line_no) + ": mixed units");
    rows.push_back({cells[0], e, unit});
  }
  if (rows.size() < 2) throw Error(ErrorCode::TooFewLevels, "level table needs at least 2 rows");
  std::vector<double> energies;
  for (const auto& r : rows) energies.push_back(r.energy);
  double offset = 0.0;
  double scale = 1.0;
  if (normalization == LevelNormalization::ShiftScale) {
    const auto [lo, hi] = std::minmax_element(energies.begin(), energies.end());
    offset = *lo;
    const double range = *hi - *lo;
    if (range <= 0.0) throw Error(ErrorCode::DegenerateRange, "level table has zero range");
    scale = range / static_cast<double>(energies.size() - 1);
    for (auto& e : energies) e = (e - offset) / scale;
  }
  return {Spectrum(std::move(energies), "levels"), std::move(rows), offset, scale};
}

LoadedLevels load_levels(const std::filesystem::path& path, LevelNormalization normalization) {
  auto loaded = parse_levels(io::read_text(path), normalization);
  loaded.spectrum = Spectrum(loaded.spectrum.levels(), path.stem().string());
  return loaded;
}

double evaluate_objective(const Spectrum& s, const SpectrumObjective& objective, std::uint64_t seed,
                          double* tau) {
  if (const auto* f = std::get_if<MinBmseObjective>(&objective)) {
    const auto r = min_bmse_over_tau(s, seed, f->probe, f->grid_points);
    if (tau) *tau = r.tau;
    return r.bmse;
  }
  const auto& p = std::get<PhaseCostObjective>(objective);
  if (tau) *tau = 1.0;
  return optimize_phase_probe(s, p.prior, seed, p.options).cost;
}

TargetVector target_from_interior(const Spectrum& base, std::vector<double> interior) {
  const std::size_t n = base.size();
  if (interior.size() + 2 != n) throw Error(ErrorCode::DimensionMismatch, "need n-2 interior ratios");
  for (auto& x : interior) x = std::clamp(x, 0.0, 1.0);
  std::sort(interior.begin(), interior.end());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return base[a] < base[b]; });
  std::vector<double> t(n);
  t[order.front()] = 0.0;
  t[order.back()] = 1.0;
  for (std::size_t k = 1; k + 1 < n; ++k) t[order[k]] = interior[k - 1];
  return TargetVector(std::move(t));
}

ScenarioReport adapt_to_target(const Spectrum& base, const TargetVector& target) {
  auto design = lp_max_range_design(base, target);
  auto schedule = build_schedule(birkhoff_decompose(design.weights), 1.0);
  return ScenarioReport{base.label(), base, target, std::move(design), std::move(schedule)};
}

ScenarioReport optimize_target_spectrum(const Spectrum& base, const SpectrumObjective& objective,
                                        const SearchOptions& search, std::uint64_t seed) {
  if (search.budget < 1) throw Error(ErrorCode::InvalidArgument, "budget must be >= 1");
  const std::size_t n = base.size();
  const std::size_t dim = n - 2;
  // The same inner seed for every candidate keeps the objective a fixed
  // function of the target.
  const std::uint64_t inner = split_seed(seed, kInnerStream);

  auto evaluate = [&](const std::vector<double>& interior, double* tau) {
    const auto target = target_from_interior(base, interior);
    const auto design = lp_max_range_design(base, target);
    return evaluate_objective(design.effective, objective, inner, tau);
  };

  struct StartResult {
    std::vector<double> best;
    double value = std::numeric_limits<double>::infinity();
    int evaluations = 0;
  };
  const int starts = dim == 0 ? 1 : std::max(1, std::min(search.starts, search.budget));
  std::vector<StartResult> results(static_cast<std::size_t>(starts));

  parallel_for(results.size(), [&](std::size_t st) {
    const int budget = search.budget / starts + (static_cast<int>(st) < search.budget % starts ? 1 : 0);
    auto& res = results[st];
    std::vector<double> x0(dim);
    if (st == 0) {
      for (std::size_t k = 0; k < dim; ++k) x0[k] = std::asin(std::sqrt((k + 1.0) / (n - 1.0)));
    } else {
      Rng rng(split_seed(seed, kSearchStream, st));
      for (auto& x : x0) x = std::asin(std::sqrt(rng.uniform()));
    }
    auto record = [&](const std::vector<double>& x) {
      std::vector<double> interior(dim);
      for (std::size_t k = 0; k < dim; ++k) interior[k] = squash(x[k]);
      const double v = evaluate(interior, nullptr);
      ++res.evaluations;
      if (v < res.value) {
        res.value = v;
        res.best = interior;
      }
      return v;
    };
    if (dim == 0) {
      record({});
      return;
    }
    struct Ctx {
      decltype(record)* f;
      int budget;
      int* used;
      double cap;
    } ctx{&record, budget, &res.evaluations, 0.0};
    gsl_multimin_function fn;
    fn.n = dim;
    fn.params = &ctx;
    fn.f = [](const gsl_vector* v, void* p) -> double {
      auto* c = static_cast<Ctx*>(p);
      // Past the budget every point looks bad, which ends the search.
      if (*c->used >= c->budget) return 1e300;
      std::vector<double> x(v->size);
      for (std::size_t k = 0; k < v->size; ++k) x[k] = gsl_vector_get(v, k);
      return (*c->f)(x);
    };
    gsl_set_error_handler_off();
    gsl_vector* start = gsl_vector_alloc(dim);
    gsl_vector* step = gsl_vector_alloc(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      gsl_vector_set(start, k, x0[k]);
      gsl_vector_set(step, k, 0.15);
    }
    gsl_multimin_fminimizer* nm = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, dim);
    gsl_multimin_fminimizer_set(nm, &fn, start, step);
    while (res.evaluations < budget) {
      if (gsl_multimin_fminimizer_iterate(nm) != GSL_SUCCESS) break;
      if (gsl_multimin_fminimizer_size(nm) < 1e-6) break;
    }
    gsl_multimin_fminimizer_free(nm);
    gsl_vector_free(step);
    gsl_vector_free(start);
  });

  std::size_t win = 0;
  int evaluations = 0;
  for (std::size_t st = 0; st < results.size(); ++st) {
    evaluations += results[st].evaluations;
    if (results[st].value < results[win].value) win = st;
  }
  auto report = adapt_to_target(base, target_from_interior(base, results[win].best));
  report.id = base.label();
  report.objective = evaluate_objective(report.design.effective, objective, inner, &report.tau);
  report.baseline = evaluate_objective(base, objective, inner, &report.baseline_tau);
  report.evaluations = evaluations;
  report.seed = seed;
  return report;
}

io::json report_json(const ScenarioReport& r) {
  io::json j;
  j["id"] = r.id;
  j["base"] = io::to_json(r.base);
  j["target"] = io::to_json(r.target);
  j["weights"] = io::to_json(r.design.weights);
  j["effective"] = io::to_json(r.design.effective);
  j["achieved_range"] = r.design.achieved_range;
  j["schedule"] = io::to_json(r.schedule);
  j["objective"] = r.objective;
  j["baseline"] = r.baseline;
  j["tau"] = r.tau;
  j["baseline_tau"] = r.baseline_tau;
  j["evaluations"] = r.evaluations;
  j["seed"] = r.seed;
  return j;
}

const std::vector<std::string>& figure_ids() {
  static const std::vector<std::string> ids{"fig4", "fig6", "fig8", "fig10", "fig12", "figA"};
  return ids;
}

namespace {

using io::format_double;

struct FigureWriter {
  std::filesystem::path outdir;
  std::vector<std::filesystem::path> written;
  io::json details = io::json::object();

  void text(const std::string& name, const std::string& content) {
    const auto path = outdir / name;
    io::write_text_atomic(path, content);
    written.push_back(path);
  }

  void curve(const std::string& name, const BmseCurve& c) {
    io::CsvTable t({"tau", "bmse", "qfi", "restart_winner", "iters"});
    for (const auto& r : c.rows)
      t.row({format_double(r.tau), format_double(r.bmse), format_double(r.qfi),
             std::to_string(r.restart_winner), std::to_string(r.iters)});
    text(name, t.str());
  }
};


void compare_curves(FigureWriter& w, const std::string& stem, const Spectrum& original,
                    const ScenarioReport& report, std::uint64_t seed, const std::string& first_name,
                    const std::string& second_name) {
  const double tau_max = 2.5 * std::max(report.tau, report.baseline_tau);
  const auto grid = tau_grid(tau_max, 40);
  w.curve(stem + "_" + first_name + ".csv", bmse_curve(original, grid, split_seed(seed, 1)));
  w.curve(stem + "_" + second_name + ".csv", bmse_curve(report.design.effective, grid, split_seed(seed, 2)));
  w.text(stem + "_design.json", io::dump_json(report_json(report)));
}

void fig4(FigureWriter& w, std::uint64_t seed, const FigureOptions& o) {
  for (int m : {2, 3}) {
    const auto base = degenerate_qubit_spectrum(m);
    const auto report = optimize_target_spectrum(base, MinBmseObjective{}, {o.budget, 2}, split_seed(seed, m));
    compare_curves(w, "fig4_m" + std::to_string(m), base, report, split_seed(seed, 10 + m), "degenerate", "lifted");
  }
}

void fig6(FigureWriter& w, std::uint64_t seed, const FigureOptions& o) {
  if (!o.levels_file)
    throw Error(ErrorCode::InvalidArgument, "fig6 needs a level table (--levels); none is bundled");
  const auto loaded = load_levels(*o.levels_file, LevelNormalization::ShiftScale);
  w.details["levels_offset"] = loaded.offset;
  w.details["levels_scale"] = loaded.scale;
  w.details["levels_unit"] = loaded.rows.front().unit;
  const auto report = optimize_target_spectrum(loaded.spectrum, MinBmseObjective{}, {o.budget, 2}, seed);
  compare_curves(w, "fig6", loaded.spectrum, report, split_seed(seed, 1), "original", "optimized");
}

void fig8(FigureWriter& w, std::uint64_t seed, const FigureOptions& o) {
  w.curve("fig8_top_n5.csv", bmse_curve(linear_spectrum(5), tau_grid(3.0, 60), split_seed(seed, 5)));
  io::CsvTable t({"n", "linear_min_bmse", "optimized_min_bmse", "improvement"});
  for (int n = 3; n <= o.max_n; ++n) {
    const auto r = optimize_target_spectrum(linear_spectrum(n), MinBmseObjective{}, {o.budget, 2}, split_seed(seed, 100 + n));
    t.row({std::to_string(n), format_double(r.baseline), format_double(r.objective),
           format_double((r.baseline - r.objective) / r.baseline)});
  }
  w.text("fig8_bottom.csv", t.str());
}

void fig10(FigureWriter& w, std::uint64_t seed, const FigureOptions& o) {
  const PhaseCostObjective objective{three_peak_prior()};
  io::CsvTable lin({"n", "cost", "trace_norm"});
  io::CsvTable opt({"n", "cost", "trace_norm"});
  for (int n = 3; n <= o.max_n; ++n) {
    const auto r = optimize_target_spectrum(linear_spectrum(n), objective, {o.budget, 2}, split_seed(seed, n));
    lin.row({std::to_string(n), format_double(r.baseline), format_double(0.5 - r.baseline / 4.0)});
    opt.row({std::to_string(n), format_double(r.objective), format_double(0.5 - r.objective / 4.0)});
    w.text("fig10_n" + std::to_string(n) + "_design.json", io::dump_json(report_json(r)));
  }
  w.text("fig10_linear.csv", lin.str());
  w.text("fig10_optimized.csv", opt.str());
}

void fig12(FigureWriter& w, std::uint64_t seed, const FigureOptions&) {
  struct Case {
    std::string name;
    Spectrum base;
    std::vector<int> dims;
  };
  const std::vector<Case> cases{{"qubit", Spectrum({-1.0, 1.0}, "qubit"), {1, 2, 4}},
                                {"five", linear_spectrum(5), {1, 2}}};
  for (const auto& c : cases) {
    // Time axis: four times the tau at which the base's 2-sigma phase
    // spread across its range reaches pi.
    const double tau_max = 4.0 * std::numbers::pi / (2.0 * spectral_range(c.base));
    const auto grid = tau_grid(tau_max, 40);
    for (int d : c.dims) {
      const auto aug = augment_with_ancilla(c.base, d);
      const int n = static_cast<int>(aug.size());
      std::vector<double> t(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) t[static_cast<std::size_t>(i)] = static_cast<double>(i) / (n - 1);
      const auto report = adapt_to_target(aug, TargetVector(t));
      w.curve("fig12_" + c.name + "_dA" + std::to_string(d) + ".csv",
              bmse_curve(report.design.effective, grid, split_seed(seed, static_cast<std::uint64_t>(d))));
      w.text("fig12_" + c.name + "_dA" + std::to_string(d) + "_design.json", io::dump_json(report_json(report)));
    }
  }
}

void figA(FigureWriter& w, std::uint64_t seed, const FigureOptions& o) {
  std::vector<int> ns{2, 3, 4, 5, 6, 7, 8, 9, 10};
  const auto rows = reduction_study(ns, o.study_samples, seed);
  io::CsvTable t({"n", "mean_range", "mean_min_range", "samples", "seed"});
  std::vector<double> x, a, b;
  for (const auto& r : rows) {
    t.row({std::to_string(r.n), format_double(r.mean_range), format_double(r.mean_min_range),
           std::to_string(r.samples), std::to_string(r.seed)});
    x.push_back(r.n);
    a.push_back(r.mean_range);
    b.push_back(r.mean_min_range);
  }
  w.text("figA.csv", t.str());
  w.details["slope_mean_range"] = fit_slope(x, a);
  w.details["slope_mean_min_range"] = fit_slope(x, b);
}

}  // namespace

std::vector<std::filesystem::path> reproduce_figure(const std::string& id, const std::filesystem::path& outdir,
                                                    std::uint64_t seed, const FigureOptions& options) {
  const auto& ids = figure_ids();
  if (std::find(ids.begin(), ids.end(), id) == ids.end())
    throw Error(ErrorCode::UnknownFigure, "unknown figure id '" + id + "'");
  const auto t0 = std::chrono::steady_clock::now();
  FigureWriter w{outdir, {}, io::json::object()};
  if (id == "fig4") fig4(w, seed, options);
  if (id == "fig6") fig6(w, seed, options);
  if (id == "fig8") fig8(w, seed, options);
  if (id == "fig10") fig10(w, seed, options);
  if (id == "fig12") fig12(w, seed, options);
  if (id == "figA") figA(w, seed, options);

  io::RunManifest m;
  m.tool_version = SPECTRALFORGE_VERSION;
  m.command_line = options.command_line;
  m.seed = seed;
  if (options.levels_file && id == "fig6") m.add_input(*options.levels_file);
  for (const auto& p : w.written) m.add_output(p);
  m.tolerances = io::default_tolerances();
  m.details = w.details;
  m.details["figure"] = id;
  m.details["budget"] = options.budget;
  m.details["study_samples"] = options.study_samples;
  m.details["max_n"] = options.max_n;
  m.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto manifest = outdir / (id + "_manifest.json");
  io::write_text_atomic(manifest, io::dump_json(m.to_json()));
  w.written.push_back(manifest);
  return w.written;
}

}  // namespace spectralforge
