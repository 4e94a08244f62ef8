#include "cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <optional>

#include "spectralforge/bayes_freq.hpp"
#include "spectralforge/bayes_phase.hpp"
#include "spectralforge/design_lp.hpp"
#include "spectralforge/errors.hpp"
#include "spectralforge/io.hpp"
#include "spectralforge/parallel.hpp"
#include "spectralforge/scenarios.hpp"
#include "spectralforge/schedule_synth.hpp"

#ifndef SPECTRALFORGE_FORMAT_VERSION
#define SPECTRALFORGE_FORMAT_VERSION "1"
#endif

namespace spectralforge::cli {

namespace {

namespace fs = std::filesystem;
using io::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <class T>
T parse_number(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    T v;
    if constexpr (std::is_same_v<T, double>) v = std::stod(s, &pos);
    else if constexpr (std::is_same_v<T, std::uint64_t>) v = std::stoull(s, &pos);
    else v = static_cast<T>(std::stoll(s, &pos));
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw UsageError("bad " + what + " '" + s + "'");
  }
}

/// `a..b` or a single value.
template <class T>
std::pair<T, T> parse_range(const std::string& s, const std::string& what) {
  const auto dots = s.find("..");
  if (dots == std::string::npos) {
    const T v = parse_number<T>(s, what);
    return {v, v};
  }
  const T a = parse_number<T>(s.substr(0, dots), what);
  const T b = parse_number<T>(s.substr(dots + 2), what);
  if (b < a) throw Error(ErrorCode::InvalidArgument, what + ": empty range " + s);
  return {a, b};
}

struct Context {
  std::vector<std::string> command_line;
  std::optional<std::uint64_t> seed_flag;
  unsigned jobs = 0;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  std::uint64_t seed() const {
    if (seed_flag) return *seed_flag;
    if (const char* env = std::getenv("SPECTRALFORGE_SEED"))
      return parse_number<std::uint64_t>(env, "SPECTRALFORGE_SEED");
    return 0;
  }

  io::RunManifest manifest() const {
    io::RunManifest m;
    m.tool_version = SPECTRALFORGE_VERSION;
    m.command_line = command_line;
    m.seed = seed();
    m.tolerances = io::default_tolerances();
    m.details["jobs"] = spectralforge::jobs();
    return m;
  }

  /// Writes the output and `<out>.manifest.json` next to it.
  void emit(const fs::path& out, const std::string& content, io::RunManifest m,
            const std::vector<fs::path>& inputs) const {
    io::write_text_atomic(out, content);
    for (const auto& p : inputs) m.add_input(p);
    m.add_output(out);
    m.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    auto mpath = out;
    mpath += ".manifest.json";
    io::write_text_atomic(mpath, io::dump_json(m.to_json()));
  }
};

Spectrum read_spectrum(const fs::path& p) { return io::spectrum_from_json(io::read_json(p)); }

PhasePrior read_prior(const std::optional<fs::path>& p) {
  return p ? io::prior_from_json(io::read_json(*p)) : PhasePrior::flat();
}

std::vector<fs::path> present(std::initializer_list<std::optional<fs::path>> paths) {
  std::vector<fs::path> v;
  for (const auto& p : paths)
    if (p) v.push_back(*p);
  return v;
}

json design_json(const DesignResult& d) {
  json j;
  j["method"] = std::string(to_string(d.method));
  j["achieved_range"] = d.achieved_range;
  j["weights"] = io::to_json(d.weights);
  j["effective"] = io::to_json(d.effective);
  return j;
}

BistochasticMatrix read_weights(const fs::path& p) {
  const auto j = io::read_json(p);
  // Accept a bare weights object or a design/report holding one.
  if (j.is_object() && j.contains("weights")) return io::weights_from_json(j.at("weights"));
  return io::weights_from_json(j);
}

// design ---------------------------------------------------------------------

struct DesignArgs {
  fs::path spectrum, target, out;
  std::string method = "lp";
  int switches = 0;
  int tries = 200;
};

void run_design(const Context& ctx, const DesignArgs& a) {
  const auto s = read_spectrum(a.spectrum);
  const auto t = io::target_from_json(io::read_json(a.target));
  json j;
  auto m = ctx.manifest();
  if (a.method == "lp") {
    j = design_json(lp_max_range_design(s, t));
  } else if (a.method == "analytic") {
    j = design_json(analytic_design(s, t));
  } else {
    if (a.switches < 1) throw Error(ErrorCode::InvalidArgument, "--switches must be >= 1 for method minimal");
    const auto d = minimal_switch_design(s, t, a.switches, a.tries, ctx.seed());
    j["method"] = "minimal";
    j["achieved_range"] = d.achieved_range;
    j["weights"] = io::to_json(d.implied_weights());
    j["effective"] = io::to_json(d.effective);
    json chain = json::array();
    for (std::size_t i = 0; i < d.chain.size(); ++i)
      chain.push_back(json{{"swap", {d.chain[i].first, d.chain[i].second}}, {"weight", d.weights[i + 1]}});
    j["identity_weight"] = d.weights.front();
    j["chain"] = chain;
    j["active_swaps"] = d.active_swaps();
  }
  j["mismatch"] = ratio_mismatch(io::spectrum_from_json(j["effective"]), t);
  m.details["method"] = a.method;
  ctx.emit(a.out, io::dump_json(j), m, {a.spectrum, a.target});
}

// schedule -------------------------------------------------------------------

struct ScheduleArgs {
  fs::path weights, out;
  double total_time = 1.0;
};

void run_schedule(const Context& ctx, const ScheduleArgs& a) {
  const auto r = read_weights(a.weights);
  const auto d = birkhoff_decompose(r);
  const auto sched = build_schedule(d, a.total_time);
  json j = io::to_json(sched);
  j["decomposition"] = io::to_json(d);
  j["switches"] = switch_count(sched);
  j["reconstruction_residual"] = (d.reconstruct() - r.entries()).cwiseAbs().maxCoeff();
  auto m = ctx.manifest();
  m.details["terms"] = d.terms.size();
  ctx.emit(a.out, io::dump_json(j), m, {a.weights});
}

// simulate -------------------------------------------------------------------

struct SimulateArgs {
  fs::path spectrum, schedule, out;
  std::optional<fs::path> probe;
  double omega = 1.0;
};

void run_simulate(const Context& ctx, const SimulateArgs& a) {
  const auto s = read_spectrum(a.spectrum);
  const auto sched = io::schedule_from_json(io::read_json(a.schedule));
  const auto probe = a.probe ? io::probe_from_json(io::read_json(*a.probe)) : ProbeState::uniform(s.size());
  const auto final_state = simulate_schedule(s, sched, a.omega, probe);
  const auto eff = apply_weights(sched.weights(), s);
  json j;
  j["omega"] = a.omega;
  j["final"] = io::to_json(final_state);
  std::vector<double> phases(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) phases[i] = -a.omega * sched.total_time() * eff[i];
  j["expected_phases"] = phases;
  j["effective"] = io::to_json(eff);
  ctx.emit(a.out, io::dump_json(j), ctx.manifest(), present({a.spectrum, a.schedule, a.probe}));
}

// estimate-freq ----------------------------------------------------------------

struct FreqArgs {
  fs::path spectrum, out;
  std::string tau = "0..3";
  int points = 30;
  int restarts = 8;
  bool minimum = false;
};

void run_estimate_freq(const Context& ctx, const FreqArgs& a) {
  const auto s = read_spectrum(a.spectrum);
  ProbeOptions opt;
  opt.restarts = a.restarts;
  auto m = ctx.manifest();
  if (a.minimum) {
    const auto r = min_bmse_over_tau(s, ctx.seed(), opt);
    const auto best = optimize_probe(s, r.tau, ctx.seed(), opt);
    json j;
    j["tau"] = r.tau;
    j["bmse"] = r.bmse;
    j["qfi"] = best.qfi;
    j["probe"] = io::to_json(best.probe);
    j["worst_increase"] = r.worst_increase;
    ctx.emit(a.out, io::dump_json(j), m, {a.spectrum});
    return;
  }
  const auto [lo, hi] = parse_range<double>(a.tau, "--tau");
  if (a.points < 1) throw Error(ErrorCode::InvalidArgument, "--points must be >= 1");
  std::vector<double> grid;
  const int count = lo == hi ? 1 : a.points + 1;
  for (int k = 0; k < count; ++k) grid.push_back(count == 1 ? lo : lo + (hi - lo) * k / a.points);
  const auto c = bmse_curve(s, grid, ctx.seed(), opt);
  io::CsvTable t({"tau", "bmse", "qfi", "restart_winner", "iters"});
  for (const auto& r : c.rows)
    t.row({io::format_double(r.tau), io::format_double(r.bmse), io::format_double(r.qfi),
           std::to_string(r.restart_winner), std::to_string(r.iters)});
  m.details["worst_increase"] = c.worst_increase;
  ctx.emit(a.out, t.str(), m, {a.spectrum});
}

// estimate-phase ---------------------------------------------------------------

struct PhaseArgs {
  fs::path spectrum, out;
  std::optional<fs::path> prior;
  int restarts = 8;
};

void run_estimate_phase(const Context& ctx, const PhaseArgs& a) {
  const auto s = read_spectrum(a.spectrum);
  const auto prior = read_prior(a.prior);
  PhaseOptions opt;
  opt.restarts = a.restarts;
  const auto r = optimize_phase_probe(s, prior, ctx.seed(), opt);
  json j;
  j["cost"] = r.cost;
  j["trace_norm"] = r.trace_norm;
  j["prior"] = io::to_json(prior);
  j["probe"] = io::to_json(r.probe);
  json meas = json::array();
  for (const auto& pm : r.measurement)
    meas.push_back(json{{"phase", pm.phase}, {"vector", io::to_json(ProbeState(pm.vector))["amplitudes"]}});
  j["measurement"] = meas;
  j["iterations"] = r.iterations;
  auto m = ctx.manifest();
  m.details["worst_decrease"] = r.worst_decrease;
  ctx.emit(a.out, io::dump_json(j), m, present({a.spectrum, a.prior}));
}

// optimize-spectrum ------------------------------------------------------------

struct OptimizeArgs {
  std::optional<fs::path> spectrum, prior;
  int linear = 0;
  int degenerate = 0;
  std::string objective = "min-bmse";
  fs::path out;
  int budget = 60;
  int starts = 3;
};

void run_optimize(const Context& ctx, const OptimizeArgs& a) {
  const int given = (a.spectrum ? 1 : 0) + (a.linear ? 1 : 0) + (a.degenerate ? 1 : 0);
  if (given != 1) throw UsageError("give exactly one of --spectrum, --linear, --degenerate");
  const auto base = a.spectrum ? read_spectrum(*a.spectrum)
                    : a.linear ? linear_spectrum(a.linear)
                               : degenerate_qubit_spectrum(a.degenerate);
  SpectrumObjective obj = MinBmseObjective{};
  if (a.objective == "phase") obj = PhaseCostObjective{read_prior(a.prior)};
  const auto r = optimize_target_spectrum(base, obj, {a.budget, a.starts}, ctx.seed());
  auto m = ctx.manifest();
  m.details["objective"] = a.objective;
  m.details["budget"] = a.budget;
  m.details["starts"] = a.starts;
  ctx.emit(a.out, io::dump_json(report_json(r)), m, present({a.spectrum, a.prior}));
}

// reduction-study --------------------------------------------------------------

struct StudyArgs {
  std::string n = "2..10";
  int samples = 10000;
  fs::path out = "reduction_study.csv";
};

void run_study(const Context& ctx, const StudyArgs& a) {
  const auto [lo, hi] = parse_range<int>(a.n, "--n");
  if (lo < 2) throw Error(ErrorCode::InvalidArgument, "--n must start at 2 or more");
  std::vector<int> ns;
  for (int n = lo; n <= hi; ++n) ns.push_back(n);
  const auto rows = reduction_study(ns, a.samples, ctx.seed());
  io::CsvTable t({"n", "mean_range", "mean_min_range", "samples", "seed"});
  std::vector<double> x, ra, rb;
  for (const auto& r : rows) {
    t.row({std::to_string(r.n), io::format_double(r.mean_range), io::format_double(r.mean_min_range),
           std::to_string(r.samples), std::to_string(r.seed)});
    x.push_back(r.n);
    ra.push_back(r.mean_range);
    rb.push_back(r.mean_min_range);
  }
  auto m = ctx.manifest();
  if (ns.size() >= 2) {
    m.details["slope_mean_range"] = fit_slope(x, ra);
    m.details["slope_mean_min_range"] = fit_slope(x, rb);
    std::cout << "slope_mean_range " << io::format_double(fit_slope(x, ra)) << "\n"
              << "slope_mean_min_range " << io::format_double(fit_slope(x, rb)) << "\n";
  }
  ctx.emit(a.out, t.str(), m, {});
}

// reproduce --------------------------------------------------------------------

struct ReproduceArgs {
  std::string figure;
  fs::path out = "runs";
  std::optional<fs::path> levels;
  FigureOptions options;
};

void run_reproduce(const Context& ctx, ReproduceArgs a) {
  a.options.levels_file = a.levels;
  a.options.command_line = ctx.command_line;
  for (const auto& p : reproduce_figure(a.figure, a.out, ctx.seed(), a.options)) std::cout << p.string() << "\n";
}

std::string one_line(std::string s) {
  for (auto& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  return s;
}

}  // namespace

int run(int argc, char** argv) {
  Context ctx;
  ctx.command_line.assign(argv, argv + argc);

  CLI::App app{"Spectral design by switching control"};
  app.set_version_flag("--version", std::string("spectralforge ") + SPECTRALFORGE_VERSION + " (format " +
                                        SPECTRALFORGE_FORMAT_VERSION + ")");
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--seed", ctx.seed_flag, "Seed for all randomness (fallback: SPECTRALFORGE_SEED, then 0)");
  app.add_option("--jobs", ctx.jobs, "Worker threads (default: available cores)");

  DesignArgs da;
  auto* design = app.add_subcommand("design", "Bistochastic weights realizing a target ratio vector");
  design->add_option("--spectrum", da.spectrum, "Spectrum JSON")->required();
  design->add_option("--target", da.target, "Target JSON")->required();
  design->add_option("--method", da.method)->check(CLI::IsMember({"lp", "analytic", "minimal"}));
  design->add_option("--switches", da.switches, "Chain length for method minimal");
  design->add_option("--tries", da.tries, "Random chains tried for method minimal");
  design->add_option("--out", da.out)->required();

  ScheduleArgs sa;
  auto* schedule = app.add_subcommand("schedule", "Birkhoff decomposition and switching schedule");
  schedule->add_option("--weights", sa.weights, "Weights JSON or design output")->required();
  schedule->add_option("--total-time", sa.total_time);
  schedule->add_option("--out", sa.out)->required();

  SimulateArgs sia;
  auto* simulate = app.add_subcommand("simulate", "Run a probe through a switching schedule");
  simulate->add_option("--spectrum", sia.spectrum)->required();
  simulate->add_option("--schedule", sia.schedule)->required();
  simulate->add_option("--probe", sia.probe, "Probe JSON (default: uniform)");
  simulate->add_option("--omega", sia.omega);
  simulate->add_option("--out", sia.out)->required();

  FreqArgs fa;
  auto* freq = app.add_subcommand("estimate-freq", "Optimal frequency-estimation BMSE over tau");
  freq->add_option("--spectrum", fa.spectrum)->required();
  freq->add_option("--tau", fa.tau, "Value or range a..b of t*sigma");
  freq->add_option("--points", fa.points, "Grid intervals over the range");
  freq->add_option("--restarts", fa.restarts);
  freq->add_flag("--min", fa.minimum, "Report only the minimum over tau");
  freq->add_option("--out", fa.out)->required();

  PhaseArgs pa;
  auto* phase = app.add_subcommand("estimate-phase", "Optimal probe and measurement for phase estimation");
  phase->add_option("--spectrum", pa.spectrum)->required();
  phase->add_option("--prior", pa.prior, "Prior JSON (default: flat)");
  phase->add_option("--restarts", pa.restarts);
  phase->add_option("--out", pa.out)->required();

  OptimizeArgs oa;
  auto* optimize = app.add_subcommand("optimize-spectrum", "Search target ratios minimizing an estimation cost");
  optimize->add_option("--spectrum", oa.spectrum);
  optimize->add_option("--linear", oa.linear, "Use the linear n-level spectrum");
  optimize->add_option("--degenerate", oa.degenerate, "Use the m-qubit degenerate spectrum");
  optimize->add_option("--objective", oa.objective)->check(CLI::IsMember({"min-bmse", "phase"}));
  optimize->add_option("--prior", oa.prior, "Phase prior JSON (default: flat)");
  optimize->add_option("--budget", oa.budget);
  optimize->add_option("--starts", oa.starts);
  optimize->add_option("--out", oa.out)->required();

  StudyArgs sta;
  auto* study = app.add_subcommand("reduction-study", "Random-sampling range reduction study");
  study->add_option("--n", sta.n, "Range a..b of level counts");
  study->add_option("--samples", sta.samples);
  study->add_option("--out", sta.out);

  ReproduceArgs ra;
  auto* reproduce = app.add_subcommand("reproduce", "Write the data behind a figure");
  reproduce->add_option("figure", ra.figure)->required();
  reproduce->add_option("--out", ra.out);
  reproduce->add_option("--levels", ra.levels, "Level table CSV (fig6)");
  reproduce->add_option("--budget", ra.options.budget);
  reproduce->add_option("--samples", ra.options.study_samples);
  reproduce->add_option("--max-n", ra.options.max_n);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (ctx.jobs) set_jobs(ctx.jobs);
    if (*design) run_design(ctx, da);
    if (*schedule) run_schedule(ctx, sa);
    if (*simulate) run_simulate(ctx, sia);
    if (*freq) run_estimate_freq(ctx, fa);
    if (*phase) run_estimate_phase(ctx, pa);
    if (*optimize) run_optimize(ctx, oa);
    if (*study) run_study(ctx, sta);
    if (*reproduce) run_reproduce(ctx, ra);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << one_line(e.what()) << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error code=" << to_string(e.code()) << " message=" << json(one_line(e.what())).dump() << "\n";
    return kExitValidation;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error code=IoError message=" << json(one_line(e.what())).dump() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << one_line(e.what()) << "\n";
    return kExitInternal;
  }
  return kExitOk;
}

}  // namespace spectralforge::cli
