#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "spectralforge/bayes_freq.hpp"
#include "spectralforge/bayes_phase.hpp"
#include "spectralforge/core_spectra.hpp"
#include "spectralforge/design_lp.hpp"
#include "spectralforge/io.hpp"
#include "spectralforge/schedule_synth.hpp"

namespace spectralforge {

/// Sorted sums of m independent +-1 values.
Spectrum degenerate_qubit_spectrum(int m);

/// (0, 1, ..., n-1).
Spectrum linear_spectrum(int n);

/// Level i of s becomes levels i*d_A .. i*d_A + d_A - 1.
Spectrum augment_with_ancilla(const Spectrum& s, int d_A);

enum class LevelNormalization { None, ShiftScale };

struct LevelTableRow {
  std::string label;
  double energy;
  std::string unit;
};

struct LoadedLevels {
  Spectrum spectrum;
  std::vector<LevelTableRow> rows;
  /// physical = offset + scale * normalized.
  double offset = 0.0;
  double scale = 1.0;
};

/// CSV `label,energy,unit` (header optional, '#' comments). ShiftScale maps
/// the minimum to 0 and the range to n-1.
LoadedLevels parse_levels(const std::string& text, LevelNormalization normalization);
LoadedLevels load_levels(const std::filesystem::path& path, LevelNormalization normalization);

struct MinBmseObjective {
  ProbeOptions probe{4, 500, 1e-10};
  int grid_points = 24;
};

struct PhaseCostObjective {
  PhasePrior prior;
  PhaseOptions options{4, 4000, 1e-13};
};

using SpectrumObjective = std::variant<MinBmseObjective, PhaseCostObjective>;

/// Objective value of a spectrum (lower is better). For MinBmseObjective
/// `tau` receives the minimizing time.
double evaluate_objective(const Spectrum& s, const SpectrumObjective& objective, std::uint64_t seed,
                          double* tau = nullptr);

/// Sorted interior ratios with pinned endpoints, assigned to levels in
/// ascending order of the base spectrum.
TargetVector target_from_interior(const Spectrum& base, std::vector<double> interior);

struct ScenarioReport {
  std::string id;
  Spectrum base;
  TargetVector target;
  DesignResult design;
  SwitchingSchedule schedule;
  double objective = 0.0;
  double baseline = 0.0;
  double tau = 0.0;
  double baseline_tau = 0.0;
  int evaluations = 0;
  std::uint64_t seed = 0;
};

struct SearchOptions {
  int budget = 60;
  int starts = 3;
};

/// Multi-start Nelder-Mead over interior target ratios; start 0 is the
/// equally spaced target, the rest are random.
ScenarioReport optimize_target_spectrum(const Spectrum& base, const SpectrumObjective& objective,
                                        const SearchOptions& search, std::uint64_t seed);

/// Max-range design realizing `target` from `base` plus its schedule.
ScenarioReport adapt_to_target(const Spectrum& base, const TargetVector& target);

io::json report_json(const ScenarioReport& report);

struct FigureOptions {
  std::optional<std::filesystem::path> levels_file;
  int budget = 40;
  int study_samples = 1000;
  int max_n = 6;
  std::vector<std::string> command_line;
};

/// Writes CSV files and a JSON manifest for the figure into outdir and
/// returns the written paths. Throws UnknownFigure for an unknown id.
std::vector<std::filesystem::path> reproduce_figure(const std::string& id,
                                                    const std::filesystem::path& outdir,
                                                    std::uint64_t seed,
                                                    const FigureOptions& options = {});

const std::vector<std::string>& figure_ids();

}  // namespace spectralforge
