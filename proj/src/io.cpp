#include "spectralforge/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "spectralforge/errors.hpp"

namespace spectralforge::io {

namespace {

void dump(const json& j, std::string& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  const std::string close(static_cast<std::size_t>(indent), ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) out += ",\n";
        first = false;
        out += pad + json(k).dump() + ": ";
        dump(v, out, indent + 2);
      }
      out += "\n" + close + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      bool flat = true;
      for (const auto& v : j) flat = flat && !v.is_structured();
      if (flat) {
        out += "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) out += ", ";
          dump(j[i], out, indent);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += pad;
        dump(j[i], out, indent + 2);
      }
      out += "\n" + close + "]";
      return;
    }
    case json::value_t::number_float:
      out += format_double(j.get<double>());
      return;
    default:
      out += j.dump();
  }
}

const json& member(const json& j, const char* key, std::string_view what) {
  if (!j.is_object() || !j.contains(key))
    throw Error(ErrorCode::ParseError, std::string(what) + ": missing field '" + key + "'");
  return j.at(key);
}

template <class T>
T get_as(const json& j, std::string_view what) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string(what) + ": " + e.what());
  }
}

Permutation perm_from_json(const json& j) {
  return Permutation(get_as<std::vector<int>>(j, "perm"));
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::filesystem::filesystem_error("cannot write", tmp, std::make_error_code(std::errc::io_error));
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::filesystem::filesystem_error("write failed", tmp, std::make_error_code(std::errc::io_error));
  }
  std::filesystem::rename(tmp, path);
}

json parse_json(std::string_view text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string(what) + ": " + e.what());
  }
}

json read_json(const std::filesystem::path& path) { return parse_json(read_text(path), path.string()); }

std::string dump_json(const json& j) {
  std::string out;
  dump(j, out, 0);
  out += "\n";
  return out;
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json to_json(const Spectrum& s) {
  json j;
  j["label"] = s.label();
  j["levels"] = s.levels();
  return j;
}

Spectrum spectrum_from_json(const json& j) {
  const auto levels = get_as<std::vector<double>>(member(j, "levels", "spectrum"), "spectrum levels");
  std::string label;
  if (j.contains("label")) label = get_as<std::string>(j.at("label"), "spectrum label");
  return Spectrum(levels, label);
}

json to_json(const TargetVector& t) { return json{{"ratios", t.ratios()}}; }

TargetVector target_from_json(const json& j) {
  return TargetVector(get_as<std::vector<double>>(member(j, "ratios", "target"), "target ratios"));
}

json to_json(const BistochasticMatrix& r) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < r.entries().rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(r.entries().cols()));
    for (Eigen::Index k = 0; k < r.entries().cols(); ++k) row[static_cast<std::size_t>(k)] = r.entries()(i, k);
    rows.push_back(row);
  }
  return json{{"n", r.size()}, {"entries", rows}};
}

BistochasticMatrix weights_from_json(const json& j) {
  const auto rows = get_as<std::vector<std::vector<double>>>(member(j, "entries", "weights"), "weights entries");
  const auto n = static_cast<Eigen::Index>(rows.size());
  RealMatrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) != n)
      throw Error(ErrorCode::DimensionMismatch, "weights: matrix is not square");
    for (Eigen::Index k = 0; k < n; ++k) m(i, k) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
  }
  return BistochasticMatrix(m);
}

json to_json(const SwitchingSchedule& s) {
  json segs = json::array();
  for (const auto& seg : s.segments()) segs.push_back(json{{"fraction", seg.fraction}, {"perm", seg.perm.mapping()}});
  return json{{"total_time", s.total_time()}, {"segments", segs}};
}

SwitchingSchedule schedule_from_json(const json& j) {
  std::vector<ScheduleSegment> segs;
  for (const auto& seg : member(j, "segments", "schedule")) {
    segs.push_back({get_as<double>(member(seg, "fraction", "segment"), "fraction"),
                    perm_from_json(member(seg, "perm", "segment"))});
  }
  return SwitchingSchedule(std::move(segs), get_as<double>(member(j, "total_time", "schedule"), "total_time"));
}

json to_json(const BirkhoffDecomposition& d) {
  json terms = json::array();
  for (const auto& t : d.terms) terms.push_back(json{{"weight", t.weight}, {"perm", t.perm.mapping()}});
  return json{{"terms", terms}};
}

json to_json(const PhasePrior& p) {
  switch (p.kind()) {
    case PhasePrior::Kind::Flat:
      return json{{"type", "flat"}};
    case PhasePrior::Kind::Delta: {
      json peaks = json::array();
      for (const auto& d : p.peaks()) peaks.push_back(json{{"w", d.w}, {"x", d.x}});
      return json{{"type", "delta"}, {"peaks", peaks}};
    }
    case PhasePrior::Kind::Fourier: {
      json coeffs = json::array();
      for (const auto& [k, v] : p.coefficients()) coeffs.push_back(json::array({k, v.real(), v.imag()}));
      return json{{"type", "fourier"}, {"coeffs", coeffs}};
    }
  }
  return {};
}

PhasePrior prior_from_json(const json& j) {
  const auto type = get_as<std::string>(member(j, "type", "prior"), "prior type");
  if (type == "flat") return PhasePrior::flat();
  if (type == "delta") {
    std::vector<DeltaPeak> peaks;
    for (const auto& p : member(j, "peaks", "prior"))
      peaks.push_back({get_as<double>(member(p, "w", "peak"), "w"), get_as<double>(member(p, "x", "peak"), "x")});
    return PhasePrior::delta(std::move(peaks));
  }
  if (type == "fourier") {
    std::vector<std::pair<int, std::complex<double>>> coeffs;
    for (const auto& c : member(j, "coeffs", "prior")) {
      if (!c.is_array() || c.size() != 3) throw Error(ErrorCode::ParseError, "prior: coeffs entries are [k, re, im]");
      coeffs.emplace_back(get_as<int>(c[0], "k"), std::complex<double>(get_as<double>(c[1], "re"), get_as<double>(c[2], "im")));
    }
    return PhasePrior::fourier(std::move(coeffs));
  }
  throw Error(ErrorCode::ParseError, "prior: unknown type '" + type + "'");
}

json to_json(const ProbeState& p) {
  json amps = json::array();
  for (Eigen::Index i = 0; i < p.amplitudes().size(); ++i)
    amps.push_back(json::array({p.amplitudes()(i).real(), p.amplitudes()(i).imag()}));
  return json{{"amplitudes", amps}};
}

ProbeState probe_from_json(const json& j) {
  const auto& amps = member(j, "amplitudes", "probe");
  ComplexVector c(static_cast<Eigen::Index>(amps.size()));
  for (std::size_t i = 0; i < amps.size(); ++i) {
    const auto& a = amps[i];
    if (a.is_number()) {
      c(static_cast<Eigen::Index>(i)) = get_as<double>(a, "amplitude");
    } else if (a.is_array() && a.size() == 2) {
      c(static_cast<Eigen::Index>(i)) = {get_as<double>(a[0], "re"), get_as<double>(a[1], "im")};
    } else {
      throw Error(ErrorCode::ParseError, "probe: amplitudes are numbers or [re, im] pairs");
    }
  }
  return ProbeState::normalized(c);
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

CsvTable& CsvTable::row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) throw std::logic_error("CSV row width does not match header");
  rows_.push_back(std::move(cells));
  return *this;
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return out;
}

void RunManifest::add_input(const std::filesystem::path& path) {
  inputs.push_back({path.string(), hex64(fnv1a64(read_text(path)))});
}

void RunManifest::add_output(const std::filesystem::path& path) {
  outputs.push_back({path.string(), hex64(fnv1a64(read_text(path)))});
}

json RunManifest::to_json() const {
  auto records = [](const std::vector<OutputRecord>& v) {
    json a = json::array();
    for (const auto& r : v) a.push_back(json{{"path", r.path}, {"fnv1a64", r.hash}});
    return a;
  };
  json j;
  j["tool"] = "spectralforge";
  j["tool_version"] = tool_version;
  j["command_line"] = command_line;
  j["seed"] = seed;
  j["inputs"] = records(inputs);
  j["outputs"] = records(outputs);
  j["tolerances"] = tolerances;
  j["details"] = details;
  j["wall_time_s"] = wall_time_s;
  return j;
}

json default_tolerances() {
  return json{{"bistochastic", BistochasticMatrix::kDefaultTolerance},
              {"ratio_match", 1e-7},
              {"birkhoff_support", 1e-12},
              {"sylvester_support", 1e-12},
              {"freq_tol", 1e-10},
              {"freq_max_iter", 500},
              {"qfi_cutoff", 1e-14},
              {"wrapped_gaussian_tail", 1e-14}};
}

}  // namespace spectralforge::io
