// Apache License, Version 2.0, refer to LICENSE.txt

#include "bvmem/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace bvmem {

using nlohmann::json;

const double kAnnualizationFactor = 100.0 * std::sqrt(252.0);

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string::size_type start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

double parse_double(const std::string& raw, const std::string& what) {
  const std::string t = trim(raw);
  try {
    std::size_t used = 0;
    const double v = std::stod(t, &used);
    if (used != t.size()) throw std::invalid_argument(t);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("could not parse '" + t + "' as a number (" +
                                what + ")");
  }
}

std::vector<double> parse_numbers(const std::string& raw,
                                  const std::string& what) {
  std::vector<double> out;
  for (const std::string& piece : split(raw, ',')) {
    std::istringstream iss(piece);
    std::string token;
    while (iss >> token) out.push_back(parse_double(token, what));
  }
  return out;
}

template <typename T>
void write_pod(std::ostream& os, const T& value) {
  static_assert(std::is_trivially_copyable_v<T>);
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is, const std::string& what) {
  static_assert(std::is_trivially_copyable_v<T>);
  T value;
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!is) throw std::runtime_error("draw archive truncated while reading " + what);
  return value;
}

void write_doubles(std::ostream& os, const double* data, std::size_t n) {
  os.write(reinterpret_cast<const char*>(data),
           static_cast<std::streamsize>(n * sizeof(double)));
}

void read_doubles(std::istream& is, double* data, std::size_t n,
                  const std::string& what) {
  is.read(reinterpret_cast<char*>(data),
          static_cast<std::streamsize>(n * sizeof(double)));
  if (!is) throw std::runtime_error("draw archive truncated while reading " + what);
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& rows, const std::string& what) {
  if (!rows.is_array() || rows.empty()) {
    throw std::runtime_error(what + ": expected a non-empty array of rows");
  }
  const Eigen::Index r = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index c = static_cast<Eigen::Index>(rows.front().size());
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    const json& row = rows[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(row.size()) != c) {
      throw std::runtime_error(what + ": ragged rows");
    }
    for (Eigen::Index j = 0; j < c; ++j) {
      m(i, j) = row[static_cast<std::size_t>(j)].get<double>();
    }
  }
  return m;
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Vector vector_from_json(const json& arr, const std::string& what) {
  if (!arr.is_array()) throw std::runtime_error(what + ": expected an array");
  Vector v(static_cast<Eigen::Index>(arr.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v(i) = arr[static_cast<std::size_t>(i)].get<double>();
  }
  return v;
}

json innovation_to_json(const InnovationSpec& innov) {
  json comps = json::array();
  for (const MixtureComponent& c : innov.components) {
    comps.push_back(
        {{"location", vector_to_json(c.location)},
         {"scale", matrix_to_json(c.scale)}});
  }
  return {{"weights", innov.weights}, {"components", std::move(comps)}};
}

InnovationSpec innovation_from_json(const json& j) {
  InnovationSpec innov;
  innov.weights = j.at("weights").get<std::vector<double>>();
  for (const json& c : j.at("components")) {
    MixtureComponent comp;
    comp.location = vector_from_json(c.at("location"), "component location");
    comp.scale = matrix_from_json(c.at("scale"), "component scale");
    innov.components.push_back(std::move(comp));
  }
  return innov;
}

std::uint64_t fnv1a_append(std::uint64_t h, const std::string& s) {
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode) {
  std::ofstream os(path, mode);
  if (!os) throw std::runtime_error("could not open " + path + " for writing");
  return os;
}

std::ifstream open_in(const std::string& path, std::ios::openmode mode) {
  std::ifstream is(path, mode);
  if (!is) throw std::runtime_error("could not open " + path);
  return is;
}

}  // namespace

bool ConfigMap::has(const std::string& key) const {
  return values.count(key) != 0;
}

std::string ConfigMap::get_string(const std::string& key,
                                  const std::string& fallback) const {
  const auto it = values.find(key);
  return it == values.end() ? fallback : it->second;
}

double ConfigMap::get_double(const std::string& key, double fallback) const {
  const auto it = values.find(key);
  return it == values.end() ? fallback : parse_double(it->second, key);
}

long ConfigMap::get_long(const std::string& key, long fallback) const {
  const double v = get_double(key, static_cast<double>(fallback));
  const long out = static_cast<long>(v);
  require(static_cast<double>(out) == v, key + " must be an integer");
  return out;
}

std::uint64_t ConfigMap::get_uint64(const std::string& key,
                                    std::uint64_t fallback) const {
  const auto it = values.find(key);
  if (it == values.end()) return fallback;
  const std::string t = trim(it->second);
  try {
    // stoull accepts a leading minus sign and wraps; reject it up front.
    if (t.empty() || t.front() == '-') throw std::invalid_argument(t);
    std::size_t used = 0;
    const std::uint64_t v = std::stoull(t, &used);
    if (used != t.size()) throw std::invalid_argument(t);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument(key + " must be a non-negative integer");
  }
}

bool ConfigMap::get_bool(const std::string& key, bool fallback) const {
  const auto it = values.find(key);
  if (it == values.end()) return fallback;
  const std::string v = trim(it->second);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::invalid_argument(key + " must be a boolean");
}

Vector ConfigMap::get_vector(const std::string& key) const {
  const auto it = values.find(key);
  require(it != values.end(), "missing config key " + key);
  const std::vector<double> nums = parse_numbers(it->second, key);
  Vector v(static_cast<Eigen::Index>(nums.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v(i) = nums[static_cast<std::size_t>(i)];
  }
  return v;
}

Matrix ConfigMap::get_matrix(const std::string& key) const {
  const auto it = values.find(key);
  require(it != values.end(), "missing config key " + key);
  const std::vector<std::string> rowTexts = split(it->second, ';');
  std::vector<std::vector<double>> rows;
  for (const std::string& rt : rowTexts) {
    rows.push_back(parse_numbers(rt, key));
    require(rows.back().size() == rows.front().size(),
            key + " has ragged rows");
  }
  Matrix m(static_cast<Eigen::Index>(rows.size()),
           static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  return m;
}

std::vector<std::string> ConfigMap::get_strings(const std::string& key) const {
  const auto it = values.find(key);
  if (it == values.end()) return {};
  std::vector<std::string> out;
  for (const std::string& piece : split(it->second, ',')) {
    const std::string t = trim(piece);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

ConfigMap parse_config_text(const std::string& text) {
  ConfigMap cfg;
  std::string section;
  std::istringstream iss(text);
  std::string line;
  long lineNo = 0;
  while (std::getline(iss, line)) {
    ++lineNo;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (t.front() == '[') {
      require(t.back() == ']',
              "config line " + std::to_string(lineNo) + ": unterminated section");
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    require(eq != std::string::npos,
            "config line " + std::to_string(lineNo) + ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    require(!key.empty(),
            "config line " + std::to_string(lineNo) + ": empty key");
    const std::string full = section.empty() ? key : section + "." + key;
    cfg.values[full] = value;
  }
  return cfg;
}

ConfigMap load_config_file(const std::string& path) {
  std::ifstream is = open_in(path, std::ios::in);
  std::ostringstream buffer;
  buffer << is.rdbuf();
  return parse_config_text(buffer.str());
}

RunConfig load_run_config(const std::string& path, const std::string& mode) {
  const ConfigMap cfg = load_config_file(path);
  RunConfig rc;
  if (mode == "simulate") {
    rc.mode = RunMode::Simulate;
  } else if (mode == "fit") {
    rc.fitModel = cfg.get_string("fit.model", "dpm");
    if (rc.fitModel == "dpm") {
      rc.mode = RunMode::FitDpm;
    } else if (rc.fitModel == "ln1") {
      rc.mode = RunMode::FitLn1;
    } else {
      throw std::invalid_argument("fit.model must be dpm or ln1");
    }
  } else if (mode == "evaluate") {
    rc.mode = RunMode::Evaluate;
  } else if (mode == "diagnose") {
    rc.mode = RunMode::Diagnose;
  } else {
    throw std::invalid_argument("unknown mode " + mode);
  }

  rc.seed = cfg.get_uint64("seed", 1);
  rc.dataPath = cfg.get_string("data.path", "");
  rc.columns = cfg.get_strings("data.columns");
  rc.annualize = cfg.get_bool("data.annualize", false);

  rc.sampler.iterations = cfg.get_long("sampler.iterations", 30000);
  rc.sampler.burnIn = cfg.get_long("sampler.burn_in", 5000);
  rc.sampler.thin = cfg.get_long("sampler.thin", 10);
  rc.sampler.alpha = cfg.get_double("sampler.alpha", 1.0);
  rc.sampler.epsMeanTrunc = cfg.get_double("sampler.eps_mean_trunc", 1e-6);
  rc.sampler.etaPriorVariance =
      cfg.get_double("sampler.eta_prior_variance", 20.0);
  rc.sampler.proposalWeight = cfg.get_double("sampler.proposal_weight", 0.9);
  rc.sampler.proposalScale1 = cfg.get_double("sampler.proposal_scale1", 1.0);
  rc.sampler.proposalScale2 = cfg.get_double("sampler.proposal_scale2", 0.0);
  rc.sampler.seed = rc.seed;
  rc.nwDegrees = cfg.get_double("sampler.nw_degrees", 0.0);
  rc.nwPrecisionScale = cfg.get_double("sampler.nw_n0", 1.0);

  rc.baseline.multistarts =
      static_cast<int>(cfg.get_long("fit.multistarts", 5));
  rc.baseline.tolerance = cfg.get_double("fit.tolerance", 1e-8);
  rc.baseline.maxCycles = cfg.get_long("fit.max_cycles", 60);
  rc.baseline.etaPriorVariance = rc.sampler.etaPriorVariance;
  rc.baseline.seed = rc.seed;

  rc.simulate.T = cfg.get_long("simulate.T", 1000);
  if (cfg.has("simulate.omega") || cfg.has("simulate.B") ||
      cfg.has("simulate.A")) {
    rc.simulate.params.omega = cfg.get_vector("simulate.omega");
    rc.simulate.params.B = cfg.get_matrix("simulate.B");
    rc.simulate.params.A = cfg.get_matrix("simulate.A");
  }
  if (cfg.has("simulate.weights")) {
    InnovationSpec innov;
    const Vector w = cfg.get_vector("simulate.weights");
    for (Eigen::Index k = 0; k < w.size(); ++k) {
      innov.weights.push_back(w(k));
      const std::string suffix = std::to_string(k + 1);
      MixtureComponent comp;
      comp.location = cfg.get_vector("simulate.location" + suffix);
      comp.scale = cfg.get_matrix("simulate.scale" + suffix);
      innov.components.push_back(std::move(comp));
    }
    rc.simulate.innovation = innov;
  }
  if (cfg.has("simulate.mu1")) rc.simulate.mu1 = cfg.get_vector("simulate.mu1");

  rc.outputDir = cfg.get_string("output.dir", ".");
  rc.dpmArchive = cfg.get_string("evaluate.dpm_archive", "");
  rc.ln1Fit = cfg.get_string("evaluate.ln1_fit", "");
  rc.truthPath = cfg.get_string("evaluate.truth", "");
  rc.gridPoints = cfg.get_long("evaluate.grid_points", 400);
  rc.gridLo = cfg.get_double("evaluate.grid_lo", 1e-3);
  rc.gridHi = cfg.get_double("evaluate.grid_hi", 8.0);
  rc.ln1LpmlDraws = cfg.get_long("evaluate.ln1_lpml_draws", 200);
  return rc;
}

SeriesMatrix load_series(const std::string& path,
                         const std::vector<std::string>& columns,
                         bool annualize) {
  std::ifstream is = open_in(path, std::ios::in);
  std::string line;
  require(static_cast<bool>(std::getline(is, line)), path + " is empty");
  while (!line.empty() && (line.front() == '#')) {
    require(static_cast<bool>(std::getline(is, line)),
            path + " has no header row");
  }
  std::vector<std::string> header;
  for (const std::string& h : split(trim(line), ',')) header.push_back(trim(h));
  require(header.size() >= 2, path + ": expected a label column plus data");

  std::vector<std::size_t> picks;
  if (columns.empty()) {
    for (std::size_t i = 1; i < header.size(); ++i) picks.push_back(i);
  } else {
    for (const std::string& want : columns) {
      bool found = false;
      for (std::size_t i = 1; i < header.size(); ++i) {
        if (header[i] == want) {
          picks.push_back(i);
          found = true;
          break;
        }
      }
      if (!found) {
        throw std::invalid_argument(path + ": no column named '" + want + "'");
      }
    }
  }

  std::vector<std::string> labels;
  std::vector<double> flat;
  long row = 1;
  while (std::getline(is, line)) {
    ++row;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const std::vector<std::string> cells = split(t, ',');
    require(cells.size() == header.size(),
            path + " row " + std::to_string(row) + ": expected " +
                std::to_string(header.size()) + " cells");
    labels.push_back(trim(cells[0]));
    for (std::size_t p : picks) {
      double v = parse_double(cells[p],
                              path + " row " + std::to_string(row));
      if (annualize) v *= kAnnualizationFactor;
      if (!(v > 0.0)) {
        throw std::invalid_argument(path + " row " + std::to_string(row) +
                                    ", column " + header[p] +
                                    ": values must be strictly positive");
      }
      flat.push_back(v);
    }
  }
  const Eigen::Index d = static_cast<Eigen::Index>(picks.size());
  const Eigen::Index T = static_cast<Eigen::Index>(labels.size());
  SeriesMatrix series;
  series.values = Matrix(T, d);
  for (Eigen::Index t = 0; t < T; ++t) {
    for (Eigen::Index j = 0; j < d; ++j) {
      series.values(t, j) =
          flat[static_cast<std::size_t>(t) * static_cast<std::size_t>(d) +
               static_cast<std::size_t>(j)];
    }
  }
  series.timestamps = std::move(labels);
  validate(series);
  return series;
}

void save_series(const std::string& path, const SeriesMatrix& series) {
  validate(series);
  std::ofstream os = open_out(path, std::ios::out);
  os << "# first column is the time label; remaining columns are strictly\n"
     << "# positive observations, printed with 17 significant digits\n";
  os << "t";
  for (Eigen::Index j = 0; j < series.dim(); ++j) os << ",x" << (j + 1);
  os << "\n";
  for (Eigen::Index t = 0; t < series.length(); ++t) {
    if (series.timestamps.empty()) {
      os << (t + 1);
    } else {
      os << series.timestamps[static_cast<std::size_t>(t)];
    }
    for (Eigen::Index j = 0; j < series.dim(); ++j) {
      os << "," << format_full(series.values(t, j));
    }
    os << "\n";
  }
}

void save_truth(const std::string& path, const TruthSidecar& truth) {
  json j;
  j["omega"] = vector_to_json(truth.params.omega);
  j["B"] = matrix_to_json(truth.params.B);
  j["A"] = matrix_to_json(truth.params.A);
  j["innovation"] = innovation_to_json(truth.innovation);
  j["mu1"] = vector_to_json(truth.mu1);
  j["seed"] = truth.seed;
  std::ofstream os = open_out(path, std::ios::out);
  os << j.dump(2) << "\n";
}

TruthSidecar load_truth(const std::string& path) {
  std::ifstream is = open_in(path, std::ios::in);
  json j;
  is >> j;
  TruthSidecar truth;
  truth.params.omega = vector_from_json(j.at("omega"), "omega");
  truth.params.B = matrix_from_json(j.at("B"), "B");
  truth.params.A = matrix_from_json(j.at("A"), "A");
  truth.innovation = innovation_from_json(j.at("innovation"));
  truth.mu1 = vector_from_json(j.at("mu1"), "mu1");
  truth.seed = j.value("seed", std::uint64_t{0});
  return truth;
}

void save_ln1(const std::string& path, const LN1Fit& fit,
              std::uint64_t configHash, double lps, double lpml) {
  json j;
  j["omega"] = vector_to_json(fit.eta.omega);
  j["B"] = matrix_to_json(fit.eta.B);
  j["A"] = matrix_to_json(fit.eta.A);
  j["sigma"] = matrix_to_json(fit.sigma);
  j["mu1"] = vector_to_json(fit.mu1);
  j["log_posterior"] = fit.logPosterior;
  j["std_errors"] = vector_to_json(fit.stdErrors);
  j["config_hash"] = configHash;
  j["lps"] = lps;
  j["lpml"] = lpml;
  std::ofstream os = open_out(path, std::ios::out);
  os << j.dump(2) << "\n";
}

LoadedLN1 load_ln1(const std::string& path) {
  std::ifstream is = open_in(path, std::ios::in);
  json j;
  is >> j;
  LoadedLN1 out;
  out.fit.eta.omega = vector_from_json(j.at("omega"), "omega");
  out.fit.eta.B = matrix_from_json(j.at("B"), "B");
  out.fit.eta.A = matrix_from_json(j.at("A"), "A");
  out.fit.sigma = matrix_from_json(j.at("sigma"), "sigma");
  out.fit.mu1 = vector_from_json(j.at("mu1"), "mu1");
  out.fit.logPosterior = j.at("log_posterior").get<double>();
  out.fit.stdErrors = vector_from_json(j.at("std_errors"), "std_errors");
  out.configHash = j.at("config_hash").get<std::uint64_t>();
  out.lps = j.value("lps", 0.0);
  out.lpml = j.value("lpml", 0.0);
  return out;
}

void write_archive(const std::string& path, const DrawArchive& archive) {
  std::ofstream os = open_out(path, std::ios::binary);
  os.write("BVMEMDRW", 8);
  write_pod<std::uint32_t>(os, 1);
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(archive.model.size()));
  os.write(archive.model.data(),
           static_cast<std::streamsize>(archive.model.size()));
  write_pod<std::uint64_t>(os, static_cast<std::uint64_t>(archive.d));
  write_pod<std::uint64_t>(os, static_cast<std::uint64_t>(archive.T));
  write_pod<std::uint64_t>(os, archive.configHash);
  write_pod<std::uint64_t>(os, archive.seed);
  write_doubles(os, archive.mu1.data(),
                static_cast<std::size_t>(archive.mu1.size()));
  write_pod<std::uint64_t>(os, archive.draws.size());
  for (const ArchivedDraw& ad : archive.draws) {
    write_pod<std::int64_t>(os, ad.iteration);
    write_pod<std::int32_t>(os, ad.maxComponents);
    write_pod<std::int32_t>(os, ad.activeComponents);
    write_pod<std::uint64_t>(os, ad.draw.truncation.K);
    write_pod<double>(os, ad.draw.truncation.residualMass);
    const Vector eta = to_eta(ad.draw.eta);
    write_doubles(os, eta.data(), static_cast<std::size_t>(eta.size()));
    write_doubles(os, ad.draw.mixtureMean.data(),
                  static_cast<std::size_t>(ad.draw.mixtureMean.size()));
    write_pod<std::uint64_t>(os, ad.draw.weights.size());
    write_doubles(os, ad.draw.weights.data(), ad.draw.weights.size());
    for (const MixtureComponent& comp : ad.draw.components) {
      write_doubles(os, comp.location.data(),
                    static_cast<std::size_t>(comp.location.size()));
      write_doubles(os, comp.scale.data(),
                    static_cast<std::size_t>(comp.scale.size()));
    }
  }
  if (!os) throw std::runtime_error("failed writing " + path);
}

DrawArchive read_archive(const std::string& path) {
  std::ifstream is = open_in(path, std::ios::binary);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, "BVMEMDRW", 8) != 0) {
    throw std::runtime_error(path + " is not a draw archive");
  }
  const auto version = read_pod<std::uint32_t>(is, "version");
  if (version != 1) {
    throw std::runtime_error(path + ": unsupported archive version " +
                             std::to_string(version));
  }
  DrawArchive archive;
  const auto tagLen = read_pod<std::uint32_t>(is, "model tag");
  require(tagLen < 64, "model tag too long");
  archive.model.resize(tagLen);
  is.read(archive.model.data(), tagLen);
  archive.d = static_cast<Eigen::Index>(read_pod<std::uint64_t>(is, "d"));
  archive.T = static_cast<Eigen::Index>(read_pod<std::uint64_t>(is, "T"));
  require(archive.d >= 1 && archive.d <= 64, "archive dimension out of range");
  archive.configHash = read_pod<std::uint64_t>(is, "config hash");
  archive.seed = read_pod<std::uint64_t>(is, "seed");
  archive.mu1 = Vector(archive.d);
  read_doubles(is, archive.mu1.data(), static_cast<std::size_t>(archive.d),
               "mu1");
  const auto count = read_pod<std::uint64_t>(is, "draw count");
  const Eigen::Index m = archive.d + 2 * archive.d * archive.d;
  archive.draws.reserve(count);
  for (std::uint64_t s = 0; s < count; ++s) {
    ArchivedDraw ad;
    ad.iteration = static_cast<long>(read_pod<std::int64_t>(is, "iteration"));
    ad.maxComponents = read_pod<std::int32_t>(is, "max components");
    ad.activeComponents = read_pod<std::int32_t>(is, "active components");
    ad.draw.truncation.K =
        static_cast<std::size_t>(read_pod<std::uint64_t>(is, "K"));
    ad.draw.truncation.residualMass = read_pod<double>(is, "residual mass");
    Vector eta(m);
    read_doubles(is, eta.data(), static_cast<std::size_t>(m), "eta");
    ad.draw.eta = from_eta(eta, archive.d);
    ad.draw.mixtureMean = Vector(archive.d);
    read_doubles(is, ad.draw.mixtureMean.data(),
                 static_cast<std::size_t>(archive.d), "mixture mean");
    const auto K = read_pod<std::uint64_t>(is, "weight count");
    require(K <= 100000, "archive component count out of range");
    ad.draw.weights.resize(K);
    read_doubles(is, ad.draw.weights.data(), K, "weights");
    ad.draw.components.resize(K);
    for (auto& comp : ad.draw.components) {
      comp.location = Vector(archive.d);
      read_doubles(is, comp.location.data(),
                   static_cast<std::size_t>(archive.d), "component location");
      comp.scale = Matrix(archive.d, archive.d);
      read_doubles(is, comp.scale.data(),
                   static_cast<std::size_t>(archive.d * archive.d),
                   "component scale");
    }
    archive.draws.push_back(std::move(ad));
  }
  return archive;
}

std::uint64_t config_hash(const RunConfig& config) {
  std::ostringstream oss;
  oss << "data=" << config.dataPath << "|cols=";
  for (const std::string& c : config.columns) oss << c << ",";
  oss << "|ann=" << (config.annualize ? 1 : 0);
  oss << "|seed=" << config.seed;
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "|it=%ld|burn=%ld|thin=%ld|alpha=%.17g|eps=%.17g|pv=%.17g"
                "|pw=%.17g|s1=%.17g|s2=%.17g|deg=%.17g|n0=%.17g"
                "|starts=%d|tol=%.17g",
                config.sampler.iterations, config.sampler.burnIn,
                config.sampler.thin, config.sampler.alpha,
                config.sampler.epsMeanTrunc, config.sampler.etaPriorVariance,
                config.sampler.proposalWeight, config.sampler.proposalScale1,
                config.sampler.proposalScale2, config.nwDegrees,
                config.nwPrecisionScale, config.baseline.multistarts,
                config.baseline.tolerance);
  oss << buf;
  return fnv1a_append(1469598103934665603ULL, oss.str());
}

std::string format_full(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void write_csv(const std::string& path,
               const std::vector<std::string>& comments,
               const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns) {
  require(header.size() == columns.size(), "header/column count mismatch");
  require(!columns.empty(), "no columns");
  for (const auto& col : columns) {
    require(col.size() == columns.front().size(), "ragged columns");
  }
  std::ofstream os = open_out(path, std::ios::out);
  for (const std::string& c : comments) os << "# " << c << "\n";
  for (std::size_t j = 0; j < header.size(); ++j) {
    os << (j == 0 ? "" : ",") << header[j];
  }
  os << "\n";
  for (std::size_t i = 0; i < columns.front().size(); ++i) {
    for (std::size_t j = 0; j < columns.size(); ++j) {
      os << (j == 0 ? "" : ",") << format_full(columns[j][i]);
    }
    os << "\n";
  }
}

}  // namespace bvmem
