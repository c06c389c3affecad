#pragma once

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>

#include "specmdp/errors.hpp"
#include "specmdp/montecarlo.hpp"

namespace specmdp::io {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// digests & formatting
// ---------------------------------------------------------------------------

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string digest_hex(std::string_view bytes) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv1a:%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

/// Shortest round-trip decimal; keeps CSV/JSON output byte-deterministic.
inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// JSON <-> domain types
// ---------------------------------------------------------------------------

inline json to_json(const InnovationLaw& law) {
  json j;
  j["family"] = family_name(law.family());
  j["variance"] = law.variance();
  if (law.family() == Family::scaled_mixture) {
    j["weight"] = law.mixture_weight();
    // spread as fed to the factory: s1^2 / variance
    j["spread"] = law.mixture_var1() / law.variance();
  }
  return j;
}

inline InnovationLaw law_from_json(const json& j) {
  if (!j.contains("family")) throw ValidationError("law: missing family");
  const std::string fam = j.at("family").get<std::string>();
  const double var = j.value("variance", 1.0);
  if (fam == "gaussian") return InnovationLaw::gaussian(var);
  if (fam == "uniform_symmetric") return InnovationLaw::uniform_symmetric(var);
  if (fam == "rademacher") return InnovationLaw::rademacher(var);
  if (fam == "scaled_mixture")
    return InnovationLaw::scaled_mixture(var, j.value("weight", 0.5),
                                         j.value("spread", 0.5));
  throw ValidationError("law: unknown family '" + fam + "'");
}

inline json to_json(const MACoefficients<double>& c) {
  json j;
  j["support_lo"] = c.support_lo();
  j["values"] = std::vector<double>(c.values().data(),
                                    c.values().data() + c.values().size());
  return j;
}

inline MACoefficients<double> coeffs_from_json(const json& j) {
  if (!j.contains("values")) throw ValidationError("coeffs: missing values");
  const auto vals = j.at("values").get<std::vector<double>>();
  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(vals.data(), vals.size());
  return MACoefficients<double>(j.value("support_lo", 0), std::move(v));
}

inline json to_json(const TorusFunction<double>& h) {
  json j;
  if (h.has_fourier()) {
    std::vector<double> coeffs;
    for (int k = h.min_lag(); k <= h.max_lag(); ++k) coeffs.push_back(h.fourier(k));
    j["fourier"] = {{"min_lag", h.min_lag()}, {"coeffs", coeffs}};
  }
  if (h.has_grid()) {
    const auto g = h.grid(h.stored_grid_size());
    j["grid"] = std::vector<double>(g.data(), g.data() + g.size());
  }
  return j;
}

inline TorusFunction<double> torus_from_json(const json& j) {
  if (j.contains("fourier")) {
    const auto& f = j.at("fourier");
    const auto coeffs = f.at("coeffs").get<std::vector<double>>();
    Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(coeffs.data(), coeffs.size());
    return TorusFunction<double>::from_fourier(f.value("min_lag", 0), std::move(v));
  }
  if (j.contains("grid")) {
    const auto g = j.at("grid").get<std::vector<double>>();
    Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(g.data(), g.size());
    return TorusFunction<double>::from_grid(std::move(v));
  }
  throw ValidationError("torus function: need 'fourier' or 'grid'");
}

// ---------------------------------------------------------------------------
// shortcut parsers: "iid", "ma1:0.5", "geom:0.9", "2cos", "const:c", files
// ---------------------------------------------------------------------------

inline json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ValidationError("bad JSON in " + path.string() + ": " + e.what());
  }
  return j;
}

inline double parse_number(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("cannot parse number '" + s + "' in " + what);
  }
}

/// Moving-average coefficient shortcuts for the canonical cases.
inline MACoefficients<double> parse_coeffs(const std::string& spec) {
  if (spec == "iid") return MACoefficients<double>::delta();
  if (spec.rfind("ma1:", 0) == 0)
    return MACoefficients<double>::ma1(parse_number(spec.substr(4), "ma1"));
  if (spec.rfind("geom:", 0) == 0)
    return MACoefficients<double>::geometric(parse_number(spec.substr(5), "geom"), 40);
  if (spec.rfind("@", 0) == 0) return coeffs_from_json(load_json_file(spec.substr(1)));
  if (!spec.empty() && (spec[0] == '{')) return coeffs_from_json(json::parse(spec));
  throw ValidationError("unknown coefficient spec '" + spec +
                        "' (try iid, ma1:b, geom:rho, @file.json)");
}

/// Torus-function shortcuts. Density shortcuts (ma1:, geom:, iid) expand to
/// the unit-variance spectral density of those coefficients.
inline TorusFunction<double> parse_torus(const std::string& spec) {
  if (spec == "1" || spec == "iid") return TorusFunction<double>::constant(1.0);
  if (spec == "2cos") {
    Eigen::VectorXd c(2);
    c << 0.0, 2.0;
    return TorusFunction<double>::from_cosines(c);
  }
  if (spec == "cos") {
    Eigen::VectorXd c(2);
    c << 0.0, 1.0;
    return TorusFunction<double>::from_cosines(c);
  }
  if (spec.rfind("const:", 0) == 0)
    return TorusFunction<double>::constant(parse_number(spec.substr(6), "const"));
  if (spec.rfind("ma1:", 0) == 0 || spec.rfind("geom:", 0) == 0)
    return spectral_density(parse_coeffs(spec), 1.0);
  if (spec.rfind("@", 0) == 0) return torus_from_json(load_json_file(spec.substr(1)));
  if (!spec.empty() && spec[0] == '{') return torus_from_json(json::parse(spec));
  throw ValidationError("unknown torus function spec '" + spec +
                        "' (try 1, const:c, 2cos, cos, ma1:b, geom:rho, @file.json)");
}

inline FunctionalDescriptor functional_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "identity") return FunctionalDescriptor::identity();
  if (kind == "product_lags") return FunctionalDescriptor::product_lags(j.value("lags", 0));
  if (kind == "quadratic_smooth") return FunctionalDescriptor::quadratic_smooth();
  throw ValidationError("functional: unknown kind '" + kind + "'");
}

inline json to_json(const FunctionalDescriptor& F) {
  json j;
  switch (F.kind()) {
    case FunctionalKind::identity: j["kind"] = "identity"; break;
    case FunctionalKind::product_lags:
      j["kind"] = "product_lags";
      j["lags"] = F.lags();
      break;
    case FunctionalKind::quadratic_smooth: j["kind"] = "quadratic_smooth"; break;
  }
  return j;
}

// ---------------------------------------------------------------------------
// experiment config
// ---------------------------------------------------------------------------

inline json to_json(const ExperimentConfig& cfg) {
  json j;
  j["coeffs"] = to_json(cfg.coeffs);
  j["law"] = to_json(cfg.law);
  j["n_ladder"] = cfg.n_ladder;
  j["replicates"] = cfg.replicates;
  j["b_exponent"] = cfg.b_exponent;
  j["lags"] = cfg.lags;
  if (cfg.h) j["h"] = to_json(*cfg.h);
  if (cfg.functional) j["functional"] = to_json(*cfg.functional);
  j["threshold_x"] = cfg.threshold_x;
  if (!cfg.lambda_grid.empty()) j["lambda_grid"] = cfg.lambda_grid;
  j["master_seed"] = cfg.master_seed;
  j["tolerance"] = {{"std_error_multiple", cfg.tolerance.std_error_multiple},
                    {"relative", cfg.tolerance.relative}};
  // workers deliberately left out: results do not depend on it
  return j;
}

inline ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg;
  if (j.contains("coeffs")) {
    if (j.at("coeffs").is_string())
      cfg.coeffs = parse_coeffs(j.at("coeffs").get<std::string>());
    else
      cfg.coeffs = coeffs_from_json(j.at("coeffs"));
  }
  if (j.contains("law")) cfg.law = law_from_json(j.at("law"));
  if (j.contains("n_ladder"))
    cfg.n_ladder = j.at("n_ladder").get<std::vector<Eigen::Index>>();
  if (j.contains("replicates")) cfg.replicates = j.at("replicates").get<Eigen::Index>();
  if (j.contains("b_exponent")) cfg.b_exponent = j.at("b_exponent").get<double>();
  if (j.contains("lags")) cfg.lags = j.at("lags").get<int>();
  if (j.contains("h")) {
    if (j.at("h").is_string())
      cfg.h = parse_torus(j.at("h").get<std::string>());
    else
      cfg.h = torus_from_json(j.at("h"));
  }
  if (j.contains("functional")) cfg.functional = functional_from_json(j.at("functional"));
  if (j.contains("threshold_x")) cfg.threshold_x = j.at("threshold_x").get<double>();
  if (j.contains("lambda_grid"))
    cfg.lambda_grid = j.at("lambda_grid").get<std::vector<double>>();
  if (j.contains("master_seed")) cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
  if (j.contains("tolerance")) {
    cfg.tolerance.std_error_multiple =
        j.at("tolerance").value("std_error_multiple", 5.0);
    cfg.tolerance.relative = j.at("tolerance").value("relative", 0.05);
  }
  if (j.contains("workers")) cfg.workers = j.at("workers").get<int>();
  cfg.validate();
  return cfg;
}

inline std::string config_digest(const ExperimentConfig& cfg) {
  return digest_hex(to_json(cfg).dump());
}

// ---------------------------------------------------------------------------
// CSV writers (deterministic: %.17g floats, '\n' line ends)
// ---------------------------------------------------------------------------

inline void write_text_file(const std::filesystem::path& path,
                            const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("write failed for " + path.string());
}

inline std::string csv_of_report(const ExperimentReport& report) {
  std::ostringstream os;
  os << "n,label,estimate,std_error,analytic_target,abs_error,pass\n";
  for (const auto& r : report.rows)
    os << r.n << ',' << r.label << ',' << fmt(r.estimate) << ','
       << fmt(r.std_error) << ',' << fmt(r.analytic_target) << ','
       << fmt(r.abs_error) << ',' << (r.pass ? 1 : 0) << '\n';
  return os.str();
}

inline std::string csv_of_grid(const Eigen::VectorXd& values) {
  std::ostringstream os;
  os << "theta,value\n";
  const Eigen::Index G = values.size();
  for (Eigen::Index m = 0; m < G; ++m)
    os << fmt(grid_theta<double>(G, m)) << ',' << fmt(values[m]) << '\n';
  return os.str();
}

inline std::string csv_of_column(const Eigen::VectorXd& values,
                                 const std::string& header) {
  std::ostringstream os;
  os << header << '\n';
  for (Eigen::Index i = 0; i < values.size(); ++i) os << fmt(values[i]) << '\n';
  return os.str();
}

inline std::string csv_of_matrix(const Eigen::MatrixXd& M) {
  std::ostringstream os;
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      if (j) os << ',';
      os << fmt(M(i, j));
    }
    os << '\n';
  }
  return os.str();
}

struct TraceTableRow {
  Eigen::Index n;
  double value;
  double limit;
  double error;
};

inline std::string csv_of_trace_table(const std::vector<TraceTableRow>& rows) {
  std::ostringstream os;
  os << "n,value,limit,error\n";
  for (const auto& r : rows)
    os << r.n << ',' << fmt(r.value) << ',' << fmt(r.limit) << ',' << fmt(r.error)
       << '\n';
  return os.str();
}

// ---------------------------------------------------------------------------
// run directory with manifest
// ---------------------------------------------------------------------------

/// Collects output files under a directory and finishes with a manifest that
/// echoes the fully-resolved config and a content digest per file. Nothing
/// time-dependent goes into the files, so equal configs give byte-identical
/// runs.
class RunWriter {
 public:
  RunWriter(std::filesystem::path dir, std::string command, json resolved_config)
      : dir_(std::move(dir)),
        command_(std::move(command)),
        resolved_(std::move(resolved_config)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create output directory " + dir_.string());
  }

  void emit(const std::string& name, const std::string& content) {
    write_text_file(dir_ / name, content);
    outputs_[name] = digest_hex(content);
  }

  std::filesystem::path finish() {
    json manifest;
    manifest["command"] = command_;
    manifest["resolved_config"] = resolved_;
    manifest["outputs"] = outputs_;
    const auto path = dir_ / "manifest.json";
    write_text_file(path, manifest.dump(2) + "\n");
    return path;
  }

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::string command_;
  json resolved_;
  std::map<std::string, std::string> outputs_;
};

inline json report_to_json(const ExperimentReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows)
    rows.push_back({{"n", r.n},
                    {"label", r.label},
                    {"estimate", r.estimate},
                    {"std_error", r.std_error},
                    {"analytic_target", r.analytic_target},
                    {"abs_error", r.abs_error},
                    {"pass", r.pass}});
  return {{"experiment", report.experiment},
          {"rows", rows},
          {"config_digest", report.config_digest},
          {"overall_pass", report.overall_pass}};
}

}  // namespace specmdp::io
