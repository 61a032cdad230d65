// Batch front end: ingest statistics or raw two-group data, compute
// discrimination information under the configured weighting schemes, run the
// Monte Carlo verification harness, and emit JSON/CSV reports.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nmwl/evidence.hpp"
#include "nmwl/mcverify.hpp"

using nlohmann::ordered_json;
using namespace nmwl;

namespace {

constexpr int kExitParse = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitVerification = 4;

#ifndef NMWL_DATA_DIR
#define NMWL_DATA_DIR "data"
#endif

struct CliError {
  int code;
  std::string message;
};

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, sep)) out.push_back(trim(cell));
  if (!line.empty() && line.back() == sep) out.push_back("");
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw CliError{kExitParse, "cannot parse number '" + s + "' in " + where};
  }
}

int parse_int(const std::string& s, const std::string& where) {
  const double v = parse_double(s, where);
  const int k = static_cast<int>(v);
  if (k != v) throw CliError{kExitParse, "expected integer in " + where};
  return k;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

/// key = value lines, '#' comments.
std::map<std::string, std::string> read_kv_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CliError{kExitParse, "cannot open config file " + path};
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw CliError{kExitParse, "config line without '=': " + line};
    }
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

struct ToleranceSettings {
  QuadratureConfig quad;
  OptimConfig optim;
};

ToleranceSettings tolerances_from_config(const std::string& path) {
  ToleranceSettings t;
  if (path.empty()) return t;
  const auto kv = read_kv_config(path);
  for (const auto& [key, value] : kv) {
    if (key == "theta_tol") {
      t.optim.theta_tol = parse_double(value, key);
    } else if (key == "max_expansions") {
      t.optim.max_expansions = parse_int(value, key);
    } else if (key == "grid_points") {
      t.optim.grid_points = parse_int(value, key);
    } else if (key == "rel_tol") {
      t.quad.rel_tol = parse_double(value, key);
    } else if (key == "abs_tol") {
      t.quad.abs_tol = parse_double(value, key);
    } else if (key == "truncation_mass") {
      t.quad.truncation_mass = parse_double(value, key);
    } else if (key == "max_subdivisions") {
      t.quad.max_subdivisions = parse_int(value, key);
    } else {
      throw CliError{kExitParse, "unknown config key: " + key};
    }
  }
  return t;
}

// ---------------------------------------------------------------------------
// Input files
// ---------------------------------------------------------------------------

ComparisonSet load_statistics_csv(const std::string& path,
                                  const std::string& family_flag) {
  std::ifstream in(path);
  if (!in) throw CliError{kExitParse, "cannot open input file " + path};
  std::string header;
  if (!std::getline(in, header)) {
    throw CliError{kExitParse, "empty input file " + path};
  }
  const std::vector<std::string> cols = split(header, ',');
  std::map<std::string, std::size_t> col;
  for (std::size_t k = 0; k < cols.size(); ++k) col[cols[k]] = k;
  if (!col.count("id") || !col.count("t")) {
    throw CliError{kExitParse, "header must name 'id' and 't' columns"};
  }

  const bool has_sigma = col.count("sigma") > 0;
  const bool has_groups = col.count("m") > 0 && col.count("n") > 0;
  std::string family = family_flag;
  if (family.empty()) family = has_sigma ? "normal" : "folded-t";
  if (family == "normal" && !has_sigma) {
    throw CliError{kExitParse, "normal family input needs a 'sigma' column"};
  }
  if (family == "folded-t" && !has_groups) {
    throw CliError{kExitParse, "folded-t input needs 'm' and 'n' columns"};
  }

  ComparisonSet obs;
  std::string line;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split(line, ',');
    auto cell = [&](const std::string& name) -> const std::string& {
      const std::size_t k = col.at(name);
      if (k >= cells.size()) {
        throw CliError{kExitParse, "row " + std::to_string(line_no) +
                                       " is missing column '" + name + "'"};
      }
      return cells[k];
    };
    ReducedObservation o;
    o.id = cell("id");
    const std::string where = "row '" + o.id + "'";
    o.statistic = parse_double(cell("t"), where);
    try {
      if (family == "normal") {
        o.family = FamilyInstance::normal(parse_double(cell("sigma"), where));
        o.sample_size = 1;
      } else {
        const int m = parse_int(cell("m"), where);
        const int n = parse_int(cell("n"), where);
        o.family = FamilyInstance::folded_t(m, n);
        o.sample_size = m + n;
      }
      if (col.count("n_i") && col.at("n_i") < cells.size() &&
          !cells[col.at("n_i")].empty()) {
        o.sample_size = parse_int(cells[col.at("n_i")], where);
        if (o.sample_size < 1) {
          throw InvalidParameter("sample size must be >= 1");
        }
      }
      if (!o.family.in_support(o.statistic)) {
        throw OutOfSupport("statistic outside the family support");
      }
    } catch (const Error& e) {
      throw CliError{kExitParse, where + ": " + e.what()};
    }
    obs.push_back(std::move(o));
  }
  if (obs.empty()) {
    throw CliError{kExitParse, "no data rows in " + path};
  }
  return obs;
}

// ---------------------------------------------------------------------------
// Weight schemes and custom weights
// ---------------------------------------------------------------------------

struct CustomWeights {
  std::map<std::string, WeightRow> rows;  // by focus id
};

CustomWeights load_custom_weights(const std::string& path,
                                  const ComparisonSet& obs) {
  std::ifstream in(path);
  if (!in) throw CliError{kExitParse, "cannot open weights file " + path};
  ordered_json doc;
  try {
    in >> doc;
  } catch (const std::exception& e) {
    throw CliError{kExitParse, std::string("weights file: ") + e.what()};
  }
  std::map<std::string, int> index;
  for (std::size_t j = 0; j < obs.size(); ++j) {
    index[obs[j].id] = static_cast<int>(j);
  }
  CustomWeights custom;
  for (const auto& entry : doc.at("rows")) {
    WeightRow row;
    const std::string focus = entry.at("focus").get<std::string>();
    if (!index.count(focus)) {
      throw CliError{kExitParse, "weights name unknown id '" + focus + "'"};
    }
    row.focus_index = index[focus];
    row.weights.assign(obs.size(), 0.0);
    for (const auto& [id, w] : entry.at("weights").items()) {
      if (!index.count(id)) {
        throw CliError{kExitParse, "weights name unknown id '" + id + "'"};
      }
      row.weights[index[id]] = w.get<double>();
    }
    if (entry.contains("pseudo_weight")) {
      row.pseudo_weight = entry["pseudo_weight"].get<double>();
      row.pseudo_statistic = entry.at("pseudo_statistic").get<double>();
    }
    const auto violations = validate_weights(row);
    if (!violations.empty()) {
      std::string names;
      for (const auto& v : violations) names += " " + to_string(v);
      throw CliError{kExitParse,
                     "custom weights for '" + focus + "' violate:" + names};
    }
    custom.rows[focus] = std::move(row);
  }
  return custom;
}

struct SchemeRow {
  WeightRow row;
  ComparisonSet subset;  // the comparison set the row refers to
  int focus = 0;         // focus index within `subset`
};

/// Assemble the weight row (and the comparison subset it applies to) for
/// focus i under the named scheme.
SchemeRow scheme_row(const std::string& scheme, int i,
                     const ComparisonSet& obs, double theta0,
                     const CustomWeights* custom) {
  SchemeRow out;
  const int N = static_cast<int>(obs.size());
  const int n_i = obs[i].sample_size;
  if (scheme == "sites") {
    out.row = single_observation_weights(i, n_i, N);
    out.subset = obs;
    out.focus = i;
  } else if (scheme == "null") {
    const double t0 = null_pseudo_statistic(obs[i].family, theta0);
    out.row = null_pseudo_weights(n_i, t0);
    out.subset = {obs[i]};
    out.focus = 0;
  } else if (scheme == "blended") {
    const double t0 = null_pseudo_statistic(obs[i].family, theta0);
    out.row = blended_weights(i, n_i, N, t0);
    out.subset = obs;
    out.focus = i;
  } else if (scheme == "custom") {
    const auto it = custom->rows.find(obs[i].id);
    if (it == custom->rows.end()) {
      throw CliError{kExitParse,
                     "no custom weights for id '" + obs[i].id + "'"};
    }
    out.row = it->second;
    out.subset = obs;
    out.focus = i;
  } else {
    throw CliError{kExitParse, "unknown weight scheme: " + scheme};
  }
  return out;
}

// ---------------------------------------------------------------------------
// Analysis
// ---------------------------------------------------------------------------

struct AnalyzedRow {
  std::string id;
  std::string scheme;
  std::optional<double> di_exact;
  std::optional<double> di_approx;
  EvidenceGrade grade_value = EvidenceGrade::Negligible;
  Favors favors = Favors::Alternative;
  double regret_bits = 0.0;
};

struct AnalysisSettings {
  std::vector<std::string> schemes;
  std::vector<ComplexityMode> modes;
  double theta0 = 0.0;
  std::string alt = "two-sided";
  int workers = 0;
  ToleranceSettings tol;
};

ParameterSpace alt_space(const AnalysisSettings& cfg) {
  if (cfg.alt == "two-sided") return ParameterSpace::punctured(cfg.theta0);
  if (cfg.alt == "nonneg") return ParameterSpace::half_line_nonneg();
  throw CliError{kExitParse, "unknown alternative: " + cfg.alt};
}

void run_parallel(int count, int workers, const std::function<void(int)>& fn) {
  int n_workers = workers > 0
                      ? workers
                      : static_cast<int>(std::thread::hardware_concurrency());
  n_workers = std::clamp(n_workers, 1, std::max(1, count));
  if (n_workers == 1) {
    for (int k = 0; k < count; ++k) fn(k);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < n_workers; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        const int k = next.fetch_add(1);
        if (k >= count) return;
        try {
          fn(k);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<AnalyzedRow> analyze_set(const ComparisonSet& obs,
                                     const AnalysisSettings& cfg,
                                     const CustomWeights* custom) {
  const ParameterSpace alt = alt_space(cfg);
  const ParameterSpace null_space = ParameterSpace::singleton(cfg.theta0);
  std::vector<AnalyzedRow> rows(obs.size() * cfg.schemes.size());
  ComplexityCache cache;

  for (std::size_t s = 0; s < cfg.schemes.size(); ++s) {
    const std::string& scheme = cfg.schemes[s];
    std::vector<std::string> failures(obs.size());
    run_parallel(static_cast<int>(obs.size()), cfg.workers, [&](int i) {
      AnalyzedRow& out = rows[s * obs.size() + i];
      out.id = obs[i].id;
      out.scheme = scheme;
      try {
        const SchemeRow sr = scheme_row(scheme, i, obs, cfg.theta0, custom);
        for (ComplexityMode mode : cfg.modes) {
          const EvidenceReport report = discrimination_information(
              sr.focus, alt, null_space, sr.row, sr.subset, mode,
              cfg.tol.quad, cfg.tol.optim, &cache, scheme);
          if (mode == ComplexityMode::Exact) {
            out.di_exact = report.di_bits;
            out.grade_value = report.evidence_grade;
            out.favors = report.favors;
            out.regret_bits = report.regret_bits;
          } else {
            out.di_approx = report.di_bits;
            if (!out.di_exact) {
              out.grade_value = report.evidence_grade;
              out.favors = report.favors;
              out.regret_bits = report.regret_bits;
            }
          }
        }
      } catch (const CliError&) {
        throw;
      } catch (const Error& e) {
        failures[i] = e.what();
      }
    });
    for (std::size_t i = 0; i < obs.size(); ++i) {
      if (!failures[i].empty()) {
        throw CliError{kExitNumerical,
                       "comparison '" + obs[i].id + "': " + failures[i]};
      }
    }
  }
  return rows;
}

ordered_json rows_to_json(const std::vector<AnalyzedRow>& rows) {
  ordered_json arr = ordered_json::array();
  for (const AnalyzedRow& r : rows) {
    ordered_json o;
    o["id"] = r.id;
    o["scheme"] = r.scheme;
    if (r.di_exact) o["di_bits_exact"] = *r.di_exact;
    if (r.di_approx) o["di_bits_approx"] = *r.di_approx;
    o["grade"] = to_string(r.grade_value);
    o["favors"] = to_string(r.favors);
    o["regret_bits"] = r.regret_bits;
    arr.push_back(std::move(o));
  }
  return arr;
}

/// Paired per-id table across the first two schemes, with a grade-agreement
/// flag; the Fig. 1 / Fig. 3 analogue.
ordered_json paired_table(const std::vector<AnalyzedRow>& rows,
                          std::size_t n_ids,
                          const std::vector<std::string>& schemes) {
  ordered_json arr = ordered_json::array();
  for (std::size_t i = 0; i < n_ids; ++i) {
    ordered_json o;
    o["id"] = rows[i].id;
    EvidenceGrade first_grade = EvidenceGrade::Negligible;
    bool agree = true;
    for (std::size_t s = 0; s < schemes.size(); ++s) {
      const AnalyzedRow& r = rows[s * n_ids + i];
      const std::string suffix = "_" + r.scheme;
      if (r.di_exact) o["di_bits_exact" + suffix] = *r.di_exact;
      if (r.di_approx) o["di_bits_approx" + suffix] = *r.di_approx;
      o["grade" + suffix] = to_string(r.grade_value);
      if (s == 0) {
        first_grade = r.grade_value;
      } else if (r.grade_value != first_grade) {
        agree = false;
      }
    }
    o["grade_agreement"] = agree;
    arr.push_back(std::move(o));
  }
  return arr;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CliError{kExitParse, "cannot write " + path};
  out << text;
}

std::string rows_to_csv(const std::vector<AnalyzedRow>& rows) {
  std::string csv =
      "id,di_bits_exact,di_bits_approx,grade,favors,regret_bits,scheme\n";
  for (const AnalyzedRow& r : rows) {
    csv += r.id + ',';
    csv += (r.di_exact ? format_double(*r.di_exact) : std::string()) + ',';
    csv += (r.di_approx ? format_double(*r.di_approx) : std::string()) + ',';
    csv += to_string(r.grade_value) + ',';
    csv += to_string(r.favors) + ',';
    csv += format_double(r.regret_bits) + ',';
    csv += r.scheme + '\n';
  }
  return csv;
}

std::string plot_pairs_csv(const std::vector<AnalyzedRow>& rows,
                           std::size_t n_ids) {
  // Long-form series for external plotting: series, x (comparison index), y.
  std::string csv = "series,x,y\n";
  for (const AnalyzedRow& r : rows) {
    const std::size_t i = (&r - rows.data()) % n_ids;
    if (r.di_exact) {
      csv += "di_exact_" + r.scheme + ',' + std::to_string(i + 1) + ',' +
             format_double(*r.di_exact) + '\n';
    }
    if (r.di_approx) {
      csv += "di_approx_" + r.scheme + ',' + std::to_string(i + 1) + ',' +
             format_double(*r.di_approx) + '\n';
    }
  }
  return csv;
}

void emit_analysis(const std::vector<AnalyzedRow>& rows, std::size_t n_ids,
                   const AnalysisSettings& cfg, const std::string& out,
                   const std::string& format, const std::string& input) {
  if (format == "csv") {
    write_text(out, rows_to_csv(rows));
  } else if (format == "json") {
    ordered_json doc;
    doc["input"] = input;
    doc["null_point"] = cfg.theta0;
    doc["alternative"] = cfg.alt;
    doc["schemes"] = cfg.schemes;
    ordered_json modes = ordered_json::array();
    for (ComplexityMode m : cfg.modes) {
      modes.push_back(m == ComplexityMode::Exact ? "exact" : "approx");
    }
    doc["modes"] = modes;
    doc["rows"] = rows_to_json(rows);
    if (cfg.schemes.size() > 1) {
      doc["paired"] = paired_table(rows, n_ids, cfg.schemes);
    }
    write_text(out, doc.dump(2) + "\n");
  } else {
    throw CliError{kExitParse, "unknown format: " + format};
  }
  if (cfg.schemes.size() > 1) {
    write_text(out + "_plot.csv", plot_pairs_csv(rows, n_ids));
  }
}

// ---------------------------------------------------------------------------
// reduce
// ---------------------------------------------------------------------------

std::string reduce_raw_file(const std::string& input) {
  std::ifstream in(input);
  if (!in) throw CliError{kExitParse, "cannot open input file " + input};
  std::string header;
  if (!std::getline(in, header)) {
    throw CliError{kExitParse, "empty input file " + input};
  }
  const auto cols = split(header, ',');
  std::map<std::string, std::size_t> col;
  for (std::size_t k = 0; k < cols.size(); ++k) col[cols[k]] = k;
  for (const char* need : {"feature_id", "group", "value"}) {
    if (!col.count(need)) {
      throw CliError{kExitParse,
                     std::string("raw header must name '") + need + "'"};
    }
  }

  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>>
      features;
  std::string line;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() < cols.size()) {
      throw CliError{kExitParse, "short row at line " +
                                     std::to_string(line_no)};
    }
    const std::string& id = cells[col["feature_id"]];
    const std::string& group = cells[col["group"]];
    const double value = parse_double(cells[col["value"]],
                                      "line " + std::to_string(line_no));
    if (group == "case") {
      features[id].first.push_back(value);
    } else if (group == "control") {
      features[id].second.push_back(value);
    } else {
      throw CliError{kExitParse, "group must be 'case' or 'control', got '" +
                                     group + "'"};
    }
  }
  if (features.empty()) {
    throw CliError{kExitParse, "no data rows in " + input};
  }

  std::string csv = "id,t,m,n\n";
  std::vector<std::string> bad;
  for (const auto& [id, groups] : features) {  // std::map: ordered by id
    try {
      const ReducedObservation obs =
          reduce_two_sample(groups.first, groups.second, id);
      csv += id + ',' + format_double(obs.statistic) + ',' +
             std::to_string(obs.family.group_m) + ',' +
             std::to_string(obs.family.group_n) + '\n';
    } catch (const Error& e) {
      bad.push_back(id + " (" + e.what() + ")");
    }
  }
  if (!bad.empty()) {
    std::string list;
    for (const std::string& b : bad) list += "\n  " + b;
    throw CliError{kExitParse, "features could not be reduced:" + list};
  }
  return csv;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

std::vector<double> parse_double_list(const std::string& s,
                                      const std::string& where) {
  std::vector<double> out;
  for (const std::string& part : split(s, ',')) {
    if (!part.empty()) out.push_back(parse_double(part, where));
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& s,
                                const std::string& where) {
  std::vector<int> out;
  for (const std::string& part : split(s, ',')) {
    if (!part.empty()) out.push_back(parse_int(part, where));
  }
  return out;
}

ordered_json report_to_json(const VerificationReport& report) {
  ordered_json doc;
  doc["kind"] = report.kind;
  doc["seed"] = report.seed;
  doc["replicates"] = report.replicates;
  doc["passed"] = report.passed;
  if (!report.note.empty()) doc["note"] = report.note;
  if (!report.exceedance.empty()) {
    ordered_json arr = ordered_json::array();
    for (const ThresholdRate& tr : report.exceedance) {
      arr.push_back({{"k", tr.k},
                     {"rate", tr.rate},
                     {"std_error", tr.std_error},
                     {"bound", 1.0 / tr.k},
                     {"pass", tr.pass}});
    }
    doc["exceedance"] = arr;
  }
  if (!report.gaps.empty()) {
    ordered_json arr = ordered_json::array();
    for (const ComplexityGap& g : report.gaps) {
      arr.push_back({{"comparisons", g.comparisons},
                     {"mean_abs_gap_nats", g.mean_abs_gap},
                     {"std_error", g.std_error}});
    }
    doc["complexity_gaps"] = arr;
  }
  if (!report.trend.empty()) {
    ordered_json arr = ordered_json::array();
    for (const TrendPoint& t : report.trend) {
      arr.push_back(
          {{"n", t.n}, {"rate", t.rate}, {"std_error", t.std_error}});
    }
    doc["trend"] = arr;
  }
  if (!report.asymptotic.empty()) {
    ordered_json arr = ordered_json::array();
    for (const AsymptoticGap& g : report.asymptotic) {
      arr.push_back({{"n", g.n}, {"abs_gap_nats", g.abs_gap}});
    }
    doc["asymptotic_gaps"] = arr;
  }
  return doc;
}

int run_simulate(const std::string& config_path, const std::string& out,
                 std::optional<std::uint64_t> seed_override, int workers,
                 const ToleranceSettings& tol) {
  const auto kv = read_kv_config(config_path);
  auto get = [&](const std::string& key,
                 const std::string& fallback) -> std::string {
    const auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
  };

  SimulationConfig cfg;
  const std::string family = get("family", "normal");
  if (family == "normal") {
    cfg.family = FamilyInstance::normal(parse_double(get("sigma", "1"),
                                                     "sigma"));
  } else if (family == "folded_t" || family == "folded-t") {
    cfg.family = FamilyInstance::folded_t(parse_int(get("m", "5"), "m"),
                                          parse_int(get("n", "5"), "n"));
  } else {
    throw CliError{kExitParse, "unknown family: " + family};
  }
  cfg.theta_true = parse_double(get("theta_true", "0"), "theta_true");
  cfg.theta0 = parse_double(get("theta0", "0"), "theta0");
  cfg.comparisons = parse_int(get("comparisons", "1"), "comparisons");
  cfg.replicates = parse_int(get("replicates", "10000"), "replicates");
  cfg.seed = static_cast<std::uint64_t>(
      parse_double(get("seed", "20260810"), "seed"));
  if (seed_override) cfg.seed = *seed_override;
  cfg.weight_scheme = get("weight_scheme", "null");
  cfg.thresholds = parse_double_list(get("thresholds", "10,100"),
                                     "thresholds");
  cfg.sample_size = parse_int(
      get("sample_size",
          family == "normal"
              ? "1"
              : std::to_string(cfg.family.group_m + cfg.family.group_n)),
      "sample_size");
  cfg.workers = workers;

  const std::string alt = get("alt", "two-sided");
  ParameterSpace theta1 = ParameterSpace::punctured(cfg.theta0);
  if (alt == "nonneg") theta1 = ParameterSpace::half_line_nonneg();

  const std::string kind = get("kind", "misleading");
  VerificationReport report;
  try {
    if (kind == "misleading") {
      report = misleading_evidence_rate(cfg, cfg.theta0, theta1, tol.quad,
                                        tol.optim);
    } else if (kind == "convergence") {
      const std::vector<int> Ns = parse_int_list(get("Ns", "5,50"), "Ns");
      report = complexity_convergence(cfg, Ns, tol.quad, tol.optim);
    } else if (kind == "trend") {
      const std::vector<int> grid =
          parse_int_list(get("n_grid", "4,16,64"), "n_grid");
      report = interpretability_trend(cfg, grid,
                                      parse_double(get("k", "8"), "k"),
                                      tol.quad, tol.optim);
    } else if (kind == "asymptotic") {
      const std::vector<int> grid =
          parse_int_list(get("n_grid", "1,4,16,64"), "n_grid");
      report = asymptotic_complexity_trend(
          grid, parse_double(get("sigma", "1"), "sigma"),
          ParameterSpace::bounded(parse_double(get("lo", "0"), "lo"),
                                  parse_double(get("hi", "1"), "hi")),
          tol.quad, tol.optim);
    } else {
      throw CliError{kExitParse, "unknown simulation kind: " + kind};
    }
  } catch (const ConfigError& e) {
    throw CliError{kExitParse, e.what()};
  }

  write_text(out, report_to_json(report).dump(2) + "\n");
  return report.passed ? 0 : kExitVerification;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrimination information via normalized maximum weighted "
               "likelihood"};
  app.require_subcommand(1);

  std::string input, out = "report.json", format = "json";
  std::string family_flag, weights_flag = "sites", mode_flag = "exact";
  std::string alt_flag = "two-sided", config_path, weights_file;
  double null_point = 0.0;
  int workers = 0;
  std::optional<std::uint64_t> seed;

  CLI::App* analyze = app.add_subcommand(
      "analyze", "Evidence report for a statistics file");
  analyze->add_option("input", input, "statistics CSV")->required();
  analyze->add_option("--family", family_flag,
                      "normal | folded-t (default: inferred from header)");
  analyze->add_option("--weights", weights_flag,
                      "sites | null | blended | custom (comma list allowed)");
  analyze->add_option("--weights-file", weights_file,
                      "JSON custom weight rows");
  analyze->add_option("--mode", mode_flag, "exact | approx | both");
  analyze->add_option("--null", null_point, "null hypothesis point");
  analyze->add_option("--alt", alt_flag, "two-sided | nonneg");
  analyze->add_option("--out", out, "output path");
  analyze->add_option("--format", format, "json | csv");
  analyze->add_option("--workers", workers, "worker threads (0 = all)");
  analyze->add_option("--config", config_path, "tolerance config file");

  std::string raw_input, reduce_out = "statistics.csv";
  CLI::App* reduce = app.add_subcommand(
      "reduce", "Reduce raw two-group data to folded-t statistics");
  reduce->add_option("input", raw_input, "long CSV: feature_id,group,value")
      ->required();
  reduce->add_option("--out", reduce_out, "output statistics CSV");

  std::string schools_out = "schools_report.json";
  std::string schools_data = std::string(NMWL_DATA_DIR) + "/eight_sites.csv";
  CLI::App* schools = app.add_subcommand(
      "schools", "Bundled eight-sites case study, both schemes and modes");
  schools->add_option("--out", schools_out, "output path");
  schools->add_option("--data", schools_data, "sites statistics CSV");
  schools->add_option("--format", format, "json | csv");
  schools->add_option("--workers", workers, "worker threads");
  schools->add_option("--config", config_path, "tolerance config file");

  std::string sim_config, sim_out = "verification.json";
  CLI::App* simulate = app.add_subcommand(
      "simulate", "Monte Carlo verification harness");
  simulate->add_option("config-path", sim_config, "simulation config file")
      ->required();
  simulate->add_option("--out", sim_out, "output report path");
  simulate
      ->add_option("--seed", seed, "override the config seed")
      ->type_name("UINT");
  simulate->add_option("--workers", workers, "worker threads");
  simulate->add_option("--config", config_path, "tolerance config file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitParse;
  }

  try {
    const ToleranceSettings tol = tolerances_from_config(config_path);

    if (analyze->parsed()) {
      AnalysisSettings cfg;
      cfg.theta0 = null_point;
      cfg.alt = alt_flag;
      cfg.workers = workers;
      cfg.tol = tol;
      std::string normalized = weights_flag == "both" ? "sites,null"
                                                      : weights_flag;
      for (const std::string& s : split(normalized, ',')) {
        if (!s.empty()) cfg.schemes.push_back(s);
      }
      if (mode_flag == "both") {
        cfg.modes = {ComplexityMode::Exact, ComplexityMode::Approximate};
      } else if (mode_flag == "exact") {
        cfg.modes = {ComplexityMode::Exact};
      } else if (mode_flag == "approx") {
        cfg.modes = {ComplexityMode::Approximate};
      } else {
        throw CliError{kExitParse, "unknown mode: " + mode_flag};
      }

      const ComparisonSet obs = load_statistics_csv(input, family_flag);
      CustomWeights custom;
      const bool needs_custom =
          std::find(cfg.schemes.begin(), cfg.schemes.end(), "custom") !=
          cfg.schemes.end();
      if (needs_custom) {
        if (weights_file.empty()) {
          throw CliError{kExitParse,
                         "--weights custom requires --weights-file"};
        }
        custom = load_custom_weights(weights_file, obs);
      }
      const auto rows =
          analyze_set(obs, cfg, needs_custom ? &custom : nullptr);
      emit_analysis(rows, obs.size(), cfg, out, format, input);
      return 0;
    }

    if (reduce->parsed()) {
      write_text(reduce_out, reduce_raw_file(raw_input));
      return 0;
    }

    if (schools->parsed()) {
      AnalysisSettings cfg;
      cfg.schemes = {"sites", "null"};
      cfg.modes = {ComplexityMode::Exact, ComplexityMode::Approximate};
      cfg.theta0 = 0.0;
      cfg.alt = "two-sided";
      cfg.workers = workers;
      cfg.tol = tol;
      const ComparisonSet obs = load_statistics_csv(schools_data, "normal");
      const auto rows = analyze_set(obs, cfg, nullptr);
      emit_analysis(rows, obs.size(), cfg, schools_out, format, schools_data);
      return 0;
    }

    if (simulate->parsed()) {
      return run_simulate(sim_config, sim_out, seed, workers, tol);
    }
  } catch (const CliError& e) {
    std::cerr << "error: " << e.message << "\n";
    return e.code;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  }
  return 0;
}
