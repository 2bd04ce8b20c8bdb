#pragma once

#include <charconv>
#include <chrono>
#include <ctime>
#include <limits>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "khop/analysis.hpp"
#include "khop/config.hpp"
#include "khop/experiments.hpp"

namespace khop {

inline constexpr std::string_view kToolVersion = "0.3.0";

inline constexpr std::string_view kTrialHeader =
    "master_seed,n,p,load,similarity,rule,gamma,lambda,pattern_idx,trial_idx,classification,steps,"
    "hamming_nearest,nearest_idx";

// 17 significant digits, lossless for doubles.
inline std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline double parse_real(std::string_view s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  return std::stod(std::string(s));
}

template <class T>
T parse_uint(std::string_view s) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw std::invalid_argument("not an unsigned integer: '" + std::string(s) + "'");
  return v;
}

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.emplace_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

// Plain comma-separated table with a header line. Fields never contain
// commas or quotes.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  bool has(std::string_view col) const {
    for (const auto& h : header)
      if (h == col) return true;
    return false;
  }
  std::size_t index(std::string_view col) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == col) return i;
    throw std::invalid_argument("missing column '" + std::string(col) + "'");
  }
  std::vector<double> reals(std::string_view col) const {
    const std::size_t i = index(col);
    std::vector<double> v;
    v.reserve(rows.size());
    for (const auto& r : rows) v.push_back(parse_real(r.at(i)));
    return v;
  }
  std::vector<std::string> strings(std::string_view col) const {
    const std::size_t i = index(col);
    std::vector<std::string> v;
    for (const auto& r : rows) v.push_back(r.at(i));
    return v;
  }
};

inline CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (first) {
      t.header = std::move(fields);
      first = false;
    } else {
      if (fields.size() != t.header.size())
        throw std::invalid_argument("csv: row has " + std::to_string(fields.size()) + " fields, expected " +
                                    std::to_string(t.header.size()));
      t.rows.push_back(std::move(fields));
    }
  }
  if (first) throw std::invalid_argument("csv: missing header");
  return t;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

// ---- per-trial CSV ----

// Rows in canonical order; `records` need not be sorted.
inline std::string trial_csv(std::vector<TrialRecord> records) {
  if (records.empty()) throw std::invalid_argument("trial csv: no records");
  canonical_sort(records);
  std::string out(kTrialHeader);
  out += '\n';
  for (const auto& r : records) {
    const auto& k = r.condition;
    out += std::to_string(r.master_seed) + ',' + std::to_string(k.n) + ',' + std::to_string(k.p) + ',' +
           format_real(k.load) + ',' + format_real(k.similarity) + ',' + std::string(to_string(k.rule)) + ',' +
           format_real(k.gamma) + ',' + format_real(k.lambda) + ',' + std::to_string(r.pattern_idx) + ',' +
           std::to_string(r.trial_idx) + ',' + std::string(to_string(r.classification)) + ',' +
           std::to_string(r.steps) + ',' + std::to_string(r.hamming_nearest) + ',' + std::to_string(r.nearest_idx) +
           '\n';
  }
  return out;
}

inline void write_trial_csv(const std::vector<TrialRecord>& records, const std::filesystem::path& path) {
  write_file(path, trial_csv(records));
}

// Outcome is recovered from the classification (see implied_outcome).
inline std::vector<TrialRecord> parse_trial_csv(const std::string& text) {
  const CsvTable t = parse_csv(text);
  if (split_csv_line(kTrialHeader) != t.header) throw std::invalid_argument("trial csv: unexpected header");
  std::vector<TrialRecord> out;
  out.reserve(t.rows.size());
  for (const auto& row : t.rows) {
    TrialRecord r;
    r.master_seed = parse_uint<std::uint64_t>(row[0]);
    r.condition.n = parse_uint<std::size_t>(row[1]);
    r.condition.p = parse_uint<std::size_t>(row[2]);
    r.condition.load = parse_real(row[3]);
    r.condition.similarity = parse_real(row[4]);
    r.condition.rule = parse_rule(row[5]);
    r.condition.gamma = parse_real(row[6]);
    r.condition.lambda = parse_real(row[7]);
    r.pattern_idx = parse_uint<std::size_t>(row[8]);
    r.trial_idx = parse_uint<std::size_t>(row[9]);
    r.classification = parse_classification(row[10]);
    r.outcome = implied_outcome(r.classification);
    r.steps = parse_uint<std::size_t>(row[11]);
    r.hamming_nearest = parse_uint<std::size_t>(row[12]);
    r.nearest_idx = parse_uint<std::size_t>(row[13]);
    out.push_back(r);
  }
  return out;
}

// ---- per-condition CSV ----

namespace detail {

inline const std::vector<std::pair<std::string_view, Metric MetricsSummary::*>>& metric_columns() {
  static const std::vector<std::pair<std::string_view, Metric MetricsSummary::*>> cols{
      {"target_recall_rate", &MetricsSummary::target_recall_rate},
      {"other_learned_rate", &MetricsSummary::other_learned_rate},
      {"spurious_fixed_point_rate", &MetricsSummary::spurious_fixed_point_rate},
      {"spurious_cycle_rate", &MetricsSummary::spurious_cycle_rate},
      {"cycle_rate", &MetricsSummary::cycle_rate},
      {"not_converged_rate", &MetricsSummary::not_converged_rate},
      {"fixed_point_rate", &MetricsSummary::fixed_point_rate},
      {"avg_steps_to_converge", &MetricsSummary::avg_steps_to_converge},
  };
  return cols;
}

inline double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace detail

inline std::string condition_csv(const std::vector<ConditionResult>& results) {
  std::string out = "n,p,load,similarity,rule,c,gamma,lambda,seeds,trials";
  for (const auto& [name, _] : detail::metric_columns()) out += "," + std::string(name) + "," + std::string(name) + "_ci";
  out += ",train_seconds_mean,train_seconds_sd,fixed_point_failures\n";
  for (const auto& r : results) {
    const auto& k = r.key;
    out += std::to_string(k.n) + ',' + std::to_string(k.p) + ',' + format_real(k.load) + ',' +
           format_real(k.similarity) + ',' + std::string(to_string(k.rule)) + ',' + format_real(r.scaling) + ',' +
           format_real(k.gamma) + ',' + format_real(k.lambda) + ',' + std::to_string(r.summary.seeds.size()) + ',' +
           std::to_string(r.summary.trials);
    for (const auto& [_, member] : detail::metric_columns()) {
      const Metric& m = r.summary.*member;
      out += ',' + format_real(m.mean) + ',' + format_real(m.half_width);
    }
    double tmean = 0.0;
    for (double s : r.train_seconds) tmean += s;
    if (!r.train_seconds.empty()) tmean /= static_cast<double>(r.train_seconds.size());
    out += ',' + format_real(tmean) + ',' + format_real(detail::sample_sd(r.train_seconds)) + ',' +
           std::to_string(r.fixed_point_failures) + '\n';
  }
  return out;
}

inline std::string learning_curve_csv(const LearningCurveReport& rep) {
  std::string out = "seed,update,loss\n";
  for (std::size_t s = 0; s < rep.curves.size(); ++s)
    for (std::size_t u = 0; u < rep.curves[s].losses.size(); ++u)
      out += std::to_string(rep.seeds[s]) + ',' + std::to_string(u) + ',' + format_real(rep.curves[s].losses[u]) + '\n';
  return out;
}

inline std::string gamma_search_csv(const GammaSearchResult& g) {
  std::string out = "n,c,mean_recall,best\n";
  for (const auto& r : g.rows)
    out += std::to_string(r.n) + ',' + format_real(r.scaling) + ',' + format_real(r.mean_recall) + ',' +
           (g.best.at(r.n) == r.scaling ? "1" : "0") + '\n';
  return out;
}

inline std::string audit_csv(const DynamicsAudit& a) {
  std::string out = "load,trials,cycle_rate,cycle_rate_ci,not_converged_rate,not_converged_rate_ci\n";
  for (const auto& r : a.rows)
    out += format_real(r.load) + ',' + std::to_string(r.trials) + ',' + format_real(r.cycle_rate.mean) + ',' +
           format_real(r.cycle_rate.half_width) + ',' + format_real(r.not_converged_rate.mean) + ',' +
           format_real(r.not_converged_rate.half_width) + '\n';
  return out;
}

inline std::string hamming_histogram_csv(const HammingHistogram& h) {
  std::string out = "classification,distance,count\n";
  for (const auto& [cls, dist] : h.counts)
    for (const auto& [d, count] : dist)
      out += std::string(to_string(cls)) + ',' + std::to_string(d) + ',' + std::to_string(count) + '\n';
  return out;
}

// ---- run manifest ----

struct RunManifest {
  std::string tool_version{kToolVersion};
  std::string config_yaml;
  std::vector<std::uint64_t> seeds;
  std::string started;
  std::string finished;
  std::map<std::string, std::string> outputs;
};

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::string manifest_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["tool"] = "khop";
  j["version"] = m.tool_version;
  j["seeds"] = m.seeds;
  j["started"] = m.started;
  j["finished"] = m.finished;
  j["outputs"] = m.outputs;
  j["config"] = m.config_yaml;
  return j.dump(2) + "\n";
}

inline RunManifest parse_manifest(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  RunManifest m;
  m.tool_version = j.at("version").get<std::string>();
  m.config_yaml = j.at("config").get<std::string>();
  m.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  m.started = j.value("started", "");
  m.finished = j.value("finished", "");
  m.outputs = j.value("outputs", std::map<std::string, std::string>{});
  return m;
}

// Writes <kind>.csv, <kind>_trials.csv, kind-specific extras and
// <kind>_manifest.json into out_dir. Returns the manifest.
inline RunManifest write_experiment(const ExperimentResult& res, const std::filesystem::path& out_dir,
                                    const std::string& started) {
  const std::string kind(to_string(res.config.kind));
  RunManifest m;
  m.config_yaml = config_to_yaml(res.config);
  m.seeds = res.config.seeds;
  m.started = started;
  auto emit = [&](const std::string& role, const std::string& file, const std::string& text) {
    write_file(out_dir / file, text);
    m.outputs[role] = (out_dir / file).string();
  };
  if (!res.conditions.empty()) {
    emit("conditions", kind + ".csv", condition_csv(res.conditions));
    const auto records = collect_records(res.conditions);
    emit("trials", kind + "_trials.csv", trial_csv(records));
    emit("hamming", kind + "_hamming.csv", hamming_histogram_csv(hamming_validation(records)));
  }
  if (res.gamma_search) emit("gamma_search", kind + "_gamma.csv", gamma_search_csv(*res.gamma_search));
  if (res.learning_curve) emit("learning_curve", kind + "_curve.csv", learning_curve_csv(*res.learning_curve));
  if (res.audit) emit("audit", kind + "_audit.csv", audit_csv(*res.audit));
  m.finished = utc_timestamp();
  write_file(out_dir / (kind + "_manifest.json"), manifest_json(m));
  return m;
}

}  // namespace khop
