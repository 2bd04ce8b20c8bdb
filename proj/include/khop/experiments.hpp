#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "khop/analysis.hpp"
#include "khop/dynamics.hpp"
#include "khop/learning.hpp"
#include "khop/parallel.hpp"
#include "khop/patterns.hpp"
#include "khop/rng.hpp"

namespace khop {

enum class ExperimentKind { landscape, compare, scaling, sensitivity, gamma_search, learning_curve, dynamics_audit };

inline constexpr ExperimentKind kAllKinds[] = {
    ExperimentKind::landscape,    ExperimentKind::compare,        ExperimentKind::scaling,
    ExperimentKind::sensitivity,  ExperimentKind::gamma_search,   ExperimentKind::learning_curve,
    ExperimentKind::dynamics_audit};

inline std::string_view to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::landscape: return "landscape";
    case ExperimentKind::compare: return "compare";
    case ExperimentKind::scaling: return "scaling";
    case ExperimentKind::sensitivity: return "sensitivity";
    case ExperimentKind::gamma_search: return "gamma-search";
    case ExperimentKind::learning_curve: return "learning-curve";
    case ExperimentKind::dynamics_audit: return "dynamics-audit";
  }
  return "?";
}

inline ExperimentKind parse_kind(std::string_view s) {
  for (auto k : kAllKinds)
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown experiment kind '" + std::string(s) + "'");
}

// Networks at or above this size need allow_large: KLR training there is
// minutes-scale per seed.
inline constexpr std::size_t kLargeN = 500;

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::landscape;
  std::vector<std::size_t> n{100};
  std::vector<double> loads{0.5, 1.0};
  std::vector<double> similarities{1.0};
  std::vector<Rule> rules{Rule::klr};
  std::vector<double> scalings{2.0};         // c, gamma = c / N
  std::map<std::size_t, double> scaling_per_n;  // overrides `scalings` for listed N
  std::vector<double> lambdas{0.01};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::size_t trials_per_pattern = 5;
  DynParams dyn;
  LearnConfig learn;
  std::size_t workers = 0;  // 0: hardware concurrency
  bool allow_large = false;

  friend bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
    return std::tie(a.kind, a.n, a.loads, a.similarities, a.rules, a.scalings, a.scaling_per_n, a.lambdas,
                    a.seeds, a.trials_per_pattern, a.dyn.max_steps, a.learn.beta, a.learn.m_updates,
                    a.learn.lambda, a.workers, a.allow_large) ==
           std::tie(b.kind, b.n, b.loads, b.similarities, b.rules, b.scalings, b.scaling_per_n, b.lambdas,
                    b.seeds, b.trials_per_pattern, b.dyn.max_steps, b.learn.beta, b.learn.m_updates,
                    b.learn.lambda, b.workers, b.allow_large);
  }

  std::size_t worker_count() const { return workers ? workers : default_workers(); }

  // c values to sweep at network size n.
  std::vector<double> scalings_for(std::size_t nn) const {
    if (auto it = scaling_per_n.find(nn); it != scaling_per_n.end()) return {it->second};
    return scalings;
  }
};

// P = round(load N).
inline std::size_t pattern_count(std::size_t n, double load) {
  return static_cast<std::size_t>(std::llround(load * static_cast<double>(n)));
}

inline void validate(const ExperimentConfig& c) {
  auto fail = [](const std::string& m) { throw std::invalid_argument("config: " + m); };
  if (c.n.empty() || c.loads.empty() || c.similarities.empty() || c.rules.empty() || c.scalings.empty() ||
      c.lambdas.empty() || c.seeds.empty())
    fail("grids must be non-empty");
  if (std::set<std::uint64_t>(c.seeds.begin(), c.seeds.end()).size() != c.seeds.size()) fail("seeds must be distinct");
  if (c.trials_per_pattern < 1) fail("trials_per_pattern must be >= 1");
  for (auto nn : c.n) {
    if (nn < 2) fail("n must be >= 2");
    if (nn >= kLargeN && !c.allow_large) fail("n >= " + std::to_string(kLargeN) + " requires allow_large");
    for (double load : c.loads)
      if (!(load > 0.0) || pattern_count(nn, load) < 1) fail("load " + std::to_string(load) + " gives P < 1");
  }
  for (double s : c.similarities)
    if (!(s >= 0.0 && s <= 1.0)) fail("similarity outside [0, 1]");
  for (double x : c.scalings)
    if (!(x > 0.0)) fail("scaling factor c must be > 0");
  for (const auto& [nn, x] : c.scaling_per_n)
    if (!(x > 0.0)) fail("scaling factor c must be > 0");
  const bool krr = std::find(c.rules.begin(), c.rules.end(), Rule::krr) != c.rules.end();
  for (double l : c.lambdas) {
    if (!(l >= 0.0)) fail("lambda must be >= 0");
    if (krr && !(l > 0.0)) fail("lambda must be > 0 for krr");
  }
  c.dyn.validate();
  LearnConfig lc = c.learn;
  lc.validate();
}

// One trained network: everything but the similarity.
struct TrainingPoint {
  std::size_t n = 100;
  double load = 1.0;
  Rule rule = Rule::klr;
  double scaling = 2.0;
  double lambda = 0.01;

  KernelParams kernel() const { return KernelParams::from_scaling(scaling, n); }
  std::size_t p() const { return pattern_count(n, load); }
};

struct ConditionResult {
  ConditionKey key;
  double scaling = 0.0;
  std::vector<TrialRecord> records;  // sorted by (seed, pattern, trial)
  MetricsSummary summary;
  std::vector<double> train_seconds;  // per seed, in seed order
  std::size_t fixed_point_failures = 0;  // FixedPoint finals with step(s) != s
  std::optional<LearningCurve> curve;   // first seed, KLR only
};

struct RunOptions {
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::size_t trials_per_pattern = 5;
  DynParams dyn;
  LearnConfig learn;
  std::size_t workers = 1;
};

inline RunOptions run_options(const ExperimentConfig& c) {
  return RunOptions{c.seeds, c.trials_per_pattern, c.dyn, c.learn, c.worker_count()};
}

// Trial seeds depend only on (master, pattern, repeat), never on grid order.
inline std::uint64_t trial_seed(std::uint64_t master, std::size_t pattern_idx, std::size_t trial_idx,
                                std::size_t trials_per_pattern) {
  return derive_seed(master, "trial", pattern_idx * trials_per_pattern + trial_idx);
}

inline PatternSet condition_patterns(std::uint64_t master, std::size_t n, std::size_t p) {
  return generate_patterns(n, p, derive_seed(master, "patterns", 0));
}

// Trains one network per master seed and runs trials_per_pattern x P recalls
// at each similarity. Training runs one seed at a time so the timings are
// not perturbed by other work; recalls are spread across workers.
inline std::vector<ConditionResult> run_point(const TrainingPoint& point, const std::vector<double>& similarities,
                                              const RunOptions& opt) {
  const std::size_t p = point.p();
  const std::size_t per_sim = opt.trials_per_pattern * p;
  LearnConfig learn = opt.learn;
  learn.lambda = point.lambda;

  std::vector<ConditionResult> out(similarities.size());
  for (std::size_t s = 0; s < similarities.size(); ++s) {
    out[s].key = ConditionKey{point.n, p, point.load, similarities[s], point.rule, point.kernel().gamma, point.lambda};
    out[s].scaling = point.scaling;
    out[s].records.resize(opt.seeds.size() * per_sim);
  }

  for (std::size_t si = 0; si < opt.seeds.size(); ++si) {
    const std::uint64_t master = opt.seeds[si];
    const PatternSet patterns = condition_patterns(master, point.n, p);
    TrainOutcome trained;
    try {
      trained = measure_training(point.rule, patterns, point.kernel(), learn);
    } catch (const std::exception& e) {
      throw std::runtime_error("condition n=" + std::to_string(point.n) + " load=" + std::to_string(point.load) +
                               " rule=" + std::string(to_string(point.rule)) + " c=" + std::to_string(point.scaling) +
                               " lambda=" + std::to_string(point.lambda) + " seed=" + std::to_string(master) + ": " +
                               e.what());
    }
    for (auto& r : out) {
      r.train_seconds.push_back(trained.seconds);
      if (si == 0 && trained.curve) r.curve = trained.curve;
    }

    std::vector<char> fp_bad(similarities.size() * per_sim, 0);
    parallel_for(similarities.size() * per_sim, opt.workers, [&](std::size_t job) {
      const std::size_t s = job / per_sim;
      const std::size_t local = job % per_sim;
      const std::size_t mu = local / opt.trials_per_pattern;
      const std::size_t rep = local % opt.trials_per_pattern;
      const State initial =
          corrupt(patterns[mu], similarities[s], trial_seed(master, mu, rep, opt.trials_per_pattern));
      const RecallTrace trace = std::visit([&](const auto& m) { return recall(initial, m, opt.dyn); }, trained.model);
      if (trace.outcome == Outcome::fixed_point && !(step(trace.final, trained.model) == trace.final))
        fp_bad[job] = 1;
      out[s].records[si * per_sim + local] = make_record(master, out[s].key, mu, rep, trace, patterns);
    });
    for (std::size_t s = 0; s < similarities.size(); ++s)
      for (std::size_t j = 0; j < per_sim; ++j) out[s].fixed_point_failures += fp_bad[s * per_sim + j];
  }
  for (auto& r : out) r.summary = aggregate(r.records);
  return out;
}

// Single (point, similarity) condition.
inline ConditionResult run_condition(const TrainingPoint& point, double similarity, const RunOptions& opt) {
  return std::move(run_point(point, {similarity}, opt).front());
}

// Every (n, load, rule, c, lambda) point of the config, each at all
// similarities. Ordered by n, rule, c, lambda, load, similarity.
inline std::vector<ConditionResult> run_sweep(const ExperimentConfig& config) {
  validate(config);
  const RunOptions opt = run_options(config);
  std::vector<ConditionResult> all;
  for (auto nn : config.n)
    for (auto rule : config.rules)
      for (double c : config.scalings_for(nn))
        for (double lambda : config.lambdas)
          for (double load : config.loads) {
            auto part = run_point(TrainingPoint{nn, load, rule, c, lambda}, config.similarities, opt);
            for (auto& r : part) all.push_back(std::move(r));
          }
  return all;
}

// Canonical trial order: (master_seed, load, similarity, pattern_idx,
// trial_idx), then n, rule, gamma, lambda so mixed sweeps stay total.
inline void canonical_sort(std::vector<TrialRecord>& records) {
  std::stable_sort(records.begin(), records.end(), [](const TrialRecord& a, const TrialRecord& b) {
    const auto& x = a.condition;
    const auto& y = b.condition;
    return std::tie(a.master_seed, x.load, x.similarity, a.pattern_idx, a.trial_idx, x.n, x.rule, x.gamma, x.lambda) <
           std::tie(b.master_seed, y.load, y.similarity, b.pattern_idx, b.trial_idx, y.n, y.rule, y.gamma, y.lambda);
  });
}

inline std::vector<TrialRecord> collect_records(const std::vector<ConditionResult>& results) {
  std::vector<TrialRecord> all;
  for (const auto& r : results) all.insert(all.end(), r.records.begin(), r.records.end());
  canonical_sort(all);
  return all;
}

// ---- gamma grid search ----

struct GammaSearchRow {
  std::size_t n = 0;
  double scaling = 0.0;
  double mean_recall = 0.0;  // mean of target recall over the load grid
};

struct GammaSearchResult {
  std::vector<GammaSearchRow> rows;
  std::map<std::size_t, double> best;  // n -> c_opt
};

// Picks, per N, the c with the highest mean recall over the load grid; ties
// go to the smaller c.
inline GammaSearchResult select_best_scaling(const std::vector<ConditionResult>& results) {
  std::map<std::pair<std::size_t, double>, std::vector<double>> recalls;
  for (const auto& r : results) recalls[{r.key.n, r.scaling}].push_back(r.summary.target_recall_rate.mean);
  GammaSearchResult out;
  std::map<std::size_t, double> best_score;
  for (const auto& [key, vals] : recalls) {  // ascending c within each n
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= static_cast<double>(vals.size());
    out.rows.push_back({key.first, key.second, mean});
    auto it = best_score.find(key.first);
    if (it == best_score.end() || mean > it->second + 1e-12) {
      best_score[key.first] = mean;
      out.best[key.first] = key.second;
    }
  }
  return out;
}

// ---- learning curve ----

struct LearningCurveReport {
  std::size_t n = 0;
  std::size_t p = 0;
  double scaling = 0.0;
  std::vector<std::uint64_t> seeds;
  std::vector<LearningCurve> curves;  // per seed
  double ratio_200_150 = std::numeric_limits<double>::quiet_NaN();  // mean over seeds
  bool monotone = true;       // non-increasing after the first update, all seeds
  bool plateau = false;       // loss(200) / loss(150) >= kPlateauRatio
  double decrease_by_150 = std::numeric_limits<double>::quiet_NaN();  // (L0 - L150) / (L0 - L_M), mean

  static constexpr double kPlateauRatio = 0.9;
};

inline LearningCurveReport learning_curve_capture(std::size_t n, double load, double scaling,
                                                  const std::vector<std::uint64_t>& seeds, const LearnConfig& learn) {
  LearningCurveReport rep;
  rep.n = n;
  rep.p = pattern_count(n, load);
  rep.scaling = scaling;
  rep.seeds = seeds;
  double ratio = 0.0, dec = 0.0;
  for (auto master : seeds) {
    auto [model, curve] = train_klr(condition_patterns(master, n, rep.p), KernelParams::from_scaling(scaling, n), learn);
    const auto& l = curve.losses;
    for (std::size_t i = 2; i < l.size(); ++i)
      if (l[i] > l[i - 1]) rep.monotone = false;
    if (l.size() > 200) ratio += l[200] / l[150];
    if (l.size() > 150) dec += (l[0] - l[150]) / (l[0] - l.back());
    rep.curves.push_back(std::move(curve));
  }
  const double k = static_cast<double>(seeds.size());
  if (learn.m_updates >= 200) {
    rep.ratio_200_150 = ratio / k;
    rep.plateau = rep.ratio_200_150 >= LearningCurveReport::kPlateauRatio;
  }
  if (learn.m_updates >= 150) rep.decrease_by_150 = dec / k;
  return rep;
}

// ---- dynamics audit ----

struct AuditRow {
  double load = 0.0;
  std::size_t trials = 0;
  Metric cycle_rate;
  Metric not_converged_rate;
};

struct DynamicsAudit {
  std::vector<AuditRow> rows;
  std::size_t trials = 0;
  std::size_t cycles = 0;
  std::size_t not_converged = 0;

  double combined_rate() const {
    return trials ? static_cast<double>(cycles + not_converged) / static_cast<double>(trials) : 0.0;
  }
};

// Cycle and non-convergence rates per load, pooled over every other
// condition parameter.
inline DynamicsAudit audit_dynamics(const std::vector<TrialRecord>& records) {
  if (records.empty()) throw std::invalid_argument("dynamics audit: empty sweep");
  std::map<double, std::vector<TrialRecord>> by_load;
  for (const auto& r : records) by_load[r.condition.load].push_back(r);
  DynamicsAudit audit;
  for (const auto& [load, rs] : by_load) {
    const MetricsSummary s = aggregate(rs);
    audit.rows.push_back({load, rs.size(), s.cycle_rate, s.not_converged_rate});
  }
  for (const auto& r : records) {
    ++audit.trials;
    if (r.outcome == Outcome::limit_cycle) ++audit.cycles;
    if (r.outcome == Outcome::not_converged) ++audit.not_converged;
  }
  return audit;
}

// ---- experiment dispatch ----

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<ConditionResult> conditions;
  std::optional<GammaSearchResult> gamma_search;
  std::optional<LearningCurveReport> learning_curve;
  std::optional<DynamicsAudit> audit;
};

// c for scaling runs when none is given: 2 up to N = 250, 5 beyond.
inline double default_scaling_for(std::size_t n) { return n <= 250 ? 2.0 : 5.0; }

inline ExperimentResult run_experiment(ExperimentConfig config) {
  validate(config);
  ExperimentResult res;
  switch (config.kind) {
    case ExperimentKind::scaling:
      for (auto nn : config.n)
        if (!config.scaling_per_n.count(nn)) config.scaling_per_n[nn] = default_scaling_for(nn);
      res.conditions = run_sweep(config);
      break;
    case ExperimentKind::gamma_search:
      res.conditions = run_sweep(config);
      res.gamma_search = select_best_scaling(res.conditions);
      break;
    case ExperimentKind::learning_curve:
      res.learning_curve = learning_curve_capture(config.n.front(), config.loads.front(),
                                                  config.scalings_for(config.n.front()).front(), config.seeds,
                                                  config.learn);
      break;
    case ExperimentKind::dynamics_audit:
      res.conditions = run_sweep(config);
      res.audit = audit_dynamics(collect_records(res.conditions));
      break;
    default:
      res.conditions = run_sweep(config);
      break;
  }
  res.config = std::move(config);
  return res;
}

// Desk-scale defaults per experiment kind.
inline ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  switch (kind) {
    case ExperimentKind::landscape:
    case ExperimentKind::dynamics_audit:
      c.loads = {0.05, 0.1, 0.25, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0};
      c.similarities = {0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
      break;
    case ExperimentKind::compare:
      c.loads = {0.1, 0.25, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 5.0, 6.0};
      c.similarities = {0.6};
      c.rules = {Rule::klr, Rule::krr};
      break;
    case ExperimentKind::scaling:
      c.n = {100, 250};
      c.loads = {0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0};
      c.similarities = {0.8};
      break;
    case ExperimentKind::sensitivity:
      c.loads = {1.5, 3.0};
      c.similarities = {0.8};
      c.scalings = {0.25, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 7.0, 10.0};
      c.lambdas = {1e-4, 1e-3, 1e-2, 1e-1};
      break;
    case ExperimentKind::gamma_search:
      c.loads = {1.5, 2.0, 2.5, 3.0, 3.5, 4.0};
      c.similarities = {1.0};
      c.scalings = {0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 7.0, 10.0};
      break;
    case ExperimentKind::learning_curve:
      c.loads = {4.0};
      c.learn.m_updates = 300;
      break;
  }
  return c;
}

}  // namespace khop
