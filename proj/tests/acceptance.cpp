// Acceptance suite: prints one [PASS]/[FAIL] line per criterion and exits
// nonzero if any criterion fails. Set KHOP_LONG=1 to include the N=250
// scaling check, which takes tens of minutes on one core.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "khop/config.hpp"
#include "khop/experiments.hpp"
#include "khop/report.hpp"
#include "khop/validation.hpp"

namespace {

using namespace khop;

int failures = 0;

void report(const char* id, const char* title, bool ok, const std::string& detail) {
  std::printf("[%s] %s %s: %s\n", ok ? "PASS" : "FAIL", id, title, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(double x, int prec = 4) {
  std::ostringstream s;
  s.precision(prec);
  s << x;
  return s.str();
}

double recall_mean(const ConditionResult& r) { return r.summary.target_recall_rate.mean; }

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Trials pooled over criteria 2-5 for the dynamics audit.
std::vector<TrialRecord> audit_pool;
std::size_t fixed_point_failures = 0;

void pool(const std::vector<ConditionResult>& rs) {
  for (const auto& r : rs) {
    audit_pool.insert(audit_pool.end(), r.records.begin(), r.records.end());
    fixed_point_failures += r.fixed_point_failures;
  }
}

RunOptions options() {
  RunOptions o;
  o.workers = default_workers();
  return o;
}

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void criterion_1() {
  Timer t;
  const RunOptions o = options();
  const auto lo = run_condition(TrainingPoint{100, 0.1, Rule::hebbian, 2.0, 0.01}, 1.0, o);
  const auto hi = run_condition(TrainingPoint{100, 0.3, Rule::hebbian, 2.0, 0.01}, 1.0, o);
  const bool ok = recall_mean(lo) >= 0.95 && recall_mean(hi) <= 0.5 && t.seconds() < 60.0;
  report("C1", "hebbian capacity collapse",
         ok,
         "recall(0.1)=" + fmt(recall_mean(lo)) + " >= 0.95, recall(0.3)=" + fmt(recall_mean(hi)) + " <= 0.5, " +
             fmt(t.seconds(), 3) + " s < 60 s");
}

std::map<double, ConditionResult> klr_sweep, krr_sweep;

void criterion_2() {
  Timer t;
  const RunOptions o = options();
  for (double load : {0.5, 1.0, 2.0, 3.0, 5.0}) {
    klr_sweep[load] = run_condition(TrainingPoint{100, load, Rule::klr, 2.0, 0.01}, 0.6, o);
    pool({klr_sweep[load]});
  }
  std::string d;
  bool ok = true;
  for (double load : {0.5, 1.0, 2.0, 3.0}) {
    ok = ok && recall_mean(klr_sweep[load]) >= 0.9;
    d += "recall(" + fmt(load) + ")=" + fmt(recall_mean(klr_sweep[load])) + " ";
  }
  const double drop = recall_mean(klr_sweep[3.0]) - recall_mean(klr_sweep[5.0]);
  ok = ok && drop >= 0.2 && t.seconds() < 1800.0;
  d += "(>= 0.9), recall(5)=" + fmt(recall_mean(klr_sweep[5.0])) + ", drop " + fmt(drop) + " >= 0.2, " +
       fmt(t.seconds(), 3) + " s";
  report("C2", "klr capacity at gamma=0.02, sim=0.6", ok, d);
}

void criterion_3() {
  const RunOptions o = options();
  for (double load : {0.5, 1.0, 2.0, 3.0, 5.0}) {
    krr_sweep[load] = run_condition(TrainingPoint{100, load, Rule::krr, 2.0, 0.01}, 0.6, o);
    pool({krr_sweep[load]});
  }
  bool ok = true;
  std::string d;
  for (double load : {0.5, 1.0, 2.0, 3.0}) {
    const double gap = std::abs(recall_mean(krr_sweep[load]) - recall_mean(klr_sweep[load]));
    ok = ok && gap <= 0.1;
    d += "|dRecall(" + fmt(load) + ")|=" + fmt(gap) + " ";
  }
  d += "(<= 0.1); ";
  for (double load : {2.0, 3.0, 5.0}) {
    const double krr = mean(krr_sweep[load].train_seconds), klr = mean(klr_sweep[load].train_seconds);
    ok = ok && krr <= klr / 10.0;
    d += "t_krr/t_klr(" + fmt(load) + ")=" + fmt(krr / klr, 3) + " ";
  }
  d += "(<= 0.1)";
  report("C3", "krr parity and training speed", ok, d);
}

void criterion_4() {
  const RunOptions o = options();
  const std::vector<double> lambdas{1e-4, 1e-3, 1e-2, 1e-1};
  std::map<std::pair<double, double>, double> rec;  // (c, lambda) -> recall
  for (double c : {0.25, 2.0, 3.0, 5.0})
    for (double lambda : lambdas) {
      const auto r = run_condition(TrainingPoint{100, 1.5, Rule::klr, c, lambda}, 0.8, o);
      pool({r});
      rec[{c, lambda}] = recall_mean(r);
    }
  bool ok = true;
  double worst_low = 0.0, worst_high = 1.0, worst_spread = 0.0;
  for (double lambda : lambdas) {
    worst_low = std::max(worst_low, rec[{0.25, lambda}]);
    worst_high = std::min(worst_high, rec[{2.0, lambda}]);
  }
  for (double c : {2.0, 3.0, 5.0}) {
    double lo = 1.0, hi = 0.0;
    for (double lambda : lambdas) {
      lo = std::min(lo, rec[{c, lambda}]);
      hi = std::max(hi, rec[{c, lambda}]);
    }
    worst_spread = std::max(worst_spread, hi - lo);
  }
  ok = worst_low < 0.1 && worst_high > 0.9 && worst_spread <= 0.05;
  report("C4", "sensitivity phase transition at P/N=1.5, sim=0.8", ok,
         "max recall(c=0.25)=" + fmt(worst_low) + " < 0.1, min recall(c=2)=" + fmt(worst_high) +
             " > 0.9, max lambda spread(c in {2,3,5})=" + fmt(worst_spread) + " <= 0.05");
}

std::map<std::pair<double, double>, ConditionResult> landscape;  // (load, sim)

void criterion_5() {
  const RunOptions o = options();
  const std::vector<double> sims{0.6, 0.7, 0.8, 0.9, 1.0};
  for (double load : {0.25, 0.5, 1.0, 1.5}) {
    const auto rs = run_point(TrainingPoint{100, load, Rule::klr, 2.0, 0.01}, sims, o);
    pool(rs);
    for (std::size_t i = 0; i < sims.size(); ++i) landscape[{load, sims[i]}] = rs[i];
  }
  double worst = 0.0;
  std::string at;
  for (const auto& [key, r] : landscape)
    if (r.summary.spurious_fixed_point_rate.mean >= worst) {
      worst = r.summary.spurious_fixed_point_rate.mean;
      at = "P/N=" + fmt(key.first) + ", sim=" + fmt(key.second);
    }
  report("C5", "clean landscape for klr", worst <= 0.01,
         "max spurious fixed-point rate " + fmt(worst) + " (" + at + ") <= 0.01 over P/N in {0.25,0.5,1,1.5}, "
         "sim in {0.6..1.0}");
}

void criterion_6() {
  std::size_t bad = 0;
  for (const auto& r : audit_pool)
    if (r.outcome != Outcome::fixed_point) ++bad;
  const double rate = static_cast<double>(bad) / static_cast<double>(audit_pool.size());
  report("C6", "dynamics audit over criteria 2-5", rate < 0.001 && fixed_point_failures == 0,
         "cycle+not_converged " + std::to_string(bad) + "/" + std::to_string(audit_pool.size()) + " = " + fmt(rate) +
             " < 0.001, fixed points failing re-verification: " + std::to_string(fixed_point_failures));
}

void criterion_7() {
  std::size_t other = 0, other_bad = 0, spurious = 0, spurious_bad = 0;
  std::string per_load;
  for (const auto& [load, r] : klr_sweep) {
    std::size_t close = 0, n_spurious = 0;
    std::size_t min_d = std::numeric_limits<std::size_t>::max();
    for (const auto& t : r.records) {
      if (t.classification == Classification::other_learned) {
        ++other;
        if (t.hamming_nearest != 0) ++other_bad;
      } else if (is_spurious(t.classification)) {
        ++n_spurious;
        min_d = std::min(min_d, t.hamming_nearest);
        if (t.hamming_nearest < 10) ++close;
      }
    }
    spurious += n_spurious;
    spurious_bad += close;
    if (n_spurious)
      per_load += " P/N=" + fmt(load) + ": " + std::to_string(close) + "/" + std::to_string(n_spurious) +
                  " at d<10, min d=" + std::to_string(min_d) + ";";
  }
  report("C7", "hamming validation of criterion 2 failures", other_bad == 0 && spurious_bad == 0,
         std::to_string(other) + " other_learned (" + std::to_string(other_bad) + " at d>0), " +
             std::to_string(spurious) + " spurious (" + std::to_string(spurious_bad) + " at d<10);" + per_load);
}

void criterion_8() {
  double worst = 0.0;
  std::string d;
  for (double load : {0.25, 0.5, 1.0}) {
    const double s = landscape[{load, 0.9}].summary.avg_steps_to_converge.mean;
    worst = std::max(worst, s);
    d += "steps(" + fmt(load) + ")=" + fmt(s) + " ";
  }
  report("C8", "convergence speed at sim=0.9", worst <= 2.5, d + "(<= 2.5)");
}

void criterion_9() {
  const std::uint64_t seed = 1;
  const oracle::Check a = oracle::check_klr_gradient(seed, 20);
  // Residual on every KRR model trained for criterion 3, plus the oracle's own instances.
  double worst = 0.0;
  for (double load : {0.5, 1.0, 2.0, 3.0, 5.0})
    for (std::uint64_t master : RunOptions{}.seeds) {
      const PatternSet pats = condition_patterns(master, 100, pattern_count(100, load));
      worst = std::max(worst, krr_residual(train_krr(pats, KernelParams::from_scaling(2.0, 100), 0.01), 0.01));
    }
  const oracle::Check b = oracle::check_krr_residual(seed);
  const oracle::Check c = oracle::check_fixed_point_inventory(seed);
  const oracle::Check d = oracle::check_loss_at_zero(seed);
  report("C9", "oracle suites", a.passed && b.passed && worst < 1e-8 && c.passed && d.passed,
         "(a) " + a.detail + " < 1e-5; (b) " + b.detail + ", sweep models max residual " + fmt(worst, 3) +
             " < 1e-8; (c) " + (c.passed ? "enumeration agrees" : c.detail) + "; (d) " + d.detail + " < 1e-9");
}

void criterion_10() {
  ExperimentConfig cfg = default_config(ExperimentKind::compare);
  cfg.loads = {0.5, 2.0};
  cfg.similarities = {0.6, 0.9};
  cfg.seeds = {11, 12};
  cfg.workers = 1;
  const std::string a = trial_csv(collect_records(run_sweep(cfg)));

  RunManifest m;
  m.config_yaml = config_to_yaml(cfg);
  m.seeds = cfg.seeds;
  ExperimentConfig again = parse_config(parse_manifest(manifest_json(m)).config_yaml);
  bool ok = true;
  std::string d;
  for (std::size_t workers : {2u, 4u, 7u}) {
    again.workers = workers;
    const bool same = trial_csv(collect_records(run_sweep(again))) == a;
    ok = ok && same;
    d += "workers=" + std::to_string(workers) + (same ? " identical " : " DIFFERS ");
  }
  report("C10", "determinism through manifest re-run", ok,
         d + "(" + std::to_string(a.size()) + " bytes vs workers=1)");
}

void criterion_11() {
  if (const char* env = std::getenv("KHOP_LONG"); env == nullptr || std::string(env) != "1") {
    std::printf("[SKIP] C11 scaling spot-check N in {100,250}: set KHOP_LONG=1 to run\n");
    return;
  }
  Timer t;
  const RunOptions o = options();
  std::map<std::size_t, std::map<double, ConditionResult>> res;
  for (std::size_t n : {100u, 250u})
    for (double load : {0.5, 1.0, 2.0, 3.0, 4.0})
      res[n][load] = run_condition(TrainingPoint{n, load, Rule::klr, 2.0, 0.01}, 0.8, o);
  bool ok = true;
  std::string d;
  for (double load : {0.5, 1.0, 2.0, 3.0}) {
    const double gap = std::abs(recall_mean(res[100][load]) - recall_mean(res[250][load]));
    ok = ok && gap <= 0.1;
    d += "|dRecall(" + fmt(load) + ")|=" + fmt(gap) + " ";
  }
  const double s100 = res[100][4.0].summary.avg_steps_to_converge.mean;
  const double s250 = res[250][4.0].summary.avg_steps_to_converge.mean;
  ok = ok && s250 < s100;
  report("C11", "scaling spot-check N in {100,250}", ok,
         d + "(<= 0.1), steps(P/N=4): N=100 " + fmt(s100) + " > N=250 " + fmt(s250) + ", " + fmt(t.seconds(), 4) +
             " s");
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  criterion_11();
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
