#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "khop/dynamics.hpp"
#include "khop/learning.hpp"
#include "khop/patterns.hpp"

namespace khop {

enum class Classification { target, other_learned, spurious_fixed_point, spurious_cycle, not_converged };

inline constexpr Classification kAllClassifications[] = {
    Classification::target, Classification::other_learned, Classification::spurious_fixed_point,
    Classification::spurious_cycle, Classification::not_converged};

inline std::string_view to_string(Classification c) {
  switch (c) {
    case Classification::target: return "target";
    case Classification::other_learned: return "other_learned";
    case Classification::spurious_fixed_point: return "spurious_fixed_point";
    case Classification::spurious_cycle: return "spurious_cycle";
    case Classification::not_converged: return "not_converged";
  }
  return "?";
}

inline Classification parse_classification(std::string_view s) {
  for (auto c : kAllClassifications)
    if (to_string(c) == s) return c;
  throw std::invalid_argument("unknown classification '" + std::string(s) + "'");
}

inline bool is_spurious(Classification c) {
  return c == Classification::spurious_fixed_point || c == Classification::spurious_cycle;
}

// Strict equality against the stored patterns. Only converged trials are
// matched; a limit cycle is judged by the state at which it was detected.
inline Classification classify(const RecallTrace& trace, const PatternSet& patterns, std::size_t target) {
  if (target >= patterns.p()) throw std::out_of_range("classify: target index out of range");
  if (trace.outcome == Outcome::not_converged) return Classification::not_converged;
  if (trace.final == patterns[target]) return Classification::target;
  for (std::size_t mu = 0; mu < patterns.p(); ++mu)
    if (mu != target && trace.final == patterns[mu]) return Classification::other_learned;
  return trace.outcome == Outcome::fixed_point ? Classification::spurious_fixed_point
                                               : Classification::spurious_cycle;
}

struct Nearest {
  std::size_t distance = 0;
  std::size_t index = 0;
};

// Closest stored pattern; ties go to `preferred`, then to the lowest index.
inline Nearest nearest_pattern(const State& s, const PatternSet& patterns, std::size_t preferred) {
  Nearest best{std::numeric_limits<std::size_t>::max(), 0};
  for (std::size_t mu = 0; mu < patterns.p(); ++mu) {
    const std::size_t d = hamming(s, patterns[mu]);
    if (d < best.distance || (d == best.distance && mu == preferred)) best = {d, mu};
  }
  return best;
}

// Grid point identity shared by all trials of one condition.
struct ConditionKey {
  std::size_t n = 0;
  std::size_t p = 0;
  double load = 0.0;
  double similarity = 0.0;
  Rule rule = Rule::klr;
  double gamma = 0.0;
  double lambda = 0.0;

  friend bool operator==(const ConditionKey&, const ConditionKey&) = default;
};

struct TrialRecord {
  std::uint64_t master_seed = 0;
  ConditionKey condition;
  std::size_t pattern_idx = 0;
  std::size_t trial_idx = 0;
  Classification classification = Classification::not_converged;
  Outcome outcome = Outcome::not_converged;
  std::size_t steps = 0;
  std::size_t hamming_nearest = 0;
  std::size_t nearest_idx = 0;

  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

// Outcome implied by a class; exact unless a limit cycle was detected on a
// stored pattern.
inline Outcome implied_outcome(Classification c) {
  switch (c) {
    case Classification::spurious_cycle: return Outcome::limit_cycle;
    case Classification::not_converged: return Outcome::not_converged;
    default: return Outcome::fixed_point;
  }
}

inline TrialRecord make_record(std::uint64_t master_seed, const ConditionKey& key, std::size_t pattern_idx,
                               std::size_t trial_idx, const RecallTrace& trace, const PatternSet& patterns) {
  TrialRecord r;
  r.master_seed = master_seed;
  r.condition = key;
  r.pattern_idx = pattern_idx;
  r.trial_idx = trial_idx;
  r.classification = classify(trace, patterns, pattern_idx);
  r.outcome = trace.outcome;
  r.steps = trace.steps;
  const Nearest nearest = nearest_pattern(trace.final, patterns, pattern_idx);
  r.hamming_nearest = nearest.distance;
  r.nearest_idx = nearest.index;
  return r;
}

// Student-t quantile t_{0.975, df}.
inline double t975(std::size_t df) {
  const boost::math::students_t dist(static_cast<double>(df));
  return boost::math::quantile(boost::math::complement(dist, 0.025));
}

struct Interval {
  double mean = 0.0;
  double half_width = 0.0;
};

// mean +/- t_{0.975, n-1} sd / sqrt(n), sd the sample standard deviation.
inline Interval confidence_interval(const std::vector<double>& values) {
  if (values.size() < 2) throw std::invalid_argument("confidence_interval: need at least 2 values");
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  return {mean, t975(values.size() - 1) * sd / std::sqrt(n)};
}

struct Metric {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double half_width = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> per_seed;
};

struct MetricsSummary {
  std::vector<std::uint64_t> seeds;
  Metric target_recall_rate;
  Metric other_learned_rate;
  Metric spurious_fixed_point_rate;
  Metric spurious_cycle_rate;
  Metric cycle_rate;
  Metric not_converged_rate;
  Metric fixed_point_rate;
  Metric avg_steps_to_converge;
  std::size_t trials = 0;
};

namespace detail {

// Seeds with undefined values (NaN) are left out of the mean and interval.
inline void finish_metric(Metric& m) {
  std::vector<double> defined;
  for (double v : m.per_seed)
    if (!std::isnan(v)) defined.push_back(v);
  if (defined.empty()) return;
  if (defined.size() == 1) {
    m.mean = defined.front();
    return;
  }
  const Interval ci = confidence_interval(defined);
  m.mean = ci.mean;
  m.half_width = ci.half_width;
}

}  // namespace detail

// Per-seed trial proportions, then mean and 95% interval across seeds.
// Seeds are taken in ascending order.
inline MetricsSummary aggregate(const std::vector<TrialRecord>& records) {
  if (records.empty()) throw std::invalid_argument("aggregate: empty record set");
  std::map<std::uint64_t, std::vector<const TrialRecord*>> by_seed;
  for (const auto& r : records) by_seed[r.master_seed].push_back(&r);

  MetricsSummary s;
  s.trials = records.size();
  for (const auto& [seed, rs] : by_seed) {
    s.seeds.push_back(seed);
    std::map<Classification, std::size_t> cls;
    std::size_t cycles = 0, not_conv = 0, converged = 0, step_sum = 0;
    for (const TrialRecord* r : rs) {
      ++cls[r->classification];
      if (r->outcome == Outcome::limit_cycle) ++cycles;
      if (r->outcome == Outcome::not_converged) {
        ++not_conv;
      } else {
        ++converged;
        step_sum += r->steps;
      }
    }
    const double total = static_cast<double>(rs.size());
    auto rate = [&](std::size_t c) { return static_cast<double>(c) / total; };
    s.target_recall_rate.per_seed.push_back(rate(cls[Classification::target]));
    s.other_learned_rate.per_seed.push_back(rate(cls[Classification::other_learned]));
    s.spurious_fixed_point_rate.per_seed.push_back(rate(cls[Classification::spurious_fixed_point]));
    s.spurious_cycle_rate.per_seed.push_back(rate(cls[Classification::spurious_cycle]));
    s.cycle_rate.per_seed.push_back(rate(cycles));
    s.not_converged_rate.per_seed.push_back(rate(not_conv));
    s.fixed_point_rate.per_seed.push_back(1.0 - (rate(cycles) + rate(not_conv)));
    s.avg_steps_to_converge.per_seed.push_back(
        converged ? static_cast<double>(step_sum) / static_cast<double>(converged)
                  : std::numeric_limits<double>::quiet_NaN());
  }
  for (Metric* m : {&s.target_recall_rate, &s.other_learned_rate, &s.spurious_fixed_point_rate,
                    &s.spurious_cycle_rate, &s.cycle_rate, &s.not_converged_rate, &s.fixed_point_rate,
                    &s.avg_steps_to_converge})
    detail::finish_metric(*m);
  return s;
}

// Distance-to-nearest-pattern distribution of failed (non-target) trials.
struct HammingHistogram {
  std::map<Classification, std::map<std::size_t, std::size_t>> counts;
  std::optional<std::size_t> min_spurious_distance;

  bool empty() const noexcept { return counts.empty(); }
};

inline HammingHistogram hamming_validation(const std::vector<TrialRecord>& records) {
  HammingHistogram h;
  for (const auto& r : records) {
    if (r.classification == Classification::target) continue;
    ++h.counts[r.classification][r.hamming_nearest];
    if (is_spurious(r.classification)) {
      h.min_spurious_distance = std::min(h.min_spurious_distance.value_or(r.hamming_nearest), r.hamming_nearest);
    }
  }
  return h;
}

}  // namespace khop
