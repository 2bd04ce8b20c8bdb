#include <cmath>

#include <gtest/gtest.h>

#include "khop/analysis.hpp"
#include "khop/rng.hpp"

namespace khop {
namespace {

RecallTrace trace(const State& final, Outcome o, std::size_t steps = 2) {
  RecallTrace t;
  t.final = final;
  t.outcome = o;
  t.steps = steps;
  return t;
}

TrialRecord rec(std::uint64_t seed, Classification c, std::size_t steps = 2) {
  TrialRecord r;
  r.master_seed = seed;
  r.classification = c;
  r.outcome = implied_outcome(c);
  r.steps = steps;
  return r;
}

TEST(Classify, ExactMatches) {
  const PatternSet p = generate_patterns(50, 4, 1);
  EXPECT_EQ(classify(trace(p[2], Outcome::fixed_point), p, 2), Classification::target);
  EXPECT_EQ(classify(trace(p[3], Outcome::fixed_point), p, 2), Classification::other_learned);
}

TEST(Classify, OneBitOffIsSpurious) {
  const PatternSet p = generate_patterns(50, 4, 1);
  State s = p[2];
  s.flip(17);
  EXPECT_EQ(classify(trace(s, Outcome::fixed_point), p, 2), Classification::spurious_fixed_point);
  EXPECT_EQ(classify(trace(s, Outcome::limit_cycle), p, 2), Classification::spurious_cycle);
  EXPECT_EQ(classify(trace(p[2], Outcome::not_converged), p, 2), Classification::not_converged);
}

TEST(Nearest, PrefersTargetOnTies) {
  const PatternSet p(std::vector<State>{State(4), State(4)}, 0);
  EXPECT_EQ(nearest_pattern(State(4), p, 1).index, 1u);
  EXPECT_EQ(nearest_pattern(State(4), p, 7).index, 0u);
}

TEST(MakeRecord, ClassAndDistanceAgree) {
  const PatternSet p = generate_patterns(60, 6, 2);
  for (std::size_t target = 0; target < 6; ++target)
    for (std::size_t mu = 0; mu < 6; ++mu) {
      const TrialRecord r = make_record(1, {}, target, 0, trace(p[mu], Outcome::fixed_point), p);
      EXPECT_EQ(r.hamming_nearest, 0u);
      EXPECT_EQ(r.nearest_idx, mu);
      EXPECT_EQ(r.classification, mu == target ? Classification::target : Classification::other_learned);
    }
}

TEST(ConfidenceInterval, IdenticalValues) {
  const Interval ci = confidence_interval({0.7, 0.7, 0.7});
  EXPECT_DOUBLE_EQ(ci.mean, 0.7);
  EXPECT_NEAR(ci.half_width, 0.0, 1e-15);
}

// Hand computation: sd = sqrt(1/2) = 0.70711, t(0.975, 1) = 12.7062.
TEST(ConfidenceInterval, TwoValues) {
  const Interval ci = confidence_interval({0.0, 1.0});
  EXPECT_DOUBLE_EQ(ci.mean, 0.5);
  EXPECT_NEAR(ci.half_width, 6.3531024, 1e-6);
}

// sd = sqrt(0.008 / 4) = 0.0447214, t(0.975, 4) = 2.7764451.
TEST(ConfidenceInterval, FiveSeeds) {
  const Interval ci = confidence_interval({1, 1, 1, 1, 0.9});
  EXPECT_NEAR(ci.mean, 0.98, 1e-15);
  EXPECT_NEAR(ci.half_width, 0.0555289, 1e-6);
}

TEST(ConfidenceInterval, NeedsTwoValues) {
  EXPECT_THROW(confidence_interval({1.0}), std::invalid_argument);
  EXPECT_NEAR(t975(4), 2.7764451, 1e-6);
}

TEST(Aggregate, AllTarget) {
  std::vector<TrialRecord> rs;
  for (std::uint64_t s = 1; s <= 5; ++s)
    for (int k = 0; k < 10; ++k) rs.push_back(rec(s, Classification::target));
  const MetricsSummary m = aggregate(rs);
  EXPECT_EQ(m.target_recall_rate.mean, 1.0);
  EXPECT_EQ(m.target_recall_rate.half_width, 0.0);
  EXPECT_EQ(m.avg_steps_to_converge.mean, 2.0);
}

TEST(Aggregate, PerSeedRatesAndInterval) {
  std::vector<TrialRecord> rs;
  for (std::uint64_t s = 1; s <= 5; ++s)
    for (int k = 0; k < 10; ++k)
      rs.push_back(rec(s, (s == 5 && k == 0) ? Classification::spurious_fixed_point : Classification::target));
  const MetricsSummary m = aggregate(rs);
  EXPECT_NEAR(m.target_recall_rate.mean, 0.98, 1e-15);
  EXPECT_NEAR(m.target_recall_rate.half_width, 0.0555289, 1e-6);
  EXPECT_EQ(m.target_recall_rate.per_seed, (std::vector<double>{1, 1, 1, 1, 0.9}));
}

TEST(Aggregate, NoConvergedTrialsLeavesStepsUndefined) {
  std::vector<TrialRecord> rs{rec(1, Classification::not_converged, 30), rec(2, Classification::not_converged, 30)};
  const MetricsSummary m = aggregate(rs);
  EXPECT_TRUE(std::isnan(m.avg_steps_to_converge.mean));
  EXPECT_EQ(m.not_converged_rate.mean, 1.0);
  EXPECT_EQ(m.fixed_point_rate.mean, 0.0);
  EXPECT_THROW(aggregate({}), std::invalid_argument);
}

TEST(Aggregate, StepsOnlyOverConvergedTrials) {
  std::vector<TrialRecord> rs{rec(1, Classification::target, 2), rec(1, Classification::spurious_cycle, 4),
                              rec(1, Classification::not_converged, 30)};
  EXPECT_DOUBLE_EQ(aggregate(rs).avg_steps_to_converge.mean, 3.0);
}

// Random record sets: class rates partition each seed and the fixed-point
// identity holds exactly.
TEST(AggregateProperties, PartitionAndFixedPointIdentity) {
  SplitMix64 rng(5);
  for (int k = 0; k < 50; ++k) {
    std::vector<TrialRecord> rs;
    const std::size_t seeds = 1 + rng.below(6);
    for (std::uint64_t s = 0; s < seeds; ++s) {
      const std::size_t trials = 1 + rng.below(40);
      for (std::size_t t = 0; t < trials; ++t)
        rs.push_back(rec(s, kAllClassifications[rng.below(5)], 1 + rng.below(30)));
    }
    const MetricsSummary m = aggregate(rs);
    for (std::size_t s = 0; s < seeds; ++s) {
      const double sum = m.target_recall_rate.per_seed[s] + m.other_learned_rate.per_seed[s] +
                         m.spurious_fixed_point_rate.per_seed[s] + m.spurious_cycle_rate.per_seed[s] +
                         m.not_converged_rate.per_seed[s];
      EXPECT_NEAR(sum, 1.0, 1e-12);
      EXPECT_EQ(m.fixed_point_rate.per_seed[s],
                1.0 - (m.cycle_rate.per_seed[s] + m.not_converged_rate.per_seed[s]));
      EXPECT_EQ(m.cycle_rate.per_seed[s], m.spurious_cycle_rate.per_seed[s]);
      for (const Metric* x : {&m.target_recall_rate, &m.cycle_rate, &m.fixed_point_rate})
        EXPECT_TRUE(x->per_seed[s] >= 0.0 && x->per_seed[s] <= 1.0);
    }
  }
}

TEST(HammingValidation, OtherLearnedAtZero) {
  std::vector<TrialRecord> rs(3, rec(1, Classification::other_learned));
  const HammingHistogram h = hamming_validation(rs);
  EXPECT_EQ(h.counts.at(Classification::other_learned).at(0), 3u);
  EXPECT_FALSE(h.min_spurious_distance.has_value());
}

TEST(HammingValidation, MinSpuriousDistanceAndTargetsSkipped) {
  auto a = rec(1, Classification::spurious_fixed_point);
  a.hamming_nearest = 23;
  auto b = rec(1, Classification::spurious_cycle);
  b.hamming_nearest = 14;
  const HammingHistogram h = hamming_validation({a, b, rec(1, Classification::target)});
  EXPECT_EQ(*h.min_spurious_distance, 14u);
  EXPECT_EQ(h.counts.count(Classification::target), 0u);
  EXPECT_TRUE(hamming_validation({}).empty());
}

}  // namespace
}  // namespace khop
