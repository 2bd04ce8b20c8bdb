#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "khop/analysis.hpp"
#include "khop/dynamics.hpp"
#include "khop/learning.hpp"
#include "khop/patterns.hpp"
#include "khop/rng.hpp"

// Independent reference computations: finite differences, naive loops,
// a general dense solver and exhaustive state enumeration. None of them go
// through the code paths they are used to check.
namespace khop::oracle {

// Central finite-difference gradient of f at x.
template <class F>
Eigen::VectorXd finite_difference(F&& f, const Eigen::VectorXd& x, double h = 1e-5) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x, xm = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    xp(j) = x(j) + h;
    xm(j) = x(j) - h;
    g(j) = (f(xp) - f(xm)) / (2.0 * h);
    xp(j) = xm(j) = x(j);
  }
  return g;
}

inline double relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).norm() / std::max(b.norm(), 1e-300);
}

// Kernel value from the dense squared distance rather than Hamming counts.
inline double dense_rbf(const State& x, const State& y, double gamma) {
  double d2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double diff = static_cast<double>(x[i]) - static_cast<double>(y[i]);
    d2 += diff * diff;
  }
  return std::exp(-gamma * d2);
}

inline Eigen::MatrixXd naive_gram(const PatternSet& patterns, double gamma) {
  Eigen::MatrixXd k(patterns.p(), patterns.p());
  for (std::size_t a = 0; a < patterns.p(); ++a)
    for (std::size_t b = 0; b < patterns.p(); ++b) k(a, b) = dense_rbf(patterns[a], patterns[b], gamma);
  return k;
}

// Eq.-by-eq. KLR loss: loops over neurons and patterns with log(sigma).
inline double naive_klr_total_loss(const Eigen::MatrixXd& alpha, const PatternSet& patterns, double gamma,
                                   double lambda) {
  const Eigen::MatrixXd k = naive_gram(patterns, gamma);
  double total = 0.0;
  for (std::size_t i = 0; i < patterns.n(); ++i) {
    double nll = 0.0, reg = 0.0;
    for (std::size_t mu = 0; mu < patterns.p(); ++mu) {
      double h = 0.0;
      for (std::size_t nu = 0; nu < patterns.p(); ++nu) h += alpha(nu, i) * k(mu, nu);
      const double t = (patterns[mu][i] + 1) / 2.0;
      const double sig = 1.0 / (1.0 + std::exp(-h));
      nll -= t * std::log(sig) + (1.0 - t) * std::log(1.0 - sig);
      for (std::size_t nu = 0; nu < patterns.p(); ++nu) reg += alpha(mu, i) * k(mu, nu) * alpha(nu, i);
    }
    total += nll + 0.5 * lambda * reg;
  }
  return total;
}

inline Eigen::MatrixXd naive_hebbian(const PatternSet& patterns) {
  const std::size_t n = patterns.n();
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      for (std::size_t mu = 0; mu < patterns.p(); ++mu) w(i, j) += patterns[mu][i] * patterns[mu][j];
      w(i, j) /= static_cast<double>(n);
    }
  return w;
}

// Dual-form potentials by a double loop over neurons and patterns.
inline Eigen::VectorXd naive_dual_potentials(const State& s, const DualModel& m) {
  Eigen::VectorXd h = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m.n()));
  for (std::size_t i = 0; i < m.n(); ++i)
    for (std::size_t mu = 0; mu < m.p(); ++mu)
      h(i) += m.alpha()(mu, i) * dense_rbf(s, m.patterns()[mu], m.params().gamma);
  return h;
}

inline Eigen::VectorXd naive_weight_potentials(const State& s, const WeightMatrix& m) {
  Eigen::VectorXd h = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m.n()));
  for (std::size_t i = 0; i < m.n(); ++i)
    for (std::size_t j = 0; j < m.n(); ++j)
      if (j != i) h(i) += m.w(i, j) * s[j];
  return h;
}

inline Eigen::VectorXd naive_potentials(const State& s, const Model& m) {
  if (const auto* d = std::get_if<DualModel>(&m)) return naive_dual_potentials(s, *d);
  return naive_weight_potentials(s, std::get<WeightMatrix>(m));
}

// State with index bits: bit i set -> +1.
inline State state_from_index(std::size_t n, std::uint64_t code) {
  std::vector<std::int8_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = ((code >> i) & 1ULL) ? 1 : -1;
  return State(std::move(v));
}

// All s in {-1,+1}^N with sign(h(s)) = s, by exhaustive scan (N <= 20).
inline std::vector<std::uint64_t> enumerate_fixed_points(const Model& m, std::size_t n) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t code = 0; code < (1ULL << n); ++code) {
    const State s = state_from_index(n, code);
    const Eigen::VectorXd h = naive_potentials(s, m);
    bool fixed = true;
    for (std::size_t i = 0; i < n && fixed; ++i) fixed = ((h(i) >= 0.0) ? 1 : -1) == s[i];
    if (fixed) out.push_back(code);
  }
  return out;
}

inline std::uint64_t state_code(const State& s) {
  std::uint64_t code = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s[i] > 0) code |= 1ULL << i;
  return code;
}

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

inline Check check_klr_gradient(std::uint64_t seed, std::size_t instances = 20) {
  SplitMix64 rng(seed);
  double worst = 0.0;
  for (std::size_t k = 0; k < instances; ++k) {
    const std::size_t n = 4 + rng.below(17), p = 2 + rng.below(7);
    const double gamma = 0.02 + 0.2 * static_cast<double>(rng.below(1000)) / 1000.0;
    const double lambda = 0.01;
    const PatternSet pats = generate_patterns(n, p, rng());
    const Eigen::MatrixXd kmat = gram(pats, KernelParams{gamma});
    const std::size_t i = rng.below(n);
    Eigen::VectorXd t(p);
    for (std::size_t mu = 0; mu < p; ++mu) t(mu) = (pats[mu][i] + 1) / 2.0;
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(p);
    for (int round = 0; round < 2; ++round) {
      auto f = [&](const Eigen::VectorXd& a) { return klr_neuron_loss(kmat, a, t, lambda); };
      worst = std::max(worst, relative_error(klr_neuron_gradient(kmat, alpha, t, lambda), finite_difference(f, alpha)));
      for (int u = 0; u < 10; ++u) alpha -= 0.1 * klr_neuron_gradient(kmat, alpha, t, lambda);
    }
  }
  std::ostringstream d;
  d << "max relative error " << worst << " over " << instances << " instances";
  return {"klr-gradient-vs-finite-differences", worst < 1e-5, d.str()};
}

inline Check check_krr_residual(std::uint64_t seed) {
  double worst = 0.0;
  for (std::size_t k = 0; k < 6; ++k) {
    const std::size_t n = 20 + 10 * k, p = 5 + 15 * k;
    const PatternSet pats = generate_patterns(n, p, derive_seed(seed, "krr-residual", k));
    for (double lambda : {1e-4, 1e-2, 1e-1}) {
      const DualModel m = train_krr(pats, KernelParams::from_scaling(2.0, n), lambda);
      worst = std::max(worst, krr_residual(m, lambda));
    }
  }
  std::ostringstream d;
  d << "max residual " << worst;
  return {"krr-residual", worst < 1e-8, d.str()};
}

inline Check check_loss_at_zero(std::uint64_t seed) {
  double worst = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    const std::size_t n = 10 + 30 * k, p = 3 + 20 * k;
    const PatternSet pats = generate_patterns(n, p, derive_seed(seed, "loss-zero", k));
    LearnConfig lc;
    lc.m_updates = 1;
    const auto [m, curve] = train_klr(pats, KernelParams::from_scaling(2.0, n), lc);
    const double expect = static_cast<double>(n * p) * std::log(2.0);
    worst = std::max(worst, std::abs(curve.losses[0] - expect) / expect);
  }
  std::ostringstream d;
  d << "max relative deviation " << worst;
  return {"klr-loss-at-zero", worst < 1e-9, d.str()};
}

// Runs recall from every state and compares the fixed points it reaches,
// split into learned and spurious, with the exhaustive inventory.
inline Check check_fixed_point_inventory(std::uint64_t seed) {
  std::ostringstream d;
  bool ok = true;
  for (std::size_t n : {8u, 10u, 12u}) {
    // Odd P with even N keeps every Hebbian potential away from exactly 0.
    const PatternSet pats = generate_patterns(n, 5, derive_seed(seed, "enumeration", n));
    LearnConfig lc;
    const std::vector<std::pair<std::string, Model>> models{
        {"hebbian", train_hebbian(pats)},
        {"klr", train_klr(pats, KernelParams::from_scaling(2.0, n), lc).first},
        {"krr", train_krr(pats, KernelParams::from_scaling(2.0, n), 0.01)}};
    for (const auto& [name, model] : models) {
      const auto brute = enumerate_fixed_points(model, n);
      std::set<std::uint64_t> found, learned, spurious;
      for (std::uint64_t code = 0; code < (1ULL << n); ++code) {
        const RecallTrace tr = std::visit(
            [&](const auto& m) { return recall(state_from_index(n, code), m, DynParams{}); }, model);
        if (tr.outcome != Outcome::fixed_point) continue;
        found.insert(state_code(tr.final));
        const auto cls = classify(tr, pats, 0);
        (cls == Classification::spurious_fixed_point ? spurious : learned).insert(state_code(tr.final));
      }
      const std::set<std::uint64_t> expect(brute.begin(), brute.end());
      const bool agree = found == expect && learned.size() + spurious.size() == found.size();
      ok = ok && agree;
      d << name << "@N=" << n << ": " << expect.size() << " fixed points (" << learned.size() << " learned, "
        << spurious.size() << " spurious)" << (agree ? "" : " MISMATCH") << "; ";
    }
  }
  return {"fixed-point-enumeration", ok, d.str()};
}

inline Check check_pattern_algebra(std::uint64_t seed) {
  bool ok = true;
  SplitMix64 rng(seed);
  for (int k = 0; k < 200 && ok; ++k) {
    const std::size_t n = 2 + rng.below(300);
    const PatternSet ab = generate_patterns(n, 2, rng());
    const long long d = static_cast<long long>(hamming(ab[0], ab[1]));
    ok = overlap(ab[0], ab[1]) ==
         static_cast<double>(static_cast<long long>(n) - 2 * d) / static_cast<double>(n);
    for (int g = 0; g <= 20 && ok; ++g) {
      const double s = g / 20.0;
      const State c = corrupt(ab[0], s, rng());
      ok = hamming(c, ab[0]) == flip_count(n, s);
    }
  }
  return {"overlap-hamming-corruption", ok, ok ? "identities hold" : "identity violated"};
}

inline Check check_hebbian(std::uint64_t seed) {
  const PatternSet pats = generate_patterns(60, 7, derive_seed(seed, "hebbian", 0));
  const WeightMatrix w = train_hebbian(pats);
  const bool sym = (w.w - w.w.transpose()).cwiseAbs().maxCoeff() == 0.0;
  const bool diag = w.w.diagonal().cwiseAbs().maxCoeff() == 0.0;
  const double dev = (w.w - naive_hebbian(pats)).cwiseAbs().maxCoeff();
  return {"hebbian-weights", sym && diag && dev < 1e-12,
          "symmetric=" + std::to_string(sym) + " zero-diagonal=" + std::to_string(diag)};
}

inline std::vector<Check> run_invariant_suite(std::uint64_t seed) {
  return {check_pattern_algebra(seed), check_hebbian(seed), check_klr_gradient(seed), check_loss_at_zero(seed),
          check_krr_residual(seed), check_fixed_point_inventory(seed)};
}

}  // namespace khop::oracle
