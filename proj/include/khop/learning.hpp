#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "khop/kernel.hpp"
#include "khop/patterns.hpp"

namespace khop {

enum class Rule { hebbian, llr, klr, krr };

inline std::string_view to_string(Rule r) {
  switch (r) {
    case Rule::hebbian: return "hebbian";
    case Rule::llr: return "llr";
    case Rule::klr: return "klr";
    case Rule::krr: return "krr";
  }
  return "?";
}

inline Rule parse_rule(std::string_view s) {
  if (s == "hebbian") return Rule::hebbian;
  if (s == "llr") return Rule::llr;
  if (s == "klr") return Rule::klr;
  if (s == "krr") return Rule::krr;
  throw std::invalid_argument("unknown rule '" + std::string(s) + "'");
}

inline bool is_kernel_rule(Rule r) { return r == Rule::klr || r == Rule::krr; }

struct LearnConfig {
  double beta = 0.1;
  std::size_t m_updates = 200;
  double lambda = 0.01;

  void validate() const {
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw std::invalid_argument("LearnConfig: beta must be >= 0");
    if (m_updates < 1) throw std::invalid_argument("LearnConfig: m_updates must be >= 1");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("LearnConfig: lambda must be >= 0");
  }
};

// Thrown when gradient descent produces a non-finite loss.
class TrainingError : public std::runtime_error {
 public:
  TrainingError(const std::string& what, std::size_t update)
      : std::runtime_error(what + " (update " + std::to_string(update) + ")"), update_(update) {}
  std::size_t update() const noexcept { return update_; }

 private:
  std::size_t update_;
};

// Explicit synaptic matrix for Hebbian and LLR networks. theta stays zero.
struct WeightMatrix {
  Eigen::MatrixXd w;
  Eigen::VectorXd theta;

  std::size_t n() const noexcept { return static_cast<std::size_t>(w.rows()); }
};

// Dual coefficients alpha (P x N): neuron i's potential is
// h_i(s) = sum_mu alpha(mu, i) K(s, xi^mu).
class DualModel {
 public:
  DualModel() = default;
  DualModel(Eigen::MatrixXd alpha, PatternSet patterns, KernelParams params)
      : alpha_(std::move(alpha)),
        patterns_(std::move(patterns)),
        params_(params),
        theta_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(patterns_.n()))),
        table_(patterns_.n(), params_) {
    if (static_cast<std::size_t>(alpha_.rows()) != patterns_.p() ||
        static_cast<std::size_t>(alpha_.cols()) != patterns_.n()) {
      throw std::invalid_argument("DualModel: alpha must be P x N");
    }
    if (!alpha_.allFinite()) throw std::invalid_argument("DualModel: non-finite alpha");
  }

  const Eigen::MatrixXd& alpha() const noexcept { return alpha_; }
  const PatternSet& patterns() const noexcept { return patterns_; }
  const KernelParams& params() const noexcept { return params_; }
  const Eigen::VectorXd& theta() const noexcept { return theta_; }
  const RbfTable& table() const noexcept { return table_; }
  std::size_t n() const noexcept { return patterns_.n(); }
  std::size_t p() const noexcept { return patterns_.p(); }

 private:
  Eigen::MatrixXd alpha_;
  PatternSet patterns_;
  KernelParams params_;
  Eigen::VectorXd theta_;
  RbfTable table_;
};

using Model = std::variant<WeightMatrix, DualModel>;

// Total loss after each update, losses[0] is the loss at initialization.
struct LearningCurve {
  std::vector<double> losses;
};

namespace detail {

inline double softplus(double h) { return h > 0.0 ? h + std::log1p(std::exp(-h)) : std::log1p(std::exp(h)); }
inline double sigmoid(double h) {
  if (h >= 0.0) return 1.0 / (1.0 + std::exp(-h));
  const double e = std::exp(h);
  return e / (1.0 + e);
}

// P x N matrix of patterns as reals.
inline Eigen::MatrixXd pattern_matrix(const PatternSet& patterns) {
  Eigen::MatrixXd y(patterns.p(), patterns.n());
  for (std::size_t mu = 0; mu < patterns.p(); ++mu)
    for (std::size_t i = 0; i < patterns.n(); ++i) y(mu, i) = patterns[mu][i];
  return y;
}

// 0/1 targets t = (xi + 1) / 2.
inline Eigen::MatrixXd logistic_targets(const PatternSet& patterns) {
  return (pattern_matrix(patterns).array() + 1.0) / 2.0;
}

// sum over entries of softplus(h) - t h, i.e. the logistic NLL.
inline double logistic_nll(const Eigen::MatrixXd& logits, const Eigen::MatrixXd& targets) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < logits.cols(); ++j)
    for (Eigen::Index i = 0; i < logits.rows(); ++i)
      s += softplus(logits(i, j)) - targets(i, j) * logits(i, j);
  return s;
}

inline Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& h) {
  return h.unaryExpr([](double x) { return sigmoid(x); });
}

}  // namespace detail

// W_ij = (1/N) sum_mu xi_i^mu xi_j^mu, zero diagonal.
inline WeightMatrix train_hebbian(const PatternSet& patterns) {
  const Eigen::MatrixXd y = detail::pattern_matrix(patterns);
  const auto n = static_cast<Eigen::Index>(patterns.n());
  WeightMatrix out;
  out.w = (y.transpose() * y) / static_cast<double>(n);
  out.w.diagonal().setZero();
  out.theta = Eigen::VectorXd::Zero(n);
  return out;
}

// Per-neuron logistic NLL of LLR: neuron i predicts t_i from the other
// neurons through the row w_i (w_i[i] is ignored and treated as zero).
inline double llr_neuron_loss(const PatternSet& patterns, std::size_t i, const Eigen::VectorXd& w_i,
                              double lambda) {
  Eigen::VectorXd w = w_i;
  w(static_cast<Eigen::Index>(i)) = 0.0;
  const Eigen::MatrixXd y = detail::pattern_matrix(patterns);
  const Eigen::VectorXd h = y * w;
  double s = 0.0;
  for (std::size_t mu = 0; mu < patterns.p(); ++mu) {
    const double t = (patterns[mu][i] + 1) / 2.0;
    s += detail::softplus(h(mu)) - t * h(mu);
  }
  return s + 0.5 * lambda * w.squaredNorm();
}

inline Eigen::VectorXd llr_neuron_gradient(const PatternSet& patterns, std::size_t i,
                                           const Eigen::VectorXd& w_i, double lambda) {
  Eigen::VectorXd w = w_i;
  w(static_cast<Eigen::Index>(i)) = 0.0;
  const Eigen::MatrixXd y = detail::pattern_matrix(patterns);
  const Eigen::VectorXd h = y * w;
  Eigen::VectorXd r(h.size());
  for (std::size_t mu = 0; mu < patterns.p(); ++mu)
    r(mu) = detail::sigmoid(h(mu)) - (patterns[mu][i] + 1) / 2.0;
  Eigen::VectorXd g = y.transpose() * r + lambda * w;
  g(static_cast<Eigen::Index>(i)) = 0.0;
  return g;
}

// Full-batch gradient descent on every neuron's L2-regularized logistic NLL
// at once. Row i of W is neuron i's weight vector; the diagonal is held at
// zero. No symmetrization is applied.
inline WeightMatrix train_llr(const PatternSet& patterns, const LearnConfig& config) {
  config.validate();
  const Eigen::MatrixXd y = detail::pattern_matrix(patterns);
  const Eigen::MatrixXd t = (y.array() + 1.0) / 2.0;
  const auto n = static_cast<Eigen::Index>(patterns.n());
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t m = 1; m <= config.m_updates; ++m) {
    const Eigen::MatrixXd h = y * w.transpose();  // P x N, h(mu, i)
    Eigen::MatrixXd g = (detail::sigmoid(h) - t).transpose() * y + config.lambda * w;
    g.diagonal().setZero();
    w -= config.beta * g;
    if (!w.allFinite()) throw TrainingError("train_llr: non-finite weights", m);
  }
  return WeightMatrix{std::move(w), Eigen::VectorXd::Zero(n)};
}

// L_i(alpha_i) = sum_mu [softplus(h) - t h] + (lambda/2) alpha_i' K alpha_i, h = K alpha_i.
inline double klr_neuron_loss(const Eigen::MatrixXd& k, const Eigen::VectorXd& alpha_i,
                              const Eigen::VectorXd& t_i, double lambda) {
  const Eigen::VectorXd h = k * alpha_i;
  double s = 0.0;
  for (Eigen::Index mu = 0; mu < h.size(); ++mu) s += detail::softplus(h(mu)) - t_i(mu) * h(mu);
  return s + 0.5 * lambda * alpha_i.dot(h);
}

// grad L_i = K (sigma(K alpha_i) - t_i) + lambda K alpha_i, using K = K'.
inline Eigen::VectorXd klr_neuron_gradient(const Eigen::MatrixXd& k, const Eigen::VectorXd& alpha_i,
                                           const Eigen::VectorXd& t_i, double lambda) {
  const Eigen::VectorXd h = k * alpha_i;
  Eigen::VectorXd r(h.size());
  for (Eigen::Index mu = 0; mu < h.size(); ++mu) r(mu) = detail::sigmoid(h(mu)) - t_i(mu);
  return k * (r + lambda * alpha_i);
}

namespace detail {

// sum_i L_i given logits H = K A.
inline double klr_total_from_logits(const Eigen::MatrixXd& h, const Eigen::MatrixXd& alpha,
                                    const Eigen::MatrixXd& targets, double lambda) {
  return logistic_nll(h, targets) + 0.5 * lambda * (alpha.array() * h.array()).sum();
}

}  // namespace detail

inline double klr_total_loss(const DualModel& model, const PatternSet& patterns, double lambda) {
  const Eigen::MatrixXd k = gram(patterns, model.params());
  const Eigen::MatrixXd h = k * model.alpha();
  return detail::klr_total_from_logits(h, model.alpha(), detail::logistic_targets(patterns), lambda);
}

// All N neuron fits advance together: column i of A is alpha_i, so one
// product K (sigma(K A) - T + lambda A) yields every neuron's gradient.
inline std::pair<DualModel, LearningCurve> train_klr(const PatternSet& patterns, const KernelParams& params,
                                                     const LearnConfig& config) {
  params.validate();
  config.validate();
  const Eigen::MatrixXd k = gram(patterns, params);
  const Eigen::MatrixXd t = detail::logistic_targets(patterns);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(t.rows(), t.cols());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(t.rows(), t.cols());

  LearningCurve curve;
  curve.losses.reserve(config.m_updates + 1);
  curve.losses.push_back(detail::klr_total_from_logits(h, a, t, config.lambda));
  for (std::size_t m = 1; m <= config.m_updates; ++m) {
    const Eigen::MatrixXd r = detail::sigmoid(h) - t + config.lambda * a;
    a.noalias() -= config.beta * (k * r);
    h.noalias() = k * a;
    const double loss = detail::klr_total_from_logits(h, a, t, config.lambda);
    if (!std::isfinite(loss)) throw TrainingError("train_klr: non-finite loss", m);
    curve.losses.push_back(loss);
  }
  return {DualModel(std::move(a), patterns, params), std::move(curve)};
}

// Solves (K + lambda I) alpha = Y with one Cholesky factorization shared by
// all N right-hand sides.
inline DualModel train_krr(const PatternSet& patterns, const KernelParams& params, double lambda) {
  params.validate();
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("train_krr: lambda must be > 0");
  Eigen::MatrixXd k = gram(patterns, params);
  k.diagonal().array() += lambda;
  const Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success) throw TrainingError("train_krr: Cholesky factorization failed", 0);
  Eigen::MatrixXd alpha = llt.solve(detail::pattern_matrix(patterns));
  if (!alpha.allFinite()) throw TrainingError("train_krr: non-finite solution", 0);
  return DualModel(std::move(alpha), patterns, params);
}

// max |(K + lambda I) alpha - Y|
inline double krr_residual(const DualModel& model, double lambda) {
  Eigen::MatrixXd k = gram(model.patterns(), model.params());
  k.diagonal().array() += lambda;
  return (k * model.alpha() - detail::pattern_matrix(model.patterns())).cwiseAbs().maxCoeff();
}

struct TrainOutcome {
  Model model;
  std::optional<LearningCurve> curve;
  double seconds = 0.0;
};

// Trains with `rule` and times the training call alone. For kernel rules the
// clock includes the rule's own Gram construction.
inline TrainOutcome measure_training(Rule rule, const PatternSet& patterns, const KernelParams& params,
                                     const LearnConfig& config) {
  using clock = std::chrono::steady_clock;
  TrainOutcome out;
  const auto start = clock::now();
  switch (rule) {
    case Rule::hebbian: out.model = train_hebbian(patterns); break;
    case Rule::llr: out.model = train_llr(patterns, config); break;
    case Rule::klr: {
      auto [model, curve] = train_klr(patterns, params, config);
      out.model = std::move(model);
      out.curve = std::move(curve);
      break;
    }
    case Rule::krr: out.model = train_krr(patterns, params, config.lambda); break;
  }
  out.seconds = std::chrono::duration<double>(clock::now() - start).count();
  return out;
}

}  // namespace khop
