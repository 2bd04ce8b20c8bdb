#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "khop/patterns.hpp"

namespace khop {

struct KernelParams {
  double gamma = 0.02;

  // gamma = c / N
  static KernelParams from_scaling(double c, std::size_t n) {
    return KernelParams{c / static_cast<double>(n)};
  }
  double scaling(std::size_t n) const noexcept { return gamma * static_cast<double>(n); }

  void validate() const {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
      throw std::invalid_argument("KernelParams: gamma must be positive and finite");
    }
  }
};

// For bipolar vectors ||x - y||^2 = 4 d_H(x, y).
inline double rbf_from_hamming(std::size_t d, double gamma) {
  return std::exp(-4.0 * gamma * static_cast<double>(d));
}

inline double rbf(const State& x, const State& y, const KernelParams& params) {
  params.validate();
  return rbf_from_hamming(hamming(x, y), params.gamma);
}

// exp(-4 gamma d) tabulated for d = 0..N. Recall evaluates P kernels per
// step, all at integer distances, so the table turns them into lookups.
class RbfTable {
 public:
  RbfTable() = default;
  RbfTable(std::size_t n, const KernelParams& params) : table_(n + 1) {
    params.validate();
    for (std::size_t d = 0; d <= n; ++d) table_[d] = rbf_from_hamming(d, params.gamma);
  }
  double operator()(std::size_t d) const noexcept { return table_[d]; }
  std::size_t n() const noexcept { return table_.empty() ? 0 : table_.size() - 1; }

 private:
  std::vector<double> table_;
};

using GramMatrix = Eigen::MatrixXd;

inline GramMatrix gram(const PatternSet& patterns, const KernelParams& params) {
  const RbfTable table(patterns.n(), params);
  const std::size_t p = patterns.p();
  GramMatrix k(p, p);
  for (std::size_t mu = 0; mu < p; ++mu) {
    k(mu, mu) = 1.0;
    for (std::size_t nu = mu + 1; nu < p; ++nu) {
      const double v = table(hamming(patterns[mu], patterns[nu]));
      k(mu, nu) = v;
      k(nu, mu) = v;
    }
  }
  return k;
}

inline void kernel_vector_into(const State& state, const PatternSet& patterns,
                               const RbfTable& table, Eigen::VectorXd& out) {
  if (state.size() != patterns.n()) throw std::invalid_argument("kernel_vector: length mismatch");
  out.resize(static_cast<Eigen::Index>(patterns.p()));
  for (std::size_t mu = 0; mu < patterns.p(); ++mu) out(mu) = table(hamming(state, patterns[mu]));
}

inline Eigen::VectorXd kernel_vector(const State& state, const PatternSet& patterns,
                                     const KernelParams& params) {
  Eigen::VectorXd k;
  kernel_vector_into(state, patterns, RbfTable(patterns.n(), params), k);
  return k;
}

}  // namespace khop
