#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "khop/kernel.hpp"
#include "khop/learning.hpp"
#include "khop/patterns.hpp"

namespace khop {

enum class Outcome { fixed_point, limit_cycle, not_converged };

inline std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::fixed_point: return "fixed_point";
    case Outcome::limit_cycle: return "limit_cycle";
    case Outcome::not_converged: return "not_converged";
  }
  return "?";
}

struct DynParams {
  std::size_t max_steps = 30;

  void validate() const {
    if (max_steps < 1) throw std::invalid_argument("DynParams: max_steps must be >= 1");
  }
};

struct RecallTrace {
  State initial;
  State final;
  Outcome outcome = Outcome::not_converged;
  std::size_t period = 0;  // >= 2 for limit cycles, 1 for fixed points, 0 otherwise
  std::size_t steps = 0;
  std::size_t visited_count = 0;
};

// Reusable buffers so the recall loop does not allocate per step.
struct Workspace {
  Eigen::VectorXd kernel;
  Eigen::VectorXd s;
  Eigen::VectorXd h;
};

inline void potentials_into(const State& state, const WeightMatrix& model, Workspace& ws) {
  if (state.size() != model.n()) throw std::invalid_argument("potentials: dimension mismatch");
  ws.s.resize(static_cast<Eigen::Index>(state.size()));
  for (std::size_t i = 0; i < state.size(); ++i) ws.s(i) = state[i];
  ws.h.noalias() = model.w * ws.s;
  ws.h -= model.w.diagonal().cwiseProduct(ws.s);  // sum over j != i
}

inline void potentials_into(const State& state, const DualModel& model, Workspace& ws) {
  if (state.size() != model.n()) throw std::invalid_argument("potentials: dimension mismatch");
  kernel_vector_into(state, model.patterns(), model.table(), ws.kernel);
  ws.h.noalias() = model.alpha().transpose() * ws.kernel;
}

inline void potentials_into(const State& state, const Model& model, Workspace& ws) {
  std::visit([&](const auto& m) { potentials_into(state, m, ws); }, model);
}

// Weight form: h_i = sum_{j != i} W_ij s_j. Dual form: h = alpha' k(s).
template <class M>
Eigen::VectorXd potentials(const State& state, const M& model) {
  Workspace ws;
  potentials_into(state, model, ws);
  return ws.h;
}

inline const Eigen::VectorXd& model_theta(const WeightMatrix& m) { return m.theta; }
inline const Eigen::VectorXd& model_theta(const DualModel& m) { return m.theta(); }
inline const Eigen::VectorXd& model_theta(const Model& m) {
  return std::visit([](const auto& x) -> const Eigen::VectorXd& { return model_theta(x); }, m);
}

namespace detail {

// s_i = sign(h_i - theta_i), sign(0) = +1.
inline State threshold(const Eigen::VectorXd& h, const Eigen::VectorXd& theta) {
  std::vector<std::int8_t> v(static_cast<std::size_t>(h.size()));
  for (Eigen::Index i = 0; i < h.size(); ++i) v[i] = (h(i) - theta(i) >= 0.0) ? 1 : -1;
  return State(std::move(v));
}

}  // namespace detail

// One synchronous update of all neurons from the same potentials.
template <class M>
State step(const State& state, const M& model, const Eigen::VectorXd& theta, Workspace& ws) {
  potentials_into(state, model, ws);
  if (theta.size() != ws.h.size()) throw std::invalid_argument("step: theta dimension mismatch");
  return detail::threshold(ws.h, theta);
}

template <class M>
State step(const State& state, const M& model, const Eigen::VectorXd& theta) {
  Workspace ws;
  return step(state, model, theta, ws);
}

template <class M>
State step(const State& state, const M& model) {
  return step(state, model, model_theta(model));
}

// Iterates synchronous updates until the new state equals its predecessor
// (fixed point), revisits an earlier state (limit cycle), or the budget runs
// out. Every visited state is stored exactly; the budget keeps this small.
template <class M>
RecallTrace recall(const State& initial, const M& model, const DynParams& dyn) {
  dyn.validate();
  const Eigen::VectorXd& theta = model_theta(model);
  Workspace ws;
  std::vector<State> visited{initial};
  visited.reserve(dyn.max_steps + 1);

  RecallTrace trace;
  trace.initial = initial;
  for (std::size_t t = 1; t <= dyn.max_steps; ++t) {
    State next = step(visited.back(), model, theta, ws);
    if (next == visited.back()) {
      trace.outcome = Outcome::fixed_point;
      trace.period = 1;
      trace.steps = t;
      trace.visited_count = visited.size();
      trace.final = std::move(next);
      return trace;
    }
    for (std::size_t j = 0; j + 1 < visited.size(); ++j) {
      if (visited[j] == next) {
        trace.outcome = Outcome::limit_cycle;
        trace.period = t - j;
        trace.steps = t;
        trace.visited_count = visited.size();
        trace.final = std::move(next);
        return trace;
      }
    }
    visited.push_back(std::move(next));
  }
  trace.outcome = Outcome::not_converged;
  trace.steps = dyn.max_steps;
  trace.visited_count = visited.size();
  trace.final = visited.back();
  return trace;
}

// V(s) = -sum_k s_k h_k(s)
template <class M>
double lyapunov(const State& state, const M& model) {
  const Eigen::VectorXd h = potentials(state, model);
  double v = 0.0;
  for (std::size_t k = 0; k < state.size(); ++k) v -= state[k] * h(static_cast<Eigen::Index>(k));
  return v;
}

}  // namespace khop
