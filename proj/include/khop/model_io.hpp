#pragma once

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>

#include "khop/learning.hpp"
#include "khop/patterns.hpp"

namespace khop {

// Text model dump:
//
//   khop-model 1
//   rule <hebbian|llr|klr|krr>
//   n <N>  p <P>  seed <pattern seed>
//   gamma <g>  lambda <l>
//   patterns            P lines of '+' / '-'
//   alpha | weights     P x N (dual) or N x N (weights) reals, %.17g
//
// The stored patterns are always included so `recall` can classify.
struct ModelFile {
  Rule rule = Rule::klr;
  double lambda = 0.0;
  PatternSet patterns;
  Model model;
};

inline constexpr int kModelFormatVersion = 1;

inline std::string pattern_line(const State& s) {
  std::string line(s.size(), '+');
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s[i] < 0) line[i] = '-';
  return line;
}

inline State parse_pattern_line(const std::string& line) {
  std::vector<std::int8_t> v;
  v.reserve(line.size());
  for (char c : line) {
    if (c == '+') {
      v.push_back(1);
    } else if (c == '-') {
      v.push_back(-1);
    } else {
      throw std::invalid_argument(std::string("state: unexpected character '") + c + "'");
    }
  }
  return State(std::move(v));
}

inline void write_model(std::ostream& out, const ModelFile& f) {
  char buf[32];
  auto real = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf);
  };
  const bool dual = std::holds_alternative<DualModel>(f.model);
  const double gamma = dual ? std::get<DualModel>(f.model).params().gamma : 0.0;
  out << "khop-model " << kModelFormatVersion << '\n'
      << "rule " << to_string(f.rule) << '\n'
      << "n " << f.patterns.n() << '\n'
      << "p " << f.patterns.p() << '\n'
      << "seed " << f.patterns.seed() << '\n'
      << "gamma " << real(gamma) << '\n'
      << "lambda " << real(f.lambda) << '\n'
      << "patterns\n";
  for (const auto& s : f.patterns.rows()) out << pattern_line(s) << '\n';
  const Eigen::MatrixXd& m = dual ? std::get<DualModel>(f.model).alpha() : std::get<WeightMatrix>(f.model).w;
  out << (dual ? "alpha" : "weights") << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? " " : "") << real(m(r, c));
    out << '\n';
  }
}

inline ModelFile read_model(std::istream& in) {
  auto fail = [](const std::string& m) -> void { throw std::invalid_argument("model file: " + m); };
  auto expect = [&](const std::string& key) {
    std::string k;
    if (!(in >> k) || k != key) fail("expected '" + key + "'");
  };
  expect("khop-model");
  int version = 0;
  in >> version;
  if (version != kModelFormatVersion) fail("unsupported version " + std::to_string(version));
  ModelFile f;
  std::string rule;
  std::size_t n = 0, p = 0;
  std::uint64_t seed = 0;
  double gamma = 0.0;
  expect("rule");
  in >> rule;
  f.rule = parse_rule(rule);
  expect("n");
  in >> n;
  expect("p");
  in >> p;
  expect("seed");
  in >> seed;
  expect("gamma");
  in >> gamma;
  expect("lambda");
  in >> f.lambda;
  expect("patterns");
  if (!in || n == 0 || p == 0) fail("bad header");
  std::vector<State> rows;
  for (std::size_t mu = 0; mu < p; ++mu) {
    std::string line;
    in >> line;
    if (line.size() != n) fail("pattern " + std::to_string(mu) + " has wrong length");
    rows.push_back(parse_pattern_line(line));
  }
  f.patterns = PatternSet(std::move(rows), seed);
  const bool dual = is_kernel_rule(f.rule);
  expect(dual ? "alpha" : "weights");
  Eigen::MatrixXd m(dual ? p : n, n);
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      if (!(in >> m(r, c))) fail("truncated coefficient block");
  if (dual) {
    f.model = DualModel(std::move(m), f.patterns, KernelParams{gamma});
  } else {
    f.model = WeightMatrix{std::move(m), Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n))};
  }
  return f;
}

}  // namespace khop
