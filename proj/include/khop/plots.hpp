#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "khop/analysis.hpp"
#include "khop/report.hpp"
#include "khop/svg.hpp"

namespace khop {

inline constexpr std::string_view kFigureKinds[] = {"1a", "1b", "1c", "1d", "2a", "2b", "3a", "3b", "4", "A", "B", "C"};

namespace detail {

// One series per distinct value of the `group` columns, points sorted by x.
// `ci` names a half-width column, or a spread column when `ci_is_sd`.
inline std::vector<svg::Series> grouped_series(const CsvTable& t, const std::string& x, const std::string& y,
                                               const std::string& ci, const std::vector<std::string>& group,
                                               const std::string& prefix = "") {
  const auto xs = t.reals(x);
  const auto ys = t.reals(y);
  std::vector<double> cis;
  if (!ci.empty()) cis = t.reals(ci);
  std::map<std::string, std::vector<std::size_t>> rows;
  std::vector<std::string> order;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    std::string key = prefix;
    for (const auto& g : group) {
      if (!key.empty()) key += ' ';
      const std::string& v = t.rows[r][t.index(g)];
      key += g + "=" + (g == "rule" ? v : svg::detail::label(parse_real(v)));
    }
    if (!rows.count(key)) order.push_back(key);
    rows[key].push_back(r);
  }
  std::vector<svg::Series> out;
  for (const auto& key : order) {
    auto idx = rows[key];
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    svg::Series s;
    s.name = key.empty() ? y : key;
    for (std::size_t r : idx) {
      s.x.push_back(xs[r]);
      s.y.push_back(ys[r]);
      if (!cis.empty()) {
        const double h = std::isnan(cis[r]) ? 0.0 : cis[r];
        s.lo.push_back(ys[r] - h);
        s.hi.push_back(ys[r] + h);
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

inline void require(const CsvTable& t, std::initializer_list<std::string_view> cols, std::string_view fig) {
  for (auto c : cols)
    if (!t.has(c)) throw std::invalid_argument("figure " + std::string(fig) + ": missing column '" + std::string(c) + "'");
}

}  // namespace detail

// Renders figure `fig` from the CSV written by the matching experiment.
inline std::string plot_figure(const CsvTable& t, std::string_view fig) {
  using detail::grouped_series;
  using detail::require;
  svg::LineChart c;
  const std::string recall = "target_recall_rate", steps = "avg_steps_to_converge";
  if (fig == "1a" || fig == "2a" || fig == "3a") {
    require(t, {"load", recall, recall + "_ci"}, fig);
    const std::string g = fig == "1a" ? "similarity" : fig == "2a" ? "rule" : "n";
    require(t, {g}, fig);
    c = {"Capacity curve", "storage load P/N", "target recall rate", false,
         grouped_series(t, "load", recall, recall + "_ci", {g})};
  } else if (fig == "1b") {
    require(t, {"load", "similarity", "other_learned_rate", "spurious_fixed_point_rate"}, fig);
    c = {"Error decomposition", "storage load P/N", "rate", false, {}};
    for (auto& s : grouped_series(t, "load", "other_learned_rate", "other_learned_rate_ci", {"similarity"}, "other"))
      c.series.push_back(std::move(s));
    for (auto& s : grouped_series(t, "load", "spurious_fixed_point_rate", "spurious_fixed_point_rate_ci",
                                  {"similarity"}, "spurious"))
      c.series.push_back(std::move(s));
  } else if (fig == "1c") {
    require(t, {"load", "similarity", recall}, fig);
    c = {"Noise robustness", "initial similarity", "target recall rate", false,
         grouped_series(t, "similarity", recall, recall + "_ci", {"load"})};
  } else if (fig == "1d" || fig == "3b") {
    const std::string g = fig == "1d" ? "similarity" : "n";
    require(t, {"load", steps, g}, fig);
    c = {"Convergence speed", "storage load P/N", "average steps to converge", false,
         grouped_series(t, "load", steps, steps + "_ci", {g})};
  } else if (fig == "2b") {
    require(t, {"load", "rule", "train_seconds_mean", "train_seconds_sd"}, fig);
    c = {"Training time", "storage load P/N", "training time [s] (log scale)", true,
         grouped_series(t, "load", "train_seconds_mean", "train_seconds_sd", {"rule"})};
  } else if (fig == "4") {
    require(t, {"c", "lambda", "load", recall}, fig);
    c = {"Hyperparameter sensitivity", "kernel scaling factor c (gamma = c/N)", "target recall rate", false,
         grouped_series(t, "c", recall, recall + "_ci", {"load", "lambda"})};
  } else if (fig == "A") {
    require(t, {"seed", "update", "loss"}, fig);
    c = {"KLR learning curve", "update", "total loss (log scale)", true,
         grouped_series(t, "update", "loss", "", {"seed"})};
  } else if (fig == "B") {
    svg::Histogram h{"Distance of failed finals to nearest stored pattern", "Hamming distance", "trials", {}};
    std::map<std::string, std::map<double, double>> groups;
    if (t.has("count")) {
      require(t, {"classification", "distance"}, fig);
      const auto cls = t.strings("classification");
      const auto d = t.reals("distance");
      const auto n = t.reals("count");
      for (std::size_t i = 0; i < cls.size(); ++i) groups[cls[i]][d[i]] += n[i];
    } else {
      require(t, {"classification", "hamming_nearest"}, fig);
      const auto cls = t.strings("classification");
      const auto d = t.reals("hamming_nearest");
      for (std::size_t i = 0; i < cls.size(); ++i)
        if (cls[i] != "target") groups[cls[i]][d[i]] += 1.0;
    }
    for (auto& [name, bars] : groups) h.groups.push_back({name, std::move(bars)});
    return svg::render(h);
  } else if (fig == "C") {
    require(t, {"load", "cycle_rate", "not_converged_rate"}, fig);
    c = {"Non-stationary dynamics", "storage load P/N", "rate", false, {}};
    for (auto& s : grouped_series(t, "load", "cycle_rate", "cycle_rate_ci", {})) c.series.push_back(std::move(s));
    for (auto& s : grouped_series(t, "load", "not_converged_rate", "not_converged_rate_ci", {}))
      c.series.push_back(std::move(s));
  } else {
    throw std::invalid_argument("unknown figure kind '" + std::string(fig) + "'");
  }
  return svg::render(c);
}

}  // namespace khop
