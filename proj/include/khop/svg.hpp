#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace khop::svg {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> lo;  // CI band, empty for none
  std::vector<double> hi;
};

struct LineChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  std::vector<Series> series;
};

struct BarGroup {
  std::string name;
  std::map<double, double> bars;  // x -> height
};

struct Histogram {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<BarGroup> groups;
};

namespace detail {

inline constexpr double kWidth = 720, kHeight = 460;
inline constexpr double kLeft = 70, kRight = 170, kTop = 40, kBottom = 55;
inline constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

inline std::string label(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

// 1-2-5 tick spacing giving roughly `target` ticks over [lo, hi].
inline std::vector<double> linear_ticks(double lo, double hi, int target = 6) {
  const double span = hi - lo;
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (span / step <= target) break;
  }
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * step; t += step)
    ticks.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
  return ticks;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (!std::isfinite(lo)) lo = 0, hi = 1;
    if (hi - lo < 1e-12) {
      const double d = std::abs(lo) > 0 ? std::abs(lo) * 0.1 : 0.5;
      lo -= d;
      hi += d;
    }
  }
};

class Canvas {
 public:
  Canvas(Range x, Range y, bool log_y) : x_(x), y_(y), log_y_(log_y) {}

  double px(double x) const { return kLeft + (x - x_.lo) / (x_.hi - x_.lo) * (kWidth - kLeft - kRight); }
  double py(double y) const {
    const double v = log_y_ ? std::log10(y) : y;
    return kTop + (1.0 - (v - y_.lo) / (y_.hi - y_.lo)) * (kHeight - kTop - kBottom);
  }

  std::string axes(const std::string& title, const std::string& xl, const std::string& yl) const {
    std::string s;
    const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
    s += "<rect x=\"" + num(x0) + "\" y=\"" + num(y1) + "\" width=\"" + num(x1 - x0) + "\" height=\"" +
         num(y0 - y1) + "\" fill=\"none\" stroke=\"#333\"/>\n";
    for (double t : linear_ticks(x_.lo, x_.hi)) {
      s += "<line x1=\"" + num(px(t)) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(px(t)) + "\" y2=\"" + num(y0 + 5) +
           "\" stroke=\"#333\"/>\n";
      s += "<text x=\"" + num(px(t)) + "\" y=\"" + num(y0 + 18) + "\" text-anchor=\"middle\" font-size=\"11\">" +
           label(t) + "</text>\n";
    }
    for (double t : y_ticks()) {
      const double yy = py(t);
      s += "<line x1=\"" + num(x0 - 5) + "\" y1=\"" + num(yy) + "\" x2=\"" + num(x1) + "\" y2=\"" + num(yy) +
           "\" stroke=\"#ddd\"/>\n";
      s += "<text x=\"" + num(x0 - 8) + "\" y=\"" + num(yy + 4) + "\" text-anchor=\"end\" font-size=\"11\">" +
           label(t) + "</text>\n";
    }
    s += "<text x=\"" + num((x0 + x1) / 2) + "\" y=\"" + num(kHeight - 12) +
         "\" text-anchor=\"middle\" font-size=\"13\">" + escape(xl) + "</text>\n";
    s += "<text x=\"16\" y=\"" + num((y0 + y1) / 2) + "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 " +
         num((y0 + y1) / 2) + ")\">" + escape(yl) + "</text>\n";
    s += "<text x=\"" + num((x0 + x1) / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" + escape(title) +
         "</text>\n";
    return s;
  }

  // Tick values in data units; decades on a log axis.
  std::vector<double> y_ticks() const {
    if (!log_y_) return linear_ticks(y_.lo, y_.hi);
    std::vector<double> ticks;
    for (double e = std::ceil(y_.lo - 1e-9); e <= std::floor(y_.hi + 1e-9); e += 1.0) ticks.push_back(std::pow(10.0, e));
    return ticks;
  }

 private:
  Range x_, y_;
  bool log_y_;
};

inline std::string header() {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         num(kWidth) + "\" height=\"" + num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) +
         "\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

inline std::string legend_entry(std::size_t i, const std::string& name, const char* color) {
  const double y = kTop + 10 + 18.0 * static_cast<double>(i);
  const double x = kWidth - kRight + 12;
  return "<rect x=\"" + num(x) + "\" y=\"" + num(y - 8) + "\" width=\"14\" height=\"10\" fill=\"" + color +
         "\"/>\n<text x=\"" + num(x + 20) + "\" y=\"" + num(y + 1) + "\" font-size=\"11\">" + escape(name) +
         "</text>\n";
}

}  // namespace detail

inline std::string render(const LineChart& chart) {
  using namespace detail;
  Range xr, yr;
  auto yval = [&](double v) { return chart.log_y ? (v > 0 ? std::log10(v) : std::numeric_limits<double>::quiet_NaN()) : v; };
  for (const auto& s : chart.series) {
    if (s.x.size() != s.y.size()) throw std::invalid_argument("svg: series '" + s.name + "' has mismatched x/y");
    for (double v : s.x) xr.add(v);
    for (double v : s.y) yr.add(yval(v));
    for (double v : s.lo) yr.add(yval(v));
    for (double v : s.hi) yr.add(yval(v));
  }
  xr.pad();
  if (chart.log_y && std::isfinite(yr.lo)) {
    yr.lo = std::floor(yr.lo);
    yr.hi = std::max(std::ceil(yr.hi), yr.lo + 1.0);
  }
  yr.pad();
  const Canvas cv(xr, yr, chart.log_y);

  std::string out = header();
  out += cv.axes(chart.title, chart.x_label, chart.y_label);
  for (std::size_t i = 0; i < chart.series.size(); ++i) {
    const auto& s = chart.series[i];
    const char* color = kPalette[i % std::size(kPalette)];
    auto ok = [&](double v) { return std::isfinite(yval(v)); };
    if (s.lo.size() == s.x.size() && s.hi.size() == s.x.size() && !s.x.empty()) {
      std::string upper, lower;
      for (std::size_t j = 0; j < s.x.size(); ++j) {
        if (!ok(s.lo[j]) || !ok(s.hi[j])) continue;
        upper += num(cv.px(s.x[j])) + "," + num(cv.py(s.hi[j])) + " ";
        lower = num(cv.px(s.x[j])) + "," + num(cv.py(s.lo[j])) + " " + lower;
      }
      if (!upper.empty())
        out += "<polygon points=\"" + upper + lower + "\" fill=\"" + color + "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
    }
    std::string pts;
    for (std::size_t j = 0; j < s.x.size(); ++j)
      if (ok(s.y[j])) pts += num(cv.px(s.x[j])) + "," + num(cv.py(s.y[j])) + " ";
    if (!pts.empty())
      out += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    for (std::size_t j = 0; j < s.x.size(); ++j)
      if (ok(s.y[j]))
        out += "<circle cx=\"" + num(cv.px(s.x[j])) + "\" cy=\"" + num(cv.py(s.y[j])) + "\" r=\"3\" fill=\"" + color +
               "\"/>\n";
    out += legend_entry(i, s.name, color);
  }
  out += "</svg>\n";
  return out;
}

inline std::string render(const Histogram& hist) {
  using namespace detail;
  Range xr, yr;
  yr.add(0.0);
  for (const auto& g : hist.groups)
    for (const auto& [x, h] : g.bars) {
      xr.add(x - 0.5);
      xr.add(x + 0.5);
      yr.add(h);
    }
  xr.pad();
  yr.pad();
  const Canvas cv(xr, yr, false);
  std::string out = header();
  out += cv.axes(hist.title, hist.x_label, hist.y_label);
  const double groups = static_cast<double>(std::max<std::size_t>(hist.groups.size(), 1));
  for (std::size_t i = 0; i < hist.groups.size(); ++i) {
    const char* color = kPalette[i % std::size(kPalette)];
    for (const auto& [x, h] : hist.groups[i].bars) {
      const double left = cv.px(x - 0.4 + 0.8 * static_cast<double>(i) / groups);
      const double right = cv.px(x - 0.4 + 0.8 * static_cast<double>(i + 1) / groups);
      const double top = cv.py(h), base = cv.py(0.0);
      out += "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(std::max(right - left, 1.0)) +
             "\" height=\"" + num(base - top) + "\" fill=\"" + color + "\"/>\n";
    }
    out += legend_entry(i, hist.groups[i].name, color);
  }
  out += "</svg>\n";
  return out;
}

}  // namespace khop::svg
