#ifndef ENGAGEMENT_SVG_HPP_
#define ENGAGEMENT_SVG_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "engagement/error.hpp"
#include "engagement/numeric.hpp"

// Minimal standalone SVG output for bar and line charts. Output depends only
// on the input values, so charts diff cleanly.
namespace engagement::svg {

inline std::string Escape(const std::string& text) {
  std::string out;
  for (char c : text) {
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

inline const char* Color(std::size_t i) {
  static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  return palette[i % 10];
}

inline std::string Num(double v) { return FormatDouble(v, 4); }

struct Point {
  double x = 0.0;
  double y = 0.0;
  double err = 0.0;  // half-height of the error bar; 0 draws none
};

struct Series {
  std::string label;
  std::vector<Point> points;
  bool dashed = false;
};

struct Axis {
  std::string label;
  bool log_scale = false;
};

namespace internal {

constexpr double kWidth = 640, kHeight = 400;
constexpr double kLeft = 70, kRight = 170, kTop = 40, kBottom = 60;

// Up to ~6 tick values covering [lo, hi].
inline std::vector<double> Ticks(double lo, double hi) {
  if (hi <= lo) return {lo};
  const double raw = (hi - lo) / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (step >= raw) break;
  }
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step) * step; t <= hi + step * 1e-9; t += step) {
    ticks.push_back(std::abs(t) < step * 1e-9 ? 0.0 : t);
  }
  return ticks;
}

inline void Header(std::ostringstream& out, const std::string& title) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
      << Escape(title) << "</text>\n";
}

inline void Frame(std::ostringstream& out, const std::string& x_label,
                  const std::string& y_label) {
  const double x1 = kWidth - kRight, y1 = kHeight - kBottom;
  out << "<line x1=\"" << kLeft << "\" y1=\"" << y1 << "\" x2=\"" << x1 << "\" y2=\"" << y1
      << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << y1
      << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << (kLeft + x1) / 2 << "\" y=\"" << kHeight - 15
      << "\" text-anchor=\"middle\">" << Escape(x_label) << "</text>\n"
      << "<text transform=\"translate(18," << (kTop + y1) / 2
      << ") rotate(-90)\" text-anchor=\"middle\">" << Escape(y_label) << "</text>\n";
}

inline void Legend(std::ostringstream& out, const std::vector<std::string>& labels,
                   const std::vector<bool>& dashed) {
  const double x = kWidth - kRight + 15;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double y = kTop + 10 + 18.0 * static_cast<double>(i);
    out << "<line x1=\"" << x << "\" y1=\"" << y << "\" x2=\"" << x + 20 << "\" y2=\"" << y
        << "\" stroke=\"" << Color(i) << "\" stroke-width=\"3\""
        << (dashed[i] ? " stroke-dasharray=\"5,3\"" : "") << "/>\n"
        << "<text x=\"" << x + 26 << "\" y=\"" << y + 4 << "\">" << Escape(labels[i])
        << "</text>\n";
  }
}

inline void YTicks(std::ostringstream& out, double lo, double hi) {
  const double y1 = kHeight - kBottom;
  for (double t : Ticks(lo, hi)) {
    const double y = y1 - (t - lo) / (hi - lo) * (y1 - kTop);
    out << "<line x1=\"" << kLeft - 4 << "\" y1=\"" << Num(y) << "\" x2=\"" << kLeft
        << "\" y2=\"" << Num(y) << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << kLeft - 6 << "\" y=\"" << Num(y + 4) << "\" text-anchor=\"end\">"
        << FormatDouble(t, 4) << "</text>\n";
  }
}

}  // namespace internal

// Grouped bar chart: one group per category, one bar per series.
inline std::string BarChart(const std::string& title, const std::vector<std::string>& categories,
                            const std::vector<Series>& series, const std::string& x_label,
                            const std::string& y_label) {
  using namespace internal;
  Require(!categories.empty() && !series.empty(), ErrorCode::kInvalidArgument,
          "bar chart needs data");
  double hi = 0.0;
  for (const auto& s : series) {
    Require(s.points.size() == categories.size(), ErrorCode::kDimensionMismatch,
            "bar series length differs from category count");
    for (const auto& p : s.points) hi = std::max(hi, p.y);
  }
  if (hi <= 0.0) hi = 1.0;
  hi *= 1.05;

  std::ostringstream out;
  Header(out, title);
  Frame(out, x_label, y_label);
  YTicks(out, 0.0, hi);
  const double plot_w = kWidth - kRight - kLeft, y1 = kHeight - kBottom;
  const double group_w = plot_w / static_cast<double>(categories.size());
  const double bar_w = group_w * 0.8 / static_cast<double>(series.size());
  for (std::size_t c = 0; c < categories.size(); ++c) {
    const double gx = kLeft + group_w * static_cast<double>(c) + group_w * 0.1;
    for (std::size_t s = 0; s < series.size(); ++s) {
      const double h = series[s].points[c].y / hi * (y1 - kTop);
      out << "<rect x=\"" << Num(gx + bar_w * static_cast<double>(s)) << "\" y=\""
          << Num(y1 - h) << "\" width=\"" << Num(bar_w) << "\" height=\"" << Num(h)
          << "\" fill=\"" << Color(s) << "\"/>\n";
    }
    out << "<text x=\"" << Num(gx + group_w * 0.4) << "\" y=\"" << y1 + 14
        << "\" text-anchor=\"middle\">" << Escape(categories[c]) << "</text>\n";
  }
  std::vector<std::string> labels;
  for (const auto& s : series) labels.push_back(s.label);
  Legend(out, labels, std::vector<bool>(series.size(), false));
  out << "</svg>\n";
  return out.str();
}

// Line chart with optional error bars and log-scaled x axis.
inline std::string LineChart(const std::string& title, const std::vector<Series>& series,
                             const Axis& x_axis, const Axis& y_axis) {
  using namespace internal;
  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  double y_lo = x_lo, y_hi = -x_lo;
  auto tx = [&](double x) { return x_axis.log_scale ? std::log10(x) : x; };
  for (const auto& s : series) {
    for (const auto& p : s.points) {
      Require(std::isfinite(p.x) && std::isfinite(p.y), ErrorCode::kNonFinite,
              "non-finite chart point");
      Require(!x_axis.log_scale || p.x > 0.0, ErrorCode::kInvalidArgument,
              "log axis needs positive x");
      x_lo = std::min(x_lo, tx(p.x));
      x_hi = std::max(x_hi, tx(p.x));
      y_lo = std::min(y_lo, p.y - p.err);
      y_hi = std::max(y_hi, p.y + p.err);
    }
  }
  Require(std::isfinite(x_lo), ErrorCode::kInvalidArgument, "line chart needs data");
  if (x_hi <= x_lo) { x_lo -= 1.0; x_hi += 1.0; }
  if (y_hi <= y_lo) { y_lo -= 1.0; y_hi += 1.0; }
  const double pad = (y_hi - y_lo) * 0.05;
  y_lo -= pad;
  y_hi += pad;

  const double x1 = kWidth - kRight, y1 = kHeight - kBottom;
  auto px = [&](double x) { return kLeft + (tx(x) - x_lo) / (x_hi - x_lo) * (x1 - kLeft); };
  auto py = [&](double y) { return y1 - (y - y_lo) / (y_hi - y_lo) * (y1 - kTop); };

  std::ostringstream out;
  Header(out, title);
  Frame(out, x_axis.label, y_axis.label);
  YTicks(out, y_lo, y_hi);
  std::vector<double> x_ticks;
  if (x_axis.log_scale) {
    for (double e = std::ceil(x_lo - 1e-9); e <= x_hi + 1e-9; e += 1.0) {
      x_ticks.push_back(std::pow(10.0, e));
    }
  } else {
    x_ticks = Ticks(x_lo, x_hi);
  }
  for (double t : x_ticks) {
    out << "<line x1=\"" << Num(px(t)) << "\" y1=\"" << y1 << "\" x2=\"" << Num(px(t))
        << "\" y2=\"" << y1 + 4 << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << Num(px(t)) << "\" y=\"" << y1 + 16 << "\" text-anchor=\"middle\">"
        << FormatDouble(t, 4) << "</text>\n";
  }

  std::vector<std::string> labels;
  std::vector<bool> dashed;
  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& points = series[s].points;
    labels.push_back(series[s].label);
    dashed.push_back(series[s].dashed);
    if (points.empty()) continue;
    out << "<polyline fill=\"none\" stroke=\"" << Color(s) << "\" stroke-width=\"2\""
        << (series[s].dashed ? " stroke-dasharray=\"5,3\"" : "") << " points=\"";
    for (std::size_t i = 0; i < points.size(); ++i) {
      out << (i ? " " : "") << Num(px(points[i].x)) << ',' << Num(py(points[i].y));
    }
    out << "\"/>\n";
    for (const auto& p : points) {
      out << "<circle cx=\"" << Num(px(p.x)) << "\" cy=\"" << Num(py(p.y))
          << "\" r=\"3\" fill=\"" << Color(s) << "\"/>\n";
      if (p.err > 0.0) {
        out << "<line x1=\"" << Num(px(p.x)) << "\" y1=\"" << Num(py(p.y - p.err))
            << "\" x2=\"" << Num(px(p.x)) << "\" y2=\"" << Num(py(p.y + p.err))
            << "\" stroke=\"" << Color(s) << "\"/>\n";
      }
    }
  }
  Legend(out, labels, dashed);
  out << "</svg>\n";
  return out.str();
}

}  // namespace engagement::svg

#endif  // ENGAGEMENT_SVG_HPP_
