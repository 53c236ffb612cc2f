#ifndef ENGAGEMENT_CHARTS_HPP_
#define ENGAGEMENT_CHARTS_HPP_

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "engagement/csv.hpp"
#include "engagement/error.hpp"
#include "engagement/numeric.hpp"
#include "engagement/svg.hpp"
#include "engagement/sweep.hpp"

namespace engagement {

// Embedding seed used for single-instance bar charts when present; averaging
// across seeds would blur how concentrated one equilibrium is.
inline constexpr std::uint64_t kChartEmbedSeed = 17;

namespace internal {

inline std::string FileToken(std::string text) {
  for (char& c : text) {
    const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                      (c >= '0' && c <= '9') || c == '.' || c == '-' || c == '_';
    if (!keep) c = '_';
  }
  return text;
}

inline std::string RuleToken(const ResultRecord& r) {
  return r.rule == "linear" ? "linear" : "softmax_tau" + FormatDouble(*r.tau);
}

}  // namespace internal

struct ChartFile {
  std::filesystem::path svg;
  std::filesystem::path csv;
};

// Renders every chart the results support:
//   bars_*        average user weight vs producer fraction per feature, one
//                 per (dataset, rule, tau, d), from a single instance
//   iterations_*  mean iterations vs n, one line per d, per (dataset, rule, tau)
//   utility_*     mean average producer utility vs tau, one line per n, per
//                 (dataset, d); the linear rule is drawn as dashed flat lines
// Each SVG gets a CSV sidecar with the plotted values. All charts are built
// in memory before anything is written.
inline std::vector<ChartFile> EmitCharts(const std::vector<ResultRecord>& records,
                                         const std::filesystem::path& out_dir) {
  Require(!records.empty(), ErrorCode::kInvalidArgument, "results contain no rows");
  std::vector<std::tuple<std::string, std::string, std::string>> pending;  // name, svg, csv

  // Bar charts.
  {
    using Key = std::tuple<std::string, std::string, double, std::size_t>;
    std::map<Key, const ResultRecord*> chosen;
    auto better = [](const ResultRecord& a, const ResultRecord& b) {
      // larger n, then the fixed embedding seed, then smaller seeds
      if (a.n != b.n) return a.n > b.n;
      const bool a_fixed = a.embed_seed == kChartEmbedSeed;
      const bool b_fixed = b.embed_seed == kChartEmbedSeed;
      if (a_fixed != b_fixed) return a_fixed;
      if (a.embed_seed != b.embed_seed) return a.embed_seed < b.embed_seed;
      return a.run_seed < b.run_seed;
    };
    for (const auto& r : records) {
      if (!r.ok) continue;
      const Key key{r.dataset, r.rule, r.tau.value_or(0.0), r.d};
      auto& slot = chosen[key];
      if (slot == nullptr || better(r, *slot)) slot = &r;
    }
    for (const auto& [key, r] : chosen) {
      std::vector<std::string> categories;
      svg::Series weights{"avg user weight", {}, false};
      svg::Series fractions{"producer fraction", {}, false};
      std::ostringstream side;
      side << "feature,avg_user_weight,producer_fraction\n";
      for (std::size_t f = 0; f < r->d; ++f) {
        categories.push_back(std::to_string(f));
        weights.points.push_back({0.0, r->user_weights[f], 0.0});
        fractions.points.push_back({0.0, r->producer_fractions[f], 0.0});
        side << f << ',' << FormatDouble(r->user_weights[f]) << ','
             << FormatDouble(r->producer_fractions[f]) << '\n';
      }
      const std::string title = r->dataset + ", " + r->RuleLabel() + ", d=" +
                                std::to_string(r->d) + ", n=" + std::to_string(r->n) +
                                ", embed seed " + std::to_string(r->embed_seed) +
                                ", run seed " + std::to_string(r->run_seed);
      pending.emplace_back("bars_" + internal::FileToken(r->dataset) + "_" +
                               internal::RuleToken(*r) + "_d" + std::to_string(r->d),
                           svg::BarChart(title, categories, {weights, fractions}, "feature",
                                         "share"),
                           side.str());
    }
  }

  // Per-group mean/stderr over converged runs.
  struct Stat {
    std::vector<double> iterations;
    std::vector<double> utility;
  };
  using GroupKey = std::tuple<std::string, std::string, double, std::size_t, std::size_t>;
  std::map<GroupKey, Stat> groups;  // (dataset, rule, tau, d, n)
  for (const auto& r : records) {
    auto& g = groups[{r.dataset, r.rule, r.tau.value_or(0.0), r.d, r.n}];
    if (r.ok && r.converged) {
      g.iterations.push_back(static_cast<double>(r.iterations));
      g.utility.push_back(r.avg_prod_utility);
    }
  }
  auto rule_label = [](const std::string& rule, double tau) {
    return rule == "linear" ? std::string("linear") : "softmax(tau=" + FormatDouble(tau) + ")";
  };
  auto rule_token = [](const std::string& rule, double tau) {
    return rule == "linear" ? std::string("linear") : "softmax_tau" + FormatDouble(tau);
  };

  // Iterations vs n.
  {
    using Key = std::tuple<std::string, std::string, double>;
    std::map<Key, std::map<std::size_t, std::vector<std::pair<std::size_t, MeanStderr>>>> charts;
    for (const auto& [key, stat] : groups) {
      const auto& [dataset, rule, tau, d, n] = key;
      const auto s = Summarize(stat.iterations);
      if (s.count == 0) continue;
      charts[{dataset, rule, tau}][d].emplace_back(n, s);
    }
    for (const auto& [key, by_d] : charts) {
      const auto& [dataset, rule, tau] = key;
      std::vector<svg::Series> series;
      std::ostringstream side;
      side << "d,n,mean_iterations,stderr_iterations,count\n";
      for (const auto& [d, points] : by_d) {
        svg::Series line{"d=" + std::to_string(d), {}, false};
        for (const auto& [n, s] : points) {
          line.points.push_back({static_cast<double>(n), s.mean, s.stderr_});
          side << d << ',' << n << ',' << FormatDouble(s.mean) << ',' << FormatDouble(s.stderr_)
               << ',' << s.count << '\n';
        }
        series.push_back(std::move(line));
      }
      pending.emplace_back(
          "iterations_" + internal::FileToken(dataset) + "_" + rule_token(rule, tau),
          svg::LineChart(dataset + ", " + rule_label(rule, tau) + ": iterations to converge",
                         series, {"number of producers n", false}, {"iterations", false}),
          side.str());
    }
  }

  // Utility vs tau.
  {
    using Key = std::pair<std::string, std::size_t>;
    struct Lines {
      std::map<std::size_t, std::vector<std::pair<double, MeanStderr>>> softmax;
      std::map<std::size_t, MeanStderr> linear;
    };
    std::map<Key, Lines> charts;
    for (const auto& [key, stat] : groups) {
      const auto& [dataset, rule, tau, d, n] = key;
      const auto s = Summarize(stat.utility);
      if (s.count == 0) continue;
      auto& lines = charts[{dataset, d}];
      if (rule == "linear") {
        lines.linear[n] = s;
      } else {
        lines.softmax[n].emplace_back(tau, s);
      }
    }
    for (const auto& [key, lines] : charts) {
      if (lines.softmax.empty()) continue;
      const auto& [dataset, d] = key;
      double tau_lo = std::numeric_limits<double>::infinity(), tau_hi = 0.0;
      for (const auto& [n, points] : lines.softmax) {
        for (const auto& [tau, s] : points) {
          tau_lo = std::min(tau_lo, tau);
          tau_hi = std::max(tau_hi, tau);
        }
      }
      std::vector<svg::Series> series;
      std::ostringstream side;
      side << "n,rule,tau,mean_avg_prod_utility,stderr_avg_prod_utility,count\n";
      for (const auto& [n, points] : lines.softmax) {
        svg::Series line{"n=" + std::to_string(n), {}, false};
        for (const auto& [tau, s] : points) {
          line.points.push_back({tau, s.mean, s.stderr_});
          side << n << ",softmax," << FormatDouble(tau) << ',' << FormatDouble(s.mean) << ','
               << FormatDouble(s.stderr_) << ',' << s.count << '\n';
        }
        series.push_back(std::move(line));
      }
      for (const auto& [n, s] : lines.linear) {
        svg::Series line{"n=" + std::to_string(n) + " linear", {}, true};
        line.points.push_back({tau_lo, s.mean, 0.0});
        if (tau_hi > tau_lo) line.points.push_back({tau_hi, s.mean, 0.0});
        series.push_back(std::move(line));
        side << n << ",linear,," << FormatDouble(s.mean) << ',' << FormatDouble(s.stderr_) << ','
             << s.count << '\n';
      }
      pending.emplace_back(
          "utility_" + internal::FileToken(dataset) + "_d" + std::to_string(d),
          svg::LineChart(dataset + ", d=" + std::to_string(d) + ": average producer utility",
                         series, {"temperature tau", true}, {"average producer utility", false}),
          side.str());
    }
  }

  std::filesystem::create_directories(out_dir);
  std::vector<ChartFile> files;
  for (const auto& [name, svg_text, csv_text] : pending) {
    ChartFile file{out_dir / (name + ".svg"), out_dir / (name + ".csv")};
    for (const auto& [path, text] : {std::pair{file.svg, svg_text}, std::pair{file.csv, csv_text}}) {
      std::ofstream out(path);
      Require(out.good(), ErrorCode::kIo, "cannot write " + path.string());
      out << text;
      Require(out.good(), ErrorCode::kIo, "failed writing " + path.string());
    }
    files.push_back(std::move(file));
  }
  return files;
}

inline std::vector<ChartFile> EmitCharts(const std::string& results_path,
                                         const std::filesystem::path& out_dir) {
  return EmitCharts(LoadResults(results_path), out_dir);
}

}  // namespace engagement

#endif  // ENGAGEMENT_CHARTS_HPP_
