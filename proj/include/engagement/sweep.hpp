#ifndef ENGAGEMENT_SWEEP_HPP_
#define ENGAGEMENT_SWEEP_HPP_

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "engagement/csv.hpp"
#include "engagement/error.hpp"
#include "engagement/io.hpp"
#include "engagement/nmf.hpp"
#include "engagement/numeric.hpp"
#include "engagement/ratings.hpp"
#include "engagement/report.hpp"
#include "engagement/sampling.hpp"

namespace engagement {

// Where user populations come from.
struct DatasetSpec {
  enum class Kind { kUniform, kSkewed, kUsersFile, kRatings };
  Kind kind = Kind::kUniform;
  std::string name;                // label written to the dataset column
  std::size_t num_users = 10000;   // synthetic kinds
  std::string path;                // users file or ratings file
  RatingsSchema schema;            // ratings kind
  std::size_t nmf_iterations = 200;
};

struct SweepSpec {
  DatasetSpec dataset;
  std::vector<std::size_t> producers;
  std::vector<std::size_t> dims;
  std::vector<ServingRule> rules;
  std::vector<std::uint64_t> embed_seeds;
  std::vector<std::uint64_t> run_seeds;
  std::size_t max_iters = 500;
};

// Parses a rule written as "linear", "softmax:<tau>" or
// {"rule":"softmax","tau":<tau>}.
inline ServingRule ParseRule(const Json& j) {
  if (j.is_string()) {
    const auto text = j.get<std::string>();
    if (text == "linear") return ServingRule::Linear();
    if (text.rfind("softmax:", 0) == 0) {
      const auto tau = ParseDouble(text.substr(8));
      Require(tau.has_value(), ErrorCode::kParse, "bad temperature in rule '" + text + "'");
      return ServingRule::Softmax(*tau);
    }
    throw Error(ErrorCode::kParse, "unknown rule '" + text + "'");
  }
  Require(j.is_object(), ErrorCode::kParse, "rule must be a string or object");
  const auto kind = j.at("rule").get<std::string>();
  if (kind == "linear") return ServingRule::Linear();
  Require(kind == "softmax", ErrorCode::kParse, "unknown rule '" + kind + "'");
  return ServingRule::Softmax(j.at("tau").get<double>());
}

inline SweepSpec SweepSpecFromJson(const Json& j) {
  try {
    SweepSpec spec;
    const Json& data = j.at("dataset");
    const auto kind = data.at("kind").get<std::string>();
    auto& ds = spec.dataset;
    if (kind == "uniform") {
      ds.kind = DatasetSpec::Kind::kUniform;
    } else if (kind == "skewed") {
      ds.kind = DatasetSpec::Kind::kSkewed;
    } else if (kind == "users_file") {
      ds.kind = DatasetSpec::Kind::kUsersFile;
      ds.path = data.at("path").get<std::string>();
    } else if (kind == "ratings") {
      ds.kind = DatasetSpec::Kind::kRatings;
      ds.path = data.at("path").get<std::string>();
      ds.schema.user_column = data.value("user_col", ds.schema.user_column);
      ds.schema.item_column = data.value("item_col", ds.schema.item_column);
      ds.schema.rating_column = data.value("rating_col", ds.schema.rating_column);
      const auto delimiter = data.value("delimiter", std::string(","));
      Require(delimiter.size() == 1, ErrorCode::kParse, "delimiter must be one character");
      ds.schema.delimiter = delimiter[0];
      ds.nmf_iterations = data.value("nmf_iters", ds.nmf_iterations);
    } else {
      throw Error(ErrorCode::kParse, "unknown dataset kind '" + kind + "'");
    }
    ds.num_users = data.value("users", ds.num_users);
    ds.name = data.value("name", kind == "users_file" || kind == "ratings"
                                     ? std::filesystem::path(ds.path).stem().string()
                                     : kind);

    spec.producers = j.at("producers").get<std::vector<std::size_t>>();
    spec.dims = j.at("dims").get<std::vector<std::size_t>>();
    for (const auto& rule : j.at("rules")) spec.rules.push_back(ParseRule(rule));
    spec.embed_seeds = j.at("embed_seeds").get<std::vector<std::uint64_t>>();
    if (j.contains("run_seeds")) {
      spec.run_seeds = j.at("run_seeds").get<std::vector<std::uint64_t>>();
    } else {
      const auto runs = j.value("runs", std::size_t{5});
      for (std::uint64_t s = 1; s <= runs; ++s) spec.run_seeds.push_back(s);
    }
    spec.max_iters = j.value("max_iters", spec.max_iters);

    Require(!spec.producers.empty() && !spec.dims.empty() && !spec.rules.empty() &&
                !spec.embed_seeds.empty() && !spec.run_seeds.empty(),
            ErrorCode::kInvalidArgument, "sweep lists must be non-empty");
    Require(spec.max_iters >= 1, ErrorCode::kInvalidArgument, "max_iters must be >= 1");
    for (auto n : spec.producers) {
      Require(n >= 1, ErrorCode::kInvalidArgument, "producer counts must be >= 1");
    }
    for (auto d : spec.dims) Require(d >= 1, ErrorCode::kInvalidArgument, "dims must be >= 1");
    Require(ds.num_users >= 1, ErrorCode::kInvalidArgument, "dataset needs users");
    return spec;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed sweep spec: ") + e.what());
  }
}

inline SweepSpec LoadSweepSpec(const std::string& path) {
  std::ifstream in(path);
  Require(in.good(), ErrorCode::kIo, "cannot open sweep spec " + path);
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParse, path + ": " + e.what());
  }
  return SweepSpecFromJson(j);
}

// Builds the population for one (dimension, embedding seed) cell.
inline UserPopulation MakePopulation(const DatasetSpec& dataset, std::size_t dim,
                                     std::uint64_t embed_seed) {
  switch (dataset.kind) {
    case DatasetSpec::Kind::kUniform:
      return SampleUniformPopulation(dataset.num_users, dim, embed_seed);
    case DatasetSpec::Kind::kSkewed:
      return SampleSkewedPopulation(dataset.num_users, dim, embed_seed).users;
    case DatasetSpec::Kind::kUsersFile: {
      auto users = LoadPopulation(dataset.path);
      Require(users.dim() == dim, ErrorCode::kDimensionMismatch,
              "users file has dimension " + std::to_string(users.dim()) +
                  ", sweep asks for " + std::to_string(dim));
      return users;
    }
    case DatasetSpec::Kind::kRatings: {
      const auto ratings = LoadRatingsCsv(dataset.path, dataset.schema);
      return NmfUserEmbeddings(ratings, {dim, dataset.nmf_iterations, embed_seed, 1e-9});
    }
  }
  throw Error(ErrorCode::kInternal, "unhandled dataset kind");
}

// One line of results.csv.
struct SweepRow {
  std::string dataset;
  ServingRule rule = ServingRule::Linear();
  std::size_t n = 0;
  std::size_t d = 0;
  std::uint64_t embed_seed = 0;
  std::uint64_t run_seed = 0;
  std::optional<EquilibriumReport> report;  // empty when the instance failed
  std::string error;
};

inline const std::vector<std::string>& ResultsColumns() {
  static const std::vector<std::string> columns = {
      "dataset",          "rule",             "tau",
      "n",                "d",                "embed_seed",
      "run_seed",         "converged",        "iterations",
      "distinct_features", "entropy",         "avg_prod_utility",
      "avg_user_utility", "total_utility",    "producer_fractions",
      "user_weights",     "error"};
  return columns;
}

namespace internal {

inline std::string JoinDoubles(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ';';
    out += FormatDouble(values[i]);
  }
  return out;
}

inline std::vector<double> SplitDoubles(const std::string& text) {
  std::vector<double> out;
  if (text.empty()) return out;
  std::size_t start = 0;
  for (;;) {
    const auto end = text.find(';', start);
    const auto value = ParseDouble(std::string_view(text).substr(start, end - start));
    Require(value.has_value(), ErrorCode::kParse, "bad number list '" + text + "'");
    out.push_back(*value);
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return out;
}

inline std::string TauField(const ServingRule& rule) {
  return rule.is_softmax() ? FormatDouble(rule.tau()) : std::string();
}

}  // namespace internal

inline std::string FormatResultsRow(const SweepRow& row) {
  std::ostringstream out;
  out << csv::Quote(row.dataset) << ',' << row.rule.name() << ','
      << internal::TauField(row.rule) << ',' << row.n << ',' << row.d << ','
      << row.embed_seed << ',' << row.run_seed << ',';
  if (row.report) {
    const auto& r = *row.report;
    out << (r.converged ? 1 : 0) << ',' << r.iterations << ',' << r.distinct_features << ','
        << FormatDouble(r.entropy) << ',' << FormatDouble(r.average_producer_utility) << ','
        << FormatDouble(r.average_user_utility) << ','
        << FormatDouble(r.total_producer_utility) << ','
        << internal::JoinDoubles(r.producer_fractions) << ','
        << internal::JoinDoubles(r.average_user_weight) << ',';
  } else {
    out << ",,,,,,,,,";
  }
  out << csv::Quote(row.error);
  return out.str();
}

// Parsed form of a results.csv line, as consumed by summaries and charts.
struct ResultRecord {
  std::string dataset;
  std::string rule;       // "linear" | "softmax"
  std::optional<double> tau;
  std::size_t n = 0;
  std::size_t d = 0;
  std::uint64_t embed_seed = 0;
  std::uint64_t run_seed = 0;
  bool ok = false;        // false when the instance failed
  bool converged = false;
  std::size_t iterations = 0;
  std::size_t distinct_features = 0;
  double entropy = 0.0;
  double avg_prod_utility = 0.0;
  double avg_user_utility = 0.0;
  double total_utility = 0.0;
  std::vector<double> producer_fractions;
  std::vector<double> user_weights;
  std::string error;

  std::string RuleLabel() const {
    return rule == "linear" ? "linear" : "softmax(tau=" + FormatDouble(*tau) + ")";
  }
};

inline ResultRecord RecordFromRow(const SweepRow& row) {
  ResultRecord rec;
  rec.dataset = row.dataset;
  rec.rule = row.rule.name();
  if (row.rule.is_softmax()) rec.tau = row.rule.tau();
  rec.n = row.n;
  rec.d = row.d;
  rec.embed_seed = row.embed_seed;
  rec.run_seed = row.run_seed;
  rec.error = row.error;
  if (row.report) {
    const auto& r = *row.report;
    rec.ok = true;
    rec.converged = r.converged;
    rec.iterations = r.iterations;
    rec.distinct_features = r.distinct_features;
    rec.entropy = r.entropy;
    rec.avg_prod_utility = r.average_producer_utility;
    rec.avg_user_utility = r.average_user_utility;
    rec.total_utility = r.total_producer_utility;
    rec.producer_fractions = r.producer_fractions;
    rec.user_weights = r.average_user_weight;
  }
  return rec;
}

// Reads results.csv; lines starting with '#' are ignored.
inline std::vector<ResultRecord> LoadResults(const std::string& path) {
  std::ifstream in(path);
  Require(in.good(), ErrorCode::kIo, "cannot open results file " + path);
  std::string line;
  std::optional<std::vector<std::string>> header;
  std::vector<ResultRecord> records;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (Trim(line).empty() || line[0] == '#') continue;
    auto fields = csv::SplitLine(line);
    if (!header) {
      Require(fields == ResultsColumns(), ErrorCode::kParse,
              path + ": unexpected results header");
      header = std::move(fields);
      continue;
    }
    const std::string where = path + ":" + std::to_string(line_number);
    Require(fields.size() == header->size(), ErrorCode::kParse,
            where + ": expected " + std::to_string(header->size()) + " columns");
    auto number = [&](std::size_t col) {
      const auto v = ParseDouble(fields[col]);
      Require(v.has_value(), ErrorCode::kParse,
              where + ": bad value '" + fields[col] + "' in column " + (*header)[col]);
      return *v;
    };
    auto integer = [&](std::size_t col) {
      const double v = number(col);
      Require(v >= 0 && v == std::floor(v), ErrorCode::kParse,
              where + ": column " + (*header)[col] + " must be a non-negative integer");
      return static_cast<std::uint64_t>(v);
    };
    ResultRecord rec;
    rec.dataset = fields[0];
    rec.rule = fields[1];
    Require(rec.rule == "linear" || rec.rule == "softmax", ErrorCode::kParse,
            where + ": unknown rule '" + rec.rule + "'");
    if (rec.rule == "softmax") rec.tau = number(2);
    rec.n = integer(3);
    rec.d = integer(4);
    rec.embed_seed = integer(5);
    rec.run_seed = integer(6);
    rec.error = fields[16];
    rec.ok = rec.error.empty();
    if (rec.ok) {
      rec.converged = integer(7) != 0;
      rec.iterations = integer(8);
      rec.distinct_features = integer(9);
      rec.entropy = number(10);
      rec.avg_prod_utility = number(11);
      rec.avg_user_utility = number(12);
      rec.total_utility = number(13);
      rec.producer_fractions = internal::SplitDoubles(fields[14]);
      rec.user_weights = internal::SplitDoubles(fields[15]);
      Require(rec.producer_fractions.size() == rec.d && rec.user_weights.size() == rec.d,
              ErrorCode::kParse, where + ": per-feature lists must have d entries");
    }
    records.push_back(std::move(rec));
  }
  Require(header.has_value(), ErrorCode::kParse, path + ": missing results header");
  return records;
}

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;  // sample standard deviation / sqrt(count)
  std::size_t count = 0;
};

inline MeanStderr Summarize(const std::vector<double>& values) {
  MeanStderr s;
  s.count = values.size();
  if (values.empty()) return s;
  CompensatedSum total;
  for (double v : values) total.Add(v);
  s.mean = total.value() / static_cast<double>(values.size());
  if (values.size() > 1) {
    CompensatedSum squares;
    for (double v : values) squares.Add((v - s.mean) * (v - s.mean));
    const double variance = squares.value() / static_cast<double>(values.size() - 1);
    s.stderr_ = std::sqrt(variance) / std::sqrt(static_cast<double>(values.size()));
  }
  return s;
}

// Convergence counts per (dataset, rule, tau): the convergence-table shape.
inline std::string ConvergenceSummaryCsv(const std::vector<ResultRecord>& records) {
  using Key = std::tuple<std::string, std::string, double>;
  std::map<Key, std::pair<std::size_t, std::size_t>> table;
  std::vector<Key> order;
  for (const auto& r : records) {
    const Key key{r.dataset, r.rule, r.tau.value_or(0.0)};
    auto [it, inserted] = table.try_emplace(key, 0, 0);
    if (inserted) order.push_back(key);
    if (r.ok && r.converged) ++it->second.first;
    ++it->second.second;
  }
  std::ostringstream out;
  out << "dataset,rule,tau,converged,total\n";
  for (const auto& key : order) {
    const auto& [dataset, rule, tau] = key;
    out << csv::Quote(dataset) << ',' << rule << ',' << (rule == "softmax" ? FormatDouble(tau) : "")
        << ',' << table[key].first << ',' << table[key].second << '\n';
  }
  return out.str();
}

// Mean/stderr of a per-run quantity over converged runs, grouped by
// (dataset, rule, tau, d, n); seeds are the replicates.
inline std::string GroupedSummaryCsv(const std::vector<ResultRecord>& records,
                                     const std::string& value_name,
                                     double (*value)(const ResultRecord&)) {
  using Key = std::tuple<std::string, std::string, double, std::size_t, std::size_t>;
  std::map<Key, std::vector<double>> groups;
  std::map<Key, std::size_t> totals;
  std::vector<Key> order;
  for (const auto& r : records) {
    const Key key{r.dataset, r.rule, r.tau.value_or(0.0), r.d, r.n};
    if (totals[key]++ == 0) order.push_back(key);
    if (r.ok && r.converged) groups[key].push_back(value(r));
  }
  std::ostringstream out;
  out << "dataset,rule,tau,d,n,mean_" << value_name << ",stderr_" << value_name
      << ",converged_runs,total_runs\n";
  for (const auto& key : order) {
    const auto& [dataset, rule, tau, d, n] = key;
    const auto s = Summarize(groups[key]);
    out << csv::Quote(dataset) << ',' << rule << ',' << (rule == "softmax" ? FormatDouble(tau) : "")
        << ',' << d << ',' << n << ',';
    if (s.count > 0) {
      out << FormatDouble(s.mean) << ',' << FormatDouble(s.stderr_);
    } else {
      out << ',';
    }
    out << ',' << s.count << ',' << totals[key] << '\n';
  }
  return out.str();
}

struct SweepOutput {
  std::vector<SweepRow> rows;
  std::filesystem::path results_path;
  std::filesystem::path convergence_path;
  std::filesystem::path iterations_path;
  std::filesystem::path utility_path;
};

// Runs the full cross product, in the order
//   d -> embed seed -> n -> rule -> run seed,
// and writes into out_dir:
//   results.csv              one row per instance (first line: timestamp comment)
//   convergence_summary.csv  converged / total per rule
//   iterations_summary.csv   mean/stderr of iterations over converged runs
//   utility_summary.csv      mean/stderr of average producer utility over converged runs
// Instances run on up to `workers` threads; rows are written in cross-product
// order regardless of completion order.
inline SweepOutput RunSweep(const SweepSpec& spec, const std::filesystem::path& out_dir,
                            std::size_t workers = 1, bool write_timestamp = true) {
  struct Cell {
    std::size_t d;
    std::uint64_t embed_seed;
    std::shared_ptr<const UserPopulation> users;
    std::string error;
  };
  std::vector<Cell> cells;
  for (auto d : spec.dims) {
    for (auto seed : spec.embed_seeds) {
      Cell cell{d, seed, nullptr, {}};
      try {
        cell.users = std::make_shared<const UserPopulation>(MakePopulation(spec.dataset, d, seed));
      } catch (const Error& e) {
        cell.error = e.what();
      }
      cells.push_back(std::move(cell));
    }
  }

  struct Task {
    const Cell* cell;
    std::size_t n;
    ServingRule rule;
    std::uint64_t run_seed;
  };
  std::vector<Task> tasks;
  for (const auto& cell : cells) {
    for (auto n : spec.producers) {
      for (const auto& rule : spec.rules) {
        for (auto run_seed : spec.run_seeds) tasks.push_back({&cell, n, rule, run_seed});
      }
    }
  }

  SweepOutput output;
  output.rows.resize(tasks.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (;;) {
      const std::size_t t = next.fetch_add(1);
      if (t >= tasks.size()) return;
      const auto& task = tasks[t];
      SweepRow row;
      row.dataset = spec.dataset.name;
      row.rule = task.rule;
      row.n = task.n;
      row.d = task.cell->d;
      row.embed_seed = task.cell->embed_seed;
      row.run_seed = task.run_seed;
      if (!task.cell->error.empty()) {
        row.error = task.cell->error;
      } else {
        try {
          const GameInstance game(task.cell->users, task.n, task.rule);
          row.report = RunInstance(game, {spec.max_iters, task.run_seed, false});
        } catch (const std::exception& e) {
          row.error = e.what();
        }
      }
      output.rows[t] = std::move(row);
    }
  };
  workers = std::max<std::size_t>(1, std::min(workers, tasks.size()));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& thread : pool) thread.join();
  }

  std::filesystem::create_directories(out_dir);
  output.results_path = out_dir / "results.csv";
  output.convergence_path = out_dir / "convergence_summary.csv";
  output.iterations_path = out_dir / "iterations_summary.csv";
  output.utility_path = out_dir / "utility_summary.csv";
  auto write = [](const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    Require(out.good(), ErrorCode::kIo, "cannot write " + path.string());
    out << text;
    Require(out.good(), ErrorCode::kIo, "failed writing " + path.string());
  };

  std::ostringstream results;
  if (write_timestamp) {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[32];
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    results << "# generated " << stamp << '\n';
  }
  const auto& columns = ResultsColumns();
  for (std::size_t c = 0; c < columns.size(); ++c) results << (c ? "," : "") << columns[c];
  results << '\n';
  std::vector<ResultRecord> records;
  for (const auto& row : output.rows) {
    results << FormatResultsRow(row) << '\n';
    records.push_back(RecordFromRow(row));
  }
  write(output.results_path, results.str());
  write(output.convergence_path, ConvergenceSummaryCsv(records));
  write(output.iterations_path,
        GroupedSummaryCsv(records, "iterations", [](const ResultRecord& r) {
          return static_cast<double>(r.iterations);
        }));
  write(output.utility_path,
        GroupedSummaryCsv(records, "avg_prod_utility",
                          [](const ResultRecord& r) { return r.avg_prod_utility; }));
  return output;
}

}  // namespace engagement

#endif  // ENGAGEMENT_SWEEP_HPP_
