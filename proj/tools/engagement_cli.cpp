// Command-line front end: population generation, NMF embeddings, single runs,
// sweeps, equilibrium checks and charts.
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "engagement/engagement.hpp"

namespace {

using namespace engagement;

std::vector<std::uint64_t> ParseCountList(const std::string& text, const std::string& what) {
  std::vector<std::uint64_t> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto value = ParseDouble(item);
    Require(value.has_value() && *value >= 0 && *value == static_cast<double>(
                static_cast<std::uint64_t>(*value)),
            ErrorCode::kParse, what + ": '" + std::string(Trim(item)) + "' is not a count");
    out.push_back(static_cast<std::uint64_t>(*value));
  }
  Require(!out.empty(), ErrorCode::kParse, what + " is empty");
  return out;
}

ServingRule RuleFromFlags(const std::string& rule, double tau) {
  if (rule == "linear") return ServingRule::Linear();
  Require(rule == "softmax", ErrorCode::kInvalidArgument, "rule must be linear or softmax");
  return ServingRule::Softmax(tau);
}

void WriteJsonFile(const std::string& path, const Json& j) {
  std::ofstream out(path);
  Require(out.good(), ErrorCode::kIo, "cannot write " + path);
  out << j.dump(2) << '\n';
  Require(out.good(), ErrorCode::kIo, "failed writing " + path);
}

Json ReportToJson(const EquilibriumReport& r) {
  return {{"converged", r.converged},
          {"iterations", r.iterations},
          {"basis", r.profile.features},
          {"distinct_features", r.distinct_features},
          {"entropy", r.entropy},
          {"producer_fractions", r.producer_fractions},
          {"average_user_weight", r.average_user_weight},
          {"total_producer_utility", r.total_producer_utility},
          {"average_producer_utility", r.average_producer_utility},
          {"total_user_utility", r.total_user_utility},
          {"average_user_utility", r.average_user_utility}};
}

Json RationalToJson(const single_minded::Rational& q) {
  return {{"num", q.num}, {"den", q.den}, {"value", q.value()}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Engagement games: simulate producer competition and check equilibria"};
  app.require_subcommand(1);

  // gen-users
  std::string dist = "uniform", users_out;
  std::size_t num_users = 2000, dim = 15;
  std::uint64_t seed = 1;
  auto* gen = app.add_subcommand("gen-users", "Sample a synthetic user population");
  gen->add_option("--dist", dist, "uniform | skewed")->check(CLI::IsMember({"uniform", "skewed"}));
  gen->add_option("--users", num_users, "Number of users K");
  gen->add_option("--dim", dim, "Embedding dimension d");
  gen->add_option("--seed", seed, "Random seed");
  gen->add_option("--out", users_out, "Output users CSV")->required();

  // nmf
  std::string ratings_path, nmf_out, nmf_log;
  RatingsSchema schema;
  std::size_t nmf_dim = 15, nmf_iters = 200;
  std::uint64_t nmf_seed = 13;
  auto* nmf = app.add_subcommand("nmf", "Derive user embeddings from a ratings CSV");
  nmf->add_option("--ratings", ratings_path, "Ratings CSV")->required();
  nmf->add_option("--user-col", schema.user_column, "User id column");
  nmf->add_option("--item-col", schema.item_column, "Item id column");
  nmf->add_option("--rating-col", schema.rating_column, "Rating column");
  nmf->add_option("--dim", nmf_dim, "Factorization rank d");
  nmf->add_option("--iters", nmf_iters, "Multiplicative-update iterations");
  nmf->add_option("--seed", nmf_seed, "Initialization seed");
  nmf->add_option("--out", nmf_out, "Output users CSV")->required();
  nmf->add_option("--log", nmf_log, "Write per-iteration loss CSV here");

  // run
  std::string run_users, run_out, rule_name = "softmax";
  std::size_t producers = 10, max_iters = 500;
  double tau = 1.0;
  std::uint64_t run_seed = 1;
  auto* run = app.add_subcommand("run", "Run best-response dynamics on one instance");
  run->add_option("--users", run_users, "Users CSV")->required();
  run->add_option("--producers", producers, "Number of producers n");
  run->add_option("--rule", rule_name, "linear | softmax")->check(CLI::IsMember({"linear", "softmax"}));
  run->add_option("--tau", tau, "Softmax temperature");
  run->add_option("--seed", run_seed, "Run seed");
  run->add_option("--max-iters", max_iters, "Iteration cap");
  run->add_option("--out", run_out, "Write the dynamics result JSON here");

  // sweep
  std::string spec_path, sweep_out;
  std::size_t workers = 1;
  bool no_timestamp = false;
  auto* sweep = app.add_subcommand("sweep", "Run a grid of instances from a JSON spec");
  sweep->add_option("--spec", spec_path, "Sweep spec JSON")->required();
  sweep->add_option("--out", sweep_out, "Output directory")->required();
  sweep->add_option("--workers", workers, "Concurrent instances")->check(CLI::PositiveNumber);
  sweep->add_flag("--no-timestamp", no_timestamp, "Omit the timestamp comment line");

  // verify
  std::string verify_users, profile_path, verify_rule = "softmax";
  double verify_tau = 1.0;
  auto* verify = app.add_subcommand("verify", "Check a basis profile for profitable deviations");
  verify->add_option("--users", verify_users, "Users CSV")->required();
  verify->add_option("--profile", profile_path, "Profile JSON")->required();
  verify->add_option("--rule", verify_rule, "linear | softmax")->check(CLI::IsMember({"linear", "softmax"}));
  verify->add_option("--tau", verify_tau, "Softmax temperature");

  // single-minded
  std::string m_list, counts_list;
  std::uint64_t construct_n = 0;
  auto* single = app.add_subcommand("single-minded", "Equilibria with single-minded users");
  single->add_option("--m", m_list, "Users per feature, comma separated")->required();
  auto* counts_opt = single->add_option("--counts", counts_list, "Producers per feature to check");
  auto* construct_opt = single->add_option("--construct", construct_n, "Build the proportional profile for n producers");
  counts_opt->excludes(construct_opt);

  // plot
  std::string results_path, plot_out;
  auto* plot = app.add_subcommand("plot", "Render SVG charts from a results CSV");
  plot->add_option("--results", results_path, "results.csv from a sweep")->required();
  plot->add_option("--out", plot_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << Json{{"error", "usage"}, {"message", e.what()}}.dump() << '\n';
    return 2;
  }

  try {
    if (*gen) {
      const auto users = dist == "uniform" ? SampleUniformPopulation(num_users, dim, seed)
                                           : SampleSkewedPopulation(num_users, dim, seed).users;
      SavePopulation(users_out, users);
      std::cout << Json{{"users", users.num_users()}, {"dim", users.dim()}, {"out", users_out}}.dump()
                << '\n';
    } else if (*nmf) {
      const auto ratings = LoadRatingsCsv(ratings_path, schema);
      const auto factors = FactorizeRatings(ratings, {nmf_dim, nmf_iters, nmf_seed, 1e-9});
      const auto users = EmbeddingsFromFactors(factors);
      SavePopulation(nmf_out, users);
      if (!nmf_log.empty()) {
        std::ofstream log(nmf_log);
        Require(log.good(), ErrorCode::kIo, "cannot write " + nmf_log);
        log << "iter,loss\n";
        for (std::size_t t = 0; t < factors.losses.size(); ++t) {
          log << t << ',' << FormatDouble(factors.losses[t]) << '\n';
        }
      }
      std::cout << Json{{"users", factors.num_users},
                        {"items", factors.num_items},
                        {"ratings", ratings.ratings().size()},
                        {"duplicates", ratings.duplicates()},
                        {"relative_error", factors.relative_error()},
                        {"out", nmf_out}}
                       .dump()
                << '\n';
    } else if (*run) {
      const GameInstance game(LoadPopulation(run_users), producers, RuleFromFlags(rule_name, tau));
      const auto result = RunBestResponseDynamics(game, {max_iters, run_seed, true});
      if (!run_out.empty()) WriteJsonFile(run_out, DynamicsResultToJson(result));
      auto report = ReportForProfile(result.profile, game);
      report.converged = result.converged;
      report.iterations = result.iterations;
      std::cout << ReportToJson(report).dump() << '\n';
    } else if (*sweep) {
      const auto spec = LoadSweepSpec(spec_path);
      const auto out = RunSweep(spec, sweep_out, workers, !no_timestamp);
      std::size_t failed = 0, converged = 0;
      for (const auto& row : out.rows) {
        if (!row.report) ++failed;
        else if (row.report->converged) ++converged;
      }
      std::cout << Json{{"instances", out.rows.size()},
                        {"converged", converged},
                        {"failed", failed},
                        {"results", out.results_path.string()}}
                       .dump()
                << '\n';
    } else if (*verify) {
      const auto profile = LoadProfile(profile_path);
      Require(profile.is_basis(), ErrorCode::kInvalidArgument,
              "verify checks basis profiles; give the profile as {\"basis\": [...]}");
      const GameInstance game(LoadPopulation(verify_users), profile.num_producers(),
                              RuleFromFlags(verify_rule, verify_tau));
      const auto check = CheckBasisDeviations(profile.basis(), game);
      Json j{{"is_equilibrium", check.is_equilibrium},
             {"max_gain", check.max_gain},
             {"utilities", check.utilities}};
      if (!check.is_equilibrium) {
        j["worst_producer"] = check.worst_producer;
        j["worst_feature"] = check.worst_feature;
      }
      std::cout << j.dump() << '\n';
    } else if (*single) {
      Require(*counts_opt || *construct_opt, ErrorCode::kInvalidArgument,
              "single-minded needs --counts or --construct");
      const single_minded::Population population{ParseCountList(m_list, "--m")};
      Json j{{"m", population.m}};
      if (*construct_opt) {
        const auto result = single_minded::ProportionalProfile(population, construct_n);
        j["counts"] = result.profile.counts;
        j["exact"] = result.exact;
        j["is_equilibrium"] = result.is_equilibrium;
        j["slack"] = RationalToJson(result.slack);
      } else {
        const single_minded::CountProfile profile{ParseCountList(counts_list, "--counts")};
        j["counts"] = profile.counts;
        j["is_equilibrium"] = single_minded::EquilibriumCheck(population, profile);
        j["slack"] = RationalToJson(single_minded::EquilibriumSlack(population, profile));
      }
      std::cout << j.dump() << '\n';
    } else if (*plot) {
      const auto files = EmitCharts(results_path, plot_out);
      Json list = Json::array();
      for (const auto& f : files) list.push_back(f.svg.string());
      std::cout << Json{{"charts", list}}.dump() << '\n';
    }
  } catch (const Error& e) {
    std::cerr << Json{{"error", std::string(ErrorCodeName(e.code()))}, {"message", e.what()}}.dump() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << Json{{"error", "internal"}, {"message", e.what()}}.dump() << '\n';
    return 1;
  }
  return 0;
}
