#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace engagement {
namespace {

using testing::ReadText;
using testing::ScratchDir;
using testing::WriteText;

std::size_t CountOf(const std::string& text, const std::string& needle) {
  std::size_t count = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) {
    ++count;
  }
  return count;
}

std::string WithoutComments(const std::string& text) {
  std::string out;
  std::size_t start = 0;
  while (start < text.size()) {
    const auto end = text.find('\n', start);
    const auto line = text.substr(start, end - start);
    if (line.empty() || line[0] != '#') out += line + '\n';
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return out;
}

TEST(Specialization, Metrics) {
  auto m = ComputeSpecialization({3, {1, 1, 1, 1}});
  EXPECT_EQ(m.distinct_features, 1u);
  EXPECT_EQ(m.entropy, 0.0);
  EXPECT_EQ(m.fractions, (std::vector<double>{0, 1, 0}));
  m = ComputeSpecialization({2, {0, 1, 1, 0}});
  EXPECT_EQ(m.distinct_features, 2u);
  EXPECT_NEAR(m.entropy, std::log(2.0), 1e-15);
  m = ComputeSpecialization({3, {0, 0, 1, 2}});
  EXPECT_EQ(m.distinct_features, 3u);
  EXPECT_NEAR(m.entropy, 1.5 * std::log(2.0), 1e-15);
  EXPECT_NEAR(m.entropy, 1.0397, 1e-4);
  EXPECT_EQ(m.fractions, (std::vector<double>{0.5, 0.25, 0.25}));
  EXPECT_THROW(ComputeSpecialization({3, {}}), Error);
}

TEST(RunInstance, LoneProducer) {
  const auto users = testing::Users(3, {{0.2, 0.7, 0.1}, {0.3, 0.3, 0.4}});
  const GameInstance game(users, 1, ServingRule::Linear());
  const auto report = RunInstance(game, {});
  EXPECT_TRUE(report.converged);
  EXPECT_EQ(report.distinct_features, 1u);
  EXPECT_EQ(report.producer_fractions, (std::vector<double>{0, 1, 0}));
  EXPECT_NEAR(report.total_producer_utility, 1.0, 1e-12);
  EXPECT_NEAR(report.average_user_utility, 0.5, 1e-12);
  EXPECT_NEAR(report.average_user_weight[1], 0.5, 1e-15);
}

TEST(RunInstance, TemperatureControlsSpecialization) {
  const GameInstance hot(SampleUniformPopulation(2000, 15, 17), 100, ServingRule::Softmax(100.0));
  const auto homogeneous = RunInstance(hot, {500, 1, false});
  EXPECT_TRUE(homogeneous.converged);
  EXPECT_EQ(homogeneous.distinct_features, 1u);
  const GameInstance linear(hot.shared_users(), 100, ServingRule::Linear());
  const auto spread = RunInstance(linear, {500, 1, false});
  EXPECT_TRUE(spread.converged);
  EXPECT_GE(spread.distinct_features, 8u);
  double fraction_sum = 0.0;
  for (double f : spread.producer_fractions) fraction_sum += f;
  EXPECT_NEAR(fraction_sum, 1.0, 1e-12);
  EXPECT_NEAR(spread.total_producer_utility, spread.total_user_utility,
              1e-9 * spread.total_user_utility);
}

Json SmallSpec() {
  return Json::parse(R"({
    "dataset": {"kind": "uniform", "users": 150},
    "producers": [2, 4],
    "dims": [3],
    "rules": ["linear", "softmax:0.1", {"rule": "softmax", "tau": 10}],
    "embed_seeds": [13, 17],
    "runs": 2
  })");
}

TEST(SweepSpec, Parsing) {
  const auto spec = SweepSpecFromJson(SmallSpec());
  EXPECT_EQ(spec.dataset.name, "uniform");
  EXPECT_EQ(spec.run_seeds, (std::vector<std::uint64_t>{1, 2}));
  ASSERT_EQ(spec.rules.size(), 3u);
  EXPECT_EQ(spec.rules[2], ServingRule::Softmax(10));
  EXPECT_EQ(spec.max_iters, 500u);
  auto bad = SmallSpec();
  bad["producers"] = Json::array();
  EXPECT_THROW(SweepSpecFromJson(bad), Error);
  bad = SmallSpec();
  bad["rules"] = {"greedy"};
  EXPECT_THROW(SweepSpecFromJson(bad), Error);
  bad = SmallSpec();
  bad["max_iters"] = 0;
  EXPECT_THROW(SweepSpecFromJson(bad), Error);
  bad = SmallSpec();
  bad.erase("dims");
  EXPECT_THROW(SweepSpecFromJson(bad), Error);
}

TEST(Sweep, SingleInstance) {
  auto j = SmallSpec();
  j["producers"] = {3};
  j["rules"] = {"linear"};
  j["embed_seeds"] = {13};
  j["runs"] = 1;
  const auto dir = ScratchDir("sweep_one");
  const auto out = RunSweep(SweepSpecFromJson(j), dir);
  ASSERT_EQ(out.rows.size(), 1u);
  const auto records = LoadResults(out.results_path.string());
  ASSERT_EQ(records.size(), 1u);
  EXPECT_TRUE(records[0].ok);
  EXPECT_EQ(records[0].n, 3u);
  EXPECT_FALSE(records[0].tau.has_value());
  const auto convergence = ReadText(out.convergence_path);
  EXPECT_EQ(convergence, "dataset,rule,tau,converged,total\nuniform,linear,,1,1\n");
  EXPECT_EQ(CountOf(ReadText(out.iterations_path), "\n"), 2u);
  EXPECT_EQ(CountOf(ReadText(out.utility_path), "\n"), 2u);
  const auto text = ReadText(out.results_path);
  EXPECT_EQ(text.rfind("# generated ", 0), 0u);
}

TEST(Sweep, OrderAndDeterminism) {
  const auto spec = SweepSpecFromJson(SmallSpec());
  const auto a = RunSweep(spec, ScratchDir("sweep_a"), 1);
  const auto b = RunSweep(spec, ScratchDir("sweep_b"), 3);
  const auto text_a = WithoutComments(ReadText(a.results_path));
  EXPECT_EQ(text_a, WithoutComments(ReadText(b.results_path)));
  EXPECT_EQ(ReadText(a.utility_path), ReadText(b.utility_path));
  ASSERT_EQ(a.rows.size(), 2u * 2 * 3 * 2);
  // embed seed -> n -> rule -> run seed
  EXPECT_EQ(a.rows[0].embed_seed, 13u);
  EXPECT_EQ(a.rows[1].run_seed, 2u);
  EXPECT_EQ(a.rows[2].rule, ServingRule::Softmax(0.1));
  EXPECT_EQ(a.rows[6].n, 4u);
  EXPECT_EQ(a.rows[12].embed_seed, 17u);
  const auto records = LoadResults(a.results_path.string());
  for (std::size_t r = 0; r < records.size(); ++r) {
    ASSERT_TRUE(records[r].ok);
    EXPECT_EQ(records[r].avg_prod_utility, a.rows[r].report->average_producer_utility);
    EXPECT_EQ(records[r].producer_fractions, a.rows[r].report->producer_fractions);
  }
}

TEST(Sweep, InstanceFailuresStayInRow) {
  const auto dir = ScratchDir("sweep_fail");
  SavePopulation((dir / "users.csv").string(), SampleUniformPopulation(30, 3, 1));
  auto j = SmallSpec();
  j["dataset"] = {{"kind", "users_file"}, {"path", (dir / "users.csv").string()}};
  j["dims"] = {3, 4};
  j["embed_seeds"] = {13};
  j["runs"] = 1;
  const auto out = RunSweep(SweepSpecFromJson(j), dir / "out");
  ASSERT_EQ(out.rows.size(), 2u * 2 * 3);
  const auto records = LoadResults(out.results_path.string());
  EXPECT_EQ(records[0].dataset, "users");
  EXPECT_TRUE(records[0].ok);
  EXPECT_FALSE(records.back().ok);
  EXPECT_NE(records.back().error.find("dimension"), std::string::npos);
  EXPECT_NE(ReadText(out.convergence_path).find("users,linear,,2,4\n"), std::string::npos);
}

TEST(Summaries, StandardError) {
  const auto s = Summarize({1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_NEAR(s.stderr_, std::sqrt(5.0 / 3.0) / 2.0, 1e-15);
  EXPECT_EQ(Summarize({7.0}).stderr_, 0.0);
  EXPECT_EQ(Summarize({}).count, 0u);
}

TEST(Results, RejectsMalformedFiles) {
  const auto dir = ScratchDir("results_bad");
  WriteText(dir / "a.csv", "dataset,rule\nx,y\n");
  EXPECT_THROW(LoadResults((dir / "a.csv").string()), Error);
  WriteText(dir / "b.csv", "");
  EXPECT_THROW(LoadResults((dir / "b.csv").string()), Error);
}

TEST(Charts, OneRowGivesOneBarChart) {
  auto j = SmallSpec();
  j["producers"] = {3};
  j["rules"] = {"linear"};
  j["embed_seeds"] = {13};
  j["runs"] = 1;
  const auto dir = ScratchDir("charts_one");
  const auto out = RunSweep(SweepSpecFromJson(j), dir);
  const auto files = EmitCharts(out.results_path.string(), dir / "charts");
  std::size_t bars = 0;
  for (const auto& f : files) {
    EXPECT_TRUE(std::filesystem::exists(f.svg));
    EXPECT_TRUE(std::filesystem::exists(f.csv));
    if (f.svg.filename().string().rfind("bars_", 0) != 0) continue;
    ++bars;
    const auto svg = ReadText(f.svg);
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
    EXPECT_EQ(CountOf(svg, "<rect x="), 2u * 3);  // d bars for each of two series
    EXPECT_EQ(CountOf(ReadText(f.csv), "\n"), 1u + 3);
  }
  EXPECT_EQ(bars, 1u);
}

TEST(Charts, EmptyResultsWriteNothing) {
  const auto dir = ScratchDir("charts_empty");
  WriteText(dir / "results.csv", "# generated now\n" + [] {
    std::string header;
    for (const auto& c : ResultsColumns()) header += (header.empty() ? "" : ",") + c;
    return header + "\n";
  }());
  EXPECT_THROW(EmitCharts((dir / "results.csv").string(), dir / "charts"), Error);
  EXPECT_FALSE(std::filesystem::exists(dir / "charts"));
}

TEST(Charts, OneBarChartPerCombination) {
  const auto dir = ScratchDir("charts_full");
  auto j = SmallSpec();
  j["dims"] = {2, 3};
  const auto out = RunSweep(SweepSpecFromJson(j), dir);
  const auto files = EmitCharts(out.results_path.string(), dir / "charts");
  std::size_t bars = 0, iterations = 0, utility = 0;
  for (const auto& f : files) {
    const auto name = f.svg.filename().string();
    bars += name.rfind("bars_", 0) == 0;
    iterations += name.rfind("iterations_", 0) == 0;
    utility += name.rfind("utility_", 0) == 0;
  }
  EXPECT_EQ(bars, 3u * 2);        // rules x dims
  EXPECT_EQ(iterations, 3u);      // one per rule, a line per d
  EXPECT_EQ(utility, 2u);         // one per d, a line per n
  const auto side = ReadText(dir / "charts" / "utility_uniform_d3.csv");
  EXPECT_NE(side.find("4,linear,,"), std::string::npos);
  EXPECT_NE(side.find("2,softmax,0.1,"), std::string::npos);
  // Bar charts use the largest n with embedding seed 17.
  EXPECT_NE(ReadText(dir / "charts" / "bars_uniform_linear_d3.svg").find("n=4, embed seed 17"),
            std::string::npos);
}

int RunCli(const std::string& args, const std::filesystem::path& log) {
  const std::string command =
      std::string(ENGAGEMENT_CLI_PATH) + " " + args + " >" + log.string() + " 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, EndToEnd) {
  const auto dir = ScratchDir("cli");
  const auto log = dir / "log.txt";
  const std::string users = (dir / "users.csv").string();
  ASSERT_EQ(RunCli("gen-users --dist skewed --users 300 --dim 4 --seed 2 --out " + users, log), 0);
  ASSERT_EQ(RunCli("run --users " + users + " --producers 5 --rule linear --seed 3 --out " +
                       (dir / "run.json").string(),
                   log),
            0);
  const auto report = Json::parse(ReadText(log));
  EXPECT_TRUE(report.at("converged").get<bool>());
  const auto run = Json::parse(ReadText(dir / "run.json"));
  WriteText(dir / "profile.json",
            Json{{"n", 5}, {"d", 4}, {"basis", run.at("basis")}}.dump());
  ASSERT_EQ(RunCli("verify --rule linear --users " + users + " --profile " +
                       (dir / "profile.json").string(),
                   log),
            0);
  EXPECT_TRUE(Json::parse(ReadText(log)).at("is_equilibrium").get<bool>());
  ASSERT_EQ(RunCli("single-minded --m 2,1,1 --construct 4", log), 0);
  EXPECT_EQ(Json::parse(ReadText(log)).at("counts"), Json({2, 1, 1}));

  WriteText(dir / "ratings.csv", "user,item,rating\na,x,5\na,y,3\nb,x,4\nb,z,1\nc,y,2\nc,z,5\n");
  ASSERT_EQ(RunCli("nmf --ratings " + (dir / "ratings.csv").string() + " --dim 2 --iters 50 --out " +
                       (dir / "emb.csv").string() + " --log " + (dir / "loss.csv").string(),
                   log),
            0);
  EXPECT_EQ(LoadPopulation((dir / "emb.csv").string()).num_users(), 3u);
  EXPECT_EQ(CountOf(ReadText(dir / "loss.csv"), "\n"), 52u);

  WriteText(dir / "spec.json", SmallSpec().dump());
  ASSERT_EQ(RunCli("sweep --spec " + (dir / "spec.json").string() + " --out " +
                       (dir / "sweep").string() + " --workers 2",
                   log),
            0);
  ASSERT_EQ(RunCli("plot --results " + (dir / "sweep" / "results.csv").string() + " --out " +
                       (dir / "charts").string(),
                   log),
            0);
  EXPECT_TRUE(std::filesystem::exists(dir / "charts" / "iterations_uniform_linear.svg"));
}

TEST(Cli, FailuresAreMachineReadable) {
  const auto dir = ScratchDir("cli_fail");
  const auto log = dir / "log.txt";
  EXPECT_NE(RunCli("run --users " + (dir / "missing.csv").string(), log), 0);
  auto error = Json::parse(ReadText(log));
  EXPECT_EQ(error.at("error"), "io_error");
  EXPECT_NE(RunCli("single-minded --m 1,0 --counts 1,1", log), 0);
  EXPECT_EQ(Json::parse(ReadText(log)).at("error"), "invalid_argument");
  EXPECT_NE(RunCli("no-such-command", log), 0);
  EXPECT_EQ(Json::parse(ReadText(log)).at("error"), "usage");
}

}  // namespace
}  // namespace engagement
