// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "engagement/engagement.hpp"

namespace {

using namespace engagement;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::size_t Workers() { return std::max(1u, std::thread::hardware_concurrency()); }

std::filesystem::path Scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("engagement_acceptance_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

std::string ReadWithoutComments(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::string line, out;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '#') continue;
    out += line + '\n';
  }
  return out;
}

UserPopulation PositiveUsers(std::size_t num_users, std::size_t dim, Rng& rng) {
  std::vector<double> flat(num_users * dim);
  for (std::size_t k = 0; k < num_users; ++k) {
    std::span<double> row(&flat[k * dim], dim);
    internal::DrawSimplexPoint(rng, row);
    for (double& v : row) v = 0.9 * v + 0.1 / static_cast<double>(dim);
  }
  return UserPopulation::FromRows(num_users, dim, std::move(flat));
}

double LogUniform(Rng& rng, double lo, double hi) {
  return std::exp(std::log(lo) + rng.Uniform01() * (std::log(hi) - std::log(lo)));
}

// Number of basis equilibria of `game`, found by checking one profile per
// multiset of features (utilities depend only on a producer's own feature and
// the others' counts). Empty when there are more than `limit` multisets.
std::optional<std::size_t> CountBasisEquilibria(const GameInstance& game, std::size_t limit) {
  const std::size_t n = game.num_producers(), d = game.dim();
  double multisets = 1.0;  // C(n + d - 1, n)
  for (std::size_t k = 1; k <= n; ++k) multisets *= static_cast<double>(d - 1 + k) / k;
  if (multisets > static_cast<double>(limit)) return std::nullopt;
  std::size_t found = 0;
  BasisProfile profile{d, std::vector<std::size_t>(n, 0)};
  // Non-decreasing feature vectors, advanced like an odometer.
  for (;;) {
    found += VerifyPureNeOnBasis(profile, game);
    std::size_t i = n;
    while (i > 0 && profile.features[i - 1] == d - 1) --i;
    if (i == 0) break;
    const std::size_t next = profile.features[i - 1] + 1;
    for (std::size_t j = i - 1; j < n; ++j) profile.features[j] = next;
  }
  return found;
}

// 1. Convergence on the desk grid.
Outcome ConvergenceGrid() {
  SweepSpec spec;
  spec.dataset.kind = DatasetSpec::Kind::kUniform;
  spec.dataset.name = "uniform";
  spec.dataset.num_users = 2000;
  spec.producers = {2, 5, 10, 20, 50};
  spec.dims = {5, 10, 15};
  spec.rules = {ServingRule::Softmax(100), ServingRule::Softmax(10), ServingRule::Softmax(1),
                ServingRule::Softmax(0.1), ServingRule::Linear()};
  spec.embed_seeds = {13, 17, 19, 23, 29};
  spec.run_seeds = {1};
  spec.max_iters = 500;
  const auto out = RunSweep(spec, Scratch("grid"), Workers(), false);
  std::map<std::string, std::pair<int, int>> tally;  // rule -> (converged, total)
  int failures = 0;
  for (const auto& row : out.rows) {
    auto& t = tally[row.rule.ToString()];
    ++t.second;
    if (!row.report) {
      ++failures;
    } else if (row.report->converged) {
      ++t.first;
    }
  }
  bool pass = failures == 0;
  std::ostringstream detail;
  for (const auto& rule : spec.rules) {
    const auto& [converged, total] = tally[rule.ToString()];
    detail << rule.ToString() << ' ' << converged << '/' << total << "; ";
    if (rule.is_softmax()) {
      pass = pass && converged == total;
    } else {
      pass = pass && converged >= 0.99 * total;
    }
  }
  detail << failures << " instance errors";
  for (const auto& row : out.rows) {
    if (!row.report || row.report->converged) continue;
    const GameInstance game(SampleUniformPopulation(2000, row.d, row.embed_seed), row.n, row.rule);
    const auto equilibria = CountBasisEquilibria(game, 20000);
    detail << "; not converged: " << row.rule.ToString() << " n=" << row.n << " d=" << row.d
           << " embed seed " << row.embed_seed << ", basis equilibria "
           << (equilibria ? std::to_string(*equilibria) : std::string("not enumerated"));
  }
  return {pass, detail.str()};
}

// 2. High temperature makes everyone produce the heaviest feature.
Outcome HighTemperatureHomogeneity() {
  const auto users = std::make_shared<const UserPopulation>(SampleUniformPopulation(2000, 15, 17));
  const GameInstance game(users, 100, ServingRule::Softmax(100));
  const auto report = RunInstance(game, {500, 1, false});
  const auto totals = users->ColumnTotals();
  const auto heaviest =
      static_cast<std::size_t>(std::max_element(totals.begin(), totals.end()) - totals.begin());
  const bool pass = report.converged && report.distinct_features == 1 &&
                    report.producer_fractions[heaviest] == 1.0;
  return {pass, "distinct features " + std::to_string(report.distinct_features) +
                    ", heaviest feature " + std::to_string(heaviest) + " holds fraction " +
                    FormatDouble(report.producer_fractions[heaviest])};
}

struct TemperatureRuns {
  std::vector<ServingRule> rules;  // tau ascending, then linear
  // rule -> reports over run seeds 1..3
  std::map<std::string, std::vector<EquilibriumReport>> reports;
};

// Uniform K=2000, d=15, n=100, embedding seed 17, run seeds 1..3.
const TemperatureRuns& TemperatureSweep() {
  static const TemperatureRuns runs = [] {
    TemperatureRuns r;
    r.rules = {ServingRule::Softmax(0.01), ServingRule::Softmax(0.1), ServingRule::Softmax(1),
               ServingRule::Softmax(10), ServingRule::Softmax(100), ServingRule::Linear()};
    SweepSpec spec;
    spec.dataset.kind = DatasetSpec::Kind::kUniform;
    spec.dataset.name = "uniform";
    spec.dataset.num_users = 2000;
    spec.producers = {100};
    spec.dims = {15};
    spec.rules = r.rules;
    spec.embed_seeds = {17};
    spec.run_seeds = {1, 2, 3};
    const auto out = RunSweep(spec, Scratch("temperature"), Workers(), false);
    for (const auto& row : out.rows) {
      if (row.report) r.reports[row.rule.ToString()].push_back(*row.report);
    }
    return r;
  }();
  return runs;
}

// 3. Specialization does not increase with temperature.
Outcome SpecializationMonotone() {
  const auto& runs = TemperatureSweep();
  std::vector<double> medians;
  std::ostringstream detail;
  for (const auto& rule : runs.rules) {
    std::vector<double> counts;
    for (const auto& r : runs.reports.at(rule.ToString())) {
      counts.push_back(static_cast<double>(r.distinct_features));
    }
    std::sort(counts.begin(), counts.end());
    const double median = counts.size() == 3 ? counts[1] : std::nan("");
    medians.push_back(median);
    detail << rule.ToString() << ' ' << FormatDouble(median) << "; ";
  }
  bool pass = true;
  for (std::size_t t = 1; t + 1 < medians.size(); ++t) pass = pass && medians[t] <= medians[t - 1];
  pass = pass && medians.front() >= 8 && medians.back() >= 8;
  return {pass, detail.str()};
}

// 4. Average producer utility falls as temperature rises. Averages are over
// the five embedding seeds (run seed 1), converged runs only.
Outcome UtilityMonotone() {
  const std::vector<ServingRule> rules = {ServingRule::Softmax(0.01), ServingRule::Softmax(0.1),
                                          ServingRule::Softmax(1),    ServingRule::Softmax(10),
                                          ServingRule::Softmax(100),  ServingRule::Linear()};
  SweepSpec spec;
  spec.dataset.kind = DatasetSpec::Kind::kUniform;
  spec.dataset.name = "uniform";
  spec.dataset.num_users = 2000;
  spec.producers = {5, 10, 50};
  spec.dims = {15};
  spec.rules = rules;
  spec.embed_seeds = {13, 17, 19, 23, 29};
  spec.run_seeds = {1};
  const auto out = RunSweep(spec, Scratch("utility"), Workers(), false);
  std::map<std::pair<std::string, std::size_t>, std::vector<double>> values;
  for (const auto& row : out.rows) {
    if (row.report && row.report->converged) {
      values[{row.rule.ToString(), row.n}].push_back(row.report->average_producer_utility);
    }
  }
  bool pass = true;
  std::ostringstream detail;
  for (std::size_t n : spec.producers) {
    std::vector<double> mean;
    std::vector<std::size_t> count;
    for (const auto& rule : rules) {
      const auto& v = values[{rule.ToString(), n}];
      mean.push_back(v.empty() ? std::nan("") : Summarize(v).mean);
      count.push_back(v.size());
    }
    // mean: tau 0.01, 0.1, 1, 10, 100, linear
    bool ok = true;
    for (std::size_t t = 1; t < 5; ++t) ok = ok && mean[t] < mean[t - 1];
    ok = ok && mean[0] > mean[5] && mean[5] > mean[2];
    pass = pass && ok;
    detail << "n=" << n << (ok ? "" : " (violated)") << ':';
    for (std::size_t r = 0; r < mean.size(); ++r) {
      detail << ' ' << FormatDouble(mean[r], 6) << '[' << count[r] << ']';
    }
    detail << "; ";
  }
  detail << "order: tau 0.01 0.1 1 10 100, linear; [converged seeds]";
  return {pass, detail.str()};
}

// 5. Producer and user totals agree.
Outcome TotalsAgree() {
  Rng rng(5, 0);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t d = 1 + rng.UniformIndex(8), n = 1 + rng.UniformIndex(10);
    const auto users = PositiveUsers(1 + rng.UniformIndex(100), d, rng);
    std::vector<double> values(n * d);
    for (std::size_t i = 0; i < n; ++i) {
      internal::DrawSimplexPoint(rng, std::span<double>(&values[i * d], d));
    }
    const auto profile = StrategyProfile::General(n, d, values);
    const auto rule = trial % 2 ? ServingRule::Linear() : ServingRule::Softmax(LogUniform(rng, 0.01, 100));
    const auto totals = ComputeTotalUtilities(profile, users, rule);
    worst = std::max(worst, std::fabs(totals.producer_total - totals.user_total) /
                                std::max(std::fabs(totals.user_total), 1e-300));
  }
  return {worst < 1e-9, "worst relative difference " + FormatDouble(worst, 3)};
}

// 6. Dynamics only stop at profiles the exhaustive oracle accepts.
Outcome OracleEquivalence() {
  Rng rng(6, 0);
  int converged = 0, matched = 0, exceptions = 0;
  for (int trial = 0; trial < 100; ++trial) {
    try {
      const std::size_t n = 1 + rng.UniformIndex(4), d = 1 + rng.UniformIndex(3);
      const auto rule = trial % 2 ? ServingRule::Linear() : ServingRule::Softmax(LogUniform(rng, 0.01, 100));
      const GameInstance game(PositiveUsers(1 + rng.UniformIndex(20), d, rng), n, rule);
      const auto result = RunBestResponseDynamics(game, {500, static_cast<std::uint64_t>(trial + 1), false});
      if (!result.converged) continue;
      ++converged;
      const auto equilibria = BruteForceNeEnumeration(game);
      matched += std::find(equilibria.begin(), equilibria.end(), result.profile) != equilibria.end();
    } catch (const std::exception&) {
      ++exceptions;
    }
  }
  return {exceptions == 0 && matched == converged,
          std::to_string(matched) + "/" + std::to_string(converged) +
              " converged outputs in the oracle set, " + std::to_string(exceptions) + " exceptions"};
}

// 7. Closed-form single-minded condition against two independent routes.
Outcome SingleMindedEquivalence() {
  Rng rng(7, 0);
  int brute_agree = 0, game_agree = 0, equilibria = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = 1 + rng.UniformIndex(5);
    single_minded::Population m;
    single_minded::CountProfile counts;
    for (std::size_t f = 0; f < d; ++f) {
      m.m.push_back(1 + rng.UniformIndex(6));
      counts.counts.push_back(rng.UniformIndex(5));
    }
    const bool check = single_minded::EquilibriumCheck(m, counts);
    equilibria += check;
    brute_agree += check == single_minded::BruteDeviationCheck(m, counts);
  }
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t d = 2 + rng.UniformIndex(3);
    single_minded::Population m;
    std::vector<double> rows;
    for (std::size_t f = 0; f < d; ++f) {
      m.m.push_back(1 + rng.UniformIndex(5));
      for (std::uint64_t k = 0; k < m.m.back(); ++k) {
        for (std::size_t g = 0; g < d; ++g) rows.push_back(g == f ? 1.0 : 0.0);
      }
    }
    const std::size_t n = 1 + rng.UniformIndex(6);
    BasisProfile profile{d, std::vector<std::size_t>(n)};
    for (auto& f : profile.features) f = rng.UniformIndex(d);
    const auto counts = profile.Counts();
    const GameInstance game(UserPopulation::FromRows(m.total(), d, rows), n, ServingRule::Linear());
    game_agree += single_minded::EquilibriumCheck(m, {{counts.begin(), counts.end()}}) ==
                  VerifyPureNeOnBasis(profile, game);
  }
  return {brute_agree == 200 && game_agree == 50,
          "deviation oracle " + std::to_string(brute_agree) + "/200 (" +
              std::to_string(equilibria) + " equilibria), explicit game " +
              std::to_string(game_agree) + "/50"};
}

// 8. Best responses sit on basis vectors.
Outcome VertexOptimality() {
  Rng rng(8, 0);
  double worst_margin = std::numeric_limits<double>::infinity();
  int violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t d = 2 + rng.UniformIndex(5), n = 1 + rng.UniformIndex(6);
    const auto users = PositiveUsers(5 + rng.UniformIndex(40), d, rng);
    const auto rule = trial % 2 ? ServingRule::Linear() : ServingRule::Softmax(LogUniform(rng, 0.1, 100));
    std::vector<std::size_t> features(n);
    for (auto& f : features) f = rng.UniformIndex(d);
    const std::size_t i = rng.UniformIndex(n);
    const auto cache = CachedOpponentSums(StrategyProfile::Basis(d, features), users, rule, i);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t f = 0; f < d; ++f) {
      std::vector<double> e(d, 0.0);
      e[f] = 1.0;
      best = std::max(best, CachedCandidateUtility(cache, users, e));
    }
    for (int p = 0; p < 100; ++p) {
      std::vector<double> x(d);
      internal::DrawSimplexPoint(rng, x);
      const double margin = best - CachedCandidateUtility(cache, users, x);
      worst_margin = std::min(worst_margin, margin);
      violations += !(margin > 1e-9);
    }
  }
  return {violations == 0, "smallest margin " + FormatDouble(worst_margin, 3) + ", " +
                               std::to_string(violations) + " points within 1e-9"};
}

// 9. Midpoint convexity of the per-user engagement maps.
Outcome Convexity() {
  Rng rng(9, 0);
  int linear_bad = 0, softmax_bad = 0;
  double linear_min = std::numeric_limits<double>::infinity(), softmax_min = linear_min;
  for (int trial = 0; trial < 1000; ++trial) {
    const double a = 1.0 - rng.Uniform01(), b = 1.0 - rng.Uniform01();  // (0, 1]
    const double s = LogUniform(rng, 1e-3, 10);
    auto f = [s](double x) { return x * x / (x + s); };
    const double gap = (f(a) + f(b)) / 2 - f((a + b) / 2);
    linear_min = std::min(linear_min, gap);
    linear_bad += a != b ? !(gap > 1e-12) : !(gap >= 0);
  }
  for (int trial = 0; trial < 1000; ++trial) {
    const double tau = LogUniform(rng, 0.1, 10);
    const double s_exp = 1.0 + LogUniform(rng, 0.01, 100);
    const double limit = tau * std::log(s_exp);
    const double a = rng.Uniform01() * limit, b = rng.Uniform01() * limit;
    auto g = [&](double x) {
      const double e = std::exp(x / tau);
      return x * e / (e + s_exp);
    };
    const double gap = (g(a) + g(b)) / 2 - g((a + b) / 2);
    softmax_min = std::min(softmax_min, gap);
    softmax_bad += !(gap > 1e-12);
  }
  return {linear_bad == 0 && softmax_bad == 0,
          "linear: " + std::to_string(linear_bad) + " failures, min gap " +
              FormatDouble(linear_min, 3) + "; softmax: " + std::to_string(softmax_bad) +
              " failures, min gap " + FormatDouble(softmax_min, 3)};
}

// 10. NMF on MovieLens-sized synthetic ratings, plus rank-1 recovery.
Outcome NmfProperties() {
  const std::size_t num_users = 943, num_items = 1682, num_ratings = 100000, rank = 15;
  Rng rng(10, 0);
  std::vector<double> taste(num_users * 3), appeal(num_items * 3);
  for (double& v : taste) v = rng.Uniform01();
  for (double& v : appeal) v = rng.Uniform01();
  RatingsTable ratings;
  while (ratings.ratings().size() < num_ratings) {
    const std::size_t u = rng.UniformIndex(num_users), i = rng.UniformIndex(num_items);
    double score = 0.0;
    for (std::size_t q = 0; q < 3; ++q) score += taste[u * 3 + q] * appeal[i * 3 + q];
    const double stars = std::clamp(std::round(1.0 + 4.0 * score / 3.0 + rng.Uniform01() - 0.5), 1.0, 5.0);
    ratings.Add("u" + std::to_string(u), "i" + std::to_string(i), stars);
  }
  const auto result = FactorizeRatings(ratings, {rank, 200, 13, 1e-9});
  int increases = 0;
  for (std::size_t t = 1; t < result.losses.size(); ++t) {
    increases += result.losses[t] > result.losses[t - 1] * (1 + 1e-9);
  }
  const bool positive =
      *std::min_element(result.user_factors.begin(), result.user_factors.end()) > 0 &&
      *std::min_element(result.item_factors.begin(), result.item_factors.end()) > 0;
  const auto users = EmbeddingsFromFactors(result);

  RatingsTable rank_one;
  std::vector<double> a(10), b(8);
  for (double& v : a) v = 0.2 + rng.Uniform01();
  for (double& v : b) v = 0.2 + rng.Uniform01();
  for (std::size_t u = 0; u < a.size(); ++u) {
    for (std::size_t i = 0; i < b.size(); ++i) {
      rank_one.Add(std::to_string(u), std::to_string(i), a[u] * b[i]);
    }
  }
  const double recovery = FactorizeRatings(rank_one, {1, 500, 13, 1e-9}).relative_error();
  return {increases == 0 && positive && users.strictly_positive() && recovery < 1e-3,
          std::to_string(result.num_users) + "x" + std::to_string(result.num_items) + ", " +
              std::to_string(ratings.ratings().size()) + " ratings: " + std::to_string(increases) +
              " loss increases, relative error " + FormatDouble(result.relative_error(), 4) +
              ", factors positive " + (positive ? "yes" : "no") + "; rank-1 error " +
              FormatDouble(recovery, 3)};
}

// 11. Proportional profiles with integral shares are equilibria.
Outcome ProportionalConstruction() {
  Rng rng(11, 0);
  int passed = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 1 + rng.UniformIndex(8);
    single_minded::Population m;
    for (std::size_t f = 0; f < d; ++f) m.m.push_back(1 + rng.UniformIndex(50));
    // n a multiple of sum(m) / gcd(m) keeps every share integral.
    std::uint64_t g = 0;
    for (auto v : m.m) g = std::gcd(g, v);
    const std::uint64_t n = (m.total() / g) * (1 + rng.UniformIndex(3));
    const auto r = single_minded::ProportionalProfile(m, n);
    passed += r.exact && r.is_equilibrium && single_minded::EquilibriumCheck(m, r.profile);
  }
  return {passed == 100, std::to_string(passed) + "/100 pass the exact check"};
}

// 12. Identical specs give byte-identical results.
Outcome SweepDeterminism() {
  const auto spec = SweepSpecFromJson(Json::parse(R"({
    "dataset": {"kind": "skewed", "users": 1000},
    "producers": [2, 10, 30],
    "dims": [5, 10],
    "rules": ["linear", "softmax:0.1", "softmax:1", "softmax:10"],
    "embed_seeds": [13, 17],
    "runs": 2
  })"));
  const auto a = RunSweep(spec, Scratch("det_a"), 1, true);
  const auto b = RunSweep(spec, Scratch("det_b"), Workers() + 2, true);
  const auto c = RunSweep(spec, Scratch("det_c"), 1, true);
  const auto text = ReadWithoutComments(a.results_path);
  const bool same = text == ReadWithoutComments(b.results_path) &&
                    text == ReadWithoutComments(c.results_path);
  return {same && a.rows.size() == 96,
          std::to_string(a.rows.size()) + " rows, " + std::to_string(text.size()) +
              " bytes, identical across 3 runs " + (same ? "yes" : "no")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"convergence on the desk grid", ConvergenceGrid},
      {"homogeneity at tau=100", HighTemperatureHomogeneity},
      {"specialization monotone in tau", SpecializationMonotone},
      {"utility decreasing in tau", UtilityMonotone},
      {"producer total equals user total", TotalsAgree},
      {"dynamics output in brute-force equilibrium set", OracleEquivalence},
      {"single-minded condition equivalence", SingleMindedEquivalence},
      {"best responses on basis vectors", VertexOptimality},
      {"midpoint convexity", Convexity},
      {"NMF properties", NmfProperties},
      {"proportional construction is an equilibrium", ProportionalConstruction},
      {"sweep determinism", SweepDeterminism},
  };
  int failed = 0;
  for (std::size_t c = 0; c < criteria.size(); ++c) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criteria[c].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !outcome.pass;
    std::printf("%s %2zu %s: %s (%.1fs)\n", outcome.pass ? "PASS" : "FAIL", c + 1,
                criteria[c].first.c_str(), outcome.detail.c_str(), seconds);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
