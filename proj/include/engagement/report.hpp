#ifndef ENGAGEMENT_REPORT_HPP_
#define ENGAGEMENT_REPORT_HPP_

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "engagement/dynamics.hpp"
#include "engagement/error.hpp"
#include "engagement/game.hpp"
#include "engagement/strategy.hpp"

namespace engagement {

struct SpecializationMetrics {
  std::size_t distinct_features = 0;
  double entropy = 0.0;            // natural log
  std::vector<double> fractions;   // n_f / n
};

inline SpecializationMetrics ComputeSpecialization(const BasisProfile& profile) {
  Require(!profile.features.empty(), ErrorCode::kInvalidArgument, "profile has no producers");
  SpecializationMetrics metrics;
  const auto counts = profile.Counts();
  const double n = static_cast<double>(profile.num_producers());
  metrics.fractions.resize(counts.size());
  for (std::size_t f = 0; f < counts.size(); ++f) {
    metrics.fractions[f] = static_cast<double>(counts[f]) / n;
    if (counts[f] == 0) continue;
    ++metrics.distinct_features;
    metrics.entropy -= metrics.fractions[f] * std::log(metrics.fractions[f]);
  }
  return metrics;
}

struct EquilibriumReport {
  BasisProfile profile;
  std::vector<double> producer_fractions;
  std::vector<double> average_user_weight;  // (1/K) sum_k c_k(f)
  std::size_t distinct_features = 0;
  double entropy = 0.0;
  double total_producer_utility = 0.0;
  double average_producer_utility = 0.0;  // total / n
  double total_user_utility = 0.0;
  double average_user_utility = 0.0;  // total / K
  bool converged = false;
  std::size_t iterations = 0;
};

inline EquilibriumReport ReportForProfile(const BasisProfile& profile, const GameInstance& game) {
  EquilibriumReport report;
  report.profile = profile;
  auto metrics = ComputeSpecialization(profile);
  report.producer_fractions = std::move(metrics.fractions);
  report.distinct_features = metrics.distinct_features;
  report.entropy = metrics.entropy;
  report.average_user_weight = game.users().AverageWeights();
  const auto totals =
      ComputeTotalUtilities(StrategyProfile::Basis(profile), game.users(), game.rule());
  report.total_producer_utility = totals.producer_total;
  report.total_user_utility = totals.user_total;
  report.average_producer_utility =
      totals.producer_total / static_cast<double>(profile.num_producers());
  report.average_user_utility =
      totals.user_total / static_cast<double>(game.users().num_users());
  return report;
}

struct RunOptions {
  // Re-check every converged profile with the direct deviation check and
  // fail loudly if it does not hold.
  bool verify_equilibrium = true;
};

inline EquilibriumReport RunInstance(const GameInstance& game, const DynamicsConfig& config,
                                     const RunOptions& options = {}) {
  auto quiet = config;
  quiet.record_trace = false;
  const auto result = RunBestResponseDynamics(game, quiet);
  if (result.converged && options.verify_equilibrium) {
    const auto check = CheckBasisDeviations(result.profile, game);
    Require(check.is_equilibrium, ErrorCode::kInternal,
            "dynamics converged to a profile with a profitable deviation (gain " +
                FormatDouble(check.max_gain) + ")");
  }
  auto report = ReportForProfile(result.profile, game);
  report.converged = result.converged;
  report.iterations = result.iterations;
  return report;
}

}  // namespace engagement

#endif  // ENGAGEMENT_REPORT_HPP_
