#ifndef ENGAGEMENT_DYNAMICS_HPP_
#define ENGAGEMENT_DYNAMICS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "engagement/error.hpp"
#include "engagement/game.hpp"
#include "engagement/rng.hpp"
#include "engagement/strategy.hpp"

namespace engagement {

struct DynamicsConfig {
  std::size_t max_iters = 500;
  std::uint64_t seed = 1;
  bool record_trace = true;
};

// One applied best-response update.
struct UpdateEvent {
  std::size_t iteration = 0;  // 1-based pass number
  std::size_t producer = 0;
  std::size_t old_feature = 0;
  std::size_t new_feature = 0;
  double old_utility = 0.0;
  double new_utility = 0.0;

  friend bool operator==(const UpdateEvent&, const UpdateEvent&) = default;
};

struct DynamicsResult {
  bool converged = false;
  std::size_t iterations = 0;  // permutation draws, including the final clean pass
  BasisProfile profile;        // last state, also on non-convergence
  std::vector<UpdateEvent> trace;

  friend bool operator==(const DynamicsResult&, const DynamicsResult&) = default;
};

struct BestResponse {
  std::size_t feature = 0;
  double utility = 0.0;
  double current_utility = 0.0;
};

namespace internal {

// Ties: the current feature wins if it is a maximizer, else the lowest index.
inline BestResponse PickBest(const std::vector<double>& utilities, std::size_t current) {
  BestResponse best{current, utilities[current], utilities[current]};
  for (std::size_t f = 0; f < utilities.size(); ++f) {
    if (utilities[f] > best.utility) {
      best.feature = f;
      best.utility = utilities[f];
    }
  }
  return best;
}

inline std::vector<std::size_t> OpponentCounts(const BasisProfile& profile,
                                               std::size_t producer) {
  auto counts = profile.Counts();
  --counts[profile.features[producer]];
  return counts;
}

inline void CheckBasisGame(const BasisProfile& profile, const UserPopulation& users) {
  Require(profile.dim == users.dim(), ErrorCode::kDimensionMismatch,
          "profile dimension " + std::to_string(profile.dim) +
              " does not match user dimension " + std::to_string(users.dim()));
  Require(!profile.features.empty(), ErrorCode::kInvalidArgument,
          "profile has no producers");
  for (std::size_t f : profile.features) {
    Require(f < profile.dim, ErrorCode::kOutOfRange, "basis feature out of range");
  }
}

}  // namespace internal

// Best basis response of `producer` against the rest of `profile`.
inline BestResponse BestBasisResponse(std::size_t producer, const BasisProfile& profile,
                                      const BasisUtilityTable& table) {
  Require(producer < profile.num_producers(), ErrorCode::kOutOfRange,
          "producer index " + std::to_string(producer) + " out of range");
  internal::CheckBasisGame(profile, table.users());
  const auto counts = internal::OpponentCounts(profile, producer);
  return internal::PickBest(table.FeatureUtilities(counts), profile.features[producer]);
}

inline BestResponse BestBasisResponse(std::size_t producer, const StrategyProfile& profile,
                                      std::shared_ptr<const UserPopulation> users,
                                      const ServingRule& rule) {
  return BestBasisResponse(producer, profile.basis(),
                           BasisUtilityTable(std::move(users), rule));
}

// Randomized best-response dynamics over the standard basis.
//
// Producers start on uniformly random features (stream 0). Each pass draws a
// fresh permutation (stream = pass number) and walks it; the first producer
// whose best response is strictly better than its current feature switches,
// and the pass ends. A pass with no switch means every producer is best
// responding: converged. After max_iters passes without that, the last
// profile is returned with converged = false.
inline DynamicsResult RunBestResponseDynamics(const GameInstance& game,
                                              const DynamicsConfig& config) {
  Require(config.max_iters >= 1, ErrorCode::kInvalidArgument, "max_iters must be >= 1");
  const std::size_t n = game.num_producers();
  const std::size_t dim = game.dim();
  const BasisUtilityTable table(game.shared_users(), game.rule());

  DynamicsResult result;
  result.profile.dim = dim;
  result.profile.features.resize(n);
  {
    Rng init(config.seed, 0);
    for (auto& f : result.profile.features) f = static_cast<std::size_t>(init.UniformIndex(dim));
  }
  auto counts = result.profile.Counts();

  while (!result.converged && result.iterations < config.max_iters) {
    ++result.iterations;
    Rng pass_rng(config.seed, result.iterations);
    const auto order = pass_rng.Permutation(n);
    bool updated = false;
    for (std::size_t i : order) {
      const std::size_t current = result.profile.features[i];
      --counts[current];
      const auto best = internal::PickBest(table.FeatureUtilities(counts), current);
      if (best.utility > best.current_utility) {
        ++counts[best.feature];
        result.profile.features[i] = best.feature;
        if (config.record_trace) {
          result.trace.push_back({result.iterations, i, current, best.feature,
                                  best.current_utility, best.utility});
        }
        updated = true;
        break;
      }
      ++counts[current];
    }
    if (!updated) result.converged = true;
  }
  return result;
}

struct DeviationCheck {
  bool is_equilibrium = true;
  // Largest u_i(e_f, s_-i) - u_i(s) over producers and features.
  double max_gain = 0.0;
  std::size_t worst_producer = 0;
  std::size_t worst_feature = 0;
  std::vector<double> utilities;  // u_i(s) per producer
};

// Relative slack for deviation gains: max(1, |u_i|) * kEquilibriumTolerance.
inline constexpr double kEquilibriumTolerance = 1e-12;

// Checks every unilateral basis deviation by evaluating utilities directly
// from the serving probabilities (no caches), so it is independent of the
// code path the dynamics use. A producer's utility depends only on its own
// feature and the multiset of the others', so one producer per occupied
// feature stands in for all of them.
inline DeviationCheck CheckBasisDeviations(const BasisProfile& profile,
                                           const GameInstance& game) {
  internal::CheckBasisGame(profile, game.users());
  Require(profile.num_producers() == game.num_producers(), ErrorCode::kDimensionMismatch,
          "profile has " + std::to_string(profile.num_producers()) +
              " producers, game has " + std::to_string(game.num_producers()));
  const std::size_t n = profile.num_producers();
  DeviationCheck check;
  check.utilities.assign(n, 0.0);
  check.max_gain = -std::numeric_limits<double>::infinity();
  const auto base = StrategyProfile::Basis(profile);
  std::vector<std::optional<double>> utility_on(profile.dim);
  for (std::size_t i = 0; i < n; ++i) {
    auto& cached = utility_on[profile.features[i]];
    if (cached) {
      check.utilities[i] = *cached;
      continue;
    }
    const double current = ProducerUtility(i, base, game.users(), game.rule());
    cached = current;
    check.utilities[i] = current;
    for (std::size_t f = 0; f < profile.dim; ++f) {
      if (f == profile.features[i]) continue;
      auto deviated = profile;
      deviated.features[i] = f;
      const double alternative = ProducerUtility(i, StrategyProfile::Basis(std::move(deviated)),
                                                 game.users(), game.rule());
      const double gain = alternative - current;
      if (gain > check.max_gain) {
        check.max_gain = gain;
        check.worst_producer = i;
        check.worst_feature = f;
      }
      if (gain > kEquilibriumTolerance * std::max(1.0, std::fabs(current))) {
        check.is_equilibrium = false;
      }
    }
  }
  if (!std::isfinite(check.max_gain)) check.max_gain = 0.0;  // d == 1
  return check;
}

inline bool VerifyPureNeOnBasis(const BasisProfile& profile, const GameInstance& game) {
  return CheckBasisDeviations(profile, game).is_equilibrium;
}

inline constexpr std::uint64_t kMaxEnumeratedProfiles = 1'000'000;

// Every basis profile that passes VerifyPureNeOnBasis, in lexicographic order
// of the feature vector.
inline std::vector<BasisProfile> BruteForceNeEnumeration(const GameInstance& game) {
  const std::size_t n = game.num_producers();
  const std::size_t dim = game.dim();
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < n; ++i) {
    Require(total <= kMaxEnumeratedProfiles / dim, ErrorCode::kTooLarge,
            "d^n exceeds the enumeration limit of " + std::to_string(kMaxEnumeratedProfiles));
    total *= dim;
  }
  std::vector<BasisProfile> equilibria;
  BasisProfile profile{dim, std::vector<std::size_t>(n, 0)};
  for (std::uint64_t index = 0; index < total; ++index) {
    if (VerifyPureNeOnBasis(profile, game)) equilibria.push_back(profile);
    // Odometer increment, last producer fastest: lexicographic order.
    for (std::size_t i = n; i-- > 0;) {
      if (++profile.features[i] < dim) break;
      profile.features[i] = 0;
    }
  }
  return equilibria;
}

}  // namespace engagement

#endif  // ENGAGEMENT_DYNAMICS_HPP_
