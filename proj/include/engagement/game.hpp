#ifndef ENGAGEMENT_GAME_HPP_
#define ENGAGEMENT_GAME_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "engagement/error.hpp"
#include "engagement/numeric.hpp"
#include "engagement/population.hpp"
#include "engagement/serving_rule.hpp"
#include "engagement/strategy.hpp"

namespace engagement {

// n producers competing for a fixed population under one serving rule.
class GameInstance {
 public:
  GameInstance(std::shared_ptr<const UserPopulation> users, std::size_t num_producers,
               ServingRule rule)
      : users_(std::move(users)), num_producers_(num_producers), rule_(rule) {
    Require(users_ != nullptr, ErrorCode::kInvalidArgument, "game needs a user population");
    Require(num_producers_ >= 1, ErrorCode::kInvalidArgument,
            "game needs at least one producer");
  }

  GameInstance(UserPopulation users, std::size_t num_producers, ServingRule rule)
      : GameInstance(std::make_shared<const UserPopulation>(std::move(users)),
                     num_producers, rule) {}

  const UserPopulation& users() const { return *users_; }
  const std::shared_ptr<const UserPopulation>& shared_users() const { return users_; }
  std::size_t num_producers() const { return num_producers_; }
  std::size_t dim() const { return users_->dim(); }
  const ServingRule& rule() const { return rule_; }

 private:
  std::shared_ptr<const UserPopulation> users_;
  std::size_t num_producers_;
  ServingRule rule_;
};

namespace internal {

inline void CheckProfileAgainst(const StrategyProfile& profile, std::size_t dim) {
  Require(profile.dim() == dim, ErrorCode::kDimensionMismatch,
          "profile dimension " + std::to_string(profile.dim()) +
              " does not match user dimension " + std::to_string(dim));
}

// Probabilities from the alignment scores x_j = c.s_j.
inline std::vector<double> ProbabilitiesFromScores(std::span<const double> scores,
                                                   const ServingRule& rule) {
  std::vector<double> p(scores.size(), 0.0);
  if (rule.is_linear()) {
    const double total = CompensatedTotal(scores);
    if (total <= 0.0) return p;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (scores[j] > 0.0) p[j] = scores[j] / total;
    }
    return p;
  }
  // Shift by the max score so every exponent is <= 0.
  const double top = *std::max_element(scores.begin(), scores.end());
  CompensatedSum total;
  for (std::size_t j = 0; j < scores.size(); ++j) {
    p[j] = std::exp((scores[j] - top) / rule.tau());
    total.Add(p[j]);
  }
  const double z = total.value();
  for (double& v : p) v /= z;
  return p;
}

inline std::vector<double> Scores(std::span<const double> user,
                                  const StrategyProfile& profile) {
  std::vector<double> scores(profile.num_producers());
  for (std::size_t j = 0; j < scores.size(); ++j) scores[j] = profile.Inner(user, j);
  return scores;
}

}  // namespace internal

// Probability that each producer is served to a user with preferences `user`.
inline std::vector<double> ServeProbabilities(std::span<const double> user,
                                              const StrategyProfile& profile,
                                              const ServingRule& rule) {
  Require(user.size() == profile.dim(), ErrorCode::kDimensionMismatch,
          "user vector has dimension " + std::to_string(user.size()) + ", profile has " +
              std::to_string(profile.dim()));
  for (double v : user) {
    Require(std::isfinite(v), ErrorCode::kNonFinite, "user vector has a non-finite entry");
    Require(v >= 0.0, ErrorCode::kInvalidArgument, "user vector has a negative entry");
  }
  return internal::ProbabilitiesFromScores(internal::Scores(user, profile), rule);
}

// Expected engagement of producer i: sum over users of p_i(c_k) * c_k.s_i.
inline double ProducerUtility(std::size_t producer, const StrategyProfile& profile,
                              const UserPopulation& users, const ServingRule& rule) {
  Require(producer < profile.num_producers(), ErrorCode::kOutOfRange,
          "producer index " + std::to_string(producer) + " out of range");
  internal::CheckProfileAgainst(profile, users.dim());
  const std::size_t n = profile.num_producers();
  std::vector<double> scores(n);
  CompensatedSum utility;
  for (std::size_t k = 0; k < users.num_users(); ++k) {
    const auto user = users.row(k);
    for (std::size_t j = 0; j < n; ++j) scores[j] = profile.Inner(user, j);
    const double own = scores[producer];
    CompensatedSum denominator;
    double numerator = 0.0;
    if (rule.is_linear()) {
      if (own <= 0.0) continue;
      for (double x : scores) denominator.Add(x);
      numerator = own;
    } else {
      const double top = *std::max_element(scores.begin(), scores.end());
      for (double x : scores) denominator.Add(std::exp((x - top) / rule.tau()));
      numerator = std::exp((own - top) / rule.tau());
    }
    utility.Add(numerator / denominator.value() * own);
  }
  return utility.value();
}

struct TotalUtilities {
  double producer_total = 0.0;  // sum over producers of their utility
  double user_total = 0.0;      // sum over users of their expected engagement
};

// Both totals come from the same K x n table of p_i(c_k) * c_k.s_i, summed
// producer-major for the producer side and user-major for the user side.
inline TotalUtilities ComputeTotalUtilities(const StrategyProfile& profile,
                                            const UserPopulation& users,
                                            const ServingRule& rule) {
  internal::CheckProfileAgainst(profile, users.dim());
  const std::size_t n = profile.num_producers();
  const std::size_t num_users = users.num_users();
  std::vector<double> engagement(num_users * n);
  for (std::size_t k = 0; k < num_users; ++k) {
    const auto scores = internal::Scores(users.row(k), profile);
    const auto p = internal::ProbabilitiesFromScores(scores, rule);
    for (std::size_t i = 0; i < n; ++i) engagement[k * n + i] = p[i] * scores[i];
  }
  TotalUtilities totals;
  CompensatedSum producer_side;
  for (std::size_t i = 0; i < n; ++i) {
    CompensatedSum u;
    for (std::size_t k = 0; k < num_users; ++k) u.Add(engagement[k * n + i]);
    producer_side.Add(u.value());
  }
  CompensatedSum user_side;
  for (std::size_t k = 0; k < num_users; ++k) {
    CompensatedSum u;
    for (std::size_t i = 0; i < n; ++i) u.Add(engagement[k * n + i]);
    user_side.Add(u.value());
  }
  totals.producer_total = producer_side.value();
  totals.user_total = user_side.value();
  return totals;
}

// Per-user summary of everyone except one producer. With it, the utility of
// any candidate strategy for that producer costs O(K).
//   linear:  opponent_sum[k] = sum_{j != i} c_k.s_j
//   softmax: max_score[k] = max_{j != i} c_k.s_j (-inf if no opponents),
//            opponent_sum[k] = sum_{j != i} exp((c_k.s_j - max_score[k]) / tau)
struct OpponentCache {
  ServingRule rule = ServingRule::Linear();
  std::vector<double> max_score;
  std::vector<double> opponent_sum;
};

inline OpponentCache CachedOpponentSums(const StrategyProfile& profile,
                                        const UserPopulation& users,
                                        const ServingRule& rule, std::size_t producer) {
  Require(producer < profile.num_producers(), ErrorCode::kOutOfRange,
          "producer index " + std::to_string(producer) + " out of range");
  internal::CheckProfileAgainst(profile, users.dim());
  const std::size_t n = profile.num_producers();
  OpponentCache cache;
  cache.rule = rule;
  cache.opponent_sum.assign(users.num_users(), 0.0);
  if (rule.is_softmax()) {
    cache.max_score.assign(users.num_users(), -std::numeric_limits<double>::infinity());
  }
  std::vector<double> scores(n);
  for (std::size_t k = 0; k < users.num_users(); ++k) {
    const auto user = users.row(k);
    CompensatedSum sum;
    if (rule.is_linear()) {
      for (std::size_t j = 0; j < n; ++j) {
        if (j != producer) sum.Add(profile.Inner(user, j));
      }
    } else {
      double top = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < n; ++j) {
        if (j == producer) continue;
        scores[j] = profile.Inner(user, j);
        top = std::max(top, scores[j]);
      }
      for (std::size_t j = 0; j < n; ++j) {
        if (j != producer) sum.Add(std::exp((scores[j] - top) / rule.tau()));
      }
      cache.max_score[k] = top;
    }
    cache.opponent_sum[k] = sum.value();
  }
  return cache;
}

// Engagement contributed by one user to a producer scoring `score` against
// the cached opponents of that user.
inline double CachedEngagement(const OpponentCache& cache, std::size_t k, double score) {
  if (cache.rule.is_linear()) {
    if (score <= 0.0) return 0.0;
    return score * score / (score + cache.opponent_sum[k]);
  }
  const double tau = cache.rule.tau();
  const double top = std::max(cache.max_score[k], score);
  const double own = std::exp((score - top) / tau);
  const double others = cache.opponent_sum[k] == 0.0
                            ? 0.0
                            : cache.opponent_sum[k] * std::exp((cache.max_score[k] - top) / tau);
  return score * own / (own + others);
}

// Utility of the cached producer if it switched to `strategy`.
inline double CachedCandidateUtility(const OpponentCache& cache, const UserPopulation& users,
                                     std::span<const double> strategy) {
  Require(strategy.size() == users.dim(), ErrorCode::kDimensionMismatch,
          "candidate strategy has the wrong dimension");
  CompensatedSum utility;
  for (std::size_t k = 0; k < users.num_users(); ++k) {
    const auto user = users.row(k);
    double score = 0.0;
    for (std::size_t f = 0; f < users.dim(); ++f) score += user[f] * strategy[f];
    utility.Add(CachedEngagement(cache, k, score));
  }
  return utility.value();
}

// Utility of every basis strategy e_f for one producer, given how many of the
// other producers sit on each feature. This is the inner loop of best-response
// dynamics, O(K * d) per call.
//
// For softmax it uses a per-game table exp((c_k(f) - max_f c_k(f)) / tau),
// which is the opponent cache with a fixed per-user shift; exponents stay
// <= 0. When 1/tau is large enough for that table to underflow it falls back
// to shifting by the opponents' max, as OpponentCache does.
class BasisUtilityTable {
 public:
  BasisUtilityTable(std::shared_ptr<const UserPopulation> users, ServingRule rule)
      : users_(std::move(users)), rule_(rule) {
    const std::size_t num_users = users_->num_users();
    const std::size_t dim = users_->dim();
    if (rule_.is_softmax() && 1.0 / rule_.tau() < kMaxSafeExponent) {
      use_table_ = true;
      shifted_exp_.resize(num_users * dim);
      for (std::size_t k = 0; k < num_users; ++k) {
        const auto row = users_->row(k);
        const double top = *std::max_element(row.begin(), row.end());
        for (std::size_t f = 0; f < dim; ++f) {
          shifted_exp_[k * dim + f] = std::exp((row[f] - top) / rule_.tau());
        }
      }
    }
  }

  const UserPopulation& users() const { return *users_; }
  const ServingRule& rule() const { return rule_; }

  // `opponent_counts[f]` = number of other producers on feature f.
  std::vector<double> FeatureUtilities(std::span<const std::size_t> opponent_counts) const {
    const std::size_t dim = users_->dim();
    Require(opponent_counts.size() == dim, ErrorCode::kDimensionMismatch,
            "opponent counts have the wrong dimension");
    std::vector<CompensatedSum> sums(dim);
    std::vector<double> counts(opponent_counts.begin(), opponent_counts.end());
    const double tau = rule_.tau();
    for (std::size_t k = 0; k < users_->num_users(); ++k) {
      const auto row = users_->row(k);
      if (rule_.is_linear()) {
        double opponents = 0.0;
        for (std::size_t f = 0; f < dim; ++f) opponents += counts[f] * row[f];
        for (std::size_t f = 0; f < dim; ++f) {
          const double x = row[f];
          if (x > 0.0) sums[f].Add(x * x / (x + opponents));
        }
      } else if (use_table_) {
        const double* e = shifted_exp_.data() + k * dim;
        double opponents = 0.0;
        for (std::size_t f = 0; f < dim; ++f) opponents += counts[f] * e[f];
        for (std::size_t f = 0; f < dim; ++f) {
          sums[f].Add(row[f] * e[f] / (e[f] + opponents));
        }
      } else {
        double top = -std::numeric_limits<double>::infinity();
        for (std::size_t f = 0; f < dim; ++f) {
          if (counts[f] > 0.0) top = std::max(top, row[f]);
        }
        double opponents = 0.0;
        if (std::isfinite(top)) {
          for (std::size_t f = 0; f < dim; ++f) {
            if (counts[f] > 0.0) opponents += counts[f] * std::exp((row[f] - top) / tau);
          }
        }
        for (std::size_t f = 0; f < dim; ++f) {
          const double x = row[f];
          const double shift = std::max(top, x);
          const double own = std::exp((x - shift) / tau);
          const double others =
              opponents == 0.0 ? 0.0 : opponents * std::exp((top - shift) / tau);
          sums[f].Add(x * own / (own + others));
        }
      }
    }
    std::vector<double> utilities(dim);
    for (std::size_t f = 0; f < dim; ++f) utilities[f] = sums[f].value();
    return utilities;
  }

 private:
  // exp(-700) is still a normal double.
  static constexpr double kMaxSafeExponent = 700.0;

  std::shared_ptr<const UserPopulation> users_;
  ServingRule rule_;
  bool use_table_ = false;
  std::vector<double> shifted_exp_;
};

}  // namespace engagement

#endif  // ENGAGEMENT_GAME_HPP_
