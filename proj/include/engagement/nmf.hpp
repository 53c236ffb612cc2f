#ifndef ENGAGEMENT_NMF_HPP_
#define ENGAGEMENT_NMF_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "engagement/error.hpp"
#include "engagement/numeric.hpp"
#include "engagement/population.hpp"
#include "engagement/ratings.hpp"
#include "engagement/rng.hpp"

namespace engagement {

struct NmfConfig {
  std::size_t rank = 15;
  std::size_t iterations = 200;
  std::uint64_t seed = 13;
  double epsilon = 1e-9;
};

struct NmfResult {
  std::size_t num_users = 0;
  std::size_t num_items = 0;
  std::size_t rank = 0;
  std::vector<double> user_factors;  // num_users x rank, row-major, >= epsilon
  std::vector<double> item_factors;  // num_items x rank, row-major, >= epsilon
  // Frobenius norm of the residual over observed entries; entry 0 is the
  // initial loss, entry t the loss after iteration t.
  std::vector<double> losses;
  double rating_norm = 0.0;  // Frobenius norm of the observed ratings

  double relative_error() const {
    return rating_norm > 0.0 ? losses.back() / rating_norm : losses.back();
  }
};

// Lee-Seung multiplicative updates for R ~ W H^T restricted to observed
// entries:
//   W <- max(eps, W * (R H) / (P H)),   H <- max(eps, H * (R^T W) / (P^T W))
// where R and P = W H^T are masked to the observed pattern. Each update is
// the exact minimizer of a separable quadratic bound on the masked loss, and
// clamping at eps is the constrained minimizer of that bound, so the loss
// never increases.
inline NmfResult FactorizeRatings(const RatingsTable& ratings, const NmfConfig& config) {
  const std::size_t num_users = ratings.num_users();
  const std::size_t num_items = ratings.num_items();
  const std::size_t r = config.rank;
  Require(!ratings.ratings().empty(), ErrorCode::kInvalidArgument, "no ratings to factorize");
  Require(r >= 1, ErrorCode::kInvalidArgument, "rank must be at least 1");
  Require(r <= std::min(num_users, num_items), ErrorCode::kInvalidArgument,
          "rank " + std::to_string(r) + " exceeds min(#users, #items) = " +
              std::to_string(std::min(num_users, num_items)));
  Require(config.iterations >= 1, ErrorCode::kInvalidArgument, "iterations must be >= 1");
  Require(config.epsilon > 0.0, ErrorCode::kInvalidArgument, "epsilon must be positive");

  NmfResult result;
  result.num_users = num_users;
  result.num_items = num_items;
  result.rank = r;
  auto& w = result.user_factors;
  auto& h = result.item_factors;
  w.resize(num_users * r);
  h.resize(num_items * r);
  {
    Rng rng(config.seed, 0);
    for (double& v : w) v = std::max(config.epsilon, rng.Uniform01());
    for (double& v : h) v = std::max(config.epsilon, rng.Uniform01());
  }

  const auto& entries = ratings.ratings();
  std::vector<double> predicted(entries.size());
  auto predict = [&] {
    CompensatedSum loss;
    for (std::size_t e = 0; e < entries.size(); ++e) {
      const double* wu = &w[entries[e].user * r];
      const double* hi = &h[entries[e].item * r];
      double dot = 0.0;
      for (std::size_t q = 0; q < r; ++q) dot += wu[q] * hi[q];
      predicted[e] = dot;
      const double diff = entries[e].value - dot;
      loss.Add(diff * diff);
    }
    return std::sqrt(loss.value());
  };
  {
    CompensatedSum norm;
    for (const auto& e : entries) norm.Add(e.value * e.value);
    result.rating_norm = std::sqrt(norm.value());
  }

  std::vector<double> numerator;
  std::vector<double> denominator;
  // Multiplicative step for one factor; by_user selects which index of each
  // observed entry addresses the rows of `target`.
  auto update = [&](std::vector<double>& target, const std::vector<double>& other,
                    std::size_t rows, bool by_user) {
    numerator.assign(rows * r, 0.0);
    denominator.assign(rows * r, 0.0);
    for (std::size_t e = 0; e < entries.size(); ++e) {
      const std::size_t row = by_user ? entries[e].user : entries[e].item;
      const std::size_t col = by_user ? entries[e].item : entries[e].user;
      const double* o = &other[col * r];
      double* num = &numerator[row * r];
      double* den = &denominator[row * r];
      for (std::size_t q = 0; q < r; ++q) {
        num[q] += entries[e].value * o[q];
        den[q] += predicted[e] * o[q];
      }
    }
    for (std::size_t idx = 0; idx < rows * r; ++idx) {
      const double den = std::max(denominator[idx], std::numeric_limits<double>::min());
      target[idx] = std::max(config.epsilon, target[idx] * numerator[idx] / den);
    }
  };

  result.losses.reserve(config.iterations + 1);
  result.losses.push_back(predict());
  for (std::size_t t = 0; t < config.iterations; ++t) {
    update(w, h, num_users, /*by_user=*/true);
    predict();
    update(h, w, num_items, /*by_user=*/false);
    result.losses.push_back(predict());
  }
  return result;
}

// User factor rows normalized to unit L1 norm.
inline UserPopulation EmbeddingsFromFactors(const NmfResult& factors) {
  for (std::size_t u = 0; u < factors.num_users; ++u) {
    double total = 0.0;
    for (std::size_t q = 0; q < factors.rank; ++q) total += factors.user_factors[u * factors.rank + q];
    Require(total > 0.0, ErrorCode::kNumeric,
            "user " + std::to_string(u) + " has an all-zero factor row after training");
  }
  return UserPopulation::FromRows(factors.num_users, factors.rank, factors.user_factors);
}

inline UserPopulation NmfUserEmbeddings(const RatingsTable& ratings, const NmfConfig& config) {
  return EmbeddingsFromFactors(FactorizeRatings(ratings, config));
}

}  // namespace engagement

#endif  // ENGAGEMENT_NMF_HPP_
