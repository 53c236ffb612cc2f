#ifndef ENGAGEMENT_SAMPLING_HPP_
#define ENGAGEMENT_SAMPLING_HPP_

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "engagement/error.hpp"
#include "engagement/population.hpp"
#include "engagement/rng.hpp"

namespace engagement {

namespace internal {

// Uniform point on the (d-1)-simplex: d unit exponentials over their sum.
inline void DrawSimplexPoint(Rng& rng, std::span<double> out) {
  for (;;) {
    double total = 0.0;
    for (double& v : out) {
      v = rng.Exponential();
      total += v;
    }
    if (total > 0.0) {
      for (double& v : out) v /= total;
      return;
    }
  }
}

inline void CheckSamplerArgs(std::size_t num_users, std::size_t dim) {
  Require(num_users >= 1, ErrorCode::kInvalidArgument, "need at least one user");
  Require(dim >= 1, ErrorCode::kInvalidArgument, "need at least one feature");
}

// Stream ids used by the samplers.
inline constexpr std::uint64_t kUserStream = 1;
inline constexpr std::uint64_t kFeatureWeightStream = 2;

}  // namespace internal

// K users drawn independently and uniformly from the probability simplex.
inline UserPopulation SampleUniformPopulation(std::size_t num_users, std::size_t dim,
                                              std::uint64_t seed) {
  internal::CheckSamplerArgs(num_users, dim);
  Rng rng(seed, internal::kUserStream);
  std::vector<double> weights(num_users * dim);
  for (std::size_t k = 0; k < num_users; ++k) {
    internal::DrawSimplexPoint(rng, std::span<double>(weights.data() + k * dim, dim));
  }
  return UserPopulation::FromRows(num_users, dim, std::move(weights));
}

struct SkewedPopulation {
  UserPopulation users;
  std::vector<double> feature_weights;  // w, ascending
};

// Feature weights w are a sorted uniform simplex draw; each user is a uniform
// simplex draw reweighted coordinate-wise by w, then renormalized. Expected
// total weight on feature f increases with w_f.
inline SkewedPopulation SampleSkewedPopulation(std::size_t num_users, std::size_t dim,
                                               std::uint64_t seed) {
  internal::CheckSamplerArgs(num_users, dim);
  std::vector<double> w(dim);
  {
    Rng rng(seed, internal::kFeatureWeightStream);
    internal::DrawSimplexPoint(rng, w);
  }
  std::sort(w.begin(), w.end());
  Rng rng(seed, internal::kUserStream);
  std::vector<double> weights(num_users * dim);
  for (std::size_t k = 0; k < num_users; ++k) {
    std::span<double> row(weights.data() + k * dim, dim);
    for (;;) {
      internal::DrawSimplexPoint(rng, row);
      double total = 0.0;
      for (std::size_t f = 0; f < dim; ++f) {
        row[f] *= w[f];
        total += row[f];
      }
      if (total > 0.0) {
        for (double& v : row) v /= total;
        break;
      }
    }
  }
  return {UserPopulation::FromRows(num_users, dim, std::move(weights)), std::move(w)};
}

}  // namespace engagement

#endif  // ENGAGEMENT_SAMPLING_HPP_
