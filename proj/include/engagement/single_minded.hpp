#ifndef ENGAGEMENT_SINGLE_MINDED_HPP_
#define ENGAGEMENT_SINGLE_MINDED_HPP_

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "engagement/error.hpp"

// Closed-form equilibria when every user wants exactly one feature and the
// linear rule is in force. With m_f users on feature f and n_f producers on
// it, a producer on f earns m_f / n_f, and the count vector is an equilibrium
// iff n_f / m_f <= (n_f' + 1) / m_f' for all f, f'.
//
// All comparisons are exact: fractions are compared by cross-multiplication
// in 128-bit integers.
namespace engagement::single_minded {

// Inputs are capped so a slack denominator m_f * m_f' fits in 63 bits.
inline constexpr std::uint64_t kMaxCount = std::uint64_t{1} << 31;

struct Population {
  std::vector<std::uint64_t> m;  // users per feature, all >= 1

  std::size_t dim() const { return m.size(); }
  std::uint64_t total() const { return std::accumulate(m.begin(), m.end(), std::uint64_t{0}); }
};

struct CountProfile {
  std::vector<std::uint64_t> counts;  // producers per feature

  std::uint64_t n() const {
    return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  }

  friend bool operator==(const CountProfile&, const CountProfile&) = default;
};

// Non-negative fraction num / den, den > 0.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

namespace internal {

using Wide = __int128;

inline void Validate(const Population& population, const CountProfile& profile) {
  Require(!population.m.empty(), ErrorCode::kInvalidArgument, "m must not be empty");
  Require(population.m.size() == profile.counts.size(), ErrorCode::kDimensionMismatch,
          "m has " + std::to_string(population.m.size()) + " features, counts has " +
              std::to_string(profile.counts.size()));
  for (std::size_t f = 0; f < population.m.size(); ++f) {
    Require(population.m[f] >= 1, ErrorCode::kInvalidArgument,
            "m[" + std::to_string(f) + "] must be positive");
    Require(population.m[f] <= kMaxCount && profile.counts[f] <= kMaxCount,
            ErrorCode::kTooLarge, "counts must be at most 2^31");
  }
}

// a/b <= c/d for positive denominators.
inline bool FractionLessEqual(Wide a, Wide b, Wide c, Wide d) { return a * d <= c * b; }

}  // namespace internal

// n_f / m_f <= (n_f' + 1) / m_f' for every pair of features.
inline bool EquilibriumCheck(const Population& population, const CountProfile& profile) {
  internal::Validate(population, profile);
  const std::size_t d = population.dim();
  for (std::size_t f = 0; f < d; ++f) {
    for (std::size_t g = 0; g < d; ++g) {
      if (!internal::FractionLessEqual(profile.counts[f], population.m[f],
                                       profile.counts[g] + 1, population.m[g])) {
        return false;
      }
    }
  }
  return true;
}

// Independent route: walk every producer's possible moves and compare the
// utility it has (m_f / n_f) with what it would get after moving
// (m_f' / (n_f' + 1)).
inline bool BruteDeviationCheck(const Population& population, const CountProfile& profile) {
  internal::Validate(population, profile);
  const std::size_t d = population.dim();
  for (std::size_t from = 0; from < d; ++from) {
    if (profile.counts[from] == 0) continue;
    const internal::Wide stay_num = population.m[from];
    const internal::Wide stay_den = profile.counts[from];
    for (std::size_t to = 0; to < d; ++to) {
      if (to == from) continue;
      const internal::Wide move_num = population.m[to];
      const internal::Wide move_den = profile.counts[to] + 1;
      // Deviation is profitable iff move > stay.
      if (move_num * stay_den > stay_num * move_den) return false;
    }
  }
  return true;
}

// max over (f, f') of n_f/m_f - (n_f'+1)/m_f', clamped at zero.
inline Rational EquilibriumSlack(const Population& population, const CountProfile& profile) {
  internal::Validate(population, profile);
  const std::size_t d = population.dim();
  internal::Wide best_num = 0;
  internal::Wide best_den = 1;
  for (std::size_t f = 0; f < d; ++f) {
    for (std::size_t g = 0; g < d; ++g) {
      const internal::Wide num =
          static_cast<internal::Wide>(profile.counts[f]) * population.m[g] -
          static_cast<internal::Wide>(profile.counts[g] + 1) * population.m[f];
      const internal::Wide den = static_cast<internal::Wide>(population.m[f]) * population.m[g];
      if (num * best_den > best_num * den) {
        best_num = num;
        best_den = den;
      }
    }
  }
  if (best_num <= 0) return {};
  const auto num = static_cast<std::int64_t>(best_num);
  const auto den = static_cast<std::int64_t>(best_den);
  const std::int64_t g = std::gcd(num, den);
  return {num / g, den / g};
}

struct ProportionalResult {
  CountProfile profile;
  bool exact = false;         // every m_f * n / sum(m) was an integer
  bool is_equilibrium = false;
  Rational slack;             // zero when is_equilibrium
};

// n_f = n * m_f / sum(m). Non-integral shares are rounded by largest
// remainder, ties to the lowest feature index, so the counts sum to n.
inline ProportionalResult ProportionalProfile(const Population& population, std::uint64_t n) {
  Require(!population.m.empty(), ErrorCode::kInvalidArgument, "m must not be empty");
  Require(n <= kMaxCount, ErrorCode::kTooLarge, "n must be at most 2^31");
  for (std::uint64_t mf : population.m) {
    Require(mf >= 1, ErrorCode::kInvalidArgument, "every m_f must be positive");
    Require(mf <= kMaxCount, ErrorCode::kTooLarge, "m_f must be at most 2^31");
  }
  const std::size_t d = population.dim();
  const internal::Wide total = population.total();
  ProportionalResult result;
  result.profile.counts.resize(d);
  std::vector<internal::Wide> remainder(d);
  std::uint64_t assigned = 0;
  result.exact = true;
  for (std::size_t f = 0; f < d; ++f) {
    const internal::Wide share = static_cast<internal::Wide>(population.m[f]) * n;
    result.profile.counts[f] = static_cast<std::uint64_t>(share / total);
    remainder[f] = share % total;
    assigned += result.profile.counts[f];
    if (remainder[f] != 0) result.exact = false;
  }
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return remainder[a] > remainder[b];
  });
  for (std::size_t r = 0; assigned < n; ++r, ++assigned) ++result.profile.counts[order[r]];

  result.is_equilibrium = EquilibriumCheck(population, result.profile);
  result.slack = EquilibriumSlack(population, result.profile);
  return result;
}

}  // namespace engagement::single_minded

#endif  // ENGAGEMENT_SINGLE_MINDED_HPP_
