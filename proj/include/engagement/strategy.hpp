#ifndef ENGAGEMENT_STRATEGY_HPP_
#define ENGAGEMENT_STRATEGY_HPP_

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "engagement/error.hpp"
#include "engagement/numeric.hpp"

namespace engagement {

// Every producer plays a standard basis vector e_f; stores f per producer.
struct BasisProfile {
  std::size_t dim = 0;
  std::vector<std::size_t> features;

  std::size_t num_producers() const { return features.size(); }

  // Producers per feature.
  std::vector<std::size_t> Counts() const {
    std::vector<std::size_t> counts(dim, 0);
    for (std::size_t f : features) ++counts[f];
    return counts;
  }

  friend bool operator==(const BasisProfile&, const BasisProfile&) = default;
  friend auto operator<=>(const BasisProfile& a, const BasisProfile& b) {
    return a.features <=> b.features;
  }
};

// Arbitrary points of {s >= 0, |s|_1 <= 1}; row-major n x d.
struct GeneralProfile {
  std::size_t num_producers = 0;
  std::size_t dim = 0;
  std::vector<double> values;

  std::span<const double> row(std::size_t i) const {
    return {values.data() + i * dim, dim};
  }
};

class StrategyProfile {
 public:
  static constexpr double kNormSlack = 1e-12;

  static StrategyProfile Basis(std::size_t dim, std::vector<std::size_t> features) {
    Require(dim >= 1, ErrorCode::kInvalidArgument, "dimension must be at least 1");
    Require(!features.empty(), ErrorCode::kInvalidArgument,
            "a profile needs at least one producer");
    for (std::size_t i = 0; i < features.size(); ++i) {
      Require(features[i] < dim, ErrorCode::kOutOfRange,
              "producer " + std::to_string(i) + " plays feature " +
                  std::to_string(features[i]) + ", outside [0, " +
                  std::to_string(dim) + ")");
    }
    return StrategyProfile(BasisProfile{dim, std::move(features)});
  }

  static StrategyProfile Basis(BasisProfile profile) {
    return Basis(profile.dim, std::move(profile.features));
  }

  // Rows with L1 norm in (1, 1 + kNormSlack] are scaled back onto the
  // simplex; larger norms, negative or non-finite entries are rejected.
  static StrategyProfile General(std::size_t num_producers, std::size_t dim,
                                 std::vector<double> values) {
    Require(dim >= 1, ErrorCode::kInvalidArgument, "dimension must be at least 1");
    Require(num_producers >= 1, ErrorCode::kInvalidArgument,
            "a profile needs at least one producer");
    Require(values.size() == num_producers * dim, ErrorCode::kDimensionMismatch,
            "strategy matrix has " + std::to_string(values.size()) +
                " entries, expected " + std::to_string(num_producers * dim));
    for (std::size_t i = 0; i < num_producers; ++i) {
      std::span<double> row(values.data() + i * dim, dim);
      for (double v : row) {
        Require(std::isfinite(v), ErrorCode::kNonFinite,
                "producer " + std::to_string(i) + " has a non-finite entry");
        Require(v >= 0.0, ErrorCode::kInvalidArgument,
                "producer " + std::to_string(i) + " has a negative entry");
      }
      const double norm = CompensatedTotal(row);
      Require(norm <= 1.0 + kNormSlack, ErrorCode::kInvalidArgument,
              "producer " + std::to_string(i) + " has L1 norm " + FormatDouble(norm) +
                  " > 1");
      if (norm > 1.0) {
        for (double& v : row) v /= norm;
      }
    }
    return StrategyProfile(GeneralProfile{num_producers, dim, std::move(values)});
  }

  std::size_t num_producers() const {
    return is_basis() ? std::get<BasisProfile>(form_).features.size()
                      : std::get<GeneralProfile>(form_).num_producers;
  }
  std::size_t dim() const {
    return is_basis() ? std::get<BasisProfile>(form_).dim
                      : std::get<GeneralProfile>(form_).dim;
  }

  bool is_basis() const { return std::holds_alternative<BasisProfile>(form_); }

  const BasisProfile& basis() const {
    Require(is_basis(), ErrorCode::kInvalidArgument, "profile is not in basis form");
    return std::get<BasisProfile>(form_);
  }
  const GeneralProfile& general() const {
    Require(!is_basis(), ErrorCode::kInvalidArgument, "profile is not in general form");
    return std::get<GeneralProfile>(form_);
  }

  // c . s_i
  double Inner(std::span<const double> user, std::size_t i) const {
    if (const auto* b = std::get_if<BasisProfile>(&form_)) return user[b->features[i]];
    const auto& g = std::get<GeneralProfile>(form_);
    const auto row = g.row(i);
    double dot = 0.0;
    for (std::size_t f = 0; f < g.dim; ++f) dot += user[f] * row[f];
    return dot;
  }

  std::vector<double> Row(std::size_t i) const {
    if (const auto* b = std::get_if<BasisProfile>(&form_)) {
      std::vector<double> row(b->dim, 0.0);
      row[b->features[i]] = 1.0;
      return row;
    }
    const auto row = std::get<GeneralProfile>(form_).row(i);
    return {row.begin(), row.end()};
  }

  StrategyProfile ToGeneral() const {
    if (!is_basis()) return *this;
    const auto& b = std::get<BasisProfile>(form_);
    std::vector<double> values(b.features.size() * b.dim, 0.0);
    for (std::size_t i = 0; i < b.features.size(); ++i) {
      values[i * b.dim + b.features[i]] = 1.0;
    }
    return StrategyProfile(GeneralProfile{b.features.size(), b.dim, std::move(values)});
  }

  // The basis form if every row is exactly a unit vector.
  std::optional<BasisProfile> AsBasis() const {
    if (is_basis()) return std::get<BasisProfile>(form_);
    const auto& g = std::get<GeneralProfile>(form_);
    BasisProfile out{g.dim, {}};
    for (std::size_t i = 0; i < g.num_producers; ++i) {
      const auto row = g.row(i);
      std::optional<std::size_t> hot;
      for (std::size_t f = 0; f < g.dim; ++f) {
        if (row[f] == 1.0 && !hot) {
          hot = f;
        } else if (row[f] != 0.0) {
          return std::nullopt;
        }
      }
      if (!hot) return std::nullopt;
      out.features.push_back(*hot);
    }
    return out;
  }

 private:
  explicit StrategyProfile(std::variant<BasisProfile, GeneralProfile> form)
      : form_(std::move(form)) {}

  std::variant<BasisProfile, GeneralProfile> form_;
};

}  // namespace engagement

#endif  // ENGAGEMENT_STRATEGY_HPP_
