#ifndef ENGAGEMENT_POPULATION_HPP_
#define ENGAGEMENT_POPULATION_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "engagement/error.hpp"
#include "engagement/numeric.hpp"

namespace engagement {

// K users embedded in R^d_{>=0}. Rows are L1-normalized on construction.
// Immutable once built, so it can be shared freely across threads.
class UserPopulation {
 public:
  static constexpr double kNormTolerance = 1e-12;

  // `weights` is row-major K x d. Rows whose L1 norm is off by more than
  // kNormTolerance are rescaled (and counted); all-zero rows, negative and
  // non-finite entries are rejected.
  static UserPopulation FromRows(std::size_t num_users, std::size_t dim,
                                 std::vector<double> weights) {
    Require(num_users >= 1, ErrorCode::kInvalidArgument,
            "user population needs at least one user");
    Require(dim >= 1, ErrorCode::kInvalidArgument,
            "embedding dimension must be at least 1");
    Require(weights.size() == num_users * dim, ErrorCode::kDimensionMismatch,
            "expected " + std::to_string(num_users * dim) + " weights, got " +
                std::to_string(weights.size()));
    UserPopulation population;
    population.num_users_ = num_users;
    population.dim_ = dim;
    for (std::size_t k = 0; k < num_users; ++k) {
      std::span<double> row(weights.data() + k * dim, dim);
      for (std::size_t f = 0; f < dim; ++f) {
        Require(std::isfinite(row[f]), ErrorCode::kNonFinite,
                "user " + std::to_string(k) + " has a non-finite weight");
        Require(row[f] >= 0.0, ErrorCode::kInvalidArgument,
                "user " + std::to_string(k) + " has a negative weight " +
                    FormatDouble(row[f]) + " on feature " + std::to_string(f));
      }
      const double norm = CompensatedTotal(row);
      Require(norm > 0.0, ErrorCode::kInvalidArgument,
              "user " + std::to_string(k) + " has an all-zero preference row");
      if (std::fabs(norm - 1.0) > kNormTolerance) {
        for (double& w : row) w /= norm;
        ++population.renormalized_rows_;
      }
    }
    population.weights_ = std::move(weights);
    population.strictly_positive_ =
        *std::min_element(population.weights_.begin(), population.weights_.end()) > 0.0;
    population.rank_ = NumericalRank(population.weights_, num_users, dim);
    return population;
  }

  std::size_t num_users() const { return num_users_; }
  std::size_t dim() const { return dim_; }

  std::span<const double> row(std::size_t k) const {
    return {weights_.data() + k * dim_, dim_};
  }
  double weight(std::size_t k, std::size_t f) const { return weights_[k * dim_ + f]; }
  std::span<const double> weights() const { return weights_; }

  // Every entry strictly positive (required by the vertex-support result).
  bool strictly_positive() const { return strictly_positive_; }
  // Rows span R^d, i.e. distinct strategies are distinguishable by some user.
  bool spans_space() const { return rank_ == dim_; }
  std::size_t rank() const { return rank_; }
  std::size_t renormalized_rows() const { return renormalized_rows_; }

  // Human-readable diagnostics for the two modeling assumptions and for any
  // renormalization done at load time. Never fatal.
  std::vector<std::string> Warnings() const {
    std::vector<std::string> out;
    if (renormalized_rows_ > 0) {
      out.push_back(std::to_string(renormalized_rows_) +
                    " user rows were rescaled to unit L1 norm");
    }
    if (!strictly_positive_) {
      out.push_back("some user weights are zero; the strict-positivity assumption does not hold");
    }
    if (!spans_space()) {
      out.push_back("user rows span only rank " + std::to_string(rank_) + " of " +
                    std::to_string(dim_) + " dimensions");
    }
    return out;
  }

  // Sum over users of each feature weight.
  std::vector<double> ColumnTotals() const {
    std::vector<CompensatedSum> sums(dim_);
    for (std::size_t k = 0; k < num_users_; ++k) {
      for (std::size_t f = 0; f < dim_; ++f) sums[f].Add(weights_[k * dim_ + f]);
    }
    std::vector<double> totals(dim_);
    for (std::size_t f = 0; f < dim_; ++f) totals[f] = sums[f].value();
    return totals;
  }

  std::vector<double> AverageWeights() const {
    auto totals = ColumnTotals();
    for (double& t : totals) t /= static_cast<double>(num_users_);
    return totals;
  }

 private:
  UserPopulation() = default;

  // Gaussian elimination with partial pivoting on a copy of the K x d matrix.
  static std::size_t NumericalRank(const std::vector<double>& weights,
                                   std::size_t rows, std::size_t cols) {
    std::vector<double> a = weights;
    double scale = 0.0;
    for (double v : a) scale = std::max(scale, std::fabs(v));
    const double tol = 1e-10 * std::max(scale, 1.0) *
                       static_cast<double>(std::max(rows, cols));
    std::size_t rank = 0;
    for (std::size_t col = 0; col < cols && rank < rows; ++col) {
      std::size_t pivot = rank;
      for (std::size_t r = rank + 1; r < rows; ++r) {
        if (std::fabs(a[r * cols + col]) > std::fabs(a[pivot * cols + col])) pivot = r;
      }
      if (std::fabs(a[pivot * cols + col]) <= tol) continue;
      if (pivot != rank) {
        for (std::size_t c = 0; c < cols; ++c) {
          std::swap(a[pivot * cols + c], a[rank * cols + c]);
        }
      }
      const double p = a[rank * cols + col];
      for (std::size_t r = rank + 1; r < rows; ++r) {
        const double factor = a[r * cols + col] / p;
        if (factor == 0.0) continue;
        for (std::size_t c = col; c < cols; ++c) {
          a[r * cols + c] -= factor * a[rank * cols + c];
        }
      }
      ++rank;
    }
    return rank;
  }

  std::size_t num_users_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> weights_;
  bool strictly_positive_ = false;
  std::size_t rank_ = 0;
  std::size_t renormalized_rows_ = 0;
};

}  // namespace engagement

#endif  // ENGAGEMENT_POPULATION_HPP_
