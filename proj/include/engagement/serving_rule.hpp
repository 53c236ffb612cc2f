#ifndef ENGAGEMENT_SERVING_RULE_HPP_
#define ENGAGEMENT_SERVING_RULE_HPP_

#include <cmath>
#include <string>

#include "engagement/error.hpp"
#include "engagement/numeric.hpp"

namespace engagement {

// How the recommender splits a user's attention across producers.
//   Linear:  p_i proportional to c.s_i (zero when c.s_i is zero).
//   Softmax: p_i proportional to exp(c.s_i / tau).
class ServingRule {
 public:
  enum class Kind { kLinear, kSoftmax };

  static ServingRule Linear() { return ServingRule(Kind::kLinear, 0.0); }

  static ServingRule Softmax(double tau) {
    Require(std::isfinite(tau) && tau > 0.0, ErrorCode::kInvalidArgument,
            "softmax temperature must be a positive finite number, got " +
                FormatDouble(tau));
    return ServingRule(Kind::kSoftmax, tau);
  }

  Kind kind() const { return kind_; }
  bool is_linear() const { return kind_ == Kind::kLinear; }
  bool is_softmax() const { return kind_ == Kind::kSoftmax; }

  // Only meaningful for softmax.
  double tau() const { return tau_; }

  std::string name() const { return is_linear() ? "linear" : "softmax"; }

  // "linear" or "softmax(tau=0.1)".
  std::string ToString() const {
    if (is_linear()) return "linear";
    return "softmax(tau=" + FormatDouble(tau_) + ")";
  }

  friend bool operator==(const ServingRule&, const ServingRule&) = default;

 private:
  ServingRule(Kind kind, double tau) : kind_(kind), tau_(tau) {}

  Kind kind_;
  double tau_;
};

}  // namespace engagement

#endif  // ENGAGEMENT_SERVING_RULE_HPP_
