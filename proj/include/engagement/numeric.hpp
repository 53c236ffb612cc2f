#ifndef ENGAGEMENT_NUMERIC_HPP_
#define ENGAGEMENT_NUMERIC_HPP_

#include <charconv>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <system_error>

namespace engagement {

// Neumaier-compensated accumulator. Used for every utility sum so that the
// result does not depend (beyond ~1 ulp) on the order users are visited in.
class CompensatedSum {
 public:
  void Add(double value) {
    const double t = sum_ + value;
    if (std::fabs(sum_) >= std::fabs(value)) {
      compensation_ += (sum_ - t) + value;
    } else {
      compensation_ += (value - t) + sum_;
    }
    sum_ = t;
  }

  CompensatedSum& operator+=(double value) {
    Add(value);
    return *this;
  }

  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

inline double CompensatedTotal(std::span<const double> values) {
  CompensatedSum sum;
  for (double v : values) sum.Add(v);
  return sum.value();
}

// Shortest representation that round-trips exactly (at most 17 significant
// digits).
inline std::string FormatDouble(double value) {
  char buffer[64];
  auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc()) return "nan";
  return std::string(buffer, end);
}

// Fixed significant-digit rendering, used where readability beats exactness.
inline std::string FormatDouble(double value, int significant_digits) {
  char buffer[64];
  auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value,
                                 std::chars_format::general, significant_digits);
  if (ec != std::errc()) return "nan";
  return std::string(buffer, end);
}

inline std::string_view Trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return text.substr(first, last - first + 1);
}

inline std::optional<double> ParseDouble(std::string_view text) {
  text = Trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return std::nullopt;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

}  // namespace engagement

#endif  // ENGAGEMENT_NUMERIC_HPP_
