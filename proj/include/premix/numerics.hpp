#ifndef PREMIX_NUMERICS_HPP
#define PREMIX_NUMERICS_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>

namespace premix {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Compensated (Kahan) summation; keeps normalization errors well below the
// 1e-10 tolerances promised by the density operations.
inline double kahan_sum(std::span<const double> xs) {
  double sum = 0.0, carry = 0.0;
  for (double x : xs) {
    double y = x - carry;
    double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  return sum;
}

inline double log_sum_exp(std::span<const double> xs) {
  double m = kNegInf;
  for (double x : xs)
    if (x > m) m = x;
  if (!std::isfinite(m)) return m;  // empty or all -inf
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

// Streaming log-sum-exp: accumulates log(sum exp(l_r)) one term at a time,
// rescaling whenever a new maximum arrives.  Deterministic in feed order.
class StreamingLogSum {
 public:
  void add(double log_term) {
    if (log_term == kNegInf) return;
    if (log_term > max_) {
      scaled_ *= std::exp(max_ - log_term);
      max_ = log_term;
    }
    scaled_ += std::exp(log_term - max_);
    ++count_;
  }
  double value() const {
    if (scaled_ <= 0.0) return kNegInf;
    return max_ + std::log(scaled_);
  }
  std::size_t count() const { return count_; }

 private:
  double max_ = kNegInf;
  double scaled_ = 0.0;
  std::size_t count_ = 0;
};

}  // namespace premix

#endif  // PREMIX_NUMERICS_HPP
