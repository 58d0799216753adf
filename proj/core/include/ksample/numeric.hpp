#ifndef KSAMPLE_NUMERIC_HPP_
#define KSAMPLE_NUMERIC_HPP_

#include <cmath>
#include <cstdint>
#include <span>

namespace ksample {

// Neumaier compensated summation. The result does not depend on the order of
// additions beyond the last couple of ulps, which is what parallel reductions
// over prompts and enumeration shards rely on.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      compensation_ += (sum_ - t) + x;
    } else {
      compensation_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  CompensatedSum& operator+=(double x) {
    add(x);
    return *this;
  }
  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) {
  CompensatedSum s;
  for (double x : xs) s.add(x);
  return s.value();
}

inline double mean_of(std::span<const double> xs) {
  return xs.empty() ? 0.0 : compensated_sum(xs) / static_cast<double>(xs.size());
}

// Binomial coefficient C(n, r) in floating point; exact for the small
// arguments used here (n <= 60).
inline double binomial(std::int64_t n, std::int64_t r) {
  if (r < 0 || n < 0 || r > n) return 0.0;
  if (r > n - r) r = n - r;
  double c = 1.0;
  for (std::int64_t i = 1; i <= r; ++i) {
    c = c * static_cast<double>(n - r + i) / static_cast<double>(i);
  }
  return std::round(c);
}

}  // namespace ksample

#endif  // KSAMPLE_NUMERIC_HPP_
