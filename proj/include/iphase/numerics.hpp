#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace iphase {

/// Working precision of trajectories, actions and phase sums. Phases of
/// ~2e7 rad resolved to 1e-9 rad need more than double's 53 bits.
using Real = long double;

}  // namespace iphase

namespace iphase::numerics {

/// Neumaier's variant of Kahan summation.
template <class T>
class BasicCompensatedSum {
 public:
  BasicCompensatedSum() = default;
  explicit BasicCompensatedSum(T initial) : sum_(initial) {}

  void add(T value) {
    const T t = sum_ + value;
    if (std::abs(sum_) >= std::abs(value)) {
      compensation_ += (sum_ - t) + value;
    } else {
      compensation_ += (value - t) + sum_;
    }
    sum_ = t;
  }

  BasicCompensatedSum& operator+=(T value) {
    add(value);
    return *this;
  }

  T value() const { return sum_ + compensation_; }

 private:
  T sum_ = 0;
  T compensation_ = 0;
};

using CompensatedSum = BasicCompensatedSum<double>;
using ExtendedSum = BasicCompensatedSum<Real>;

double compensated_sum(std::span<const double> values);

/// Gauss-Legendre rule on [-1, 1].
struct QuadratureRule {
  std::vector<Real> nodes;
  std::vector<Real> weights;
  std::size_t size() const { return nodes.size(); }
};

/// Nodes by Newton iteration on the three-term recurrence. Throws
/// std::invalid_argument for count < 1.
QuadratureRule gauss_legendre(int count);

}  // namespace iphase::numerics
