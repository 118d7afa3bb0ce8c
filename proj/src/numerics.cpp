#include "iphase/numerics.hpp"

#include <numbers>
#include <utility>
#include <stdexcept>

namespace iphase::numerics {

double compensated_sum(std::span<const double> values) {
  CompensatedSum sum;
  for (double v : values) sum.add(v);
  return sum.value();
}

QuadratureRule gauss_legendre(int count) {
  if (count < 1) throw std::invalid_argument("gauss_legendre: count must be >= 1");
  const auto n = static_cast<std::size_t>(count);
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);

  // Legendre P_n and P_n' at x via the three-term recurrence.
  auto legendre = [n](long double x) {
    long double p0 = 1.0L;
    long double p1 = x;
    for (std::size_t j = 2; j <= n; ++j) {
      const long double p2 =
          ((2.0L * j - 1.0L) * x * p1 - (j - 1.0L) * p0) / static_cast<long double>(j);
      p0 = p1;
      p1 = p2;
    }
    const long double dp = static_cast<long double>(n) * (x * p1 - p0) / (x * x - 1.0L);
    return std::pair{p1, dp};
  };

  // Roots are symmetric; solve for the upper half and mirror.
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    long double x = std::cos(std::numbers::pi_v<long double> *
                             (static_cast<long double>(i) + 0.75L) /
                             (static_cast<long double>(n) + 0.5L));
    for (int iter = 0; iter < 100; ++iter) {
      const auto [p, dp] = legendre(x);
      const long double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-20L) break;
    }
    const long double dp = legendre(x).second;
    const long double w = 2.0L / ((1.0L - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0L;
  return rule;
}

}  // namespace iphase::numerics
