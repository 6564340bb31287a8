#include "crw/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace crw {

Interval wilson_interval(std::int64_t successes, std::int64_t trials, double z) {
  if (trials <= 0) throw std::invalid_argument("wilson_interval: trials <= 0");
  if (successes < 0 || successes > trials)
    throw std::invalid_argument("wilson_interval: successes out of range");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = p + z2 / (2.0 * n);
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  return Interval{(center - half) / denom, (center + half) / denom};
}

double proportion_se(std::int64_t successes, std::int64_t trials) {
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  return std::sqrt(p * (1.0 - p) / n);
}

double sample_mean(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double sample_sd(std::span<const double> xs) {
  const double m = sample_mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

double pooled_se(std::span<const double> a, std::span<const double> b) {
  const double va = sample_sd(a), vb = sample_sd(b);
  return std::sqrt(va * va / static_cast<double>(a.size()) +
                   vb * vb / static_cast<double>(b.size()));
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na -
                             static_cast<double>(j) / nb));
  }
  return d;
}

double ks_critical_value(double alpha, std::size_t n, std::size_t m) {
  const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
  const double nn = static_cast<double>(n), mm = static_cast<double>(m);
  return c * std::sqrt((nn + mm) / (nn * mm));
}

double trapezoid(std::span<const double> t, std::span<const double> y,
                 double a, double b) {
  if (t.size() != y.size() || t.size() < 2)
    throw std::invalid_argument("trapezoid: bad table");
  if (a > b) throw std::invalid_argument("trapezoid: a > b");
  if (a < t.front() - 1e-12 || b > t.back() + 1e-12)
    throw std::invalid_argument("trapezoid: range outside grid");

  auto value_at = [&](double x) {
    auto it = std::upper_bound(t.begin(), t.end(), x);
    std::size_t hi = std::min<std::size_t>(t.size() - 1,
        static_cast<std::size_t>(std::max<std::ptrdiff_t>(1, it - t.begin())));
    std::size_t lo = hi - 1;
    const double w = (t[hi] == t[lo]) ? 0.0 : (x - t[lo]) / (t[hi] - t[lo]);
    return y[lo] + w * (y[hi] - y[lo]);
  };

  double sum = 0.0;
  double prev_t = a, prev_y = value_at(a);
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] <= a) continue;
    if (t[k] >= b) break;
    sum += 0.5 * (prev_y + y[k]) * (t[k] - prev_t);
    prev_t = t[k];
    prev_y = y[k];
  }
  sum += 0.5 * (prev_y + value_at(b)) * (b - prev_t);
  return sum;
}

double poisson_tail_upper(double mu, double k) {
  if (k <= mu) return 1.0;
  // exp(-mu) (e mu / k)^k, the Chernoff bound at the optimal tilt.
  return std::exp(-mu + k + k * std::log(mu / k));
}

}  // namespace crw
