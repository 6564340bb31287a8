#ifndef CRW_STATS_HPP
#define CRW_STATS_HPP

#include <cstdint>
#include <span>
#include <vector>

namespace crw {

/// z for a two-sided 99% normal interval.
inline constexpr double kZ99 = 2.5758293035489004;

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Wilson score interval for a binomial proportion.
Interval wilson_interval(std::int64_t successes, std::int64_t trials, double z);

/// Standard error of a binomial proportion estimate, sqrt(p(1-p)/n).
double proportion_se(std::int64_t successes, std::int64_t trials);

double sample_mean(std::span<const double> xs);
double sample_sd(std::span<const double> xs);  // unbiased (n-1) denominator

/// Standard error of the difference of two sample means.
double pooled_se(std::span<const double> a, std::span<const double> b);

/// Two-sample Kolmogorov-Smirnov statistic sup_x |F_a(x) - F_b(x)|.
double ks_statistic(std::vector<double> a, std::vector<double> b);

/// Asymptotic two-sample KS critical value at level alpha.
double ks_critical_value(double alpha, std::size_t n, std::size_t m);

/// Trapezoidal integral of tabulated values over [a, b]; endpoints may fall
/// between grid points (linear interpolation). Requires grid coverage.
double trapezoid(std::span<const double> t, std::span<const double> y,
                 double a, double b);

/// Chernoff upper bound for P(Poisson(mu) >= k), k > mu.
double poisson_tail_upper(double mu, double k);

}  // namespace crw

#endif  // CRW_STATS_HPP
