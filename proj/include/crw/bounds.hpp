#ifndef CRW_BOUNDS_HPP
#define CRW_BOUNDS_HPP

#include <span>
#include <vector>

namespace crw::bounds {

/// Occupation-probability lower bound 1/(1 + D t) on graphs with maximum
/// degree D.
double lower_bound_bounded_degree(double max_degree, double t);

/// C / (t log t) envelope for Galton-Watson trees; requires t > 1. The
/// multiplicative constant is a free parameter.
double gw_lower_bound_form(double c, double t);

/// Tail bound t / (t + I) for the first occupancy time after t, with
/// I the occupation-probability integral over (t, u].
double sigma_tail_bound_general(double t, double integral_tu);

/// Same bound with the integral evaluated in closed form for the
/// bounded-degree envelope: t / (t + (1/D)(log(1+Du) - log(1+Dt))).
double sigma_tail_bound_degree(double max_degree, double t, double u);

/// Universal upper envelope (1 + eps) / (2 sqrt(pi t)); requires t > 0.
double griffeath_upper(double t, double eps);

/// Tabulated occupation probabilities with trapezoidal integration;
/// integrate(a, b) is additive over subdivision of [a, b].
class OccupancyIntegral {
 public:
  OccupancyIntegral(std::vector<double> times, std::vector<double> values);
  double integrate(double a, double b) const;
  std::span<const double> times() const { return times_; }
  std::span<const double> values() const { return values_; }

 private:
  std::vector<double> times_;
  std::vector<double> values_;
};

}  // namespace crw::bounds

#endif  // CRW_BOUNDS_HPP
