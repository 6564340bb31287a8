#include "crw/bounds.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "crw/stats.hpp"

namespace crw::bounds {

double lower_bound_bounded_degree(double max_degree, double t) {
  if (max_degree < 1.0 || t < 0.0)
    throw std::domain_error("lower_bound_bounded_degree: need D >= 1, t >= 0");
  return 1.0 / (1.0 + max_degree * t);
}

double gw_lower_bound_form(double c, double t) {
  if (!(t > 1.0)) throw std::domain_error("gw_lower_bound_form: need t > 1");
  if (!(c > 0.0)) throw std::domain_error("gw_lower_bound_form: need C > 0");
  return c / (t * std::log(t));
}

double sigma_tail_bound_general(double t, double integral_tu) {
  if (t < 0.0 || integral_tu < 0.0)
    throw std::domain_error("sigma_tail_bound_general: negative argument");
  if (t == 0.0) return 0.0;  // v occupied at time 0, sigma_0 = 0
  return t / (t + integral_tu);
}

double sigma_tail_bound_degree(double max_degree, double t, double u) {
  if (max_degree < 1.0 || t < 0.0 || u <= t)
    throw std::domain_error("sigma_tail_bound_degree: need D >= 1, u > t >= 0");
  const double integral =
      (std::log1p(max_degree * u) - std::log1p(max_degree * t)) / max_degree;
  return sigma_tail_bound_general(t, integral);
}

double griffeath_upper(double t, double eps) {
  if (!(t > 0.0)) throw std::domain_error("griffeath_upper: need t > 0");
  if (eps < 0.0) throw std::domain_error("griffeath_upper: need eps >= 0");
  return (1.0 + eps) / (2.0 * std::sqrt(std::numbers::pi * t));
}

OccupancyIntegral::OccupancyIntegral(std::vector<double> times,
                                     std::vector<double> values)
    : times_(std::move(times)), values_(std::move(values)) {
  if (times_.size() != values_.size() || times_.size() < 2)
    throw std::invalid_argument("OccupancyIntegral: need matching tables, >= 2 points");
  for (std::size_t i = 1; i < times_.size(); ++i)
    if (times_[i] <= times_[i - 1])
      throw std::invalid_argument("OccupancyIntegral: times must increase");
}

double OccupancyIntegral::integrate(double a, double b) const {
  return trapezoid(times_, values_, a, b);
}

}  // namespace crw::bounds
