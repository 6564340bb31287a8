#include "crw/exact_oracle.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "crw/stats.hpp"

namespace crw::exact {

namespace {

constexpr int kMaxExactVertices = 12;

void check_size(const GraphOracle& g) {
  if (!g.finite())
    throw config_error("exact oracle: finite graphs only");
  if (g.vertex_count() > kMaxExactVertices)
    throw config_error("exact oracle: at most 12 vertices (subset state space)");
}

}  // namespace

// ---------------------------------------------------------------------------
// Dormand-Prince 5(4) with PI-free standard step control

void integrate_dopri5(const std::function<void(const Vector&, Vector&)>& rhs,
                      Vector& y, double t0, double t1, const OdeOptions& opts) {
  if (t1 < t0) throw usage_error("integrate_dopri5: t1 < t0");
  const double span = t1 - t0;
  if (span == 0.0) return;

  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                          a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600,
                          e3 = 500.0 / 1113 - 7571.0 / 16695,
                          e4 = 125.0 / 192 - 393.0 / 640,
                          e5 = -2187.0 / 6784 + 92097.0 / 339200,
                          e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

  const auto n = y.size();
  Vector k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), y5(n);

  double t = t0;
  rhs(y, k1);
  double dt = std::min(span, 1e-2 / (1.0 + k1.lpNorm<Eigen::Infinity>()));
  long steps = 0;
  while (t < t1) {
    if (++steps > 50'000'000)
      throw invariant_error("integrate_dopri5: step limit exceeded");
    dt = std::min(dt, t1 - t);

    tmp = y + dt * (a21 * k1);
    rhs(tmp, k2);
    tmp = y + dt * (a31 * k1 + a32 * k2);
    rhs(tmp, k3);
    tmp = y + dt * (a41 * k1 + a42 * k2 + a43 * k3);
    rhs(tmp, k4);
    tmp = y + dt * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    rhs(tmp, k5);
    tmp = y + dt * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    rhs(tmp, k6);
    y5 = y + dt * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    rhs(y5, k7);

    // scaled RMS of the embedded 4th/5th order difference
    double err2 = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double e = dt * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] +
                             e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double scale =
          opts.abs_tol +
          opts.rel_tol * std::max(std::abs(y[i]), std::abs(y5[i]));
      err2 += (e / scale) * (e / scale);
    }
    const double err = std::sqrt(err2 / static_cast<double>(n));

    if (err <= 1.0) {
      t += dt;
      y.swap(y5);
      k1.swap(k7);  // first-same-as-last
    }
    const double factor = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
    dt *= std::clamp(factor, 0.2, 5.0);
  }
}

// ---------------------------------------------------------------------------
// Subset master equations

SparseMatrix crw_subset_generator(GraphOracle& g) {
  check_size(g);
  const auto n = static_cast<int>(g.vertex_count());
  const auto states = std::size_t{1} << n;
  std::vector<Eigen::Triplet<double>> trips;
  for (std::size_t mask = 1; mask < states; ++mask) {
    for (int u = 0; u < n; ++u) {
      if (!(mask >> u & 1)) continue;
      for (VertexId w : g.neighbors(static_cast<VertexId>(u))) {
        const std::size_t dest =
            (mask & ~(std::size_t{1} << u)) | (std::size_t{1} << w);
        trips.emplace_back(static_cast<int>(dest), static_cast<int>(mask), 1.0);
        trips.emplace_back(static_cast<int>(mask), static_cast<int>(mask), -1.0);
      }
    }
  }
  SparseMatrix m(static_cast<int>(states), static_cast<int>(states));
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

SparseMatrix cluster_subset_generator(GraphOracle& g) {
  check_size(g);
  const auto n = static_cast<int>(g.vertex_count());
  const auto states = std::size_t{1} << n;
  std::vector<Eigen::Triplet<double>> trips;
  for (std::size_t mask = 1; mask < states; ++mask) {
    for (int u = 0; u < n; ++u) {
      if (!(mask >> u & 1)) continue;
      for (VertexId w : g.neighbors(static_cast<VertexId>(u))) {
        if (mask >> w & 1) continue;
        // boundary pair (u in, w out): grow by w or lose u, rate 1 each
        const std::size_t grow = mask | (std::size_t{1} << w);
        const std::size_t shrink = mask & ~(std::size_t{1} << u);
        trips.emplace_back(static_cast<int>(grow), static_cast<int>(mask), 1.0);
        trips.emplace_back(static_cast<int>(shrink), static_cast<int>(mask), 1.0);
        trips.emplace_back(static_cast<int>(mask), static_cast<int>(mask), -2.0);
      }
    }
  }
  SparseMatrix m(static_cast<int>(states), static_cast<int>(states));
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

namespace {

Vector solve_subset_chain(const SparseMatrix& gen, std::size_t start_mask,
                          double t, const OdeOptions& opts) {
  Vector p = Vector::Zero(gen.rows());
  p[static_cast<Eigen::Index>(start_mask)] = 1.0;
  if (t > 0.0) {
    integrate_dopri5([&](const Vector& y, Vector& dy) { dy.noalias() = gen * y; },
                     p, 0.0, t, opts);
  }
  const double total = p.sum();
  if (std::abs(total - 1.0) > 1e-10)
    throw invariant_error("subset chain: probability mass not conserved");
  return p;
}

}  // namespace

double crw_exact_pt(GraphOracle& g, VertexId v, double t, const OdeOptions& opts) {
  check_size(g);
  if (t < 0.0) throw usage_error("crw_exact_pt: t < 0");
  if (v < 0 || v >= g.vertex_count()) throw config_error("crw_exact_pt: bad vertex");
  const auto n = static_cast<int>(g.vertex_count());
  const auto full = (std::size_t{1} << n) - 1;
  const Vector p = solve_subset_chain(crw_subset_generator(g), full, t, opts);
  double occ = 0.0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask)
    if (mask >> v & 1) occ += p[static_cast<Eigen::Index>(mask)];
  return occ;
}

double cluster_exact_survival(GraphOracle& g, VertexId v, double t,
                              const OdeOptions& opts) {
  check_size(g);
  if (t < 0.0) throw usage_error("cluster_exact_survival: t < 0");
  if (v < 0 || v >= g.vertex_count())
    throw config_error("cluster_exact_survival: bad vertex");
  const Vector p = solve_subset_chain(cluster_subset_generator(g),
                                      std::size_t{1} << v, t, opts);
  return 1.0 - p[0];
}

double duality_gap(GraphOracle& g, VertexId v, double t, const OdeOptions& opts) {
  const double gap =
      std::abs(crw_exact_pt(g, v, t, opts) - cluster_exact_survival(g, v, t, opts));
  if (gap > 1e-6)
    throw invariant_error("duality gap above 1e-6: model implementation fault");
  return gap;
}

// ---------------------------------------------------------------------------
// Birth-death ladders

namespace {

int default_truncation(double rate_scale, double t) {
  const double k = 40.0 * (1.0 + rate_scale * t);
  return std::max(64, static_cast<int>(std::ceil(k)));
}

/// Survival of a ladder walk from level 1 with level-dependent per-direction
/// rate; levels 0 and K+1 absorb (K+1 collects up-moves out of the window
/// and is counted as surviving).
Vector solve_ladder(int truncation, double t, const OdeOptions& opts,
                    const std::function<double(int)>& rate_at) {
  const int k_max = truncation;
  Vector p = Vector::Zero(k_max + 2);
  p[1] = 1.0;
  auto rhs = [&](const Vector& y, Vector& dy) {
    dy.setZero();
    for (int k = 1; k <= k_max; ++k) {
      const double r = rate_at(k);
      const double flow = r * y[k];
      dy[k] -= 2.0 * flow;
      dy[k - 1] += flow;
      dy[k + 1] += flow;
    }
  };
  integrate_dopri5(rhs, p, 0.0, t, opts);
  const double total = p.sum();
  if (std::abs(total - 1.0) > 1e-10)
    throw invariant_error("ladder chain: probability mass not conserved");
  return p;
}

}  // namespace

ChainResult branching_survival(double branch_rate, double t, int truncation,
                               const OdeOptions& opts) {
  if (branch_rate < 1.0) throw config_error("branching_survival: need D >= 1");
  if (t < 0.0) throw usage_error("branching_survival: t < 0");
  const int k_max = truncation > 0 ? truncation : default_truncation(branch_rate, t);
  const Vector p = solve_ladder(k_max, t, opts,
                                [&](int k) { return branch_rate * k; });
  ChainResult res;
  res.truncation = k_max;
  res.survival = 1.0 - p[0];
  // mass that left through the top, discounted by the chance a population of
  // k_max branching lines all die within the horizon
  const double extinct_from_top =
      std::pow(branch_rate * t / (1.0 + branch_rate * t), k_max);
  res.leak = p[k_max + 1] * extinct_from_top;
  if (res.leak > 1e-10)
    throw config_error("branching_survival: truncation too small, increase K");
  return res;
}

ChainResult constant_rate_survival(double a, double t, int truncation,
                                   const OdeOptions& opts) {
  if (!(a > 0.0)) throw config_error("constant_rate_survival: need a > 0");
  if (t < 0.0) throw usage_error("constant_rate_survival: t < 0");
  const int k_max = truncation > 0 ? truncation : default_truncation(a, t);
  const Vector p = solve_ladder(k_max, t, opts, [&](int) { return a; });
  ChainResult res;
  res.truncation = k_max;
  res.survival = 1.0 - p[0];
  // dying from the top level needs k_max down-jumps within the horizon
  res.leak = p[k_max + 1] * poisson_tail_upper(2.0 * a * t, k_max);
  if (res.leak > 1e-10)
    throw config_error("constant_rate_survival: truncation too small, increase K");
  return res;
}

namespace {

/// e^{-x} I_nu(x) for large x via the standard asymptotic expansion.
double scaled_bessel_i_asymptotic(int nu, double x) {
  const double mu = 4.0 * nu * nu;
  const double inv8x = 1.0 / (8.0 * x);
  double term = 1.0;
  double sum = 1.0;
  const double factors[] = {mu - 1.0, mu - 9.0, mu - 25.0};
  for (int k = 0; k < 3; ++k) {
    term *= -factors[k] * inv8x / (k + 1.0);
    sum += term;
  }
  return sum / std::sqrt(2.0 * std::numbers::pi * x);
}

}  // namespace

double constant_rate_survival_bessel(double a, double t) {
  if (!(a > 0.0)) throw config_error("constant_rate_survival_bessel: need a > 0");
  if (t < 0.0) throw usage_error("constant_rate_survival_bessel: t < 0");
  const double x = 2.0 * a * t;
  if (x == 0.0) return 1.0;
  if (x > 600.0) {
    return scaled_bessel_i_asymptotic(0, x) + scaled_bessel_i_asymptotic(1, x);
  }
  return std::exp(-x) * (std::cyl_bessel_i(0.0, x) + std::cyl_bessel_i(1.0, x));
}

}  // namespace crw::exact
