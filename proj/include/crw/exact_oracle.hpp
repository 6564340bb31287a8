#ifndef CRW_EXACT_ORACLE_HPP
#define CRW_EXACT_ORACLE_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <functional>

#include "crw/graph.hpp"

namespace crw::exact {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Integrator tolerances for the forward (master) equations.
struct OdeOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
};

/// Adaptive Dormand-Prince 5(4) for dy/dt = rhs(y, dy). Advances y in place
/// from t0 to t1.
void integrate_dopri5(const std::function<void(const Vector&, Vector&)>& rhs,
                      Vector& y, double t0, double t1, const OdeOptions& opts);

/// Rate matrix (transposed generator) over subset states of a small finite
/// graph. Subsets are encoded as bitmasks; with_empty selects whether the
/// empty set participates (cluster chain) or not (coalescing chain).
SparseMatrix crw_subset_generator(GraphOracle& g);
SparseMatrix cluster_subset_generator(GraphOracle& g);

/// Exact occupation probability P(v occupied at t) for coalescing walk
/// started from the fully occupied configuration; |V| <= 12.
double crw_exact_pt(GraphOracle& g, VertexId v, double t,
                    const OdeOptions& opts = {});

/// Exact survival probability P(cluster of v nonempty at t); |V| <= 12.
double cluster_exact_survival(GraphOracle& g, VertexId v, double t,
                              const OdeOptions& opts = {});

/// |crw_exact_pt - cluster_exact_survival|; throws invariant_error above
/// 1e-6 (the two sides are provably equal, so a large gap is a model bug).
double duality_gap(GraphOracle& g, VertexId v, double t,
                   const OdeOptions& opts = {});

struct ChainResult {
  double survival = 0.0;
  double leak = 0.0;  // bound on the truncation error of `survival`
  int truncation = 0;
};

/// Survival P(W_t > 0) of the critical branching walk from 1 (levels k move
/// to k+-1 at rate D k each, 0 absorbing) on a truncated ladder. The closed
/// form is 1/(1+Dt).
ChainResult branching_survival(double branch_rate, double t, int truncation = 0,
                               const OdeOptions& opts = {});

/// Survival of the constant-rate walk from 1 (per-direction rate a, absorbed
/// at 0) on a truncated ladder.
ChainResult constant_rate_survival(double a, double t, int truncation = 0,
                                   const OdeOptions& opts = {});

/// Closed form for the constant-rate walk: e^{-2at} (I_0(2at) + I_1(2at)).
double constant_rate_survival_bessel(double a, double t);

}  // namespace crw::exact

#endif  // CRW_EXACT_ORACLE_HPP
