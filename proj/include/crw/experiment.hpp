#ifndef CRW_EXPERIMENT_HPP
#define CRW_EXPERIMENT_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "crw/graph.hpp"
#include "crw/rooted_tree.hpp"
#include "crw/stats.hpp"

namespace crw {

/// Sampling grid: "linear:a:b:n", "log:a:b:n" or "list:t1,t2,...";
/// times are strictly increasing.
struct TimeGrid {
  std::string text;
  std::vector<double> times;

  static TimeGrid parse(const std::string& s);
  static TimeGrid linear(double a, double b, int n);
  static TimeGrid logarithmic(double a, double b, int n);
  static TimeGrid list(std::vector<double> ts);
  double back() const { return times.back(); }
};

/// One experiment run. Serializes to and from a plain key=value text block;
/// a config embedded in a report regenerates the run exactly.
struct ExperimentConfig {
  std::string graph = "cycle:8";
  VertexId vertex = 0;
  std::string method = "dual";  // direct | dual | oracle | nb_full | nb_zap | nb_dual
  std::string grid = "linear:0:4:9";
  std::int64_t replicates = 100000;
  std::uint64_t seed = 1;
  std::int64_t size_cap = 1000000;
  int workers = 0;              // 0: CRWSIM_WORKERS env or hardware concurrency
  double horizon = 0.0;         // nb models: X_T horizon
  std::string leaf_policy = "extend";  // finite tree windows in nb models
  std::optional<std::uint64_t> tree_seed;  // set: quenched (fixed tree)
  std::string out_csv;
  std::string out_json;

  static ExperimentConfig from_key_values(const std::string& text);
  std::string to_key_values() const;
  void validate() const;
};

struct EstimateRow {
  double t = 0.0;
  double estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 1.0;
  std::int64_t replicates = 0;
  std::string method;
  double cap_hit = 0.0;
};

struct EstimateSeries {
  std::vector<EstimateRow> rows;
  double cap_hit_fraction = 0.0;
  bool cap_biased = false;  // above 1%: estimates certified as lower bounds only
  // Truncated mean survival time E[tau ^ t] per grid time (dual method).
  std::vector<double> truncated_mean_survival;
};

int resolve_workers(int requested);

/// Direct Gillespie estimate of P(v occupied at t) from the all-occupied
/// start, one trajectory per replicate sampled at every grid time.
EstimateSeries run_direct_occupancy(const ExperimentConfig& cfg);

/// Same estimate through the dual cluster survival (no truncation needed on
/// infinite graphs).
EstimateSeries run_dual_survival(const ExperimentConfig& cfg);

/// Exact oracle rows for small finite graphs.
EstimateSeries run_oracle_series(const ExperimentConfig& cfg);

/// Per-vertex direct occupancy estimates at one time (exchangeability checks).
std::vector<EstimateRow> run_direct_all_vertices(const ExperimentConfig& cfg,
                                                 double t);

struct SigmaTailRow {
  double window_start = 0.0;  // t
  double query = 0.0;         // u
  std::int64_t exceed_count = 0;
  std::int64_t censored = 0;
  std::int64_t replicates = 0;
  double estimate = 0.0;
  Interval ci;
};

/// P(sigma_t > u) for the requested (t, u) windows; one trajectory per
/// replicate run to the largest u, sigma_t read off for every window.
std::vector<SigmaTailRow> run_sigma_tail(
    const ExperimentConfig& cfg, std::span<const std::pair<double, double>> windows);

struct MartingaleReport {
  std::vector<std::int64_t> indices;
  std::vector<double> means;  // mean cluster size at each jump index
  std::vector<double> ses;
  std::int64_t sup_jumps = 0;
  std::vector<std::int64_t> thresholds;
  std::vector<std::int64_t> sup_exceed;  // per threshold
  std::vector<double> sup_probability;
  std::vector<Interval> sup_ci;
  std::int64_t replicates = 0;
};

/// Mean |cluster| at fixed jump indices (absorbed trajectories contribute 0)
/// plus the tail of the running sup over the first sup_jumps jumps at each
/// requested threshold. Works for both the plain dual (method "dual") and
/// the absorbing-vertex tree dual (method "nb_dual").
MartingaleReport run_martingale(const ExperimentConfig& cfg,
                                std::vector<std::int64_t> indices,
                                std::int64_t sup_jumps,
                                std::vector<std::int64_t> thresholds);

struct BranchingMcRow {
  double t = 0.0;
  std::int64_t alive = 0;
  std::int64_t replicates = 0;
  double estimate = 0.0;
  Interval ci;
};

/// Monte Carlo survival of the critical branching walk (levels move +-1 at
/// rate D k each, absorbed at 0).
std::vector<BranchingMcRow> run_branching_mc(double branch_rate,
                                             const TimeGrid& grid,
                                             std::int64_t reps,
                                             std::uint64_t seed, int workers);

struct NbCompareReport {
  double horizon = 0.0;
  std::int64_t replicates = 0;
  double mean_full = 0.0;
  double mean_zap = 0.0;
  double pooled_se = 0.0;
  double ks = 0.0;
  double ks_critical_1pct = 0.0;
  std::vector<double> full_samples;
  std::vector<double> zap_samples;
};

/// X_T samples from the full non-backtracking model and the zap reduction on
/// the same finite tree; the two laws are equal.
NbCompareReport run_nb_compare(const ExperimentConfig& cfg);

/// X_T samples from one of the two models.
std::vector<double> run_root_occupation_samples(const ExperimentConfig& cfg,
                                                bool zap_model);

/// Window-doubling validation for direct estimates on graph windows: rerun
/// with twice the radius and flag grid times whose estimates differ by at
/// least one pooled standard error.
struct WindowCheck {
  EstimateSeries base;
  EstimateSeries doubled;
  std::vector<bool> within_one_se;
  bool accepted = false;
};
WindowCheck run_window_validation(const ExperimentConfig& cfg);

// Serialization. CSV rows use the fixed header
// t,estimate,ci_low,ci_high,replicates,method,cap_hit with CRLF endings.
std::string series_csv(const EstimateSeries& series);
void write_file(const std::string& path, const std::string& contents);

/// JSON report (schema_version 1): config echo, rows, pass/fail entries of
/// the caller's checks, wall clock and replicate accounting.
struct CheckRow {
  std::string name;
  double t = 0.0;
  double bound = 0.0;
  double estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  bool pass = false;
};
std::string summary_json(const ExperimentConfig& cfg, const EstimateSeries& series,
                         const std::vector<CheckRow>& checks, double wall_ms);

}  // namespace crw

#endif  // CRW_EXPERIMENT_HPP
