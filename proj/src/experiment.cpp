#include "crw/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "crw/coalescing.hpp"
#include "crw/exact_oracle.hpp"
#include "crw/nb_tree.hpp"
#include "crw/voter_dual.hpp"

namespace crw {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double to_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw config_error("expected number for " + what + ", got '" + s + "'");
  }
}

std::int64_t to_int(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const std::int64_t v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw config_error("expected integer for " + what + ", got '" + s + "'");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// TimeGrid

TimeGrid TimeGrid::linear(double a, double b, int n) {
  if (n < 1 || b < a) throw config_error("time grid: need n >= 1 and b >= a");
  TimeGrid g;
  std::ostringstream os;
  os << "linear:" << a << ":" << b << ":" << n;
  g.text = os.str();
  if (n == 1) {
    g.times = {a};
    return g;
  }
  for (int i = 0; i < n; ++i)
    g.times.push_back(a + (b - a) * static_cast<double>(i) / (n - 1));
  return g;
}

TimeGrid TimeGrid::logarithmic(double a, double b, int n) {
  if (n < 1 || !(a > 0.0) || b < a)
    throw config_error("time grid: log grid needs 0 < a <= b");
  TimeGrid g;
  std::ostringstream os;
  os << "log:" << a << ":" << b << ":" << n;
  g.text = os.str();
  if (n == 1) {
    g.times = {a};
    return g;
  }
  const double la = std::log(a), lb = std::log(b);
  for (int i = 0; i < n; ++i)
    g.times.push_back(std::exp(la + (lb - la) * static_cast<double>(i) / (n - 1)));
  g.times.front() = a;
  g.times.back() = b;
  return g;
}

TimeGrid TimeGrid::list(std::vector<double> ts) {
  TimeGrid g;
  std::ostringstream os;
  os << "list:";
  for (std::size_t i = 0; i < ts.size(); ++i) os << (i ? "," : "") << ts[i];
  g.text = os.str();
  g.times = std::move(ts);
  if (g.times.empty()) throw config_error("time grid: empty list");
  for (std::size_t i = 1; i < g.times.size(); ++i)
    if (g.times[i] <= g.times[i - 1])
      throw config_error("time grid: times must be strictly increasing");
  return g;
}

TimeGrid TimeGrid::parse(const std::string& s) {
  const auto parts = split(s, ':');
  if (parts[0] == "linear" && parts.size() == 4)
    return linear(to_double(parts[1], "grid start"), to_double(parts[2], "grid end"),
                  static_cast<int>(to_int(parts[3], "grid count")));
  if (parts[0] == "log" && parts.size() == 4)
    return logarithmic(to_double(parts[1], "grid start"),
                       to_double(parts[2], "grid end"),
                       static_cast<int>(to_int(parts[3], "grid count")));
  if (parts[0] == "list" && parts.size() == 2) {
    std::vector<double> ts;
    for (const auto& x : split(parts[1], ','))
      ts.push_back(to_double(x, "grid time"));
    return list(std::move(ts));
  }
  if (parts.size() == 1) {
    // bare time or comma list, e.g. "1" or "0.25,1,4"
    std::vector<double> ts;
    for (const auto& x : split(s, ',')) ts.push_back(to_double(x, "grid time"));
    return list(std::move(ts));
  }
  throw config_error("time grid '" + s +
                     "': use linear:a:b:n, log:a:b:n, list:t1,t2,... or a "
                     "bare time");
}

// ---------------------------------------------------------------------------
// ExperimentConfig

ExperimentConfig ExperimentConfig::from_key_values(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
      line.pop_back();
    std::size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos) continue;
    line = line.substr(start);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw config_error("config: expected key=value, got '" + line + "'");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "graph") cfg.graph = value;
    else if (key == "vertex") cfg.vertex = static_cast<VertexId>(to_int(value, key));
    else if (key == "method") cfg.method = value;
    else if (key == "grid") cfg.grid = value;
    else if (key == "replicates") cfg.replicates = to_int(value, key);
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(to_int(value, key));
    else if (key == "size_cap") cfg.size_cap = to_int(value, key);
    else if (key == "workers") cfg.workers = static_cast<int>(to_int(value, key));
    else if (key == "horizon") cfg.horizon = to_double(value, key);
    else if (key == "leaf_policy") cfg.leaf_policy = value;
    else if (key == "tree_seed")
      cfg.tree_seed = static_cast<std::uint64_t>(to_int(value, key));
    else if (key == "out_csv") cfg.out_csv = value;
    else if (key == "out_json") cfg.out_json = value;
    else throw config_error("config: unknown key '" + key + "'");
  }
  return cfg;
}

std::string ExperimentConfig::to_key_values() const {
  std::ostringstream os;
  os << "graph=" << graph << "\n";
  os << "vertex=" << vertex << "\n";
  os << "method=" << method << "\n";
  os << "grid=" << grid << "\n";
  os << "replicates=" << replicates << "\n";
  os << "seed=" << seed << "\n";
  os << "size_cap=" << size_cap << "\n";
  os << "workers=" << workers << "\n";
  os << "horizon=" << horizon << "\n";
  os << "leaf_policy=" << leaf_policy << "\n";
  if (tree_seed) os << "tree_seed=" << *tree_seed << "\n";
  if (!out_csv.empty()) os << "out_csv=" << out_csv << "\n";
  if (!out_json.empty()) os << "out_json=" << out_json << "\n";
  return os.str();
}

void ExperimentConfig::validate() const {
  const GraphSpec spec = GraphSpec::parse(graph);
  TimeGrid::parse(grid);
  if (replicates < 1) throw config_error("config: replicates must be >= 1");
  if (size_cap < 1) throw config_error("config: size_cap must be >= 1");
  if (vertex < 0) throw config_error("config: vertex must be >= 0");
  static const char* methods[] = {"direct", "dual", "oracle",
                                  "nb_full", "nb_zap", "nb_dual"};
  if (std::find_if(std::begin(methods), std::end(methods), [&](const char* m) {
        return method == m;
      }) == std::end(methods))
    throw config_error("config: unknown method '" + method + "'");
  if (method == "direct" && !spec.finite())
    throw config_error(
        "method 'direct' starts from the all-occupied state and needs a "
        "finite graph; use a window (line:R, regtree:D:R) or method 'dual'");
  if (!spec.finite() && vertex != 0)
    throw config_error("lazy graphs expose only the root initially; use vertex 0");
  if (method.rfind("nb_", 0) == 0 && !spec.tree())
    throw config_error("method '" + method + "' needs a rooted tree graph, got '" +
                       graph + "'");
  if ((method == "nb_full" || method == "nb_zap")) {
    if (!spec.finite())
      throw config_error("methods nb_full/nb_zap start one particle per vertex; "
                         "use a finite tree (bintree:L, regtree:D:R)");
    if (horizon <= 0.0)
      throw config_error("methods nb_full/nb_zap need horizon > 0");
  }
  if (method == "nb_dual" && spec.finite())
    throw config_error("method 'nb_dual' runs on lazy trees (bintree, regtree:D, "
                       "gw:..., halfline)");
  if (leaf_policy != "extend" && leaf_policy != "strict")
    throw config_error("config: leaf_policy must be 'extend' or 'strict'");
}

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("CRWSIM_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) return w;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

// ---------------------------------------------------------------------------
// Worker pool

namespace {

/// Run fn(worker, begin, end) over a static partition of [0, reps).
/// Rethrows the first worker exception.
template <class Fn>
void parallel_chunks(std::int64_t reps, int workers, Fn&& fn) {
  const int w = static_cast<int>(
      std::max<std::int64_t>(1, std::min<std::int64_t>(workers, reps)));
  if (w == 1) {
    fn(0, std::int64_t{0}, reps);
    return;
  }
  std::vector<std::thread> pool;
  std::mutex mu;
  std::exception_ptr first_error;
  for (int i = 0; i < w; ++i) {
    const std::int64_t begin = reps * i / w;
    const std::int64_t end = reps * (i + 1) / w;
    pool.emplace_back([&, i, begin, end] {
      try {
        fn(i, begin, end);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

/// Reset the per-worker oracle for one replicate and return the dynamics
/// stream. Lazy oracles are reseeded per replicate (annealed) unless a fixed
/// tree seed pins the tree (quenched).
Rng prepare_replicate(GraphOracle& g, const ExperimentConfig& cfg,
                      std::int64_t rep) {
  Rng rng = replicate_stream(cfg.seed, static_cast<std::uint64_t>(rep));
  const std::uint64_t fresh_tree = rng.next();
  if (!g.finite()) {
    if (cfg.tree_seed) g.reset();
    else g.reseed(fresh_tree);
  }
  return rng;
}

GraphOracle worker_oracle(const ExperimentConfig& cfg) {
  const GraphSpec spec = GraphSpec::parse(cfg.graph);
  return GraphOracle::make(spec, cfg.tree_seed.value_or(0));
}

void fill_wilson_rows(EstimateSeries& series, const TimeGrid& grid,
                      std::span<const std::int64_t> hits, std::int64_t reps,
                      const std::string& method, double cap_hit) {
  for (std::size_t i = 0; i < grid.times.size(); ++i) {
    const auto ci = wilson_interval(hits[i], reps, kZ99);
    series.rows.push_back({grid.times[i],
                           static_cast<double>(hits[i]) / static_cast<double>(reps),
                           ci.lo, ci.hi, reps, method, cap_hit});
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Direct simulation runner

namespace {

/// Reset a CRW state to the all-occupied configuration, reusing buffers.
void crw_reset_all(CrwState& s, GraphOracle& g, std::int64_t sum_degrees) {
  const auto n = static_cast<std::size_t>(g.vertex_count());
  s.at.assign(n, 1);
  s.occupied.resize(n);
  for (std::size_t i = 0; i < n; ++i) s.occupied[i] = static_cast<VertexId>(i);
  s.total_rate = sum_degrees;
  s.clock = 0.0;
}

}  // namespace

EstimateSeries run_direct_occupancy(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.method != "direct")
    throw usage_error("run_direct_occupancy: config method must be 'direct'");
  const TimeGrid grid = TimeGrid::parse(cfg.grid);
  const int workers = resolve_workers(cfg.workers);
  const auto n_grid = grid.times.size();
  const std::int64_t reps = cfg.replicates;

  std::vector<std::vector<std::int64_t>> hits(
      static_cast<std::size_t>(workers), std::vector<std::int64_t>(n_grid, 0));

  parallel_chunks(reps, workers, [&](int w, std::int64_t b, std::int64_t e) {
    GraphOracle g = worker_oracle(cfg);
    if (cfg.vertex >= g.vertex_count())
      throw config_error("vertex not in graph");
    std::int64_t sum_deg = 0;
    for (VertexId v = 0; v < g.vertex_count(); ++v) sum_deg += g.degree(v);
    CrwState st;
    auto& local = hits[static_cast<std::size_t>(w)];
    for (std::int64_t rep = b; rep < e; ++rep) {
      Rng rng = prepare_replicate(g, cfg, rep);
      crw_reset_all(st, g, sum_deg);
      std::size_t gi = 0;
      while (gi < n_grid) {
        const bool occ_now = st.occupies(cfg.vertex);
        crw_step(st, g, rng);
        while (gi < n_grid && grid.times[gi] < st.clock) {
          local[gi] += occ_now ? 1 : 0;
          ++gi;
        }
      }
    }
  });

  std::vector<std::int64_t> total(n_grid, 0);
  for (const auto& h : hits)
    for (std::size_t i = 0; i < n_grid; ++i) total[i] += h[i];

  EstimateSeries series;
  fill_wilson_rows(series, grid, total, reps, "direct", 0.0);
  return series;
}

std::vector<EstimateRow> run_direct_all_vertices(const ExperimentConfig& cfg,
                                                 double t) {
  cfg.validate();
  const GraphSpec spec = GraphSpec::parse(cfg.graph);
  if (!spec.finite()) throw config_error("per-vertex estimates need a finite graph");
  const int workers = resolve_workers(cfg.workers);
  const std::int64_t reps = cfg.replicates;

  GraphOracle master = GraphOracle::make(spec);
  const auto n = static_cast<std::size_t>(master.vertex_count());
  std::vector<std::vector<std::int64_t>> hits(
      static_cast<std::size_t>(workers), std::vector<std::int64_t>(n, 0));

  parallel_chunks(reps, workers, [&](int w, std::int64_t b, std::int64_t e) {
    GraphOracle g = worker_oracle(cfg);
    std::int64_t sum_deg = 0;
    for (VertexId v = 0; v < g.vertex_count(); ++v) sum_deg += g.degree(v);
    CrwState st;
    auto& local = hits[static_cast<std::size_t>(w)];
    for (std::int64_t rep = b; rep < e; ++rep) {
      Rng rng = prepare_replicate(g, cfg, rep);
      crw_reset_all(st, g, sum_deg);
      while (st.clock <= t) {
        const auto snapshot = st.at;
        crw_step(st, g, rng);
        if (st.clock > t) {
          for (std::size_t v = 0; v < n; ++v) local[v] += snapshot[v];
          break;
        }
      }
    }
  });

  std::vector<EstimateRow> rows;
  for (std::size_t v = 0; v < n; ++v) {
    std::int64_t total = 0;
    for (const auto& h : hits) total += h[v];
    const auto ci = wilson_interval(total, reps, kZ99);
    rows.push_back({t, static_cast<double>(total) / static_cast<double>(reps),
                    ci.lo, ci.hi, reps, "direct", 0.0});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Dual survival runner

EstimateSeries run_dual_survival(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.method != "dual")
    throw usage_error("run_dual_survival: config method must be 'dual'");
  const TimeGrid grid = TimeGrid::parse(cfg.grid);
  const int workers = resolve_workers(cfg.workers);
  const auto n_grid = grid.times.size();
  const std::int64_t reps = cfg.replicates;
  const double horizon = grid.back();

  std::vector<double> taus(static_cast<std::size_t>(reps), 0.0);
  std::vector<std::int64_t> cap_counts(static_cast<std::size_t>(workers), 0);

  parallel_chunks(reps, workers, [&](int w, std::int64_t b, std::int64_t e) {
    GraphOracle g = worker_oracle(cfg);
    if (g.finite() && cfg.vertex >= g.vertex_count())
      throw config_error("vertex not in graph");
    ClusterState st;
    for (std::int64_t rep = b; rep < e; ++rep) {
      Rng rng = prepare_replicate(g, cfg, rep);
      const auto outcome =
          survival_replicate(st, g, cfg.vertex, horizon, cfg.size_cap, rng);
      taus[static_cast<std::size_t>(rep)] = outcome.tau;
      if (outcome.capped) ++cap_counts[static_cast<std::size_t>(w)];
    }
  });

  std::int64_t capped = 0;
  for (auto c : cap_counts) capped += c;

  std::vector<std::int64_t> alive(n_grid, 0);
  std::vector<double> trunc_mean(n_grid, 0.0);
  for (double tau : taus) {
    for (std::size_t i = 0; i < n_grid; ++i) {
      if (tau > grid.times[i]) ++alive[i];
      trunc_mean[i] += std::min(tau, grid.times[i]);
    }
  }
  for (auto& m : trunc_mean) m /= static_cast<double>(reps);

  EstimateSeries series;
  series.cap_hit_fraction =
      static_cast<double>(capped) / static_cast<double>(reps);
  series.cap_biased = series.cap_hit_fraction > 0.01;
  fill_wilson_rows(series, grid, alive, reps, "dual", series.cap_hit_fraction);
  series.truncated_mean_survival = std::move(trunc_mean);
  return series;
}

// ---------------------------------------------------------------------------
// Oracle series

EstimateSeries run_oracle_series(const ExperimentConfig& cfg) {
  cfg.validate();
  const TimeGrid grid = TimeGrid::parse(cfg.grid);
  GraphOracle g = worker_oracle(cfg);
  EstimateSeries series;
  for (double t : grid.times) {
    const double p = exact::crw_exact_pt(g, cfg.vertex, t);
    series.rows.push_back({t, p, p, p, 0, "oracle", 0.0});
  }
  return series;
}

// ---------------------------------------------------------------------------
// First-occupancy tails

std::vector<SigmaTailRow> run_sigma_tail(
    const ExperimentConfig& cfg,
    std::span<const std::pair<double, double>> windows) {
  cfg.validate();
  if (windows.empty()) throw config_error("sigma tail: no (t,u) windows");
  for (auto [t, u] : windows)
    if (!(u > t) || t < 0.0)
      throw config_error("sigma tail: windows need u > t >= 0");

  std::vector<double> starts;
  for (auto [t, u] : windows) starts.push_back(t);
  std::sort(starts.begin(), starts.end());
  starts.erase(std::unique(starts.begin(), starts.end()), starts.end());
  double horizon = 0.0;
  for (auto [t, u] : windows) horizon = std::max(horizon, u);

  const int workers = resolve_workers(cfg.workers);
  const std::int64_t reps = cfg.replicates;
  const auto n_starts = starts.size();

  // per replicate, per start: first occupancy time of v at or after the start
  std::vector<double> sigma(static_cast<std::size_t>(reps) * n_starts, kInf);

  parallel_chunks(reps, workers, [&](int, std::int64_t b, std::int64_t e) {
    GraphOracle g = worker_oracle(cfg);
    if (cfg.vertex >= g.vertex_count()) throw config_error("vertex not in graph");
    std::int64_t sum_deg = 0;
    for (VertexId v = 0; v < g.vertex_count(); ++v) sum_deg += g.degree(v);
    CrwState st;
    std::vector<std::uint8_t> pending(n_starts);
    for (std::int64_t rep = b; rep < e; ++rep) {
      Rng rng = prepare_replicate(g, cfg, rep);
      crw_reset_all(st, g, sum_deg);
      std::fill(pending.begin(), pending.end(), std::uint8_t{0});
      double* out = sigma.data() + static_cast<std::size_t>(rep) * n_starts;
      std::size_t next_start = 0;
      std::size_t unresolved = n_starts;
      while (unresolved > 0 && st.clock <= horizon) {
        const bool occ_now = st.occupies(cfg.vertex);
        crw_step(st, g, rng);
        // starts inside [previous event, this event) see the old state
        while (next_start < n_starts && starts[next_start] < st.clock) {
          if (occ_now) {
            out[next_start] = starts[next_start];
            --unresolved;
          } else {
            pending[next_start] = 1;
          }
          ++next_start;
        }
        if (!occ_now && st.occupies(cfg.vertex)) {
          for (std::size_t k = 0; k < next_start; ++k) {
            if (pending[k]) {
              pending[k] = 0;
              out[k] = st.clock;
              --unresolved;
            }
          }
        }
      }
    }
  });

  std::vector<SigmaTailRow> rows;
  for (auto [t, u] : windows) {
    const auto si = static_cast<std::size_t>(
        std::lower_bound(starts.begin(), starts.end(), t) - starts.begin());
    SigmaTailRow row;
    row.window_start = t;
    row.query = u;
    row.replicates = reps;
    for (std::int64_t rep = 0; rep < reps; ++rep) {
      const double s = sigma[static_cast<std::size_t>(rep) * n_starts + si];
      if (s > u) ++row.exceed_count;
      if (s == kInf) ++row.censored;
    }
    row.estimate =
        static_cast<double>(row.exceed_count) / static_cast<double>(reps);
    row.ci = wilson_interval(row.exceed_count, reps, kZ99);
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Martingale / Doob diagnostics

MartingaleReport run_martingale(const ExperimentConfig& cfg,
                                std::vector<std::int64_t> indices,
                                std::int64_t sup_jumps,
                                std::vector<std::int64_t> thresholds) {
  cfg.validate();
  if (cfg.method != "dual" && cfg.method != "nb_dual")
    throw config_error("martingale diagnostics need method 'dual' or 'nb_dual'");
  std::sort(indices.begin(), indices.end());
  if (indices.empty() || indices.front() < 0)
    throw config_error("martingale: need nonnegative jump indices");
  if (thresholds.empty())
    throw config_error("martingale: need at least one sup threshold");
  for (auto m : thresholds)
    if (m < 1) throw config_error("martingale: thresholds must be >= 1");
  const std::int64_t max_index = std::max(indices.back(), sup_jumps);
  const int workers = resolve_workers(cfg.workers);
  const std::int64_t reps = cfg.replicates;
  const auto n_idx = indices.size();
  const auto n_thr = thresholds.size();
  const bool nb = cfg.method == "nb_dual";

  struct Accum {
    std::vector<std::int64_t> sums, sq_sums;
    std::vector<std::int64_t> exceed;
  };
  std::vector<Accum> acc(static_cast<std::size_t>(workers));
  for (auto& a : acc) {
    a.sums.assign(n_idx, 0);
    a.sq_sums.assign(n_idx, 0);
    a.exceed.assign(n_thr, 0);
  }

  parallel_chunks(reps, workers, [&](int w, std::int64_t b, std::int64_t e) {
    std::optional<GraphOracle> g;
    std::optional<RootedTree> tree;
    if (nb) tree.emplace(worker_oracle(cfg));
    else g.emplace(worker_oracle(cfg));
    ClusterState cs;
    NbClusterState ns;
    auto& local = acc[static_cast<std::size_t>(w)];
    for (std::int64_t rep = b; rep < e; ++rep) {
      Rng rng = replicate_stream(cfg.seed, static_cast<std::uint64_t>(rep));
      const std::uint64_t fresh_tree = rng.next();
      if (nb) {
        if (cfg.tree_seed) tree->reset();
        else tree->oracle().reseed(fresh_tree);
        nb_cluster_reset(ns, *tree, cfg.vertex);
      } else {
        if (!g->finite()) {
          if (cfg.tree_seed) g->reset();
          else g->reseed(fresh_tree);
        }
        cluster_reset(cs, *g, cfg.vertex);
      }
      std::int64_t size = 1;
      std::int64_t running_max = 1;
      std::size_t k = 0;
      while (k < n_idx && indices[k] == 0) {
        local.sums[k] += size;
        local.sq_sums[k] += size * size;
        ++k;
      }
      for (std::int64_t i = 1; i <= max_index; ++i) {
        if (nb) {
          nb_cluster_step(ns, *tree, rng);
          size = ns.size();
        } else if (cs.boundary_out > 0) {
          cluster_step(cs, *g, rng);
          size = cs.size();
        }  // else frozen full state on a finite graph keeps its size
        if (i <= sup_jumps && size > running_max) running_max = size;
        while (k < n_idx && indices[k] == i) {
          local.sums[k] += size;
          local.sq_sums[k] += size * size;
          ++k;
        }
        // absorbed trajectories stay at 0: later indices add nothing and the
        // running sup is final
        if (size == 0) break;
        if (k == n_idx && i >= sup_jumps) break;
      }
      for (std::size_t m = 0; m < n_thr; ++m)
        if (running_max > thresholds[m]) ++local.exceed[m];
    }
  });

  MartingaleReport report;
  report.indices = indices;
  report.sup_jumps = sup_jumps;
  report.thresholds = thresholds;
  report.replicates = reps;
  for (std::size_t k = 0; k < n_idx; ++k) {
    std::int64_t sum = 0, sq = 0;
    for (const auto& a : acc) {
      sum += a.sums[k];
      sq += a.sq_sums[k];
    }
    const double mean = static_cast<double>(sum) / static_cast<double>(reps);
    const double var =
        std::max(0.0, static_cast<double>(sq) / static_cast<double>(reps) -
                          mean * mean);
    report.means.push_back(mean);
    report.ses.push_back(std::sqrt(var / static_cast<double>(reps)));
  }
  for (std::size_t m = 0; m < n_thr; ++m) {
    std::int64_t exceed = 0;
    for (const auto& a : acc) exceed += a.exceed[m];
    report.sup_exceed.push_back(exceed);
    report.sup_probability.push_back(static_cast<double>(exceed) /
                                     static_cast<double>(reps));
    report.sup_ci.push_back(wilson_interval(exceed, reps, kZ99));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Branching walk Monte Carlo

std::vector<BranchingMcRow> run_branching_mc(double branch_rate,
                                             const TimeGrid& grid,
                                             std::int64_t reps,
                                             std::uint64_t seed, int workers) {
  if (branch_rate < 1.0) throw config_error("branching MC: need D >= 1");
  if (reps < 1) throw config_error("branching MC: need replicates >= 1");
  const auto n_grid = grid.times.size();
  const double horizon = grid.back();
  const int w_count = resolve_workers(workers);

  std::vector<std::vector<std::int64_t>> alive(
      static_cast<std::size_t>(w_count), std::vector<std::int64_t>(n_grid, 0));

  parallel_chunks(reps, w_count, [&](int w, std::int64_t b, std::int64_t e) {
    auto& local = alive[static_cast<std::size_t>(w)];
    for (std::int64_t rep = b; rep < e; ++rep) {
      Rng rng = replicate_stream(seed, static_cast<std::uint64_t>(rep));
      std::int64_t level = 1;
      double clock = 0.0;
      double tau = kInf;
      while (level > 0) {
        clock += rng.exponential(2.0 * branch_rate * static_cast<double>(level));
        if (clock > horizon) break;
        level += rng.coin() ? 1 : -1;
        if (level == 0) tau = clock;
        if (level > 100000000) break;  // runaway guard; counted as surviving
      }
      for (std::size_t i = 0; i < n_grid; ++i)
        if (tau > grid.times[i]) ++local[i];
    }
  });

  std::vector<BranchingMcRow> rows;
  for (std::size_t i = 0; i < n_grid; ++i) {
    std::int64_t total = 0;
    for (const auto& a : alive) total += a[i];
    BranchingMcRow row;
    row.t = grid.times[i];
    row.alive = total;
    row.replicates = reps;
    row.estimate = static_cast<double>(total) / static_cast<double>(reps);
    row.ci = wilson_interval(total, reps, kZ99);
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Non-backtracking comparisons

std::vector<double> run_root_occupation_samples(const ExperimentConfig& cfg,
                                                bool zap_model) {
  cfg.validate();
  if (cfg.horizon <= 0.0) throw config_error("root occupation: need horizon > 0");
  const GraphSpec spec = GraphSpec::parse(cfg.graph);
  if (!spec.tree() || !spec.finite())
    throw config_error("root occupation: need a finite tree");
  const LeafPolicy policy =
      cfg.leaf_policy == "extend" ? LeafPolicy::kExtend : LeafPolicy::kStrict;
  const int workers = resolve_workers(cfg.workers);
  const std::int64_t reps = cfg.replicates;

  std::vector<double> samples(static_cast<std::size_t>(reps), 0.0);
  // zap replicates draw from the index range [reps, 2*reps) of the same
  // master seed so the two models use independent streams
  const std::int64_t index_offset = zap_model ? reps : 0;

  parallel_chunks(reps, workers, [&](int, std::int64_t b, std::int64_t e) {
    RootedTree tree(GraphOracle::make(spec), policy);
    for (std::int64_t rep = b; rep < e; ++rep) {
      Rng rng = replicate_stream(
          cfg.seed, static_cast<std::uint64_t>(rep + index_offset));
      samples[static_cast<std::size_t>(rep)] =
          zap_model ? zap_root_occupation(tree, cfg.horizon, rng)
                    : nb_root_occupation(tree, cfg.horizon, rng);
    }
  });
  return samples;
}

NbCompareReport run_nb_compare(const ExperimentConfig& cfg) {
  NbCompareReport report;
  report.horizon = cfg.horizon;
  report.replicates = cfg.replicates;
  report.full_samples = run_root_occupation_samples(cfg, false);
  report.zap_samples = run_root_occupation_samples(cfg, true);
  report.mean_full = sample_mean(report.full_samples);
  report.mean_zap = sample_mean(report.zap_samples);
  report.pooled_se = pooled_se(report.full_samples, report.zap_samples);
  report.ks = ks_statistic(report.full_samples, report.zap_samples);
  report.ks_critical_1pct = ks_critical_value(
      0.01, report.full_samples.size(), report.zap_samples.size());
  return report;
}

// ---------------------------------------------------------------------------
// Window validation

WindowCheck run_window_validation(const ExperimentConfig& cfg) {
  cfg.validate();
  const GraphSpec spec = GraphSpec::parse(cfg.graph);
  GraphSpec doubled = spec;
  using Kind = GraphSpec::Kind;
  if (spec.kind == Kind::kLineWindow) {
    doubled.text = "line:" + std::to_string(2 * spec.radius);
  } else if (spec.kind == Kind::kRegTreeWindow) {
    doubled.text = "regtree:" + std::to_string(spec.degree) + ":" +
                   std::to_string(2 * spec.radius);
  } else {
    throw config_error("window validation applies to line:R and regtree:D:R");
  }

  WindowCheck check;
  check.base = run_direct_occupancy(cfg);
  ExperimentConfig big = cfg;
  big.graph = doubled.text;
  check.doubled = run_direct_occupancy(big);

  check.accepted = true;
  for (std::size_t i = 0; i < check.base.rows.size(); ++i) {
    const auto& a = check.base.rows[i];
    const auto& b = check.doubled.rows[i];
    const double se_a = proportion_se(
        static_cast<std::int64_t>(std::llround(a.estimate * a.replicates)),
        a.replicates);
    const double se_b = proportion_se(
        static_cast<std::int64_t>(std::llround(b.estimate * b.replicates)),
        b.replicates);
    const double pooled = std::sqrt(se_a * se_a + se_b * se_b);
    const bool ok = std::abs(a.estimate - b.estimate) < std::max(pooled, 1e-12);
    check.within_one_se.push_back(ok);
    if (!ok) check.accepted = false;
  }
  return check;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

}  // namespace

std::string series_csv(const EstimateSeries& series) {
  std::string out = "t,estimate,ci_low,ci_high,replicates,method,cap_hit\r\n";
  for (const auto& r : series.rows) {
    out += format_double(r.t);
    out += ',';
    out += format_double(r.estimate);
    out += ',';
    out += format_double(r.ci_low);
    out += ',';
    out += format_double(r.ci_high);
    out += ',';
    out += std::to_string(r.replicates);
    out += ',';
    out += r.method;
    out += ',';
    out += format_double(r.cap_hit);
    out += "\r\n";
  }
  return out;
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw config_error("cannot open output file '" + path + "'");
  os << contents;
  if (!os) throw config_error("failed writing '" + path + "'");
}

std::string summary_json(const ExperimentConfig& cfg, const EstimateSeries& series,
                         const std::vector<CheckRow>& checks, double wall_ms) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  nlohmann::ordered_json jc;
  jc["graph"] = cfg.graph;
  jc["vertex"] = cfg.vertex;
  jc["method"] = cfg.method;
  jc["grid"] = cfg.grid;
  jc["replicates"] = cfg.replicates;
  jc["seed"] = cfg.seed;
  jc["size_cap"] = cfg.size_cap;
  jc["workers"] = cfg.workers;
  jc["horizon"] = cfg.horizon;
  jc["leaf_policy"] = cfg.leaf_policy;
  if (cfg.tree_seed) jc["tree_seed"] = *cfg.tree_seed;
  j["config"] = jc;

  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& r : series.rows) {
    rows.push_back({{"t", r.t},
                    {"estimate", r.estimate},
                    {"ci_low", r.ci_low},
                    {"ci_high", r.ci_high},
                    {"replicates", r.replicates},
                    {"method", r.method},
                    {"cap_hit", r.cap_hit}});
  }
  j["rows"] = rows;
  j["cap_hit_fraction"] = series.cap_hit_fraction;
  j["cap_biased"] = series.cap_biased;
  if (!series.truncated_mean_survival.empty())
    j["truncated_mean_survival"] = series.truncated_mean_survival;

  nlohmann::ordered_json jchecks = nlohmann::ordered_json::array();
  bool all_pass = true;
  for (const auto& c : checks) {
    jchecks.push_back({{"name", c.name},
                       {"t", c.t},
                       {"bound", c.bound},
                       {"estimate", c.estimate},
                       {"ci_low", c.ci_low},
                       {"ci_high", c.ci_high},
                       {"pass", c.pass}});
    if (!c.pass) all_pass = false;
  }
  j["checks"] = jchecks;
  j["all_checks_pass"] = all_pass;
  j["wall_clock_ms"] = wall_ms;
  return j.dump(2) + "\n";
}

}  // namespace crw
