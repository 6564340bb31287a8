// Command-line runner for the coalescing random walk toolkit.
//
// Subcommands: estimate, oracle, duality, verify-bounds, nb-compare,
// martingale. Graph specs use the kind:param grammar, e.g. cycle:8,
// path:4, star:4, torus:2:21, line:12, z, halfline, regtree:3,
// regtree:3:12, bintree, bintree:6, gw:geom:0.5, gw:pois:1.5, gw:unif:1:4.
//
// Exit codes: 0 all requested checks pass, 1 a check failed, 2 bad
// configuration, 3 internal fault.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "crw/bounds.hpp"
#include "crw/exact_oracle.hpp"
#include "crw/experiment.hpp"
#include "crw/graph.hpp"
#include "crw/stats.hpp"

namespace {

using crw::ExperimentConfig;

double now_ms() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double, std::milli>(
             clock::now().time_since_epoch())
      .count();
}

void add_common_options(CLI::App* cmd, ExperimentConfig& cfg) {
  cmd->add_option("--graph", cfg.graph, "graph spec (kind:param:...)");
  cmd->add_option("--v", cfg.vertex, "target vertex id");
  cmd->add_option("--t", cfg.grid,
                  "time grid: linear:a:b:n, log:a:b:n, list:.. or a bare time");
  cmd->add_option("--reps", cfg.replicates, "Monte Carlo replicates");
  cmd->add_option("--seed", cfg.seed, "master seed");
  cmd->add_option("--size-cap", cfg.size_cap, "dual cluster size cap");
  cmd->add_option("--workers", cfg.workers, "worker threads (0 = auto)");
  cmd->add_option("--leaf-policy", cfg.leaf_policy,
                  "finite tree windows: extend | strict");
  cmd->add_option("--tree-seed",
                  [&cfg](const std::vector<std::string>& vals) {
                    cfg.tree_seed = std::stoull(vals[0]);
                    return true;
                  },
                  "fix the lazy tree seed (quenched runs)");
  cmd->add_option("--out", cfg.out_csv, "CSV output path");
  cmd->add_option("--summary", cfg.out_json, "JSON summary output path");
}

void emit_outputs(const ExperimentConfig& cfg, const crw::EstimateSeries& series,
                  const std::vector<crw::CheckRow>& checks, double wall_ms) {
  const std::string csv = crw::series_csv(series);
  if (!cfg.out_csv.empty()) crw::write_file(cfg.out_csv, csv);
  else std::cout << csv;
  if (!cfg.out_json.empty())
    crw::write_file(cfg.out_json, crw::summary_json(cfg, series, checks, wall_ms));
}

int run_estimate(ExperimentConfig cfg, const std::string& config_file,
                 bool validate_window) {
  if (!config_file.empty()) {
    std::ifstream is(config_file);
    if (!is) throw crw::config_error("cannot read config file " + config_file);
    std::stringstream buf;
    buf << is.rdbuf();
    cfg = ExperimentConfig::from_key_values(buf.str());
  }
  cfg.validate();
  const double start = now_ms();

  if (validate_window) {
    const auto check = crw::run_window_validation(cfg);
    std::cout << crw::series_csv(check.base);
    std::cout << crw::series_csv(check.doubled);
    for (std::size_t i = 0; i < check.within_one_se.size(); ++i) {
      std::printf("window t=%g %s\n", check.base.rows[i].t,
                  check.within_one_se[i] ? "within-1se" : "DIFFERS");
    }
    std::printf("window validation: %s\n",
                check.accepted ? "accepted" : "not accepted");
    return check.accepted ? 0 : 1;
  }

  crw::EstimateSeries series;
  if (cfg.method == "direct") series = crw::run_direct_occupancy(cfg);
  else if (cfg.method == "dual") series = crw::run_dual_survival(cfg);
  else if (cfg.method == "oracle") series = crw::run_oracle_series(cfg);
  else
    throw crw::config_error("estimate supports methods direct, dual, oracle");

  if (series.cap_biased)
    std::cerr << "note: cap_hit fraction " << series.cap_hit_fraction
              << " > 1%; estimates are certified lower bounds only\n";
  emit_outputs(cfg, series, {}, now_ms() - start);
  return 0;
}

int run_duality(ExperimentConfig cfg) {
  cfg.method = "oracle";
  cfg.validate();
  crw::GraphOracle g = crw::GraphOracle::make(crw::GraphSpec::parse(cfg.graph));
  const crw::TimeGrid grid = crw::TimeGrid::parse(cfg.grid);
  bool ok = true;
  std::printf("t,crw_pt,cluster_survival,gap,pass\n");
  for (double t : grid.times) {
    const double pt = crw::exact::crw_exact_pt(g, cfg.vertex, t);
    const double sv = crw::exact::cluster_exact_survival(g, cfg.vertex, t);
    const double gap = std::abs(pt - sv);
    const bool pass = gap <= 1e-8;
    ok = ok && pass;
    std::printf("%.12g,%.12g,%.12g,%.3e,%s\n", t, pt, sv, gap,
                pass ? "pass" : "FAIL");
  }
  return ok ? 0 : 1;
}

int run_oracle(ExperimentConfig cfg, double branching_rate, double const_rate,
               int truncation) {
  const crw::TimeGrid grid = crw::TimeGrid::parse(cfg.grid);
  if (branching_rate > 0.0) {
    std::printf("t,survival,closed_form,leak,K\n");
    for (double t : grid.times) {
      const auto res =
          crw::exact::branching_survival(branching_rate, t, truncation);
      std::printf("%.12g,%.12g,%.12g,%.3e,%d\n", t, res.survival,
                  1.0 / (1.0 + branching_rate * t), res.leak, res.truncation);
    }
    return 0;
  }
  if (const_rate > 0.0) {
    std::printf("t,survival,bessel,leak,K\n");
    for (double t : grid.times) {
      const auto res = crw::exact::constant_rate_survival(const_rate, t, truncation);
      std::printf("%.12g,%.12g,%.12g,%.3e,%d\n", t, res.survival,
                  crw::exact::constant_rate_survival_bessel(const_rate, t),
                  res.leak, res.truncation);
    }
    return 0;
  }
  cfg.method = "oracle";
  cfg.validate();
  const double start = now_ms();
  const auto series = crw::run_oracle_series(cfg);
  emit_outputs(cfg, series, {}, now_ms() - start);
  return 0;
}

int run_verify_bounds(ExperimentConfig cfg, const std::string& check,
                      double max_degree, const std::string& windows_text) {
  cfg.validate();
  const double start = now_ms();
  std::vector<crw::CheckRow> checks;
  crw::EstimateSeries series;

  if (check == "lower-bounded-degree") {
    // p_t >= 1/(1+Dt) - 3 SE via the chosen estimator
    series = cfg.method == "direct" ? crw::run_direct_occupancy(cfg)
                                    : crw::run_dual_survival(cfg);
    for (const auto& row : series.rows) {
      const double bound = crw::bounds::lower_bound_bounded_degree(max_degree, row.t);
      const double se = crw::proportion_se(
          static_cast<std::int64_t>(std::llround(row.estimate * row.replicates)),
          row.replicates);
      checks.push_back({check, row.t, bound, row.estimate, row.ci_low, row.ci_high,
                        row.estimate >= bound - 3.0 * se});
    }
  } else if (check == "gw-positivity") {
    // inf over the grid of p_t * t * log t stays positive (lower CI edge)
    series = crw::run_dual_survival(cfg);
    for (const auto& row : series.rows) {
      const double scaled = row.ci_low * row.t * std::log(row.t);
      checks.push_back({check, row.t, 0.0, row.estimate * row.t * std::log(row.t),
                        scaled, row.ci_high * row.t * std::log(row.t),
                        scaled > 0.0});
    }
  } else if (check == "constrate-upper") {
    // p_t <= survival of the rate-2 comparison walk + 3 SE
    series = crw::run_dual_survival(cfg);
    for (const auto& row : series.rows) {
      const double bound = crw::exact::constant_rate_survival(1.0, row.t).survival;
      const double se = crw::proportion_se(
          static_cast<std::int64_t>(std::llround(row.estimate * row.replicates)),
          row.replicates);
      checks.push_back({check, row.t, bound, row.estimate, row.ci_low, row.ci_high,
                        row.estimate <= bound + 3.0 * se});
    }
  } else if (check == "sigma-tail") {
    std::vector<std::pair<double, double>> windows;
    for (const auto& w : [&] {
           std::vector<std::string> parts;
           std::string cur;
           for (char c : windows_text) {
             if (c == ';') { parts.push_back(cur); cur.clear(); }
             else cur.push_back(c);
           }
           parts.push_back(cur);
           return parts;
         }()) {
      const auto comma = w.find(',');
      if (comma == std::string::npos)
        throw crw::config_error("sigma windows: use t,u;t,u");
      windows.emplace_back(std::stod(w.substr(0, comma)),
                           std::stod(w.substr(comma + 1)));
    }
    const auto rows = crw::run_sigma_tail(cfg, windows);
    for (const auto& r : rows) {
      const double bound = crw::bounds::sigma_tail_bound_degree(
          max_degree, r.window_start, r.query);
      const double se = crw::proportion_se(r.exceed_count, r.replicates);
      checks.push_back({"sigma-tail(t=" + std::to_string(r.window_start) + ")",
                        r.query, bound, r.estimate, r.ci.lo, r.ci.hi,
                        r.estimate <= bound + 3.0 * se});
    }
  } else {
    throw crw::config_error(
        "unknown check '" + check +
        "' (use lower-bounded-degree, gw-positivity, constrate-upper, sigma-tail)");
  }

  bool all = true;
  std::printf("check,t,bound,estimate,ci_low,ci_high,pass\n");
  for (const auto& c : checks) {
    all = all && c.pass;
    std::printf("%s,%.12g,%.12g,%.12g,%.12g,%.12g,%s\n", c.name.c_str(), c.t,
                c.bound, c.estimate, c.ci_low, c.ci_high, c.pass ? "pass" : "FAIL");
  }
  if (!cfg.out_json.empty())
    crw::write_file(cfg.out_json,
                    crw::summary_json(cfg, series, checks, now_ms() - start));
  if (!cfg.out_csv.empty()) crw::write_file(cfg.out_csv, crw::series_csv(series));
  return all ? 0 : 1;
}

int run_nb_compare(ExperimentConfig cfg, const std::string& samples_prefix) {
  cfg.method = "nb_full";
  cfg.validate();
  const auto report = crw::run_nb_compare(cfg);
  const double diff = std::abs(report.mean_full - report.mean_zap);
  const bool mean_ok = diff <= 3.0 * report.pooled_se;
  const bool ks_ok = report.ks < report.ks_critical_1pct;
  std::printf("mean_full,%.12g\nmean_zap,%.12g\npooled_se,%.12g\n",
              report.mean_full, report.mean_zap, report.pooled_se);
  std::printf("ks,%.12g\nks_critical_1pct,%.12g\n", report.ks,
              report.ks_critical_1pct);
  std::printf("means_within_3se,%s\nks_below_critical,%s\n",
              mean_ok ? "pass" : "FAIL", ks_ok ? "pass" : "FAIL");
  if (!samples_prefix.empty()) {
    auto dump = [](const std::string& path, const std::vector<double>& xs) {
      std::string out;
      char buf[40];
      for (double x : xs) {
        std::snprintf(buf, sizeof(buf), "%.12g\n", x);
        out += buf;
      }
      crw::write_file(path, out);
    };
    dump(samples_prefix + "_full.txt", report.full_samples);
    dump(samples_prefix + "_zap.txt", report.zap_samples);
  }
  return mean_ok && ks_ok ? 0 : 1;
}

std::vector<std::int64_t> parse_int_list(const std::string& text) {
  std::vector<std::int64_t> out;
  std::string cur;
  for (char c : text) {
    if (c == ',') {
      out.push_back(std::stoll(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(std::stoll(cur));
  return out;
}

int run_martingale_cmd(ExperimentConfig cfg, const std::string& indices_text,
                       std::int64_t sup_jumps, const std::string& thresholds_text) {
  cfg.validate();
  const auto indices = parse_int_list(indices_text);
  const auto thresholds = parse_int_list(thresholds_text);

  const auto report = crw::run_martingale(cfg, indices, sup_jumps, thresholds);
  bool all = true;
  std::printf("jump_index,mean_size,se,pass\n");
  for (std::size_t k = 0; k < report.indices.size(); ++k) {
    const bool pass =
        std::abs(report.means[k] - 1.0) <= 3.0 * std::max(report.ses[k], 1e-12);
    all = all && pass;
    std::printf("%lld,%.12g,%.12g,%s\n",
                static_cast<long long>(report.indices[k]), report.means[k],
                report.ses[k], pass ? "pass" : "FAIL");
  }
  std::printf("threshold,sup_exceed_probability,bound,pass\n");
  for (std::size_t m = 0; m < report.thresholds.size(); ++m) {
    const double bound = 1.0 / static_cast<double>(report.thresholds[m]);
    const double se = crw::proportion_se(report.sup_exceed[m], report.replicates);
    const bool doob_ok = report.sup_probability[m] <= bound + 3.0 * se;
    all = all && doob_ok;
    std::printf("%lld,%.12g,%.12g,%s\n",
                static_cast<long long>(report.thresholds[m]),
                report.sup_probability[m], bound, doob_ok ? "pass" : "FAIL");
  }
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coalescing random walk simulation and verification toolkit"};
  app.require_subcommand(1);

  ExperimentConfig cfg;
  std::string config_file;
  bool validate_window = false;
  std::string check = "lower-bounded-degree";
  double max_degree = 3.0;
  std::string windows_text = "1,3;1,5;2,8";
  std::string samples_prefix;
  std::string indices_text = "10,100,1000";
  std::int64_t sup_jumps = 900;
  std::string thresholds_text = "60";
  double branching_rate = 0.0, const_rate = 0.0;
  int truncation = 0;

  auto* est = app.add_subcommand("estimate", "Monte Carlo occupancy/survival series");
  add_common_options(est, cfg);
  est->add_option("--method", cfg.method, "direct | dual | oracle");
  est->add_option("--config", config_file, "key=value config file");
  est->add_flag("--validate-window", validate_window,
                "rerun with doubled window radius and compare");

  auto* orc = app.add_subcommand("oracle", "exact small-instance probabilities");
  add_common_options(orc, cfg);
  orc->add_option("--branching", branching_rate, "branching walk rate D");
  orc->add_option("--constrate", const_rate, "constant per-direction rate a");
  orc->add_option("--K", truncation, "ladder truncation override");

  auto* dua = app.add_subcommand("duality", "exact duality gap check");
  add_common_options(dua, cfg);

  auto* ver = app.add_subcommand("verify-bounds", "closed-form bound checks");
  add_common_options(ver, cfg);
  ver->add_option("--method", cfg.method, "direct | dual");
  ver->add_option("--check", check,
                  "lower-bounded-degree | gw-positivity | constrate-upper | sigma-tail");
  ver->add_option("--D", max_degree, "maximum degree for bound evaluation");
  ver->add_option("--windows", windows_text, "sigma windows t,u;t,u");

  auto* nbc = app.add_subcommand("nb-compare",
                                 "full non-backtracking model vs zap reduction");
  add_common_options(nbc, cfg);
  nbc->add_option("--T", cfg.horizon, "root occupation horizon");
  nbc->add_option("--samples-out", samples_prefix, "X_T sample file prefix");

  auto* mar = app.add_subcommand("martingale", "cluster-size martingale and sup tail");
  add_common_options(mar, cfg);
  mar->add_option("--method", cfg.method, "dual | nb_dual");
  mar->add_option("--indices", indices_text, "jump indices, comma separated");
  mar->add_option("--sup-jumps", sup_jumps, "sup window in jumps");
  mar->add_option("--thresholds", thresholds_text,
                  "sup thresholds, comma separated");

  CLI11_PARSE(app, argc, argv);

  try {
    if (est->parsed()) return run_estimate(cfg, config_file, validate_window);
    if (orc->parsed()) return run_oracle(cfg, branching_rate, const_rate, truncation);
    if (dua->parsed()) return run_duality(cfg);
    if (ver->parsed()) return run_verify_bounds(cfg, check, max_degree, windows_text);
    if (nbc->parsed()) return run_nb_compare(cfg, samples_prefix);
    if (mar->parsed()) return run_martingale_cmd(cfg, indices_text, sup_jumps, thresholds_text);
  } catch (const crw::config_error& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
