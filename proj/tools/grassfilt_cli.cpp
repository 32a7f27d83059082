// Experiment driver: seeded, reproducible runs of the interpolation and
// classification studies, reporting CSV tables plus a JSON summary.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "grassfilt/experiments.hpp"

namespace {

using nlohmann::json;
using namespace grassfilt;

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) fail(ErrorCode::ConfigInvalid, "config file not found: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    fail(ErrorCode::ConfigInvalid, "cannot parse " + path + ": " + e.what());
  }
  if (!j.is_object()) fail(ErrorCode::ConfigInvalid, path + ": top-level JSON object expected");
  return j;
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      fail(ErrorCode::ConfigInvalid, "unknown config key '" + it.key() + "' in " + where);
}

CsbmConfig parse_csbm(const json& j, CsbmConfig base) {
  check_keys(j, {"n1", "n2", "p", "q", "d", "sigma", "mu_norm", "theta0"}, "csbm");
  base.n1 = j.value("n1", base.n1);
  base.n2 = j.value("n2", base.n2);
  base.p = j.value("p", base.p);
  base.q = j.value("q", base.q);
  base.d = j.value("d", base.d);
  base.sigma = j.value("sigma", base.sigma);
  base.mu_norm = j.value("mu_norm", base.mu_norm);
  base.theta0 = j.value("theta0", base.theta0);
  return base;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"grassfilt: low-frequency subspace and graph-filter interpolation experiments"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_given = false;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file (flags override)");
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_option("--seed", seed, "master seed")->each([&](const std::string&) {
      seed_given = true;
    });
  };

  auto* interp = app.add_subcommand(
      "interp-convergence",
      "subspace/filter interpolation error vs anchor count.\n"
      "Writes per_point.csv (N,t,subspace_df,subspace_dgr,filter_err),\n"
      "summary.csv (N,max_subspace_df,max_filter_err) and\n"
      "anchor_check.csv (N,t_anchor,subspace_df,filter_err).\n"
      "Config keys: trajectory (planar|block_rotation|csbm), N_list, k,\n"
      "grid_points, base_policy (default|middle|first), taps, csbm{...}, seed, out");
  add_common(interp);

  auto* csbm = app.add_subcommand(
      "csbm",
      "similarity-corrected CSBM trajectory: weights, distances, errors, timing.\n"
      "Writes weight_quantiles.csv (t,q25,q50,q75),\n"
      "neighbor_distance.csv (t_left,t_right,d_gr_k5),\n"
      "interp_errors.csv (t,subspace_df,subspace_dgr,filter_err),\n"
      "filter_response.csv (lambda,response); timings go to report.json.\n"
      "Config keys: csbm{n1,n2,p,q,d,sigma,mu_norm,theta0}, k, N, taps, t_grid,\n"
      "timing_reps, with_timing, anchors_out, export_graph_at, seed, out");
  add_common(csbm);

  auto* dpg = app.add_subcommand(
      "dpg-classify",
      "vertex classification over a thresholded dot-product-graph family.\n"
      "Writes per_split.csv (split,static_acc,selected_acc,oracle_acc,delta_star,\n"
      "val_acc,n_edges_at_star), delta_curve.csv (split,delta,val_acc,test_acc,\n"
      "n_edges), grid_diagnostics.csv (delta,n_edges,jaccard_to_source),\n"
      "summary.csv (metric:0=static/1=selected/2=oracle,q25,median,q75).\n"
      "Config keys: dataset (karate|csv), edges_csv|features_csv, labels_csv,\n"
      "knn_kappa, knn_weights, d, k, M, alpha, grid_size, n_splits,\n"
      "known_fraction, use_interpolation, anchors_per_sweep, export_delta, seed, out");
  add_common(dpg);

  auto* karate = app.add_subcommand(
      "karate",
      "export the bundled karate-club dataset.\n"
      "Writes info.csv (n,m,classes), labels.csv (id,label), edges.csv");
  add_common(karate);

  interp->callback([&]() {
    json j = load_config(config_path);
    check_keys(j, {"trajectory", "N_list", "k", "grid_points", "base_policy", "taps", "seed",
                   "csbm", "out"},
               "interp-convergence");
    InterpConvergenceConfig cfg;
    cfg.trajectory = j.value("trajectory", cfg.trajectory);
    if (j.contains("N_list")) cfg.n_list = j["N_list"].get<std::vector<int>>();
    cfg.k = j.value("k", cfg.k);
    cfg.grid_points = j.value("grid_points", cfg.grid_points);
    cfg.base_policy = j.value("base_policy", cfg.base_policy);
    cfg.taps = j.value("taps", cfg.taps);
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("csbm")) cfg.csbm = parse_csbm(j["csbm"], cfg.csbm);
    if (j.contains("out")) out_dir = j["out"].get<std::string>();
    if (seed_given) cfg.seed = seed;
    ExperimentReport rep = run_interp_convergence(cfg);
    write_report(rep, out_dir);
  });

  csbm->callback([&]() {
    json j = load_config(config_path);
    check_keys(j, {"csbm", "k", "N", "taps", "t_grid", "timing_reps", "with_timing",
                   "anchors_out", "export_graph_at", "seed", "out"},
               "csbm");
    CsbmExperimentConfig cfg;
    if (j.contains("csbm")) cfg.csbm = parse_csbm(j["csbm"], cfg.csbm);
    cfg.k = j.value("k", cfg.k);
    cfg.order = j.value("N", cfg.order);
    cfg.taps = j.value("taps", cfg.taps);
    cfg.t_grid = j.value("t_grid", cfg.t_grid);
    cfg.timing_reps = j.value("timing_reps", cfg.timing_reps);
    cfg.with_timing = j.value("with_timing", cfg.with_timing);
    cfg.anchors_out = j.value("anchors_out", cfg.anchors_out);
    cfg.export_graph_at = j.value("export_graph_at", cfg.export_graph_at);
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("out")) out_dir = j["out"].get<std::string>();
    if (seed_given) cfg.seed = seed;
    ExperimentReport rep = run_csbm_experiment(cfg);
    write_report(rep, out_dir);
  });

  dpg->callback([&]() {
    json j = load_config(config_path);
    check_keys(j,
               {"dataset", "edges_csv", "features_csv", "labels_csv", "knn_kappa", "knn_weights",
                "d", "k", "M", "alpha", "grid_size", "n_splits", "known_fraction",
                "use_interpolation", "anchors_per_sweep", "export_delta", "seed", "out"},
               "dpg-classify");
    DpgClassifyConfig cfg;
    cfg.dataset = j.value("dataset", cfg.dataset);
    cfg.edges_csv = j.value("edges_csv", cfg.edges_csv);
    cfg.features_csv = j.value("features_csv", cfg.features_csv);
    cfg.labels_csv = j.value("labels_csv", cfg.labels_csv);
    cfg.knn_kappa = j.value("knn_kappa", cfg.knn_kappa);
    cfg.knn_weights = j.value("knn_weights", cfg.knn_weights);
    cfg.d = j.value("d", cfg.d);
    cfg.k = j.value("k", cfg.k);
    cfg.m = j.value("M", cfg.m);
    cfg.alpha = j.value("alpha", cfg.alpha);
    cfg.grid_size = j.value("grid_size", cfg.grid_size);
    cfg.n_splits = j.value("n_splits", cfg.n_splits);
    cfg.known_fraction = j.value("known_fraction", cfg.known_fraction);
    cfg.use_interpolation = j.value("use_interpolation", cfg.use_interpolation);
    cfg.anchors_per_sweep = j.value("anchors_per_sweep", cfg.anchors_per_sweep);
    cfg.export_delta = j.value("export_delta", cfg.export_delta);
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("out")) out_dir = j["out"].get<std::string>();
    if (seed_given) cfg.seed = seed;
    ExperimentReport rep = run_dpg_classification(cfg);
    write_report(rep, out_dir);
  });

  karate->callback([&]() {
    json j = load_config(config_path);
    check_keys(j, {"out"}, "karate");
    if (j.contains("out")) out_dir = j["out"].get<std::string>();
    ExperimentReport rep = run_karate_info(out_dir);
    write_report(rep, out_dir);
  });

  try {
    app.parse(argc, argv);
    return 0;
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::ConfigInvalid || e.code() == ErrorCode::IoError ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
