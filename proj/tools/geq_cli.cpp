// geq: command-line front door for the gradient-equilibrium toolkit.
// Subcommands ingest CSV streams (or generate synthetic ones), run a
// pipeline or diagnostic, and write plot-ready metric files plus a JSON
// summary. Exit codes: 0 success, 2 configuration error, 3 runtime error.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gradeq/gradeq.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gradeq;

namespace {

constexpr const char* kVersion = "0.1.0";

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(parse_double(item, 0));
  }
  return out;
}

// Options shared by every command that consumes or generates a stream.
struct StreamOptions {
  std::string input;
  std::string kind = "iid-gaussian";
  std::size_t length = 1000;
  double mu = 0.0, sigma = 1.0;
  std::string segments;
  double drift_rate = 0.01;
  double p_lo = 0.1, p_hi = 0.9;
  std::size_t models = 2;
  std::string strengths = "0,1";
  std::string group_mode = "none";
  std::string group_weights;
  std::string group_offsets;
  double bound_b = 0.0;
  double feature_scale = 1.0;
  bool disjoint_flag = false;
};

void add_stream_options(CLI::App* cmd, StreamOptions& opt, bool battles = false) {
  cmd->add_option("--input", opt.input, "input CSV path (omit to generate synthetically)");
  if (!battles) {
    cmd->add_option("--gen-kind", opt.kind,
                    "generator: iid-gaussian|piecewise-shift|drifting-mean|"
                    "bernoulli-calibrated");
    cmd->add_option("--mu", opt.mu, "residual mean");
    cmd->add_option("--sigma", opt.sigma, "residual sd");
    cmd->add_option("--segments", opt.segments, "piecewise segments len:mu:sigma,...");
    cmd->add_option("--drift-rate", opt.drift_rate, "drifting-mean rate per step");
    cmd->add_option("--p-lo", opt.p_lo, "base probability lower end");
    cmd->add_option("--p-hi", opt.p_hi, "base probability upper end");
    cmd->add_option("--group-mode", opt.group_mode, "none|disjoint|overlapping");
    cmd->add_option("--group-weights", opt.group_weights,
                    "proportions (disjoint) or activation probs (overlapping)");
    cmd->add_option("--group-offsets", opt.group_offsets, "per-group miscalibration");
    cmd->add_option("--feature-scale", opt.feature_scale,
                    "multiply ingested/generated group bits by this factor");
    cmd->add_flag("--disjoint", opt.disjoint_flag,
                  "declare the ingested groups disjoint (verified)");
  } else {
    cmd->add_option("--models", opt.models, "number of competitors");
    cmd->add_option("--strengths", opt.strengths, "true strengths, comma separated");
  }
  cmd->add_option("--length,-T", opt.length, "generated stream length");
  cmd->add_option("--bound-b", opt.bound_b, "clip |y-f| to this bound when generating");
}

StreamSpec build_spec(const StreamOptions& opt, std::uint64_t seed, bool battles) {
  StreamSpec spec;
  spec.length = opt.length;
  spec.seed = seed;
  if (battles) {
    spec.kind = StreamKind::bradley_terry;
    spec.num_models = opt.models;
    spec.strengths = parse_list(opt.strengths);
    return spec;
  }
  if (opt.kind == "iid-gaussian")
    spec.kind = StreamKind::iid_gaussian;
  else if (opt.kind == "piecewise-shift")
    spec.kind = StreamKind::piecewise_shift;
  else if (opt.kind == "drifting-mean")
    spec.kind = StreamKind::drifting_mean;
  else if (opt.kind == "bernoulli-calibrated")
    spec.kind = StreamKind::bernoulli_calibrated;
  else
    throw ConfigError("unknown generator kind '" + opt.kind + "'");
  spec.mu = opt.mu;
  spec.sigma = opt.sigma;
  spec.drift_rate = opt.drift_rate;
  spec.p_lo = opt.p_lo;
  spec.p_hi = opt.p_hi;
  if (!opt.segments.empty()) {
    std::stringstream ss(opt.segments);
    std::string item;
    while (std::getline(ss, item, ',')) {
      auto p1 = item.find(':');
      auto p2 = item.find(':', p1 + 1);
      if (p1 == std::string::npos || p2 == std::string::npos)
        throw ConfigError("bad segment '" + item + "', expected len:mu:sigma");
      Segment seg;
      seg.length = static_cast<std::size_t>(std::stoull(item.substr(0, p1)));
      seg.mu = parse_double(item.substr(p1 + 1, p2 - p1 - 1), 0);
      seg.sigma = parse_double(item.substr(p2 + 1), 0);
      spec.segments.push_back(seg);
    }
  }
  if (opt.group_mode == "disjoint")
    spec.groups.kind = GroupingKind::disjoint;
  else if (opt.group_mode == "overlapping")
    spec.groups.kind = GroupingKind::overlapping;
  else if (opt.group_mode != "none")
    throw ConfigError("unknown group mode '" + opt.group_mode + "'");
  if (spec.groups.kind != GroupingKind::none) {
    spec.groups.weights = parse_list(opt.group_weights);
    if (spec.groups.weights.empty())
      throw ConfigError("--group-weights required with --group-mode");
    if (!opt.group_offsets.empty()) spec.group_offsets = parse_list(opt.group_offsets);
  }
  if (opt.bound_b > 0.0) spec.bound_b = opt.bound_b;
  return spec;
}

Stream resolve_stream(const StreamOptions& opt, std::uint64_t seed, IngestSchema schema,
                      std::vector<std::string>* warnings) {
  Stream stream;
  if (!opt.input.empty()) {
    std::ifstream in(opt.input);
    if (!in) throw ConfigError("cannot open input file '" + opt.input + "'");
    stream = ingest_csv(in, schema, warnings);
    if (opt.disjoint_flag) {
      for (std::size_t t = 0; t < stream.size(); ++t) {
        double s = 0.0;
        for (double z : stream.records[t].z) s += z;
        if (s != 1.0)
          throw std::runtime_error("groups declared disjoint but row " +
                                   std::to_string(t + 2) + " violates it");
      }
      stream.disjoint_declared = true;
    }
  } else {
    stream = generate(build_spec(opt, seed, schema == IngestSchema::battles));
  }
  if (opt.feature_scale != 1.0)
    for (auto& rec : stream.records)
      for (double& z : rec.z) z *= opt.feature_scale;
  return stream;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output dir '" + dir + "'");
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
}

json base_summary(const std::string& command, std::uint64_t seed, const json& params) {
  json j;
  j["command"] = command;
  j["seed"] = seed;
  j["version"] = kVersion;
  j["params"] = params;
  return j;
}

void finish_summary(json& j, const std::string& dir,
                    std::chrono::steady_clock::time_point start,
                    const std::vector<std::string>& warnings) {
  auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start);
  j["runtime_sec"] = elapsed.count();
  if (!warnings.empty()) j["warnings"] = warnings;
  write_file(dir + "/summary.json", j.dump(2) + "\n");
}

// ---------------------------------------------------------------- commands

struct CommonOptions {
  std::string output_dir = ".";
  std::uint64_t seed = 1;
  std::size_t repeat = 1;
  bool parallel = false;
};

int run_simulate(const StreamOptions& sopt, const CommonOptions& copt, bool battles,
                 const std::string& out_name) {
  auto start = std::chrono::steady_clock::now();
  ensure_dir(copt.output_dir);
  Stream stream = generate(build_spec(sopt, copt.seed, battles));
  std::ostringstream os;
  if (battles)
    write_battles_csv(os, stream);
  else
    write_stream_csv(os, stream);
  std::string path = copt.output_dir + "/" + out_name;
  write_file(path, os.str());
  json j = base_summary("simulate", copt.seed,
                        {{"kind", battles ? "bradley-terry" : sopt.kind},
                         {"length", sopt.length},
                         {"output", path}});
  finish_summary(j, copt.output_dir, start, {});
  return 0;
}

int run_debias(const StreamOptions& sopt, const CommonOptions& copt,
               const std::string& kind, double eta, double b, double delta,
               double epsilon) {
  auto start = std::chrono::steady_clock::now();
  ensure_dir(copt.output_dir);
  bool classification = kind == "classification";
  if (!classification && kind != "regression")
    throw ConfigError("--kind must be regression or classification");
  std::vector<std::string> warnings;
  Stream stream = resolve_stream(
      sopt, copt.seed,
      classification ? IngestSchema::classification : IngestSchema::regression,
      &warnings);

  PipelineResult res = classification ? debias_classification(stream, eta, epsilon)
                                      : debias_regression(stream, eta, b, delta);
  if (res.guarantee_void)
    warnings.push_back("eta exceeds the delta-admissible range; bound guarantee void");

  std::ostringstream metrics;
  write_debias_metrics(metrics, stream, res, classification);
  write_file(copt.output_dir + "/metrics.csv", metrics.str());

  json j = base_summary("debias", copt.seed,
                        {{"kind", kind},
                         {"eta", eta},
                         {"b", b},
                         {"delta", delta},
                         {"epsilon", epsilon},
                         {"T", stream.size()}});
  j["final_bias"] = res.report.prefix_avg_grad_norm.empty()
                        ? 0.0
                        : res.report.prefix_avg_grad_norm.back();
  j["final_bound"] = res.report.bound_series ? res.report.bound_series->back() : 0.0;
  j["bound_satisfaction_fraction"] = res.report.bound_satisfaction_fraction();
  finish_summary(j, copt.output_dir, start, warnings);
  return 0;
}

int run_multigroup(const StreamOptions& sopt, const CommonOptions& copt,
                   const std::string& kind, const std::string& penalty, double eta,
                   double b, double delta, double epsilon, const std::string& lambda_str,
                   double c) {
  auto start = std::chrono::steady_clock::now();
  ensure_dir(copt.output_dir);
  bool classification = kind == "classification";
  if (!classification && kind != "regression")
    throw ConfigError("--kind must be regression or classification");
  std::vector<std::string> warnings;
  Stream stream = resolve_stream(
      sopt, copt.seed,
      classification ? IngestSchema::classification : IngestSchema::regression,
      &warnings);
  if (stream.group_labels.empty())
    throw ConfigError("multigroup needs group:* columns or --group-mode");

  json j = base_summary("multigroup", copt.seed,
                        {{"kind", kind},
                         {"penalty", penalty},
                         {"eta", eta},
                         {"b", b},
                         {"delta", delta},
                         {"epsilon", epsilon},
                         {"lambda", lambda_str},
                         {"c", c},
                         {"T", stream.size()}});

  if (penalty == "none") {
    MultigroupResult res = classification
                               ? multigroup_classification(stream, eta, epsilon)
                               : multigroup_regression(stream, eta, b, delta);
    if (res.base.guarantee_void)
      warnings.push_back("eta exceeds the delta-admissible range; bound guarantee void");
    std::ostringstream metrics, groups;
    write_multigroup_metrics(metrics, stream, res, classification);
    write_group_reports_csv(groups, res);
    write_file(copt.output_dir + "/metrics.csv", metrics.str());
    write_file(copt.output_dir + "/groups.csv", groups.str());
    j["final_marginal_bias"] = res.marginal_bias.empty() ? 0.0 : res.marginal_bias.back();
    json jg = json::array();
    for (const auto& gr : res.groups) {
      json g;
      g["label"] = gr.label;
      g["count"] = gr.count;
      if (!gr.is_null()) {
        g["final_bias"] = gr.final_bias();
        if (gr.bound_series) {
          g["final_bound"] = gr.bound_series->back();
          g["bound_meaningful"] = gr.bound_meaningful;
        }
      }
      jg.push_back(g);
    }
    j["groups"] = jg;
  } else if (penalty == "ridge" || penalty == "lasso") {
    double T = static_cast<double>(stream.size());
    double lambda;
    if (lambda_str == "auto")
      lambda = penalty == "ridge" ? 1.0 / T : 1.0 / std::sqrt(T);
    else
      lambda = parse_double(lambda_str, 0);
    DecorrelateResult res;
    if (penalty == "ridge") {
      if (classification) throw ConfigError("ridge penalty pairs with regression");
      res = decorrelate_ridge(stream, eta, lambda, b, c);
    } else {
      if (!classification) throw ConfigError("lasso penalty pairs with classification");
      res = decorrelate_lasso_logistic(stream, eta, lambda, c);
    }
    std::ostringstream metrics;
    write_decorrelate_metrics(metrics, stream, res, classification);
    write_file(copt.output_dir + "/metrics.csv", metrics.str());
    j["lambda_value"] = lambda;
    j["final_covariance_norm"] = res.covariance_series.back();
    j["final_bound"] = res.bound_series.back();
    std::size_t sat = 0;
    for (bool s : res.satisfied) sat += s ? 1 : 0;
    j["bound_satisfaction_fraction"] =
        static_cast<double>(sat) / static_cast<double>(res.satisfied.size());
    std::vector<Vec> zs;
    for (const auto& rec : stream.records) zs.push_back(rec.z);
    j["multiaccuracy_sup_cap1"] = multiaccuracy_sup(res.residuals, zs, 1.0);
  } else {
    throw ConfigError("--penalty must be none, ridge, or lasso");
  }
  finish_summary(j, copt.output_dir, start, warnings);
  return 0;
}

int run_track_quantile(const StreamOptions& sopt, const CommonOptions& copt, double tau,
                       double eta, double b) {
  auto start = std::chrono::steady_clock::now();
  ensure_dir(copt.output_dir);
  std::vector<std::string> warnings;
  Stream stream = resolve_stream(sopt, copt.seed, IngestSchema::regression, &warnings);
  auto res = quantile_track(stream, tau, eta, b);
  std::ostringstream metrics;
  write_quantile_metrics(metrics, stream, res);
  write_file(copt.output_dir + "/metrics.csv", metrics.str());
  json j = base_summary("track-quantile", copt.seed,
                        {{"tau", tau}, {"eta", eta}, {"b", b}, {"T", stream.size()}});
  j["coverage_gap"] = res.coverage_gap.empty() ? 0.0 : res.coverage_gap.back();
  j["final_bound"] = res.bound_series.empty() ? 0.0 : res.bound_series.back();
  std::size_t sat = 0;
  for (bool s : res.satisfied) sat += s ? 1 : 0;
  j["bound_satisfaction_fraction"] =
      res.satisfied.empty()
          ? 1.0
          : static_cast<double>(sat) / static_cast<double>(res.satisfied.size());
  j["quantile_loss"] = res.quantile_loss_sum;
  finish_summary(j, copt.output_dir, start, warnings);
  return 0;
}

int run_ensemble(const StreamOptions& sopt, const CommonOptions& copt, double tau,
                 const std::string& rates_str, double ens_rate) {
  auto start = std::chrono::steady_clock::now();
  ensure_dir(copt.output_dir);
  auto rates = parse_list(rates_str);
  if (rates.empty()) throw ConfigError("--rates must list at least one learning rate");
  std::vector<std::string> warnings;
  Stream stream = resolve_stream(sopt, copt.seed, IngestSchema::regression, &warnings);
  auto res = quantile_ensemble(stream, tau, rates, ens_rate);
  std::ostringstream metrics;
  write_ensemble_metrics(metrics, stream, res);
  write_file(copt.output_dir + "/metrics.csv", metrics.str());
  json j = base_summary("ensemble", copt.seed,
                        {{"tau", tau},
                         {"rates", rates},
                         {"ens_rate", ens_rate},
                         {"T", stream.size()}});
  j["coverage_gap"] = res.coverage_gap.empty() ? 0.0 : res.coverage_gap.back();
  j["quantile_loss"] = res.quantile_loss_sum;
  json experts = json::array();
  for (std::size_t k = 0; k < rates.size(); ++k) {
    json e;
    e["rate"] = rates[k];
    e["loss"] = res.expert_loss_sum[k];
    e["coverage"] = stream.size() == 0
                        ? 0.0
                        : static_cast<double>(res.expert_coverage_count[k]) /
                              static_cast<double>(stream.size());
    experts.push_back(e);
  }
  j["experts"] = experts;
  finish_summary(j, copt.output_dir, start, warnings);
  return 0;
}

int run_elo(const StreamOptions& sopt, const CommonOptions& copt, std::size_t models,
            double eta, double lambda, double alpha) {
  auto start = std::chrono::steady_clock::now();
  ensure_dir(copt.output_dir);
  std::vector<std::string> warnings;
  Stream stream = resolve_stream(sopt, copt.seed, IngestSchema::battles, &warnings);
  std::size_t M = models;
  for (std::size_t t = 0; t < stream.size(); ++t) {
    const auto& rec = stream.records[t];
    std::size_t hi =
        std::max(static_cast<std::size_t>(rec.model_a), static_cast<std::size_t>(rec.model_b)) + 1;
    if (models > 0 && hi > models)
      throw std::runtime_error("elo: competitor id beyond --num-models at battle " +
                               std::to_string(t + 1));
    M = std::max(M, hi);
  }
  StepSchedule sched =
      alpha > 0.0 ? StepSchedule::polynomial(eta, alpha) : StepSchedule::constant(eta);
  auto res = elo_run(stream.records, M, sched, lambda);
  std::ostringstream metrics, table;
  write_elo_metrics(metrics, res);
  write_elo_table_csv(table, res.table);
  write_file(copt.output_dir + "/metrics.csv", metrics.str());
  write_file(copt.output_dir + "/elo.csv", table.str());
  json j = base_summary("elo", copt.seed,
                        {{"models", M},
                         {"eta", eta},
                         {"lambda", lambda},
                         {"alpha", alpha},
                         {"T", stream.size()}});
  double max_bias = 0.0;
  for (std::size_t m = 0; m < M; ++m)
    if (auto bias = res.table.signed_bias(m))
      max_bias = std::max(max_bias, std::fabs(*bias));
  j["max_signed_bias"] = max_bias;
  j["scores"] = res.table.scores;
  finish_summary(j, copt.output_dir, start, warnings);
  return 0;
}

int run_diagnose(const StreamOptions& sopt, const CommonOptions& copt,
                 const std::string& loss_kind, double tau, double eta,
                 const std::string& schedule_str, const std::string& identity,
                 double theta1) {
  auto start = std::chrono::steady_clock::now();
  ensure_dir(copt.output_dir);
  std::vector<std::string> warnings;
  Stream stream = resolve_stream(sopt, copt.seed, IngestSchema::regression, &warnings);

  std::vector<LossInstance> losses;
  losses.reserve(stream.size());
  for (const auto& rec : stream.records) {
    if (loss_kind == "squared")
      losses.push_back(LossInstance::squared(rec.y, rec.f));
    else if (loss_kind == "quantile")
      losses.push_back(LossInstance::quantile(tau, rec.y, rec.f));
    else if (loss_kind == "logistic")
      losses.push_back(LossInstance::gen_logistic(-1.0, 1.0, rec.y, rec.f));
    else
      throw ConfigError("--loss must be squared, quantile, or logistic");
  }

  LearnerState cfg;
  cfg.theta = {theta1};
  if (schedule_str.rfind("poly:", 0) == 0) {
    auto rest = schedule_str.substr(5);
    auto p = rest.find(':');
    if (p == std::string::npos) throw ConfigError("--schedule poly:c:alpha");
    cfg.schedule = StepSchedule::polynomial(parse_double(rest.substr(0, p), 0),
                                            parse_double(rest.substr(p + 1), 0));
  } else {
    cfg.schedule = StepSchedule::constant(eta);
  }

  auto traj = run_stream(losses, cfg);
  auto rep = avg_gradient(traj);
  if (identity == "constant")
    rep.identity_residual = identity_constant_step(traj);
  else if (identity == "decaying")
    rep.identity_residual = identity_decaying_step(traj);
  else if (identity == "pmd")
    rep.identity_residual = identity_pmd(traj);
  else if (identity != "none")
    throw ConfigError("--identity must be constant, decaying, pmd, or none");

  std::ostringstream report, trajcsv;
  write_report_csv(report, rep);
  write_trajectory_csv(trajcsv, traj);
  write_file(copt.output_dir + "/report.csv", report.str());
  write_file(copt.output_dir + "/trajectory.csv", trajcsv.str());

  json j = base_summary("diagnose", copt.seed,
                        {{"loss", loss_kind},
                         {"tau", tau},
                         {"eta", eta},
                         {"schedule", schedule_str},
                         {"identity", identity},
                         {"T", stream.size()}});
  j["final_avg_grad_norm"] =
      rep.prefix_avg_grad_norm.empty() ? 0.0 : rep.prefix_avg_grad_norm.back();
  double max_resid = 0.0;
  for (double r : rep.identity_residual) max_resid = std::max(max_resid, r);
  j["max_identity_residual"] = max_resid;
  finish_summary(j, copt.output_dir, start, warnings);
  return 0;
}

int run_counterexample(const CommonOptions& copt, const std::string& name,
                       std::size_t T, double c, double a, double b, std::size_t n,
                       std::size_t m, std::size_t reps, double eta, double L,
                       const std::string& ys) {
  auto start = std::chrono::steady_clock::now();
  ensure_dir(copt.output_dir);
  double eff_eta = eta > 0.0 ? eta : (name == "spiral" ? 0.1 : 1.0);
  Construction cx;
  if (name == "nr-not-geq-abs")
    cx = nr_not_geq_abs(T);
  else if (name == "geq-not-nr-abs")
    cx = geq_not_nr_abs(T, c);
  else if (name == "nr-not-geq-squared")
    cx = nr_not_geq_squared(a, b, n, m, reps);
  else if (name == "zero-regret-bias")
    cx = zero_regret_bias(parse_list(ys));
  else if (name == "spiral")
    cx = spiral_zero_curvature(eff_eta, L, T);
  else
    throw ConfigError("unknown counterexample '" + name + "'");

  auto traj = construction_trajectory(cx, eff_eta);
  std::ostringstream trajcsv;
  write_trajectory_csv(trajcsv, traj);
  write_file(copt.output_dir + "/trajectory.csv", trajcsv.str());

  json j = base_summary("counterexample", copt.seed, {{"name", name}});
  json measured, analytic;
  if (!cx.thetas.empty()) {
    measured["avg_gradient"] = norm2(measured_avg_gradient(cx));
    measured["avg_loss_scaled"] = measured_avg_loss(cx);
    auto rep = regret(traj, cx.losses);
    measured["avg_regret"] = cx.loss_scale * rep.avg_regret;
  }
  if (cx.analytic.avg_grad_norm) analytic["avg_gradient"] = *cx.analytic.avg_grad_norm;
  if (cx.analytic.avg_regret) analytic["avg_regret"] = *cx.analytic.avg_regret;
  if (cx.analytic.avg_loss) analytic["avg_loss"] = *cx.analytic.avg_loss;
  if (cx.analytic.bias) analytic["bias"] = *cx.analytic.bias;
  if (cx.analytic.oracle_loss) analytic["oracle_loss"] = *cx.analytic.oracle_loss;
  if (cx.analytic.final_sq_norm) analytic["final_sq_norm"] = *cx.analytic.final_sq_norm;
  j["measured"] = measured;
  j["analytic"] = analytic;
  finish_summary(j, copt.output_dir, start, {});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gradient-equilibrium toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  CommonOptions copt;
  app.add_option("--output-dir,-o", copt.output_dir, "output directory");
  app.add_option("--seed", copt.seed, "generator seed (env GEQ_SEED overrides)");
  app.add_option("--repeat", copt.repeat, "run N independent seeds");
  app.add_flag("--parallel", copt.parallel, "run repeats concurrently");

  // simulate
  auto* sim = app.add_subcommand("simulate", "generate a synthetic stream CSV");
  StreamOptions sim_opt;
  bool sim_battles = false;
  std::string sim_out;
  add_stream_options(sim, sim_opt);
  sim->add_flag("--battles", sim_battles, "generate a bradley-terry battle file");
  sim->add_option("--models", sim_opt.models, "number of competitors (battles)");
  sim->add_option("--strengths", sim_opt.strengths, "true strengths (battles)");
  sim->add_option("--out", sim_out, "output file name");

  // debias
  auto* deb = app.add_subcommand("debias", "simple debiasing of base predictions");
  StreamOptions deb_opt;
  std::string deb_kind = "regression";
  double deb_eta = 0.05, deb_b = 1.0, deb_delta = 0.2, deb_eps = 0.1;
  add_stream_options(deb, deb_opt);
  deb->add_option("--kind", deb_kind, "regression|classification");
  deb->add_option("--eta", deb_eta, "learning rate");
  deb->add_option("--b", deb_b, "residual magnitude bound");
  deb->add_option("--delta", deb_delta, "squared-loss admissibility margin");
  deb->add_option("--epsilon", deb_eps, "probability clipping margin");

  // multigroup
  auto* mg = app.add_subcommand("multigroup", "multigroup debiasing / decorrelation");
  StreamOptions mg_opt;
  std::string mg_kind = "regression", mg_penalty = "none", mg_lambda = "auto";
  double mg_eta = 0.05, mg_b = 1.0, mg_delta = 0.2, mg_eps = 0.1, mg_c = 1.0;
  add_stream_options(mg, mg_opt);
  mg->add_option("--kind", mg_kind, "regression|classification");
  mg->add_option("--penalty", mg_penalty, "none|ridge|lasso");
  mg->add_option("--lambda", mg_lambda,
                 "penalty strength or 'auto' (1/T ridge, 1/sqrt(T) lasso)");
  mg->add_option("--eta", mg_eta, "learning rate");
  mg->add_option("--b", mg_b, "residual magnitude bound");
  mg->add_option("--delta", mg_delta, "squared-loss admissibility margin");
  mg->add_option("--epsilon", mg_eps, "probability clipping margin");
  mg->add_option("--c", mg_c, "feature norm bound");

  // track-quantile
  auto* tq = app.add_subcommand("track-quantile", "online quantile tracking");
  StreamOptions tq_opt;
  double tq_tau = 0.9, tq_eta = 0.05, tq_b = 1.0;
  add_stream_options(tq, tq_opt);
  tq->add_option("--tau", tq_tau, "quantile level");
  tq->add_option("--eta", tq_eta, "learning rate");
  tq->add_option("--b", tq_b, "score magnitude bound");

  // ensemble
  auto* ens = app.add_subcommand("ensemble", "quantile tracker ensembling");
  StreamOptions ens_opt;
  double ens_tau = 0.9, ens_rate = 0.5;
  std::string ens_rates = "0.01,0.05,0.5";
  add_stream_options(ens, ens_opt);
  ens->add_option("--tau", ens_tau, "quantile level");
  ens->add_option("--rates", ens_rates, "expert learning rates, comma separated");
  ens->add_option("--ens-rate", ens_rate, "ensemble (weight) learning rate");

  // elo
  auto* elo = app.add_subcommand("elo", "online Elo scores over battles");
  StreamOptions elo_opt;
  std::size_t elo_models = 0;
  double elo_eta = 0.05, elo_lambda = 0.0, elo_alpha = 0.0;
  add_stream_options(elo, elo_opt, true);
  elo->add_option("--eta", elo_eta, "learning rate");
  elo->add_option("--lambda", elo_lambda, "optional lasso strength");
  elo->add_option("--alpha", elo_alpha, "decay exponent (eta_t = eta t^-alpha)");
  elo->add_option("--num-models", elo_models, "competitor count override");

  // diagnose
  auto* diag = app.add_subcommand("diagnose", "descent run + equilibrium report");
  StreamOptions diag_opt;
  std::string diag_loss = "squared", diag_sched = "", diag_identity = "constant";
  double diag_tau = 0.5, diag_eta = 0.1, diag_theta1 = 0.0;
  add_stream_options(diag, diag_opt);
  diag->add_option("--loss", diag_loss, "squared|quantile|logistic");
  diag->add_option("--tau", diag_tau, "quantile level");
  diag->add_option("--eta", diag_eta, "constant learning rate");
  diag->add_option("--schedule", diag_sched, "poly:c:alpha for decaying steps");
  diag->add_option("--identity", diag_identity, "constant|decaying|pmd|none");
  diag->add_option("--theta1", diag_theta1, "initial parameter");

  // counterexample
  auto* cex = app.add_subcommand("counterexample", "analytic NR/GEQ constructions");
  std::string cex_name = "nr-not-geq-abs", cex_ys = "0,2";
  std::size_t cex_T = 100, cex_n = 2, cex_m = 1, cex_reps = 10;
  double cex_c = 1.0, cex_a = -1.0, cex_b = 2.0, cex_eta = 0.0, cex_L = 1.0;
  cex->add_option("--name", cex_name,
                  "nr-not-geq-abs|geq-not-nr-abs|nr-not-geq-squared|"
                  "zero-regret-bias|spiral");
  cex->add_option("-T,--T", cex_T, "sequence length");
  cex->add_option("--c", cex_c, "alternation magnitude");
  cex->add_option("--a", cex_a, "pattern value a");
  cex->add_option("--b", cex_b, "pattern value b");
  cex->add_option("--n", cex_n, "a-block length");
  cex->add_option("--m", cex_m, "b-block length");
  cex->add_option("--reps", cex_reps, "pattern repetitions");
  cex->add_option("--eta", cex_eta, "step size (spiral)");
  cex->add_option("--L", cex_L, "gradient norm (spiral)");
  cex->add_option("--y", cex_ys, "data sequence (zero-regret-bias)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (const char* env = std::getenv("GEQ_SEED")) {
    try {
      copt.seed = std::stoull(env);
    } catch (...) {
      std::cerr << "error: GEQ_SEED is not an integer\n";
      return 2;
    }
  }

  auto dispatch = [&](const CommonOptions& c) -> int {
    if (sim->parsed()) {
      std::string out = sim_out.empty() ? (sim_battles ? "battles.csv" : "stream.csv")
                                        : sim_out;
      return run_simulate(sim_opt, c, sim_battles, out);
    }
    if (deb->parsed())
      return run_debias(deb_opt, c, deb_kind, deb_eta, deb_b, deb_delta, deb_eps);
    if (mg->parsed())
      return run_multigroup(mg_opt, c, mg_kind, mg_penalty, mg_eta, mg_b, mg_delta,
                            mg_eps, mg_lambda, mg_c);
    if (tq->parsed()) return run_track_quantile(tq_opt, c, tq_tau, tq_eta, tq_b);
    if (ens->parsed()) return run_ensemble(ens_opt, c, ens_tau, ens_rates, ens_rate);
    if (elo->parsed())
      return run_elo(elo_opt, c, elo_models, elo_eta, elo_lambda, elo_alpha);
    if (diag->parsed())
      return run_diagnose(diag_opt, c, diag_loss, diag_tau, diag_eta, diag_sched,
                          diag_identity, diag_theta1);
    if (cex->parsed())
      return run_counterexample(c, cex_name, cex_T, cex_c, cex_a, cex_b, cex_n, cex_m,
                                cex_reps, cex_eta, cex_L, cex_ys);
    return 2;
  };

  try {
    if (copt.repeat <= 1) return dispatch(copt);

    std::vector<int> codes(copt.repeat, 0);
    std::vector<std::string> errors(copt.repeat);
    auto one = [&](std::size_t i) {
      CommonOptions c = copt;
      c.seed = copt.seed + i;
      c.output_dir = copt.output_dir + "/run_" + std::to_string(i);
      try {
        codes[i] = dispatch(c);
      } catch (const ConfigError& e) {
        errors[i] = e.what();
        codes[i] = 2;
      } catch (const std::exception& e) {
        errors[i] = e.what();
        codes[i] = 3;
      }
    };
    if (copt.parallel) {
      std::vector<std::thread> threads;
      for (std::size_t i = 0; i < copt.repeat; ++i) threads.emplace_back(one, i);
      for (auto& t : threads) t.join();
    } else {
      for (std::size_t i = 0; i < copt.repeat; ++i) one(i);
    }
    int rc = 0;
    for (std::size_t i = 0; i < copt.repeat; ++i) {
      if (codes[i] != 0) {
        std::cerr << "run " << i << " failed: " << errors[i] << "\n";
        rc = std::max(rc, codes[i]);
      }
    }
    return rc;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
