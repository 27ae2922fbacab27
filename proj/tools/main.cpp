#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mklab/csv.hpp"
#include "mklab/experiments.hpp"
#include "mklab/koranyi.hpp"
#include "mklab/model_config.hpp"
#include "mklab/parallel.hpp"
#include "mklab/sha256.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mklab;

namespace {

constexpr const char* kVersion = "metric-knn-lab 0.1.0";

struct ExperimentInfo {
  const char* name;
  const char* description;
};

// Stable ordering; `list` prints exactly this.
const std::vector<ExperimentInfo> kExperiments = {
    {"weak-consistency", "k-NN test error vs Bayes error over an n-grid"},
    {"strong-path", "error sequence of one growing labelled sample path"},
    {"prop12", "tie-breaking counterexample checkpoints (Dirac problem)"},
    {"lb-check", "Lebesgue-Besicovitch deviation measure over a radius grid"},
    {"dgkl-sweep", "D-set measure vs the 4a(-ln a + 1) bound over an alpha grid"},
    {"concentration", "conditional deviation tails vs the concentration bound"},
    {"koranyi", "Koranyi-Reimann disconnected ball family in the Heisenberg group"},
};

// Accepts "a,b,c" and the power form "2^-3..2^-10".
std::vector<double> parse_real_grid(const std::string& text) {
  std::vector<double> out;
  auto parse_one = [](const std::string& tok) -> double {
    if (tok.rfind("2^", 0) == 0) return std::ldexp(1.0, std::stoi(tok.substr(2)));
    return std::stod(tok);
  };
  auto range = text.find("..");
  if (range != std::string::npos && text.rfind("2^", 0) == 0) {
    int from = std::stoi(text.substr(2, range - 2));
    std::string rest = text.substr(range + 2);
    if (rest.rfind("2^", 0) != 0) throw CLI::ValidationError("grid", "expected 2^a..2^b");
    int to = std::stoi(rest.substr(2));
    int step = to >= from ? 1 : -1;
    for (int e = from;; e += step) {
      out.push_back(std::ldexp(1.0, e));
      if (e == to) break;
    }
    return out;
  }
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(parse_one(tok));
  }
  return out;
}

std::vector<std::int64_t> parse_int_grid(const std::string& text) {
  std::vector<std::int64_t> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(std::stoll(tok));
  }
  return out;
}

json model_shorthand(const std::string& name) {
  if (name == "nested") return {{"kind", "nested"}};
  if (name == "cantor") return {{"kind", "cantor"}};
  if (name == "uniform1") return {{"kind", "uniform_cube"}, {"dim", 1}};
  if (name == "uniform2") return {{"kind", "uniform_cube"}, {"dim", 2}};
  if (name == "mixture") {
    return {{"kind", "gaussian_mixture"},
            {"mean0", {-1.0, 0.0}},
            {"mean1", {1.0, 0.0}},
            {"sigma", 1.0}};
  }
  if (name == "dirac") return {{"kind", "dirac"}, {"point", {0.0}}};
  if (name == "heisenberg") return {{"kind", "heisenberg_cube"}};
  throw CLI::ValidationError("--model", "unknown model shorthand: " + name);
}

TieBreakPolicy parse_policy(const std::string& name) {
  if (name == "index") return TieBreakPolicy::ByIndex;
  if (name == "uniform") return TieBreakPolicy::UniformRandom;
  if (name == "dgkl") return TieBreakPolicy::Dgkl;
  throw CLI::ValidationError("--policy", "expected index|uniform|dgkl");
}

Schedule parse_schedule(const std::string& name, int prop12_horizon) {
  if (name == "sqrt") return sqrt_schedule();
  if (name == "log") return log_schedule();
  if (name == "prop12") {
    return CounterexampleSchedule::build(std::max(3, prop12_horizon)).as_schedule();
  }
  throw CLI::ValidationError("--schedule", "expected sqrt|log|prop12");
}

void write_manifest(const fs::path& path, const std::string& experiment,
                    std::uint64_t seed, const json& resolved,
                    const std::vector<std::string>& columns, std::size_t rows) {
  json m;
  m["experiment"] = experiment;
  m["seed"] = seed;
  m["version"] = kVersion;
  m["config"] = resolved;
  m["config_hash"] = sha256_hex(resolved.dump());
  m["columns"] = columns;
  m["rows"] = rows;
  std::ofstream os(path);
  os << m.dump(2) << "\n";
}

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string outdir;
  std::optional<int> threads;  // absent: config, then METRIC_KNN_LAB_THREADS
  std::string model;
  std::string eta_name;
  double eta_value = std::nan("");
};

json load_config(const CommonArgs& args) {
  json cfg = json::object();
  if (!args.config_path.empty()) {
    std::ifstream is(args.config_path);
    if (!is) throw std::runtime_error("cannot read config: " + args.config_path);
    is >> cfg;
  }
  // Flags override config fields.
  if (args.seed) cfg["seed"] = *args.seed;
  if (!args.outdir.empty()) cfg["outdir"] = args.outdir;
  if (args.threads) {
    cfg["threads"] = *args.threads;
  } else if (!cfg.contains("threads")) {
    cfg["threads"] = 0;  // resolve_threads: env var, then hardware
  }
  if (!args.model.empty()) cfg["model"] = model_shorthand(args.model);
  if (cfg.contains("model") && cfg["model"].is_string()) {
    cfg["model"] = model_shorthand(cfg["model"].get<std::string>());
  }
  if (!args.eta_name.empty()) {
    json ej = {{"name", args.eta_name}};
    if (!std::isnan(args.eta_value)) ej["value"] = args.eta_value;
    cfg["eta"] = ej;
  }
  if (!cfg.contains("seed")) {
    throw std::runtime_error("seed is required (pass --seed or set it in the config)");
  }
  return cfg;
}

// Fills in the default model so the resolved config pins everything a re-run
// needs.
json resolve_model(json& cfg, const char* fallback_model) {
  if (!cfg.contains("model")) cfg["model"] = model_shorthand(fallback_model);
  return cfg["model"];
}

LearningProblem problem_from(const json& cfg) {
  json pj;
  pj["model"] = cfg.at("model");
  if (cfg.contains("eta")) pj["eta"] = cfg["eta"];
  return problem_from_json(pj);
}

int run_weak(json cfg, const fs::path& csv_path, const fs::path& manifest_path) {
  json p = cfg.value("params", json::object());
  std::vector<std::int64_t> ns =
      p.contains("ns") ? p["ns"].get<std::vector<std::int64_t>>()
                       : std::vector<std::int64_t>{250, 500, 1000, 2000, 4000};
  int test_size = p.value("test_size", 2000);
  int trials = p.value("trials", 20);
  Schedule schedule = parse_schedule(p.value("schedule", "sqrt"), p.value("horizon", 8));
  TieBreakPolicy policy = parse_policy(p.value("policy", "uniform"));
  std::uint64_t seed = cfg.at("seed").get<std::uint64_t>();
  resolve_model(cfg, "mixture");

  json resolved = cfg;
  resolved["params"] =
      json{{"ns", ns},       {"test_size", test_size},      {"trials", trials},
           {"schedule", schedule.name}, {"policy", p.value("policy", "uniform")}};

  LearningProblem problem = problem_from(cfg);
  if (!cfg.contains("eta") &&
      std::dynamic_pointer_cast<const GaussianMixture2DModel>(problem.model)) {
    problem.eta = eta_from_json({{"name", "mixture_posterior"}}, problem.model);
    problem.eta_name = "mixture_posterior";
  }
  WeakResult res = weak_consistency_run(problem, schedule, ns, test_size, trials, policy,
                                        seed, resolve_threads(cfg.value("threads", 1)));

  std::vector<std::string> columns = {"n", "k", "mean_error", "stderr", "bayes_error"};
  CsvWriter csv(csv_path.string(), columns);
  for (const WeakRow& r : res.rows) {
    csv.field(static_cast<long long>(r.n)).field(r.k).field(r.mean_error)
        .field(r.std_error).field(r.bayes);
    csv.end_row();
  }
  write_manifest(manifest_path, "weak-consistency", seed, resolved, columns,
                 res.rows.size());
  return res.above_bayes ? 0 : 2;
}

int run_strong(json cfg, const fs::path& csv_path, const fs::path& manifest_path) {
  json p = cfg.value("params", json::object());
  std::int64_t n_max = p.value("n_max", 4096);
  int test_size = p.value("test_size", 4000);
  Schedule schedule = parse_schedule(p.value("schedule", "sqrt"), p.value("horizon", 8));
  TieBreakPolicy policy = parse_policy(p.value("policy", "uniform"));
  std::uint64_t seed = cfg.at("seed").get<std::uint64_t>();

  resolve_model(cfg, "uniform1");
  json resolved = cfg;
  resolved["params"] = json{{"n_max", n_max},
                            {"test_size", test_size},
                            {"schedule", schedule.name},
                            {"policy", p.value("policy", "uniform")}};

  LearningProblem problem = problem_from(cfg);
  auto rows = strong_consistency_path(problem, schedule, n_max, policy, seed, test_size);

  std::vector<std::string> columns = {"n", "k", "error"};
  CsvWriter csv(csv_path.string(), columns);
  for (const StrongRow& r : rows) {
    csv.field(static_cast<long long>(r.n)).field(r.k).field(r.error);
    csv.end_row();
  }
  write_manifest(manifest_path, "strong-path", seed, resolved, columns, rows.size());
  return 0;
}

int run_prop12(json cfg, const fs::path& csv_path, const fs::path& manifest_path) {
  json p = cfg.value("params", json::object());
  double prob = p.value("p", std::exp(-1.0));
  int horizon = p.value("horizon", 30);
  int trials = p.value("trials", 10000);
  double eps_start = p.value("eps_start", 0.25);
  std::uint64_t seed = cfg.at("seed").get<std::uint64_t>();

  json resolved = cfg;
  resolved["params"] = json{
      {"p", prob}, {"horizon", horizon}, {"trials", trials}, {"eps_start", eps_start}};

  CounterexampleSchedule schedule = CounterexampleSchedule::build(horizon, eps_start);
  Prop12Result res = prop12_counterexample(prob, schedule, horizon, trials, seed,
                                           resolve_threads(cfg.value("threads", 1)));

  std::vector<std::string> columns = {
      "i",         "k",          "n",        "eps",        "delta",      "band_freq",
      "qualifying", "disjoint",  "wrong_freq", "wrong_prob", "partial_sum"};
  CsvWriter csv(csv_path.string(), columns);
  for (const Prop12Row& r : res.rows) {
    csv.field(r.i).field(r.k).field(r.n).field(r.eps).field(r.delta)
        .field(r.band_freq).field(static_cast<long long>(r.qualifying))
        .field(static_cast<long long>(r.disjoint)).field(r.wrong_freq)
        .field(r.wrong_prob).field(r.partial_sum);
    csv.end_row();
  }
  write_manifest(manifest_path, "prop12", seed, resolved, columns, res.rows.size());
  bool ok = res.all_qualifying_disjoint && res.wrong_freq_within_3sigma &&
            res.partial_sum_exceeds;
  return ok ? 0 : 2;
}

int run_lb_check(json cfg, const fs::path& csv_path, const fs::path& manifest_path) {
  json p = cfg.value("params", json::object());
  std::vector<double> rs = p.contains("rs") ? p["rs"].get<std::vector<double>>()
                                            : parse_real_grid("2^-1..2^-8");
  double epsilon = p.value("epsilon", 0.1);
  int points = p.value("points", 2000);
  std::uint64_t seed = cfg.at("seed").get<std::uint64_t>();

  resolve_model(cfg, "uniform1");
  json resolved = cfg;
  resolved["params"] = json{{"rs", rs}, {"epsilon", epsilon}, {"points", points}};

  LearningProblem problem = problem_from(cfg);
  if (!cfg.contains("eta")) {
    problem.eta = eta_from_json({{"name", "coordinate"}}, problem.model);
    problem.eta_name = "coordinate";
  }
  auto rows = lb_differentiation_check(problem, rs, epsilon, points, seed);

  std::vector<std::string> columns = {"r", "deviation_measure", "stderr"};
  CsvWriter csv(csv_path.string(), columns);
  for (const LbRow& r : rows) {
    csv.field(r.r).field(r.deviation_measure).field(r.std_error);
    csv.end_row();
  }
  write_manifest(manifest_path, "lb-check", seed, resolved, columns, rows.size());
  return 0;
}

int run_dgkl(json cfg, const fs::path& csv_path, const fs::path& manifest_path) {
  json p = cfg.value("params", json::object());
  std::vector<double> alphas = p.contains("alphas")
                                   ? p["alphas"].get<std::vector<double>>()
                                   : parse_real_grid("2^-3..2^-10");
  int points = p.value("points", 20);
  int mc_samples = p.value("mc_samples", 100000);
  std::uint64_t seed = cfg.at("seed").get<std::uint64_t>();

  resolve_model(cfg, "nested");
  json resolved = cfg;
  resolved["params"] =
      json{{"alphas", alphas}, {"points", points}, {"mc_samples", mc_samples}};

  ModelPtr model = model_from_json(cfg["model"]);
  DgklResult res = dgkl_bound_sweep(*model, alphas, points, mc_samples, seed,
                                    resolve_threads(cfg.value("threads", 1)));

  std::vector<std::string> columns = {"alpha",    "point",         "d_measure",
                                      "stderr",   "bound_4a",      "exact_d3alpha",
                                      "exact_lower", "violates"};
  CsvWriter csv(csv_path.string(), columns);
  for (const DgklRow& r : res.rows) {
    csv.field(r.alpha).field(r.point_index).field(r.d_measure).field(r.std_error)
        .field(r.bound_4a)
        .field(r.has_exact ? format_real(r.exact_d3alpha) : std::string())
        .field(r.has_exact ? format_real(r.exact_lower) : std::string())
        .field(r.violates ? 1 : 0);
    csv.end_row();
  }
  write_manifest(manifest_path, "dgkl-sweep", seed, resolved, columns, res.rows.size());
  return res.bound_ok ? 0 : 2;
}

int run_concentration(json cfg, const fs::path& csv_path,
                      const fs::path& manifest_path) {
  json p = cfg.value("params", json::object());
  std::int64_t n = p.value("n", 2000);
  int k = p.value("k", 44);
  int trials = p.value("trials", 200);
  int beta = p.value("beta", 1);
  int test_points = p.value("test_points", 400);
  std::vector<double> epsilons = p.contains("epsilons")
                                     ? p["epsilons"].get<std::vector<double>>()
                                     : std::vector<double>{0.1, 0.2, 0.3};
  std::uint64_t seed = cfg.at("seed").get<std::uint64_t>();

  resolve_model(cfg, "uniform1");
  json resolved = cfg;
  resolved["params"] = json{{"n", n},           {"k", k},
                            {"trials", trials},  {"beta", beta},
                            {"test_points", test_points}, {"epsilons", epsilons}};

  LearningProblem problem = problem_from(cfg);
  RegionSpec region{"full", [](const Point&) { return true; }, 1.0};
  if (p.contains("region_interval")) {
    auto iv = p["region_interval"].get<std::vector<double>>();
    if (iv.size() != 2) throw std::runtime_error("region_interval: expected [a,b]");
    region = RegionSpec{"interval",
                        [iv](const Point& q) {
                          double v = std::get<EuclideanPoint>(q).coords.at(0);
                          return v >= iv[0] && v <= iv[1];
                        },
                        iv[1] - iv[0]};
  }

  ConcentrationResult res =
      deviation_concentration(problem, region, n, k, trials, epsilons, beta, seed,
                              resolve_threads(cfg.value("threads", 1)), test_points);

  std::vector<std::string> columns = {"epsilon", "empirical_tail", "stderr",
                                      "bound",   "vacuous",        "pass"};
  CsvWriter csv(csv_path.string(), columns);
  for (const ConcentrationRow& r : res.rows) {
    csv.field(r.epsilon).field(r.empirical_tail).field(r.std_error).field(r.bound)
        .field(r.vacuous ? 1 : 0).field(r.pass ? 1 : 0);
    csv.end_row();
  }
  write_manifest(manifest_path, "concentration", seed, resolved, columns,
                 res.rows.size());
  return res.all_pass ? 0 : 2;
}

int run_koranyi(json cfg, const fs::path& csv_path, const fs::path& manifest_path) {
  json p = cfg.value("params", json::object());
  int count = p.value("count", 20);
  double shrink = p.value("shrink", 0.5);
  std::uint64_t seed = cfg.at("seed").get<std::uint64_t>();

  json resolved = cfg;
  resolved["params"] = json{{"count", count}, {"shrink", shrink}};

  KoranyiFamily fam = koranyi_reimann_family(count, shrink);

  std::vector<std::string> columns = {"j", "psi", "theta", "px", "py", "pz", "r"};
  CsvWriter csv(csv_path.string(), columns);
  for (const KoranyiEntry& e : fam.report.entries) {
    csv.field(e.j).field(e.psi).field(e.theta).field(e.p.x).field(e.p.y).field(e.p.z)
        .field(e.r);
    csv.end_row();
  }
  fs::path report_path = csv_path;
  report_path.replace_extension(".report.json");
  {
    std::ofstream os(report_path);
    os << fam.report.to_json() << "\n";
  }
  write_manifest(manifest_path, "koranyi", seed, resolved, columns,
                 fam.report.entries.size());
  bool ok = is_disconnected_family(fam.family) &&
            multiplicity_at(fam.family, Point{HeisPoint{0, 0, 0}}) == count;
  return ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{kVersion};
  app.require_subcommand(1);

  auto* list_cmd = app.add_subcommand("list", "list experiments");
  auto* run_cmd = app.add_subcommand("run", "run an experiment");

  std::string experiment;
  CommonArgs common;
  std::string ns_text, alphas_text, rs_text, epsilons_text;

  run_cmd->add_option("experiment", experiment, "experiment name")->required();
  run_cmd->add_option("--config", common.config_path, "JSON config file");
  std::uint64_t seed_flag = 0;
  auto* seed_opt = run_cmd->add_option("--seed", seed_flag, "master seed (required)");
  run_cmd->add_option("--outdir", common.outdir, "output directory");
  int threads_flag = 0;
  auto* threads_opt = run_cmd->add_option(
      "--threads", threads_flag, "worker threads (0 = METRIC_KNN_LAB_THREADS or hardware)");
  run_cmd->add_option(
      "--model", common.model,
      "model shorthand: nested|cantor|uniform1|uniform2|mixture|dirac|heisenberg");
  run_cmd->add_option("--eta", common.eta_name, "regression function name");
  run_cmd->add_option("--eta-value", common.eta_value, "parameter for eta=const");
  run_cmd->add_option("--ns", ns_text, "n grid, comma separated");
  run_cmd->add_option("--alphas", alphas_text, "alpha grid: a,b,c or 2^-3..2^-10");
  run_cmd->add_option("--rs", rs_text, "radius grid: a,b,c or 2^-1..2^-8");
  run_cmd->add_option("--epsilons", epsilons_text, "epsilon list, comma separated");
  double p_flag = std::nan("");
  int horizon_flag = -1, trials_flag = -1, points_flag = -1, mc_flag = -1, k_flag = -1;
  int count_flag = -1, test_size_flag = -1, test_points_flag = -1, beta_flag = -1;
  long long n_flag = -1, n_max_flag = -1;
  double epsilon_flag = std::nan(""), shrink_flag = std::nan("");
  std::string schedule_flag, policy_flag;
  run_cmd->add_option("--p", p_flag, "label probability (prop12)");
  run_cmd->add_option("--horizon", horizon_flag, "checkpoint horizon (prop12)");
  run_cmd->add_option("--trials", trials_flag, "trial count");
  run_cmd->add_option("--points", points_flag, "query/sample point count");
  run_cmd->add_option("--mc-samples", mc_flag, "Monte-Carlo sample count");
  run_cmd->add_option("--epsilon", epsilon_flag, "deviation threshold (lb-check)");
  run_cmd->add_option("--n", n_flag, "sample size (concentration)");
  run_cmd->add_option("--k", k_flag, "neighbor count (concentration)");
  run_cmd->add_option("--beta", beta_flag, "Nagata dimension bound (concentration)");
  run_cmd->add_option("--test-size", test_size_flag, "test set size");
  run_cmd->add_option("--test-points", test_points_flag, "test points per trial");
  run_cmd->add_option("--n-max", n_max_flag, "path length (strong-path)");
  run_cmd->add_option("--count", count_flag, "ball count (koranyi)");
  run_cmd->add_option("--shrink", shrink_flag, "shrink factor (koranyi)");
  run_cmd->add_option("--schedule", schedule_flag, "k schedule: sqrt|log|prop12");
  run_cmd->add_option("--policy", policy_flag, "tie policy: index|uniform|dgkl");

  CLI11_PARSE(app, argc, argv);

  if (*list_cmd) {
    for (const auto& e : kExperiments) {
      std::cout << e.name << "  -  " << e.description << "\n";
    }
    return 0;
  }

  try {
    bool known = false;
    for (const auto& e : kExperiments) known |= experiment == e.name;
    if (!known) throw std::runtime_error("unknown experiment: " + experiment);

    if (seed_opt->count() > 0) common.seed = seed_flag;
    if (threads_opt->count() > 0) common.threads = threads_flag;
    json cfg = load_config(common);

    json& prm = cfg["params"];
    if (!prm.is_object()) prm = json::object();
    if (!ns_text.empty()) prm["ns"] = parse_int_grid(ns_text);
    if (!alphas_text.empty()) prm["alphas"] = parse_real_grid(alphas_text);
    if (!rs_text.empty()) prm["rs"] = parse_real_grid(rs_text);
    if (!epsilons_text.empty()) prm["epsilons"] = parse_real_grid(epsilons_text);
    if (!std::isnan(p_flag)) prm["p"] = p_flag;
    if (horizon_flag >= 0) prm["horizon"] = horizon_flag;
    if (trials_flag >= 0) prm["trials"] = trials_flag;
    if (points_flag >= 0) prm["points"] = points_flag;
    if (mc_flag >= 0) prm["mc_samples"] = mc_flag;
    if (!std::isnan(epsilon_flag)) prm["epsilon"] = epsilon_flag;
    if (n_flag >= 0) prm["n"] = n_flag;
    if (k_flag >= 0) prm["k"] = k_flag;
    if (beta_flag >= 0) prm["beta"] = beta_flag;
    if (test_size_flag >= 0) prm["test_size"] = test_size_flag;
    if (test_points_flag >= 0) prm["test_points"] = test_points_flag;
    if (n_max_flag >= 0) prm["n_max"] = n_max_flag;
    if (count_flag >= 0) prm["count"] = count_flag;
    if (!std::isnan(shrink_flag)) prm["shrink"] = shrink_flag;
    if (!schedule_flag.empty()) prm["schedule"] = schedule_flag;
    if (!policy_flag.empty()) prm["policy"] = policy_flag;

    fs::path outdir = cfg.value("outdir", std::string("."));
    std::error_code ec;
    fs::create_directories(outdir, ec);
    std::uint64_t seed = cfg.at("seed").get<std::uint64_t>();
    fs::path csv_path = outdir / (experiment + "-" + std::to_string(seed) + ".csv");
    fs::path manifest_path =
        outdir / (experiment + "-" + std::to_string(seed) + ".manifest.json");

    if (experiment == "weak-consistency") return run_weak(cfg, csv_path, manifest_path);
    if (experiment == "strong-path") return run_strong(cfg, csv_path, manifest_path);
    if (experiment == "prop12") return run_prop12(cfg, csv_path, manifest_path);
    if (experiment == "lb-check") return run_lb_check(cfg, csv_path, manifest_path);
    if (experiment == "dgkl-sweep") return run_dgkl(cfg, csv_path, manifest_path);
    if (experiment == "concentration") {
      return run_concentration(cfg, csv_path, manifest_path);
    }
    return run_koranyi(cfg, csv_path, manifest_path);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
}
