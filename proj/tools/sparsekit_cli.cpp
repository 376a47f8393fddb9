// Command-line front end: solve / sweep / verify.
// Exit codes: 0 ok, 2 usage or parse error, 3 numerical failure.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <sparsekit/algorithms.hpp>
#include <sparsekit/duality.hpp>
#include <sparsekit/experiments.hpp>
#include <sparsekit/instance.hpp>
#include <sparsekit/oracle.hpp>

using nlohmann::json;
using namespace sparsekit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitParse = 2;
constexpr int kExitNumerical = 3;

struct ParseFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t default_seed() {
  if (const char* env = std::getenv("SPARSEKIT_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw ParseFailure("SPARSEKIT_SEED is not an integer");
    }
  }
  return 0;
}

InstanceFile load_instance(const std::string& ref) {
  if (ref == "example1") {
    InstanceFile f;
    f.inst = example1();
    Eigen::VectorXd xs(4);
    xs << 0, 0, 2, 1;
    f.x_star = xs;
    return f;
  }
  std::ifstream in(ref);
  if (!in) throw ParseFailure("cannot open instance file: " + ref);
  json j;
  try {
    in >> j;
    return instance_from_json(j);
  } catch (const std::exception& e) {
    throw ParseFailure(std::string("bad instance file: ") + e.what());
  }
}

Eigen::VectorXd parse_vector(const std::string& csv) {
  std::vector<double> vals;
  std::istringstream is(csv);
  std::string tok;
  while (std::getline(is, tok, ',')) {
    try {
      vals.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw ParseFailure("bad number in vector: " + tok);
    }
  }
  Eigen::VectorXd v(static_cast<int>(vals.size()));
  for (std::size_t i = 0; i < vals.size(); ++i) v(static_cast<int>(i)) = vals[i];
  return v;
}

struct ConfigFlags {
  std::optional<double> alpha, gamma_bound, M, M_star, sigma1, sigma2, eps_merit;
  std::optional<std::string> merit;
  std::optional<int> k_max;
  std::optional<double> zero_threshold, tol;

  void add_to(CLI::App* app) {
    app->add_option("--alpha", alpha, "Relaxation constant alpha");
    app->add_option("--gamma-bound", gamma_bound, "Relaxation bound gamma");
    app->add_option("--M", M, "Weight-set constant M");
    app->add_option("--M-star", M_star, "Weight-set cap M*");
    app->add_option("--sigma1", sigma1, "Surrogate shift sigma1");
    app->add_option("--sigma2", sigma2, "Inverse-rule shift sigma2");
    app->add_option("--eps-merit", eps_merit, "Merit parameter eps");
    app->add_option("--merit", merit, "Merit family: log|fraction|power|arctan|cwb");
    app->add_option("--k-max", k_max, "Reweighting iterations");
    app->add_option("--zero-threshold", zero_threshold, "Support counting threshold");
    app->add_option("--tol", tol, "Cone solver tolerance");
  }

  AlgorithmConfig resolve(AlgoVariant v) const {
    AlgorithmConfig c = AlgorithmConfig::defaults_for(v);
    if (alpha) c.alpha = *alpha;
    if (gamma_bound) c.gamma_bound = *gamma_bound;
    if (M) c.M = *M;
    if (M_star) c.M_star = *M_star;
    if (sigma1) c.sigma1 = *sigma1;
    if (sigma2) c.sigma2 = *sigma2;
    if (eps_merit) c.merit.eps_merit = *eps_merit;
    if (merit) {
      if (*merit == "log") c.merit.family = MeritFamily::LOG;
      else if (*merit == "fraction") c.merit.family = MeritFamily::FRACTION;
      else if (*merit == "power") c.merit.family = MeritFamily::POWER;
      else if (*merit == "arctan") c.merit.family = MeritFamily::ARCTAN;
      else if (*merit == "cwb") c.merit.family = MeritFamily::CWB_LOG;
      else throw ParseFailure("unknown merit family: " + *merit);
    }
    if (k_max) c.k_max = *k_max;
    if (zero_threshold) c.zero_threshold = *zero_threshold;
    if (tol) c.solve_options.tol_solver = *tol;
    try {
      c.validate();
    } catch (const std::exception& e) {
      throw ParseFailure(e.what());
    }
    return c;
  }
};

json config_json(const AlgorithmConfig& c) {
  json j;
  j["algorithm"] = algo_name(c.variant);
  j["alpha"] = c.alpha;
  j["gamma_bound"] = c.gamma_bound;
  j["M"] = c.M;
  j["M_star"] = c.M_star;
  j["sigma1"] = c.sigma1;
  j["sigma2"] = c.sigma2;
  j["eps_merit"] = c.merit.eps_merit;
  j["k_max"] = c.k_max;
  j["zero_threshold"] = c.zero_threshold;
  j["tol"] = c.solve_options.tol_solver;
  return j;
}

json residuals_json(const Instance& inst, const Eigen::VectorXd& x) {
  json j;
  j["ball"] = (inst.y - inst.A * x).norm();
  j["ineq"] = inst.l() > 0 ? std::max(0.0, (inst.B * x - inst.b).maxCoeff()) : 0.0;
  j["violation"] = inst.violation(x);
  return j;
}

void print_vector(std::ostream& os, const Eigen::VectorXd& v) {
  os << '(';
  for (int i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v(i);
  os << ')';
}

int cmd_solve(const std::string& instance_ref, const std::string& algorithm,
              const std::string& weight_csv, const ConfigFlags& flags, bool as_json,
              const std::string& output) {
  const InstanceFile f = load_instance(instance_ref);
  json out;
  Eigen::VectorXd x;
  double objective = 0.0;
  int sparsity = 0;

  if (!weight_csv.empty()) {
    const Weight w{parse_vector(weight_csv)};
    try {
      w.validate(f.inst.n());
    } catch (const std::exception& e) {
      throw ParseFailure(e.what());
    }
    const SolverResult r = solve(build_weighted_l1(f.inst, w),
                                 flags.resolve(AlgoVariant::L1).solve_options);
    if (r.status != SolveStatus::OPTIMAL)
      throw std::runtime_error("weighted l1 solve did not reach optimality");
    x = extract_primal(f.inst, r).x;
    objective = r.objective;
    sparsity = count_nonzeros(x);
    out["config"] = {{"algorithm", "weighted_l1"}, {"weight", vector_to_json(w.w)}};
  } else {
    const AlgorithmConfig cfg = flags.resolve(algo_from_name(algorithm));
    const RunTrace tr = run_algorithm(f.inst, cfg);
    if (tr.iterates.back().status != SolveStatus::OPTIMAL)
      throw std::runtime_error("final subproblem did not reach optimality");
    x = tr.final_x;
    objective = tr.iterates.back().objective;
    sparsity = tr.final_sparsity;
    out["config"] = config_json(cfg);
  }

  out["x"] = vector_to_json(x);
  out["sparsity"] = sparsity;
  out["objective"] = objective;
  out["residuals"] = residuals_json(f.inst, x);
  if (f.x_star) out["rel_error"] = (x - *f.x_star).norm() / f.x_star->norm();

  if (!output.empty()) {
    std::ofstream os(output);
    if (!os) throw ParseFailure("cannot write " + output);
    os << out.dump(2) << '\n';
  }
  if (as_json) {
    std::cout << out.dump(2) << '\n';
  } else {
    std::cout << "x = ";
    print_vector(std::cout, x);
    std::cout << "\nsparsity = " << sparsity << "\nobjective = " << objective
              << "\nfeasibility violation = " << f.inst.violation(x) << '\n';
  }
  return kExitOk;
}

int cmd_sweep(const SweepSpec& spec, const std::string& prefix, bool as_json) {
  const SweepResult r = run_sweep(spec);
  emit_results(r, prefix + ".csv", prefix + ".svg");
  if (as_json) {
    json rows = json::array();
    for (const auto& row : r.rows)
      rows.push_back({{"algorithm", row.algorithm},
                      {"sparsity", row.sparsity},
                      {"trials", row.trials},
                      {"successes", row.successes},
                      {"rate", row.rate},
                      {"mean_seconds", row.mean_seconds}});
    std::cout << json{{"csv", prefix + ".csv"}, {"svg", prefix + ".svg"}, {"rows", rows}}
                     .dump(2)
              << '\n';
  } else {
    std::cout << "wrote " << prefix << ".csv and " << prefix << ".svg\n";
    for (const auto& row : r.rows)
      std::cout << row.algorithm << " k=" << row.sparsity << " rate=" << row.rate << '\n';
  }
  return kExitOk;
}

json index_set_json(const std::vector<int>& s) {
  json arr = json::array();
  for (int i : s) arr.push_back(i + 1);  // displayed 1-based
  return arr;
}

int cmd_verify(const std::string& instance_ref, const std::string& weight_csv, bool as_json,
               double tol) {
  const InstanceFile f = load_instance(instance_ref);
  Weight w{weight_csv.empty() ? Eigen::VectorXd::Ones(f.inst.n()).eval()
                              : parse_vector(weight_csv)};
  try {
    w.validate(f.inst.n());
  } catch (const std::exception& e) {
    throw ParseFailure(e.what());
  }
  SolveOptions opt;
  opt.tol_solver = tol;
  const SolverResult r = solve(build_weighted_l1(f.inst, w), opt);
  if (r.status != SolveStatus::OPTIMAL)
    throw std::runtime_error("weighted l1 solve did not reach optimality");
  const PrimalTriple primal = extract_primal(f.inst, r);
  const DualVars dual = extract_dual(f.inst, w, r);
  const KktReport kkt = kkt_check(f.inst, w, primal, dual);
  const ComplementarityReport comp =
      complementarity_gap(primal.x, dual.lam6.cwiseMax(0.0));

  json out;
  out["config"] = {{"weight", vector_to_json(w.w)}, {"tol", tol}};
  out["objective"] = r.objective;
  out["kkt"] = {{"max_residual", kkt.max_residual},
                {"stationarity_x", kkt.stationarity_x},
                {"stationarity_gamma", kkt.stationarity_gamma},
                {"stationarity_t", kkt.stationarity_t},
                {"feasibility", kkt.feasibility},
                {"gamma_grad_skipped", kkt.gamma_grad_skipped}};
  out["complementarity"] = {{"gap", comp.gap},
                            {"support_sum", comp.support_sum},
                            {"bound", comp.bound}};
  try {
    const StrictPair sp = strict_pair_construct(f.inst, w, opt);
    out["strict_pair"] = {{"min_sum", sp.min_sum},
                          {"strict", sp.strict},
                          {"strict_tol", sp.strict_tol},
                          {"P_star", index_set_json(sp.P_star)},
                          {"Q_star", index_set_json(sp.Q_star)},
                          {"gap", sp.gap}};
  } catch (const std::exception& e) {
    out["strict_pair"] = {{"error", e.what()}};
  }

  if (as_json) {
    std::cout << out.dump(2) << '\n';
  } else {
    std::cout << "objective = " << r.objective << "\nkkt max residual = "
              << kkt.max_residual << "\ncomplementarity gap = " << comp.gap
              << " (support sum " << comp.support_sum << " <= n = " << comp.bound << ")\n";
    if (out["strict_pair"].contains("error")) {
      std::cout << "strict pair: " << out["strict_pair"]["error"].get<std::string>()
                << '\n';
    } else {
      std::cout << "strict pair: min_sum = " << out["strict_pair"]["min_sum"].get<double>()
                << ", P* = " << out["strict_pair"]["P_star"].dump()
                << ", Q* = " << out["strict_pair"]["Q_star"].dump() << '\n';
    }
  }
  return kExitOk;
}

std::pair<int, int> parse_range(const std::string& s) {
  const auto at = s.find("..");
  try {
    if (at == std::string::npos) {
      const int k = std::stoi(s);
      return {k, k};
    }
    return {std::stoi(s.substr(0, at)), std::stoi(s.substr(at + 2))};
  } catch (const std::exception&) {
    throw ParseFailure("bad sparsity range: " + s);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparse-recovery toolkit: dual-density reweighted l1 algorithms"};
  app.require_subcommand(1);

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "Run one algorithm on an instance");
  std::string instance_ref, algorithm = "l1", weight_csv, output;
  bool as_json = false;
  ConfigFlags flags;
  solve_cmd->add_option("instance", instance_ref, "Instance JSON file or 'example1'")
      ->required();
  solve_cmd->add_option("--algorithm", algorithm,
                        "l1|ra|cwb|arctan|dda1..dda3|dra1..dra6");
  solve_cmd->add_option("--weight", weight_csv, "Run weighted l1 with this weight");
  solve_cmd->add_option("--output", output, "Write solution JSON here");
  solve_cmd->add_flag("--json", as_json, "Machine-readable stdout");
  flags.add_to(solve_cmd);

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Success-rate sweep over sparsity");
  std::string case_name = "n1", sparsity = "5..25", algs = "l1", prefix = "sweep";
  int trials = 200, threads = 1, custom_m = 50, custom_n = 200, custom_l = 0;
  double eps_noise = 1e-4;
  std::uint64_t seed = 0;
  bool seed_given = false, timing = false, reject_outside = false, sweep_json = false;
  sweep_cmd->add_option("--case", case_name, "n1|n2|custom");
  sweep_cmd->add_option("--m", custom_m, "Rows of A (custom case)");
  sweep_cmd->add_option("--n", custom_n, "Columns of A (custom case)");
  sweep_cmd->add_option("--l", custom_l, "Rows of B (custom case)");
  sweep_cmd->add_option("--sparsity", sparsity, "Range a..b or single level");
  sweep_cmd->add_option("--trials", trials, "Trials per level");
  sweep_cmd->add_option("--algs", algs, "Comma-separated algorithm names");
  sweep_cmd->add_option("--seed", seed, "Sweep seed")->each([&](const std::string&) {
    seed_given = true;
  });
  sweep_cmd->add_option("--eps-noise", eps_noise, "Noise radius");
  sweep_cmd->add_option("--threads", threads, "Worker threads");
  sweep_cmd->add_option("--out", prefix, "Output file prefix");
  sweep_cmd->add_flag("--timing", timing,
                      "Measure wall time (breaks byte-identical reruns)");
  sweep_cmd->add_flag("--reject-outside", reject_outside,
                      "Redraw instances whose planted point falls outside T");
  sweep_cmd->add_flag("--json", sweep_json, "Machine-readable stdout");
  ConfigFlags sweep_flags;
  sweep_flags.add_to(sweep_cmd);

  // verify
  auto* verify_cmd = app.add_subcommand("verify", "KKT, complementarity and strict pair");
  std::string v_instance, v_weight;
  bool v_json = false;
  double v_tol = 1e-7;
  verify_cmd->add_option("instance", v_instance, "Instance JSON file or 'example1'")
      ->required();
  verify_cmd->add_option("--weight", v_weight, "Weight vector (default all ones)");
  verify_cmd->add_option("--tol", v_tol, "Cone solver tolerance");
  verify_cmd->add_flag("--json", v_json, "Machine-readable stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitParse;
  }

  try {
    if (solve_cmd->parsed())
      return cmd_solve(instance_ref, algorithm, weight_csv, flags, as_json, output);
    if (sweep_cmd->parsed()) {
      SweepSpec spec;
      if (case_name == "n1") spec.kase = SweepCase::N1;
      else if (case_name == "n2") spec.kase = SweepCase::N2;
      else if (case_name == "custom") spec.kase = SweepCase::CUSTOM;
      else throw ParseFailure("unknown case: " + case_name);
      spec.m = custom_m;
      spec.n = custom_n;
      spec.l = custom_l;
      std::tie(spec.sparsity_min, spec.sparsity_max) = parse_range(sparsity);
      spec.trials_per_level = trials;
      spec.eps_noise = eps_noise;
      spec.seed = seed_given ? seed : default_seed();
      spec.threads = threads;
      spec.include_timing = timing;
      spec.reject_outside = reject_outside;
      std::istringstream is(algs);
      std::string name;
      while (std::getline(is, name, ','))
        spec.algorithms.push_back(sweep_flags.resolve(algo_from_name(name)));
      try {
        spec.validate();
      } catch (const std::invalid_argument& e) {
        throw ParseFailure(e.what());
      }
      return cmd_sweep(spec, prefix, sweep_json);
    }
    return cmd_verify(v_instance, v_weight, v_json, v_tol);
  } catch (const ParseFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitParse;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitParse;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
}
