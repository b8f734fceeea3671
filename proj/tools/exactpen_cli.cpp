// exactpen: solve, benchmark and certify sparse regression problems.
//
// Exit status: 0 on success, 1 on usage errors (bad flags, unreadable or invalid
// config), 2 on runtime failures.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "exactpen/bench/report.hpp"
#include "exactpen/exactpen.hpp"
#include "exactpen/testing/oracles.hpp"

namespace fs = std::filesystem;
using namespace exactpen;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonFlags {
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<double> time_limit;
  std::string out;
};

struct ProblemFlags {
  std::string problem = "fig1";
  Index p = 1000, n = 1000, k = 300, kappa = 0;
  double lambda = 10.0;
  std::optional<double> lambda2;
  bool penalty_bound = false;
  std::string dataset;
  bool intercept = false;
};

bench::ProblemKind parse_problem(const std::string &name) {
  if (name == "fig1")
    return bench::ProblemKind::fig1;
  if (name == "sparse_ls")
    return bench::ProblemKind::sparse_ls;
  if (name == "robust")
    return bench::ProblemKind::robust;
  if (name == "libsvm")
    return bench::ProblemKind::libsvm;
  throw UsageError("unknown problem '" + name + "'");
}

json vector_json(const Vector &v) { return std::vector<double>(v.data(), v.data() + v.size()); }

void write_file(const std::string &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

void apply_common(const CommonFlags &c, bench::ExperimentConfig &exp) {
  if (c.seed)
    exp.seed = *c.seed;
  if (c.tol)
    exp.stop_tol = *c.tol;
  if (c.time_limit)
    exp.time_limit = *c.time_limit;
}

int run_solve(const CommonFlags &common, const ProblemFlags &pf, const std::string &solver,
              const std::string &subgrad, double x0, double cert_tol) {
  bench::ExperimentConfig exp;
  exp.problem = parse_problem(pf.problem);
  const auto kind = parse_solver_kind(solver);
  if (!kind)
    throw UsageError("unknown solver '" + solver + "'");
  if (is_two_block(*kind) != (exp.problem == bench::ProblemKind::robust))
    throw UsageError("solver '" + solver + "' does not apply to problem '" + pf.problem + "'");
  if (!parse_subgradient_policy(subgrad))
    throw UsageError("unknown subgradient policy '" + subgrad + "'");
  if (exp.problem == bench::ProblemKind::libsvm && pf.dataset.empty())
    throw UsageError("--dataset is required for problem libsvm");
  exp.solvers = {*kind};
  exp.p = pf.p;
  exp.n = pf.n;
  exp.k = pf.k;
  exp.kappa = pf.kappa;
  exp.lambda = pf.lambda;
  exp.lambda2 = pf.lambda2;
  exp.penalty_bound = pf.penalty_bound;
  exp.dataset = pf.dataset;
  exp.intercept = pf.intercept;
  exp.x0 = x0;
  exp.certificate_tol = cert_tol;
  exp.overrides[*kind]["subgradient_policy"] = subgrad;
  apply_common(common, exp);

  const auto rep = bench::run_experiment(exp);
  const auto &row = rep.rows.front();
  const auto &cert = rep.certificates.front();

  json j{{"problem", pf.problem},
         {"instance", row.instance},
         {"solver", row.solver},
         {"status", row.status},
         {"iterations", row.iterations},
         {"F", row.F},
         {"f", row.f},
         {"nnz_x", row.nnz_x},
         {"certificate", bench::to_json(cert.x)}};
  if (cert.z)
    j["certificate_z"] = bench::to_json(*cert.z);
  if (cert.point_x.size() <= 20)
    j["x"] = vector_json(cert.point_x);

  std::cout << "status " << row.status << " after " << row.iterations << " iterations\n"
            << "F = " << bench::format_float(row.F) << "\n";
  if (cert.point_x.size() <= 20) {
    std::cout << "x =";
    for (Index i = 0; i < cert.point_x.size(); ++i)
      std::cout << ' ' << bench::format_float(cert.point_x[i]);
    std::cout << '\n';
  }
  std::cout << "critical: " << to_string(row.critical)
            << ", d-stationary: " << to_string(row.d_stationary) << '\n'
            << j["certificate"].dump(2) << '\n';
  if (!common.out.empty()) {
    write_file(common.out, j.dump(2) + "\n");
    const fs::path csv = fs::path(common.out).replace_extension(".csv");
    std::ostringstream s;
    bench::emit_csv(rep.rows, s);
    write_file(csv.string(), s.str());
  }
  return 0;
}

int run_bench(const CommonFlags &common, const std::string &config_path, bool print_schema) {
  if (print_schema) {
    std::cout << bench::schema_text();
    return 0;
  }
  if (config_path.empty())
    throw UsageError("--config is required");
  if (!fs::exists(config_path))
    throw UsageError("config file '" + config_path + "' not found");
  bench::ExperimentConfig exp;
  try {
    exp = bench::load_experiment_config(config_path);
  } catch (const ParseError &e) {
    throw UsageError(config_path + ": " + e.what());
  } catch (const std::invalid_argument &e) {
    throw UsageError(config_path + ": " + e.what());
  }
  apply_common(common, exp);
  if (!common.out.empty())
    exp.output_dir = common.out;

  const auto rep = bench::run_experiment(exp);
  const fs::path dir(exp.output_dir);
  fs::create_directories(dir);
  auto emit = [&](const std::string &name, auto &&fn) {
    std::ostringstream s;
    fn(s);
    write_file((dir / name).string(), s.str());
  };
  emit("report.csv", [&](std::ostream &s) { bench::emit_csv(rep.rows, s); });
  emit("summary.csv", [&](std::ostream &s) { bench::emit_summary_csv(rep.summary, s); });
  emit("timing.csv", [&](std::ostream &s) { bench::emit_timing_csv(rep.rows, s); });
  emit("certificates.json", [&](std::ostream &s) {
    s << bench::certificates_to_json(rep.certificates).dump(1) << '\n';
  });
  if (exp.plot) {
    for (int r = 0; r < exp.repetitions; ++r) {
      std::vector<bench::RunTrace> traces;
      for (const auto &t : rep.traces)
        if (t.repetition == r)
          traces.push_back(t);
      emit("convergence_" + std::to_string(r) + ".svg",
           [&](std::ostream &s) { bench::emit_plot(traces, s, "repetition " + std::to_string(r)); });
    }
  }

  std::cout << "solver      runs  mean_iter     mean_lnF     mean_nnz_x  time_sec\n";
  for (const auto &s : rep.summary) {
    char line[160];
    std::snprintf(line, sizeof line, "%-10s %5d %10.1f%s %12.5f%s %12.1f %9.3f%s\n",
                  s.solver.c_str(), s.runs, s.mean_iterations, s.best_iterations ? "*" : " ",
                  s.mean_ln_F, s.best_ln_F ? "*" : " ", s.mean_nnz_x, s.mean_wall_time_sec,
                  s.best_wall_time ? "*" : " ");
    std::cout << line;
  }
  std::cout << "reports written to " << dir.string() << '\n';
  return 0;
}

int run_gen(const CommonFlags &common, const ProblemFlags &pf, double noise_sd) {
  if (common.out.empty())
    throw UsageError("--out <prefix> is required");
  const std::uint64_t seed = common.seed.value_or(0);
  const std::string prefix = common.out;
  Instance inst;
  json meta;
  if (pf.problem == "sparse_ls") {
    SparseLsParams prm{.p = pf.p, .n = pf.n, .k = pf.k, .lambda = pf.lambda, .seed = seed};
    if (noise_sd >= 0.0)
      prm.noise_sd = noise_sd;
    inst = gen_sparse_ls_instance(prm);
    meta = bench::metadata_to_json(inst.meta);
    meta["lambda"] = pf.lambda;
    meta["k"] = pf.k;
    std::ostringstream s;
    write_vector(*inst.meta.planted, s);
    write_file(prefix + ".planted", s.str());
  } else if (pf.problem == "robust") {
    RobustParams prm{.p = pf.p, .n = pf.n, .k = pf.k, .kappa = pf.kappa, .seed = seed};
    if (noise_sd >= 0.0)
      prm.noise_sd = noise_sd;
    const RobustInstance r = gen_robust_instance(prm);
    inst = Instance{r.A, r.b, {}};
    inst.meta.name = "robust_p" + std::to_string(pf.p) + "_n" + std::to_string(pf.n) + "_s" +
                     std::to_string(seed);
    inst.meta.p = pf.p;
    inst.meta.n = pf.n;
    inst.meta.source = "synthetic:robust";
    inst.meta.seed = seed;
    meta = bench::metadata_to_json(inst.meta);
    meta["x_true"] = vector_json(r.x_true);
    meta["z_true"] = vector_json(r.z_true);
    meta["outliers"] = r.outliers;
  } else {
    throw UsageError("gen supports problems sparse_ls and robust");
  }
  std::ostringstream s;
  serialize_libsvm(inst, s);
  write_file(prefix + ".libsvm", s.str());
  write_file(prefix + ".json", meta.dump(2) + "\n");
  std::cout << "wrote " << prefix << ".libsvm, " << prefix << ".json";
  if (pf.problem == "sparse_ls")
    std::cout << ", " << prefix << ".planted";
  std::cout << '\n';
  return 0;
}

int run_certify(const CommonFlags &common, const std::string &instance_path,
                const std::string &meta_path, const std::string &point_path, bool planted,
                double lambda, Index k, bool intercept) {
  std::ifstream in(instance_path);
  if (!in)
    throw UsageError("instance file '" + instance_path + "' not found");
  std::string mpath = meta_path;
  if (mpath.empty()) {
    const fs::path guess = fs::path(instance_path).replace_extension(".json");
    if (fs::exists(guess))
      mpath = guess.string();
  }
  std::optional<json> meta;
  if (!mpath.empty()) {
    std::ifstream m(mpath);
    if (!m)
      throw UsageError("metadata file '" + mpath + "' not found");
    meta = json::parse(m);
  }
  const Index min_cols = meta ? meta->at("p").get<Index>() : 0;
  Instance inst = parse_libsvm(in, min_cols);
  if (meta)
    inst.meta = bench::metadata_from_json(*meta);
  if (meta && meta->contains("lambda") && lambda < 0.0)
    lambda = meta->at("lambda").get<double>();
  if (meta && meta->contains("k") && k < 0)
    k = meta->at("k").get<Index>();
  if (lambda < 0.0 || k < 0)
    throw UsageError("--lambda and --k are required when the metadata does not record them");

  Vector x;
  if (planted) {
    if (!inst.meta.planted)
      throw UsageError("metadata has no planted point");
    x = *inst.meta.planted;
  } else {
    std::ifstream pin(point_path);
    if (!pin)
      throw UsageError("point file '" + point_path + "' not found");
    x = read_vector(pin);
  }
  ExcludedSet excluded;
  if (intercept) {
    auto [with_ones, ex] = add_intercept(inst);
    inst = std::move(with_ones);
    excluded = ex;
  }
  if (x.size() != inst.A.cols())
    throw UsageError("point has " + std::to_string(x.size()) + " entries, instance has " +
                     std::to_string(inst.A.cols()) + " columns");
  const CompositeObjective obj(LeastSquares(inst.A, inst.b),
                               TopKPenalty(lambda, k, inst.A.cols(), excluded));
  const auto cert = classify(obj, x, common.tol.value_or(default_certificate_tol));
  const json j{{"F", obj.value(x)}, {"certificate", bench::to_json(cert)}};
  std::cout << "critical: " << to_string(cert.critical)
            << ", d-stationary: " << to_string(cert.d_stationary) << '\n'
            << j.dump(2) << '\n';
  if (!common.out.empty())
    write_file(common.out, j.dump(2) + "\n");
  return 0;
}

int run_prox_oracle(const CommonFlags &common, const std::vector<double> &y_vals, double tau,
                    Index k) {
  if (y_vals.empty())
    throw UsageError("--y needs at least one value");
  if (y_vals.size() > 16)
    throw UsageError("the brute-force oracle is limited to 16 coordinates");
  const Vector y = Eigen::Map<const Vector>(y_vals.data(), static_cast<Index>(y_vals.size()));
  if (k < 0 || k > y.size())
    throw UsageError("--k must lie in [0, dim]");
  const auto brute = oracle::prox_top_k(y, tau, k);
  const Vector lib = TopKPenalty(1.0, k, y.size()).prox(y, tau);
  const json j{{"y", vector_json(y)},
               {"tau", tau},
               {"k", k},
               {"oracle", {{"x", vector_json(brute.x)}, {"objective", brute.objective}}},
               {"library",
                {{"x", vector_json(lib)},
                 {"objective", oracle::prox_objective(lib, y, tau, k)}}}};
  std::cout << j.dump(2) << '\n';
  if (!common.out.empty())
    write_file(common.out, j.dump(2) + "\n");
  return 0;
}

void add_problem_flags(CLI::App *cmd, ProblemFlags &pf) {
  cmd->add_option("--problem", pf.problem, "fig1 | sparse_ls | robust | libsvm");
  cmd->add_option("--p", pf.p, "features");
  cmd->add_option("--n", pf.n, "samples");
  cmd->add_option("--k", pf.k, "sparsity level K");
  cmd->add_option("--kappa", pf.kappa, "outlier budget");
  cmd->add_option("--lambda", pf.lambda, "penalty weight");
  cmd->add_option("--lambda2", pf.lambda2, "z-block penalty weight");
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Exact-penalty sparse regression toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  CommonFlags common;
  app.add_option("--seed", common.seed, "base seed");
  app.add_option("--tol", common.tol, "stop tolerance (certify: certificate tolerance)");
  app.add_option("--time-limit", common.time_limit, "seconds per solver run");
  app.add_option("--out", common.out, "output file, prefix or directory");

  ProblemFlags solve_pf;
  std::string solver, subgrad = "canonical";
  double x0 = 0.0, cert_tol = default_certificate_tol;
  auto *solve = app.add_subcommand("solve", "run one solver on one problem and certify the result");
  add_problem_flags(solve, solve_pf);
  solve->add_option("--solver", solver, "pgm gist pdca pdcae nepdca palm gpalm pdcae_proj")
      ->required();
  solve->add_option("--subgrad", subgrad, "canonical | extreme_negative | index_order");
  solve->add_option("--x0", x0, "starting point of fig1");
  solve->add_option("--cert-tol", cert_tol, "certificate tolerance");
  solve->add_flag("--penalty-bound", solve_pf.penalty_bound,
                  "robust: weights from the exact-penalty bound");
  solve->add_option("--dataset", solve_pf.dataset, "LIBSVM file for problem libsvm");
  solve->add_flag("--intercept", solve_pf.intercept, "unpenalized ones column");

  std::string config_path;
  bool print_schema = false;
  auto *benchcmd = app.add_subcommand("bench", "run a configured solver comparison");
  benchcmd->add_option("--config", config_path, "experiment config file");
  benchcmd->add_flag("--print-schema", print_schema, "print the config schema and exit");

  ProblemFlags gen_pf;
  gen_pf.problem = "sparse_ls";
  double noise_sd = -1.0;
  auto *gen = app.add_subcommand("gen", "write a synthetic instance (.libsvm, .json sidecar)");
  add_problem_flags(gen, gen_pf);
  gen->add_option("--noise-sd", noise_sd, "response noise");

  std::string instance_path, meta_path, point_path;
  bool use_planted = false, cert_intercept = false;
  double cert_lambda = -1.0;
  Index cert_k = -1;
  auto *certify = app.add_subcommand("certify", "classify a point for a least-squares instance");
  certify->add_option("--instance", instance_path, "LIBSVM file")->required();
  certify->add_option("--meta", meta_path, "metadata sidecar (default: <instance>.json)");
  auto *point_opt = certify->add_option("--point", point_path, "point file, one value per line");
  auto *planted_opt = certify->add_flag("--planted", use_planted, "use the planted point");
  point_opt->excludes(planted_opt);
  certify->add_option("--lambda", cert_lambda, "penalty weight");
  certify->add_option("--k", cert_k, "sparsity level K");
  certify->add_flag("--intercept", cert_intercept, "unpenalized ones column");

  std::vector<double> y_vals;
  double tau = 1.0;
  Index prox_k = 1;
  auto *prox = app.add_subcommand("prox-oracle", "brute-force prox of tau T_K next to the library's");
  prox->add_option("--y", y_vals, "input vector")->delimiter(',')->required();
  prox->add_option("--tau", tau, "prox weight");
  prox->add_option("--k", prox_k, "K");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return 1;
  }

  try {
    if (solve->parsed())
      return run_solve(common, solve_pf, solver, subgrad, x0, cert_tol);
    if (benchcmd->parsed())
      return run_bench(common, config_path, print_schema);
    if (gen->parsed())
      return run_gen(common, gen_pf, noise_sd);
    if (certify->parsed()) {
      if (!use_planted && point_path.empty())
        throw UsageError("one of --point or --planted is required");
      return run_certify(common, instance_path, meta_path, point_path, use_planted, cert_lambda,
                         cert_k, cert_intercept);
    }
    if (prox->parsed())
      return run_prox_oracle(common, y_vals, tau, prox_k);
  } catch (const UsageError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
