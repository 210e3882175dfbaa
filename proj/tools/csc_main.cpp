// Command-line front end: dictionary/signal generation, measures, spark
// certificates, pursuit, and the experiment sweeps.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "csc/csc.hpp"

namespace {

using nlohmann::ordered_json;

void write_output(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw csc::IoError("cannot open for writing: " + out_path);
  out << text;
  if (!out) throw csc::IoError("write failed: " + out_path);
}

ordered_json json_or_null(double v) {
  return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr);
}

struct GenDictArgs {
  int n = 8;
  int m = 2;
  bool low_coherence = false;
  int iters = 2000;
};

void run_gen_dict(const GenDictArgs& a, std::uint64_t seed, const std::string& out) {
  const csc::LocalDictionary local =
      a.low_coherence
          ? csc::low_coherence_local(a.n, a.m, seed,
                                     csc::LowCoherenceOptions{a.iters, 0.99, 0.5})
          : csc::random_local(a.n, a.m, seed);
  if (!out.empty()) csc::write_dictionary(local, out);
  const csc::CoherenceProfile profile = csc::shifted_coherence_profile(local);
  ordered_json j;
  j["n"] = local.n();
  j["m"] = local.m();
  j["mu"] = profile.max();
  j["mu0"] = profile.mu0();
  j["welch"] = csc::welch_lower_bound(local.n(), local.m());
  j["dict_path"] = out;
  std::cout << j.dump(2) << '\n';
  if (out.empty()) {
    std::ostringstream text;
    csc::write_dictionary(local, text);
    std::cout << text.str();
  }
}

struct GenSignalArgs {
  std::string dict_path;
  int N = 64;
  int cardinality = 4;
  std::string code_out;
  std::string signal_out;
};

void run_gen_signal(const GenSignalArgs& a, std::uint64_t seed) {
  const csc::LocalDictionary local = csc::read_dictionary(a.dict_path);
  const csc::ConvDictionary D(local, a.N);
  const csc::GeneratedSignal gen = csc::gen_signal(D, a.cardinality, seed);
  if (!a.code_out.empty()) csc::write_sparse_code(gen.code, a.code_out);
  if (!a.signal_out.empty()) csc::write_signal(gen.signal, a.signal_out);
  ordered_json j;
  j["N"] = a.N;
  j["m"] = local.m();
  j["cardinality"] = a.cardinality;
  j["l0"] = csc::l0(gen.code.values());
  j["l0_inf"] = csc::l0_inf(gen.code, local.n());
  j["code_path"] = a.code_out;
  j["signal_path"] = a.signal_out;
  std::cout << j.dump(2) << '\n';
}

struct MeasureArgs {
  std::string dict_path;
  std::string code_path;
  std::string profile_out;
};

void run_measure(const MeasureArgs& a, const std::string& out) {
  const csc::LocalDictionary local = csc::read_dictionary(a.dict_path);
  const csc::SparseCode code = csc::read_sparse_code(a.code_path);
  if (code.m() != local.m())
    throw csc::ConfigError("measure: code filter count does not match dictionary");
  const csc::ConvDictionary D(local, code.N());
  const bool degenerate = local.n() == 1 && local.m() == 1;
  ordered_json j;
  j["l0"] = csc::l0(code.values());
  j["l0_inf"] = csc::l0_inf(code, local.n());
  j["mu"] = csc::mutual_coherence(D);
  j["mu0"] = degenerate ? 0.0 : csc::shifted_coherence_profile(local).mu0();
  j["welch"] = csc::welch_lower_bound(local.n(), local.m());
  if (degenerate || csc::l0(code.values()) == 0)
    j["max_stripe_coherence"] = nullptr;
  else
    j["max_stripe_coherence"] =
        csc::stripe_coherence(code, csc::shifted_coherence_profile(local)).max;
  if (!a.profile_out.empty()) {
    if (degenerate)
      throw csc::ConfigError("measure: profile undefined for a single 1-sample atom");
    csc::write_profile_csv(csc::shifted_coherence_profile(local), a.profile_out);
  }
  write_output(j.dump(2) + "\n", out);
}

struct SparkArgs {
  std::string dict_path;
  std::string kind = "stripe_spark";
  int N = 0;        // 0: smallest valid (n) for spark over the conv dictionary
  int max_card = 0; // 0: exhaustive for the chosen kind
  bool allow_large = false;
};

void run_spark(const SparkArgs& a, const std::string& out) {
  const csc::LocalDictionary local = csc::read_dictionary(a.dict_path);
  const int N = a.N > 0 ? a.N : local.n();
  const csc::ConvDictionary D(local, N);
  const double mu = csc::mutual_coherence(D);

  csc::SparkCertificate cert;
  if (a.kind == "spark") {
    const Eigen::MatrixXd dense = csc::materialize_dense(D);
    const int max_card =
        a.max_card > 0 ? a.max_card : static_cast<int>(dense.cols());
    cert = csc::spark_bruteforce(dense, max_card, a.allow_large);
  } else if (a.kind == "stripe_spark") {
    const int max_loi =
        a.max_card > 0 ? a.max_card : (2 * local.n() - 1) * local.m();
    cert = csc::stripe_spark_bruteforce(D, max_loi, a.allow_large);
  } else {
    throw csc::ConfigError("spark: kind must be spark or stripe_spark");
  }

  ordered_json j;
  j["kind"] = a.kind;
  j["found"] = cert.found;
  if (cert.found)
    j["value"] = cert.value;
  else
    j["bound"] = cert.searched_up_to;  // certificate: value > bound
  ordered_json witness = ordered_json::array();
  for (int col : cert.witness) {
    ordered_json w;
    w["chunk"] = col / local.m();
    w["filter"] = col % local.m();
    witness.push_back(w);
  }
  j["witness"] = witness;
  j["mu"] = mu;
  j["theorem2_lower_bound"] =
      mu > 0.0 ? json_or_null(1.0 + 1.0 / mu) : ordered_json(nullptr);
  write_output(j.dump(2) + "\n", out);
}

struct PursueArgs {
  std::string solver = "omp";
  std::string dict_path;
  std::string signal_path;
  std::string json_out;
  std::string code_out;
  int omp_max_iters = 0;  // 0: one pass per column at most
  double res_tol = 1e-10;
  csc::AdmmOptions admm;
};

void run_pursue(const PursueArgs& a) {
  const csc::LocalDictionary local = csc::read_dictionary(a.dict_path);
  const Eigen::VectorXd x = csc::read_signal(a.signal_path);
  const csc::ConvDictionary D(local, static_cast<int>(x.size()));
  std::optional<csc::PursuitResult> got;
  if (a.solver == "omp") {
    const int cap = a.omp_max_iters > 0 ? a.omp_max_iters : D.cols();
    got = csc::omp(D, x, cap, a.res_tol);
  } else if (a.solver == "bp") {
    got = csc::basis_pursuit(D, x, a.admm);
  } else {
    throw csc::ConfigError("pursue: solver must be omp or bp");
  }
  const csc::PursuitResult& r = *got;
  if (!a.code_out.empty()) csc::write_sparse_code(r.code, a.code_out);
  ordered_json j;
  j["solver"] = a.solver;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["residual_norm"] = r.residual_norm;
  j["l1_objective"] = r.l1_objective;
  j["l0"] = csc::l0(r.code.values());
  j["l0_inf"] = csc::l0_inf(r.code, local.n());
  ordered_json support = ordered_json::array();
  for (int col : r.support) {
    ordered_json e;
    e["chunk"] = r.code.chunk_of(col);
    e["filter"] = r.code.filter_of(col);
    e["value"] = r.code.values()[col];
    support.push_back(e);
  }
  j["support"] = support;
  const std::string text = j.dump(2) + "\n";
  if (!a.json_out.empty())
    write_output(text, a.json_out);
  else
    std::cout << text;
}

struct SweepArgs {
  csc::ExperimentConfig cfg;
  std::string source = "random";
  std::string solvers = "both";
};

void finish_sweep_config(SweepArgs& a, std::uint64_t seed, int threads) {
  a.cfg.seed = seed;
  a.cfg.threads = threads;
  a.cfg.source = csc::detail::source_from_string(a.source);
  if (a.solvers == "omp") {
    a.cfg.run_omp = true;
    a.cfg.run_bp = false;
  } else if (a.solvers == "bp") {
    a.cfg.run_omp = false;
    a.cfg.run_bp = true;
  } else if (a.solvers == "both") {
    a.cfg.run_omp = true;
    a.cfg.run_bp = true;
  } else {
    throw csc::ConfigError("solvers must be omp, bp, or both");
  }
}

void run_phase(SweepArgs a, std::uint64_t seed, int threads,
               const std::string& format, const std::string& out) {
  finish_sweep_config(a, seed, threads);
  const csc::PhaseTable table = csc::run_phase_transition(a.cfg);
  if (format == "csv")
    write_output(csc::to_csv(table), out);
  else
    write_output(csc::to_json(table).dump(2) + "\n", out);
}

void run_scatter(SweepArgs a, std::uint64_t seed, int threads,
                 const std::string& format, const std::string& out) {
  finish_sweep_config(a, seed, threads);
  const csc::ScatterTable table = csc::run_coherence_scatter(a.cfg);
  if (format == "csv")
    write_output(csc::to_csv(table), out);
  else
    write_output(csc::to_json(table).dump(2) + "\n", out);
}

void add_sweep_options(CLI::App* cmd, SweepArgs& a) {
  cmd->add_option("--n", a.cfg.n, "filter length");
  cmd->add_option("--m", a.cfg.m, "number of filters");
  cmd->add_option("--N", a.cfg.N, "signal length");
  cmd->add_option("--card-lo", a.cfg.card_lo, "lowest cardinality");
  cmd->add_option("--card-hi", a.cfg.card_hi, "highest cardinality");
  cmd->add_option("--trials", a.cfg.trials_per_cardinality,
                  "trials per cardinality");
  cmd->add_option("--source", a.source, "dictionary source: random|low_coherence|file");
  cmd->add_option("--dict", a.cfg.dict_path, "dictionary file (source=file)");
  cmd->add_option("--lowco-iters", a.cfg.lowco.iterations,
                  "low-coherence design iterations");
  cmd->add_option("--timeout", a.cfg.trial_timeout_sec, "per-trial timeout (s)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"convolutional sparse coding toolkit"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  int threads = 1;
  std::string out;
  std::string format = "csv";
  app.add_option("--seed", seed, "root seed")->capture_default_str();
  app.add_option("--threads", threads, "worker threads")->capture_default_str();
  app.add_option("--out", out, "output path (default: stdout)");
  app.add_option("--format", format, "table format: csv|json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();

  GenDictArgs gd;
  CLI::App* gen_dict = app.add_subcommand("gen-dict", "generate a local dictionary");
  gen_dict->fallthrough();
  gen_dict->add_option("--n", gd.n, "filter length")->capture_default_str();
  gen_dict->add_option("--m", gd.m, "number of filters")->capture_default_str();
  gen_dict->add_flag("--low-coherence", gd.low_coherence,
                     "run the coherence-reduction design");
  gen_dict->add_option("--iters", gd.iters, "design iterations")
      ->capture_default_str();

  GenSignalArgs gs;
  CLI::App* gen_signal =
      app.add_subcommand("gen-signal", "generate a sparse code and its signal");
  gen_signal->fallthrough();
  gen_signal->add_option("--dict", gs.dict_path, "dictionary file")->required();
  gen_signal->add_option("--N", gs.N, "signal length")->capture_default_str();
  gen_signal->add_option("--cardinality", gs.cardinality, "number of nonzeros")
      ->capture_default_str();
  gen_signal->add_option("--code-out", gs.code_out, "sparse code output path");
  gen_signal->add_option("--signal-out", gs.signal_out, "signal output path");

  MeasureArgs me;
  CLI::App* measure = app.add_subcommand("measure", "sparsity and coherence measures");
  measure->fallthrough();
  measure->add_option("--dict", me.dict_path, "dictionary file")->required();
  measure->add_option("--code", me.code_path, "sparse code file")->required();
  measure->add_option("--profile-out", me.profile_out,
                      "write the shifted coherence profile CSV here");

  SparkArgs sp;
  CLI::App* spark = app.add_subcommand("spark", "brute-force spark certificates");
  spark->fallthrough();
  spark->add_option("--dict", sp.dict_path, "dictionary file")->required();
  spark->add_option("--kind", sp.kind, "spark|stripe_spark")->capture_default_str();
  spark->add_option("--N", sp.N, "signal length (default: filter length)");
  spark->add_option("--max-card", sp.max_card,
                    "search limit (cardinality or l0_inf; default exhaustive)");
  spark->add_flag("--allow-large", sp.allow_large,
                  "override the enumeration size guard");

  PursueArgs pu;
  CLI::App* pursue = app.add_subcommand("pursue", "run a pursuit solver");
  pursue->fallthrough();
  pursue->add_option("--solver", pu.solver, "omp|bp")->capture_default_str();
  pursue->add_option("--dict", pu.dict_path, "dictionary file")->required();
  pursue->add_option("--signal", pu.signal_path, "signal file")->required();
  pursue->add_option("--json-out", pu.json_out, "result JSON path");
  pursue->add_option("--code-out", pu.code_out, "recovered code path");
  pursue->add_option("--omp-max-iters", pu.omp_max_iters,
                     "OMP iteration cap (0 = number of columns)");
  pursue->add_option("--res-tol", pu.res_tol, "OMP residual tolerance")
      ->capture_default_str();
  pursue->add_option("--rho", pu.admm.rho, "ADMM penalty")->capture_default_str();
  pursue->add_option("--max-iters", pu.admm.max_iters, "ADMM iteration cap")
      ->capture_default_str();
  pursue->add_option("--eps-abs", pu.admm.eps_abs, "ADMM absolute tolerance")
      ->capture_default_str();
  pursue->add_option("--eps-rel", pu.admm.eps_rel, "ADMM relative tolerance")
      ->capture_default_str();
  pursue->add_option("--support-threshold", pu.admm.support_threshold,
                     "debias support detection threshold")
      ->capture_default_str();

  SweepArgs ph;
  CLI::App* phase =
      app.add_subcommand("phase-transition", "recovery success sweep");
  phase->fallthrough();
  add_sweep_options(phase, ph);
  phase->add_option("--solvers", ph.solvers, "omp|bp|both")->capture_default_str();
  phase->add_option("--omp-res-tol", ph.cfg.omp_res_tol, "OMP residual tolerance")
      ->capture_default_str();
  phase->add_option("--rho", ph.cfg.admm.rho, "ADMM penalty")->capture_default_str();
  phase->add_option("--admm-max-iters", ph.cfg.admm.max_iters, "ADMM iteration cap")
      ->capture_default_str();
  phase->add_option("--eps-abs", ph.cfg.admm.eps_abs, "ADMM absolute tolerance")
      ->capture_default_str();
  phase->add_option("--eps-rel", ph.cfg.admm.eps_rel, "ADMM relative tolerance")
      ->capture_default_str();
  phase->add_option("--support-threshold", ph.cfg.admm.support_threshold,
                    "debias support detection threshold")
      ->capture_default_str();
  phase->add_option("--bp-retries", ph.cfg.bp_retries,
                    "extra BP attempts with doubled budget")
      ->capture_default_str();
  phase->add_option("--recovery-tol", ph.cfg.recovery_tol,
                    "exact-recovery coefficient tolerance")
      ->capture_default_str();

  SweepArgs sc;
  CLI::App* scatter =
      app.add_subcommand("coherence-scatter", "l0_inf vs stripe coherence");
  scatter->fallthrough();
  add_sweep_options(scatter, sc);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (gen_dict->parsed()) run_gen_dict(gd, seed, out);
    if (gen_signal->parsed()) run_gen_signal(gs, seed);
    if (measure->parsed()) run_measure(me, out);
    if (spark->parsed()) run_spark(sp, out);
    if (pursue->parsed()) run_pursue(pu);
    if (phase->parsed()) run_phase(ph, seed, threads, format, out);
    if (scatter->parsed()) run_scatter(sc, seed, threads, format, out);
  } catch (const csc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const csc::ValidationError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const csc::DimensionError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const csc::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
