#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"

#include "csc/conv_dictionary.hpp"
#include "csc/dictgen.hpp"
#include "csc/errors.hpp"
#include "csc/io.hpp"
#include "csc/measures.hpp"
#include "csc/pursuit.hpp"
#include "csc/rng.hpp"
#include "csc/version.hpp"

namespace csc {

enum class DictSource { random, low_coherence, file };

struct ExperimentConfig {
  int n = 8;
  int m = 2;
  int N = 64;
  int card_lo = 1;
  int card_hi = 8;
  int trials_per_cardinality = 100;
  std::uint64_t seed = 0;
  bool run_omp = true;
  bool run_bp = true;
  double omp_res_tol = 1e-9;
  AdmmOptions admm;
  int bp_retries = 3;  // extra attempts with doubled iteration budget
  double recovery_tol = 1e-6;
  DictSource source = DictSource::random;
  std::string dict_path;
  LowCoherenceOptions lowco;
  int threads = 1;
  double trial_timeout_sec = 60.0;
};

namespace detail {

// Trial streams live far from the root stream used for dictionary synthesis.
inline constexpr std::uint64_t kTrialStreamBase = 0x100000000ull;

inline const char* to_string(DictSource s) {
  switch (s) {
    case DictSource::random: return "random";
    case DictSource::low_coherence: return "low_coherence";
    case DictSource::file: return "file";
  }
  throw ConfigError("unknown dictionary source");
}

inline DictSource source_from_string(const std::string& s) {
  if (s == "random") return DictSource::random;
  if (s == "low_coherence") return DictSource::low_coherence;
  if (s == "file") return DictSource::file;
  throw ConfigError("unknown dictionary source: " + s);
}

}  // namespace detail

inline void validate_config(const ExperimentConfig& cfg) {
  if (cfg.n < 1 || cfg.m < 1 || cfg.N < 1)
    throw ConfigError("config: need n, m, N >= 1");
  if (cfg.card_lo < 1 || cfg.card_hi < cfg.card_lo)
    throw ConfigError("config: need 1 <= card_lo <= card_hi");
  // A dictionary file overrides n and m, so shape-dependent limits are
  // checked against the resolved dictionary instead.
  if (cfg.source != DictSource::file) {
    if (cfg.N < cfg.n) throw ConfigError("config: need N >= n");
    if (cfg.card_hi > cfg.N * cfg.m)
      throw ConfigError("config: card_hi exceeds the number of columns");
  }
  if (cfg.trials_per_cardinality < 1)
    throw ConfigError("config: need at least one trial per cardinality");
  if (!cfg.run_omp && !cfg.run_bp)
    throw ConfigError("config: enable at least one solver");
  if (cfg.bp_retries < 0) throw ConfigError("config: bp_retries must be >= 0");
  if (cfg.recovery_tol < 0) throw ConfigError("config: recovery_tol must be >= 0");
  if (cfg.source == DictSource::file && cfg.dict_path.empty())
    throw ConfigError("config: file source needs dict_path");
  if (cfg.threads < 1) throw ConfigError("config: threads must be >= 1");
  if (cfg.trial_timeout_sec < 0)
    throw ConfigError("config: trial_timeout_sec must be >= 0");
}

// Resolves the dictionary a config describes. For file sources the file
// defines the shape, so callers should re-check cardinality bounds after.
inline LocalDictionary resolve_dictionary(const ExperimentConfig& cfg) {
  switch (cfg.source) {
    case DictSource::random: return random_local(cfg.n, cfg.m, cfg.seed);
    case DictSource::low_coherence:
      return low_coherence_local(cfg.n, cfg.m, cfg.seed, cfg.lowco);
    case DictSource::file: return read_dictionary(cfg.dict_path);
  }
  throw ConfigError("unknown dictionary source");
}

struct TrialOutcome {
  int cardinality = 0;
  int l0_inf = 0;
  signed char omp_ok = -1;  // -1 = solver not run
  signed char bp_ok = -1;
  bool error = false;
};

// One phase-transition trial. Each trial owns a counter-based stream derived
// from (seed, trial index), so outcomes do not depend on scheduling order.
inline TrialOutcome run_trial(const ConvDictionary& D, const ExperimentConfig& cfg,
                              long index) {
  const int cardinality =
      cfg.card_lo + static_cast<int>(index / cfg.trials_per_cardinality);
  Rng stream = Rng::stream(cfg.seed, detail::kTrialStreamBase +
                                         static_cast<std::uint64_t>(index));
  TrialOutcome out;
  out.cardinality = cardinality;
  const auto start = std::chrono::steady_clock::now();
  const auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
  };
  try {
    const GeneratedSignal gen = gen_signal(D, cardinality, stream);
    out.l0_inf = l0_inf(gen.code, D.n());
    if (cfg.run_omp) {
      const PursuitResult r = omp(D, gen.signal, cardinality, cfg.omp_res_tol);
      out.omp_ok = check_exact_recovery(gen.code, r.code, cfg.recovery_tol).ok;
    }
    if (cfg.run_bp) {
      AdmmOptions admm = cfg.admm;
      std::optional<PursuitResult> r;
      for (int attempt = 0; attempt <= cfg.bp_retries; ++attempt) {
        admm.time_limit_sec = cfg.trial_timeout_sec - elapsed();
        r = basis_pursuit(D, gen.signal, admm);
        if (r->converged || elapsed() > cfg.trial_timeout_sec) break;
        admm.max_iters *= 2;
      }
      out.bp_ok = check_exact_recovery(gen.code, r->code, cfg.recovery_tol).ok;
    }
    if (elapsed() > cfg.trial_timeout_sec) out.error = true;
  } catch (const std::exception&) {
    out.error = true;
  }
  return out;
}

// Static work queue: deterministic results regardless of thread count because
// each item is independent and lands in its own slot.
inline void parallel_for(long total, int threads,
                         const std::function<void(long)>& fn) {
  if (total <= 0) return;
  const long workers = std::min<long>(std::max(threads, 1), total);
  if (workers <= 1) {
    for (long i = 0; i < total; ++i) fn(i);
    return;
  }
  std::atomic<long> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (long w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (long i = next.fetch_add(1); i < total; i = next.fetch_add(1)) fn(i);
    });
  for (auto& th : pool) th.join();
}

struct PhaseBin {
  int l0_inf = 0;
  long count = 0;        // trials that completed without error
  long omp_success = 0;
  long bp_success = 0;
  long errors = 0;
};

struct PhaseTable {
  std::vector<PhaseBin> rows;  // ascending l0_inf
  double mu = 0.0;
  double mu0 = 0.0;
  double bound = 0.0;  // (1 + 1/mu)/2, +inf when mu == 0
  double welch = 0.0;
  ExperimentConfig config;
  std::string version;
};

inline PhaseTable run_phase_transition(ExperimentConfig cfg) {
  validate_config(cfg);
  const LocalDictionary local = resolve_dictionary(cfg);
  cfg.n = local.n();
  cfg.m = local.m();
  if (cfg.N < cfg.n) throw ConfigError("config: need N >= n (dictionary file)");
  if (cfg.card_hi > cfg.N * cfg.m)
    throw ConfigError("config: card_hi exceeds the number of columns (dictionary file)");
  const ConvDictionary D(local, cfg.N);

  PhaseTable table;
  table.config = cfg;
  table.version = kVersion;
  table.mu = mutual_coherence(D);
  table.mu0 = (cfg.n == 1 && cfg.m == 1)
                  ? 0.0
                  : shifted_coherence_profile(local).mu0();
  table.bound = table.mu > 0.0
                    ? 0.5 * (1.0 + 1.0 / table.mu)
                    : std::numeric_limits<double>::infinity();
  table.welch = welch_lower_bound(cfg.n, cfg.m);

  const long total =
      static_cast<long>(cfg.card_hi - cfg.card_lo + 1) * cfg.trials_per_cardinality;
  std::vector<TrialOutcome> results(static_cast<std::size_t>(total));
  parallel_for(total, cfg.threads,
               [&](long i) { results[static_cast<std::size_t>(i)] = run_trial(D, cfg, i); });

  std::map<int, PhaseBin> bins;
  for (const TrialOutcome& r : results) {
    PhaseBin& b = bins[r.l0_inf];
    b.l0_inf = r.l0_inf;
    if (r.error) {
      ++b.errors;
      continue;
    }
    ++b.count;
    if (r.omp_ok == 1) ++b.omp_success;
    if (r.bp_ok == 1) ++b.bp_success;
  }
  table.rows.reserve(bins.size());
  for (const auto& [key, bin] : bins) table.rows.push_back(bin);
  return table;
}

struct ScatterPoint {
  long trial = 0;
  int cardinality = 0;
  int l0_inf = 0;
  double max_stripe_coherence = 0.0;
};

struct ScatterTable {
  std::vector<ScatterPoint> points;  // trial order
  double pearson = 0.0;
  double mu = 0.0;
  double mu0 = 0.0;
  double welch = 0.0;
  ExperimentConfig config;
  std::string version;
};

inline double pearson_correlation(const std::vector<double>& x,
                                  const std::vector<double>& y) {
  if (x.size() != y.size()) throw DimensionError("pearson: length mismatch");
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

// Samples random codes across the cardinality range and records, per trial,
// the local sparsity against the maximum stripe coherence of its support.
inline ScatterTable run_coherence_scatter(ExperimentConfig cfg) {
  validate_config(cfg);
  const LocalDictionary local = resolve_dictionary(cfg);
  cfg.n = local.n();
  cfg.m = local.m();
  if (cfg.N < cfg.n) throw ConfigError("config: need N >= n (dictionary file)");
  if (cfg.card_hi > cfg.N * cfg.m)
    throw ConfigError("config: card_hi exceeds the number of columns (dictionary file)");
  if (cfg.n == 1 && cfg.m == 1)
    throw ConfigError("coherence scatter needs more than one atom sample");
  const ConvDictionary D(local, cfg.N);
  const CoherenceProfile profile = shifted_coherence_profile(local);

  ScatterTable table;
  table.config = cfg;
  table.version = kVersion;
  table.mu = mutual_coherence(D);
  table.mu0 = profile.mu0();
  table.welch = welch_lower_bound(cfg.n, cfg.m);

  const long total =
      static_cast<long>(cfg.card_hi - cfg.card_lo + 1) * cfg.trials_per_cardinality;
  table.points.assign(static_cast<std::size_t>(total), ScatterPoint{});
  parallel_for(total, cfg.threads, [&](long i) {
    const int cardinality =
        cfg.card_lo + static_cast<int>(i / cfg.trials_per_cardinality);
    Rng stream = Rng::stream(cfg.seed, detail::kTrialStreamBase +
                                           static_cast<std::uint64_t>(i));
    const GeneratedSignal gen = gen_signal(D, cardinality, stream);
    ScatterPoint& p = table.points[static_cast<std::size_t>(i)];
    p.trial = i;
    p.cardinality = cardinality;
    p.l0_inf = l0_inf(gen.code, D.n());
    p.max_stripe_coherence = stripe_coherence(gen.code, profile).max;
  });

  std::vector<double> xs, ys;
  xs.reserve(table.points.size());
  ys.reserve(table.points.size());
  for (const ScatterPoint& p : table.points) {
    xs.push_back(static_cast<double>(p.l0_inf));
    ys.push_back(p.max_stripe_coherence);
  }
  table.pearson = pearson_correlation(xs, ys);
  return table;
}

// --- serialization ---------------------------------------------------------

namespace detail {

inline nlohmann::ordered_json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["n"] = cfg.n;
  j["m"] = cfg.m;
  j["N"] = cfg.N;
  j["card_lo"] = cfg.card_lo;
  j["card_hi"] = cfg.card_hi;
  j["trials_per_cardinality"] = cfg.trials_per_cardinality;
  j["seed"] = cfg.seed;
  j["run_omp"] = cfg.run_omp;
  j["run_bp"] = cfg.run_bp;
  j["omp_res_tol"] = cfg.omp_res_tol;
  j["admm_rho"] = cfg.admm.rho;
  j["admm_max_iters"] = cfg.admm.max_iters;
  j["admm_eps_abs"] = cfg.admm.eps_abs;
  j["admm_eps_rel"] = cfg.admm.eps_rel;
  j["admm_support_threshold"] = cfg.admm.support_threshold;
  j["bp_retries"] = cfg.bp_retries;
  j["recovery_tol"] = cfg.recovery_tol;
  j["source"] = to_string(cfg.source);
  j["dict_path"] = cfg.dict_path;
  j["lowco_iterations"] = cfg.lowco.iterations;
  j["threads"] = cfg.threads;
  j["trial_timeout_sec"] = cfg.trial_timeout_sec;
  return j;
}

inline ExperimentConfig config_from_json(const nlohmann::ordered_json& j) {
  ExperimentConfig cfg;
  cfg.n = j.at("n").get<int>();
  cfg.m = j.at("m").get<int>();
  cfg.N = j.at("N").get<int>();
  cfg.card_lo = j.at("card_lo").get<int>();
  cfg.card_hi = j.at("card_hi").get<int>();
  cfg.trials_per_cardinality = j.at("trials_per_cardinality").get<int>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.run_omp = j.at("run_omp").get<bool>();
  cfg.run_bp = j.at("run_bp").get<bool>();
  cfg.omp_res_tol = j.at("omp_res_tol").get<double>();
  cfg.admm.rho = j.at("admm_rho").get<double>();
  cfg.admm.max_iters = j.at("admm_max_iters").get<int>();
  cfg.admm.eps_abs = j.at("admm_eps_abs").get<double>();
  cfg.admm.eps_rel = j.at("admm_eps_rel").get<double>();
  cfg.admm.support_threshold = j.at("admm_support_threshold").get<double>();
  cfg.bp_retries = j.at("bp_retries").get<int>();
  cfg.recovery_tol = j.at("recovery_tol").get<double>();
  cfg.source = source_from_string(j.at("source").get<std::string>());
  cfg.dict_path = j.at("dict_path").get<std::string>();
  cfg.lowco.iterations = j.at("lowco_iterations").get<int>();
  cfg.threads = j.at("threads").get<int>();
  cfg.trial_timeout_sec = j.at("trial_timeout_sec").get<double>();
  return cfg;
}

inline double rate(long hits, long count) {
  return count > 0 ? static_cast<double>(hits) / static_cast<double>(count) : 0.0;
}

}  // namespace detail

inline std::string to_csv(const PhaseTable& table) {
  std::ostringstream out;
  out << "l0_inf,count,omp_success_rate,bp_success_rate,errors\n";
  for (const PhaseBin& b : table.rows)
    out << b.l0_inf << ',' << b.count << ','
        << detail::format_double(detail::rate(b.omp_success, b.count)) << ','
        << detail::format_double(detail::rate(b.bp_success, b.count)) << ','
        << b.errors << '\n';
  return out.str();
}

inline nlohmann::ordered_json to_json(const PhaseTable& table) {
  nlohmann::ordered_json j;
  j["version"] = table.version;
  nlohmann::ordered_json meta;
  meta["mu"] = table.mu;
  meta["mu0"] = table.mu0;
  meta["bound"] = std::isfinite(table.bound) ? nlohmann::ordered_json(table.bound)
                                             : nlohmann::ordered_json(nullptr);
  meta["welch"] = table.welch;
  meta["seed"] = table.config.seed;
  meta["config"] = detail::config_to_json(table.config);
  j["metadata"] = meta;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const PhaseBin& b : table.rows) {
    nlohmann::ordered_json row;
    row["l0_inf"] = b.l0_inf;
    row["count"] = b.count;
    row["omp_success"] = b.omp_success;
    row["bp_success"] = b.bp_success;
    row["omp_success_rate"] = detail::rate(b.omp_success, b.count);
    row["bp_success_rate"] = detail::rate(b.bp_success, b.count);
    row["errors"] = b.errors;
    rows.push_back(row);
  }
  j["rows"] = rows;
  return j;
}

inline PhaseTable phase_table_from_json(const nlohmann::ordered_json& j) {
  try {
    PhaseTable table;
    table.version = j.at("version").get<std::string>();
    const auto& meta = j.at("metadata");
    table.mu = meta.at("mu").get<double>();
    table.mu0 = meta.at("mu0").get<double>();
    table.bound = meta.at("bound").is_null()
                      ? std::numeric_limits<double>::infinity()
                      : meta.at("bound").get<double>();
    table.welch = meta.at("welch").get<double>();
    table.config = detail::config_from_json(meta.at("config"));
    for (const auto& row : j.at("rows")) {
      PhaseBin b;
      b.l0_inf = row.at("l0_inf").get<int>();
      b.count = row.at("count").get<long>();
      b.omp_success = row.at("omp_success").get<long>();
      b.bp_success = row.at("bp_success").get<long>();
      b.errors = row.at("errors").get<long>();
      table.rows.push_back(b);
    }
    return table;
  } catch (const nlohmann::ordered_json::exception& e) {
    throw IoError(std::string("phase table JSON: ") + e.what());
  }
}

inline std::string to_csv(const ScatterTable& table) {
  std::ostringstream out;
  out << "trial,cardinality,l0_inf,max_stripe_coherence\n";
  for (const ScatterPoint& p : table.points)
    out << p.trial << ',' << p.cardinality << ',' << p.l0_inf << ','
        << detail::format_double(p.max_stripe_coherence) << '\n';
  return out.str();
}

inline nlohmann::ordered_json to_json(const ScatterTable& table) {
  nlohmann::ordered_json j;
  j["version"] = table.version;
  nlohmann::ordered_json meta;
  meta["mu"] = table.mu;
  meta["mu0"] = table.mu0;
  meta["welch"] = table.welch;
  meta["pearson"] = table.pearson;
  meta["seed"] = table.config.seed;
  meta["config"] = detail::config_to_json(table.config);
  j["metadata"] = meta;
  nlohmann::ordered_json points = nlohmann::ordered_json::array();
  for (const ScatterPoint& p : table.points) {
    nlohmann::ordered_json row;
    row["trial"] = p.trial;
    row["cardinality"] = p.cardinality;
    row["l0_inf"] = p.l0_inf;
    row["max_stripe_coherence"] = p.max_stripe_coherence;
    points.push_back(row);
  }
  j["points"] = points;
  return j;
}

}  // namespace csc
