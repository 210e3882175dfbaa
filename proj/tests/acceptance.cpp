// Acceptance gate: eleven end-to-end checks of the library's headline
// behaviors, from bound arithmetic to full phase-transition sweeps. Each
// check prints one PASS/FAIL line with its measured evidence; the process
// exits nonzero if any check fails.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "csc/csc.hpp"
#include "oracles.hpp"

namespace {

int failures = 0;
int next_index = 1;

void report(bool ok, const std::string& label, const std::string& evidence) {
  std::printf("[%2d/11] %s  %s (%s)\n", next_index++, ok ? "PASS" : "FAIL",
              label.c_str(), evidence.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

int wrap(int v, int N) { return ((v % N) + N) % N; }

csc::SparseCode random_code(int N, int m, int card, csc::Rng& rng) {
  csc::SparseCode code(N, m);
  for (int col : rng.sample_without_replacement(N * m, card)) {
    double v = rng.next_gaussian();
    while (v == 0.0) v = rng.next_gaussian();
    code.values()[col] = v;
  }
  return code;
}

// Independent per-coefficient stripe-coherence evaluation on the dense
// value vector, one window at a time.
Eigen::VectorXd zeta_by_enumeration(const csc::SparseCode& code,
                                    const csc::CoherenceProfile& prof) {
  const int N = code.N(), m = code.m(), n = prof.n;
  Eigen::VectorXd zeta = Eigen::VectorXd::Zero(N);
  for (int i = 0; i < N; ++i) {
    double acc = 0.0;
    for (int s = -(n - 1); s <= n - 1; ++s) {
      const int chunk = wrap(i + s, N);
      for (int f = 0; f < m; ++f)
        if (code.values()[chunk * m + f] != 0.0) acc += prof.at(s);
    }
    zeta[i] = acc;
  }
  return zeta;
}

// ---------------------------------------------------------------------------

void check_welch() {
  const double w = csc::welch_lower_bound(64, 2);
  report(std::abs(w - 0.0629) <= 0.0005, "Welch-type bound at n=64, m=2",
         "value " + std::to_string(w) + ", target 0.0629 +/- 0.0005");
}

struct FrozenDict {
  csc::LocalDictionary local;
  double mu = 0.0;
  std::string path;
};

FrozenDict frozen_dictionary() {
  FrozenDict f{csc::low_coherence_local(64, 2, 1), 0.0,
               "/tmp/csc_acceptance_dict.txt"};
  f.mu = csc::shifted_coherence_profile(f.local).max();
  csc::write_dictionary(f.local, f.path);
  return f;
}

void check_guaranteed_region(const FrozenDict& f) {
  csc::ExperimentConfig cfg;
  cfg.source = csc::DictSource::file;
  cfg.dict_path = f.path;
  cfg.N = 640;
  cfg.card_lo = 1;
  cfg.card_hi = 6;
  cfg.trials_per_cardinality = 350;
  cfg.seed = 101;
  const csc::PhaseTable table = csc::run_phase_transition(cfg);

  long guaranteed = 0, omp_fail = 0, bp_fail = 0, errors = 0;
  for (const csc::PhaseBin& bin : table.rows) {
    errors += bin.errors;
    if (static_cast<double>(bin.l0_inf) < table.bound) {
      guaranteed += bin.count;
      omp_fail += bin.count - bin.omp_success;
      bp_fail += bin.count - bin.bp_success;
    }
  }
  std::ostringstream ev;
  ev << "mu " << f.mu << ", bound " << table.bound << ", " << guaranteed
     << " guaranteed trials, omp failures " << omp_fail << ", bp failures "
     << bp_fail << ", errors " << errors;
  report(f.mu <= 0.12 && std::abs(table.mu - f.mu) <= 1e-12 &&
             guaranteed >= 2000 && omp_fail == 0 && bp_fail == 0 && errors == 0,
         "both solvers exact on every trial below the coherence bound",
         ev.str());
}

void check_phase_shape(const FrozenDict& f) {
  csc::ExperimentConfig cfg;
  cfg.source = csc::DictSource::file;
  cfg.dict_path = f.path;
  cfg.N = 640;

  // Densities around twice the bound: success should still be near-certain.
  cfg.card_lo = 38;
  cfg.card_hi = 46;
  cfg.trials_per_cardinality = 40;
  cfg.seed = 102;
  const csc::PhaseTable mid = csc::run_phase_transition(cfg);
  long cnt = 0, omp_ok = 0, bp_ok = 0;
  for (const csc::PhaseBin& bin : mid.rows)
    if (bin.l0_inf >= 11 && bin.l0_inf <= 14) {
      cnt += bin.count;
      omp_ok += bin.omp_success;
      bp_ok += bin.bp_success;
    }

  // Far denser codes: recovery must visibly decay.
  cfg.card_lo = 320;
  cfg.card_hi = 320;
  cfg.trials_per_cardinality = 16;
  cfg.seed = 103;
  cfg.admm.max_iters = 4000;
  cfg.bp_retries = 0;
  const csc::PhaseTable far = csc::run_phase_transition(cfg);
  long fcnt = 0, fomp = 0, fbp = 0;
  for (const csc::PhaseBin& bin : far.rows) {
    fcnt += bin.count;
    fomp += bin.omp_success;
    fbp += bin.bp_success;
  }

  const bool mid_ok = cnt >= 100 &&
                      omp_ok >= static_cast<long>(0.95 * static_cast<double>(cnt)) &&
                      bp_ok >= static_cast<long>(0.95 * static_cast<double>(cnt));
  const bool far_ok = fcnt >= 12 && 2 * fomp <= fcnt && 2 * fbp <= fcnt;
  std::ostringstream ev;
  ev << "at ~2x bound: " << omp_ok << "/" << cnt << " omp, " << bp_ok << "/"
     << cnt << " bp; dense codes: " << fomp << "/" << fcnt << " omp, " << fbp
     << "/" << fcnt << " bp";
  report(mid_ok && far_ok,
         "success holds far beyond the bound and decays at high density",
         ev.str());
}

void check_stripe_spark_bound() {
  struct Shape { int n, m, N; };
  const std::vector<Shape> shapes = {{2, 2, 6}, {2, 2, 7}, {2, 2, 8},
                                     {3, 2, 6}, {3, 2, 7}, {2, 3, 5},
                                     {3, 3, 5}, {2, 4, 4}, {4, 2, 8}};
  int found = 0, violations = 0;
  for (int i = 0; i < 63; ++i) {
    const Shape& s = shapes[static_cast<std::size_t>(i) % shapes.size()];
    const csc::ConvDictionary D(
        csc::random_local(s.n, s.m, 9000 + static_cast<std::uint64_t>(i)), s.N);
    const csc::SparkCertificate cert =
        csc::stripe_spark_bruteforce(D, (2 * s.n - 1) * s.m);
    if (!cert.found) continue;
    ++found;
    const double mu = csc::mutual_coherence(D);
    if (static_cast<double>(cert.value) < 1.0 + 1.0 / mu - 1e-9) ++violations;
  }
  report(found >= 50 && violations == 0,
         "stripe-spark never undercuts 1 + 1/mu",
         std::to_string(found) + " dictionaries solved, " +
             std::to_string(violations) + " violations");
}

void check_gram_bracket() {
  csc::Rng rng(424242);
  int checked = 0, violations = 0;
  while (checked < 1000) {
    const int n = 2 + static_cast<int>(rng.next_below(3));
    const int m = 1 + static_cast<int>(rng.next_below(3));
    const int N = n + static_cast<int>(rng.next_below(9));
    const csc::ConvDictionary D(csc::random_local(n, m, rng.next_u64()), N);
    const int cols = D.cols();
    if (cols < 2) continue;
    const int card = 1 + static_cast<int>(
                             rng.next_below(static_cast<std::uint64_t>(
                                 std::min(8, cols))));
    const std::vector<int> support = rng.sample_without_replacement(cols, card);
    if (!csc::verify_gershgorin(D, support).ok) ++violations;
    ++checked;
  }
  report(violations == 0, "support Gram spectra stay in the coherence bracket",
         std::to_string(checked) + " random supports, " +
             std::to_string(violations) + " escapes");
}

void check_l0inf_properties() {
  csc::Rng rng(777);
  int violations = 0;
  const int pairs = 10000;
  for (int t = 0; t < pairs; ++t) {
    const int n = 2 + static_cast<int>(rng.next_below(4));
    const int m = 1 + static_cast<int>(rng.next_below(4));
    const int N = n + static_cast<int>(rng.next_below(9));
    const int cols = N * m;
    const int cap = std::min(6, cols);
    const csc::SparseCode a =
        random_code(N, m, static_cast<int>(rng.next_below(
                              static_cast<std::uint64_t>(cap + 1))),
                    rng);
    csc::SparseCode b =
        random_code(N, m, static_cast<int>(rng.next_below(
                              static_cast<std::uint64_t>(cap + 1))),
                    rng);
    if (rng.next_below(3) == 0 && !a.support().empty()) {
      // Force collisions: move one of b's entries onto a's first position.
      b.values()[a.support().front()] = rng.next_gaussian() + 3.0;
    }
    const csc::SparseCode sum(N, m, a.values() + b.values());
    if (csc::l0_inf(sum, n) > csc::l0_inf(a, n) + csc::l0_inf(b, n))
      ++violations;
  }

  // Scaling leaves the support untouched, so the count does not scale.
  csc::SparseCode g(4, 1);
  g.values()[0] = 1.0;
  g.values()[1] = 1.0;
  const csc::SparseCode g3(4, 1, 3.0 * g.values());
  const bool witness =
      csc::l0_inf(g, 2) == 2 && csc::l0_inf(g3, 2) == 2 && 2 != 3 * 2;
  report(violations == 0 && witness,
         "count is subadditive but not absolutely homogeneous",
         std::to_string(pairs) + " pairs, " + std::to_string(violations) +
             " triangle violations; scaling witness " +
             (witness ? "holds" : "missing"));
}

void check_profile_properties() {
  csc::Rng rng(31337);
  int dicts = 0, codes = 0, violations = 0;
  for (int t = 0; t < 100; ++t) {
    const int n = 2 + static_cast<int>(rng.next_below(5));
    const int m = 1 + static_cast<int>(rng.next_below(4));
    const csc::LocalDictionary local = csc::random_local(n, m, rng.next_u64());
    const csc::CoherenceProfile prof = csc::shifted_coherence_profile(local);
    ++dicts;

    for (int s = 1; s <= n - 1; ++s)
      if (std::abs(prof.at(s) - prof.at(-s)) > 1e-15) ++violations;
    if (prof.mu0() > prof.max()) ++violations;

    const int N = 2 * n - 1 + static_cast<int>(rng.next_below(4));
    const Eigen::MatrixXd dense = oracles::shift_and_place(local, N);
    if (std::abs(prof.max() - oracles::dense_gram_coherence(dense)) > 1e-12)
      ++violations;

    if (t % 2 == 0) {
      for (int c = 0; c < 20; ++c) {
        const int cols = N * m;
        const int card = static_cast<int>(rng.next_below(
            static_cast<std::uint64_t>(std::min(8, cols) + 1)));
        const csc::SparseCode code = random_code(N, m, card, rng);
        const csc::StripeCoherence sc = csc::stripe_coherence(code, prof);
        const Eigen::VectorXd direct = zeta_by_enumeration(code, prof);
        if ((sc.zeta - direct).cwiseAbs().maxCoeff() > 1e-12) ++violations;
        if (std::abs(sc.max - direct.maxCoeff()) > 1e-12) ++violations;
        ++codes;
      }
    }
  }
  report(dicts >= 100 && codes >= 1000 && violations == 0,
         "shifted-coherence profile invariants and stripe sums",
         std::to_string(dicts) + " dictionaries, " + std::to_string(codes) +
             " codes, " + std::to_string(violations) + " violations");
}

void check_stripe_monotonicity() {
  csc::Rng rng(2024);
  int pairs = 0, violations = 0;
  while (pairs < 1000) {
    const int n = 2 + static_cast<int>(rng.next_below(4));
    const int m = 1 + static_cast<int>(rng.next_below(3));
    const int N = n + static_cast<int>(rng.next_below(9));
    const int cols = N * m;
    const int card = 2 + static_cast<int>(rng.next_below(
                             static_cast<std::uint64_t>(
                                 std::min(8, cols) - 1)));
    const csc::LocalDictionary local = csc::random_local(n, m, rng.next_u64());
    const csc::CoherenceProfile prof = csc::shifted_coherence_profile(local);
    const csc::SparseCode big = random_code(N, m, card, rng);
    Eigen::VectorXd sub = big.values();
    for (int col : big.support())
      if (rng.next_below(2) == 0) sub[col] = 0.0;
    const csc::SparseCode small(N, m, sub);
    if (csc::stripe_coherence(small, prof).max >
        csc::stripe_coherence(big, prof).max + 1e-12)
      ++violations;
    ++pairs;
  }
  report(violations == 0, "stripe coherence is monotone under support growth",
         std::to_string(pairs) + " nested pairs, " +
             std::to_string(violations) + " violations");
}

void check_dominance() {
  csc::Rng rng(5150);
  int dicts = 0, pairs = 0, violations = 0, attempts = 0;
  while (dicts < 100 && attempts < 20000) {
    ++attempts;
    const int n = 2 + static_cast<int>(rng.next_below(3));
    const int m = 2 + static_cast<int>(rng.next_below(2));
    csc::LocalDictionary local = [&] {
      if (attempts % 2 == 0) return csc::random_local(n, m, rng.next_u64());
      // Positive decaying filters: unshifted overlaps dominate shifted ones.
      Eigen::MatrixXd A(n, m);
      for (int f = 0; f < m; ++f) {
        const double r = 0.15 + 0.35 * rng.next_double();
        double v = 0.5 + rng.next_double();
        for (int row = 0; row < n; ++row, v *= r) A(row, f) = v;
      }
      return csc::LocalDictionary::normalized(std::move(A));
    }();
    const csc::CoherenceProfile prof = csc::shifted_coherence_profile(local);
    if (std::abs(prof.max() - prof.mu0()) > 1e-12 || prof.mu0() > 0.999)
      continue;
    ++dicts;

    const int N = 3 * n;
    int kept = 0, tries = 0;
    while (kept < 10 && tries < 300) {
      ++tries;
      const int card = 1 + static_cast<int>(rng.next_below(2));
      const csc::SparseCode code = random_code(N, m, card, rng);
      const csc::DominanceReport rep = csc::guarantee_dominance_check(code, prof);
      if (!rep.applicable || !rep.l0inf_ok) continue;
      ++kept;
      ++pairs;
      if (!rep.stripe_ok || !rep.consistent) ++violations;
    }
  }
  report(dicts >= 100 && pairs >= 1000 && violations == 0,
         "density guarantee implies the stripe guarantee at peak shift zero",
         std::to_string(dicts) + " dictionaries, " + std::to_string(pairs) +
             " qualifying codes, " + std::to_string(violations) +
             " violations");
}

void check_solver_oracles() {
  csc::Rng rng(86753);
  int exact = 0, exact_fail = 0;

  struct Shape { int n, m, N; };
  const std::vector<Shape> tiny = {{2, 2, 8}, {3, 2, 8},  {2, 2, 10},
                                   {3, 1, 12}, {4, 2, 9}, {2, 3, 6}};
  for (int t = 0; t < 120; ++t) {
    const Shape& s = tiny[static_cast<std::size_t>(t) % tiny.size()];
    csc::ConvDictionary D(csc::random_local(s.n, s.m, rng.next_u64()), s.N);
    double mu = csc::mutual_coherence(D);
    while (mu >= 0.999) {
      D = csc::ConvDictionary(csc::random_local(s.n, s.m, rng.next_u64()), s.N);
      mu = csc::mutual_coherence(D);
    }
    const csc::GeneratedSignal gen = csc::gen_signal(D, 1, rng);
    const csc::PursuitResult o = csc::omp(D, gen.signal, 1);
    const csc::PursuitResult b = csc::basis_pursuit(D, gen.signal);
    const Eigen::VectorXd p0 = csc::p0_bruteforce(csc::materialize_dense(D),
                                                  gen.signal);
    ++exact;
    if (!csc::check_exact_recovery(gen.code, o.code).ok ||
        !csc::check_exact_recovery(gen.code, b.code).ok ||
        (p0 - gen.code.values()).cwiseAbs().maxCoeff() > 1e-6)
      ++exact_fail;
  }

  int designed = 0;
  std::uint64_t seed = 0;
  while (designed < 8 && seed < 60) {
    ++seed;
    const csc::LocalDictionary local =
        csc::low_coherence_local(5, 2, seed, {.iterations = 400});
    const csc::ConvDictionary D(local, 10);
    if (csc::mutual_coherence(D) > 0.32) continue;
    ++designed;
    for (int c = 0; c < 10; ++c) {
      const csc::GeneratedSignal gen = csc::gen_signal(D, 2, rng);
      const csc::PursuitResult o = csc::omp(D, gen.signal, 2);
      const csc::PursuitResult b = csc::basis_pursuit(D, gen.signal);
      const Eigen::VectorXd p0 = csc::p0_bruteforce(csc::materialize_dense(D),
                                                    gen.signal);
      ++exact;
      if (!csc::check_exact_recovery(gen.code, o.code).ok ||
          !csc::check_exact_recovery(gen.code, b.code).ok ||
          (p0 - gen.code.values()).cwiseAbs().maxCoeff() > 1e-6)
        ++exact_fail;
    }
  }

  int lp = 0, lp_fail = 0;
  for (int t = 0; t < 50; ++t) {
    const int N = (t % 2 == 0) ? 4 : 6;
    const csc::ConvDictionary D(csc::random_local(2, 2, rng.next_u64()), N);
    const int card = 1 + static_cast<int>(rng.next_below(2));
    const csc::GeneratedSignal gen = csc::gen_signal(D, card, rng);
    const csc::PursuitResult b = csc::basis_pursuit(
        D, gen.signal, {.eps_abs = 1e-10, .eps_rel = 1e-10});
    const double best = oracles::l1_minimum_by_vertex_enumeration(
        csc::materialize_dense(D), gen.signal);
    ++lp;
    if (std::abs(b.l1_objective - best) > 1e-6) ++lp_fail;
  }

  std::ostringstream ev;
  ev << exact << " guaranteed instances (" << exact_fail << " disagreements), "
     << lp << " l1 objectives (" << lp_fail << " off the LP optimum)";
  report(exact >= 200 && exact_fail == 0 && lp >= 50 && lp_fail == 0,
         "omp and bp match the exhaustive oracles on tiny instances", ev.str());
}

void check_thread_reproducibility() {
  csc::ExperimentConfig cfg;
  cfg.n = 6;
  cfg.m = 2;
  cfg.N = 48;
  cfg.card_lo = 1;
  cfg.card_hi = 4;
  cfg.trials_per_cardinality = 30;
  cfg.seed = 99;
  cfg.threads = 1;
  const csc::PhaseTable one = csc::run_phase_transition(cfg);
  cfg.threads = 8;
  csc::PhaseTable eight = csc::run_phase_transition(cfg);
  const bool csv_equal = csc::to_csv(one) == csc::to_csv(eight);
  eight.config.threads = 1;
  const bool json_equal =
      csc::to_json(one).dump(2) == csc::to_json(eight).dump(2);
  report(csv_equal && json_equal,
         "sweep tables are byte-identical across 1 and 8 threads",
         std::string("csv ") + (csv_equal ? "equal" : "differs") + ", json " +
             (json_equal ? "equal" : "differs"));
}

}  // namespace

int main() {
  check_welch();
  const FrozenDict f = frozen_dictionary();
  check_guaranteed_region(f);
  check_phase_shape(f);
  check_stripe_spark_bound();
  check_gram_bracket();
  check_l0inf_properties();
  check_profile_properties();
  check_stripe_monotonicity();
  check_dominance();
  check_solver_oracles();
  check_thread_reproducibility();
  std::remove(f.path.c_str());
  if (failures == 0) {
    std::printf("acceptance: all 11 checks passed\n");
    return 0;
  }
  std::printf("acceptance: %d of 11 checks failed\n", failures);
  return 1;
}
