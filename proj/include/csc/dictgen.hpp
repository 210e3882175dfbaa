#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <utility>

#include "csc/conv_dictionary.hpp"
#include "csc/errors.hpp"
#include "csc/local_dictionary.hpp"
#include "csc/measures.hpp"
#include "csc/rng.hpp"
#include "csc/sparse_code.hpp"

namespace csc {

// Random local dictionary: i.i.d. standard normal entries, drawn filter by
// filter (column-major), each column then normalized.
inline LocalDictionary random_local(int n, int m, Rng& stream) {
  if (n < 1 || m < 1) throw DimensionError("random_local: need n, m >= 1");
  Eigen::MatrixXd A(n, m);
  for (int f = 0; f < m; ++f)
    for (int r = 0; r < n; ++r) A(r, f) = stream.next_gaussian();
  return LocalDictionary::normalized(std::move(A));
}

inline LocalDictionary random_local(int n, int m, std::uint64_t seed) {
  Rng stream(seed);
  return random_local(n, m, stream);
}

struct LowCoherenceOptions {
  int iterations = 2000;
  double decay = 0.99;  // per-sweep decay of the target level toward the floor
  double step = 0.5;    // gradient step on correlations that exceed the target
};

// Shrink-and-reproject search for a local dictionary whose shifted
// correlations are uniformly small. Each sweep lowers a target level
// geometrically toward the packing floor, pushes every atom pair's
// out-of-bounds correlation back toward the target by a gradient step, and
// renormalizes the atoms. The best iterate (by global coherence) is kept,
// so the reported quality never regresses as iterations increase.
inline LocalDictionary low_coherence_local(int n, int m, std::uint64_t seed,
                                           const LowCoherenceOptions& opts = {}) {
  if (n < 1 || m < 1) throw DimensionError("low_coherence_local: need n, m >= 1");
  if (n == 1 && m == 1)
    throw DegenerateError("low_coherence_local: a single 1-sample atom has no pairs");
  if (opts.iterations < 0)
    throw ValidationError("low_coherence_local: iterations must be >= 0");
  if (opts.decay <= 0.0 || opts.decay >= 1.0 || opts.step <= 0.0)
    throw ValidationError("low_coherence_local: bad decay or step");

  Rng stream(seed);
  Eigen::MatrixXd A = random_local(n, m, stream).atoms();
  const double floor = welch_lower_bound(n, m);

  auto profile_max = [&](const Eigen::MatrixXd& atoms) {
    return shifted_coherence_profile(LocalDictionary(atoms)).max();
  };

  Eigen::MatrixXd best = A;
  double best_mu = profile_max(A);
  double target = best_mu;

  Eigen::MatrixXd grad(n, m);
  for (int it = 0; it < opts.iterations; ++it) {
    target = std::max(floor, target * opts.decay);
    grad.setZero();
    // Unique pairs: every (f, g) at shifts s > 0, unordered pairs at s = 0.
    for (int s = 0; s < n; ++s)
      for (int f = 0; f < m; ++f)
        for (int g = 0; g < m; ++g) {
          if (s == 0 && f >= g) continue;
          const double c = detail::shifted_atom_inner(A, f, g, s);
          const double mag = std::abs(c);
          if (mag <= target) continue;
          const double excess = c - (c > 0 ? target : -target);
          for (int r = s; r < n; ++r) {
            grad(r, f) += excess * A(r - s, g);
            grad(r - s, g) += excess * A(r, f);
          }
        }
    A -= opts.step * grad;
    for (int f = 0; f < m; ++f) {
      const double norm = A.col(f).norm();
      if (norm == 0.0) throw DegenerateError("low_coherence_local: atom collapsed");
      A.col(f) /= norm;
    }
    const double mu = profile_max(A);
    if (mu < best_mu) {
      best_mu = mu;
      best = A;
    }
  }
  return LocalDictionary::normalized(std::move(best));
}

struct GeneratedSignal {
  SparseCode code;
  Eigen::VectorXd signal;
};

// Random code with the requested cardinality (support uniform without
// replacement, coefficients standard normal assigned in ascending column
// order) and its synthesized signal.
inline GeneratedSignal gen_signal(const ConvDictionary& D, int cardinality,
                                  Rng& stream) {
  if (cardinality < 0 || cardinality > D.cols())
    throw DimensionError("gen_signal: cardinality must be in [0, N*m]");
  std::vector<int> support =
      stream.sample_without_replacement(D.cols(), cardinality);
  std::sort(support.begin(), support.end());
  SparseCode code(D.N(), D.m());
  for (int col : support) {
    double v = stream.next_gaussian();
    while (v == 0.0) v = stream.next_gaussian();
    code.values()[col] = v;
  }
  Eigen::VectorXd signal = apply(D, code);
  return GeneratedSignal{std::move(code), std::move(signal)};
}

inline GeneratedSignal gen_signal(const ConvDictionary& D, int cardinality,
                                  std::uint64_t seed) {
  Rng stream(seed);
  return gen_signal(D, cardinality, stream);
}

}  // namespace csc
