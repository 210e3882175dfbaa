#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "csc/conv_dictionary.hpp"
#include "csc/errors.hpp"
#include "csc/local_dictionary.hpp"
#include "csc/sparse_code.hpp"

namespace csc {

// Count of entries with |v| > tol. tol = 0 means exact nonzeros (synthetic
// codes); pass a small threshold for solver outputs.
inline int l0(const Eigen::VectorXd& v, double tol = 0.0) {
  if (tol < 0.0) throw ValidationError("l0 threshold must be non-negative");
  int count = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (std::abs(v[i]) > tol) ++count;
  return count;
}

namespace detail {

// Per-chunk nonzero counts of a code.
inline std::vector<int> chunk_counts(const SparseCode& code, double tol) {
  std::vector<int> counts(static_cast<std::size_t>(code.N()), 0);
  const Eigen::VectorXd& v = code.values();
  const int m = code.m();
  for (int j = 0; j < code.size(); ++j)
    if (std::abs(v[j]) > tol) ++counts[static_cast<std::size_t>(j / m)];
  return counts;
}

// Circular sums of `counts` over windows of 2n-1 chunks centered at every
// position. Chunks are revisited when the window wraps past the signal
// length, matching what extract_stripe concatenates.
inline std::vector<int> window_sums(const std::vector<int>& counts, int window_n) {
  const int N = static_cast<int>(counts.size());
  std::vector<int> sums(static_cast<std::size_t>(N), 0);
  int acc = 0;
  for (int s = -(window_n - 1); s <= window_n - 1; ++s)
    acc += counts[static_cast<std::size_t>(((s % N) + N) % N)];
  sums[0] = acc;
  for (int i = 1; i < N; ++i) {
    const int drop = (((i - 1 - (window_n - 1)) % N) + N) % N;
    const int add = (((i + (window_n - 1)) % N) + N) % N;
    acc += counts[static_cast<std::size_t>(add)] - counts[static_cast<std::size_t>(drop)];
    sums[static_cast<std::size_t>(i)] = acc;
  }
  return sums;
}

}  // namespace detail

// Largest stripe density: max over all N circular stripes of the nonzero
// count inside the stripe. A stripe spans 2n-1 chunks.
inline int l0_inf(const SparseCode& code, int window_n, double tol = 0.0) {
  if (window_n < 1) throw DimensionError("window size must be >= 1");
  const std::vector<int> sums =
      detail::window_sums(detail::chunk_counts(code, tol), window_n);
  return *std::max_element(sums.begin(), sums.end());
}

// Same measure for a bare support given as global column indices.
inline int support_l0_inf(const std::vector<int>& support_cols, int N, int m,
                          int window_n) {
  if (N < 1 || m < 1 || window_n < 1)
    throw DimensionError("support_l0_inf: bad dimensions");
  std::vector<int> counts(static_cast<std::size_t>(N), 0);
  for (int c : support_cols) {
    if (c < 0 || c >= N * m) throw IndexError("support column out of range");
    ++counts[static_cast<std::size_t>(c / m)];
  }
  const std::vector<int> sums = detail::window_sums(counts, window_n);
  return *std::max_element(sums.begin(), sums.end());
}

// Minimum coherence achievable by any dictionary of this shape (equality
// requires an optimal packing); zero for a single filter.
inline double welch_lower_bound(int n, int m) {
  if (n < 1 || m < 1) throw DimensionError("welch_lower_bound: need n, m >= 1");
  if (m == 1) return 0.0;
  const double cols = static_cast<double>(m) * (2.0 * n - 1.0);
  return std::sqrt((m - 1.0) / (cols - 1.0));
}

// Worst absolute inner product between atoms at every relative shift
// s in [-(n-1), n-1]. Entry s is the max over filter pairs (the same filter
// against itself is excluded only at s = 0, where the product is trivially 1).
struct CoherenceProfile {
  int n = 0;
  Eigen::VectorXd values;  // index s + n - 1

  double at(int s) const {
    if (s < -(n - 1) || s > n - 1) throw IndexError("shift out of range");
    return values[s + n - 1];
  }
  double max() const { return values.maxCoeff(); }
  double mu0() const { return at(0); }
};

namespace detail {

// Inner product of atom f with atom g shifted down by s rows, over the rows
// where both are defined.
inline double shifted_atom_inner(const Eigen::MatrixXd& A, int f, int g, int s) {
  const int n = static_cast<int>(A.rows());
  double acc = 0.0;
  if (s >= 0) {
    for (int r = s; r < n; ++r) acc += A(r, f) * A(r - s, g);
  } else {
    for (int r = 0; r < n + s; ++r) acc += A(r, f) * A(r - s, g);
  }
  return acc;
}

}  // namespace detail

inline CoherenceProfile shifted_coherence_profile(const LocalDictionary& local) {
  const int n = local.n(), m = local.m();
  if (n == 1 && m == 1)
    throw DegenerateError("coherence profile undefined for a single 1-sample atom");
  const Eigen::MatrixXd& A = local.atoms();
  CoherenceProfile prof;
  prof.n = n;
  prof.values = Eigen::VectorXd::Zero(2 * n - 1);
  for (int s = -(n - 1); s <= n - 1; ++s) {
    double worst = 0.0;
    for (int f = 0; f < m; ++f)
      for (int g = 0; g < m; ++g) {
        if (s == 0 && f == g) continue;
        worst = std::max(worst, std::abs(detail::shifted_atom_inner(A, f, g, s)));
      }
    prof.values[s + n - 1] = worst;
  }
  return prof;
}

// Mutual coherence of the global dictionary. For N >= 2n-1 two columns can
// overlap at one end only, so the profile maximum is exactly the dense-Gram
// maximum and no N-sized work is needed. Shorter signals wrap atoms around
// both ends; those fall back to the dense Gram.
inline double mutual_coherence(const ConvDictionary& D) {
  if (D.cols() == 1)
    throw DegenerateError("mutual coherence undefined for a single column");
  // Single 1-sample filter: the columns are disjoint shifted impulses.
  if (D.n() == 1 && D.m() == 1) return 0.0;
  if (D.N() >= 2 * D.n() - 1) return shifted_coherence_profile(D.local()).max();
  double worst = 0.0;
  for (int a = 0; a < D.cols(); ++a)
    for (int b = a + 1; b < D.cols(); ++b)
      worst = std::max(worst, std::abs(column_inner(D, a, b)));
  return worst;
}

// Stripe coherence: for every stripe, the sum over its chunks of
// (chunk nonzero count) * (profile value at the chunk's offset). Computed
// twice -- a per-stripe gather and a per-chunk scatter -- and cross-checked,
// since the two accumulate in different orders.
struct StripeCoherence {
  Eigen::VectorXd zeta;  // one value per stripe center
  double max = 0.0;
};

inline StripeCoherence stripe_coherence(const SparseCode& code,
                                        const CoherenceProfile& prof,
                                        double tol = 0.0) {
  const int N = code.N();
  const int n = prof.n;
  if (n < 1) throw DimensionError("profile has no window");
  const std::vector<int> counts = detail::chunk_counts(code, tol);

  Eigen::VectorXd direct = Eigen::VectorXd::Zero(N);
  for (int i = 0; i < N; ++i) {
    double acc = 0.0;
    for (int s = -(n - 1); s <= n - 1; ++s) {
      const int chunk = (((i + s) % N) + N) % N;
      const int c = counts[static_cast<std::size_t>(chunk)];
      if (c != 0) acc += c * prof.at(s);
    }
    direct[i] = acc;
  }

  Eigen::VectorXd scattered = Eigen::VectorXd::Zero(N);
  for (int j = 0; j < N; ++j) {
    const int c = counts[static_cast<std::size_t>(j)];
    if (c == 0) continue;
    for (int s = -(n - 1); s <= n - 1; ++s) {
      const int center = (((j - s) % N) + N) % N;
      scattered[center] += c * prof.at(s);
    }
  }

  if ((direct - scattered).cwiseAbs().maxCoeff() > 1e-12)
    throw Error("stripe coherence: gather and scatter paths disagree");

  StripeCoherence out;
  out.zeta = direct;
  out.max = direct.maxCoeff();
  return out;
}

// Average shifted coherence of one stripe, and the sparsity level below
// which that stripe is provably benign for greedy/convex recovery.
struct AverageCoherence {
  double mu_bar = 0.0;
  int stripe_l0 = 0;
  double zeta = 0.0;
  double sparsity_bound = 0.0;  // (1 + mu0) / (2 * mu_bar)
};

inline AverageCoherence average_shifted_coherence(const SparseCode& code,
                                                  const CoherenceProfile& prof,
                                                  int i, double tol = 0.0) {
  const int N = code.N();
  if (i < 0 || i >= N) throw IndexError("stripe center out of range");
  const int n = prof.n;
  const std::vector<int> counts = detail::chunk_counts(code, tol);
  int stripe_l0 = 0;
  double zeta = 0.0;
  for (int s = -(n - 1); s <= n - 1; ++s) {
    const int chunk = (((i + s) % N) + N) % N;
    const int c = counts[static_cast<std::size_t>(chunk)];
    stripe_l0 += c;
    if (c != 0) zeta += c * prof.at(s);
  }
  if (stripe_l0 == 0)
    throw EmptyStripeError("stripe " + std::to_string(i) + " has no nonzeros");
  AverageCoherence out;
  out.stripe_l0 = stripe_l0;
  out.zeta = zeta;
  out.mu_bar = zeta / stripe_l0;
  out.sparsity_bound = out.mu_bar > 0.0
                           ? (1.0 + prof.mu0()) / (2.0 * out.mu_bar)
                           : std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace csc
