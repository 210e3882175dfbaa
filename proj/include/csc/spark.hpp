#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <bit>
#include <cstdint>
#include <limits>
#include <vector>

#include "csc/conv_dictionary.hpp"
#include "csc/errors.hpp"
#include "csc/measures.hpp"

namespace csc {

enum class SparkKind { spark, stripe_spark };

// Result of a brute-force (stripe-)spark search. When found, `value` is the
// cardinality (spark) or the stripe density (stripe_spark) of the witness,
// and the witness columns index a rank-deficient submatrix. When not found,
// only a lower bound is certified: every support up to `searched_up_to` has
// full column rank.
struct SparkCertificate {
  SparkKind kind = SparkKind::spark;
  bool found = false;
  int value = 0;
  int searched_up_to = 0;
  std::vector<int> witness;
};

namespace detail {

// Scale-invariant rank test: smallest singular value below 1e-9 of the
// largest. An all-zero submatrix counts as deficient.
inline bool rank_deficient(const Eigen::MatrixXd& sub) {
  if (sub.cols() > sub.rows()) return true;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(sub);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double top = sv[0];
  if (top == 0.0) return true;
  return sv[sv.size() - 1] < 1e-9 * top;
}

inline Eigen::MatrixXd submatrix(const Eigen::MatrixXd& D,
                                 const std::vector<int>& cols) {
  Eigen::MatrixXd sub(D.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) sub.col(j) = D.col(cols[j]);
  return sub;
}

// Stripe density of a support bitmask (bit c = global column c), without
// heap allocation; N is bounded by the brute-force guards.
inline int mask_l0_inf(std::uint64_t mask, int N, int m, int n) {
  int counts[64];
  const std::uint64_t chunk_bits = (m == 64) ? ~0ull : ((1ull << m) - 1);
  for (int i = 0; i < N; ++i)
    counts[i] = std::popcount((mask >> (i * m)) & chunk_bits);
  int acc = 0;
  for (int s = -(n - 1); s <= n - 1; ++s) acc += counts[(((s % N) + N) % N)];
  int best = acc;
  for (int i = 1; i < N; ++i) {
    acc -= counts[(((i - n) % N) + N) % N];
    acc += counts[(((i + n - 1) % N) + N) % N];
    if (acc > best) best = acc;
  }
  return best;
}

}  // namespace detail

// Smallest number of linearly dependent columns, by exhaustive search over
// supports grouped by cardinality (ascending; lexicographic within a group,
// so the returned witness is the first minimal one). Exponential: guarded to
// 64 columns unless allow_large is set.
inline SparkCertificate spark_bruteforce(const Eigen::MatrixXd& D, int max_card,
                                         bool allow_large = false) {
  const int cols = static_cast<int>(D.cols());
  if (cols < 1) throw DimensionError("spark_bruteforce: empty matrix");
  if (max_card < 1) throw ValidationError("spark_bruteforce: max_card must be >= 1");
  if (cols > 64 && !allow_large)
    throw CapacityError("spark_bruteforce: " + std::to_string(cols) +
                        " columns; enumeration is exponential (allow_large to force)");
  SparkCertificate cert;
  cert.kind = SparkKind::spark;
  const int limit = std::min(max_card, cols);
  for (int k = 1; k <= limit; ++k) {
    // Any rows+1 vectors are dependent; the first lexicographic support wins.
    std::vector<int> combo(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) combo[static_cast<std::size_t>(j)] = j;
    while (true) {
      if (k > D.rows() || detail::rank_deficient(detail::submatrix(D, combo))) {
        cert.found = true;
        cert.value = k;
        cert.searched_up_to = k;
        cert.witness = combo;
        return cert;
      }
      // next lexicographic combination
      int pos = k - 1;
      while (pos >= 0 && combo[static_cast<std::size_t>(pos)] == cols - k + pos) --pos;
      if (pos < 0) break;
      ++combo[static_cast<std::size_t>(pos)];
      for (int j = pos + 1; j < k; ++j)
        combo[static_cast<std::size_t>(j)] = combo[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  cert.found = false;
  cert.searched_up_to = limit;
  return cert;
}

namespace detail {

struct StripeSparkSearch {
  const Eigen::MatrixXd* dense;
  int N, m, n, cols;
  int target;  // stripe density sought in this pass
  std::vector<int> prefix;
  std::vector<int> counts;  // per-chunk nonzeros of prefix

  bool found = false;
  std::vector<int> witness;

  int prefix_l0_inf() const {
    int acc = 0;
    for (int s = -(n - 1); s <= n - 1; ++s)
      acc += counts[static_cast<std::size_t>(((s % N) + N) % N)];
    int best = acc;
    for (int i = 1; i < N; ++i) {
      acc -= counts[static_cast<std::size_t>((((i - n) % N) + N) % N)];
      acc += counts[static_cast<std::size_t>((((i + n - 1) % N) + N) % N)];
      if (acc > best) best = acc;
    }
    return best;
  }

  // Depth-first over supports in lexicographic order. Adding a column never
  // lowers the stripe density, so any prefix already past the target prunes
  // its whole subtree.
  void walk(int next_col) {
    if (found) return;
    for (int c = next_col; c < cols && !found; ++c) {
      prefix.push_back(c);
      ++counts[static_cast<std::size_t>(c / m)];
      const int density = prefix_l0_inf();
      if (density <= target) {
        if (density == target && prefix.size() >= 2) {
          if (static_cast<int>(prefix.size()) > dense->rows() ||
              rank_deficient(submatrix(*dense, prefix))) {
            found = true;
            witness = prefix;
          }
        }
        if (!found) walk(c + 1);
      }
      if (!found) {
        --counts[static_cast<std::size_t>(c / m)];
        prefix.pop_back();
      }
    }
  }
};

}  // namespace detail

// Smallest stripe density of any set of linearly dependent columns, by
// exhaustive search over supports grouped by stripe density (ascending;
// lexicographic within a group). Exponential in N*m: guarded to 32 columns
// unless allow_large is set.
inline SparkCertificate stripe_spark_bruteforce(const ConvDictionary& D,
                                                int max_loi,
                                                bool allow_large = false) {
  if (max_loi < 1)
    throw ValidationError("stripe_spark_bruteforce: max_loi must be >= 1");
  if (D.cols() > 32 && !allow_large)
    throw CapacityError("stripe_spark_bruteforce: " + std::to_string(D.cols()) +
                        " columns; enumeration is exponential (allow_large to force)");
  const Eigen::MatrixXd dense = materialize_dense(D);
  SparkCertificate cert;
  cert.kind = SparkKind::stripe_spark;
  const int cap = std::min(max_loi, (2 * D.n() - 1) * D.m());
  for (int target = 1; target <= cap; ++target) {
    detail::StripeSparkSearch search;
    search.dense = &dense;
    search.N = D.N();
    search.m = D.m();
    search.n = D.n();
    search.cols = D.cols();
    search.target = target;
    search.counts.assign(static_cast<std::size_t>(D.N()), 0);
    search.walk(0);
    if (search.found) {
      cert.found = true;
      cert.value = target;
      cert.searched_up_to = target;
      cert.witness = search.witness;
      return cert;
    }
  }
  cert.found = false;
  cert.searched_up_to = cap;
  return cert;
}

// Eigenvalue bracket for the Gram matrix of any support with stripe density
// k, given mutual coherence mu: (1 - (k-1)mu, 1 + (k-1)mu). k may be
// fractional so the bracket can be evaluated at analytic break-even points.
struct GershgorinBracket {
  double lo = 0.0;
  double hi = 0.0;
};

inline GershgorinBracket gershgorin_bracket(double k, double mu) {
  if (k < 1.0) throw ValidationError("gershgorin_bracket: k must be >= 1");
  if (mu < 0.0) throw ValidationError("gershgorin_bracket: mu must be >= 0");
  return {1.0 - (k - 1.0) * mu, 1.0 + (k - 1.0) * mu};
}

struct GershgorinReport {
  int k = 0;  // stripe density of the support
  double mu = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double min_eig = 0.0;
  double max_eig = 0.0;
  bool ok = false;
};

// Check that the spectrum of the support's Gram matrix really lies inside
// the bracket (with `slack` of numerical headroom).
inline GershgorinReport verify_gershgorin(const ConvDictionary& D,
                                          const std::vector<int>& support,
                                          double slack = 1e-9) {
  if (support.empty())
    throw ValidationError("verify_gershgorin: empty support");
  for (std::size_t a = 0; a < support.size(); ++a) {
    if (support[a] < 0 || support[a] >= D.cols())
      throw IndexError("verify_gershgorin: column out of range");
    for (std::size_t b = a + 1; b < support.size(); ++b)
      if (support[a] == support[b])
        throw ValidationError("verify_gershgorin: duplicate column");
  }
  const int k = static_cast<int>(support.size());
  Eigen::MatrixXd gram(k, k);
  for (int a = 0; a < k; ++a)
    for (int b = a; b < k; ++b) {
      const double g = column_inner(D, support[static_cast<std::size_t>(a)],
                                    support[static_cast<std::size_t>(b)]);
      gram(a, b) = g;
      gram(b, a) = g;
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  GershgorinReport report;
  report.k = support_l0_inf(support, D.N(), D.m(), D.n());
  report.mu = mutual_coherence(D);
  const GershgorinBracket bracket = gershgorin_bracket(report.k, report.mu);
  report.lo = bracket.lo;
  report.hi = bracket.hi;
  report.min_eig = eig.eigenvalues().minCoeff();
  report.max_eig = eig.eigenvalues().maxCoeff();
  report.ok = report.min_eig >= report.lo - slack && report.max_eig <= report.hi + slack;
  return report;
}

// Any solution with stripe density strictly below this value is the unique
// sparsest-per-stripe representation of its signal.
inline double uniqueness_bound(double mu) {
  if (mu <= 0.0)
    throw DegenerateError("uniqueness bound is infinite for mu <= 0");
  if (mu > 1.0) throw ValidationError("mutual coherence cannot exceed 1");
  return 0.5 * (1.0 + 1.0 / mu);
}

enum class Certification { certified, inconclusive };

struct UniquenessReport {
  Certification verdict = Certification::inconclusive;
  int l0_inf = 0;
  double mu = 0.0;
  double bound = 0.0;
};

// Certify a code as the unique sparsest-per-stripe solution when its stripe
// density clears the coherence bound. Never claims non-uniqueness: above the
// bound the check is simply inconclusive.
inline UniquenessReport certify_unique(const SparseCode& code,
                                       const ConvDictionary& D) {
  detail::check_code(D, code);
  UniquenessReport report;
  report.l0_inf = l0_inf(code, D.n());
  report.mu = mutual_coherence(D);
  if (report.mu == 0.0) {
    report.bound = std::numeric_limits<double>::infinity();
    report.verdict = Certification::certified;
    return report;
  }
  report.bound = uniqueness_bound(report.mu);
  report.verdict = report.l0_inf < report.bound ? Certification::certified
                                                : Certification::inconclusive;
  return report;
}

}  // namespace csc
