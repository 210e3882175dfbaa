// Test-side oracles: independent reimplementations used to cross-check the
// library. Everything here favors the most literal construction over speed.
#pragma once

#include <Eigen/Dense>
#include <limits>
#include <vector>

#include "csc/conv_dictionary.hpp"
#include "csc/local_dictionary.hpp"
#include "csc/sparse_code.hpp"

namespace oracles {

// Dense global dictionary by literal shift-and-place: column (i, f) holds
// atom f with its r-th sample at global row (i + r) mod N.
inline Eigen::MatrixXd shift_and_place(const csc::LocalDictionary& local, int N) {
  const int n = local.n();
  const int m = local.m();
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(N, N * m);
  for (int i = 0; i < N; ++i)
    for (int f = 0; f < m; ++f)
      for (int r = 0; r < n; ++r) D((i + r) % N, i * m + f) += local.atoms()(r, f);
  return D;
}

// Per-stripe nonzero count by direct modular indexing of the value vector.
inline int stripe_count(const csc::SparseCode& code, int window_n, int stripe) {
  const int N = code.N();
  const int m = code.m();
  int count = 0;
  for (int t = -window_n + 1; t <= window_n - 1; ++t) {
    const int chunk = ((stripe + t) % N + N) % N;
    for (int f = 0; f < m; ++f)
      if (code.values()[chunk * m + f] != 0.0) ++count;
  }
  return count;
}

inline int l0_inf_enumerated(const csc::SparseCode& code, int window_n) {
  int best = 0;
  for (int i = 0; i < code.N(); ++i)
    best = std::max(best, stripe_count(code, window_n, i));
  return best;
}

// Max off-diagonal |entry| of the normalized dense Gram.
inline double dense_gram_coherence(const Eigen::MatrixXd& D) {
  const Eigen::MatrixXd G = D.transpose() * D;
  double best = 0.0;
  for (Eigen::Index a = 0; a < G.rows(); ++a)
    for (Eigen::Index b = 0; b < G.cols(); ++b)
      if (a != b)
        best = std::max(best, std::abs(G(a, b)) /
                                  (D.col(a).norm() * D.col(b).norm()));
  return best;
}

// Lexicographic k-combination step; returns false after the last combination.
inline bool next_combination(std::vector<int>& combo, int pool) {
  const int k = static_cast<int>(combo.size());
  for (int j = k - 1; j >= 0; --j) {
    if (combo[static_cast<std::size_t>(j)] < pool - k + j) {
      ++combo[static_cast<std::size_t>(j)];
      for (int t = j + 1; t < k; ++t)
        combo[static_cast<std::size_t>(t)] = combo[static_cast<std::size_t>(t - 1)] + 1;
      return true;
    }
  }
  return false;
}

// Dependence test by Gaussian elimination with full pivoting (a different
// decomposition than the library's SVD threshold). A raw determinant cannot
// distinguish exact singularity from roundoff at double precision.
inline bool dependent_by_elimination(const Eigen::MatrixXd& D,
                                     const std::vector<int>& cols) {
  const int k = static_cast<int>(cols.size());
  Eigen::MatrixXd sub(D.rows(), k);
  for (int j = 0; j < k; ++j) sub.col(j) = D.col(cols[static_cast<std::size_t>(j)]);
  if (k > D.rows()) return true;
  return Eigen::FullPivLU<Eigen::MatrixXd>(sub).rank() < k;
}

// Smallest number of dependent columns by elimination over all subsets.
// Returns cols+1 when every subset up to max_card is independent.
inline int spark_by_elimination(const Eigen::MatrixXd& D, int max_card) {
  const int cols = static_cast<int>(D.cols());
  for (int k = 2; k <= max_card; ++k) {
    std::vector<int> combo(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) combo[static_cast<std::size_t>(j)] = j;
    do {
      if (dependent_by_elimination(D, combo)) return k;
    } while (next_combination(combo, cols));
  }
  return max_card + 1;
}

// LP oracle for min ||w||_1 s.t. Dw = x with D of full row rank N: the
// optimum is attained at a basic solution, so enumerate all invertible
// N-column bases B and take the smallest ||D_B^{-1} x||_1.
inline double l1_minimum_by_vertex_enumeration(const Eigen::MatrixXd& D,
                                               const Eigen::VectorXd& x) {
  const int rows = static_cast<int>(D.rows());
  const int cols = static_cast<int>(D.cols());
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> combo(static_cast<std::size_t>(rows));
  for (int j = 0; j < rows; ++j) combo[static_cast<std::size_t>(j)] = j;
  do {
    Eigen::MatrixXd basis(rows, rows);
    for (int j = 0; j < rows; ++j)
      basis.col(j) = D.col(combo[static_cast<std::size_t>(j)]);
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(basis);
    if (!lu.isInvertible()) continue;
    const Eigen::VectorXd w = lu.solve(x);
    if ((basis * w - x).norm() > 1e-8 * (1.0 + x.norm())) continue;
    best = std::min(best, w.lpNorm<1>());
  } while (next_combination(combo, cols));
  return best;
}

}  // namespace oracles
