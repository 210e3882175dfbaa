#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>

#include "csc/errors.hpp"
#include "csc/local_dictionary.hpp"
#include "csc/sparse_code.hpp"

namespace csc {

// Global convolutional dictionary over a circular signal of length N: every
// atom of the local dictionary at every shift. Column i*m + f is atom f
// placed at position i (wrapping at the signal edge), matching the
// position-major layout of SparseCode. The N x N*m matrix is never stored;
// all operators run off the local atoms.
class ConvDictionary {
 public:
  ConvDictionary(LocalDictionary local, int N)
      : local_(std::move(local)), N_(N) {
    if (N_ < local_.n())
      throw DimensionError("signal length N must be at least the atom length n");
  }

  int N() const { return N_; }
  int n() const { return local_.n(); }
  int m() const { return local_.m(); }
  int cols() const { return N_ * local_.m(); }

  const LocalDictionary& local() const { return local_; }

  int col(int chunk, int filter) const {
    if (chunk < 0 || chunk >= N_) throw IndexError("chunk index out of range");
    if (filter < 0 || filter >= m()) throw IndexError("filter index out of range");
    return chunk * m() + filter;
  }
  int chunk_of(int column) const { return check_col(column) / m(); }
  int filter_of(int column) const { return check_col(column) % m(); }

 private:
  int check_col(int column) const {
    if (column < 0 || column >= cols())
      throw IndexError("column index out of range");
    return column;
  }

  LocalDictionary local_;
  int N_;
};

inline ConvDictionary build_global(LocalDictionary local, int N) {
  return ConvDictionary(std::move(local), N);
}

namespace detail {
inline void check_code(const ConvDictionary& D, const SparseCode& code) {
  if (code.N() != D.N() || code.m() != D.m())
    throw DimensionError("code dimensions do not match the dictionary");
}
inline void check_signal(const ConvDictionary& D, const Eigen::VectorXd& x) {
  if (x.size() != D.N())
    throw DimensionError("signal length does not match the dictionary");
}
}  // namespace detail

// X = D * code: scatter every coefficient's atom at its position, wrapping
// circularly. Cost O(nnz * n); zero coefficients are skipped.
inline Eigen::VectorXd apply(const ConvDictionary& D, const SparseCode& code) {
  detail::check_code(D, code);
  const int N = D.N(), n = D.n(), m = D.m();
  const Eigen::MatrixXd& A = D.local().atoms();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(N);
  for (int i = 0; i < N; ++i) {
    for (int f = 0; f < m; ++f) {
      const double c = code.values()[i * m + f];
      if (c == 0.0) continue;
      for (int r = 0; r < n; ++r) {
        int row = i + r;
        if (row >= N) row -= N;
        x[row] += c * A(r, f);
      }
    }
  }
  return x;
}

// Same synthesis for a raw coefficient vector (no sparsity assumed).
inline Eigen::VectorXd apply(const ConvDictionary& D, const Eigen::VectorXd& coeffs) {
  if (coeffs.size() != D.cols())
    throw DimensionError("coefficient vector must have length N*m");
  const int N = D.N(), n = D.n(), m = D.m();
  const Eigen::MatrixXd& A = D.local().atoms();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(N);
  for (int i = 0; i < N; ++i)
    for (int f = 0; f < m; ++f) {
      const double c = coeffs[i * m + f];
      if (c == 0.0) continue;
      for (int r = 0; r < n; ++r) {
        int row = i + r;
        if (row >= N) row -= N;
        x[row] += c * A(r, f);
      }
    }
  return x;
}

// D^T * x: correlate every atom with every circular window of the signal.
inline Eigen::VectorXd adjoint_apply(const ConvDictionary& D, const Eigen::VectorXd& x) {
  detail::check_signal(D, x);
  const int N = D.N(), n = D.n(), m = D.m();
  const Eigen::MatrixXd& A = D.local().atoms();
  Eigen::VectorXd out(D.cols());
  for (int i = 0; i < N; ++i) {
    for (int f = 0; f < m; ++f) {
      double acc = 0.0;
      for (int r = 0; r < n; ++r) {
        int row = i + r;
        if (row >= N) row -= N;
        acc += A(r, f) * x[row];
      }
      out[i * m + f] = acc;
    }
  }
  return out;
}

// Inner product of two global columns, via the overlap of their atoms.
// O(n); handles any wrap-around, including N < 2n-1.
inline double column_inner(const ConvDictionary& D, int col_a, int col_b) {
  const int N = D.N(), n = D.n(), m = D.m();
  if (col_a < 0 || col_a >= D.cols() || col_b < 0 || col_b >= D.cols())
    throw IndexError("column index out of range");
  const int ia = col_a / m, fa = col_a % m;
  const int ib = col_b / m, fb = col_b % m;
  const Eigen::MatrixXd& A = D.local().atoms();
  double acc = 0.0;
  for (int t = 0; t < n; ++t) {
    int row = ib + t;
    if (row >= N) row -= N;
    int ta = row - ia;
    if (ta < 0) ta += N;
    if (ta < n) acc += A(ta, fa) * A(t, fb);
  }
  return acc;
}

// The n-sample patch starting at position i: rows [i, i+n) (circular) of the
// synthesized signal.
inline Eigen::VectorXd patch(const ConvDictionary& D, const SparseCode& code, int i) {
  detail::check_code(D, code);
  if (i < 0 || i >= D.N()) throw IndexError("patch position out of range");
  const Eigen::VectorXd x = apply(D, code);
  const int N = D.N(), n = D.n();
  Eigen::VectorXd p(n);
  for (int r = 0; r < n; ++r) {
    int row = i + r;
    if (row >= N) row -= N;
    p[r] = x[row];
  }
  return p;
}

// Assemble the signal patch-by-patch: place the local synthesis of every
// chunk back at its position and sum. Algebraically the same signal as
// apply(), reached through a different route.
inline Eigen::VectorXd patch_average_synthesize(const ConvDictionary& D,
                                                const SparseCode& code) {
  detail::check_code(D, code);
  const int N = D.N(), n = D.n();
  const Eigen::MatrixXd& A = D.local().atoms();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(N);
  Eigen::VectorXd piece(n);
  for (int i = 0; i < N; ++i) {
    const Eigen::VectorXd alpha = code.chunk(i);
    if (alpha.isZero(0.0)) continue;
    piece.noalias() = A * alpha;
    for (int r = 0; r < n; ++r) {
      int row = i + r;
      if (row >= N) row -= N;
      x[row] += piece[r];
    }
  }
  return x;
}

// Dense N x N*m matrix. Guarded: refuses to allocate more than max_elements
// entries so a typo cannot silently chew through memory.
inline Eigen::MatrixXd materialize_dense(const ConvDictionary& D,
                                         std::int64_t max_elements = 10'000'000) {
  const std::int64_t elements =
      static_cast<std::int64_t>(D.N()) * static_cast<std::int64_t>(D.cols());
  if (elements > max_elements)
    throw CapacityError("dense dictionary would have " + std::to_string(elements) +
                        " elements (limit " + std::to_string(max_elements) + ")");
  const int N = D.N(), n = D.n(), m = D.m();
  const Eigen::MatrixXd& A = D.local().atoms();
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(N, D.cols());
  for (int i = 0; i < N; ++i)
    for (int f = 0; f < m; ++f)
      for (int r = 0; r < n; ++r) {
        int row = i + r;
        if (row >= N) row -= N;
        dense(row, i * m + f) += A(r, f);
      }
  return dense;
}

// Window dictionary: the n x (2n-1)m matrix whose shift-s block holds the
// atoms moved s rows (rows falling outside the window truncated). Block s=0
// is the local dictionary itself. A patch equals this matrix times the
// stripe centered at the same position.
inline Eigen::MatrixXd stripe_dictionary(const LocalDictionary& local) {
  const int n = local.n(), m = local.m();
  const Eigen::MatrixXd& A = local.atoms();
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(n, (2 * n - 1) * m);
  for (int s = -(n - 1); s <= n - 1; ++s)
    for (int f = 0; f < m; ++f)
      for (int r = 0; r < n; ++r) {
        const int t = r - s;
        if (t >= 0 && t < n) omega(r, (s + n - 1) * m + f) = A(t, f);
      }
  return omega;
}

}  // namespace csc
