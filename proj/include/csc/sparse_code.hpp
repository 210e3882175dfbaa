#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "csc/errors.hpp"

namespace csc {

// Sparse code over N signal positions and m filters, stored position-major:
// the coefficient of filter f placed at position i lives at index i*m + f.
// Chunk i is the m-vector of all filters at position i and is contiguous.
class SparseCode {
 public:
  SparseCode(int N, int m)
      : N_(N), m_(m), values_(Eigen::VectorXd::Zero(check_dims(N, m))) {}

  SparseCode(int N, int m, Eigen::VectorXd values)
      : N_(N), m_(m), values_(std::move(values)) {
    if (values_.size() != check_dims(N, m))
      throw DimensionError("sparse code values must have length N*m");
    if (!values_.allFinite())
      throw ValidationError("sparse code has non-finite entries");
  }

  int N() const { return N_; }
  int m() const { return m_; }
  int size() const { return N_ * m_; }

  // Global column index of (chunk, filter).
  int col(int chunk, int filter) const {
    check_index(chunk, filter);
    return chunk * m_ + filter;
  }
  int chunk_of(int column) const { return check_col(column) / m_; }
  int filter_of(int column) const { return check_col(column) % m_; }

  double operator()(int chunk, int filter) const {
    return values_[col(chunk, filter)];
  }
  void set(int chunk, int filter, double v) { values_[col(chunk, filter)] = v; }

  const Eigen::VectorXd& values() const { return values_; }
  Eigen::VectorXd& values() { return values_; }

  // Chunk i as an m-vector.
  Eigen::VectorXd chunk(int i) const {
    check_index(i, 0);
    return values_.segment(static_cast<Eigen::Index>(i) * m_, m_);
  }

  // Coefficients of one filter across all positions, as an N-vector.
  Eigen::VectorXd filter_signal(int f) const {
    if (f < 0 || f >= m_) throw IndexError("filter index out of range");
    Eigen::VectorXd z(N_);
    for (int i = 0; i < N_; ++i) z[i] = values_[i * m_ + f];
    return z;
  }

  // Column indices of the exact nonzeros, ascending.
  std::vector<int> support() const {
    std::vector<int> cols;
    for (int j = 0; j < size(); ++j)
      if (values_[j] != 0.0) cols.push_back(j);
    return cols;
  }

 private:
  static int check_dims(int N, int m) {
    if (N < 1 || m < 1) throw DimensionError("sparse code needs N >= 1, m >= 1");
    return N * m;
  }
  void check_index(int chunk, int filter) const {
    if (chunk < 0 || chunk >= N_) throw IndexError("chunk index out of range");
    if (filter < 0 || filter >= m_) throw IndexError("filter index out of range");
  }
  int check_col(int column) const {
    if (column < 0 || column >= size()) throw IndexError("column index out of range");
    return column;
  }

  int N_;
  int m_;
  Eigen::VectorXd values_;
};

// Chunk at position i (the "local" slice of the code).
inline Eigen::VectorXd extract_local(const SparseCode& code, int i) {
  return code.chunk(i);
}

// Stripe centered at position i for window size n: chunks i-n+1 .. i+n-1 in
// circular order, concatenated into a (2n-1)*m vector. The stripe is the
// slice of the code that can touch the n-sample patch starting at i.
inline Eigen::VectorXd extract_stripe(const SparseCode& code, int window_n, int i) {
  if (window_n < 1) throw DimensionError("window size must be >= 1");
  if (i < 0 || i >= code.N()) throw IndexError("stripe center out of range");
  const int N = code.N();
  const int m = code.m();
  Eigen::VectorXd stripe((2 * window_n - 1) * m);
  for (int s = -(window_n - 1); s <= window_n - 1; ++s) {
    int chunk = (i + s) % N;
    if (chunk < 0) chunk += N;
    stripe.segment(static_cast<Eigen::Index>(s + window_n - 1) * m, m) =
        code.chunk(chunk);
  }
  return stripe;
}

}  // namespace csc
