#pragma once

#include <Eigen/Dense>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <string>
#include <utility>

#include "csc/errors.hpp"
#include "csc/local_dictionary.hpp"
#include "csc/measures.hpp"
#include "csc/sparse_code.hpp"

namespace csc {

namespace detail {

// Shortest decimal string that round-trips to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path);
  return in;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  return out;
}

inline int read_int(std::istream& in, const char* what) {
  int v = 0;
  if (!(in >> v)) throw IoError(std::string("expected integer: ") + what);
  return v;
}

inline double read_value(std::istream& in, const char* what) {
  double v = 0;
  if (!(in >> v)) throw IoError(std::string("expected number: ") + what);
  if (!std::isfinite(v)) throw IoError(std::string("non-finite number: ") + what);
  return v;
}

}  // namespace detail

// Dictionary format: "n m" on the first line, then n rows of m values.
inline void write_dictionary(const LocalDictionary& local, std::ostream& out) {
  out << local.n() << ' ' << local.m() << '\n';
  for (int r = 0; r < local.n(); ++r) {
    for (int f = 0; f < local.m(); ++f) {
      if (f) out << ' ';
      out << detail::format_double(local.atoms()(r, f));
    }
    out << '\n';
  }
  if (!out) throw IoError("write_dictionary: stream failure");
}

inline LocalDictionary read_dictionary(std::istream& in) {
  const int n = detail::read_int(in, "dictionary rows");
  const int m = detail::read_int(in, "dictionary columns");
  if (n < 1 || m < 1) throw IoError("read_dictionary: bad header");
  Eigen::MatrixXd A(n, m);
  for (int r = 0; r < n; ++r)
    for (int f = 0; f < m; ++f) A(r, f) = detail::read_value(in, "dictionary entry");
  // Exact unit columns pass through untouched so write/read round-trips
  // bit-for-bit; small drift is renormalized; anything worse is rejected.
  bool exact = true;
  for (int f = 0; f < m; ++f) {
    const double dev = std::abs(A.col(f).norm() - 1.0);
    if (dev > 1e-6)
      throw ValidationError("read_dictionary: column norm deviates by more than 1e-6");
    if (dev > 1e-12) exact = false;
  }
  if (exact) return LocalDictionary(std::move(A));
  return LocalDictionary::normalized(std::move(A));
}

inline void write_dictionary(const LocalDictionary& local, const std::string& path) {
  auto out = detail::open_output(path);
  write_dictionary(local, out);
}

inline LocalDictionary read_dictionary(const std::string& path) {
  auto in = detail::open_input(path);
  return read_dictionary(in);
}

// Sparse code format: "N m" on the first line, then one "chunk filter value"
// triple per nonzero, in ascending column order.
inline void write_sparse_code(const SparseCode& code, std::ostream& out) {
  out << code.N() << ' ' << code.m() << '\n';
  for (int col : code.support())
    out << code.chunk_of(col) << ' ' << code.filter_of(col) << ' '
        << detail::format_double(code.values()[col]) << '\n';
  if (!out) throw IoError("write_sparse_code: stream failure");
}

inline SparseCode read_sparse_code(std::istream& in) {
  const int N = detail::read_int(in, "code N");
  const int m = detail::read_int(in, "code m");
  if (N < 1 || m < 1) throw IoError("read_sparse_code: bad header");
  SparseCode code(N, m);
  std::set<std::pair<int, int>> seen;
  int chunk = 0;
  while (in >> chunk) {
    const int filter = detail::read_int(in, "code filter");
    const double value = detail::read_value(in, "code value");
    if (chunk < 0 || chunk >= N || filter < 0 || filter >= m)
      throw IoError("read_sparse_code: entry out of range");
    if (!seen.insert({chunk, filter}).second)
      throw IoError("read_sparse_code: duplicate entry");
    code.set(chunk, filter, value);
  }
  return code;
}

inline void write_sparse_code(const SparseCode& code, const std::string& path) {
  auto out = detail::open_output(path);
  write_sparse_code(code, out);
}

inline SparseCode read_sparse_code(const std::string& path) {
  auto in = detail::open_input(path);
  return read_sparse_code(in);
}

// Signal format: "N" on the first line, then one sample per line.
inline void write_signal(const Eigen::VectorXd& x, std::ostream& out) {
  out << x.size() << '\n';
  for (Eigen::Index i = 0; i < x.size(); ++i)
    out << detail::format_double(x[i]) << '\n';
  if (!out) throw IoError("write_signal: stream failure");
}

inline Eigen::VectorXd read_signal(std::istream& in) {
  const int N = detail::read_int(in, "signal length");
  if (N < 1) throw IoError("read_signal: bad header");
  Eigen::VectorXd x(N);
  for (int i = 0; i < N; ++i) x[i] = detail::read_value(in, "signal sample");
  return x;
}

inline void write_signal(const Eigen::VectorXd& x, const std::string& path) {
  auto out = detail::open_output(path);
  write_signal(x, out);
}

inline Eigen::VectorXd read_signal(const std::string& path) {
  auto in = detail::open_input(path);
  return read_signal(in);
}

// Coherence profile as CSV: header "s,mu_s", one row per shift.
inline void write_profile_csv(const CoherenceProfile& profile, std::ostream& out) {
  out << "s,mu_s\n";
  const int n = profile.n;
  for (int idx = 0; idx < static_cast<int>(profile.values.size()); ++idx)
    out << (idx - (n - 1)) << ',' << detail::format_double(profile.values[idx])
        << '\n';
  if (!out) throw IoError("write_profile_csv: stream failure");
}

inline void write_profile_csv(const CoherenceProfile& profile, const std::string& path) {
  auto out = detail::open_output(path);
  write_profile_csv(profile, out);
}

}  // namespace csc
