#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "csc/conv_dictionary.hpp"
#include "csc/errors.hpp"
#include "csc/measures.hpp"
#include "csc/sparse_code.hpp"

namespace csc {

struct PursuitResult {
  SparseCode code;
  std::vector<int> support;  // columns of the returned code, ascending
  int iterations = 0;
  double residual_norm = 0.0;
  bool converged = false;
  double l1_objective = 0.0;  // of the raw solver output, before any refit
};

namespace detail {

// Dense copy of one global column.
inline Eigen::VectorXd dense_column(const ConvDictionary& D, int col) {
  const int N = D.N(), n = D.n(), m = D.m();
  const int i = col / m, f = col % m;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(N);
  for (int r = 0; r < n; ++r) {
    int row = i + r;
    if (row >= N) row -= N;
    v[row] += D.local().atoms()(r, f);
  }
  return v;
}

inline Eigen::MatrixXd dense_columns(const ConvDictionary& D,
                                     const std::vector<int>& cols) {
  Eigen::MatrixXd sub(D.N(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j)
    sub.col(static_cast<Eigen::Index>(j)) = dense_column(D, cols[j]);
  return sub;
}

// x += scale * column
inline void add_column(const ConvDictionary& D, int col, double scale,
                       Eigen::VectorXd& x) {
  const int N = D.N(), n = D.n(), m = D.m();
  const int i = col / m, f = col % m;
  for (int r = 0; r < n; ++r) {
    int row = i + r;
    if (row >= N) row -= N;
    x[row] += scale * D.local().atoms()(r, f);
  }
}

}  // namespace detail

// Greedy pursuit: repeatedly select the column most correlated with the
// residual (ties break to the lowest column index), refit the coefficients
// by least squares on the support, and subtract. The support Gram's Cholesky
// factor is grown one row per iteration, so each refit costs O(k^2).
inline PursuitResult omp(const ConvDictionary& D, const Eigen::VectorXd& x,
                         int max_iters, double res_tol = 1e-10) {
  detail::check_signal(D, x);
  if (max_iters < 0) throw ValidationError("omp: max_iters must be >= 0");
  if (res_tol < 0.0) throw ValidationError("omp: res_tol must be >= 0");
  const int cols = D.cols();
  const int cap = std::min(max_iters, cols);

  const Eigen::VectorXd dtx = adjoint_apply(D, x);
  Eigen::VectorXd residual = x;
  std::vector<char> picked(static_cast<std::size_t>(cols), 0);
  std::vector<int> chosen;
  chosen.reserve(static_cast<std::size_t>(cap));
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(cap, cap);
  Eigen::VectorXd coeffs;

  while (static_cast<int>(chosen.size()) < cap && residual.norm() > res_tol) {
    const Eigen::VectorXd corr = adjoint_apply(D, residual);
    int best = -1;
    double best_abs = 0.0;
    for (int j = 0; j < cols; ++j) {
      if (picked[static_cast<std::size_t>(j)]) continue;
      const double a = std::abs(corr[j]);
      if (a > best_abs) {
        best_abs = a;
        best = j;
      }
    }
    if (best < 0 || best_abs == 0.0) break;  // residual sees no remaining atom

    const int k = static_cast<int>(chosen.size());
    const double gjj = column_inner(D, best, best);
    double d2 = gjj;
    if (k > 0) {
      Eigen::VectorXd g(k);
      for (int t = 0; t < k; ++t)
        g[t] = column_inner(D, chosen[static_cast<std::size_t>(t)], best);
      const Eigen::VectorXd w =
          L.topLeftCorner(k, k).triangularView<Eigen::Lower>().solve(g);
      L.block(k, 0, 1, k) = w.transpose();
      d2 = gjj - w.squaredNorm();
    }
    if (d2 < 1e-12) {
      // The incremental pivot is in cancellation territory; decide with the
      // exact spectrum of the candidate support's Gram.
      Eigen::MatrixXd gram(k + 1, k + 1);
      std::vector<int> cand = chosen;
      cand.push_back(best);
      for (int a = 0; a <= k; ++a)
        for (int b = a; b <= k; ++b) {
          const double gab = column_inner(D, cand[static_cast<std::size_t>(a)],
                                          cand[static_cast<std::size_t>(b)]);
          gram(a, b) = gab;
          gram(b, a) = gab;
        }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
      if (eig.eigenvalues().minCoeff() < 1e-20)
        throw SingularSupportError(
            "omp: support became numerically rank-deficient");
      const Eigen::LLT<Eigen::MatrixXd> llt(gram);
      if (llt.info() != Eigen::Success)
        throw SingularSupportError("omp: support Gram is not positive definite");
      L.topLeftCorner(k + 1, k + 1) = llt.matrixL();
    } else {
      L(k, k) = std::sqrt(d2);
    }
    chosen.push_back(best);
    picked[static_cast<std::size_t>(best)] = 1;

    const int ks = static_cast<int>(chosen.size());
    Eigen::VectorXd rhs(ks);
    for (int t = 0; t < ks; ++t) rhs[t] = dtx[chosen[static_cast<std::size_t>(t)]];
    coeffs = L.topLeftCorner(ks, ks)
                 .triangularView<Eigen::Lower>()
                 .solve(rhs);
    L.topLeftCorner(ks, ks)
        .triangularView<Eigen::Lower>()
        .transpose()
        .solveInPlace(coeffs);

    residual = x;
    for (int t = 0; t < ks; ++t)
      detail::add_column(D, chosen[static_cast<std::size_t>(t)], -coeffs[t], residual);
  }

  SparseCode code(D.N(), D.m());
  for (std::size_t t = 0; t < chosen.size(); ++t)
    code.values()[chosen[t]] = coeffs[static_cast<Eigen::Index>(t)];
  std::vector<int> support = chosen;
  std::sort(support.begin(), support.end());
  const double rnorm = (x - apply(D, code)).norm();
  const double l1 = code.values().lpNorm<1>();
  return PursuitResult{std::move(code), std::move(support),
                       static_cast<int>(chosen.size()), rnorm, rnorm <= res_tol,
                       l1};
}

struct AdmmOptions {
  double rho = 1.0;
  int max_iters = 20000;
  double eps_abs = 1e-8;
  double eps_rel = 1e-8;
  double support_threshold = 1e-5;
  enum class Backend { automatic, dense, spectral } backend = Backend::automatic;
  double time_limit_sec = std::numeric_limits<double>::infinity();
};

namespace detail {

// Orthogonal projection onto the affine set { w : D w = x }. The normal
// matrix D D^T of a convolutional dictionary is circulant, so for long
// signals it is applied and inverted in the frequency domain (zero bins are
// treated as pseudo-inverse directions); short signals use a dense
// factorization instead.
class EqualityProjection {
 public:
  EqualityProjection(const ConvDictionary& D, const Eigen::VectorXd& x,
                     bool spectral)
      : D_(&D), spectral_(spectral) {
    const int N = D.N(), m = D.m();
    if (spectral_) {
      atom_spec_.resize(static_cast<std::size_t>(m));
      Eigen::VectorXd padded = Eigen::VectorXd::Zero(N);
      Eigen::VectorXd sym = Eigen::VectorXd::Zero(N);
      for (int f = 0; f < m; ++f) {
        padded.setZero();
        padded.head(D.n()) = D.local().atoms().col(f);
        fft_.fwd(atom_spec_[static_cast<std::size_t>(f)], padded);
        sym += atom_spec_[static_cast<std::size_t>(f)].cwiseAbs2();
      }
      const double floor = 1e-12 * sym.maxCoeff();
      inv_sym_.resize(N);
      for (int k = 0; k < N; ++k)
        inv_sym_[k] = sym[k] > floor ? 1.0 / sym[k] : 0.0;
      Eigen::VectorXcd fx;
      fft_.fwd(fx, x);
      const Eigen::VectorXcd w = fx.cwiseProduct(inv_sym_.cast<std::complex<double>>());
      base_ = Eigen::VectorXd(D.cols());
      Eigen::VectorXd tmp(N);
      for (int f = 0; f < m; ++f) {
        spec_buf_ = atom_spec_[static_cast<std::size_t>(f)].conjugate().cwiseProduct(w);
        fft_.inv(tmp, spec_buf_);
        for (int i = 0; i < N; ++i) base_[i * m + f] = tmp[i];
      }
      filt_buf_.resize(N);
      real_buf_.resize(N);
      acc_buf_.resize(N);
    } else {
      dense_ = materialize_dense(D);
      cod_.compute(dense_ * dense_.transpose());
      base_ = dense_.transpose() * cod_.solve(x);
    }
  }

  // out = v - D^T (D D^T)^+ (D v) + base
  void project(const Eigen::VectorXd& v, Eigen::VectorXd& out) {
    const int N = D_->N(), m = D_->m();
    if (!spectral_) {
      out.noalias() = -dense_.transpose() * cod_.solve(dense_ * v);
      out += v + base_;
      return;
    }
    acc_buf_.setZero();
    for (int f = 0; f < m; ++f) {
      for (int i = 0; i < N; ++i) filt_buf_[i] = v[i * m + f];
      fft_.fwd(spec_buf_, filt_buf_);
      acc_buf_ += spec_buf_.cwiseProduct(atom_spec_[static_cast<std::size_t>(f)]);
    }
    acc_buf_ = acc_buf_.cwiseProduct(inv_sym_.cast<std::complex<double>>());
    out.resize(D_->cols());
    for (int f = 0; f < m; ++f) {
      spec_buf_ = atom_spec_[static_cast<std::size_t>(f)].conjugate().cwiseProduct(acc_buf_);
      fft_.inv(real_buf_, spec_buf_);
      for (int i = 0; i < N; ++i)
        out[i * m + f] = v[i * m + f] - real_buf_[i] + base_[i * m + f];
    }
  }

 private:
  const ConvDictionary* D_;
  bool spectral_;
  Eigen::FFT<double> fft_;
  std::vector<Eigen::VectorXcd> atom_spec_;
  Eigen::VectorXd inv_sym_;
  Eigen::VectorXd base_;
  Eigen::VectorXd filt_buf_, real_buf_;
  Eigen::VectorXcd spec_buf_, acc_buf_;
  Eigen::MatrixXd dense_;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod_;
};

}  // namespace detail

// Basis pursuit (min ||w||_1 s.t. D w = x) by ADMM: alternate projection
// onto the equality constraint with soft-thresholding, with the standard
// primal/dual residual stopping rule. The returned code is debiased: the
// support is read off the final feasible iterate at `support_threshold`,
// coefficients are refit by least squares on that support, and entries that
// fall back under the threshold are dropped.
inline PursuitResult basis_pursuit(const ConvDictionary& D,
                                   const Eigen::VectorXd& x,
                                   const AdmmOptions& opts = {}) {
  detail::check_signal(D, x);
  if (opts.rho <= 0.0) throw ValidationError("basis_pursuit: rho must be > 0");
  if (opts.eps_abs < 0.0 || opts.eps_rel < 0.0)
    throw ValidationError("basis_pursuit: tolerances must be >= 0");
  if (opts.max_iters < 1)
    throw ValidationError("basis_pursuit: max_iters must be >= 1");
  if (opts.support_threshold < 0.0)
    throw ValidationError("basis_pursuit: support_threshold must be >= 0");

  const int M = D.cols();
  const bool spectral =
      opts.backend == AdmmOptions::Backend::automatic
          ? D.N() >= 128
          : opts.backend == AdmmOptions::Backend::spectral;
  detail::EqualityProjection proj(D, x, spectral);

  Eigen::VectorXd z = Eigen::VectorXd::Zero(M);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(M);
  Eigen::VectorXd w(M), z_old(M);
  const double kappa = 1.0 / opts.rho;
  const double sqrt_m = std::sqrt(static_cast<double>(M));
  bool converged = false;
  int iterations = 0;
  const bool timed = std::isfinite(opts.time_limit_sec);
  const auto started = std::chrono::steady_clock::now();

  for (int it = 1; it <= opts.max_iters; ++it) {
    iterations = it;
    proj.project(z - u, w);
    z_old = z;
    const Eigen::ArrayXd a = (w + u).array();
    z = (a - kappa).max(0.0).matrix() - (-a - kappa).max(0.0).matrix();
    u += w - z;

    const double r_norm = (w - z).norm();
    const double s_norm = opts.rho * (z - z_old).norm();
    const double eps_pri =
        sqrt_m * opts.eps_abs + opts.eps_rel * std::max(w.norm(), z.norm());
    const double eps_dual =
        sqrt_m * opts.eps_abs + opts.eps_rel * opts.rho * u.norm();
    if (r_norm <= eps_pri && s_norm <= eps_dual) {
      converged = true;
      break;
    }
    if (timed && (it & 255) == 0) {
      const std::chrono::duration<double> elapsed =
          std::chrono::steady_clock::now() - started;
      if (elapsed.count() > opts.time_limit_sec) break;
    }
  }

  const double l1 = w.lpNorm<1>();
  std::vector<int> detected;
  for (int j = 0; j < M; ++j)
    if (std::abs(w[j]) > opts.support_threshold) detected.push_back(j);

  SparseCode code(D.N(), D.m());
  if (!detected.empty()) {
    const Eigen::MatrixXd sub = detail::dense_columns(D, detected);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(sub);
    const Eigen::VectorXd refit = cod.solve(x);
    for (std::size_t t = 0; t < detected.size(); ++t)
      if (std::abs(refit[static_cast<Eigen::Index>(t)]) > opts.support_threshold)
        code.values()[detected[t]] = refit[static_cast<Eigen::Index>(t)];
  }
  std::vector<int> support = code.support();
  const double rnorm = (x - apply(D, code)).norm();
  return PursuitResult{std::move(code), std::move(support), iterations,
                       rnorm, converged, l1};
}

struct GuaranteeCheck {
  bool ok = false;
  double bound = 0.0;
};

// Worst-stripe density condition: below 0.5 * (1 + 1/mu), greedy and convex
// pursuit both provably recover the code exactly.
inline GuaranteeCheck guarantee_l0inf(const SparseCode& code, int window_n,
                                      double mu) {
  if (mu < 0.0) throw ValidationError("guarantee_l0inf: mu must be >= 0");
  GuaranteeCheck check;
  if (mu == 0.0) {
    check.bound = std::numeric_limits<double>::infinity();
    check.ok = true;
    return check;
  }
  check.bound = 0.5 * (1.0 + 1.0 / mu);
  check.ok = l0_inf(code, window_n) < check.bound;
  return check;
}

// Stripe-coherence condition: max_i zeta_i < (1 + mu0) / 2. Weighs each
// stripe by how correlated its occupied shifts actually are, so mildly
// denser stripes pass when their offsets are benign.
inline GuaranteeCheck guarantee_stripe(const SparseCode& code,
                                       const CoherenceProfile& prof) {
  GuaranteeCheck check;
  check.bound = 0.5 * (1.0 + prof.mu0());
  check.ok = stripe_coherence(code, prof).max < check.bound;
  return check;
}

struct DominanceReport {
  bool applicable = false;  // profile peaks at shift zero
  bool l0inf_ok = false;
  bool stripe_ok = false;
  bool consistent = false;  // applicable && l0inf_ok implies stripe_ok
};

// When the profile attains its maximum at shift zero, the worst-stripe
// density condition is at least as strict as the stripe-coherence one; any
// code passing the former must pass the latter.
inline DominanceReport guarantee_dominance_check(const SparseCode& code,
                                                 const CoherenceProfile& prof) {
  DominanceReport report;
  report.applicable = std::abs(prof.max() - prof.mu0()) <= 1e-12;
  report.l0inf_ok = guarantee_l0inf(code, prof.n, prof.max()).ok;
  report.stripe_ok = guarantee_stripe(code, prof).ok;
  report.consistent = !(report.applicable && report.l0inf_ok) || report.stripe_ok;
  return report;
}

// Exhaustive sparsest exact fit: supports enumerated by cardinality
// (ascending, lexicographic within), first support whose least-squares fit
// reaches the residual tolerance wins. Exponential; guarded to 20 columns.
inline Eigen::VectorXd p0_bruteforce(const Eigen::MatrixXd& D,
                                     const Eigen::VectorXd& x,
                                     double fit_tol = 1e-9,
                                     bool allow_large = false) {
  const int cols = static_cast<int>(D.cols());
  if (cols < 1) throw DimensionError("p0_bruteforce: empty matrix");
  if (D.rows() != x.size())
    throw DimensionError("p0_bruteforce: signal length mismatch");
  if (cols > 20 && !allow_large)
    throw CapacityError("p0_bruteforce: " + std::to_string(cols) +
                        " columns; enumeration is exponential (allow_large to force)");
  if (x.norm() <= fit_tol) return Eigen::VectorXd::Zero(cols);
  for (int k = 1; k <= cols; ++k) {
    std::vector<int> combo(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) combo[static_cast<std::size_t>(j)] = j;
    while (true) {
      Eigen::MatrixXd sub(D.rows(), k);
      for (int j = 0; j < k; ++j) sub.col(j) = D.col(combo[static_cast<std::size_t>(j)]);
      const Eigen::VectorXd c = sub.colPivHouseholderQr().solve(x);
      if ((sub * c - x).norm() < fit_tol) {
        Eigen::VectorXd full = Eigen::VectorXd::Zero(cols);
        for (int j = 0; j < k; ++j) full[combo[static_cast<std::size_t>(j)]] = c[j];
        return full;
      }
      int pos = k - 1;
      while (pos >= 0 && combo[static_cast<std::size_t>(pos)] == cols - k + pos) --pos;
      if (pos < 0) break;
      ++combo[static_cast<std::size_t>(pos)];
      for (int j = pos + 1; j < k; ++j)
        combo[static_cast<std::size_t>(j)] = combo[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  throw NoSolutionError("p0_bruteforce: no support fits the signal");
}

struct RecoveryCheck {
  bool support_equal = false;
  double max_abs_err = 0.0;
  bool ok = false;
};

// Exact recovery: identical exact supports and coefficients within tol.
inline RecoveryCheck check_exact_recovery(const SparseCode& truth,
                                          const SparseCode& estimate,
                                          double tol = 1e-6) {
  if (truth.N() != estimate.N() || truth.m() != estimate.m())
    throw DimensionError("check_exact_recovery: code dimensions differ");
  RecoveryCheck check;
  check.support_equal = truth.support() == estimate.support();
  check.max_abs_err = (truth.values() - estimate.values()).cwiseAbs().maxCoeff();
  check.ok = check.support_equal && check.max_abs_err <= tol;
  return check;
}

}  // namespace csc
