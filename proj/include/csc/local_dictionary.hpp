#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>

#include "csc/errors.hpp"

namespace csc {

// Local dictionary: m filters (atoms) of length n, one per column, each with
// unit Euclidean norm. The global convolutional dictionary consists of every
// atom placed at every circular shift of the signal; only this small matrix
// is ever stored.
class LocalDictionary {
 public:
  explicit LocalDictionary(Eigen::MatrixXd atoms) : atoms_(std::move(atoms)) {
    if (atoms_.rows() < 1 || atoms_.cols() < 1)
      throw DimensionError("local dictionary needs n >= 1 rows and m >= 1 columns");
    if (!atoms_.allFinite())
      throw ValidationError("local dictionary has non-finite entries");
    for (Eigen::Index f = 0; f < atoms_.cols(); ++f) {
      const double norm = atoms_.col(f).norm();
      if (std::abs(norm - 1.0) > 1e-12)
        throw ValidationError("atom " + std::to_string(f) +
                              " is not unit norm (|norm-1| = " +
                              std::to_string(std::abs(norm - 1.0)) + ")");
    }
  }

  // Normalize each column to unit norm, then construct. Zero columns are
  // rejected rather than silently replaced.
  static LocalDictionary normalized(Eigen::MatrixXd atoms) {
    if (atoms.rows() < 1 || atoms.cols() < 1)
      throw DimensionError("local dictionary needs n >= 1 rows and m >= 1 columns");
    if (!atoms.allFinite())
      throw ValidationError("local dictionary has non-finite entries");
    for (Eigen::Index f = 0; f < atoms.cols(); ++f) {
      const double norm = atoms.col(f).norm();
      if (norm == 0.0)
        throw ValidationError("atom " + std::to_string(f) + " is identically zero");
      atoms.col(f) /= norm;
    }
    return LocalDictionary(std::move(atoms));
  }

  int n() const { return static_cast<int>(atoms_.rows()); }  // atom length
  int m() const { return static_cast<int>(atoms_.cols()); }  // filter count

  const Eigen::MatrixXd& atoms() const { return atoms_; }

  Eigen::VectorXd atom(int f) const {
    if (f < 0 || f >= m()) throw IndexError("filter index out of range");
    return atoms_.col(f);
  }

 private:
  Eigen::MatrixXd atoms_;
};

}  // namespace csc
