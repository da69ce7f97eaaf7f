// Copyright 2026 The erlq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Small dense helpers shared by the solvers. Inverses of symmetric positive
// definite matrices are always realized as Cholesky solves.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

#include "erlq/errors.hpp"

namespace erlq {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline Matrix symmetrize(const Matrix& x) { return 0.5 * (x + x.transpose()); }

inline double min_eigenvalue(const Matrix& x) {
  if (x.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(x), Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(0);
}

inline double max_eigenvalue(const Matrix& x) {
  if (x.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(x), Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(x.rows() - 1);
}

inline bool is_positive_definite(const Matrix& x) {
  Eigen::LLT<Matrix> llt(symmetrize(x));
  return llt.info() == Eigen::Success;
}

/// Solves `spd * X = rhs` for symmetric positive definite `spd`.
inline Matrix spd_solve(const Matrix& spd, const Matrix& rhs, const char* what = "matrix") {
  Eigen::LLT<Matrix> llt(symmetrize(spd));
  if (llt.info() != Eigen::Success) {
    throw DomainError(std::string(what) + " is not positive definite");
  }
  return llt.solve(rhs);
}

/// (spd)^{-1} computed as a Cholesky solve against the identity, symmetrized.
inline Matrix spd_inverse(const Matrix& spd, const char* what = "matrix") {
  return symmetrize(spd_solve(spd, Matrix::Identity(spd.rows(), spd.cols()), what));
}

inline double log_det_spd(const Matrix& spd, const char* what = "matrix") {
  Eigen::LLT<Matrix> llt(symmetrize(spd));
  if (llt.info() != Eigen::Success) {
    throw DomainError(std::string(what) + " is not positive definite");
  }
  const Matrix& l = llt.matrixLLT();
  double acc = 0.0;
  for (Eigen::Index k = 0; k < l.rows(); ++k) acc += std::log(l(k, k));
  return 2.0 * acc;
}

/// Returns F with F F^T = x, for symmetric PSD x; negative eigenvalues are
/// clipped to zero so that a zero matrix is a valid input.
inline Matrix psd_factor(const Matrix& x) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(x));
  Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal();
}

inline bool all_finite(const Matrix& x) { return x.allFinite(); }

}  // namespace erlq
