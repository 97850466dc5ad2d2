// Copyright 2026 The emgspeech Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "emgspeech/types.hpp"

#include <Eigen/Core>

#include <vector>

namespace emgspeech {

/// Symmetric positive definite channel covariance of one EMG frame.
struct CovFrame {
  Eigen::MatrixXd mat;
  double epsilon = 1.0;  // scale applied to E E^T (1 / tau)

  Eigen::Index dim() const { return mat.rows(); }
};

/// Lower-triangular Cholesky factor with strictly positive diagonal.
struct CholFrame {
  Eigen::MatrixXd lower;

  Eigen::Index dim() const { return lower.rows(); }
};

/// (1/tau) E E^T + delta I with delta = ridge_rel * trace((1/tau) E E^T) / V.
/// `frame` is V x tau. Throws kDegenerate for an all-zero frame.
CovFrame Covariance(const Eigen::Ref<const Eigen::MatrixXd>& frame, double ridge_rel = 1e-6);
CovFrame Covariance(const Eigen::Ref<const MatrixXfR>& frame, double ridge_rel = 1e-6);

/// Per-electrode power, the covariance diagonal.
Eigen::VectorXd DiagPower(const CovFrame& cov);

/// Row-major flatten of the full symmetric matrix (length V^2).
Eigen::VectorXd VecCov(const CovFrame& cov);

/// Inverse of VecCov.
CovFrame UnvecCov(const Eigen::Ref<const Eigen::VectorXd>& flat);

/// Cholesky-Banachiewicz factorization. Throws kNotPositiveDefinite naming the
/// first non-positive pivot.
CholFrame Cholesky(const CovFrame& cov);

/// L L^T.
CovFrame Reconstruct(const CholFrame& chol);

/// Log-Cholesky distance: Frobenius distance between the strictly lower parts
/// combined with the Euclidean distance between log-diagonals.
double GeodesicDistance(const CholFrame& a, const CholFrame& b);

/// Coordinates (strictly-lower entries row-major, then log-diagonal) in which
/// GeodesicDistance is Euclidean. Length V(V+1)/2.
Eigen::VectorXd LogCholeskyCoords(const CholFrame& chol);
CholFrame FromLogCholeskyCoords(const Eigen::Ref<const Eigen::VectorXd>& coords,
                                Eigen::Index dim);

}  // namespace emgspeech
