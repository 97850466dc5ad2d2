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

#include "emgspeech/spd.hpp"

#include "emgspeech/error.hpp"

#include <cmath>
#include <string>

namespace emgspeech {

CovFrame Covariance(const Eigen::Ref<const Eigen::MatrixXd>& frame, double ridge_rel) {
  const Eigen::Index v = frame.rows();
  const Eigen::Index tau = frame.cols();
  if (v < 1 || tau < 1) throw Error(ErrorCode::kInvalidArgument, "frame must be at least 1 x 1");
  if (!frame.allFinite()) throw Error(ErrorCode::kNonFinite, "frame contains non-finite samples");
  CovFrame cov;
  cov.epsilon = 1.0 / static_cast<double>(tau);
  cov.mat = cov.epsilon * (frame * frame.transpose());
  const double trace = cov.mat.trace();
  if (!(trace > 0.0)) throw Error(ErrorCode::kDegenerate, "degenerate frame (zero power)");
  cov.mat.diagonal().array() += ridge_rel * trace / static_cast<double>(v);
  // Symmetrize away the rounding asymmetry of the product.
  cov.mat = 0.5 * (cov.mat + cov.mat.transpose()).eval();
  return cov;
}

CovFrame Covariance(const Eigen::Ref<const MatrixXfR>& frame, double ridge_rel) {
  return Covariance(Eigen::MatrixXd(frame.cast<double>()), ridge_rel);
}

Eigen::VectorXd DiagPower(const CovFrame& cov) { return cov.mat.diagonal(); }

Eigen::VectorXd VecCov(const CovFrame& cov) {
  const Eigen::Index v = cov.dim();
  Eigen::VectorXd flat(v * v);
  for (Eigen::Index i = 0; i < v; ++i) {
    for (Eigen::Index j = 0; j < v; ++j) flat(i * v + j) = cov.mat(i, j);
  }
  return flat;
}

CovFrame UnvecCov(const Eigen::Ref<const Eigen::VectorXd>& flat) {
  const auto v = static_cast<Eigen::Index>(std::lround(std::sqrt(static_cast<double>(flat.size()))));
  if (v * v != flat.size()) throw Error(ErrorCode::kDimensionMismatch, "length is not a square");
  CovFrame cov;
  cov.mat.resize(v, v);
  for (Eigen::Index i = 0; i < v; ++i) {
    for (Eigen::Index j = 0; j < v; ++j) cov.mat(i, j) = flat(i * v + j);
  }
  return cov;
}

CholFrame Cholesky(const CovFrame& cov) {
  const Eigen::MatrixXd& a = cov.mat;
  const Eigen::Index n = a.rows();
  if (a.cols() != n) throw Error(ErrorCode::kDimensionMismatch, "covariance is not square");
  CholFrame out;
  out.lower = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd& l = out.lower;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      double sum = a(i, j);
      for (Eigen::Index k = 0; k < j; ++k) sum -= l(i, k) * l(j, k);
      if (i == j) {
        if (!(sum > 0.0) || !std::isfinite(sum)) {
          throw Error(ErrorCode::kNotPositiveDefinite,
                      "matrix is not positive definite: pivot " + std::to_string(i) + " = " +
                          std::to_string(sum));
        }
        l(i, i) = std::sqrt(sum);
      } else {
        l(i, j) = sum / l(j, j);
      }
    }
  }
  return out;
}

CovFrame Reconstruct(const CholFrame& chol) {
  CovFrame cov;
  cov.mat = chol.lower * chol.lower.transpose();
  return cov;
}

double GeodesicDistance(const CholFrame& a, const CholFrame& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "geodesic distance between " +
                                                   std::to_string(a.dim()) + "x" + std::to_string(a.dim()) +
                                                   " and " + std::to_string(b.dim()) + "x" +
                                                   std::to_string(b.dim()) + " factors");
  }
  const Eigen::Index n = a.dim();
  double lower = 0.0;
  double diag = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      const double d = a.lower(i, j) - b.lower(i, j);
      lower += d * d;
    }
    const double d = std::log(a.lower(i, i)) - std::log(b.lower(i, i));
    diag += d * d;
  }
  return std::sqrt(lower + diag);
}

Eigen::VectorXd LogCholeskyCoords(const CholFrame& chol) {
  const Eigen::Index n = chol.dim();
  Eigen::VectorXd coords(n * (n + 1) / 2);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) coords(k++) = chol.lower(i, j);
  }
  for (Eigen::Index i = 0; i < n; ++i) coords(k++) = std::log(chol.lower(i, i));
  return coords;
}

CholFrame FromLogCholeskyCoords(const Eigen::Ref<const Eigen::VectorXd>& coords, Eigen::Index dim) {
  if (coords.size() != dim * (dim + 1) / 2) {
    throw Error(ErrorCode::kDimensionMismatch, "log-Cholesky coordinate count does not match dimension");
  }
  CholFrame chol;
  chol.lower = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) chol.lower(i, j) = coords(k++);
  }
  for (Eigen::Index i = 0; i < dim; ++i) chol.lower(i, i) = std::exp(coords(k++));
  return chol;
}

}  // namespace emgspeech
