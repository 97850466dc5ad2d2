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

#include "emgspeech/probe.hpp"

#include "emgspeech/error.hpp"
#include "emgspeech/parallel.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace emgspeech {

Eigen::MatrixXd LinearMap::Predict(const Eigen::Ref<const Eigen::MatrixXd>& x) const {
  if (x.cols() != weights.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "probe input has " + std::to_string(x.cols()) +
                                                   " dims, map expects " + std::to_string(weights.cols()));
  }
  return (x * weights.transpose()).rowwise() + bias.transpose();
}

double ProbeReport::Quantile(double q) const {
  std::vector<double> values;
  for (Eigen::Index i = 0; i < per_dim_r.size(); ++i) {
    if (!std::isnan(per_dim_r(i))) values.push_back(per_dim_r(i));
  }
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<double> DefaultLambdaGrid() { return {1e-4, 1e-3, 1e-2, 1e-1, 1e0, 1e1, 1e2}; }

namespace {

void CheckPair(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::Ref<const Eigen::MatrixXd>& y) {
  if (x.rows() == 0) throw Error(ErrorCode::kInvalidArgument, "no training frames (N = 0)");
  if (x.rows() != y.rows()) {
    throw Error(ErrorCode::kSizeMismatch, "frame count mismatch: X has " + std::to_string(x.rows()) +
                                              ", Y has " + std::to_string(y.rows()));
  }
  if (!x.allFinite() || !y.allFinite()) throw Error(ErrorCode::kNonFinite, "non-finite probe input");
}

}  // namespace

LinearMap FitRidge(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::Ref<const Eigen::MatrixXd>& y,
                   double lambda) {
  CheckPair(x, y);
  if (lambda < 0.0) throw Error(ErrorCode::kInvalidArgument, "lambda must be >= 0");
  const Eigen::RowVectorXd x_mean = x.colwise().mean();
  const Eigen::RowVectorXd y_mean = y.colwise().mean();
  const Eigen::MatrixXd xc = x.rowwise() - x_mean;
  const Eigen::MatrixXd yc = y.rowwise() - y_mean;

  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(x.cols(), x.cols());
  gram.selfadjointView<Eigen::Lower>().rankUpdate(xc.transpose());
  gram = gram.selfadjointView<Eigen::Lower>();
  gram.diagonal().array() += lambda;
  const Eigen::MatrixXd rhs = xc.transpose() * yc;

  LinearMap map;
  map.lambda = lambda;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  map.weights = ldlt.solve(rhs).transpose();
  map.bias = (y_mean - x_mean * map.weights.transpose()).transpose();
  if (!map.weights.allFinite()) throw Error(ErrorCode::kNonFinite, "ridge solve produced non-finite weights");

  const Eigen::MatrixXd fitted = map.Predict(x);
  map.fit_r = Eigen::VectorXd::Constant(y.cols(), std::numeric_limits<double>::quiet_NaN());
  for (Eigen::Index j = 0; j < y.cols(); ++j) {
    if (auto r = Pearson(fitted.col(j), y.col(j))) map.fit_r(j) = *r;
  }
  return map;
}

LinearMap FitRidgeSelect(const Eigen::Ref<const Eigen::MatrixXd>& x_train,
                         const Eigen::Ref<const Eigen::MatrixXd>& y_train,
                         const Eigen::Ref<const Eigen::MatrixXd>& x_val,
                         const Eigen::Ref<const Eigen::MatrixXd>& y_val, const std::vector<double>& grid) {
  if (grid.empty()) throw Error(ErrorCode::kInvalidArgument, "lambda grid is empty");
  if (grid.size() == 1) return FitRidge(x_train, y_train, grid.front());
  double best_lambda = grid.front();
  double best_r = -std::numeric_limits<double>::infinity();
  for (double lambda : grid) {
    const LinearMap candidate = FitRidge(x_train, y_train, lambda);
    const ProbeReport report = Evaluate(candidate, x_val, y_val);
    if (report.mean_r > best_r) {
      best_r = report.mean_r;
      best_lambda = lambda;
    }
  }
  return FitRidge(x_train, y_train, best_lambda);
}

LinearMap FitRidge(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::Ref<const Eigen::MatrixXd>& y,
                   const std::vector<double>& grid) {
  CheckPair(x, y);
  if (grid.empty()) throw Error(ErrorCode::kInvalidArgument, "lambda grid is empty");
  if (grid.size() == 1) return FitRidge(x, y, grid.front());
  const Eigen::Index n = x.rows();
  const Eigen::Index held = std::max<Eigen::Index>(2, n / 10);
  if (n - held < 1) throw Error(ErrorCode::kInvalidArgument, "too few frames for lambda selection");
  const LinearMap chosen = FitRidgeSelect(x.topRows(n - held), y.topRows(n - held), x.bottomRows(held),
                                          y.bottomRows(held), grid);
  return FitRidge(x, y, chosen.lambda);
}

std::optional<double> Pearson(const Eigen::Ref<const Eigen::VectorXd>& a,
                              const Eigen::Ref<const Eigen::VectorXd>& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::kSizeMismatch, "Pearson inputs differ in length");
  const Eigen::VectorXd ac = a.array() - a.mean();
  const Eigen::VectorXd bc = b.array() - b.mean();
  const double saa = ac.squaredNorm();
  const double sbb = bc.squaredNorm();
  if (!(saa > 0.0) || !(sbb > 0.0)) return std::nullopt;
  const double r = ac.dot(bc) / std::sqrt(saa * sbb);
  return std::clamp(r, -1.0, 1.0);
}

ProbeReport CorrelationReport(const Eigen::Ref<const Eigen::MatrixXd>& predicted,
                              const Eigen::Ref<const Eigen::MatrixXd>& target) {
  if (predicted.rows() != target.rows() || predicted.cols() != target.cols()) {
    throw Error(ErrorCode::kSizeMismatch, "prediction and target shapes differ");
  }
  if (target.rows() < 2) throw Error(ErrorCode::kInvalidArgument, "need at least 2 test frames");
  ProbeReport report;
  report.n_test_frames = static_cast<std::size_t>(target.rows());
  report.per_dim_r = Eigen::VectorXd::Constant(target.cols(), std::numeric_limits<double>::quiet_NaN());
  double sum = 0.0;
  std::size_t included = 0;
  for (Eigen::Index j = 0; j < target.cols(); ++j) {
    if (const auto r = Pearson(predicted.col(j), target.col(j))) {
      report.per_dim_r(j) = *r;
      sum += *r;
      ++included;
    } else {
      ++report.excluded_dims;
    }
  }
  report.mean_r = included > 0 ? sum / static_cast<double>(included) : 0.0;
  return report;
}

ProbeReport Evaluate(const LinearMap& map, const Eigen::Ref<const Eigen::MatrixXd>& x_test,
                     const Eigen::Ref<const Eigen::MatrixXd>& y_test) {
  if (x_test.rows() != y_test.rows()) {
    throw Error(ErrorCode::kSizeMismatch, "test frame count mismatch");
  }
  if (y_test.cols() != map.weights.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "test targets do not match the map's output dim");
  }
  return CorrelationReport(map.Predict(x_test), y_test);
}

std::vector<ProbeReport> LayerSweep(const std::vector<ProbeSplit>& layers, const std::vector<double>& grid,
                                    std::size_t workers) {
  std::vector<ProbeReport> reports(layers.size());
  ParallelFor(layers.size(), workers, [&](std::size_t i) {
    const ProbeSplit& s = layers[i];
    const LinearMap map = s.x_val.rows() > 0
                              ? FitRidgeSelect(s.x_train, s.y_train, s.x_val, s.y_val, grid)
                              : FitRidge(s.x_train, s.y_train, grid);
    reports[i] = Evaluate(map, s.x_test, s.y_test);
    reports[i].layer_id = static_cast<int>(i);
  });
  return reports;
}

std::string ProbeReportsCsv(const std::vector<ProbeReport>& reports) {
  std::ostringstream out;
  out.precision(9);
  out << "layer_id,mean_r,n_test_frames,excluded_dims,r_p10,r_p50,r_p90\n";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    out << r.layer_id.value_or(static_cast<int>(i)) << ',' << r.mean_r << ',' << r.n_test_frames << ','
        << r.excluded_dims << ',' << r.Quantile(0.1) << ',' << r.Quantile(0.5) << ',' << r.Quantile(0.9)
        << '\n';
  }
  return out.str();
}

}  // namespace emgspeech
