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

#include <optional>
#include <string>
#include <vector>

namespace emgspeech {

struct LinearMap {
  Eigen::MatrixXd weights;  // d_out x d_in
  Eigen::VectorXd bias;     // d_out
  double lambda = 0.0;
  Eigen::VectorXd fit_r;    // per-output Pearson r on the training frames

  Eigen::MatrixXd Predict(const Eigen::Ref<const Eigen::MatrixXd>& x) const;
};

struct ProbeReport {
  Eigen::VectorXd per_dim_r;        // NaN for excluded (zero-variance) dims
  double mean_r = 0.0;              // unweighted mean over included dims
  std::size_t n_test_frames = 0;
  std::size_t excluded_dims = 0;
  std::optional<int> layer_id;

  /// Quantile over included dimensions (q in [0, 1]).
  double Quantile(double q) const;
};

/// {1e-4, 1e-3, ..., 1e2}.
std::vector<double> DefaultLambdaGrid();

/// Closed-form ridge with an unpenalized intercept: centre X and Y, solve
/// (Xc^T Xc + lambda I) W^T = Xc^T Yc, then b = mean(Y) - W mean(X).
/// X is N x d_in, Y is N x d_out. Throws for N = 0 or non-finite input.
LinearMap FitRidge(const Eigen::Ref<const Eigen::MatrixXd>& x,
                   const Eigen::Ref<const Eigen::MatrixXd>& y, double lambda);

/// Chooses lambda from `grid` by mean r on the validation pair, then refits on
/// the training pair with that lambda.
LinearMap FitRidgeSelect(const Eigen::Ref<const Eigen::MatrixXd>& x_train,
                         const Eigen::Ref<const Eigen::MatrixXd>& y_train,
                         const Eigen::Ref<const Eigen::MatrixXd>& x_val,
                         const Eigen::Ref<const Eigen::MatrixXd>& y_val,
                         const std::vector<double>& grid);

/// Same as FitRidgeSelect, holding out the last 10% of frames for selection
/// when the grid has more than one value. The final map is refit on all frames.
LinearMap FitRidge(const Eigen::Ref<const Eigen::MatrixXd>& x,
                   const Eigen::Ref<const Eigen::MatrixXd>& y,
                   const std::vector<double>& grid);

/// Pearson r between two equal-length columns; nullopt if either is constant.
std::optional<double> Pearson(const Eigen::Ref<const Eigen::VectorXd>& a,
                              const Eigen::Ref<const Eigen::VectorXd>& b);

/// Per-dimension Pearson r between predictions and targets pooled over all
/// frames. Throws for fewer than two frames.
ProbeReport CorrelationReport(const Eigen::Ref<const Eigen::MatrixXd>& predicted,
                              const Eigen::Ref<const Eigen::MatrixXd>& target);

ProbeReport Evaluate(const LinearMap& map, const Eigen::Ref<const Eigen::MatrixXd>& x_test,
                     const Eigen::Ref<const Eigen::MatrixXd>& y_test);

struct ProbeSplit {
  Eigen::MatrixXd x_train, y_train;
  Eigen::MatrixXd x_val, y_val;
  Eigen::MatrixXd x_test, y_test;
};

/// One fit/evaluate per layer (each layer is its own ProbeSplit sharing the
/// same targets). Layers run in parallel; reports come back in layer order.
std::vector<ProbeReport> LayerSweep(const std::vector<ProbeSplit>& layers,
                                    const std::vector<double>& grid, std::size_t workers = 1);

/// "layer_id,mean_r,n_test_frames,excluded_dims,r_p10,r_p50,r_p90" rows.
std::string ProbeReportsCsv(const std::vector<ProbeReport>& reports);

}  // namespace emgspeech
