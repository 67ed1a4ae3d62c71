// Copyright 2026 The FairAuction Authors.
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

// Learning group score functions by dual ascent.
//
// For every group k, three small networks (affine -> ReLU -> affine -> |.|)
// emit a_k, b_k and d_k, and one affine map through |.| emits c_k. All of them
// read the same fixed-length summary of the statistics-side bids. Training
// minimizes the Lagrangian
//
//   L = psi + lambda * (gap - epsilon),   psi = -(expected revenue)
//
// of the lottery run over the statistics side, with plain gradient descent on
// the network weights and projected gradient ascent on lambda.

#ifndef FAIRAUCTION_SCORE_LEARNING_HPP_
#define FAIRAUCTION_SCORE_LEARNING_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fairauction/core_model.hpp"
#include "fairauction/gsm.hpp"
#include "fairauction/rng.hpp"

namespace fairauction {

inline constexpr std::size_t kQuantilesPerGroup = 5;

// Per group, the (min, 25%, median, 75%, max) of the bids in `side`, using
// linear interpolation between order statistics. Throws ResampleNeeded when a
// group has no bid in `side`.
std::vector<double> stat_features(const BidProfile& bids, std::span<const std::size_t> side);

// affine(in -> hidden) -> ReLU -> affine(hidden -> 1) -> |.|
struct MlpParams {
  std::size_t inputs = 0;
  std::size_t hidden = 0;
  std::vector<double> w1;  // hidden x inputs, row-major
  std::vector<double> b1;  // hidden
  std::vector<double> w3;  // hidden
  double b3 = 0.0;

  // Pre-absolute-value output.
  double raw(std::span<const double> features) const;
};

// affine(in -> 1) -> |.|
struct LinearHead {
  std::vector<double> w;
  double b = 0.0;

  double raw(std::span<const double> features) const;
};

struct GroupHeads {
  MlpParams a, b, d;
  LinearHead c;
};

struct ScoreNetworks {
  std::vector<GroupHeads> groups;

  // Weights uniform in [-0.1, 0.1]; head biases uniform in [0.5, 1.5] so that
  // the first scores are strictly positive.
  static ScoreNetworks initialize(std::size_t num_groups, std::size_t feature_dim,
                                  std::size_t hidden, Rng& rng);

  std::size_t num_parameters() const;
  // Flat order per group: a (w1, b1, w3, b3), b, d, then c (w, b).
  std::vector<double> flatten() const;
  void assign(std::span<const double> flat);
};

std::vector<ScoreParams> emit_params(const ScoreNetworks& nets, std::span<const double> features);
GroupScoreFunction emit_score_function(const ScoreNetworks& nets,
                                       std::span<const double> features, BaseTransform base,
                                       ValuationSupport support);

struct LagrangianValue {
  double psi = 0.0;  // -(expected revenue)
  double gap = 0.0;  // max pairwise group-welfare difference
  double g = 0.0;    // gap - epsilon
  double lagrangian = 0.0;
  std::vector<double> group_welfare;
  std::vector<ScoreParams> grad;  // dL / d(a, b, c, d) per group, when requested
};

// The lottery over a fixed buyer set with a fixed Simpson panel count, so that
// the objective is a smooth function of the score parameters and its gradient
// is exact for the discretized integral.
class LotteryObjective {
 public:
  LotteryObjective(const BidProfile& bids, std::span<const std::size_t> side, BaseTransform base,
                   std::size_t panels);

  LagrangianValue evaluate(std::span<const ScoreParams> params, double lambda, double epsilon,
                           bool with_gradient) const;

  std::size_t num_groups() const noexcept { return num_groups_; }
  double max_bid() const noexcept { return max_bid_; }

 private:
  std::size_t num_groups_;
  double scale_;
  double max_bid_ = 0.0;
  std::vector<std::size_t> group_;
  std::vector<double> value_;
  std::vector<double> transformed_;  // scaled transform of each bid
  std::size_t nodes_per_buyer_;
  std::vector<double> node_f_;  // scaled transform at each buyer's quadrature nodes
  std::vector<double> node_w_;
};

// L(sigma, lambda) for the lottery over `stat_side`, with payments from
// gsm_expected_payments (adaptive quadrature).
LagrangianValue lagrangian(const GroupScoreFunction& gsf, const BidProfile& bids,
                           std::span<const std::size_t> stat_side, double lambda, double epsilon,
                           const QuadratureSpec& quad = {});

// Gradient of L with respect to the flattened network weights.
std::vector<double> network_gradient(const ScoreNetworks& nets, std::span<const double> features,
                                     const LotteryObjective& objective, double lambda,
                                     double epsilon, LagrangianValue* value_out = nullptr);

struct LearnerConfig {
  double learning_rate = 1e-3;
  std::size_t episodes = 2000;
  double epsilon = 0.0;
  BaseTransform base = BaseTransform::kLinear;
  std::size_t sgd_steps_per_episode = 50;
  std::uint64_t seed = 0;
  std::size_t hidden_width = 32;
  // Step for lambda; 0 means use learning_rate.
  double dual_learning_rate = 0.0;
  // Simpson panels per buyer inside the training objective.
  std::size_t train_panels = 32;

  void validate() const;
};

struct TrainingPoint {
  std::size_t episode;
  double psi;
  double g;
  double lambda;
  bool feasible;
};

struct TrainingResult {
  // nullopt when no episode met the fairness constraint.
  std::optional<GroupScoreFunction> scores;
  std::optional<std::size_t> feasible_episode;  // episode of the returned scores
  std::vector<TrainingPoint> curve;
};

// Dual ascent on the statistics-side bids. Returns the scores of the last
// episode that met the fairness constraint. Throws TrainingDiverged on a
// non-finite objective or a broken invariant.
TrainingResult dual_ascent_train(const BidProfile& bids, std::span<const std::size_t> stat_side,
                                 const LearnerConfig& cfg);
TrainingResult dual_ascent_train(const BidProfile& stat_bids, const LearnerConfig& cfg);

// Largest relative error |analytic - central difference| / (|analytic| + 1e-8)
// over `probe_count` random weight coordinates, using the five-point central
// stencil with spacing `step`. Probes whose stencil crosses a ReLU, |.| or a
// change in the group welfare order are skipped; `checked` receives the count
// actually compared.
double grad_check(const ScoreNetworks& nets, std::span<const double> features,
                  const LotteryObjective& objective, double lambda, double epsilon,
                  std::size_t probe_count, Rng& rng, double step = 1e-3,
                  std::size_t* checked = nullptr);

}  // namespace fairauction

#endif  // FAIRAUCTION_SCORE_LEARNING_HPP_
