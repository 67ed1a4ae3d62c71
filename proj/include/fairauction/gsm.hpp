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

// Group Score Mechanism.
//
// Every auction-side buyer i of group k wins with probability
//   Pi_i = sigma_k(bid_i) / sum_j sigma_{k(j)}(bid_j)
// where sigma_k(x) = a_k (b_k f(x) + c_k) + d_k is a non-decreasing group
// score, and the winner pays the Myerson price
//   p_i = bid_i - (integral from lower to bid_i of Pi_i(x, rest) dx) / Pi_i.

#ifndef FAIRAUCTION_GSM_HPP_
#define FAIRAUCTION_GSM_HPP_

#include <cstddef>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "fairauction/core_model.hpp"
#include "fairauction/gpm.hpp"
#include "fairauction/rng.hpp"

namespace fairauction {

enum class BaseTransform { kLinear, kLog1p, kSquare, kExp };

inline constexpr BaseTransform kAllTransforms[] = {BaseTransform::kLinear, BaseTransform::kLog1p,
                                                   BaseTransform::kSquare, BaseTransform::kExp};

double apply_transform(BaseTransform base, double x);
std::string_view transform_name(BaseTransform base);
// Accepts "linear", "log1p" (or "log"), "square", "exp". Throws ContractViolation.
BaseTransform parse_transform(std::string_view name);

struct ScoreParams {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;
};

class GroupScoreFunction {
 public:
  GroupScoreFunction(std::vector<ScoreParams> params, BaseTransform base,
                     ValuationSupport support);

  std::size_t num_groups() const noexcept { return params_.size(); }
  const ScoreParams& params(std::size_t group) const { return params_.at(group); }
  const std::vector<ScoreParams>& all_params() const noexcept { return params_; }
  BaseTransform base() const noexcept { return base_; }
  const ValuationSupport& support() const noexcept { return support_; }

  // sigma_k(bid); throws ContractViolation for a bid outside the support.
  double score(std::size_t group, double bid) const;

  // Scores rescaled by a common factor kappa (1, or e^-upper for the exp
  // base so that e^x cannot overflow). Win probabilities are ratios, so the
  // factor cancels. scaled(x) = slope_k * scaled_transform(x) + scaled_offset_k.
  double scale() const noexcept { return scale_; }
  double scaled_transform(double x) const;
  double slope(std::size_t group) const { return params_[group].a * params_[group].b; }
  double scaled_offset(std::size_t group) const {
    return scale_ * (params_[group].a * params_[group].c + params_[group].d);
  }
  double scaled_score(std::size_t group, double bid) const {
    return slope(group) * scaled_transform(bid) + scaled_offset(group);
  }

 private:
  std::vector<ScoreParams> params_;
  BaseTransform base_;
  ValuationSupport support_;
  double scale_;
};

enum class QuadratureRule { kCompositeSimpson };

struct QuadratureSpec {
  QuadratureRule rule = QuadratureRule::kCompositeSimpson;
  std::size_t panels = 512;  // even
  double abs_tol = 1e-8;

  void validate() const;
};

// Composite Simpson nodes and weights on [lo, hi] with `panels` panels.
void simpson_rule(double lo, double hi, std::size_t panels, std::vector<double>& nodes,
                  std::vector<double>& weights);

struct IntegrationResult {
  double value;
  double error_estimate;  // |S(2n) - S(n)| / 15 of the last doubling
  std::size_t panels;
};

// Integral of `fn` over [lo, hi] by composite Simpson, doubling the panel count
// from spec.panels until the Richardson estimate drops below `tol` (or 2^20
// panels are reached). Each piece between breakpoints is integrated
// separately, so piecewise-smooth integrands converge; jumps may sit at the
// breakpoints.
IntegrationResult integrate(const std::function<double(double)>& fn, double lo, double hi,
                            const QuadratureSpec& spec, double tol,
                            std::span<const double> breakpoints = {});

// Myerson price for an allocation rule x -> Pi(x) of one buyer with the other
// bids held fixed: bid - integral_lower^bid Pi / Pi(bid). Requires Pi(bid) > 0.
// spec.abs_tol bounds the error of the returned price.
double myerson_payment(const std::function<double(double)>& allocation, double lower, double bid,
                       const QuadratureSpec& spec, std::span<const double> breakpoints = {});

// Win probabilities over `side` (returned in the order of `side`). Throws
// DegenerateInput when every score on the side is 0.
std::vector<double> individual_win_probs(const GroupScoreFunction& gsf, const BidProfile& bids,
                                         std::span<const std::size_t> side);
std::vector<double> individual_win_probs(const GroupScoreFunction& gsf, const BidProfile& bids);

// Myerson price of `winner` in the lottery over `side` (which must contain the
// winner). Throws ContractViolation when the winner's probability is 0.
double gsm_payment(std::size_t winner, const BidProfile& bids, const GroupScoreFunction& gsf,
                   const QuadratureSpec& quad, std::span<const std::size_t> side);
double gsm_payment(std::size_t winner, const BidProfile& bids, const GroupScoreFunction& gsf,
                   const QuadratureSpec& quad);

// Expected payment Pi_i p_i = bid_i Pi_i - integral, for every buyer on `side`.
std::vector<double> gsm_expected_payments(const BidProfile& bids, const GroupScoreFunction& gsf,
                                          const QuadratureSpec& quad,
                                          std::span<const std::size_t> side);

inline constexpr double kMinWinnerProbability = 1e-12;
inline constexpr std::size_t kMaxWinnerRedraws = 32;

// Lottery over the auction side of a fixed split; `rng` draws the winner.
Outcome gsm_run_on_side(const BidProfile& bids, const GroupScoreFunction& gsf,
                        std::span<const std::size_t> auction_side, Rng& rng,
                        const QuadratureSpec& quad);

// Splits the bidders, then runs the lottery on the auction side with fixed
// score functions.
Outcome gsm_run(const BidProfile& bids, const GroupScoreFunction& gsf, Rng& rng,
                const QuadratureSpec& quad = {});

// Learns score functions from the statistics side (which then covers every
// group) before running the lottery on the auction side.
using ScoreTrainer =
    std::function<GroupScoreFunction(const BidProfile& bids, std::span<const std::size_t> stat)>;
Outcome gsm_run(const BidProfile& bids, const ScoreTrainer& trainer, Rng& rng,
                const QuadratureSpec& quad = {});

// Exact expected outcome when the lottery runs over `auction_side`.
ExpectedOutcome gsm_conditional_expected(const BidProfile& bids, const GroupScoreFunction& gsf,
                                         std::span<const std::size_t> auction_side,
                                         const QuadratureSpec& quad = {});

enum class GsmSplitMode {
  kAllAuction,  // every buyer on the auction side
  kEnumerate,   // exact average over all 2^n splits (n <= kMaxEnumeratedBuyers)
  kMonteCarlo,  // average over random splits
};

inline constexpr std::size_t kMaxEnumeratedBuyers = 20;

struct GsmExpectation {
  GsmSplitMode mode = GsmSplitMode::kAllAuction;
  std::size_t reps = 200;  // kMonteCarlo only
  std::uint64_t seed = 0;  // kMonteCarlo only
};

ExpectedOutcome gsm_expected(const BidProfile& bids, const GroupScoreFunction& gsf,
                             const QuadratureSpec& quad, const GsmExpectation& how = {});

}  // namespace fairauction

#endif  // FAIRAUCTION_GSM_HPP_
