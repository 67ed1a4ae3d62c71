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

// Group Probability Mechanism.
//
// Buyers are split at random into a statistics side and an auction side. On
// the statistics side each group runs a notional second-price auction; its
// winner's bid t_k and price p_k feed a linear program
//
//   maximize  sum_k p_k Pr_k
//   s.t.      |Pr_k t_k - Pr_l t_l| <= epsilon   for all k, l
//             sum_k Pr_k = 1,  0 <= Pr_k <= 1
//
// whose solution is the group lottery. One group is drawn and a second-price
// auction runs among its auction-side members. No buyer's own bid affects her
// group's probability, which is what makes the mechanism truthful.

#ifndef FAIRAUCTION_GPM_HPP_
#define FAIRAUCTION_GPM_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "fairauction/core_model.hpp"
#include "fairauction/rng.hpp"

namespace fairauction {

inline constexpr std::size_t kMaxLpGroups = 6;
inline constexpr std::size_t kMaxSplitAttempts = 32;
inline constexpr double kFairnessTolerance = 1e-9;

struct BidderSplit {
  BuyerSet stat;
  BuyerSet auction_side;
};

// Each buyer lands on the statistics side with probability 1/2. Consumes
// exactly n draws from `rng` regardless of the bids.
BidderSplit split_bidders(std::size_t n, Rng& rng);

// Redraws the split until every group has a statistics-side member; throws
// ResampleNeeded after kMaxSplitAttempts failures.
BidderSplit split_covering_groups(const GroupPartition& partition, Rng& rng);

struct GroupProbabilities {
  std::vector<double> probs;
  std::vector<std::size_t> winners;
  std::vector<double> winner_bids;
  std::vector<double> winner_prices;
};

// Exact optimizer of the group-probability program for m <= kMaxLpGroups.
// m = 2 is solved in closed form; larger m by enumerating the vertices of the
// (m-1)-dimensional feasible polytope. Among revenue-optimal candidates the one
// with the smallest fairness gap is returned. Negative epsilon throws
// Infeasible (the smallest feasible epsilon is always 0).
std::vector<double> solve_group_lp(std::span<const double> winner_bids,
                                   std::span<const double> winner_prices, double epsilon);

// Fills the per-group winners from the statistics-side buyers in `stat_side`
// and solves the program. Throws ResampleNeeded if a group has no member there.
GroupProbabilities solve_group_probabilities(const BidProfile& bids,
                                             std::span<const std::size_t> stat_side,
                                             double epsilon);
// Treats every buyer of `stat_bids` as statistics side.
GroupProbabilities solve_group_probabilities(const BidProfile& stat_bids, double epsilon);

// One run on a fixed split; `group_draw` in [0,1) picks the group by inverse
// CDF. No sale when the drawn group has no auction-side member.
Outcome gpm_run_on_split(const BidProfile& bids, double epsilon, const BidderSplit& split,
                         double group_draw);

Outcome gpm_run(const BidProfile& bids, double epsilon, Rng& rng);

// Exact expected outcome given the split: the top auction-side bidder of group
// k wins with probability Pr_k and pays Pr_k times her in-group second price.
ExpectedOutcome gpm_conditional_expected(const BidProfile& bids, double epsilon,
                                         const BidderSplit& split);

enum class GpmEstimator {
  kRealized,          // average of realized runs
  kSplitConditional,  // average of gpm_conditional_expected over random splits
};

// Monte Carlo estimate over `trials` independent runs; trial t draws from a
// stream derived from one master seed taken from `rng` and t, so the estimate
// does not depend on evaluation order.
ExpectedOutcome gpm_expected(const BidProfile& bids, double epsilon, std::size_t trials,
                             Rng& rng, GpmEstimator estimator = GpmEstimator::kRealized);

}  // namespace fairauction

#endif  // FAIRAUCTION_GPM_HPP_
