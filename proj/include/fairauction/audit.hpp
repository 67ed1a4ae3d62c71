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

// Statistical audits of incentive compatibility.
//
// A buyer's utility is estimated by averaging her expected utility conditional
// on the mechanism's randomness (the bidder split) over many draws. Truthful
// and deviating reports reuse the same draws, so the reported standard error
// is that of the paired difference.

#ifndef FAIRAUCTION_AUDIT_HPP_
#define FAIRAUCTION_AUDIT_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "fairauction/core_model.hpp"
#include "fairauction/gsm.hpp"
#include "fairauction/rng.hpp"
#include "fairauction/sim_harness.hpp"

namespace fairauction {

struct BuyerTerms {
  double win_prob = 0.0;
  double payment = 0.0;  // expected payment
};

// Win probability and expected payment of `buyer`, conditional on whatever
// randomness the mechanism draws from `rng`.
using BuyerTermsFn = std::function<BuyerTerms(const BidProfile&, std::size_t buyer, Rng&)>;

BuyerTermsFn second_price_terms();
BuyerTermsFn simple_terms();
BuyerTermsFn gpm_terms(double epsilon);
BuyerTermsFn gsm_terms(GroupScoreFunction gsf, QuadratureSpec quad = {});

// Split-conditional expected outcome for a fixed split, for gap estimates.
ConditionalOutcome conditional_outcome(Mechanism mechanism, const BidProfile& bids,
                                       double epsilon, const GroupScoreFunction* gsf,
                                       const QuadratureSpec& quad = {});

struct IcProbe {
  std::size_t buyer = 0;
  double value = 0.0;
  double truthful_utility = 0.0;
  double truthful_se = 0.0;
  double max_gain = 0.0;  // largest mean gain over the deviation grid
  double gain_se = 0.0;   // paired standard error at that deviation
  double worst_bid = 0.0;
  bool violation = false;
  bool ir_violation = false;
};

struct IcReport {
  std::vector<IcProbe> probes;
  double z = 3.0;
  bool violation = false;  // any IC or IR violation
};

// A deviation is a violation when its mean gain exceeds z * se + tol; `tol`
// absorbs quadrature error in payments. Truthful utility below
// -(z * se + tol) is an individual-rationality violation.
IcReport verify_ic(const BidProfile& bids, const BuyerTermsFn& terms,
                   std::span<const std::size_t> buyers, std::span<const double> deviations,
                   std::size_t trials, std::uint64_t seed, double z, double tol = 1e-6);

// One-sided standard normal quantile: z with P(Z > z) = alpha.
double z_for_alpha(double alpha);

// `count` evenly spaced reports over the support, both ends included.
std::vector<double> deviation_grid(const ValuationSupport& support, std::size_t count);

}  // namespace fairauction

#endif  // FAIRAUCTION_AUDIT_HPP_
