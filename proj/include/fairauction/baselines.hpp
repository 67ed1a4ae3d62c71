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

// Comparison anchors: the Vickrey (second-price) auction and the "simple"
// group lottery that is exactly 0-group-fair at the group-winner level but not
// incentive compatible.

#ifndef FAIRAUCTION_BASELINES_HPP_
#define FAIRAUCTION_BASELINES_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fairauction/core_model.hpp"
#include "fairauction/rng.hpp"

namespace fairauction {

enum class TieBreak { kLowestIndex, kRandom };

struct SecondPriceResult {
  std::size_t winner;
  double price;
};

// Second-price auction restricted to `candidates`. The price is the
// second-highest candidate bid, or `floor_price` when there is only one
// candidate. Returns nullopt for an empty candidate set. kRandom needs `rng`.
std::optional<SecondPriceResult> second_price_among(std::span<const double> bids,
                                                    std::span<const std::size_t> candidates,
                                                    double floor_price,
                                                    TieBreak tie_break = TieBreak::kLowestIndex,
                                                    Rng* rng = nullptr);

// Highest bidder wins and pays the second-highest bid; a lone bidder pays the
// support's lower bound.
Outcome second_price(const BidProfile& bids, TieBreak tie_break = TieBreak::kLowestIndex,
                     Rng* rng = nullptr);

// Deterministic, so the expectation is the outcome itself.
ExpectedOutcome second_price_expected(const BidProfile& bids);

struct SimpleMechConfig {
  std::uint64_t rng_seed = 0;
};

// Group lottery with Pr_k proportional to 1 / (group k's top bid), so that
// Pr_k * top_k is the same for every group and the probabilities sum to 1.
// Throws DegenerateInput when some group's top bid is 0.
std::vector<double> simple_group_probs(const BidProfile& bids);

// Second-price auction inside one chosen group.
Outcome simple_mechanism_in_group(const BidProfile& bids, std::size_t group);

// Draws a group from simple_group_probs, then runs second price inside it.
Outcome simple_mechanism(const BidProfile& bids, const SimpleMechConfig& cfg);
Outcome simple_mechanism(const BidProfile& bids, Rng& rng);

// Closed-form expected allocation and payment of the simple mechanism.
ExpectedOutcome simple_expected(const BidProfile& bids);

}  // namespace fairauction

#endif  // FAIRAUCTION_BASELINES_HPP_
