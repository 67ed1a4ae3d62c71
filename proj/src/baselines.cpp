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

#include "fairauction/baselines.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "fairauction/errors.hpp"

namespace fairauction {

std::optional<SecondPriceResult> second_price_among(std::span<const double> bids,
                                                    std::span<const std::size_t> candidates,
                                                    double floor_price, TieBreak tie_break,
                                                    Rng* rng) {
  if (candidates.empty()) return std::nullopt;
  if (tie_break == TieBreak::kRandom && rng == nullptr) {
    throw ContractViolation("random tie-breaking needs an rng");
  }
  std::size_t best = candidates[0];
  std::size_t ties = 1;
  double second = floor_price;
  bool have_second = false;
  for (std::size_t c = 1; c < candidates.size(); ++c) {
    const std::size_t i = candidates[c];
    const double b = bids[i];
    if (b > bids[best]) {
      second = bids[best];
      have_second = true;
      best = i;
      ties = 1;
    } else {
      if (!have_second || b > second) second = b;
      have_second = true;
      if (b == bids[best]) {
        ++ties;
        // Reservoir pick keeps each tied bidder equally likely.
        if (tie_break == TieBreak::kRandom && rng->uniform() * static_cast<double>(ties) < 1.0) {
          best = i;
        } else if (tie_break == TieBreak::kLowestIndex && i < best) {
          best = i;
        }
      }
    }
  }
  return SecondPriceResult{best, have_second ? second : floor_price};
}

Outcome second_price(const BidProfile& bids, TieBreak tie_break, Rng* rng) {
  if (bids.size() == 0) throw ContractViolation("second price needs at least one bidder");
  std::vector<std::size_t> all(bids.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  const auto r = second_price_among(bids.bids(), all, bids.support().lower(), tie_break, rng);
  return Outcome::sale(bids.size(), r->winner, r->price);
}

ExpectedOutcome second_price_expected(const BidProfile& bids) {
  const Outcome o = second_price(bids);
  ExpectedOutcome e;
  e.win_prob.assign(o.allocation().begin(), o.allocation().end());
  e.exp_payment.assign(o.payments().begin(), o.payments().end());
  return e;
}

std::vector<double> simple_group_probs(const BidProfile& bids) {
  const GroupPartition& part = bids.partition();
  const std::size_t m = part.num_groups();
  std::vector<double> inv_top(m);
  for (std::size_t k = 0; k < m; ++k) {
    double top = 0.0;
    for (std::size_t i : part.members(k)) top = std::max(top, bids.bid(i));
    if (top <= 0.0) {
      throw DegenerateInput("group " + std::to_string(k + 1) +
                            " has top bid 0; the simple mechanism is undefined");
    }
    inv_top[k] = 1.0 / top;
  }
  const double total = std::accumulate(inv_top.begin(), inv_top.end(), 0.0);
  std::vector<double> probs(m);
  for (std::size_t k = 0; k < m; ++k) probs[k] = inv_top[k] / total;
  return probs;
}

Outcome simple_mechanism_in_group(const BidProfile& bids, std::size_t group) {
  const auto r = second_price_among(bids.bids(), bids.partition().members(group),
                                    bids.support().lower());
  return Outcome::sale(bids.size(), r->winner, r->price);
}

Outcome simple_mechanism(const BidProfile& bids, Rng& rng) {
  const std::vector<double> probs = simple_group_probs(bids);
  return simple_mechanism_in_group(bids, sample_categorical(probs, rng.uniform()));
}

Outcome simple_mechanism(const BidProfile& bids, const SimpleMechConfig& cfg) {
  Rng rng(cfg.rng_seed);
  return simple_mechanism(bids, rng);
}

ExpectedOutcome simple_expected(const BidProfile& bids) {
  const std::vector<double> probs = simple_group_probs(bids);
  ExpectedOutcome e;
  e.win_prob.assign(bids.size(), 0.0);
  e.exp_payment.assign(bids.size(), 0.0);
  for (std::size_t k = 0; k < probs.size(); ++k) {
    const auto r = second_price_among(bids.bids(), bids.partition().members(k),
                                      bids.support().lower());
    e.win_prob[r->winner] += probs[k];
    e.exp_payment[r->winner] += probs[k] * r->price;
  }
  return e;
}

}  // namespace fairauction
