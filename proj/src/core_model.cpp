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

#include "fairauction/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fairauction/errors.hpp"

namespace fairauction {

ValuationSupport::ValuationSupport(double lower, double upper) : lower_(lower), upper_(upper) {
  if (!std::isfinite(lower) || !std::isfinite(upper) || lower < 0.0 || !(lower < upper)) {
    throw ContractViolation("valuation support must satisfy 0 <= lower < upper, got [" +
                            std::to_string(lower) + ", " + std::to_string(upper) + "]");
  }
}

GroupPartition::GroupPartition(std::vector<std::size_t> group_of, std::size_t num_groups)
    : group_of_(std::move(group_of)), members_(num_groups) {
  if (num_groups == 0) throw ContractViolation("partition needs at least one group");
  for (std::size_t i = 0; i < group_of_.size(); ++i) {
    if (group_of_[i] >= num_groups) {
      throw ContractViolation("buyer " + std::to_string(i) + " assigned to group " +
                              std::to_string(group_of_[i]) + " of " + std::to_string(num_groups));
    }
    members_[group_of_[i]].push_back(i);
  }
  for (std::size_t k = 0; k < num_groups; ++k) {
    if (members_[k].empty()) {
      throw ContractViolation("group " + std::to_string(k + 1) + " has no members");
    }
  }
}

GroupPartition GroupPartition::from_sizes(std::span<const std::size_t> sizes) {
  std::vector<std::size_t> group_of;
  for (std::size_t k = 0; k < sizes.size(); ++k) group_of.insert(group_of.end(), sizes[k], k);
  return GroupPartition(std::move(group_of), sizes.size());
}

BidProfile::BidProfile(std::vector<double> bids, GroupPartition partition,
                       ValuationSupport support)
    : bids_(std::move(bids)), partition_(std::move(partition)), support_(support) {
  if (bids_.size() != partition_.num_buyers()) {
    throw ContractViolation("bid vector length " + std::to_string(bids_.size()) +
                            " does not match partition size " +
                            std::to_string(partition_.num_buyers()));
  }
  for (std::size_t i = 0; i < bids_.size(); ++i) {
    if (!support_.contains(bids_[i])) {
      throw ContractViolation("bid " + std::to_string(bids_[i]) + " of buyer " +
                              std::to_string(i) + " lies outside the support");
    }
  }
}

BidProfile BidProfile::from_groups(const std::vector<std::vector<double>>& groups,
                                   ValuationSupport support) {
  std::vector<double> bids;
  std::vector<std::size_t> sizes;
  for (const auto& g : groups) {
    bids.insert(bids.end(), g.begin(), g.end());
    sizes.push_back(g.size());
  }
  return BidProfile(std::move(bids), GroupPartition::from_sizes(sizes), support);
}

BidProfile BidProfile::with_bid(std::size_t buyer, double bid) const {
  std::vector<double> bids = bids_;
  bids.at(buyer) = bid;
  return BidProfile(std::move(bids), partition_, support_);
}

Outcome::Outcome(std::vector<std::uint8_t> allocation, std::vector<double> payments)
    : allocation_(std::move(allocation)), payments_(std::move(payments)) {
  if (allocation_.size() != payments_.size()) {
    throw ContractViolation("allocation and payment vectors differ in length");
  }
  for (std::size_t i = 0; i < allocation_.size(); ++i) {
    if (allocation_[i] > 1) throw ContractViolation("allocation entries must be 0 or 1");
    if (allocation_[i] == 1) {
      if (winner_) throw ContractViolation("outcome has more than one winner");
      winner_ = i;
      if (!(payments_[i] >= 0.0)) throw ContractViolation("winner payment must be >= 0");
    } else if (payments_[i] != 0.0) {
      throw ContractViolation("buyer " + std::to_string(i) + " pays without winning");
    }
  }
}

Outcome Outcome::no_sale(std::size_t n) {
  return Outcome(std::vector<std::uint8_t>(n, 0), std::vector<double>(n, 0.0));
}

Outcome Outcome::sale(std::size_t n, std::size_t winner, double price) {
  if (winner >= n) throw ContractViolation("winner index out of range");
  std::vector<std::uint8_t> allocation(n, 0);
  std::vector<double> payments(n, 0.0);
  allocation[winner] = 1;
  payments[winner] = price;
  return Outcome(std::move(allocation), std::move(payments));
}

void ExpectedOutcome::validate(double tol) const {
  if (win_prob.size() != exp_payment.size()) {
    throw ContractViolation("expected outcome vectors differ in length");
  }
  if (win_prob_stderr.has_value() != payment_stderr.has_value()) {
    throw ContractViolation("stderr must be given for both or neither vector");
  }
  double total = 0.0;
  for (double p : win_prob) {
    if (!(p >= -tol && p <= 1.0 + tol)) throw ContractViolation("win probability outside [0,1]");
    total += p;
  }
  if (total > 1.0 + tol) throw ContractViolation("win probabilities sum above 1");
}

namespace {

void require_same_length(std::size_t a, std::size_t b) {
  if (a != b) {
    throw ContractViolation("length mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

}  // namespace

double social_welfare(const Outcome& outcome, std::span<const double> valuations) {
  require_same_length(outcome.size(), valuations.size());
  const auto w = outcome.winner();
  return w ? valuations[*w] : 0.0;
}

double revenue(const Outcome& outcome) {
  double total = 0.0;
  for (double p : outcome.payments()) total += p;
  return total;
}

double buyer_utility(const Outcome& outcome, std::span<const double> valuations,
                     std::size_t buyer) {
  require_same_length(outcome.size(), valuations.size());
  return valuations[buyer] * outcome.allocation()[buyer] - outcome.payments()[buyer];
}

double expected_social_welfare(const ExpectedOutcome& expected,
                               std::span<const double> valuations) {
  require_same_length(expected.size(), valuations.size());
  double total = 0.0;
  for (std::size_t i = 0; i < valuations.size(); ++i) total += expected.win_prob[i] * valuations[i];
  return total;
}

double expected_revenue(const ExpectedOutcome& expected) {
  double total = 0.0;
  for (double p : expected.exp_payment) total += p;
  return total;
}

std::vector<double> group_welfares(const ExpectedOutcome& expected,
                                   std::span<const double> valuations,
                                   const GroupPartition& partition) {
  require_same_length(expected.size(), valuations.size());
  require_same_length(expected.size(), partition.num_buyers());
  std::vector<double> sw(partition.num_groups(), 0.0);
  for (std::size_t i = 0; i < valuations.size(); ++i) {
    sw[partition.group_of(i)] += expected.win_prob[i] * valuations[i];
  }
  return sw;
}

double group_fairness_gap(std::span<const double> group_welfares) {
  if (group_welfares.empty()) throw ContractViolation("fairness gap needs at least one group");
  const auto [lo, hi] = std::minmax_element(group_welfares.begin(), group_welfares.end());
  return *hi - *lo;
}

double individual_fairness(const ExpectedOutcome& expected, std::span<const double> valuations,
                           const GroupPartition& partition) {
  require_same_length(expected.size(), valuations.size());
  require_same_length(expected.size(), partition.num_buyers());
  double worst = 0.0;
  for (std::size_t k = 0; k < partition.num_groups(); ++k) {
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (std::size_t i : partition.members(k)) {
      const double gain = valuations[i] * expected.win_prob[i];
      if (first) {
        lo = hi = gain;
        first = false;
      } else {
        lo = std::min(lo, gain);
        hi = std::max(hi, gain);
      }
    }
    worst = std::max(worst, hi - lo);
  }
  return worst;
}

}  // namespace fairauction
