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

// Domain types for single-item auctions with grouped buyers, and the welfare,
// revenue and fairness metrics every mechanism is judged by.
//
// Buyers are indexed 0..n-1 and groups 0..m-1. Reports and files present
// groups as 1..m.

#ifndef FAIRAUCTION_CORE_MODEL_HPP_
#define FAIRAUCTION_CORE_MODEL_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace fairauction {

using BuyerSet = std::vector<std::size_t>;

// Publicly known valuation range [lower, upper].
class ValuationSupport {
 public:
  ValuationSupport(double lower, double upper);

  double lower() const noexcept { return lower_; }
  double upper() const noexcept { return upper_; }
  bool contains(double x) const noexcept { return x >= lower_ && x <= upper_; }

  friend bool operator==(const ValuationSupport&, const ValuationSupport&) = default;

 private:
  double lower_;
  double upper_;
};

// Disjoint, covering assignment of buyers to m groups; every group nonempty.
class GroupPartition {
 public:
  GroupPartition(std::vector<std::size_t> group_of, std::size_t num_groups);

  // Buyers 0..sizes[0]-1 form group 0, the next sizes[1] group 1, and so on.
  static GroupPartition from_sizes(std::span<const std::size_t> sizes);

  std::size_t num_buyers() const noexcept { return group_of_.size(); }
  std::size_t num_groups() const noexcept { return members_.size(); }
  std::size_t group_of(std::size_t buyer) const { return group_of_.at(buyer); }
  std::span<const std::size_t> groups() const noexcept { return group_of_; }
  const BuyerSet& members(std::size_t group) const { return members_.at(group); }

 private:
  std::vector<std::size_t> group_of_;
  std::vector<BuyerSet> members_;
};

// Bids (or true valuations; same shape) with group membership and support.
class BidProfile {
 public:
  BidProfile(std::vector<double> bids, GroupPartition partition, ValuationSupport support);

  static BidProfile from_groups(const std::vector<std::vector<double>>& groups,
                                ValuationSupport support);

  std::size_t size() const noexcept { return bids_.size(); }
  std::size_t num_groups() const noexcept { return partition_.num_groups(); }
  std::span<const double> bids() const noexcept { return bids_; }
  double bid(std::size_t buyer) const { return bids_.at(buyer); }
  std::size_t group_of(std::size_t buyer) const { return partition_.group_of(buyer); }
  const GroupPartition& partition() const noexcept { return partition_; }
  const ValuationSupport& support() const noexcept { return support_; }

  // Same profile with one buyer's bid replaced.
  BidProfile with_bid(std::size_t buyer, double bid) const;

 private:
  std::vector<double> bids_;
  GroupPartition partition_;
  ValuationSupport support_;
};

// One realized allocation and payment vector. At most one winner; losers pay 0.
class Outcome {
 public:
  Outcome(std::vector<std::uint8_t> allocation, std::vector<double> payments);

  static Outcome no_sale(std::size_t n);
  static Outcome sale(std::size_t n, std::size_t winner, double price);

  std::size_t size() const noexcept { return allocation_.size(); }
  std::optional<std::size_t> winner() const noexcept { return winner_; }
  // Winner's payment; 0 when nothing is sold.
  double price() const noexcept { return winner_ ? payments_[*winner_] : 0.0; }
  std::span<const std::uint8_t> allocation() const noexcept { return allocation_; }
  std::span<const double> payments() const noexcept { return payments_; }

 private:
  std::vector<std::uint8_t> allocation_;
  std::vector<double> payments_;
  std::optional<std::size_t> winner_;
};

// Per-buyer expected allocation and payment, exact or Monte Carlo estimated.
// The stderr vectors are present iff the numbers came from an estimator.
struct ExpectedOutcome {
  std::vector<double> win_prob;
  std::vector<double> exp_payment;
  std::optional<std::vector<double>> win_prob_stderr;
  std::optional<std::vector<double>> payment_stderr;

  std::size_t size() const noexcept { return win_prob.size(); }
  // Throws ContractViolation when a probability leaves [0,1] or they sum past 1.
  void validate(double tol = 1e-9) const;
};

double social_welfare(const Outcome& outcome, std::span<const double> valuations);
double revenue(const Outcome& outcome);
// theta_i * pi_i - p_i.
double buyer_utility(const Outcome& outcome, std::span<const double> valuations,
                     std::size_t buyer);

double expected_social_welfare(const ExpectedOutcome& expected,
                               std::span<const double> valuations);
double expected_revenue(const ExpectedOutcome& expected);

// Entry k is sum over group k of win_prob_i * valuation_i.
std::vector<double> group_welfares(const ExpectedOutcome& expected,
                                   std::span<const double> valuations,
                                   const GroupPartition& partition);

// Largest pairwise |SW_k - SW_l|; 0 for a single group.
double group_fairness_gap(std::span<const double> group_welfares);

// Largest within-group spread of expected gains valuation_i * win_prob_i,
// maximized over groups.
double individual_fairness(const ExpectedOutcome& expected, std::span<const double> valuations,
                           const GroupPartition& partition);

}  // namespace fairauction

#endif  // FAIRAUCTION_CORE_MODEL_HPP_
