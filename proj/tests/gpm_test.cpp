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

#include "fairauction/gpm.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "fairauction/baselines.hpp"
#include "fairauction/errors.hpp"
#include "oracles.hpp"

namespace fairauction {
namespace {

const ValuationSupport kSupport(0.0, 10.0);

TEST(SplitBidders, Basics) {
  Rng rng(1);
  const BidderSplit empty = split_bidders(0, rng);
  EXPECT_TRUE(empty.stat.empty());
  EXPECT_TRUE(empty.auction_side.empty());

  Rng a(77), b(77);
  const BidderSplit sa = split_bidders(50, a), sb = split_bidders(50, b);
  EXPECT_EQ(sa.stat, sb.stat);
  EXPECT_EQ(sa.auction_side, sb.auction_side);
  EXPECT_EQ(sa.stat.size() + sa.auction_side.size(), 50u);
  std::vector<std::size_t> all = sa.stat;
  all.insert(all.end(), sa.auction_side.begin(), sa.auction_side.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i], i);

  Rng big(5);
  const BidderSplit s = split_bidders(100000, big);
  const double share = static_cast<double>(s.stat.size()) / 100000.0;
  EXPECT_GE(share, 0.49);
  EXPECT_LE(share, 0.51);
}

TEST(SplitCoveringGroups, GivesUpOnImpossibleCoverage) {
  // One buyer per group: an attempt covers all 16 groups with probability
  // 2^-16, so 32 attempts all fail.
  const GroupPartition p({0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15}, 16);
  Rng rng(3);
  EXPECT_THROW(split_covering_groups(p, rng), ResampleNeeded);
}

TEST(SolveGroupLp, WorkedExampleInstances) {
  const std::vector<double> t{9, 7}, p{8, 3};
  const auto exact = solve_group_lp(t, p, 0.0);
  EXPECT_NEAR(exact[0], 7.0 / 16, 1e-12);
  EXPECT_NEAR(exact[1], 9.0 / 16, 1e-12);

  const auto loose = solve_group_lp(t, p, 100.0);
  EXPECT_NEAR(loose[0], 1.0, 1e-12);
  EXPECT_NEAR(loose[1], 0.0, 1e-12);

  const auto mid = solve_group_lp(t, p, 1.0);
  EXPECT_NEAR(mid[0], 0.5, 1e-12);
  EXPECT_NEAR(mid[1], 0.5, 1e-12);
  const auto grid = oracle::lp_grid_search(t, p, 1.0);
  EXPECT_NEAR(oracle::lp_objective(mid, p), grid.objective, 1e-9);
}

TEST(SolveGroupLp, NegativeEpsilonIsInfeasible) {
  const std::vector<double> t{9, 7}, p{8, 3};
  try {
    solve_group_lp(t, p, -0.5);
    FAIL() << "expected Infeasible";
  } catch (const Infeasible& e) {
    EXPECT_EQ(e.min_epsilon(), 0.0);
  }
}

TEST(SolveGroupLp, SingleGroupTakesEverything) {
  EXPECT_EQ(solve_group_lp(std::vector<double>{4}, std::vector<double>{1}, 0.0),
            std::vector<double>{1.0});
}

TEST(SolveGroupLp, MatchesGridOracle) {
  Rng rng(11);
  for (int rep = 0; rep < 120; ++rep) {
    const std::size_t m = 2 + rng.next() % 2;
    std::vector<double> t(m), p(m);
    for (std::size_t k = 0; k < m; ++k) {
      t[k] = rng.uniform(0.1, 10.0);
      p[k] = rng.uniform(0.0, t[k]);
    }
    const double eps = rng.uniform(0.0, 4.0);
    const auto probs = solve_group_lp(t, p, eps);
    double total = 0.0;
    for (double x : probs) {
      EXPECT_GE(x, -1e-12);
      EXPECT_LE(x, 1.0 + 1e-12);
      total += x;
    }
    EXPECT_NEAR(total, 1.0, 1e-9);
    EXPECT_LE(oracle::lp_gap(probs, t), eps + 1e-9);
    const auto grid = oracle::lp_grid_search(t, p, eps, m == 2 ? 1000 : 400);
    if (grid.found) {
      EXPECT_GE(oracle::lp_objective(probs, p), grid.objective - 1e-9);
    }
  }
}

TEST(SolveGroupLp, UpToSixGroupsStayFeasible) {
  Rng rng(12);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t m = 4 + rng.next() % 3;
    std::vector<double> t(m), p(m);
    for (std::size_t k = 0; k < m; ++k) {
      t[k] = rng.uniform(0.1, 10.0);
      p[k] = rng.uniform(0.0, t[k]);
    }
    const double eps = rng.uniform(0.0, 3.0);
    const auto probs = solve_group_lp(t, p, eps);
    double total = 0.0;
    for (double x : probs) total += x;
    EXPECT_NEAR(total, 1.0, 1e-9);
    EXPECT_LE(oracle::lp_gap(probs, t), eps + 1e-9);
    // Random feasible points never beat the solver.
    for (int probe = 0; probe < 2000; ++probe) {
      std::vector<double> q(m);
      double s = 0.0;
      for (double& x : q) s += (x = -std::log(1.0 - rng.uniform()));
      for (double& x : q) x /= s;
      if (oracle::lp_gap(q, t) <= eps) {
        EXPECT_GE(oracle::lp_objective(probs, p), oracle::lp_objective(q, p) - 1e-9);
      }
    }
  }
  EXPECT_THROW(solve_group_lp(std::vector<double>(7, 1.0), std::vector<double>(7, 0.5), 1.0),
               ContractViolation);
}

TEST(SolveGroupProbabilities, WinnersAndPricesFromStatSide) {
  const BidProfile bids = BidProfile::from_groups({{9, 8, 7}, {7, 3, 2}, {4}}, kSupport);
  const GroupProbabilities gp = solve_group_probabilities(bids, 0.0);
  EXPECT_EQ(gp.winners, (std::vector<std::size_t>{0, 3, 6}));
  EXPECT_EQ(gp.winner_bids, (std::vector<double>{9, 7, 4}));
  EXPECT_EQ(gp.winner_prices, (std::vector<double>{8, 3, 0}));

  const std::vector<std::size_t> stat{1, 2, 3};
  EXPECT_THROW(solve_group_probabilities(bids, stat, 0.0), ResampleNeeded);
}

// Two copies of the profile: the first copy is the statistics side.
TEST(GpmRun, ForcedSplitAndDraw) {
  const BidProfile bids =
      BidProfile::from_groups({{9, 8, 7, 9, 8, 7}, {7, 3, 2, 7, 3, 2}}, kSupport);
  const BidderSplit split{{0, 1, 2, 6, 7, 8}, {3, 4, 5, 9, 10, 11}};
  const Outcome a = gpm_run_on_split(bids, 0.0, split, 0.0);
  EXPECT_EQ(a.winner(), 3u);
  EXPECT_EQ(a.price(), 8.0);
  const Outcome b = gpm_run_on_split(bids, 0.0, split, 0.99);
  EXPECT_EQ(b.winner(), 9u);
  EXPECT_EQ(b.price(), 3.0);

  // Group B has nobody on the auction side.
  const BidderSplit lopsided{{0, 6, 7, 8, 9, 10, 11}, {1, 2, 3, 4, 5}};
  const Outcome none = gpm_run_on_split(bids, 0.0, lopsided, 0.99);
  EXPECT_FALSE(none.winner());
  EXPECT_EQ(revenue(none), 0.0);
}

TEST(GpmRun, SingleGroupIsSecondPriceOnAuctionSide) {
  Rng rng(4);
  std::vector<double> g(12);
  for (double& b : g) b = rng.uniform(0.0, 10.0);
  const BidProfile bids = BidProfile::from_groups({g}, kSupport);
  for (std::uint64_t s = 0; s < 50; ++s) {
    Rng r1(s), r2(s);
    const Outcome o = gpm_run(bids, 0.5, r1);
    const BidderSplit split = split_covering_groups(bids.partition(), r2);
    const auto sp = second_price_among(bids.bids(), split.auction_side, 0.0);
    ASSERT_EQ(o.winner().has_value(), sp.has_value());
    if (sp) {
      EXPECT_EQ(*o.winner(), sp->winner);
      EXPECT_EQ(o.price(), sp->price);
    }
  }
}

TEST(GpmRun, ReproducibleWithSeed) {
  const BidProfile bids = BidProfile::from_groups({{9, 8, 7, 1}, {7, 3, 2, 5}}, kSupport);
  for (std::uint64_t s = 0; s < 30; ++s) {
    Rng a(s), b(s);
    const Outcome x = gpm_run(bids, 0.3, a), y = gpm_run(bids, 0.3, b);
    EXPECT_EQ(x.winner(), y.winner());
    EXPECT_EQ(x.price(), y.price());
  }
}

// Raising one's own bid with every seed fixed never loses the item.
TEST(GpmRun, MonotoneRealizedAllocation) {
  Rng gen(8);
  for (int rep = 0; rep < 40; ++rep) {
    std::vector<std::vector<double>> groups(2, std::vector<double>(6));
    for (auto& g : groups) {
      for (double& b : g) b = gen.uniform(0.0, 10.0);
    }
    const BidProfile bids = BidProfile::from_groups(groups, kSupport);
    const std::size_t i = gen.next() % bids.size();
    const std::uint64_t seed = gen.next();
    int last = 0;
    for (int step = 0; step <= 50; ++step) {
      Rng rng(seed);
      const Outcome o = gpm_run(bids.with_bid(i, 0.2 * step), 0.5, rng);
      const int won = o.winner() == i ? 1 : 0;
      EXPECT_GE(won, last);
      last = won;
    }
  }
}

// Conditional on the split, a buyer's allocation is a step in her own bid and
// her payment equals bid * Pi - integral of Pi.
TEST(GpmConditional, PaymentIdentity) {
  Rng gen(21);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<std::vector<double>> groups(2, std::vector<double>(5));
    for (auto& g : groups) {
      for (double& b : g) b = gen.uniform(0.0, 10.0);
    }
    const BidProfile bids = BidProfile::from_groups(groups, kSupport);
    const BidderSplit split = split_covering_groups(bids.partition(), gen);
    if (split.auction_side.empty()) continue;
    const std::size_t i = split.auction_side[gen.next() % split.auction_side.size()];
    const double eps = gen.uniform(0.0, 2.0);
    auto pi = [&](double x) {
      return gpm_conditional_expected(bids.with_bid(i, x), eps, split).win_prob[i];
    };
    const ExpectedOutcome e = gpm_conditional_expected(bids, eps, split);
    const double b = bids.bid(i);
    const double integral = oracle::midpoint_integral(pi, 0.0, b, 20000);
    EXPECT_NEAR(e.exp_payment[i], b * e.win_prob[i] - integral, 2e-3);
  }
}

TEST(GpmExpected, SingleTrialIsOneRealization) {
  const BidProfile bids = BidProfile::from_groups({{9, 8, 7, 1}, {7, 3, 2, 5}}, kSupport);
  Rng rng(5);
  const ExpectedOutcome e = gpm_expected(bids, 0.5, 1, rng);
  double total = 0.0;
  for (double p : e.win_prob) {
    EXPECT_TRUE(p == 0.0 || p == 1.0);
    total += p;
  }
  EXPECT_LE(total, 1.0);
  EXPECT_THROW(gpm_expected(bids, 0.5, 0, rng), ContractViolation);
}

TEST(GpmExpected, ReportsStandardErrors) {
  const BidProfile bids = BidProfile::from_groups({{9, 8, 7, 1}, {7, 3, 2, 5}}, kSupport);
  for (GpmEstimator est : {GpmEstimator::kRealized, GpmEstimator::kSplitConditional}) {
    Rng rng(6);
    const ExpectedOutcome e = gpm_expected(bids, 0.5, 400, rng, est);
    ASSERT_TRUE(e.win_prob_stderr.has_value());
    ASSERT_TRUE(e.payment_stderr.has_value());
    EXPECT_NO_THROW(e.validate());
  }
}

// The example profile with each group repeated 500 times: at epsilon 0 the
// two groups' expected welfare coincide.
TEST(GpmExpected, LargeProfileIsGroupFair) {
  std::vector<std::vector<double>> groups(2);
  for (int r = 0; r < 500; ++r) {
    groups[0].insert(groups[0].end(), {9, 8, 7});
    groups[1].insert(groups[1].end(), {7, 3, 2});
  }
  const BidProfile bids = BidProfile::from_groups(groups, kSupport);
  std::vector<double> diff;
  for (std::size_t t = 0; t < 2000; ++t) {
    Rng rng(derive_seed(99, {t}));
    const Outcome o = gpm_run(bids, 0.0, rng);
    const double sw = social_welfare(o, bids.bids());
    diff.push_back(o.winner() && bids.group_of(*o.winner()) == 0 ? sw : -sw);
  }
  const oracle::Moments d = oracle::moments(diff);
  EXPECT_LE(std::abs(d.mean), 3.0 * d.se);
}

}  // namespace
}  // namespace fairauction
