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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "fairauction/errors.hpp"
#include "fairauction/rng.hpp"

namespace fairauction {
namespace {

const ValuationSupport kSupport(0.0, 10.0);

BidProfile worked_profile() { return BidProfile::from_groups({{9, 8, 7}, {7, 3, 2}}, kSupport); }

TEST(SecondPrice, Examples) {
  const Outcome o = second_price(BidProfile::from_groups({{9, 8, 7, 7, 3, 2}}, kSupport));
  EXPECT_EQ(o.winner(), 0u);
  EXPECT_EQ(o.price(), 8.0);

  const Outcome lone = second_price(BidProfile::from_groups({{5}}, kSupport));
  EXPECT_EQ(lone.winner(), 0u);
  EXPECT_EQ(lone.price(), 0.0);
  const Outcome floor =
      second_price(BidProfile::from_groups({{5}}, ValuationSupport(1.5, 10.0)));
  EXPECT_EQ(floor.price(), 1.5);

  const Outcome tie = second_price(BidProfile::from_groups({{4, 4}}, kSupport));
  EXPECT_EQ(tie.winner(), 0u);
  EXPECT_EQ(tie.price(), 4.0);
}

TEST(SecondPrice, RandomTieBreakPicksAmongTopBidders) {
  const BidProfile p = BidProfile::from_groups({{4, 2, 4, 4}}, kSupport);
  Rng rng(3);
  int counts[4] = {0, 0, 0, 0};
  for (int r = 0; r < 3000; ++r) {
    const Outcome o = second_price(p, TieBreak::kRandom, &rng);
    ASSERT_TRUE(o.winner());
    EXPECT_EQ(o.price(), 4.0);
    ++counts[*o.winner()];
  }
  EXPECT_EQ(counts[1], 0);
  for (int i : {0, 2, 3}) EXPECT_NEAR(counts[i] / 3000.0, 1.0 / 3, 0.04);
}

TEST(SecondPrice, ExpectedMatchesOutcome) {
  const ExpectedOutcome e = second_price_expected(worked_profile());
  EXPECT_EQ(e.win_prob, (std::vector<double>{1, 0, 0, 0, 0, 0}));
  EXPECT_EQ(e.exp_payment, (std::vector<double>{8, 0, 0, 0, 0, 0}));
}

// Exhaustive over a bid grid: no single buyer gains by any misreport.
TEST(SecondPrice, TruthfulOnSmallGrid) {
  const std::vector<double> grid{0, 2.5, 5, 7.5, 10};
  for (double b0 : grid) {
    for (double b1 : grid) {
      for (double b2 : grid) {
        const BidProfile truth = BidProfile::from_groups({{b0, b1}, {b2}}, kSupport);
        const Outcome t = second_price(truth);
        const std::vector<double> theta(truth.bids().begin(), truth.bids().end());
        for (std::size_t i = 0; i < 3; ++i) {
          const double u = buyer_utility(t, theta, i);
          EXPECT_GE(u, 0.0);
          for (double dev : grid) {
            const Outcome d = second_price(truth.with_bid(i, dev));
            EXPECT_GE(u, buyer_utility(d, theta, i) - 1e-12);
          }
        }
      }
    }
  }
}

TEST(SimpleMechanism, WorkedExampleProbabilities) {
  const auto pr = simple_group_probs(worked_profile());
  ASSERT_EQ(pr.size(), 2u);
  EXPECT_NEAR(pr[0], 7.0 / 16, 1e-12);
  EXPECT_NEAR(pr[1], 9.0 / 16, 1e-12);

  const auto dev = simple_group_probs(worked_profile().with_bid(3, 6.0));
  EXPECT_NEAR(dev[0], 6.0 / 15, 1e-12);
  EXPECT_NEAR(dev[1], 9.0 / 15, 1e-12);

  EXPECT_EQ(simple_group_probs(BidProfile::from_groups({{3, 1}}, kSupport)),
            std::vector<double>{1.0});
}

TEST(SimpleMechanism, ZeroTopBidIsDegenerate) {
  EXPECT_THROW(simple_group_probs(BidProfile::from_groups({{3}, {0, 0}}, kSupport)),
               DegenerateInput);
}

TEST(SimpleMechanism, GroupProbabilityProperties) {
  Rng rng(9);
  for (int rep = 0; rep < 300; ++rep) {
    const std::size_t m = 1 + rng.next() % 5;
    std::vector<std::vector<double>> groups(m);
    for (auto& g : groups) {
      g.resize(1 + rng.next() % 4);
      for (double& b : g) b = rng.uniform(0.01, 10.0);
    }
    const BidProfile p = BidProfile::from_groups(groups, kSupport);
    const auto pr = simple_group_probs(p);
    double total = 0.0;
    double first = -1.0;
    for (std::size_t k = 0; k < m; ++k) {
      EXPECT_GE(pr[k], 0.0);
      EXPECT_LE(pr[k], 1.0);
      total += pr[k];
      const double top = *std::max_element(groups[k].begin(), groups[k].end());
      if (first < 0.0) first = pr[k] * top;
      EXPECT_NEAR(pr[k] * top, first, 1e-12 * (1.0 + first));
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(SimpleMechanism, ForcedGroupBRunsSecondPriceInside) {
  const Outcome o = simple_mechanism_in_group(worked_profile(), 1);
  EXPECT_EQ(o.winner(), 3u);
  EXPECT_EQ(o.price(), 3.0);
  const std::vector<double> theta{9, 8, 7, 7, 3, 2};
  EXPECT_EQ(buyer_utility(o, theta, 3), 4.0);
}

TEST(SimpleMechanism, SingleGroupIsSecondPrice) {
  const BidProfile p = BidProfile::from_groups({{2, 9, 4}}, kSupport);
  Rng rng(1);
  const Outcome o = simple_mechanism(p, rng);
  const Outcome sp = second_price(p);
  EXPECT_EQ(o.winner(), sp.winner());
  EXPECT_EQ(o.price(), sp.price());
}

TEST(SimpleMechanism, SeededConfigIsReproducible) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Outcome a = simple_mechanism(worked_profile(), SimpleMechConfig{s});
    const Outcome b = simple_mechanism(worked_profile(), SimpleMechConfig{s});
    EXPECT_EQ(a.winner(), b.winner());
  }
}

struct MeanSe {
  double mean, se;
};

MeanSe monte_carlo_utility(const BidProfile& reported, std::size_t buyer, double value,
                           std::size_t runs, std::uint64_t seed) {
  Rng rng(seed);
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t r = 0; r < runs; ++r) {
    const Outcome o = simple_mechanism(reported, rng);
    const double u = o.winner() == buyer ? value - o.price() : 0.0;
    sum += u;
    sum2 += u * u;
  }
  const double n = static_cast<double>(runs);
  const double mean = sum / n;
  return {mean, std::sqrt((sum2 / n - mean * mean) / (n - 1.0))};
}

TEST(SimpleMechanism, TruthfulUtilityOfBuyerD) {
  const ExpectedOutcome e = simple_expected(worked_profile());
  EXPECT_NEAR(7.0 * e.win_prob[3] - e.exp_payment[3], 9.0 / 4, 1e-12);
  const MeanSe mc = monte_carlo_utility(worked_profile(), 3, 7.0, 100000, 42);
  EXPECT_LE(std::abs(mc.mean - 9.0 / 4), 3.0 * mc.se);
}

// Misreporting 6 raises d's utility to (9/15)(7 - 3) = 36/15 > 9/4.
TEST(SimpleMechanism, NotIncentiveCompatible) {
  const BidProfile lie = worked_profile().with_bid(3, 6.0);
  const ExpectedOutcome e = simple_expected(lie);
  EXPECT_NEAR(7.0 * e.win_prob[3] - e.exp_payment[3], 36.0 / 15, 1e-12);
  const MeanSe mc = monte_carlo_utility(lie, 3, 7.0, 100000, 43);
  EXPECT_LE(std::abs(mc.mean - 36.0 / 15), 3.0 * mc.se);
  EXPECT_GT(mc.mean - 3.0 * mc.se, 9.0 / 4);
}

}  // namespace
}  // namespace fairauction
