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

#include "fairauction/gsm.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "fairauction/errors.hpp"
#include "oracles.hpp"

namespace fairauction {
namespace {

const ValuationSupport kSupport(0.0, 10.0);

GroupScoreFunction uniform_scores(std::size_t m, ScoreParams p,
                                  BaseTransform base = BaseTransform::kLinear,
                                  ValuationSupport support = kSupport) {
  return GroupScoreFunction(std::vector<ScoreParams>(m, p), base, support);
}

BuyerSet everyone(std::size_t n) {
  BuyerSet s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = i;
  return s;
}

GroupScoreFunction random_scores(std::size_t m, BaseTransform base, Rng& rng,
                                 ValuationSupport support = kSupport) {
  std::vector<ScoreParams> ps(m);
  for (auto& p : ps) {
    p = {rng.uniform(0.0, 2.0), rng.uniform(0.0, 2.0), rng.uniform(0.0, 2.0),
         rng.uniform(0.05, 2.0)};
  }
  return GroupScoreFunction(ps, base, support);
}

BidProfile random_profile(const std::vector<std::size_t>& sizes, Rng& rng) {
  std::vector<std::vector<double>> groups;
  for (std::size_t n : sizes) {
    std::vector<double> g(n);
    for (double& b : g) b = rng.uniform(0.0, 10.0);
    groups.push_back(g);
  }
  return BidProfile::from_groups(groups, kSupport);
}

// Pi_i(x) from scratch, with the other bids held fixed.
double direct_win_prob(const GroupScoreFunction& gsf, const BidProfile& bids,
                       const BuyerSet& side, std::size_t i, double x) {
  double own = 0.0, total = 0.0;
  for (std::size_t j : side) {
    const double b = j == i ? x : bids.bid(j);
    const double s = gsf.score(bids.group_of(j), b);
    total += s;
    if (j == i) own = s;
  }
  return own / total;
}

TEST(Transforms, NamesAndValues) {
  EXPECT_EQ(apply_transform(BaseTransform::kLinear, 3.0), 3.0);
  EXPECT_DOUBLE_EQ(apply_transform(BaseTransform::kLog1p, 3.0), std::log(4.0));
  EXPECT_EQ(apply_transform(BaseTransform::kSquare, 3.0), 9.0);
  EXPECT_DOUBLE_EQ(apply_transform(BaseTransform::kExp, 3.0), std::exp(3.0));
  for (BaseTransform b : kAllTransforms) EXPECT_EQ(parse_transform(transform_name(b)), b);
  EXPECT_EQ(parse_transform("log"), BaseTransform::kLog1p);
  EXPECT_THROW(parse_transform("cubic"), ContractViolation);
}

TEST(Score, Examples) {
  EXPECT_EQ(uniform_scores(1, {1, 1, 0, 0}).score(0, 5.0), 5.0);
  EXPECT_EQ(uniform_scores(1, {0, 3, 4, 2}).score(0, 7.0), 2.0);
  EXPECT_EQ(uniform_scores(1, {2, 1, 1, 0}, BaseTransform::kSquare).score(0, 3.0), 20.0);
  EXPECT_THROW(uniform_scores(1, {1, 1, 0, 0}).score(0, 11.0), ContractViolation);
  EXPECT_THROW(uniform_scores(1, {-1, 1, 0, 0}), ContractViolation);
}

TEST(Score, ExpBaseScalesWithoutOverflow) {
  const GroupScoreFunction gsf = uniform_scores(1, {1, 1, 0, 0}, BaseTransform::kExp,
                                                ValuationSupport(0.0, 1000.0));
  const BidProfile bids = BidProfile::from_groups({{999.0, 1000.0}}, ValuationSupport(0, 1000));
  const auto pi = individual_win_probs(gsf, bids);
  EXPECT_NEAR(pi[0], 1.0 / (1.0 + std::exp(1.0)), 1e-12);
  EXPECT_NEAR(pi[1], std::exp(1.0) / (1.0 + std::exp(1.0)), 1e-12);
}

TEST(WinProbs, Examples) {
  const auto constant = individual_win_probs(uniform_scores(2, {0, 0, 0, 1}),
                                             BidProfile::from_groups({{1, 2}, {3, 9}}, kSupport));
  for (double p : constant) EXPECT_DOUBLE_EQ(p, 0.25);

  const auto identity = individual_win_probs(uniform_scores(1, {1, 1, 0, 0}),
                                             BidProfile::from_groups({{2, 3, 5}}, kSupport));
  EXPECT_DOUBLE_EQ(identity[0], 0.2);
  EXPECT_DOUBLE_EQ(identity[1], 0.3);
  EXPECT_DOUBLE_EQ(identity[2], 0.5);

  // sigma_A = 2 sigma_B pointwise on the same bids.
  const GroupScoreFunction gsf({{2, 1, 1, 0.5}, {1, 1, 1, 0.25}}, BaseTransform::kLinear, kSupport);
  const auto pi = individual_win_probs(gsf, BidProfile::from_groups({{1, 4, 6}, {6, 1, 4}}, kSupport));
  EXPECT_NEAR(pi[0] + pi[1] + pi[2], 2.0 / 3, 1e-12);

  EXPECT_THROW(individual_win_probs(uniform_scores(1, {0, 0, 0, 0}),
                                    BidProfile::from_groups({{2, 3}}, kSupport)),
               DegenerateInput);
}

TEST(WinProbs, PositiveWhenOffsetsArePositive) {
  Rng rng(1);
  for (BaseTransform base : kAllTransforms) {
    for (int rep = 0; rep < 20; ++rep) {
      const GroupScoreFunction gsf = random_scores(2, base, rng);
      const BidProfile bids = random_profile({30, 30}, rng);
      double total = 0.0;
      for (double p : individual_win_probs(gsf, bids)) {
        EXPECT_GT(p, 0.0);
        total += p;
      }
      EXPECT_NEAR(total, 1.0, 1e-12);
    }
  }
}

TEST(WinProbs, MonotoneInOwnBid) {
  Rng rng(2);
  for (BaseTransform base : kAllTransforms) {
    for (int rep = 0; rep < 20; ++rep) {
      const GroupScoreFunction gsf = random_scores(2, base, rng);
      const BidProfile bids = random_profile({4, 5}, rng);
      const std::size_t i = rng.next() % bids.size();
      double last = -1.0;
      for (int j = 0; j <= 100; ++j) {
        const double p = individual_win_probs(gsf, bids.with_bid(i, 0.1 * j))[i];
        EXPECT_GE(p, last);
        last = p;
      }
    }
  }
}

TEST(Quadrature, SimpsonIsExactForCubics) {
  std::vector<double> x, w;
  simpson_rule(1.0, 3.0, 4, x, w);
  ASSERT_EQ(x.size(), 5u);
  double v = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) v += w[j] * x[j] * x[j] * x[j];
  EXPECT_NEAR(v, (81.0 - 1.0) / 4.0, 1e-12);
  const QuadratureSpec odd{QuadratureRule::kCompositeSimpson, 3, 1e-8};
  EXPECT_THROW(odd.validate(), ContractViolation);
}

TEST(Quadrature, IntegrateMeetsTolerance) {
  const IntegrationResult r =
      integrate([](double x) { return std::exp(-x) * std::sin(3 * x); }, 0.0, 4.0, {}, 1e-10);
  const double exact = (3.0 - std::exp(-4.0) * (std::sin(12.0) + 3.0 * std::cos(12.0))) / 10.0;
  EXPECT_NEAR(r.value, exact, 1e-9);
  EXPECT_LE(r.error_estimate, 1e-10);
}

TEST(MyersonPayment, AnalyticAllocations) {
  const QuadratureSpec q;
  EXPECT_NEAR(myerson_payment([](double) { return 0.3; }, 1.0, 7.0, q), 1.0, 1e-12);
  EXPECT_NEAR(myerson_payment([](double x) { return x / 20.0; }, 0.0, 7.0, q), 3.5, 1e-8);
  const double t = 3.3;
  const double bp[] = {t};
  EXPECT_NEAR(myerson_payment([t](double x) { return x >= t ? 1.0 : 0.0; }, 0.0, 8.0, q, bp), t,
              1e-8);
}

TEST(GsmPayment, Examples) {
  const QuadratureSpec q;
  const BidProfile bids = BidProfile::from_groups({{3, 6}}, ValuationSupport(1.0, 10.0));
  const auto constant = uniform_scores(1, {0, 1, 1, 1}, BaseTransform::kLinear, bids.support());
  EXPECT_NEAR(gsm_payment(1, bids, constant, q), 1.0, 1e-12);
}

TEST(GsmPayment, MatchesMidpointOracleAndBounds) {
  const QuadratureSpec q;
  Rng rng(3);
  for (BaseTransform base : kAllTransforms) {
    for (int rep = 0; rep < 10; ++rep) {
      const GroupScoreFunction gsf = random_scores(2, base, rng);
      const BidProfile bids = random_profile({3, 4}, rng);
      const BuyerSet side = everyone(bids.size());
      const std::size_t i = rng.next() % bids.size();
      const double b = bids.bid(i);
      const double pi = direct_win_prob(gsf, bids, side, i, b);
      const double integral = oracle::midpoint_integral(
          [&](double x) { return direct_win_prob(gsf, bids, side, i, x); }, 0.0, b, 20000);
      const double p = gsm_payment(i, bids, gsf, q);
      EXPECT_NEAR(p, b - integral / pi, 1e-6);
      EXPECT_GE(p, 0.0);
      EXPECT_LE(p, b);
      const auto pay = gsm_expected_payments(bids, gsf, q, side);
      EXPECT_NEAR(pay[i], pi * p, 1e-7);
    }
  }
}

TEST(GsmPayment, PanelDoublingIsStable) {
  Rng rng(4);
  for (BaseTransform base : kAllTransforms) {
    for (int rep = 0; rep < 10; ++rep) {
      const GroupScoreFunction gsf = random_scores(2, base, rng);
      const BidProfile bids = random_profile({5, 5}, rng);
      const std::size_t i = rng.next() % bids.size();
      QuadratureSpec coarse;
      QuadratureSpec fine;
      fine.panels = 2 * coarse.panels;
      EXPECT_LT(std::abs(gsm_payment(i, bids, gsf, coarse) - gsm_payment(i, bids, gsf, fine)),
                10 * coarse.abs_tol);
    }
  }
}

TEST(GsmRun, ConstantScoresSplitEvenly) {
  const BidProfile bids = BidProfile::from_groups({{2}, {8}}, kSupport);
  const GroupScoreFunction gsf = uniform_scores(2, {0, 0, 0, 1});
  const BuyerSet side = everyone(2);
  Rng rng(5);
  int first = 0;
  for (int r = 0; r < 4000; ++r) {
    const Outcome o = gsm_run_on_side(bids, gsf, side, rng, {});
    ASSERT_TRUE(o.winner());
    EXPECT_NEAR(o.price(), 0.0, 1e-12);
    first += *o.winner() == 0;
  }
  EXPECT_NEAR(first / 4000.0, 0.5, 3.0 * std::sqrt(0.25 / 4000));
}

TEST(GsmRun, ReproducibleWithSeed) {
  Rng gen(6);
  const GroupScoreFunction gsf = random_scores(2, BaseTransform::kLinear, gen);
  const BidProfile bids = random_profile({6, 6}, gen);
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng a(s), b(s);
    const Outcome x = gsm_run(bids, gsf, a), y = gsm_run(bids, gsf, b);
    EXPECT_EQ(x.winner(), y.winner());
    EXPECT_EQ(x.price(), y.price());
  }
}

TEST(GsmRun, FrequenciesMatchWinProbabilities) {
  Rng gen(7);
  const GroupScoreFunction gsf = random_scores(2, BaseTransform::kLinear, gen);
  const BidProfile bids = random_profile({50, 50}, gen);
  const BuyerSet side = everyone(bids.size());
  const auto pi = individual_win_probs(gsf, bids);
  std::vector<int> wins(bids.size(), 0);
  const int runs = 10000;
  Rng rng(8);
  for (int r = 0; r < runs; ++r) {
    const Outcome o = gsm_run_on_side(bids, gsf, side, rng, {});
    ASSERT_TRUE(o.winner());
    ++wins[*o.winner()];
  }
  double group_a = 0.0, pi_a = 0.0;
  for (std::size_t i = 0; i < bids.size(); ++i) {
    const double freq = static_cast<double>(wins[i]) / runs;
    const double se = std::sqrt(pi[i] * (1.0 - pi[i]) / runs);
    // Bonferroni over the 100 buyers: 3 se per buyer family-wise.
    EXPECT_LE(std::abs(freq - pi[i]), 4.2 * se) << i;
    if (bids.group_of(i) == 0) {
      group_a += freq;
      pi_a += pi[i];
    }
  }
  EXPECT_LE(std::abs(group_a - pi_a), 3.0 * std::sqrt(pi_a * (1.0 - pi_a) / runs));
}

TEST(GsmRun, TrainerSeesCoveringStatSide) {
  const BidProfile bids = BidProfile::from_groups({{1, 2, 3}, {4, 5, 6}}, kSupport);
  Rng rng(9);
  for (int r = 0; r < 20; ++r) {
    const ScoreTrainer trainer = [](const BidProfile& b, std::span<const std::size_t> stat) {
      std::vector<bool> covered(b.num_groups(), false);
      for (std::size_t i : stat) covered[b.group_of(i)] = true;
      for (bool c : covered) EXPECT_TRUE(c);
      return uniform_scores(b.num_groups(), {1, 1, 0, 1});
    };
    const Outcome o = gsm_run(bids, trainer, rng);
    if (o.winner()) {
      EXPECT_LE(o.price(), bids.bid(*o.winner()));
    }
  }
}

TEST(GsmExpected, AllAuctionEqualsWinProbabilities) {
  Rng gen(10);
  const GroupScoreFunction gsf = random_scores(2, BaseTransform::kSquare, gen);
  const BidProfile bids = random_profile({5, 7}, gen);
  const ExpectedOutcome e = gsm_expected(bids, gsf, {});
  EXPECT_EQ(e.win_prob, individual_win_probs(gsf, bids));
  double total = 0.0;
  for (double p : e.win_prob) total += p;
  EXPECT_NEAR(total, 1.0, 1e-12);
}

// Two buyers: the four splits are {}, {0}, {1}, {0, 1}, each with weight 1/4.
TEST(GsmExpected, EnumerationOfTwoBuyers) {
  const GroupScoreFunction gsf({{1, 1, 0, 0.5}, {2, 1, 0, 0.5}}, BaseTransform::kLinear,
                               kSupport);
  const BidProfile bids = BidProfile::from_groups({{4}, {3}}, kSupport);
  const ExpectedOutcome e = gsm_expected(bids, gsf, {}, {GsmSplitMode::kEnumerate});
  const double s0 = 4.5, s1 = 6.5;
  EXPECT_NEAR(e.win_prob[0], 0.25 + 0.25 * s0 / (s0 + s1), 1e-12);
  EXPECT_NEAR(e.win_prob[1], 0.25 + 0.25 * s1 / (s0 + s1), 1e-12);
  // Alone on the auction side, a buyer wins at any bid and pays the floor 0.
  const BuyerSet both = everyone(2);
  const double integral = oracle::midpoint_integral(
      [&](double x) { return direct_win_prob(gsf, bids, both, 0, x); }, 0.0, 4.0, 20000);
  EXPECT_NEAR(e.exp_payment[0], 0.25 * (4.0 * s0 / (s0 + s1) - integral), 1e-7);
}

TEST(GsmExpected, MonteCarloApproachesEnumeration) {
  Rng gen(11);
  const GroupScoreFunction gsf = random_scores(2, BaseTransform::kLog1p, gen);
  const BidProfile bids = random_profile({3, 3}, gen);
  const ExpectedOutcome exact = gsm_expected(bids, gsf, {}, {GsmSplitMode::kEnumerate});
  const ExpectedOutcome mc =
      gsm_expected(bids, gsf, {}, {GsmSplitMode::kMonteCarlo, 4000, 12});
  ASSERT_TRUE(mc.win_prob_stderr.has_value());
  for (std::size_t i = 0; i < bids.size(); ++i) {
    EXPECT_LE(std::abs(mc.win_prob[i] - exact.win_prob[i]), 4.0 * (*mc.win_prob_stderr)[i] + 1e-12);
  }
}

// Exact expected utilities over all splits: truth-telling is a best reply on
// a grid of misreports and never loses money.
TEST(GsmIncentives, TruthfulOnSmallProfiles) {
  Rng gen(13);
  for (BaseTransform base : kAllTransforms) {
    for (int rep = 0; rep < 4; ++rep) {
      const GroupScoreFunction gsf = random_scores(2, base, gen);
      const BidProfile bids = random_profile({2, 2}, gen);
      for (std::size_t i = 0; i < bids.size(); ++i) {
        const double v = bids.bid(i);
        const ExpectedOutcome t = gsm_expected(bids, gsf, {}, {GsmSplitMode::kEnumerate});
        const double truthful = v * t.win_prob[i] - t.exp_payment[i];
        EXPECT_GE(truthful, -1e-7);
        for (int j = 0; j <= 20; ++j) {
          const BidProfile dev = bids.with_bid(i, 0.5 * j);
          const ExpectedOutcome d = gsm_expected(dev, gsf, {}, {GsmSplitMode::kEnumerate});
          EXPECT_GE(truthful, v * d.win_prob[i] - d.exp_payment[i] - 1e-7);
        }
      }
    }
  }
}

}  // namespace
}  // namespace fairauction
