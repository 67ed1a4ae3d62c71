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

#include "fairauction/audit.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <limits>

#include "fairauction/baselines.hpp"
#include "fairauction/errors.hpp"
#include "fairauction/gpm.hpp"

namespace fairauction {

BuyerTermsFn second_price_terms() {
  return [](const BidProfile& bids, std::size_t buyer, Rng&) {
    const ExpectedOutcome e = second_price_expected(bids);
    return BuyerTerms{e.win_prob[buyer], e.exp_payment[buyer]};
  };
}

BuyerTermsFn simple_terms() {
  return [](const BidProfile& bids, std::size_t buyer, Rng&) {
    const ExpectedOutcome e = simple_expected(bids);
    return BuyerTerms{e.win_prob[buyer], e.exp_payment[buyer]};
  };
}

BuyerTermsFn gpm_terms(double epsilon) {
  return [epsilon](const BidProfile& bids, std::size_t buyer, Rng& rng) {
    const BidderSplit split = split_covering_groups(bids.partition(), rng);
    const ExpectedOutcome e = gpm_conditional_expected(bids, epsilon, split);
    return BuyerTerms{e.win_prob[buyer], e.exp_payment[buyer]};
  };
}

BuyerTermsFn gsm_terms(GroupScoreFunction gsf, QuadratureSpec quad) {
  return [gsf = std::move(gsf), quad](const BidProfile& bids, std::size_t buyer, Rng& rng) {
    const BidderSplit split = split_bidders(bids.size(), rng);
    const auto& side = split.auction_side;
    const auto it = std::find(side.begin(), side.end(), buyer);
    if (it == side.end()) return BuyerTerms{};
    const std::vector<double> pi = individual_win_probs(gsf, bids, side);
    const double p = pi[static_cast<std::size_t>(it - side.begin())];
    if (!(p > 0.0)) return BuyerTerms{};
    return BuyerTerms{p, p * gsm_payment(buyer, bids, gsf, quad, side)};
  };
}

ConditionalOutcome conditional_outcome(Mechanism mechanism, const BidProfile& bids,
                                       double epsilon, const GroupScoreFunction* gsf,
                                       const QuadratureSpec& quad) {
  switch (mechanism) {
    case Mechanism::kSecondPrice: {
      const ExpectedOutcome e = second_price_expected(bids);
      return [e](const BidderSplit&) { return e; };
    }
    case Mechanism::kSimple: {
      const ExpectedOutcome e = simple_expected(bids);
      return [e](const BidderSplit&) { return e; };
    }
    case Mechanism::kGpm:
      return [&bids, epsilon](const BidderSplit& split) {
        return gpm_conditional_expected(bids, epsilon, split);
      };
    case Mechanism::kGsm:
      if (gsf == nullptr) throw ContractViolation("gsm needs score functions");
      return [&bids, gsf, quad](const BidderSplit& split) {
        return gsm_conditional_expected(bids, *gsf, split.auction_side, quad);
      };
  }
  throw ContractViolation("unknown mechanism");
}

namespace {

MeanSe paired_stats(const std::vector<double>& xs) {
  MeanSe r;
  double sum = 0.0;
  for (double x : xs) sum += x;
  r.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - r.mean) * (x - r.mean);
    r.se = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
  }
  return r;
}

}  // namespace

IcReport verify_ic(const BidProfile& bids, const BuyerTermsFn& terms,
                   std::span<const std::size_t> buyers, std::span<const double> deviations,
                   std::size_t trials, std::uint64_t seed, double z, double tol) {
  if (trials == 0) throw ContractViolation("IC audit needs at least one trial");
  if (deviations.empty()) throw ContractViolation("IC audit needs a deviation grid");
  for (double b : deviations) {
    if (!bids.support().contains(b)) {
      throw ContractViolation("deviation " + std::to_string(b) + " lies outside the support");
    }
  }
  IcReport report;
  report.z = z;
  for (std::size_t buyer : buyers) {
    if (buyer >= bids.size()) throw ContractViolation("probed buyer out of range");
    const double value = bids.bid(buyer);
    std::vector<double> truthful(trials);
    for (std::size_t t = 0; t < trials; ++t) {
      Rng rng(derive_seed(seed, {buyer, t}));
      const BuyerTerms bt = terms(bids, buyer, rng);
      truthful[t] = value * bt.win_prob - bt.payment;
    }
    IcProbe probe;
    probe.buyer = buyer;
    probe.value = value;
    const MeanSe tu = paired_stats(truthful);
    probe.truthful_utility = tu.mean;
    probe.truthful_se = tu.se;
    probe.ir_violation = tu.mean < -(z * tu.se + tol);
    probe.max_gain = -std::numeric_limits<double>::infinity();
    std::vector<double> gain(trials);
    for (double b : deviations) {
      const BidProfile deviated = bids.with_bid(buyer, b);
      for (std::size_t t = 0; t < trials; ++t) {
        Rng rng(derive_seed(seed, {buyer, t}));
        const BuyerTerms bt = terms(deviated, buyer, rng);
        gain[t] = (value * bt.win_prob - bt.payment) - truthful[t];
      }
      const MeanSe g = paired_stats(gain);
      if (g.mean > z * g.se + tol) probe.violation = true;
      if (g.mean > probe.max_gain) {
        probe.max_gain = g.mean;
        probe.gain_se = g.se;
        probe.worst_bid = b;
      }
    }
    report.violation = report.violation || probe.violation || probe.ir_violation;
    report.probes.push_back(probe);
  }
  return report;
}

double z_for_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ContractViolation("alpha must lie in (0, 1)");
  return boost::math::quantile(boost::math::complement(boost::math::normal(), alpha));
}

std::vector<double> deviation_grid(const ValuationSupport& support, std::size_t count) {
  if (count < 2) throw ContractViolation("deviation grid needs at least two points");
  std::vector<double> grid(count);
  const double lo = support.lower(), hi = support.upper();
  for (std::size_t j = 0; j < count; ++j) {
    grid[j] = (j + 1 == count) ? hi : lo + (hi - lo) * static_cast<double>(j) / (count - 1);
  }
  return grid;
}

}  // namespace fairauction
