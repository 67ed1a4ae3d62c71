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

#include <algorithm>
#include <cmath>
#include <string>

#include "expectation_accumulator.hpp"
#include "fairauction/errors.hpp"
#include "fairauction/kernels.hpp"

namespace fairauction {

double apply_transform(BaseTransform base, double x) {
  switch (base) {
    case BaseTransform::kLinear:
      return x;
    case BaseTransform::kLog1p:
      return std::log1p(x);
    case BaseTransform::kSquare:
      return x * x;
    case BaseTransform::kExp:
      return std::exp(x);
  }
  return x;
}

std::string_view transform_name(BaseTransform base) {
  switch (base) {
    case BaseTransform::kLinear:
      return "linear";
    case BaseTransform::kLog1p:
      return "log1p";
    case BaseTransform::kSquare:
      return "square";
    case BaseTransform::kExp:
      return "exp";
  }
  return "linear";
}

BaseTransform parse_transform(std::string_view name) {
  if (name == "linear") return BaseTransform::kLinear;
  if (name == "log1p" || name == "log") return BaseTransform::kLog1p;
  if (name == "square") return BaseTransform::kSquare;
  if (name == "exp") return BaseTransform::kExp;
  throw ContractViolation("unknown base transform '" + std::string(name) + "'");
}

GroupScoreFunction::GroupScoreFunction(std::vector<ScoreParams> params, BaseTransform base,
                                       ValuationSupport support)
    : params_(std::move(params)),
      base_(base),
      support_(support),
      scale_(base == BaseTransform::kExp ? std::exp(-support.upper()) : 1.0) {
  if (params_.empty()) throw ContractViolation("score function needs at least one group");
  for (std::size_t k = 0; k < params_.size(); ++k) {
    const ScoreParams& p = params_[k];
    for (double v : {p.a, p.b, p.c, p.d}) {
      if (!std::isfinite(v) || v < 0.0) {
        throw ContractViolation("score parameters of group " + std::to_string(k + 1) +
                                " must be finite and >= 0");
      }
    }
  }
}

double GroupScoreFunction::score(std::size_t group, double bid) const {
  if (!support_.contains(bid)) {
    throw ContractViolation("bid " + std::to_string(bid) + " outside the score support");
  }
  const ScoreParams& p = params_.at(group);
  return p.a * (p.b * apply_transform(base_, bid) + p.c) + p.d;
}

double GroupScoreFunction::scaled_transform(double x) const {
  if (base_ == BaseTransform::kExp) return std::exp(x - support_.upper());
  return apply_transform(base_, x);
}

void QuadratureSpec::validate() const {
  if (panels == 0 || panels % 2 != 0) throw ContractViolation("quadrature panels must be even");
  if (!(abs_tol > 0.0)) throw ContractViolation("quadrature tolerance must be positive");
}

void simpson_rule(double lo, double hi, std::size_t panels, std::vector<double>& nodes,
                  std::vector<double>& weights) {
  nodes.resize(panels + 1);
  weights.resize(panels + 1);
  const double h = (hi - lo) / static_cast<double>(panels);
  for (std::size_t j = 0; j <= panels; ++j) {
    nodes[j] = (j == panels) ? hi : lo + h * static_cast<double>(j);
    weights[j] = (j == 0 || j == panels) ? h / 3.0 : (j % 2 == 1 ? 4.0 * h / 3.0 : 2.0 * h / 3.0);
  }
}

namespace {

constexpr std::size_t kMaxPanels = std::size_t{1} << 20;

// At a breakpoint the integrand is sampled one ulp inside the piece, so a jump
// there does not leak into the neighbouring piece.
double simpson_sum(const std::function<double(double)>& fn, double lo, double hi,
                   std::size_t panels, bool inside_lo, bool inside_hi) {
  std::vector<double> nodes, weights;
  simpson_rule(lo, hi, panels, nodes, weights);
  if (inside_lo) nodes.front() = std::nextafter(lo, hi);
  if (inside_hi) nodes.back() = std::nextafter(hi, lo);
  double total = 0.0;
  for (std::size_t j = 0; j < nodes.size(); ++j) total += weights[j] * fn(nodes[j]);
  return total;
}

std::vector<double> segment_edges(double lo, double hi, std::span<const double> breakpoints) {
  std::vector<double> edges{lo};
  std::vector<double> inner;
  for (double b : breakpoints) {
    if (b > lo && b < hi) inner.push_back(b);
  }
  std::sort(inner.begin(), inner.end());
  inner.erase(std::unique(inner.begin(), inner.end()), inner.end());
  edges.insert(edges.end(), inner.begin(), inner.end());
  edges.push_back(hi);
  return edges;
}

}  // namespace

IntegrationResult integrate(const std::function<double(double)>& fn, double lo, double hi,
                            const QuadratureSpec& spec, double tol,
                            std::span<const double> breakpoints) {
  spec.validate();
  if (hi <= lo) return {0.0, 0.0, 0};
  const std::vector<double> edges = segment_edges(lo, hi, breakpoints);
  auto total_at = [&](std::size_t panels) {
    double v = 0.0;
    for (std::size_t s = 0; s + 1 < edges.size(); ++s) {
      v += simpson_sum(fn, edges[s], edges[s + 1], panels, s > 0, s + 2 < edges.size());
    }
    return v;
  };
  std::size_t panels = spec.panels;
  double coarse = total_at(panels);
  while (true) {
    const double fine = total_at(2 * panels);
    const double err = std::abs(fine - coarse) / 15.0;
    panels *= 2;
    if (err <= tol || panels >= kMaxPanels) return {fine, err, panels};
    coarse = fine;
  }
}

double myerson_payment(const std::function<double(double)>& allocation, double lower, double bid,
                       const QuadratureSpec& spec, std::span<const double> breakpoints) {
  const double at_bid = allocation(bid);
  if (!(at_bid > 0.0)) {
    throw ContractViolation("Myerson payment needs a positive allocation at the bid");
  }
  const IntegrationResult r = integrate(allocation, lower, bid, spec, spec.abs_tol * at_bid,
                                        breakpoints);
  return std::clamp(bid - r.value / at_bid, lower, bid);
}

namespace {

struct SideScores {
  std::vector<double> scores;  // scaled, in side order
  double total = 0.0;
};

SideScores side_scores(const GroupScoreFunction& gsf, const BidProfile& bids,
                       std::span<const std::size_t> side) {
  if (gsf.num_groups() != bids.num_groups()) {
    throw ContractViolation("score function has " + std::to_string(gsf.num_groups()) +
                            " groups, profile has " + std::to_string(bids.num_groups()));
  }
  SideScores s;
  s.scores.resize(side.size());
  for (std::size_t j = 0; j < side.size(); ++j) {
    const std::size_t i = side[j];
    s.scores[j] = gsf.scaled_score(bids.group_of(i), bids.bid(i));
  }
  s.total = simd::active_kernels().sum(s.scores);
  return s;
}

// integral_lower^bid s(x) / (s(x) + rival) dx for a buyer of `group`, doubling
// panels until the Richardson estimate is under `tol`.
double lottery_integral(const GroupScoreFunction& gsf, std::size_t group, double bid,
                        double rival, const QuadratureSpec& quad, double tol) {
  const double lo = gsf.support().lower();
  if (bid <= lo) return 0.0;
  const simd::KernelTable& kt = simd::active_kernels();
  const double slope = gsf.slope(group);
  const double offset = gsf.scaled_offset(group);
  std::vector<double> nodes, weights;
  auto at = [&](std::size_t panels) {
    simpson_rule(lo, bid, panels, nodes, weights);
    for (double& x : nodes) x = gsf.scaled_transform(x);
    return kt.ratio_integral(nodes, weights, slope, offset, rival);
  };
  std::size_t panels = quad.panels;
  double coarse = at(panels);
  while (true) {
    const double fine = at(2 * panels);
    panels *= 2;
    if (std::abs(fine - coarse) / 15.0 <= tol || panels >= kMaxPanels) return fine;
    coarse = fine;
  }
}

std::size_t position_in(std::span<const std::size_t> side, std::size_t buyer) {
  const auto it = std::find(side.begin(), side.end(), buyer);
  if (it == side.end()) throw ContractViolation("winner is not on the auction side");
  return static_cast<std::size_t>(it - side.begin());
}

BuyerSet everyone(std::size_t n) {
  BuyerSet all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  return all;
}

}  // namespace

std::vector<double> individual_win_probs(const GroupScoreFunction& gsf, const BidProfile& bids,
                                         std::span<const std::size_t> side) {
  SideScores s = side_scores(gsf, bids, side);
  if (!(s.total > 0.0)) throw DegenerateInput("every score on the auction side is zero");
  for (double& v : s.scores) v /= s.total;
  return std::move(s.scores);
}

std::vector<double> individual_win_probs(const GroupScoreFunction& gsf, const BidProfile& bids) {
  return individual_win_probs(gsf, bids, everyone(bids.size()));
}

double gsm_payment(std::size_t winner, const BidProfile& bids, const GroupScoreFunction& gsf,
                   const QuadratureSpec& quad, std::span<const std::size_t> side) {
  quad.validate();
  const std::size_t pos = position_in(side, winner);
  const SideScores s = side_scores(gsf, bids, side);
  const double own = s.scores[pos];
  const double rival = std::max(0.0, s.total - own);
  if (!(own > 0.0)) throw ContractViolation("winner has zero win probability");
  const double prob = own / (own + rival);
  const std::size_t k = bids.group_of(winner);
  const double bid = bids.bid(winner);
  const double integral = lottery_integral(gsf, k, bid, rival, quad, quad.abs_tol * prob);
  return std::clamp(bid - integral / prob, gsf.support().lower(), bid);
}

double gsm_payment(std::size_t winner, const BidProfile& bids, const GroupScoreFunction& gsf,
                   const QuadratureSpec& quad) {
  return gsm_payment(winner, bids, gsf, quad, everyone(bids.size()));
}

std::vector<double> gsm_expected_payments(const BidProfile& bids, const GroupScoreFunction& gsf,
                                          const QuadratureSpec& quad,
                                          std::span<const std::size_t> side) {
  quad.validate();
  const SideScores s = side_scores(gsf, bids, side);
  if (!(s.total > 0.0)) throw DegenerateInput("every score on the auction side is zero");
  std::vector<double> pay(side.size(), 0.0);
  for (std::size_t j = 0; j < side.size(); ++j) {
    const std::size_t i = side[j];
    const double own = s.scores[j];
    const double rival = std::max(0.0, s.total - own);
    const double prob = own / s.total;
    if (prob <= 0.0) continue;
    const double integral =
        lottery_integral(gsf, bids.group_of(i), bids.bid(i), rival, quad, quad.abs_tol * prob);
    pay[j] = std::max(0.0, bids.bid(i) * prob - integral);
  }
  return pay;
}

Outcome gsm_run_on_side(const BidProfile& bids, const GroupScoreFunction& gsf,
                        std::span<const std::size_t> auction_side, Rng& rng,
                        const QuadratureSpec& quad) {
  if (auction_side.empty()) return Outcome::no_sale(bids.size());
  const std::vector<double> probs = individual_win_probs(gsf, bids, auction_side);
  for (std::size_t attempt = 0; attempt < kMaxWinnerRedraws; ++attempt) {
    const std::size_t j = sample_categorical(probs, rng.uniform());
    if (probs[j] < kMinWinnerProbability) continue;
    const std::size_t winner = auction_side[j];
    return Outcome::sale(bids.size(), winner, gsm_payment(winner, bids, gsf, quad, auction_side));
  }
  return Outcome::no_sale(bids.size());
}

Outcome gsm_run(const BidProfile& bids, const GroupScoreFunction& gsf, Rng& rng,
                const QuadratureSpec& quad) {
  const BidderSplit split = split_bidders(bids.size(), rng);
  return gsm_run_on_side(bids, gsf, split.auction_side, rng, quad);
}

Outcome gsm_run(const BidProfile& bids, const ScoreTrainer& trainer, Rng& rng,
                const QuadratureSpec& quad) {
  const BidderSplit split = split_covering_groups(bids.partition(), rng);
  const GroupScoreFunction gsf = trainer(bids, split.stat);
  return gsm_run_on_side(bids, gsf, split.auction_side, rng, quad);
}

ExpectedOutcome gsm_conditional_expected(const BidProfile& bids, const GroupScoreFunction& gsf,
                                         std::span<const std::size_t> auction_side,
                                         const QuadratureSpec& quad) {
  ExpectedOutcome e;
  e.win_prob.assign(bids.size(), 0.0);
  e.exp_payment.assign(bids.size(), 0.0);
  if (auction_side.empty()) return e;
  const std::vector<double> probs = individual_win_probs(gsf, bids, auction_side);
  const std::vector<double> pay = gsm_expected_payments(bids, gsf, quad, auction_side);
  for (std::size_t j = 0; j < auction_side.size(); ++j) {
    e.win_prob[auction_side[j]] = probs[j];
    e.exp_payment[auction_side[j]] = pay[j];
  }
  return e;
}

ExpectedOutcome gsm_expected(const BidProfile& bids, const GroupScoreFunction& gsf,
                             const QuadratureSpec& quad, const GsmExpectation& how) {
  const std::size_t n = bids.size();
  switch (how.mode) {
    case GsmSplitMode::kAllAuction:
      return gsm_conditional_expected(bids, gsf, everyone(n), quad);
    case GsmSplitMode::kEnumerate: {
      if (n > kMaxEnumeratedBuyers) {
        throw ContractViolation("split enumeration supports at most " +
                                std::to_string(kMaxEnumeratedBuyers) + " buyers");
      }
      const std::uint64_t splits = std::uint64_t{1} << n;
      const double weight = 1.0 / static_cast<double>(splits);
      ExpectedOutcome e;
      e.win_prob.assign(n, 0.0);
      e.exp_payment.assign(n, 0.0);
      for (std::uint64_t mask = 1; mask < splits; ++mask) {
        BuyerSet side;
        for (std::size_t i = 0; i < n; ++i) {
          if (mask & (std::uint64_t{1} << i)) side.push_back(i);
        }
        const ExpectedOutcome c = gsm_conditional_expected(bids, gsf, side, quad);
        for (std::size_t i = 0; i < n; ++i) {
          e.win_prob[i] += weight * c.win_prob[i];
          e.exp_payment[i] += weight * c.exp_payment[i];
        }
      }
      return e;
    }
    case GsmSplitMode::kMonteCarlo: {
      if (how.reps == 0) throw ContractViolation("Monte Carlo expectation needs reps >= 1");
      detail::ExpectationAccumulator acc(n);
      for (std::size_t r = 0; r < how.reps; ++r) {
        Rng rng(derive_seed(how.seed, {r}));
        const BidderSplit split = split_bidders(n, rng);
        const ExpectedOutcome c = gsm_conditional_expected(bids, gsf, split.auction_side, quad);
        acc.add(c.win_prob, c.exp_payment);
      }
      return acc.finish();
    }
  }
  throw ContractViolation("unknown split mode");
}

}  // namespace fairauction
