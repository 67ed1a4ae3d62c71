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

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "expectation_accumulator.hpp"
#include "fairauction/baselines.hpp"
#include "fairauction/errors.hpp"

namespace fairauction {

BidderSplit split_bidders(std::size_t n, Rng& rng) {
  BidderSplit split;
  for (std::size_t i = 0; i < n; ++i) {
    (rng.coin() ? split.stat : split.auction_side).push_back(i);
  }
  return split;
}

BidderSplit split_covering_groups(const GroupPartition& partition, Rng& rng) {
  const std::size_t m = partition.num_groups();
  for (std::size_t attempt = 0; attempt < kMaxSplitAttempts; ++attempt) {
    BidderSplit split = split_bidders(partition.num_buyers(), rng);
    std::vector<bool> covered(m, false);
    for (std::size_t i : split.stat) covered[partition.group_of(i)] = true;
    if (std::all_of(covered.begin(), covered.end(), [](bool c) { return c; })) return split;
  }
  throw ResampleNeeded("no split with every group on the statistics side after " +
                       std::to_string(kMaxSplitAttempts) + " attempts");
}

namespace {

struct Candidate {
  std::vector<double> probs;
  double objective = 0.0;
  double gap = 0.0;
};

double fairness_gap_of(std::span<const double> probs, std::span<const double> bids) {
  double lo = probs[0] * bids[0], hi = lo;
  for (std::size_t k = 1; k < probs.size(); ++k) {
    lo = std::min(lo, probs[k] * bids[k]);
    hi = std::max(hi, probs[k] * bids[k]);
  }
  return hi - lo;
}

double objective_of(std::span<const double> probs, std::span<const double> prices) {
  double v = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) v += prices[k] * probs[k];
  return v;
}

// Point with identical group welfare everywhere: Pr proportional to 1/t when
// every t > 0; otherwise uniform over the groups with t = 0 (all welfare 0).
std::vector<double> zero_gap_point(std::span<const double> bids) {
  const std::size_t m = bids.size();
  std::vector<double> p(m, 0.0);
  const auto zeros = static_cast<std::size_t>(std::count(bids.begin(), bids.end(), 0.0));
  if (zeros > 0) {
    for (std::size_t k = 0; k < m; ++k) {
      if (bids[k] == 0.0) p[k] = 1.0 / static_cast<double>(zeros);
    }
    return p;
  }
  double total = 0.0;
  for (double t : bids) total += 1.0 / t;
  for (std::size_t k = 0; k < m; ++k) p[k] = (1.0 / bids[k]) / total;
  return p;
}

class CandidatePicker {
 public:
  CandidatePicker(std::span<const double> bids, std::span<const double> prices, double epsilon)
      : bids_(bids), prices_(prices), epsilon_(epsilon) {}

  void offer(std::vector<double> probs) {
    for (double& p : probs) {
      if (p < -kFairnessTolerance || p > 1.0 + kFairnessTolerance) return;
      p = std::clamp(p, 0.0, 1.0);
    }
    double total = 0.0;
    for (double p : probs) total += p;
    if (std::abs(total - 1.0) > kFairnessTolerance) return;
    const double gap = fairness_gap_of(probs, bids_);
    if (gap > epsilon_ + kFairnessTolerance) return;
    const double obj = objective_of(probs, prices_);
    if (has_best_) {
      const double scale = 1e-12 * (1.0 + std::abs(best_.objective));
      if (obj < best_.objective - scale) return;
      if (obj <= best_.objective + scale && gap >= best_.gap - 1e-12) return;
    }
    best_ = Candidate{std::move(probs), obj, gap};
    has_best_ = true;
  }

  bool has_best() const noexcept { return has_best_; }
  Candidate& best() { return best_; }

 private:
  std::span<const double> bids_;
  std::span<const double> prices_;
  double epsilon_;
  Candidate best_{};
  bool has_best_ = false;
};

// Solves the m x m system in place by Gaussian elimination with partial
// pivoting. Returns false when the system is (numerically) singular.
bool solve_dense(std::vector<double>& a, std::vector<double>& b, std::size_t m) {
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < m; ++r) {
      if (std::abs(a[r * m + col]) > std::abs(a[piv * m + col])) piv = r;
    }
    if (std::abs(a[piv * m + col]) < 1e-12) return false;
    if (piv != col) {
      for (std::size_t c = 0; c < m; ++c) std::swap(a[col * m + c], a[piv * m + c]);
      std::swap(b[col], b[piv]);
    }
    for (std::size_t r = col + 1; r < m; ++r) {
      const double f = a[r * m + col] / a[col * m + col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c < m; ++c) a[r * m + c] -= f * a[col * m + c];
      b[r] -= f * b[col];
    }
  }
  for (std::size_t r = m; r-- > 0;) {
    double v = b[r];
    for (std::size_t c = r + 1; c < m; ++c) v -= a[r * m + c] * b[c];
    b[r] = v / a[r * m + r];
  }
  return true;
}

struct Halfspace {
  std::vector<double> normal;
  double bound;
};

void offer_polytope_vertices(CandidatePicker& picker, std::span<const double> t, double epsilon) {
  const std::size_t m = t.size();
  std::vector<Halfspace> rows;
  for (std::size_t k = 0; k < m; ++k) {
    Halfspace h{std::vector<double>(m, 0.0), 0.0};
    h.normal[k] = -1.0;
    rows.push_back(std::move(h));
  }
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t l = 0; l < m; ++l) {
      if (k == l) continue;
      Halfspace h{std::vector<double>(m, 0.0), epsilon};
      h.normal[k] = t[k];
      h.normal[l] = -t[l];
      rows.push_back(std::move(h));
    }
  }
  // A vertex has m - 1 active inequalities besides the simplex equality.
  const std::size_t need = m - 1;
  std::vector<std::size_t> pick(need);
  for (std::size_t i = 0; i < need; ++i) pick[i] = i;
  std::vector<double> a(m * m), b(m);
  while (true) {
    for (std::size_t c = 0; c < m; ++c) a[c] = 1.0;
    b[0] = 1.0;
    for (std::size_t r = 0; r < need; ++r) {
      const Halfspace& h = rows[pick[r]];
      std::copy(h.normal.begin(), h.normal.end(), a.begin() + static_cast<long>((r + 1) * m));
      b[r + 1] = h.bound;
    }
    if (solve_dense(a, b, m)) picker.offer(b);
    // Next combination in lexicographic order.
    std::size_t i = need;
    while (i > 0 && pick[i - 1] == rows.size() - need + (i - 1)) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < need; ++j) pick[j] = pick[j - 1] + 1;
  }
}

}  // namespace

std::vector<double> solve_group_lp(std::span<const double> winner_bids,
                                   std::span<const double> winner_prices, double epsilon) {
  const std::size_t m = winner_bids.size();
  if (m == 0 || winner_prices.size() != m) {
    throw ContractViolation("group program needs matching, nonempty bid and price vectors");
  }
  if (m > kMaxLpGroups) {
    throw ContractViolation("group program supports at most " + std::to_string(kMaxLpGroups) +
                            " groups, got " + std::to_string(m));
  }
  if (!(epsilon >= 0.0)) {
    throw Infeasible("fairness bound must be >= 0; the program is infeasible", 0.0);
  }
  for (double t : winner_bids) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw ContractViolation("winner bids must be >= 0");
  }
  if (m == 1) return {1.0};

  CandidatePicker picker(winner_bids, winner_prices, epsilon);
  picker.offer(zero_gap_point(winner_bids));
  if (m == 2) {
    const double t1 = winner_bids[0], t2 = winner_bids[1];
    const double total = t1 + t2;
    if (total > 0.0) {
      const double lo = std::max(0.0, (t2 - epsilon) / total);
      const double hi = std::min(1.0, (t2 + epsilon) / total);
      picker.offer({lo, 1.0 - lo});
      picker.offer({hi, 1.0 - hi});
    } else {
      picker.offer({1.0, 0.0});
      picker.offer({0.0, 1.0});
    }
  } else {
    offer_polytope_vertices(picker, winner_bids, epsilon);
  }
  if (!picker.has_best()) {
    // Unreachable for epsilon >= 0: the zero-gap point is always feasible.
    throw Infeasible("group program has no feasible point", 0.0);
  }
  return std::move(picker.best().probs);
}

GroupProbabilities solve_group_probabilities(const BidProfile& bids,
                                             std::span<const std::size_t> stat_side,
                                             double epsilon) {
  const GroupPartition& part = bids.partition();
  const std::size_t m = part.num_groups();
  std::vector<BuyerSet> stat_members(m);
  for (std::size_t i : stat_side) stat_members[part.group_of(i)].push_back(i);
  GroupProbabilities gp;
  for (std::size_t k = 0; k < m; ++k) {
    const auto r = second_price_among(bids.bids(), stat_members[k], bids.support().lower());
    if (!r) {
      throw ResampleNeeded("group " + std::to_string(k + 1) +
                           " has no buyer on the statistics side");
    }
    gp.winners.push_back(r->winner);
    gp.winner_bids.push_back(bids.bid(r->winner));
    gp.winner_prices.push_back(r->price);
  }
  gp.probs = solve_group_lp(gp.winner_bids, gp.winner_prices, epsilon);
  return gp;
}

GroupProbabilities solve_group_probabilities(const BidProfile& stat_bids, double epsilon) {
  BuyerSet all(stat_bids.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return solve_group_probabilities(stat_bids, all, epsilon);
}

namespace {

std::vector<BuyerSet> auction_members(const BidProfile& bids, const BidderSplit& split) {
  std::vector<BuyerSet> members(bids.num_groups());
  for (std::size_t i : split.auction_side) members[bids.group_of(i)].push_back(i);
  return members;
}

}  // namespace

Outcome gpm_run_on_split(const BidProfile& bids, double epsilon, const BidderSplit& split,
                         double group_draw) {
  const GroupProbabilities gp = solve_group_probabilities(bids, split.stat, epsilon);
  const std::size_t chosen = sample_categorical(gp.probs, group_draw);
  const auto members = auction_members(bids, split);
  const auto r = second_price_among(bids.bids(), members[chosen], bids.support().lower());
  if (!r) return Outcome::no_sale(bids.size());
  return Outcome::sale(bids.size(), r->winner, r->price);
}

Outcome gpm_run(const BidProfile& bids, double epsilon, Rng& rng) {
  const BidderSplit split = split_covering_groups(bids.partition(), rng);
  return gpm_run_on_split(bids, epsilon, split, rng.uniform());
}

ExpectedOutcome gpm_conditional_expected(const BidProfile& bids, double epsilon,
                                         const BidderSplit& split) {
  const GroupProbabilities gp = solve_group_probabilities(bids, split.stat, epsilon);
  const auto members = auction_members(bids, split);
  ExpectedOutcome e;
  e.win_prob.assign(bids.size(), 0.0);
  e.exp_payment.assign(bids.size(), 0.0);
  for (std::size_t k = 0; k < members.size(); ++k) {
    const auto r = second_price_among(bids.bids(), members[k], bids.support().lower());
    if (!r) continue;
    e.win_prob[r->winner] += gp.probs[k];
    e.exp_payment[r->winner] += gp.probs[k] * r->price;
  }
  return e;
}

ExpectedOutcome gpm_expected(const BidProfile& bids, double epsilon, std::size_t trials,
                             Rng& rng, GpmEstimator estimator) {
  if (trials == 0) throw ContractViolation("gpm_expected needs at least one trial");
  const std::uint64_t master = rng.next();
  detail::ExpectationAccumulator acc(bids.size());
  for (std::size_t t = 0; t < trials; ++t) {
    Rng trial_rng(derive_seed(master, {t}));
    if (estimator == GpmEstimator::kRealized) {
      const Outcome o = gpm_run(bids, epsilon, trial_rng);
      acc.add(o.allocation(), o.payments());
    } else {
      const BidderSplit split = split_covering_groups(bids.partition(), trial_rng);
      const ExpectedOutcome c = gpm_conditional_expected(bids, epsilon, split);
      acc.add(c.win_prob, c.exp_payment);
    }
  }
  return acc.finish();
}

}  // namespace fairauction
