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

#include "fairauction/score_learning.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fairauction/errors.hpp"
#include "fairauction/kernels.hpp"

namespace fairauction {

namespace {

double quantile_sorted(const std::vector<double>& v, double q) {
  const double pos = q * static_cast<double>(v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

double sign_of(double z) { return z > 0.0 ? 1.0 : (z < 0.0 ? -1.0 : 0.0); }

// Hidden pre-activations and the raw output of one MLP head.
struct MlpTrace {
  std::vector<double> pre;
  double out = 0.0;
};

MlpTrace trace_mlp(const MlpParams& p, std::span<const double> x) {
  MlpTrace t;
  t.pre.resize(p.hidden);
  t.out = p.b3;
  for (std::size_t h = 0; h < p.hidden; ++h) {
    double z = p.b1[h];
    const double* row = p.w1.data() + h * p.inputs;
    for (std::size_t j = 0; j < p.inputs; ++j) z += row[j] * x[j];
    t.pre[h] = z;
    if (z > 0.0) t.out += p.w3[h] * z;
  }
  return t;
}

MlpParams init_mlp(std::size_t inputs, std::size_t hidden, Rng& rng) {
  MlpParams p;
  p.inputs = inputs;
  p.hidden = hidden;
  p.w1.resize(hidden * inputs);
  p.b1.resize(hidden);
  p.w3.resize(hidden);
  for (double& w : p.w1) w = rng.uniform(-0.1, 0.1);
  for (double& b : p.b1) b = rng.uniform(-0.1, 0.1);
  for (double& w : p.w3) w = rng.uniform(-0.1, 0.1);
  p.b3 = rng.uniform(0.5, 1.5);
  return p;
}

std::size_t mlp_size(const MlpParams& p) { return p.w1.size() + p.b1.size() + p.w3.size() + 1; }

void append_mlp(const MlpParams& p, std::vector<double>& out) {
  out.insert(out.end(), p.w1.begin(), p.w1.end());
  out.insert(out.end(), p.b1.begin(), p.b1.end());
  out.insert(out.end(), p.w3.begin(), p.w3.end());
  out.push_back(p.b3);
}

std::size_t read_mlp(MlpParams& p, std::span<const double> flat, std::size_t at) {
  for (double& w : p.w1) w = flat[at++];
  for (double& b : p.b1) b = flat[at++];
  for (double& w : p.w3) w = flat[at++];
  p.b3 = flat[at++];
  return at;
}

// Writes d(out)/d(weights) * upstream into grad, in flatten() order.
std::size_t backprop_mlp(const MlpParams& p, const MlpTrace& t, std::span<const double> x,
                         double upstream, std::vector<double>& grad, std::size_t at) {
  const std::size_t w1_at = at;
  const std::size_t b1_at = w1_at + p.w1.size();
  const std::size_t w3_at = b1_at + p.b1.size();
  const std::size_t b3_at = w3_at + p.w3.size();
  for (std::size_t h = 0; h < p.hidden; ++h) {
    if (!(t.pre[h] > 0.0)) continue;
    grad[w3_at + h] = upstream * t.pre[h];
    const double dpre = upstream * p.w3[h];
    grad[b1_at + h] = dpre;
    for (std::size_t j = 0; j < p.inputs; ++j) grad[w1_at + h * p.inputs + j] = dpre * x[j];
  }
  grad[b3_at] = upstream;
  return b3_at + 1;
}

struct HeadsTrace {
  MlpTrace a, b, d;
  double c = 0.0;
};

// Signs of every ReLU and |.| input; a change between two points means a kink
// lies between them.
void activation_signature(const ScoreNetworks& nets, std::span<const double> x,
                          std::vector<signed char>& sig) {
  sig.clear();
  auto push_mlp = [&](const MlpParams& p) {
    const MlpTrace t = trace_mlp(p, x);
    for (double z : t.pre) sig.push_back(static_cast<signed char>(sign_of(z)));
    sig.push_back(static_cast<signed char>(sign_of(t.out)));
  };
  for (const GroupHeads& g : nets.groups) {
    push_mlp(g.a);
    push_mlp(g.b);
    push_mlp(g.d);
    sig.push_back(static_cast<signed char>(sign_of(g.c.raw(x))));
  }
}

}  // namespace

std::vector<double> stat_features(const BidProfile& bids, std::span<const std::size_t> side) {
  std::vector<std::vector<double>> per_group(bids.num_groups());
  for (std::size_t i : side) per_group[bids.group_of(i)].push_back(bids.bid(i));
  std::vector<double> features;
  features.reserve(kQuantilesPerGroup * bids.num_groups());
  for (std::size_t k = 0; k < per_group.size(); ++k) {
    std::vector<double>& v = per_group[k];
    if (v.empty()) {
      throw ResampleNeeded("group " + std::to_string(k + 1) + " has no statistics-side bid");
    }
    std::sort(v.begin(), v.end());
    for (double q : {0.0, 0.25, 0.5, 0.75, 1.0}) features.push_back(quantile_sorted(v, q));
  }
  return features;
}

double MlpParams::raw(std::span<const double> features) const {
  return trace_mlp(*this, features).out;
}

double LinearHead::raw(std::span<const double> features) const {
  double z = b;
  for (std::size_t j = 0; j < w.size(); ++j) z += w[j] * features[j];
  return z;
}

ScoreNetworks ScoreNetworks::initialize(std::size_t num_groups, std::size_t feature_dim,
                                        std::size_t hidden, Rng& rng) {
  if (num_groups == 0 || feature_dim == 0 || hidden == 0) {
    throw ContractViolation("score networks need groups, features and hidden units");
  }
  ScoreNetworks nets;
  nets.groups.resize(num_groups);
  for (GroupHeads& g : nets.groups) {
    g.a = init_mlp(feature_dim, hidden, rng);
    g.b = init_mlp(feature_dim, hidden, rng);
    g.d = init_mlp(feature_dim, hidden, rng);
    g.c.w.resize(feature_dim);
    for (double& w : g.c.w) w = rng.uniform(-0.1, 0.1);
    g.c.b = rng.uniform(0.5, 1.5);
  }
  return nets;
}

std::size_t ScoreNetworks::num_parameters() const {
  std::size_t n = 0;
  for (const GroupHeads& g : groups) {
    n += mlp_size(g.a) + mlp_size(g.b) + mlp_size(g.d) + g.c.w.size() + 1;
  }
  return n;
}

std::vector<double> ScoreNetworks::flatten() const {
  std::vector<double> out;
  out.reserve(num_parameters());
  for (const GroupHeads& g : groups) {
    append_mlp(g.a, out);
    append_mlp(g.b, out);
    append_mlp(g.d, out);
    out.insert(out.end(), g.c.w.begin(), g.c.w.end());
    out.push_back(g.c.b);
  }
  return out;
}

void ScoreNetworks::assign(std::span<const double> flat) {
  if (flat.size() != num_parameters()) {
    throw ContractViolation("flat parameter vector has the wrong length");
  }
  std::size_t at = 0;
  for (GroupHeads& g : groups) {
    at = read_mlp(g.a, flat, at);
    at = read_mlp(g.b, flat, at);
    at = read_mlp(g.d, flat, at);
    for (double& w : g.c.w) w = flat[at++];
    g.c.b = flat[at++];
  }
}

std::vector<ScoreParams> emit_params(const ScoreNetworks& nets, std::span<const double> features) {
  std::vector<ScoreParams> out(nets.groups.size());
  for (std::size_t k = 0; k < nets.groups.size(); ++k) {
    const GroupHeads& g = nets.groups[k];
    if (g.a.inputs != features.size() || g.c.w.size() != features.size()) {
      throw ContractViolation("feature length does not match the networks");
    }
    out[k] = {std::abs(g.a.raw(features)), std::abs(g.b.raw(features)),
              std::abs(g.c.raw(features)), std::abs(g.d.raw(features))};
  }
  return out;
}

GroupScoreFunction emit_score_function(const ScoreNetworks& nets,
                                       std::span<const double> features, BaseTransform base,
                                       ValuationSupport support) {
  return GroupScoreFunction(emit_params(nets, features), base, support);
}

LotteryObjective::LotteryObjective(const BidProfile& bids, std::span<const std::size_t> side,
                                   BaseTransform base, std::size_t panels)
    : num_groups_(bids.num_groups()), nodes_per_buyer_(panels + 1) {
  if (panels == 0 || panels % 2 != 0) throw ContractViolation("training panels must be even");
  if (side.empty()) throw ContractViolation("lottery side is empty");
  // Any parameters give the same scale; it depends only on base and support.
  const GroupScoreFunction probe(std::vector<ScoreParams>(num_groups_), base, bids.support());
  scale_ = probe.scale();
  const double lo = bids.support().lower();
  group_.reserve(side.size());
  value_.reserve(side.size());
  transformed_.reserve(side.size());
  node_f_.reserve(side.size() * nodes_per_buyer_);
  node_w_.reserve(side.size() * nodes_per_buyer_);
  std::vector<double> nodes, weights;
  for (std::size_t i : side) {
    const double v = bids.bid(i);
    group_.push_back(bids.group_of(i));
    value_.push_back(v);
    transformed_.push_back(probe.scaled_transform(v));
    max_bid_ = std::max(max_bid_, v);
    simpson_rule(lo, v, panels, nodes, weights);
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      node_f_.push_back(probe.scaled_transform(nodes[j]));
      node_w_.push_back(weights[j]);
    }
  }
}

LagrangianValue LotteryObjective::evaluate(std::span<const ScoreParams> params, double lambda,
                                           double epsilon, bool with_gradient) const {
  if (params.size() != num_groups_) throw ContractViolation("one score per group is required");
  const std::size_t m = num_groups_;
  const std::size_t n = value_.size();
  const simd::KernelTable& kt = simd::active_kernels();

  std::vector<double> slope(m), offset(m);
  for (std::size_t k = 0; k < m; ++k) {
    slope[k] = params[k].a * params[k].b;
    offset[k] = scale_ * (params[k].a * params[k].c + params[k].d);
  }
  std::vector<double> s(n);
  for (std::size_t j = 0; j < n; ++j) s[j] = slope[group_[j]] * transformed_[j] + offset[group_[j]];
  const double total = kt.sum(s);

  LagrangianValue out;
  out.group_welfare.assign(m, 0.0);
  if (with_gradient) out.grad.assign(m, ScoreParams{});
  if (!(total > 0.0)) {
    // No buyer can win: nothing is sold, and the objective is flat.
    out.g = -epsilon;
    out.lagrangian = lambda * out.g;
    return out;
  }

  double welfare = 0.0;
  double integrals = 0.0;
  std::vector<simd::RatioMoments> mom(n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::span<const double> f(node_f_.data() + j * nodes_per_buyer_, nodes_per_buyer_);
    const std::span<const double> w(node_w_.data() + j * nodes_per_buyer_, nodes_per_buyer_);
    const std::size_t k = group_[j];
    const double rival = total - s[j];
    if (with_gradient) {
      mom[j] = kt.ratio_moments(f, w, slope[k], offset[k], rival);
    } else {
      mom[j].value = kt.ratio_integral(f, w, slope[k], offset[k], rival);
    }
    integrals += mom[j].value;
    const double wj = value_[j] * s[j];
    welfare += wj;
    out.group_welfare[k] += wj;
  }
  for (double& w : out.group_welfare) w /= total;
  const double revenue = welfare / total - integrals;
  out.psi = -revenue;

  // First pair (in lexicographic order) attaining the largest difference.
  std::size_t hi = 0, lo = 0;
  double gap = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t l = k + 1; l < m; ++l) {
      const double diff = std::abs(out.group_welfare[k] - out.group_welfare[l]);
      if (diff > gap) {
        gap = diff;
        hi = k;
        lo = l;
      }
    }
  }
  out.gap = gap;
  out.g = gap - epsilon;
  out.lagrangian = out.psi + lambda * out.g;
  if (!with_gradient) return out;

  // dL/ds_q collapsed per group into d/dslope and d/doffset. The rival sum of
  // buyer j is R_j = total - s_j, so dI_j/ds_q = [q == j] J_own - J3_j.
  double sum_j3 = 0.0;
  for (const simd::RatioMoments& r : mom) sum_j3 += r.d_rival;
  const double sw = welfare / total;
  const double gap_sign =
      gap > 0.0 ? sign_of(out.group_welfare[hi] - out.group_welfare[lo]) : 0.0;
  const double gap_diff = out.group_welfare[hi] - out.group_welfare[lo];
  std::vector<double> d_slope(m, 0.0), d_offset(m, 0.0);
  for (std::size_t q = 0; q < n; ++q) {
    const std::size_t k = group_[q];
    const double f = transformed_[q];
    // d revenue / d s_q, excluding the own-parameter moment terms of I_q.
    const double d_rev_ds = (value_[q] - sw) / total + (sum_j3 - mom[q].d_rival);
    double d_gap_ds = 0.0;
    if (gap_sign != 0.0) {
      const double own = (k == hi ? value_[q] : 0.0) - (k == lo ? value_[q] : 0.0);
      d_gap_ds = gap_sign * (own - gap_diff) / total;
    }
    const double d_l_ds = -d_rev_ds + lambda * d_gap_ds;
    // I_q also depends on its own group's slope and offset through s(x).
    d_slope[k] += d_l_ds * f + mom[q].d_slope;
    d_offset[k] += d_l_ds + mom[q].d_offset;
  }
  for (std::size_t k = 0; k < m; ++k) {
    const ScoreParams& p = params[k];
    const double d_beta = d_offset[k] * scale_;
    out.grad[k].a = d_slope[k] * p.b + d_beta * p.c;
    out.grad[k].b = d_slope[k] * p.a;
    out.grad[k].c = d_beta * p.a;
    out.grad[k].d = d_beta;
  }
  return out;
}

LagrangianValue lagrangian(const GroupScoreFunction& gsf, const BidProfile& bids,
                           std::span<const std::size_t> stat_side, double lambda, double epsilon,
                           const QuadratureSpec& quad) {
  const std::vector<double> pi = individual_win_probs(gsf, bids, stat_side);
  const std::vector<double> pay = gsm_expected_payments(bids, gsf, quad, stat_side);
  LagrangianValue out;
  out.group_welfare.assign(bids.num_groups(), 0.0);
  double revenue = 0.0;
  for (std::size_t j = 0; j < stat_side.size(); ++j) {
    const std::size_t i = stat_side[j];
    revenue += pay[j];
    out.group_welfare[bids.group_of(i)] += bids.bid(i) * pi[j];
  }
  out.psi = -revenue;
  const auto [mn, mx] = std::minmax_element(out.group_welfare.begin(), out.group_welfare.end());
  out.gap = *mx - *mn;
  out.g = out.gap - epsilon;
  out.lagrangian = out.psi + lambda * out.g;
  return out;
}

std::vector<double> network_gradient(const ScoreNetworks& nets, std::span<const double> features,
                                     const LotteryObjective& objective, double lambda,
                                     double epsilon, LagrangianValue* value_out) {
  const std::size_t m = nets.groups.size();
  std::vector<HeadsTrace> traces(m);
  std::vector<ScoreParams> params(m);
  for (std::size_t k = 0; k < m; ++k) {
    const GroupHeads& g = nets.groups[k];
    traces[k].a = trace_mlp(g.a, features);
    traces[k].b = trace_mlp(g.b, features);
    traces[k].d = trace_mlp(g.d, features);
    traces[k].c = g.c.raw(features);
    params[k] = {std::abs(traces[k].a.out), std::abs(traces[k].b.out), std::abs(traces[k].c),
                 std::abs(traces[k].d.out)};
  }
  LagrangianValue value = objective.evaluate(params, lambda, epsilon, true);

  std::vector<double> grad(nets.num_parameters(), 0.0);
  std::size_t at = 0;
  for (std::size_t k = 0; k < m; ++k) {
    const GroupHeads& g = nets.groups[k];
    const HeadsTrace& t = traces[k];
    const ScoreParams& dp = value.grad[k];
    at = backprop_mlp(g.a, t.a, features, dp.a * sign_of(t.a.out), grad, at);
    at = backprop_mlp(g.b, t.b, features, dp.b * sign_of(t.b.out), grad, at);
    at = backprop_mlp(g.d, t.d, features, dp.d * sign_of(t.d.out), grad, at);
    const double dc = dp.c * sign_of(t.c);
    for (std::size_t j = 0; j < g.c.w.size(); ++j) grad[at++] = dc * features[j];
    grad[at++] = dc;
  }
  if (value_out != nullptr) *value_out = std::move(value);
  return grad;
}

void LearnerConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ContractViolation("learning rate must be positive");
  }
  if (!(dual_learning_rate >= 0.0) || !std::isfinite(dual_learning_rate)) {
    throw ContractViolation("dual learning rate must be >= 0");
  }
  if (episodes == 0) throw ContractViolation("episodes must be >= 1");
  if (sgd_steps_per_episode == 0) throw ContractViolation("sgd steps must be >= 1");
  if (hidden_width == 0) throw ContractViolation("hidden width must be >= 1");
  if (!std::isfinite(epsilon) || epsilon < 0.0) throw ContractViolation("epsilon must be >= 0");
  if (train_panels == 0 || train_panels % 2 != 0) {
    throw ContractViolation("training panels must be even");
  }
}

namespace {

constexpr std::size_t kMonotoneGridPoints = 33;

bool scores_monotone(const GroupScoreFunction& gsf) {
  const double lo = gsf.support().lower();
  const double hi = gsf.support().upper();
  for (std::size_t k = 0; k < gsf.num_groups(); ++k) {
    double prev = gsf.scaled_score(k, lo);
    for (std::size_t j = 1; j < kMonotoneGridPoints; ++j) {
      const double x = lo + (hi - lo) * static_cast<double>(j) / (kMonotoneGridPoints - 1);
      const double cur = gsf.scaled_score(k, x);
      if (cur < prev) return false;
      prev = cur;
    }
  }
  return true;
}

}  // namespace

TrainingResult dual_ascent_train(const BidProfile& bids, std::span<const std::size_t> stat_side,
                                 const LearnerConfig& cfg) {
  cfg.validate();
  const std::vector<double> features = stat_features(bids, stat_side);
  const LotteryObjective objective(bids, stat_side, cfg.base, cfg.train_panels);
  Rng rng(cfg.seed);
  ScoreNetworks nets =
      ScoreNetworks::initialize(bids.num_groups(), features.size(), cfg.hidden_width, rng);
  std::vector<double> theta = nets.flatten();
  const double dual_rate = cfg.dual_learning_rate > 0.0 ? cfg.dual_learning_rate
                                                        : cfg.learning_rate;
  const double revenue_cap = objective.max_bid() * (1.0 + 1e-9) + 1e-12;

  TrainingResult result;
  result.curve.reserve(cfg.episodes);
  double lambda = 0.0;
  for (std::size_t episode = 1; episode <= cfg.episodes; ++episode) {
    for (std::size_t step = 0; step < cfg.sgd_steps_per_episode; ++step) {
      LagrangianValue v;
      const std::vector<double> grad = network_gradient(nets, features, objective, lambda,
                                                        cfg.epsilon, &v);
      if (!std::isfinite(v.lagrangian)) {
        throw TrainingDiverged("non-finite Lagrangian during training", episode);
      }
      for (std::size_t p = 0; p < theta.size(); ++p) {
        if (!std::isfinite(grad[p])) {
          throw TrainingDiverged("non-finite gradient during training", episode);
        }
        theta[p] -= cfg.learning_rate * grad[p];
      }
      nets.assign(theta);
    }
    const std::vector<ScoreParams> params = emit_params(nets, features);
    for (const ScoreParams& p : params) {
      if (!std::isfinite(p.a) || !std::isfinite(p.b) || !std::isfinite(p.c) ||
          !std::isfinite(p.d)) {
        throw TrainingDiverged("score parameters are not finite", episode);
      }
    }
    const LagrangianValue v = objective.evaluate(params, lambda, cfg.epsilon, false);
    if (!std::isfinite(v.lagrangian)) {
      throw TrainingDiverged("non-finite Lagrangian during training", episode);
    }
    if (v.psi < -revenue_cap) {
      throw TrainingDiverged("expected revenue exceeds the largest bid", episode);
    }
    GroupScoreFunction gsf(params, cfg.base, bids.support());
    if (!scores_monotone(gsf)) {
      throw TrainingDiverged("learned score is not monotone", episode);
    }
    const bool feasible = v.g <= 0.0;
    if (feasible) {
      result.scores = std::move(gsf);
      result.feasible_episode = episode;
    }
    result.curve.push_back({episode, v.psi, v.g, lambda, feasible});
    lambda = std::max(0.0, lambda + dual_rate * v.g);
  }
  return result;
}

TrainingResult dual_ascent_train(const BidProfile& stat_bids, const LearnerConfig& cfg) {
  BuyerSet all(stat_bids.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return dual_ascent_train(stat_bids, all, cfg);
}

double grad_check(const ScoreNetworks& nets, std::span<const double> features,
                  const LotteryObjective& objective, double lambda, double epsilon,
                  std::size_t probe_count, Rng& rng, double step, std::size_t* checked) {
  LagrangianValue base_value;
  const std::vector<double> analytic =
      network_gradient(nets, features, objective, lambda, epsilon, &base_value);
  const std::vector<double> theta = nets.flatten();
  std::vector<signed char> sig0, sig;
  activation_signature(nets, features, sig0);

  // Welfare ordering of the groups decides which pair forms the gap.
  auto order_of = [](const std::vector<double>& w) {
    std::vector<std::size_t> idx(w.size());
    for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = k;
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t x, std::size_t y) { return w[x] < w[y]; });
    return idx;
  };
  const std::vector<std::size_t> order0 = order_of(base_value.group_welfare);

  ScoreNetworks work = nets;
  std::vector<double> moved = theta;
  bool same_regime = true;
  auto lagrangian_at = [&](std::size_t p, double delta) {
    moved[p] = theta[p] + delta;
    work.assign(moved);
    moved[p] = theta[p];
    activation_signature(work, features, sig);
    const LagrangianValue v =
        objective.evaluate(emit_params(work, features), lambda, epsilon, false);
    if (sig != sig0 || order_of(v.group_welfare) != order0) same_regime = false;
    return v.lagrangian;
  };

  double worst = 0.0;
  std::size_t used = 0;
  for (std::size_t t = 0; t < probe_count; ++t) {
    const std::size_t p = static_cast<std::size_t>(rng.next() % theta.size());
    same_regime = true;
    const double p1 = lagrangian_at(p, step), m1 = lagrangian_at(p, -step);
    const double p2 = lagrangian_at(p, 2.0 * step), m2 = lagrangian_at(p, -2.0 * step);
    if (!same_regime) continue;
    // Fourth-order central difference.
    const double fd = (8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * step);
    worst = std::max(worst, std::abs(analytic[p] - fd) / (std::abs(analytic[p]) + 1e-8));
    ++used;
  }
  if (checked != nullptr) *checked = used;
  return worst;
}

}  // namespace fairauction
