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

#include "fairauction/sim_harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <ostream>
#include <thread>

#include "fairauction/baselines.hpp"
#include "fairauction/errors.hpp"
#include "json.hpp"

namespace fairauction {

namespace {

// Stream tags for derive_seed.
constexpr std::uint64_t kValuationStream = 1;
constexpr std::uint64_t kMechanismStream = 2;
constexpr std::uint64_t kTrainingStream = 3;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

double parse_number(const std::string& s, std::string_view context) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size() || !std::isfinite(v)) {
    throw ContractViolation("bad number '" + s + "' in '" + std::string(context) + "'");
  }
  return v;
}

}  // namespace

ValuationSpec ValuationSpec::uniform(double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi) || lo < 0.0) {
    throw ContractViolation("uniform valuations need 0 <= lo < hi");
  }
  return ValuationSpec(Kind::kUniform, lo, hi);
}

ValuationSpec ValuationSpec::normal(double mean, double sd) {
  if (!std::isfinite(mean) || !std::isfinite(sd) || !(sd > 0.0)) {
    throw ContractViolation("normal valuations need a finite mean and sd > 0");
  }
  if (!(mean + 6.0 * sd > 0.0)) throw ContractViolation("normal valuations lie below 0");
  return ValuationSpec(Kind::kNormal, mean, sd);
}

ValuationSpec ValuationSpec::parse(std::string_view text) {
  const std::string t = trim(text);
  const auto open = t.find('(');
  if (t.size() < 4 || open == std::string::npos || t.back() != ')') {
    throw ContractViolation("valuation spec must look like U(lo,hi) or N(mean,sd): '" + t + "'");
  }
  const std::string kind = trim(std::string_view(t).substr(0, open));
  const std::string body = t.substr(open + 1, t.size() - open - 2);
  const auto sep = body.find_first_of(",;");
  if (sep == std::string::npos) {
    throw ContractViolation("valuation spec needs two parameters: '" + t + "'");
  }
  const double p1 = parse_number(trim(std::string_view(body).substr(0, sep)), t);
  const double p2 = parse_number(trim(std::string_view(body).substr(sep + 1)), t);
  if (kind == "U" || kind == "u") return uniform(p1, p2);
  if (kind == "N" || kind == "n") return normal(p1, p2);
  throw ContractViolation("unknown valuation kind '" + kind + "'");
}

ValuationSupport ValuationSpec::support() const {
  if (kind_ == Kind::kUniform) return ValuationSupport(p1_, p2_);
  return ValuationSupport(std::max(0.0, p1_ - 6.0 * p2_), p1_ + 6.0 * p2_);
}

double ValuationSpec::sample(Rng& rng) const {
  if (kind_ == Kind::kUniform) return rng.uniform(p1_, p2_);
  const ValuationSupport s = support();
  return std::clamp(rng.normal(p1_, p2_), s.lower(), s.upper());
}

std::string ValuationSpec::label() const {
  return std::string(kind_ == Kind::kUniform ? "U(" : "N(") + format_real(p1_) + ";" +
         format_real(p2_) + ")";
}

BidProfile sample_valuations(const ValuationSpec& spec1, const ValuationSpec& spec2,
                             std::size_t n1, std::size_t n2, Rng& rng) {
  if (n1 == 0 || n2 == 0) throw ContractViolation("group sizes must be >= 1");
  const ValuationSupport s1 = spec1.support(), s2 = spec2.support();
  const ValuationSupport hull(std::min(s1.lower(), s2.lower()), std::max(s1.upper(), s2.upper()));
  std::vector<std::vector<double>> groups(2);
  groups[0].reserve(n1);
  groups[1].reserve(n2);
  for (std::size_t i = 0; i < n1; ++i) groups[0].push_back(spec1.sample(rng));
  for (std::size_t i = 0; i < n2; ++i) groups[1].push_back(spec2.sample(rng));
  return BidProfile::from_groups(groups, hull);
}

std::string_view mechanism_name(Mechanism m) {
  switch (m) {
    case Mechanism::kSecondPrice: return "second_price";
    case Mechanism::kSimple: return "simple";
    case Mechanism::kGpm: return "gpm";
    case Mechanism::kGsm: return "gsm";
  }
  return "?";
}

Mechanism parse_mechanism(std::string_view name) {
  if (name == "second_price" || name == "second-price") return Mechanism::kSecondPrice;
  if (name == "simple") return Mechanism::kSimple;
  if (name == "gpm") return Mechanism::kGpm;
  if (name == "gsm") return Mechanism::kGsm;
  throw ContractViolation("unknown mechanism '" + std::string(name) + "'");
}

void ExperimentGrid::validate() const {
  if (group_sizes.empty() || valuations.empty() || epsilons.empty() || bases.empty() ||
      mechanisms.empty()) {
    throw ContractViolation("experiment grid lists must be nonempty");
  }
  if (trials == 0) throw ContractViolation("trials must be >= 1");
  if (gpm_reps == 0) throw ContractViolation("gpm_reps must be >= 1");
  for (const auto& [n1, n2] : group_sizes) {
    if (n1 == 0 || n2 == 0) throw ContractViolation("group sizes must be >= 1");
  }
  for (double e : epsilons) {
    if (!std::isfinite(e) || e < 0.0) throw ContractViolation("epsilons must be >= 0");
  }
  quadrature.validate();
  LearnerConfig probe = learner;
  probe.epsilon = 0.0;
  probe.validate();
}

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, std::initializer_list<std::string_view> known,
                    std::string_view where) {
  if (!obj.is_object()) throw ContractViolation(std::string(where) + " must be a JSON object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) == known.end()) {
      throw ContractViolation("unknown key '" + it.key() + "' in " + std::string(where));
    }
  }
}

template <typename T>
T get_as(const json& j, std::string_view what) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ContractViolation("bad value for '" + std::string(what) + "'");
  }
}

std::size_t get_count(const json& j, std::string_view what) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) {
    throw ContractViolation("'" + std::string(what) + "' must be a nonnegative integer");
  }
  const auto v = j.get<long long>();
  if (v < 0) throw ContractViolation("'" + std::string(what) + "' must be >= 0");
  return static_cast<std::size_t>(v);
}

}  // namespace

ExperimentGrid parse_grid_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ContractViolation(std::string("grid file is not valid JSON: ") + e.what());
  }
  reject_unknown(doc,
                 {"group_sizes", "valuations", "epsilons", "bases", "mechanisms", "trials",
                  "master_seed", "gpm_reps", "learner", "quadrature"},
                 "grid");
  ExperimentGrid g;
  g.bases.clear();
  for (const char* required : {"group_sizes", "valuations", "epsilons", "mechanisms"}) {
    if (!doc.contains(required)) {
      throw ContractViolation(std::string("grid is missing '") + required + "'");
    }
  }
  for (const json& pair : doc["group_sizes"]) {
    if (!pair.is_array() || pair.size() != 2) {
      throw ContractViolation("group_sizes entries must be [n1, n2]");
    }
    g.group_sizes.emplace_back(get_count(pair[0], "group_sizes"), get_count(pair[1], "group_sizes"));
  }
  for (const json& pair : doc["valuations"]) {
    if (!pair.is_array() || pair.size() != 2) {
      throw ContractViolation("valuations entries must be [spec1, spec2]");
    }
    g.valuations.emplace_back(ValuationSpec::parse(get_as<std::string>(pair[0], "valuations")),
                              ValuationSpec::parse(get_as<std::string>(pair[1], "valuations")));
  }
  for (const json& e : doc["epsilons"]) g.epsilons.push_back(get_as<double>(e, "epsilons"));
  if (doc.contains("bases")) {
    for (const json& b : doc["bases"]) {
      g.bases.push_back(parse_transform(get_as<std::string>(b, "bases")));
    }
  } else {
    g.bases.push_back(BaseTransform::kLinear);
  }
  for (const json& m : doc["mechanisms"]) {
    g.mechanisms.push_back(parse_mechanism(get_as<std::string>(m, "mechanisms")));
  }
  if (doc.contains("trials")) g.trials = get_count(doc["trials"], "trials");
  if (doc.contains("master_seed")) {
    g.master_seed = get_as<std::uint64_t>(doc["master_seed"], "master_seed");
  }
  if (doc.contains("gpm_reps")) g.gpm_reps = get_count(doc["gpm_reps"], "gpm_reps");
  if (doc.contains("learner")) {
    const json& l = doc["learner"];
    reject_unknown(l,
                   {"learning_rate", "episodes", "sgd_steps_per_episode", "hidden_width",
                    "dual_learning_rate", "train_panels"},
                   "learner");
    if (l.contains("learning_rate")) {
      g.learner.learning_rate = get_as<double>(l["learning_rate"], "learning_rate");
    }
    if (l.contains("episodes")) g.learner.episodes = get_count(l["episodes"], "episodes");
    if (l.contains("sgd_steps_per_episode")) {
      g.learner.sgd_steps_per_episode =
          get_count(l["sgd_steps_per_episode"], "sgd_steps_per_episode");
    }
    if (l.contains("hidden_width")) {
      g.learner.hidden_width = get_count(l["hidden_width"], "hidden_width");
    }
    if (l.contains("dual_learning_rate")) {
      g.learner.dual_learning_rate = get_as<double>(l["dual_learning_rate"], "dual_learning_rate");
    }
    if (l.contains("train_panels")) {
      g.learner.train_panels = get_count(l["train_panels"], "train_panels");
    }
  }
  if (doc.contains("quadrature")) {
    const json& q = doc["quadrature"];
    reject_unknown(q, {"panels", "abs_tol"}, "quadrature");
    if (q.contains("panels")) g.quadrature.panels = get_count(q["panels"], "panels");
    if (q.contains("abs_tol")) g.quadrature.abs_tol = get_as<double>(q["abs_tol"], "abs_tol");
  }
  g.validate();
  return g;
}

std::vector<CellConfig> expand_grid(const ExperimentGrid& grid) {
  std::vector<CellConfig> cells;
  for (std::size_t si = 0; si < grid.group_sizes.size(); ++si) {
    for (std::size_t vi = 0; vi < grid.valuations.size(); ++vi) {
      for (double eps : grid.epsilons) {
        for (Mechanism mech : grid.mechanisms) {
          CellConfig c;
          c.mechanism = mech;
          c.size_index = si;
          c.valuation_index = vi;
          c.n1 = grid.group_sizes[si].first;
          c.n2 = grid.group_sizes[si].second;
          c.spec1 = grid.valuations[vi].first;
          c.spec2 = grid.valuations[vi].second;
          c.epsilon = eps;
          if (mech == Mechanism::kGsm) {
            for (BaseTransform b : grid.bases) {
              c.base = b;
              c.cell_id = cells.size();
              cells.push_back(c);
            }
          } else {
            c.cell_id = cells.size();
            cells.push_back(c);
          }
        }
      }
    }
  }
  return cells;
}

namespace {

struct TrialMetrics {
  enum class Status { kOk, kInfeasible, kError } status = Status::kOk;
  double sw = 0.0, rv = 0.0, gap = 0.0, ef = 0.0;
  std::string error;
  double ms = 0.0;
};

TrialMetrics metrics_of(const ExpectedOutcome& e, const BidProfile& bids) {
  TrialMetrics m;
  m.sw = expected_social_welfare(e, bids.bids());
  m.rv = expected_revenue(e);
  m.gap = group_fairness_gap(group_welfares(e, bids.bids(), bids.partition()));
  m.ef = individual_fairness(e, bids.bids(), bids.partition());
  return m;
}

TrialMetrics run_trial(const ExperimentGrid& grid, const CellConfig& cell, std::size_t trial) {
  const auto start = std::chrono::steady_clock::now();
  TrialMetrics out;
  try {
    Rng val_rng(derive_seed(grid.master_seed,
                            {kValuationStream, cell.size_index, cell.valuation_index, trial}));
    const BidProfile bids = sample_valuations(cell.spec1, cell.spec2, cell.n1, cell.n2, val_rng);
    Rng mech_rng(derive_seed(grid.master_seed,
                             {kMechanismStream, cell.size_index, cell.valuation_index, trial}));
    switch (cell.mechanism) {
      case Mechanism::kSecondPrice:
        out = metrics_of(second_price_expected(bids), bids);
        break;
      case Mechanism::kSimple:
        out = metrics_of(simple_expected(bids), bids);
        break;
      case Mechanism::kGpm:
        out = metrics_of(gpm_expected(bids, cell.epsilon, grid.gpm_reps, mech_rng,
                                      GpmEstimator::kSplitConditional),
                         bids);
        break;
      case Mechanism::kGsm: {
        const BidderSplit split = split_covering_groups(bids.partition(), mech_rng);
        LearnerConfig cfg = grid.learner;
        cfg.base = cell.base.value_or(BaseTransform::kLinear);
        cfg.epsilon = cell.epsilon;
        cfg.seed = derive_seed(grid.master_seed,
                               {kTrainingStream, cell.size_index, cell.valuation_index, trial});
        const TrainingResult trained = dual_ascent_train(bids, split.stat, cfg);
        if (!trained.scores) {
          out.status = TrialMetrics::Status::kInfeasible;
          break;
        }
        out = metrics_of(
            gsm_conditional_expected(bids, *trained.scores, split.auction_side, grid.quadrature),
            bids);
        break;
      }
    }
  } catch (const Infeasible& e) {
    out.status = TrialMetrics::Status::kInfeasible;
    out.error = e.what();
  } catch (const ResampleNeeded& e) {
    out.status = TrialMetrics::Status::kInfeasible;
    out.error = e.what();
  } catch (const std::exception& e) {
    out.status = TrialMetrics::Status::kError;
    out.error = e.what();
  }
  if (grid.timing) {
    out.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                 .count();
  }
  return out;
}

MeanSe mean_se(const std::vector<double>& xs) {
  MeanSe r;
  if (xs.empty()) {
    r.mean = r.se = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
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

ExperimentRecord aggregate(const CellConfig& cell, const std::vector<TrialMetrics>& trials) {
  ExperimentRecord rec;
  rec.cell = cell;
  std::vector<double> sw, rv, gap, ef;
  for (const TrialMetrics& t : trials) {
    rec.wall_ms += t.ms;
    if (t.status == TrialMetrics::Status::kInfeasible) rec.infeasible = true;
    if (t.status != TrialMetrics::Status::kOk) {
      if (rec.error.empty()) rec.error = t.error;
      continue;
    }
    sw.push_back(t.sw);
    rv.push_back(t.rv);
    gap.push_back(t.gap);
    ef.push_back(t.ef);
  }
  rec.trials = sw.size();
  rec.social_welfare = mean_se(sw);
  rec.revenue = mean_se(rv);
  rec.gap = mean_se(gap);
  rec.individual_fairness = mean_se(ef);
  return rec;
}

}  // namespace

ExperimentRecord run_cell(const ExperimentGrid& grid, const CellConfig& cell) {
  grid.validate();
  std::vector<TrialMetrics> trials;
  trials.reserve(grid.trials);
  for (std::size_t t = 0; t < grid.trials; ++t) trials.push_back(run_trial(grid, cell, t));
  return aggregate(cell, trials);
}

std::vector<ExperimentRecord> run_grid(const ExperimentGrid& grid, std::size_t parallelism) {
  grid.validate();
  if (parallelism == 0) throw ContractViolation("parallelism must be >= 1");
  const std::vector<CellConfig> cells = expand_grid(grid);
  const std::size_t units = cells.size() * grid.trials;
  std::vector<TrialMetrics> results(units);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t u = next.fetch_add(1); u < units; u = next.fetch_add(1)) {
      results[u] = run_trial(grid, cells[u / grid.trials], u % grid.trials);
    }
  };
  const std::size_t threads = std::min(parallelism, std::max<std::size_t>(units, 1));
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  std::vector<ExperimentRecord> records;
  records.reserve(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const std::vector<TrialMetrics> slice(results.begin() + c * grid.trials,
                                          results.begin() + (c + 1) * grid.trials);
    records.push_back(aggregate(cells[c], slice));
  }
  return records;
}

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

void write_results_csv(std::ostream& out, const std::vector<ExperimentRecord>& records) {
  out << "cell_id,mechanism,n1,n2,dist1,dist2,epsilon,base,trials,sw_mean,sw_se,rv_mean,rv_se,"
         "gap_mean,gap_se,ef_mean,ef_se,infeasible,wall_ms\n";
  for (const ExperimentRecord& r : records) {
    const CellConfig& c = r.cell;
    out << c.cell_id << ',' << mechanism_name(c.mechanism) << ',' << c.n1 << ',' << c.n2 << ','
        << c.spec1.label() << ',' << c.spec2.label() << ',' << format_real(c.epsilon) << ','
        << (c.base ? transform_name(*c.base) : std::string_view("-")) << ',' << r.trials << ','
        << format_real(r.social_welfare.mean) << ',' << format_real(r.social_welfare.se) << ','
        << format_real(r.revenue.mean) << ',' << format_real(r.revenue.se) << ','
        << format_real(r.gap.mean) << ',' << format_real(r.gap.se) << ','
        << format_real(r.individual_fairness.mean) << ','
        << format_real(r.individual_fairness.se) << ',' << (r.infeasible ? 1 : 0) << ','
        << format_real(r.wall_ms) << '\n';
  }
}

GapEstimate estimate_group_gap(const BidProfile& bids, std::size_t reps, std::uint64_t seed,
                               bool cover_groups, const ConditionalOutcome& conditional) {
  if (reps == 0) throw ContractViolation("gap estimate needs at least one repetition");
  const std::size_t m = bids.num_groups();
  std::vector<std::vector<double>> per_rep;
  per_rep.reserve(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    Rng rng(derive_seed(seed, {r}));
    const BidderSplit split = cover_groups ? split_covering_groups(bids.partition(), rng)
                                           : split_bidders(bids.size(), rng);
    per_rep.push_back(group_welfares(conditional(split), bids.bids(), bids.partition()));
  }
  GapEstimate est;
  est.reps = reps;
  est.group_welfare.assign(m, 0.0);
  for (const auto& w : per_rep) {
    for (std::size_t k = 0; k < m; ++k) est.group_welfare[k] += w[k];
  }
  for (double& w : est.group_welfare) w /= static_cast<double>(reps);
  std::size_t hi = 0, lo = 0;
  for (std::size_t k = 0; k < m; ++k) {
    if (est.group_welfare[k] > est.group_welfare[hi]) hi = k;
    if (est.group_welfare[k] < est.group_welfare[lo]) lo = k;
  }
  est.gap = est.group_welfare[hi] - est.group_welfare[lo];
  if (reps > 1 && hi != lo) {
    std::vector<double> diffs;
    diffs.reserve(reps);
    for (const auto& w : per_rep) diffs.push_back(w[hi] - w[lo]);
    est.se = mean_se(diffs).se;
  }
  return est;
}

std::size_t threads_from_env(std::size_t fallback) {
  const char* v = std::getenv("FAIRAUCTION_THREADS");
  if (v == nullptr || *v == '\0') return fallback;
  char* end = nullptr;
  const long long n = std::strtoll(v, &end, 10);
  if (end == v || *end != '\0' || n < 1) return fallback;
  return static_cast<std::size_t>(n);
}

}  // namespace fairauction
