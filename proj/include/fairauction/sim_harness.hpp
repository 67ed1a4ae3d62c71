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

// Valuation sampling, experiment grids and metric aggregation.
//
// Randomness is keyed by position, not by schedule: the valuations of trial t
// depend only on (master seed, size index, valuation index, t), so every
// mechanism, epsilon and base in a grid sees the same profiles, and the
// mechanism's own draws do not depend on epsilon either. Results are therefore
// identical for any thread count.

#ifndef FAIRAUCTION_SIM_HARNESS_HPP_
#define FAIRAUCTION_SIM_HARNESS_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fairauction/core_model.hpp"
#include "fairauction/gpm.hpp"
#include "fairauction/gsm.hpp"
#include "fairauction/rng.hpp"
#include "fairauction/score_learning.hpp"

namespace fairauction {

class ValuationSpec {
 public:
  enum class Kind { kUniform, kNormal };

  static ValuationSpec uniform(double lo, double hi);
  static ValuationSpec normal(double mean, double sd);
  // "U(lo,hi)" or "N(mean,sd)"; ';' is accepted in place of ','.
  static ValuationSpec parse(std::string_view text);

  Kind kind() const noexcept { return kind_; }
  // Uniform: [lo, hi]. Normal: [max(0, mean - 6 sd), mean + 6 sd]; draws are
  // clamped into it.
  ValuationSupport support() const;
  double sample(Rng& rng) const;
  // "U(0;10)", "N(5;1)": no commas, so it can sit in a CSV field.
  std::string label() const;

  friend bool operator==(const ValuationSpec&, const ValuationSpec&) = default;

 private:
  ValuationSpec(Kind kind, double p1, double p2) : kind_(kind), p1_(p1), p2_(p2) {}

  Kind kind_;
  double p1_;
  double p2_;
};

// Two groups of sizes n1, n2; the declared support is the hull of both specs.
BidProfile sample_valuations(const ValuationSpec& spec1, const ValuationSpec& spec2,
                             std::size_t n1, std::size_t n2, Rng& rng);

enum class Mechanism { kSecondPrice, kSimple, kGpm, kGsm };

std::string_view mechanism_name(Mechanism m);
// "second_price" / "second-price", "simple", "gpm", "gsm".
Mechanism parse_mechanism(std::string_view name);

struct ExperimentGrid {
  std::vector<std::pair<std::size_t, std::size_t>> group_sizes;
  std::vector<std::pair<ValuationSpec, ValuationSpec>> valuations;
  std::vector<double> epsilons;
  std::vector<BaseTransform> bases{BaseTransform::kLinear};
  std::vector<Mechanism> mechanisms;
  std::size_t trials = 100;
  std::uint64_t master_seed = 0;

  // Random splits averaged per profile for GPM metrics.
  std::size_t gpm_reps = 200;
  // Training settings for GSM; base, epsilon and seed are set per cell.
  LearnerConfig learner;
  QuadratureSpec quadrature;
  // Record wall time per cell. Off by default so result files are
  // reproducible byte for byte.
  bool timing = false;

  void validate() const;
};

// Parses the JSON grid format; unknown keys are rejected with
// ContractViolation.
ExperimentGrid parse_grid_json(std::string_view text);

struct CellConfig {
  std::size_t cell_id = 0;
  Mechanism mechanism = Mechanism::kSecondPrice;
  std::size_t size_index = 0;
  std::size_t valuation_index = 0;
  std::size_t n1 = 0, n2 = 0;
  ValuationSpec spec1 = ValuationSpec::uniform(0.0, 1.0);
  ValuationSpec spec2 = ValuationSpec::uniform(0.0, 1.0);
  double epsilon = 0.0;
  // Only GSM cells depend on a base transform.
  std::optional<BaseTransform> base;
};

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

struct ExperimentRecord {
  CellConfig cell;
  std::size_t trials = 0;  // trials that contributed to the means
  MeanSe social_welfare, revenue, gap, individual_fairness;
  bool infeasible = false;  // some trial had no feasible solution
  double wall_ms = 0.0;
  std::string error;  // first failure message, empty if none
};

// Cells in output order: sizes x valuations x epsilons x mechanisms, with a
// GSM cell per base and one cell for every other mechanism.
std::vector<CellConfig> expand_grid(const ExperimentGrid& grid);

ExperimentRecord run_cell(const ExperimentGrid& grid, const CellConfig& cell);
std::vector<ExperimentRecord> run_grid(const ExperimentGrid& grid, std::size_t parallelism);

void write_results_csv(std::ostream& out, const std::vector<ExperimentRecord>& records);
std::string format_real(double x);

// Group welfare gap of a mechanism averaged over random bidder splits, with
// the standard error of the attaining pair's welfare difference.
struct GapEstimate {
  std::vector<double> group_welfare;
  double gap = 0.0;
  double se = 0.0;
  std::size_t reps = 0;
};

using ConditionalOutcome = std::function<ExpectedOutcome(const BidderSplit&)>;

GapEstimate estimate_group_gap(const BidProfile& bids, std::size_t reps, std::uint64_t seed,
                               bool cover_groups, const ConditionalOutcome& conditional);

// Reads FAIRAUCTION_THREADS; falls back to `fallback` when unset or invalid.
std::size_t threads_from_env(std::size_t fallback);

}  // namespace fairauction

#endif  // FAIRAUCTION_SIM_HARNESS_HPP_
