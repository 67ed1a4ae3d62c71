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

#include "fairauction/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "fairauction/audit.hpp"
#include "fairauction/baselines.hpp"
#include "fairauction/errors.hpp"
#include "fairauction/gpm.hpp"
#include "fairauction/gsm.hpp"
#include "fairauction/io.hpp"
#include "fairauction/score_learning.hpp"
#include "fairauction/sim_harness.hpp"
#include "expectation_accumulator.hpp"

namespace fairauction {

namespace {

// Training found no fair score function.
class NoSolution : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Found an IC, IR or fairness violation; carries the already-written report.
class PropertyViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LearnerFlags {
  std::string base = "linear";
  std::size_t episodes = LearnerConfig{}.episodes;
  std::size_t sgd_steps = LearnerConfig{}.sgd_steps_per_episode;
  double learning_rate = LearnerConfig{}.learning_rate;
  double dual_learning_rate = LearnerConfig{}.dual_learning_rate;
  std::size_t hidden = LearnerConfig{}.hidden_width;
  std::size_t train_panels = LearnerConfig{}.train_panels;

  void add_to(CLI::App* app) {
    app->add_option("--base", base, "Score base transform: linear, log1p, square, exp");
    app->add_option("--episodes", episodes, "Dual ascent episodes");
    app->add_option("--sgd-steps", sgd_steps, "Gradient steps per episode");
    app->add_option("--learning-rate", learning_rate, "Step size for the network weights");
    app->add_option("--dual-learning-rate", dual_learning_rate,
                    "Step size for the multiplier (0: same as --learning-rate)");
    app->add_option("--hidden", hidden, "Hidden units per network");
    app->add_option("--train-panels", train_panels, "Simpson panels inside the training loss");
  }

  LearnerConfig config(double epsilon, std::uint64_t seed) const {
    LearnerConfig cfg;
    cfg.base = parse_transform(base);
    cfg.episodes = episodes;
    cfg.sgd_steps_per_episode = sgd_steps;
    cfg.learning_rate = learning_rate;
    cfg.dual_learning_rate = dual_learning_rate;
    cfg.hidden_width = hidden;
    cfg.train_panels = train_panels;
    cfg.epsilon = epsilon;
    cfg.seed = seed;
    cfg.validate();
    return cfg;
  }
};

// "U(0,10)/U(0,8)@n1,n2" draws a profile; anything else is a bids file.
BidProfile load_profile(const std::string& spec, std::uint64_t seed) {
  const auto at = spec.find('@');
  if (at != std::string::npos && !std::filesystem::exists(spec)) {
    const std::string dists = spec.substr(0, at);
    const std::string sizes = spec.substr(at + 1);
    const auto slash = dists.find('/');
    const auto comma = sizes.find(',');
    if (slash == std::string::npos || comma == std::string::npos) {
      throw ContractViolation("profile spec must look like U(0,10)/U(0,8)@n1,n2");
    }
    std::size_t n1 = 0, n2 = 0;
    try {
      n1 = std::stoul(sizes.substr(0, comma));
      n2 = std::stoul(sizes.substr(comma + 1));
    } catch (const std::exception&) {
      throw ContractViolation("bad group sizes in profile spec '" + spec + "'");
    }
    Rng rng(derive_seed(seed, {0}));
    return sample_valuations(ValuationSpec::parse(dists.substr(0, slash)),
                             ValuationSpec::parse(dists.substr(slash + 1)), n1, n2, rng);
  }
  return parse_bids_json(read_text_file(spec));
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    write_text_file(path, text);
  }
}

GroupScoreFunction load_scores(const std::string& path, const BidProfile& bids) {
  GroupScoreFunction gsf = parse_scores_json(read_text_file(path));
  if (gsf.num_groups() != bids.num_groups()) {
    throw ContractViolation("scores file has " + std::to_string(gsf.num_groups()) +
                            " groups, bids have " + std::to_string(bids.num_groups()));
  }
  for (double b : bids.bids()) {
    if (!gsf.support().contains(b)) {
      throw ContractViolation("a bid lies outside the score function's support");
    }
  }
  return gsf;
}

// Trains on the statistics side of one split drawn from `seed`.
GroupScoreFunction train_on_split(const BidProfile& bids, const LearnerConfig& cfg,
                                  std::uint64_t seed, std::ostream& err) {
  Rng rng(derive_seed(seed, {1}));
  const BidderSplit split = split_covering_groups(bids.partition(), rng);
  TrainingResult r = dual_ascent_train(bids, split.stat, cfg);
  if (!r.scores) throw NoSolution("training found no score function within epsilon");
  err << "trained scores feasible at episode " << *r.feasible_episode << "\n";
  return std::move(*r.scores);
}

// A bare integer is a point count over the support; anything with '.' or ','
// is an explicit list of reports ("6.0" or "2,4.5,6").
std::vector<double> parse_deviation_grid(const std::string& text,
                                         const ValuationSupport& support) {
  if (text.find_first_of(",.") == std::string::npos) {
    std::size_t used = 0;
    unsigned long count = 0;
    try {
      count = std::stoul(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != text.size()) {
      throw ContractViolation("deviation grid must be a count or a comma list of bids");
    }
    return deviation_grid(support, count);
  }
  std::vector<double> grid;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      grid.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ContractViolation("bad deviation '" + item + "'");
    }
  }
  return grid;
}

// The highest bidders of every group, round robin, up to `max_buyers`: low
// bidders almost never win, so probing them says little.
std::vector<std::size_t> default_probe_buyers(const BidProfile& bids, std::size_t max_buyers) {
  std::vector<std::vector<std::size_t>> ranked(bids.num_groups());
  for (std::size_t k = 0; k < bids.num_groups(); ++k) {
    ranked[k] = bids.partition().members(k);
    std::stable_sort(ranked[k].begin(), ranked[k].end(),
                     [&](std::size_t a, std::size_t b) { return bids.bid(a) > bids.bid(b); });
  }
  std::vector<std::size_t> buyers;
  const std::size_t limit = std::min(bids.size(), std::max<std::size_t>(max_buyers, 1));
  for (std::size_t rank = 0; buyers.size() < limit; ++rank) {
    for (std::size_t k = 0; k < ranked.size() && buyers.size() < limit; ++k) {
      if (rank < ranked[k].size()) buyers.push_back(ranked[k][rank]);
    }
  }
  std::sort(buyers.begin(), buyers.end());
  return buyers;
}

std::string fmt(double x) { return format_real(x); }

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fair single-item auctions: run, train, sweep and audit"};
  app.require_subcommand(1);

  // run-auction
  auto* run = app.add_subcommand("run-auction", "Run one auction on a bids file");
  std::string mechanism;
  std::string bids_file;
  std::optional<double> epsilon;
  std::string scores_file;
  std::uint64_t seed = 0;
  std::string out_path;
  std::size_t repeat = 1;
  std::string tie_break = "lowest";
  LearnerFlags run_learner;
  run->add_option("--mechanism", mechanism, "second-price, simple, gpm or gsm")->required();
  run->add_option("--bids-file", bids_file, "Bids JSON")->required();
  run->add_option("--epsilon", epsilon, "Fairness bound (gpm; gsm without --scores-file)");
  run->add_option("--scores-file", scores_file, "Score JSON for gsm");
  run->add_option("--seed", seed, "Random seed");
  run->add_option("--out", out_path, "Outcome JSON path (default stdout)");
  run->add_option("--repeat", repeat, "Run N times and report frequencies")
      ->check(CLI::PositiveNumber);
  run->add_option("--tie-break", tie_break, "second-price ties: lowest or random");
  run_learner.add_to(run);

  // experiment
  auto* exp = app.add_subcommand("experiment", "Run an experiment grid and write CSV");
  std::string grid_file;
  std::string csv_out;
  std::optional<std::size_t> threads;
  bool timing = false;
  exp->add_option("--grid", grid_file, "Grid JSON")->required();
  exp->add_option("--out", csv_out, "CSV path (default stdout)");
  exp->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  exp->add_flag("--timing", timing, "Fill the wall_ms column");

  // train-scores
  auto* train = app.add_subcommand("train-scores", "Learn group score functions");
  std::string train_profile;
  double train_epsilon = 0.0;
  std::string scores_out;
  std::string curve_out;
  std::uint64_t train_seed = 0;
  LearnerFlags train_learner;
  train->add_option("--bids-file,--profile-spec", train_profile,
                    "Statistics-side bids JSON, or U(lo,hi)/U(lo,hi)@n1,n2")
      ->required();
  train->add_option("--epsilon", train_epsilon, "Fairness bound")->required();
  train->add_option("--out", scores_out, "Score JSON path")->required();
  train->add_option("--curve", curve_out, "Training curve CSV path");
  train->add_option("--seed", train_seed, "Random seed");
  train_learner.add_to(train);

  // verify-ic
  auto* ic = app.add_subcommand("verify-ic", "Audit incentive compatibility by simulation");
  std::string ic_mechanism, ic_profile, ic_grid = "21", ic_scores;
  std::size_t ic_trials = 2000;
  double ic_alpha = 0.00135;
  std::optional<double> ic_epsilon;
  std::uint64_t ic_seed = 0;
  std::vector<std::size_t> ic_buyers;
  std::size_t ic_max_buyers = 10;
  LearnerFlags ic_learner;
  ic->add_option("--mechanism", ic_mechanism, "second-price, simple, gpm or gsm")->required();
  ic->add_option("--profile-spec", ic_profile, "Bids JSON, or U(lo,hi)/U(lo,hi)@n1,n2")
      ->required();
  ic->add_option("--deviation-grid", ic_grid,
                 "Point count over the support, or explicit reports (\"6.0\", \"2,4.5\")");
  ic->add_option("--trials", ic_trials, "Monte Carlo draws per report")
      ->check(CLI::PositiveNumber);
  ic->add_option("--alpha", ic_alpha, "One-sided significance level per comparison");
  ic->add_option("--epsilon", ic_epsilon, "Fairness bound (gpm, gsm)");
  ic->add_option("--scores-file", ic_scores, "Score JSON for gsm");
  ic->add_option("--seed", ic_seed, "Random seed");
  ic->add_option("--buyers", ic_buyers, "Buyers to probe (default: top bidders of each group)")
      ->delimiter(',');
  ic->add_option("--max-buyers", ic_max_buyers, "Probe count when --buyers is absent");
  ic_learner.add_to(ic);

  // verify-fairness
  auto* fair = app.add_subcommand("verify-fairness", "Estimate the group welfare gap");
  std::string fair_mechanism, fair_profile, fair_scores;
  double fair_epsilon = 0.0;
  std::size_t fair_reps = 200;
  double fair_alpha = 0.00135;
  std::uint64_t fair_seed = 0;
  LearnerFlags fair_learner;
  fair->add_option("--mechanism", fair_mechanism, "second-price, simple, gpm or gsm")
      ->required();
  fair->add_option("--profile-spec", fair_profile, "Bids JSON, or U(lo,hi)/U(lo,hi)@n1,n2")
      ->required();
  fair->add_option("--epsilon", fair_epsilon, "Fairness bound")->required();
  fair->add_option("--reps", fair_reps, "Random splits averaged")->check(CLI::PositiveNumber);
  fair->add_option("--alpha", fair_alpha, "One-sided significance level");
  fair->add_option("--scores-file", fair_scores, "Score JSON for gsm");
  fair->add_option("--seed", fair_seed, "Random seed");
  fair_learner.add_to(fair);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (run->parsed()) {
      const BidProfile bids = parse_bids_json(read_text_file(bids_file));
      const Mechanism mech = parse_mechanism(mechanism);
      if (tie_break != "lowest" && tie_break != "random") {
        throw ContractViolation("--tie-break must be lowest or random");
      }
      const TieBreak tb = tie_break == "random" ? TieBreak::kRandom : TieBreak::kLowestIndex;
      if (mech == Mechanism::kGpm && !epsilon) throw ContractViolation("gpm needs --epsilon");
      std::optional<GroupScoreFunction> gsf;
      ScoreTrainer trainer;
      if (mech == Mechanism::kGsm) {
        if (!scores_file.empty()) {
          gsf = load_scores(scores_file, bids);
        } else if (epsilon) {
          const LearnerConfig cfg = run_learner.config(*epsilon, derive_seed(seed, {2}));
          trainer = [cfg](const BidProfile& b, std::span<const std::size_t> stat) {
            TrainingResult r = dual_ascent_train(b, stat, cfg);
            if (!r.scores) throw NoSolution("training found no score function within epsilon");
            return std::move(*r.scores);
          };
        } else {
          throw ContractViolation("gsm needs --scores-file, or --epsilon to train inline");
        }
      }
      auto run_once = [&](Rng& rng) -> Outcome {
        switch (mech) {
          case Mechanism::kSecondPrice: return second_price(bids, tb, &rng);
          case Mechanism::kSimple: return simple_mechanism(bids, rng);
          case Mechanism::kGpm: return gpm_run(bids, *epsilon, rng);
          case Mechanism::kGsm:
            return gsf ? gsm_run(bids, *gsf, rng) : gsm_run(bids, trainer, rng);
        }
        throw ContractViolation("unknown mechanism");
      };
      if (repeat == 1) {
        Rng rng(seed);
        emit(out_path, outcome_to_json(run_once(rng)), out);
      } else {
        detail::ExpectationAccumulator acc(bids.size());
        for (std::size_t r = 0; r < repeat; ++r) {
          Rng rng(derive_seed(seed, {r}));
          const Outcome o = run_once(rng);
          acc.add(o.allocation(), o.payments());
        }
        emit(out_path, frequencies_to_json(acc.finish(), bids, repeat), out);
      }
      return kExitOk;
    }

    if (exp->parsed()) {
      ExperimentGrid grid = parse_grid_json(read_text_file(grid_file));
      grid.timing = timing;
      const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
      const std::size_t n_threads = threads ? *threads : threads_from_env(hw);
      const std::vector<ExperimentRecord> records = run_grid(grid, n_threads);
      std::ostringstream csv;
      write_results_csv(csv, records);
      emit(csv_out, csv.str(), out);
      for (const ExperimentRecord& r : records) {
        if (!r.error.empty()) err << "cell " << r.cell.cell_id << ": " << r.error << "\n";
      }
      return kExitOk;
    }

    if (train->parsed()) {
      const BidProfile bids = load_profile(train_profile, train_seed);
      const LearnerConfig cfg = train_learner.config(train_epsilon, train_seed);
      const TrainingResult r = dual_ascent_train(bids, cfg);
      if (!curve_out.empty()) {
        std::ostringstream csv;
        csv << "episode,psi,g,lambda,feasible\n";
        for (const TrainingPoint& p : r.curve) {
          csv << p.episode << ',' << fmt(p.psi) << ',' << fmt(p.g) << ',' << fmt(p.lambda) << ','
              << (p.feasible ? 1 : 0) << '\n';
        }
        write_text_file(curve_out, csv.str());
      }
      if (!r.scores) throw NoSolution("no episode met the fairness bound");
      write_text_file(scores_out, scores_to_json(*r.scores));
      err << "feasible at episode " << *r.feasible_episode << "\n";
      return kExitOk;
    }

    if (ic->parsed()) {
      const BidProfile bids = load_profile(ic_profile, ic_seed);
      const Mechanism mech = parse_mechanism(ic_mechanism);
      BuyerTermsFn terms;
      switch (mech) {
        case Mechanism::kSecondPrice: terms = second_price_terms(); break;
        case Mechanism::kSimple: terms = simple_terms(); break;
        case Mechanism::kGpm:
          if (!ic_epsilon) throw ContractViolation("gpm needs --epsilon");
          terms = gpm_terms(*ic_epsilon);
          break;
        case Mechanism::kGsm:
          if (!ic_scores.empty()) {
            terms = gsm_terms(load_scores(ic_scores, bids));
          } else if (ic_epsilon) {
            terms = gsm_terms(
                train_on_split(bids, ic_learner.config(*ic_epsilon, ic_seed), ic_seed, err));
          } else {
            throw ContractViolation("gsm needs --scores-file, or --epsilon to train inline");
          }
          break;
      }
      const std::vector<double> grid = parse_deviation_grid(ic_grid, bids.support());
      const std::vector<std::size_t> buyers =
          ic_buyers.empty() ? default_probe_buyers(bids, ic_max_buyers) : ic_buyers;
      const IcReport report = verify_ic(bids, terms, buyers, grid, ic_trials,
                                        derive_seed(ic_seed, {3}), z_for_alpha(ic_alpha));
      out << "buyer,value,truthful_utility,truthful_se,max_gain,gain_se,gain_ci_lo,gain_ci_hi,"
             "at_bid,violation\n";
      for (const IcProbe& p : report.probes) {
        out << p.buyer << ',' << fmt(p.value) << ',' << fmt(p.truthful_utility) << ','
            << fmt(p.truthful_se) << ',' << fmt(p.max_gain) << ',' << fmt(p.gain_se) << ','
            << fmt(p.max_gain - report.z * p.gain_se) << ','
            << fmt(p.max_gain + report.z * p.gain_se) << ',' << fmt(p.worst_bid) << ','
            << ((p.violation || p.ir_violation) ? 1 : 0) << '\n';
      }
      if (report.violation) throw PropertyViolation("incentive compatibility violated");
      return kExitOk;
    }

    if (fair->parsed()) {
      const BidProfile bids = load_profile(fair_profile, fair_seed);
      const Mechanism mech = parse_mechanism(fair_mechanism);
      std::optional<GroupScoreFunction> gsf;
      if (mech == Mechanism::kGsm) {
        gsf = fair_scores.empty()
                  ? train_on_split(bids, fair_learner.config(fair_epsilon, fair_seed), fair_seed,
                                   err)
                  : load_scores(fair_scores, bids);
      }
      const ConditionalOutcome cond =
          conditional_outcome(mech, bids, fair_epsilon, gsf ? &*gsf : nullptr);
      const GapEstimate est = estimate_group_gap(bids, fair_reps, derive_seed(fair_seed, {4}),
                                                 mech == Mechanism::kGpm, cond);
      const double z = z_for_alpha(fair_alpha);
      const double threshold = fair_epsilon + z * est.se;
      out << "group,welfare\n";
      for (std::size_t k = 0; k < est.group_welfare.size(); ++k) {
        out << k + 1 << ',' << fmt(est.group_welfare[k]) << '\n';
      }
      out << "gap,gap_se,epsilon,threshold,violation\n"
          << fmt(est.gap) << ',' << fmt(est.se) << ',' << fmt(fair_epsilon) << ','
          << fmt(threshold) << ',' << (est.gap > threshold ? 1 : 0) << '\n';
      if (est.gap > threshold) throw PropertyViolation("group fairness bound exceeded");
      return kExitOk;
    }
  } catch (const PropertyViolation& e) {
    err << "violation: " << e.what() << "\n";
    return kExitViolation;
  } catch (const NoSolution& e) {
    err << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const Infeasible& e) {
    err << "infeasible: " << e.what() << " (smallest feasible epsilon " << e.min_epsilon()
        << ")\n";
    return kExitInfeasible;
  } catch (const ResampleNeeded& e) {
    err << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const TrainingDiverged& e) {
    err << "diverged at episode " << e.episode() << ": " << e.what() << "\n";
    return kExitDiverged;
  } catch (const ContractViolation& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DegenerateInput& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitConfig;
}

}  // namespace fairauction
