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

#ifndef FAIRAUCTION_ERRORS_HPP_
#define FAIRAUCTION_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fairauction {

// A caller broke a documented precondition (length mismatch, bid outside the
// support, malformed config).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input is well-formed but the mechanism is undefined on it (every score is
// zero, a group's top bid is zero for the simple mechanism).
class DegenerateInput : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A random bidder split left some group empty on the statistics side more
// often than the resampling budget allows.
class ResampleNeeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The group-probability program has no feasible point. Carries the smallest
// epsilon for which it would have one.
class Infeasible : public std::runtime_error {
 public:
  Infeasible(const std::string& what, double min_epsilon)
      : std::runtime_error(what), min_epsilon_(min_epsilon) {}
  double min_epsilon() const noexcept { return min_epsilon_; }

 private:
  double min_epsilon_;
};

class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(const std::string& what, std::size_t episode)
      : std::runtime_error(what), episode_(episode) {}
  std::size_t episode() const noexcept { return episode_; }

 private:
  std::size_t episode_;
};

}  // namespace fairauction

#endif  // FAIRAUCTION_ERRORS_HPP_
