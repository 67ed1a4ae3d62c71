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

#ifndef FAIRAUCTION_SRC_EXPECTATION_ACCUMULATOR_HPP_
#define FAIRAUCTION_SRC_EXPECTATION_ACCUMULATOR_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "fairauction/core_model.hpp"

namespace fairauction::detail {

// Per-buyer running mean and standard error of allocation and payment samples.
class ExpectationAccumulator {
 public:
  explicit ExpectationAccumulator(std::size_t n)
      : alloc_sum_(n, 0.0), alloc_sq_(n, 0.0), pay_sum_(n, 0.0), pay_sq_(n, 0.0) {}

  template <typename Alloc, typename Pay>
  void add(const Alloc& alloc, const Pay& pay) {
    for (std::size_t i = 0; i < alloc_sum_.size(); ++i) {
      const double a = static_cast<double>(alloc[i]);
      const double p = static_cast<double>(pay[i]);
      alloc_sum_[i] += a;
      alloc_sq_[i] += a * a;
      pay_sum_[i] += p;
      pay_sq_[i] += p * p;
    }
    ++count_;
  }

  ExpectedOutcome finish() const {
    const std::size_t n = alloc_sum_.size();
    ExpectedOutcome e;
    e.win_prob.resize(n);
    e.exp_payment.resize(n);
    std::vector<double> alloc_se(n, 0.0), pay_se(n, 0.0);
    const double c = static_cast<double>(count_);
    for (std::size_t i = 0; i < n; ++i) {
      e.win_prob[i] = alloc_sum_[i] / c;
      e.exp_payment[i] = pay_sum_[i] / c;
      if (count_ > 1) {
        alloc_se[i] = stderr_of(alloc_sum_[i], alloc_sq_[i], c);
        pay_se[i] = stderr_of(pay_sum_[i], pay_sq_[i], c);
      }
    }
    e.win_prob_stderr = std::move(alloc_se);
    e.payment_stderr = std::move(pay_se);
    return e;
  }

 private:
  static double stderr_of(double sum, double sq, double c) {
    const double mean = sum / c;
    const double var = std::max(0.0, (sq - c * mean * mean) / (c - 1.0));
    return std::sqrt(var / c);
  }

  std::vector<double> alloc_sum_, alloc_sq_, pay_sum_, pay_sq_;
  std::size_t count_ = 0;
};

}  // namespace fairauction::detail

#endif  // FAIRAUCTION_SRC_EXPECTATION_ACCUMULATOR_HPP_
