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

// File formats.
//
//   bids:     {"support": [lo, hi], "groups": [[b, ...], [b, ...]]}
//   scores:   {"groups": {"1": {"a": .., "b": .., "c": .., "d": ..}, ...},
//              "base": "linear", "support": [lo, hi]}
//   outcome:  {"winner": i | null, "price": p, "allocation": [...],
//              "payments": [...]}
//
// Writers emit reals with 17 significant digits, so files round-trip exactly.
// Parse errors throw ContractViolation.

#ifndef FAIRAUCTION_IO_HPP_
#define FAIRAUCTION_IO_HPP_

#include <string>
#include <string_view>

#include "fairauction/core_model.hpp"
#include "fairauction/gsm.hpp"

namespace fairauction {

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view text);

BidProfile parse_bids_json(std::string_view text);
std::string bids_to_json(const BidProfile& bids);

GroupScoreFunction parse_scores_json(std::string_view text);
std::string scores_to_json(const GroupScoreFunction& gsf);

std::string outcome_to_json(const Outcome& outcome);

// Summary of repeated runs: per-buyer win and payment means with standard
// errors, plus the share of runs won by each group and the no-sale share.
std::string frequencies_to_json(const ExpectedOutcome& freq, const BidProfile& bids,
                                std::size_t repeat);

std::string format_exact(double x);  // %.17g

}  // namespace fairauction

#endif  // FAIRAUCTION_IO_HPP_
