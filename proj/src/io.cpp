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

#include "fairauction/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fairauction/errors.hpp"
#include "json.hpp"

namespace fairauction {

using nlohmann::json;

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ContractViolation("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ContractViolation("cannot write '" + path + "'");
  out << text;
  if (!out) throw ContractViolation("write to '" + path + "' failed");
}

std::string format_exact(double x) {
  if (std::isnan(x)) return "null";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

json parse_json(std::string_view text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ContractViolation(std::string(what) + " is not valid JSON: " + e.what());
  }
}

double number_at(const json& j, std::string_view what) {
  if (!j.is_number()) throw ContractViolation(std::string(what) + " must be a number");
  return j.get<double>();
}

ValuationSupport support_from(const json& doc) {
  if (!doc.contains("support") || !doc["support"].is_array() || doc["support"].size() != 2) {
    throw ContractViolation("'support' must be [lo, hi]");
  }
  return ValuationSupport(number_at(doc["support"][0], "support"),
                          number_at(doc["support"][1], "support"));
}

void append_array(std::string& out, std::span<const double> xs) {
  out += '[';
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    out += format_exact(xs[i]);
  }
  out += ']';
}

}  // namespace

BidProfile parse_bids_json(std::string_view text) {
  const json doc = parse_json(text, "bids file");
  if (!doc.is_object()) throw ContractViolation("bids file must hold a JSON object");
  const ValuationSupport support = support_from(doc);
  if (!doc.contains("groups") || !doc["groups"].is_array() || doc["groups"].empty()) {
    throw ContractViolation("'groups' must be a nonempty array of bid arrays");
  }
  std::vector<std::vector<double>> groups;
  for (const json& g : doc["groups"]) {
    if (!g.is_array()) throw ContractViolation("each group must be an array of bids");
    std::vector<double> bids;
    for (const json& b : g) bids.push_back(number_at(b, "bid"));
    groups.push_back(std::move(bids));
  }
  return BidProfile::from_groups(groups, support);
}

std::string bids_to_json(const BidProfile& bids) {
  std::string out = "{\"support\":[" + format_exact(bids.support().lower()) + "," +
                    format_exact(bids.support().upper()) + "],\"groups\":[";
  for (std::size_t k = 0; k < bids.num_groups(); ++k) {
    if (k) out += ',';
    std::vector<double> g;
    for (std::size_t i : bids.partition().members(k)) g.push_back(bids.bid(i));
    append_array(out, g);
  }
  out += "]}\n";
  return out;
}

GroupScoreFunction parse_scores_json(std::string_view text) {
  const json doc = parse_json(text, "scores file");
  if (!doc.is_object() || !doc.contains("groups") || !doc["groups"].is_object() ||
      !doc.contains("base") || !doc["base"].is_string()) {
    throw ContractViolation("scores file needs 'groups', 'base' and 'support'");
  }
  const json& groups = doc["groups"];
  std::vector<ScoreParams> params(groups.size());
  std::vector<bool> seen(groups.size(), false);
  for (auto it = groups.begin(); it != groups.end(); ++it) {
    std::size_t k = 0;
    try {
      std::size_t used = 0;
      k = static_cast<std::size_t>(std::stoul(it.key(), &used));
      if (used != it.key().size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ContractViolation("score group key '" + it.key() + "' is not a group number");
    }
    if (k < 1 || k > params.size() || seen[k - 1]) {
      throw ContractViolation("score groups must be numbered 1.." +
                              std::to_string(params.size()));
    }
    seen[k - 1] = true;
    const json& p = it.value();
    for (const char* f : {"a", "b", "c", "d"}) {
      if (!p.contains(f)) throw ContractViolation(std::string("score group lacks '") + f + "'");
    }
    params[k - 1] = {number_at(p["a"], "a"), number_at(p["b"], "b"), number_at(p["c"], "c"),
                     number_at(p["d"], "d")};
  }
  return GroupScoreFunction(std::move(params), parse_transform(doc["base"].get<std::string>()),
                            support_from(doc));
}

std::string scores_to_json(const GroupScoreFunction& gsf) {
  std::string out = "{\"groups\":{";
  for (std::size_t k = 0; k < gsf.num_groups(); ++k) {
    const ScoreParams& p = gsf.params(k);
    if (k) out += ',';
    out += "\"" + std::to_string(k + 1) + "\":{\"a\":" + format_exact(p.a) +
           ",\"b\":" + format_exact(p.b) + ",\"c\":" + format_exact(p.c) +
           ",\"d\":" + format_exact(p.d) + "}";
  }
  out += "},\"base\":\"" + std::string(transform_name(gsf.base())) + "\",\"support\":[" +
         format_exact(gsf.support().lower()) + "," + format_exact(gsf.support().upper()) +
         "]}\n";
  return out;
}

std::string outcome_to_json(const Outcome& outcome) {
  std::string out = "{\"winner\":";
  out += outcome.winner() ? std::to_string(*outcome.winner()) : "null";
  out += ",\"price\":" + format_exact(outcome.price()) + ",\"allocation\":[";
  const auto alloc = outcome.allocation();
  for (std::size_t i = 0; i < alloc.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(alloc[i]);
  }
  out += "],\"payments\":";
  append_array(out, outcome.payments());
  out += "}\n";
  return out;
}

std::string frequencies_to_json(const ExpectedOutcome& freq, const BidProfile& bids,
                                std::size_t repeat) {
  const std::size_t m = bids.num_groups();
  std::vector<double> group_freq(m, 0.0);
  double sold = 0.0;
  for (std::size_t i = 0; i < freq.size(); ++i) {
    group_freq[bids.group_of(i)] += freq.win_prob[i];
    sold += freq.win_prob[i];
  }
  // Group shares are means of 0/1 indicators, so their standard errors follow
  // from the binomial variance.
  const double r = static_cast<double>(repeat);
  std::vector<double> group_se(m, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    const double p = group_freq[k];
    group_se[k] = repeat > 1 ? std::sqrt(std::max(0.0, p * (1.0 - p)) / (r - 1.0)) : 0.0;
  }
  const std::vector<double> zeros(freq.size(), 0.0);
  std::string out = "{\"repeat\":" + std::to_string(repeat) + ",\"win_frequency\":";
  append_array(out, freq.win_prob);
  out += ",\"win_frequency_se\":";
  append_array(out, freq.win_prob_stderr ? *freq.win_prob_stderr : zeros);
  out += ",\"mean_payment\":";
  append_array(out, freq.exp_payment);
  out += ",\"mean_payment_se\":";
  append_array(out, freq.payment_stderr ? *freq.payment_stderr : zeros);
  out += ",\"group_frequency\":";
  append_array(out, group_freq);
  out += ",\"group_frequency_se\":";
  append_array(out, group_se);
  out += ",\"no_sale_frequency\":" + format_exact(std::max(0.0, 1.0 - sold)) + "}\n";
  return out;
}

}  // namespace fairauction
