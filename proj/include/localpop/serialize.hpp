#pragma once

// JSON debug dumps and record parsers.
//
// Ground truths and observations serialize to a small JSON debug format
// (every index 0-based); observation rows are strings over '0', '1', '*'.
// The CSV parsers here are exact inverses of the writers in harness.hpp and
// movielens.hpp: parsing an emitted record and re-serializing it reproduces
// the original bytes, because doubles are printed in shortest round-trip
// form on both sides. All JSON uses insertion-ordered keys so that a
// parse/re-dump cycle is also byte-stable.

#include <charconv>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "localpop/channel.hpp"
#include "localpop/filter.hpp"
#include "localpop/harness.hpp"
#include "localpop/movielens.hpp"

namespace localpop {

using ojson = nlohmann::ordered_json;

// ------------------------------------------------------------ json dumps --

inline ojson truth_to_json(const GroundTruth& gt) {
  ojson j;
  j["n"] = gt.n;
  j["r"] = gt.r;
  ojson blocks = ojson::array();
  for (std::int64_t a = 0; a < gt.r; ++a) {
    ojson row = ojson::array();
    for (std::int64_t b = 0; b < gt.r; ++b) row.push_back(static_cast<int>(gt.block_value(a, b)));
    blocks.push_back(std::move(row));
  }
  j["block_values"] = std::move(blocks);
  j["row_block"] = gt.row_block;
  j["col_block"] = gt.col_block;
  return j;
}

inline GroundTruth truth_from_json(const ojson& j) {
  GroundTruth gt;
  gt.n = j.at("n").get<std::int64_t>();
  gt.r = j.at("r").get<std::int64_t>();
  if (gt.r <= 0 || gt.n <= 0 || gt.n % gt.r != 0)
    throw std::invalid_argument("truth_from_json: n divisible by r violated");
  gt.k = gt.n / gt.r;
  const auto& blocks = j.at("block_values");
  if (static_cast<std::int64_t>(blocks.size()) != gt.r)
    throw std::invalid_argument("truth_from_json: block_values is r x r violated");
  gt.block_values.reserve(static_cast<std::size_t>(gt.r * gt.r));
  for (const auto& row : blocks) {
    if (static_cast<std::int64_t>(row.size()) != gt.r)
      throw std::invalid_argument("truth_from_json: block_values is r x r violated");
    for (const auto& v : row) {
      int bit = v.get<int>();
      if (bit != 0 && bit != 1)
        throw std::invalid_argument("truth_from_json: block value in {0,1} violated");
      gt.block_values.push_back(static_cast<std::uint8_t>(bit));
    }
  }
  gt.row_block = j.at("row_block").get<std::vector<std::int32_t>>();
  gt.col_block = j.at("col_block").get<std::vector<std::int32_t>>();
  if (static_cast<std::int64_t>(gt.row_block.size()) != gt.n ||
      static_cast<std::int64_t>(gt.col_block.size()) != gt.n)
    throw std::invalid_argument("truth_from_json: assignment length n violated");
  for (std::int32_t b : gt.row_block)
    if (b < 0 || b >= gt.r) throw std::invalid_argument("truth_from_json: row_block range violated");
  for (std::int32_t b : gt.col_block)
    if (b < 0 || b >= gt.r) throw std::invalid_argument("truth_from_json: col_block range violated");
  return gt;
}

inline ojson observation_to_json(const Observation& obs) {
  ojson j;
  j["n"] = obs.n();
  ojson rows = ojson::array();
  std::string line;
  for (std::int64_t i = 0; i < obs.n(); ++i) {
    line.clear();
    for (std::int64_t c = 0; c < obs.n(); ++c) {
      switch (obs.at(i, c)) {
        case Ternary::Zero: line += '0'; break;
        case Ternary::One: line += '1'; break;
        default: line += '*'; break;
      }
    }
    rows.push_back(line);
  }
  j["rows"] = std::move(rows);
  return j;
}

inline Observation observation_from_json(const ojson& j) {
  auto n = j.at("n").get<std::int64_t>();
  Observation obs(n);
  const auto& rows = j.at("rows");
  if (static_cast<std::int64_t>(rows.size()) != n)
    throw std::invalid_argument("observation_from_json: rows length n violated");
  for (std::int64_t i = 0; i < n; ++i) {
    const auto& s = rows[static_cast<std::size_t>(i)].get_ref<const std::string&>();
    if (static_cast<std::int64_t>(s.size()) != n)
      throw std::invalid_argument("observation_from_json: row length n violated");
    for (std::int64_t c = 0; c < n; ++c) {
      switch (s[static_cast<std::size_t>(c)]) {
        case '0': obs.set(i, c, Ternary::Zero); break;
        case '1': obs.set(i, c, Ternary::One); break;
        case '*': break;
        default:
          throw std::invalid_argument("observation_from_json: characters in 01* violated");
      }
    }
  }
  return obs;
}

inline ojson trace_to_json(const RecommendationTrace& tr, bool recommended = true) {
  ojson j;
  j["target"] = tr.target;
  if (recommended)
    j["chosen"] = tr.chosen_column;
  else
    j["chosen"] = nullptr;
  j["purity"] = tr.purity;
  j["ones"] = tr.ones_count;
  j["zeros"] = tr.zeros_count;
  j["top"] = tr.top_set;
  return j;
}

// ------------------------------------------------------------ json mirror --

inline ojson sweep_point_to_json(const SweepPoint& pt, std::uint64_t seed_master) {
  ojson j;
  j["n"] = pt.n;
  j["k"] = pt.k;
  j["r"] = pt.r;
  j["alpha"] = pt.alpha;
  j["c"] = pt.c;
  j["gamma"] = pt.gamma;
  j["p"] = pt.p;
  j["epsilon"] = pt.epsilon;
  j["T"] = pt.T;
  j["trials"] = pt.stats.est.trials;
  j["errors"] = pt.stats.est.errors;
  j["skipped"] = pt.stats.est.skipped;
  j["ber"] = pt.stats.est.ber;
  j["ci_low"] = pt.stats.est.ci_low;
  j["ci_high"] = pt.stats.est.ci_high;
  j["purity_mean"] = pt.stats.purity_mean;
  j["purity_all_good"] = pt.stats.purity_all_good;
  j["ones_mean"] = pt.stats.ones_mean;
  j["zeros_mean"] = pt.stats.zeros_mean;
  j["lower_bound"] = pt.lower_bound;
  j["seed"] = seed_master;
  j["status"] = pt.status;
  return j;
}

inline ojson sweep_to_json(const std::vector<SweepPoint>& points, std::uint64_t seed_master) {
  ojson arr = ojson::array();
  for (const auto& pt : points) arr.push_back(sweep_point_to_json(pt, seed_master));
  return arr;
}

inline ojson eval_report_to_json(const EvalReport& rep) {
  ojson j;
  j["T"] = rep.T;
  j["test_pairs"] = rep.test_pairs;
  j["predicted"] = rep.predicted;
  j["abstained"] = rep.abstained;
  j["errors"] = rep.errors;
  j["ber"] = rep.ber;
  j["baseline_ber"] = rep.baseline_ber;
  j["seed"] = rep.seed.master;
  return j;
}

// ------------------------------------------------------------- csv parse --

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    std::size_t comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
}

template <typename Num>
Num parse_num(std::string_view s, const char* what) {
  Num v{};
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::invalid_argument(std::string("csv parse: bad ") + what);
  return v;
}

}  // namespace detail

struct ParsedSweep {
  std::vector<SweepPoint> points;
  std::uint64_t seed_master = 0;
};

inline ParsedSweep parse_sweep_csv(std::string_view text) {
  ParsedSweep out;
  std::size_t pos = 0;
  bool first = true;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() : eol + 1;
    if (line.empty()) continue;
    if (first) {
      if (line != kSweepCsvHeader)
        throw std::invalid_argument("parse_sweep_csv: unrecognized header");
      first = false;
      continue;
    }
    auto f = detail::split_fields(line);
    if (f.size() != 22) throw std::invalid_argument("parse_sweep_csv: field count violated");
    SweepPoint pt;
    pt.n = detail::parse_num<std::int64_t>(f[0], "n");
    pt.k = detail::parse_num<std::int64_t>(f[1], "k");
    pt.r = detail::parse_num<std::int64_t>(f[2], "r");
    pt.alpha = detail::parse_num<double>(f[3], "alpha");
    pt.c = detail::parse_num<double>(f[4], "c");
    pt.gamma = detail::parse_num<double>(f[5], "gamma");
    pt.p = detail::parse_num<double>(f[6], "p");
    pt.epsilon = detail::parse_num<double>(f[7], "epsilon");
    pt.T = detail::parse_num<std::int64_t>(f[8], "T");
    pt.stats.est.trials = detail::parse_num<std::int64_t>(f[9], "trials");
    pt.stats.est.errors = detail::parse_num<std::int64_t>(f[10], "errors");
    pt.stats.est.skipped = detail::parse_num<std::int64_t>(f[11], "skipped");
    pt.stats.est.ber = detail::parse_num<double>(f[12], "ber");
    pt.stats.est.ci_low = detail::parse_num<double>(f[13], "ci_low");
    pt.stats.est.ci_high = detail::parse_num<double>(f[14], "ci_high");
    pt.stats.purity_mean = detail::parse_num<double>(f[15], "purity_mean");
    pt.stats.purity_all_good = detail::parse_num<double>(f[16], "purity_all_good");
    pt.stats.ones_mean = detail::parse_num<double>(f[17], "ones_mean");
    pt.stats.zeros_mean = detail::parse_num<double>(f[18], "zeros_mean");
    pt.lower_bound = detail::parse_num<double>(f[19], "lower_bound");
    out.seed_master = detail::parse_num<std::uint64_t>(f[20], "seed");
    pt.status = std::string(f[21]);
    out.points.push_back(std::move(pt));
  }
  if (first) throw std::invalid_argument("parse_sweep_csv: empty input");
  return out;
}

inline EvalReport parse_eval_csv(std::string_view text) {
  std::size_t eol = text.find('\n');
  if (eol == std::string_view::npos || text.substr(0, eol) != kEvalCsvHeader)
    throw std::invalid_argument("parse_eval_csv: unrecognized header");
  std::string_view rest = text.substr(eol + 1);
  std::size_t end = rest.find('\n');
  std::string_view line = end == std::string_view::npos ? rest : rest.substr(0, end);
  auto f = detail::split_fields(line);
  if (f.size() != 8) throw std::invalid_argument("parse_eval_csv: field count violated");
  EvalReport rep;
  rep.T = detail::parse_num<std::int64_t>(f[0], "T");
  rep.test_pairs = detail::parse_num<std::int64_t>(f[1], "test_pairs");
  rep.predicted = detail::parse_num<std::int64_t>(f[2], "predicted");
  rep.abstained = detail::parse_num<std::int64_t>(f[3], "abstained");
  rep.errors = detail::parse_num<double>(f[4], "errors");
  rep.ber = detail::parse_num<double>(f[5], "ber");
  rep.baseline_ber = detail::parse_num<double>(f[6], "baseline_ber");
  rep.seed = Seed{detail::parse_num<std::uint64_t>(f[7], "seed"), 0};
  return rep;
}

}  // namespace localpop
