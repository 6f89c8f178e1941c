#pragma once

// Movielens-format ingestion and real-data evaluation.
//
// Input is the classic ml-100k `u.data` layout: one rating per line,
// "user_id<TAB>item_id<TAB>rating<TAB>timestamp", LF or CRLF. Ratings are
// quantized to bits (4,5 -> 1; 1,2,3 -> 0), ids are remapped densely with
// the original ids retained, and a uniformly random test fraction of rated
// pairs is held out. Evaluation generalizes the recommender's column vote
// to per-entry prediction: for each held-out (user, item) the majority
// quantized value of that item among the user's top-T most similar training
// rows is predicted; pairs with no voting data abstain and are excluded
// from the error denominator. A global-popularity baseline (majority value
// of the item over all training users) is scored on the same predicted set.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

#include "localpop/channel.hpp"
#include "localpop/filter.hpp"
#include "localpop/harness.hpp"

namespace localpop {

// ------------------------------------------------------------------ table --

struct RatingsTable {
  struct Entry {
    std::int32_t user = 0;  // dense index
    std::int32_t item = 0;  // dense index
    std::int32_t rating = 0;
    std::int64_t timestamp = 0;
  };
  std::int32_t num_users = 0;
  std::int32_t num_items = 0;
  std::vector<Entry> entries;
  std::vector<std::int32_t> user_ids;  // dense -> original
  std::vector<std::int32_t> item_ids;
};

struct MlParseError : std::runtime_error {
  explicit MlParseError(const std::string& what) : std::runtime_error(what) {}
};

inline int quantize(int rating) {
  if (rating < 1 || rating > 5)
    throw std::invalid_argument("quantize: rating in 1..5 violated");
  return rating >= 4 ? 1 : 0;
}

inline RatingsTable load_ml100k(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MlParseError("load_ml100k: cannot open " + path);
  RatingsTable table;
  std::unordered_map<std::int32_t, std::int32_t> umap, imap;
  std::unordered_set<std::uint64_t> seen;
  std::string line;
  std::int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::int64_t fields[4];
    std::size_t pos = 0;
    bool ok = true;
    for (int f = 0; f < 4 && ok; ++f) {
      std::size_t end = (f < 3) ? line.find('\t', pos) : line.size();
      if (f < 3 && end == std::string::npos) {
        ok = false;
        break;
      }
      try {
        std::size_t used = 0;
        fields[f] = std::stoll(line.substr(pos, end - pos), &used);
        if (used != end - pos) ok = false;
      } catch (...) {
        ok = false;
      }
      pos = end + 1;
    }
    if (!ok)
      throw MlParseError("load_ml100k: malformed line " + std::to_string(lineno));
    if (fields[2] < 1 || fields[2] > 5)
      throw MlParseError("load_ml100k: rating outside 1..5 at line " +
                         std::to_string(lineno));
    auto uid = static_cast<std::int32_t>(fields[0]);
    auto iid = static_cast<std::int32_t>(fields[1]);
    auto [uit, unew] = umap.try_emplace(uid, table.num_users);
    if (unew) {
      ++table.num_users;
      table.user_ids.push_back(uid);
    }
    auto [iit, inew] = imap.try_emplace(iid, table.num_items);
    if (inew) {
      ++table.num_items;
      table.item_ids.push_back(iid);
    }
    std::uint64_t key = (static_cast<std::uint64_t>(uit->second) << 32) |
                        static_cast<std::uint32_t>(iit->second);
    if (!seen.insert(key).second)
      throw MlParseError("load_ml100k: duplicate (user, item) at line " +
                         std::to_string(lineno));
    table.entries.push_back({uit->second, iit->second,
                             static_cast<std::int32_t>(fields[2]), fields[3]});
  }
  return table;
}

// ------------------------------------------------------------------ split --

struct TestPair {
  std::int32_t user = 0;
  std::int32_t item = 0;
  int truth = 0;  // quantized held-out value
};

struct SplitResult {
  Observation train;  // square n = max(users, items); absent entries erased
  std::vector<TestPair> test;
  std::int32_t num_users = 0;
  std::int32_t num_items = 0;
};

inline SplitResult split(const RatingsTable& table, double test_fraction, Seed seed) {
  if (table.entries.empty()) throw std::invalid_argument("split: table non-empty violated");
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw std::invalid_argument("split: test_fraction in (0, 1) violated");
  const auto m = static_cast<std::int64_t>(table.entries.size());
  auto n_test = static_cast<std::int64_t>(test_fraction * static_cast<double>(m));
  if (n_test < 1) throw std::invalid_argument("split: test_fraction yields zero test pairs");

  std::vector<std::int64_t> order(static_cast<std::size_t>(m));
  for (std::int64_t i = 0; i < m; ++i) order[static_cast<std::size_t>(i)] = i;
  Rng rng(seed);
  rng.shuffle(order);

  SplitResult res;
  res.num_users = table.num_users;
  res.num_items = table.num_items;
  std::int64_t side = std::max(table.num_users, table.num_items);
  res.train.reset(side);
  std::vector<char> is_test(static_cast<std::size_t>(m), 0);
  for (std::int64_t t = 0; t < n_test; ++t)
    is_test[static_cast<std::size_t>(order[static_cast<std::size_t>(t)])] = 1;
  res.test.reserve(static_cast<std::size_t>(n_test));
  for (std::int64_t i = 0; i < m; ++i) {
    const auto& e = table.entries[static_cast<std::size_t>(i)];
    int bit = quantize(e.rating);
    if (is_test[static_cast<std::size_t>(i)]) {
      res.test.push_back({e.user, e.item, bit});
    } else {
      res.train.set(e.user, e.item, bit ? Ternary::One : Ternary::Zero);
    }
  }
  return res;
}

// --------------------------------------------------------------- evaluate --

struct EvalReport {
  std::int64_t test_pairs = 0;
  std::int64_t predicted = 0;
  std::int64_t abstained = 0;
  double errors = 0.0;  // half-integral under ExpectedOverTies
  double ber = 0.0;
  double baseline_ber = 0.0;
  std::int64_t T = 0;
  Seed seed;  // echoed split/tie seed for the report
};

namespace detail {

// Majority vote -> predicted bit, or tie handling per policy. Returns the
// error weight against `truth` in half units.
inline std::int64_t vote_error2(std::int64_t ones, std::int64_t zeros, int truth,
                                const TiePolicy& tie, std::uint64_t tie_salt) {
  int pred;
  if (ones > zeros)
    pred = 1;
  else if (zeros > ones)
    pred = 0;
  else if (std::holds_alternative<ExpectedOverTies>(tie))
    return 1;  // half an error either way
  else if (const auto* rs = std::get_if<RandomSeeded>(&tie))
    pred = static_cast<int>(Rng(Seed{rs->seed, tie_salt}).next() & 1ULL);
  else
    pred = 0;  // LowestIndex: deterministic low value
  return pred == truth ? 0 : 2;
}

}  // namespace detail

inline EvalReport evaluate(const Observation& train, const std::vector<TestPair>& test,
                           std::int64_t T, const TiePolicy& tie) {
  if (T < 1) throw std::invalid_argument("evaluate: T >= 1 violated");
  EvalReport rep;
  rep.T = T;
  rep.test_pairs = static_cast<std::int64_t>(test.size());

  // Global per-item vote counts over all training rows.
  const std::int64_t side = train.n();
  std::vector<std::int32_t> g_ones(static_cast<std::size_t>(side), 0);
  std::vector<std::int32_t> g_total(static_cast<std::size_t>(side), 0);
  for (std::int64_t i = 0; i < side; ++i) {
    const std::uint64_t* sr = train.sampled_row(i);
    const std::uint64_t* vr = train.values_row(i);
    for (std::int64_t w = 0; w < train.words_per_row(); ++w) {
      std::uint64_t s = sr[w];
      while (s) {
        std::int64_t j = w * 64 + std::countr_zero(s);
        s &= s - 1;
        g_total[static_cast<std::size_t>(j)] += 1;
        g_ones[static_cast<std::size_t>(j)] +=
            static_cast<std::int32_t>((vr[j >> 6] >> (j & 63)) & 1U);
      }
    }
  }

  // Group test pairs by user so each user's neighborhood is computed once;
  // users are visited in first-appearance order for determinism.
  std::vector<std::int32_t> users;
  std::vector<std::vector<std::int32_t>> by_user;
  std::unordered_map<std::int32_t, std::size_t> slot;
  for (std::size_t t = 0; t < test.size(); ++t) {
    auto [it, fresh] = slot.try_emplace(test[t].user, by_user.size());
    if (fresh) {
      by_user.emplace_back();
      users.push_back(test[t].user);
    }
    by_user[it->second].push_back(static_cast<std::int32_t>(t));
  }

  // Neighborhood selection needs a concrete subset, so under ExpectedOverTies
  // the canonical lowest-index set is taken and the expectation applies to the
  // prediction vote only.
  const TiePolicy select_tie =
      is_expected_over_ties(tie) ? TiePolicy(LowestIndex{}) : tie;

  std::int64_t err2 = 0, base_err2 = 0;
  std::vector<std::int64_t> sims;
  std::vector<std::int32_t> top, tied_scratch;
  std::vector<std::int64_t> vals_scratch;
  for (std::size_t u = 0; u < users.size(); ++u) {
    const std::int32_t user = users[u];
    const std::vector<std::int32_t>& idxs = by_user[u];
    similarity_row_into(train, user, sims);
    detail::select_top_into(sims, user, std::min<std::int64_t>(T, side - 1), select_tie,
                            top, tied_scratch, vals_scratch);
    for (std::int32_t ti : idxs) {
      const TestPair& tp = test[static_cast<std::size_t>(ti)];
      std::int64_t ones = 0, zeros = 0;
      for (std::int32_t row : top) {
        if (!train.is_sampled(row, tp.item)) continue;
        if (train.value_bit(row, tp.item))
          ++ones;
        else
          ++zeros;
      }
      if (ones + zeros == 0) {
        ++rep.abstained;
        continue;
      }
      ++rep.predicted;
      std::uint64_t salt = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(tp.user))
                            << 32) |
                           static_cast<std::uint32_t>(tp.item);
      err2 += detail::vote_error2(ones, zeros, tp.truth, tie, salt);
      std::int64_t g1 = g_ones[static_cast<std::size_t>(tp.item)];
      std::int64_t g0 = g_total[static_cast<std::size_t>(tp.item)] - g1;
      base_err2 += detail::vote_error2(g1, g0, tp.truth, tie, salt ^ 0x5A5A5A5A5A5A5A5AULL);
    }
  }

  rep.errors = static_cast<double>(err2) / 2.0;
  rep.ber = rep.predicted ? rep.errors / static_cast<double>(rep.predicted) : 0.0;
  rep.baseline_ber =
      rep.predicted ? static_cast<double>(base_err2) / 2.0 / static_cast<double>(rep.predicted)
                    : 0.0;
  return rep;
}

inline constexpr const char* kEvalCsvHeader =
    "T,test_pairs,predicted,abstained,errors,ber,baseline_ber,seed";

inline std::string eval_csv_row(const EvalReport& rep) {
  std::string row;
  row += fmt_int(rep.T);
  row += ',';
  row += fmt_int(rep.test_pairs);
  row += ',';
  row += fmt_int(rep.predicted);
  row += ',';
  row += fmt_int(rep.abstained);
  row += ',';
  row += fmt_double(rep.errors);
  row += ',';
  row += fmt_double(rep.ber);
  row += ',';
  row += fmt_double(rep.baseline_ber);
  row += ',';
  row += fmt_uint(rep.seed.master);
  return row;
}

inline std::string eval_csv(const EvalReport& rep) {
  std::string out(kEvalCsvHeader);
  out += '\n';
  out += eval_csv_row(rep);
  out += '\n';
  return out;
}

}  // namespace localpop
