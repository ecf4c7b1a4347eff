#pragma once

#include <cmath>
#include <initializer_list>
#include <map>
#include <sstream>
#include <tuple>
#include <string>
#include <utility>
#include <vector>

#include "cocite/cooccur.hpp"
#include "cocite/corpus.hpp"
#include "cocite/indexes.hpp"
#include "cocite/oracle.hpp"
#include "cocite/synth.hpp"

namespace testutil {

inline cocite::Corpus corpus_of(std::vector<cocite::PaperRecord> records, cocite::LoadReport* report = nullptr) {
  return cocite::Corpus::from_records(std::move(records), report);
}

/// Catalog rows: journal, category.
inline cocite::JournalCatalog catalog_of(std::initializer_list<std::pair<const char*, const char*>> rows) {
  cocite::JournalCatalog c;
  for (const auto& [j, sc] : rows) c.add(j, sc, std::string("Name of ") + j);
  return c;
}

/// Small corpus layout used by oracle comparisons: 3-year windows around 2003.
inline cocite::SynthConfig small_config(std::uint64_t seed) {
  cocite::SynthConfig c;
  c.seed = seed;
  c.first_year = 1995;
  c.last_year = 2006;
  c.t0_first = 2003;
  c.t0_last = 2003;
  c.past_len = 3;
  c.future_len = 3;
  c.journals = 12 + static_cast<int>(seed % 20);
  c.categories = 3 + static_cast<int>(seed % 6);
  c.papers_per_year = 24;
  c.refs_min = 2;
  c.refs_max = 12;
  c.unindexed_journals = static_cast<int>(seed % 3);
  c.dangling_prob = 0.05;
  c.trends.push_back({"paper", "", "", cocite::Interval::Future, 10.0});
  return c;
}

struct OracleComparison {
  std::size_t integers = 0;  // counts compared exactly
  std::size_t reals = 0;     // scores compared to relative tolerance
  std::size_t papers = 0;
  double worst_relative = 0.0;
  std::string mismatch;  // first difference, empty when equal
};

/// Runs the optimized pipeline (sampling, counting, scoring) and the brute-force
/// oracle on the same corpus and compares every count and score.
inline OracleComparison compare_with_oracle(const cocite::Corpus& corpus, const cocite::JournalCatalog& catalog,
                                            const cocite::WindowSpec& window, const std::string& field,
                                            int min_field_journals = 2, unsigned shards = 1,
                                            double tolerance = 1e-12) {
  using namespace cocite;
  OracleComparison cmp;
  const auto fail = [&](const std::string& what) {
    if (cmp.mismatch.empty()) cmp.mismatch = what;
  };

  std::vector<SampleSet> samples;
  for (auto interval : kIntervals) {
    samples.push_back(select_sample(corpus, catalog, window, interval, field, min_field_journals));
  }
  const CountingContext ctx(corpus, catalog);
  const IntervalCounts counts = count_intervals(ctx, samples, window, shards);
  const auto vectors = score_papers(ctx, counts);
  const oracle::Result expected = oracle::brute_force_scores(corpus, catalog, window, field, min_field_journals);

  for (auto interval : kIntervals) {
    const auto i = index_of(interval);
    if (samples[i].ids != expected.samples[i]) fail("sample differs in interval " + std::to_string(i));
    std::vector<std::string> citing;
    for (auto id : counts.citing(interval)) citing.push_back(counts.interner(Level::Paper).name(id));
    if (citing != expected.samples[i]) fail("counted citing papers differ in interval " + std::to_string(i));

    for (auto level : kLevels) {
      const std::string name(to_string(level));
      const Interner& in = counts.interner(level);
      std::map<std::tuple<Interval, std::string, std::string, std::string>, std::uint64_t> pairs;
      for (const auto& e : counts.pairs(interval, level).entries()) {
        pairs[{interval, name, in.name(e.first()), in.name(e.second())}] = e.count;
      }
      std::map<std::tuple<Interval, std::string, std::string>, std::uint64_t> cites;
      const auto d = counts.elem_cites(interval, level);
      for (std::size_t e = 0; e < d.size(); ++e) {
        if (d[e] > 0) cites[{interval, name, in.name(static_cast<ElementId>(e))}] = d[e];
      }
      std::size_t expected_pairs = 0;
      for (const auto& [key, f] : expected.pair_freq) {
        if (std::get<0>(key) != interval || std::get<1>(key) != name) continue;
        ++expected_pairs;
        ++cmp.integers;
        auto it = pairs.find(key);
        if (it == pairs.end() || it->second != f) {
          fail("pair frequency " + name + " " + std::get<2>(key) + "," + std::get<3>(key));
        }
      }
      if (expected_pairs != pairs.size()) fail("pair table size differs at " + name);
      std::size_t expected_cites = 0;
      for (const auto& [key, c] : expected.elem_cites) {
        if (std::get<0>(key) != interval || std::get<1>(key) != name) continue;
        ++expected_cites;
        ++cmp.integers;
        auto it = cites.find(key);
        if (it == cites.end() || it->second != c) fail("element citations " + name + " " + std::get<2>(key));
      }
      if (expected_cites != cites.size()) fail("element citation table size differs at " + name);
    }
  }

  if (vectors.size() != expected.vectors.size()) {
    fail("score vector count differs");
    return cmp;
  }
  for (std::size_t p = 0; p < vectors.size(); ++p) {
    const auto& got = vectors[p];
    const auto& want = expected.vectors[p];
    ++cmp.papers;
    if (got.paper_id != want.paper_id) fail("paper order differs at " + want.paper_id);
    if (got.future_citations != want.future_citations) fail("future citations of " + want.paper_id);
    for (std::size_t l = 0; l < 3; ++l) {
      if (got.n_pairs[l] != want.n_pairs[l]) fail("pair count of " + want.paper_id);
    }
    cmp.integers += 4;
    for (const auto& var : kScoreVariables) {
      const auto& value = got.*var.field;
      auto it = want.scores.find(var.name);
      if (value.has_value() != (it != want.scores.end())) {
        fail(std::string(var.name) + " presence differs for " + want.paper_id);
        continue;
      }
      if (!value) continue;
      ++cmp.reals;
      const double a = *value;
      const double b = it->second;
      const double scale = std::max(std::abs(a), std::abs(b));
      const double rel = scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
      cmp.worst_relative = std::max(cmp.worst_relative, rel);
      if (rel > tolerance) {
        std::ostringstream msg;
        msg.precision(17);
        msg << var.name << " of " << want.paper_id << ": " << a << " vs " << b;
        fail(msg.str());
      }
    }
  }
  return cmp;
}

}  // namespace testutil
