#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "cocite/corpus.hpp"

namespace cocite::oracle {

/// Reference results computed by nested loops over the raw records. Levels are
/// "paper", "journal" and "subject"; pair elements are stored in string order.
struct Result {
  std::map<std::tuple<Interval, std::string, std::string, std::string>, std::uint64_t> pair_freq;
  std::map<std::tuple<Interval, std::string, std::string>, std::uint64_t> elem_cites;
  std::array<std::vector<std::string>, 3> samples;  // sorted citing ids per interval

  struct Vector {
    std::string paper_id;
    std::map<std::string, double> scores;  // absent when the level has no pairs
    std::array<std::uint64_t, 3> n_pairs{};
    std::uint64_t future_citations = 0;
  };
  std::vector<Vector> vectors;  // present-interval sample, by id
};

inline constexpr std::size_t kMaxPapers = 1000;

/// Samples all three intervals, counts and scores with default counting
/// options. Refuses corpora above kMaxPapers records with ValidationError.
Result brute_force_scores(const Corpus& corpus, const JournalCatalog& catalog, const WindowSpec& window,
                          const std::string& field_category, int min_field_journals = 2);

}  // namespace cocite::oracle
