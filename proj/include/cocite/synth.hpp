#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cocite/corpus.hpp"
#include "json.hpp"

namespace cocite {

/// A pair whose per-paper inclusion probability is multiplied inside one interval.
struct PlantedTrend {
  std::string level = "paper";  // paper, journal or subject
  std::string a;                // empty: chosen by the generator
  std::string b;
  Interval interval = Interval::Future;
  double multiplier = 10.0;
};

struct SynthConfig {
  std::uint64_t seed = 1;
  int first_year = 1990;
  int last_year = 2010;
  int journals = 20;
  int categories = 5;
  double field_category_prob = 0.8;  // chance a journal carries the field category SC00
  double category_prob = 0.3;        // chance of every other category
  int unindexed_journals = 0;        // the last journals get no categories
  int papers_per_year = 50;
  int refs_min = 5;
  int refs_max = 15;
  double attachment_exponent = 1.0;  // cited weight (1 + citations so far)^exponent
  double dangling_prob = 0.0;        // a reference points outside the corpus
  int dangling_pool = 50;
  int t0_first = 2003;
  int t0_last = 2003;
  int past_len = 7;
  int future_len = 7;
  double plant_base_rate = 0.02;
  std::vector<PlantedTrend> trends;
  /// Future papers repeat the reference lists of the past interval, each cited
  /// work swapped for a present-interval work of the same journal when one is
  /// left. Journal and subject pair distributions of T-1 and T1 then coincide.
  bool future_mirrors_past = false;

  WindowSpec window() const { return WindowSpec(t0_first, t0_last, past_len, future_len); }
  /// Throws ValidationError for an infeasible configuration.
  void validate() const;
};

SynthConfig synth_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SynthConfig& config);
SynthConfig load_synth_config(const std::filesystem::path& path);

struct SynthCorpus {
  Corpus corpus;
  JournalCatalog catalog;
  std::vector<PlantedTrend> planted;  // with elements filled in
};

/// Reproducible from the seed alone. References point to earlier years only.
SynthCorpus generate_corpus(const SynthConfig& config);

/// Writes corpus.jsonl, catalog.csv and planted.json into `dir`, each
/// starting with the `header` lines.
void write_synth(const SynthCorpus& synth, const std::filesystem::path& dir,
                 const std::vector<std::string>& header = {});

/// The generator's random source: 64-bit Mersenne Twister with explicit
/// mappings, so sequences match across standard libraries.
class SynthRng {
 public:
  explicit SynthRng(std::uint64_t seed) : engine_(seed) {}
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Uniform in [0, n) by rejection; n > 0.
  std::uint64_t below(std::uint64_t n);
  bool chance(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace cocite
