#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cocite/cooccur.hpp"

namespace cocite {

// Pair-level formulas. Every `d` is an element's citation count over the past
// and present intervals combined; every `f_*` is a pair frequency.

/// 1 / (d_i * d_j). Throws DataError when either count is zero.
double weight_w(std::uint64_t d_i, std::uint64_t d_j);

/// Past-plus-present co-citation frequency weighted by W (CIT, JR, SC).
double novelty_score(std::uint64_t f_past, std::uint64_t f_present, std::uint64_t d_i, std::uint64_t d_j);

/// 1 when the pair never occurred in the past interval.
int absolute_novelty(std::uint64_t f_past);

/// Future co-citation frequency weighted by the past-and-present W (ACIT).
double anticipation_acit(std::uint64_t f_future, std::uint64_t d_i, std::uint64_t d_j);

/// Future share minus past share of one pair (AJR, ASC). Throws
/// DegenerateError when either total is zero.
double anticipation_share_delta(std::uint64_t f_future, std::uint64_t total_future, std::uint64_t f_past,
                                std::uint64_t total_past);

/// Present frequency over past frequency plus one (CIT/JR/SC alt.).
double alt_ratio(std::uint64_t f_present, std::uint64_t f_past);

struct PairScore {
  Level level = Level::Paper;
  ElementId a = 0;
  ElementId b = 0;
  double value = 0.0;
};

/// Scores pairs of one IntervalCounts. Pairs are scored only if observed in the
/// present interval; the past and future tables are consulted, never scored.
class PairScorer {
 public:
  explicit PairScorer(const IntervalCounts& counts);

  double novelty(Level level, ElementId a, ElementId b) const;
  int absolute_novelty(ElementId a, ElementId b) const;
  double acit(ElementId a, ElementId b) const;
  double share_delta(Level level, ElementId a, ElementId b) const;
  double alt_ratio(Level level, ElementId a, ElementId b) const;

  /// d over the past and present intervals.
  std::uint64_t weight_basis(Level level, ElementId element) const;

 private:
  std::uint64_t present(Level level, ElementId a, ElementId b) const;

  const IntervalCounts* counts_;
};

/// Share deltas of every pair seen in the past or future interval at `level`.
std::vector<PairScore> all_share_deltas(const IntervalCounts& counts, Level level);

/// Value with a multiplicity, the element of a pair-score multiset.
struct WeightedValue {
  double value = 0.0;
  std::uint64_t weight = 1;
};

/// Nullopt for an empty multiset.
std::optional<double> weighted_mean(std::span<const WeightedValue> values);
/// Nearest rank: smallest value whose cumulative share reaches 90%.
std::optional<double> p90_nearest_rank(std::span<const WeightedValue> values);

struct PaperScoreVector {
  std::string paper_id;
  int year = 0;
  std::string journal;
  std::optional<double> cit_mean, cit_p90;
  std::optional<double> jr_mean, jr_p90;
  std::optional<double> sc_mean, sc_p90;
  std::optional<double> ncit_pct;
  std::optional<double> acit_mean, ajr_mean, asc_mean;
  std::optional<double> cit_alt_mean, jr_alt_mean, sc_alt_mean;
  std::array<std::uint64_t, 3> n_pairs{};  // indexed by Level
  std::uint64_t future_citations = 0;

  friend bool operator==(const PaperScoreVector&, const PaperScoreVector&) = default;
};

/// A named per-paper score; the analysis stage iterates over these.
struct ScoreVariable {
  const char* name;
  std::optional<double> PaperScoreVector::*field;
  Level level;
};

inline constexpr std::array<ScoreVariable, 13> kScoreVariables{{
    {"cit_mean", &PaperScoreVector::cit_mean, Level::Paper},
    {"cit_p90", &PaperScoreVector::cit_p90, Level::Paper},
    {"jr_mean", &PaperScoreVector::jr_mean, Level::Journal},
    {"jr_p90", &PaperScoreVector::jr_p90, Level::Journal},
    {"sc_mean", &PaperScoreVector::sc_mean, Level::Subject},
    {"sc_p90", &PaperScoreVector::sc_p90, Level::Subject},
    {"ncit_pct", &PaperScoreVector::ncit_pct, Level::Paper},
    {"acit_mean", &PaperScoreVector::acit_mean, Level::Paper},
    {"ajr_mean", &PaperScoreVector::ajr_mean, Level::Journal},
    {"asc_mean", &PaperScoreVector::asc_mean, Level::Subject},
    {"cit_alt_mean", &PaperScoreVector::cit_alt_mean, Level::Paper},
    {"jr_alt_mean", &PaperScoreVector::jr_alt_mean, Level::Journal},
    {"sc_alt_mean", &PaperScoreVector::sc_alt_mean, Level::Subject},
}};

const ScoreVariable& score_variable(std::string_view name);  // throws ValidationError

/// Aggregates the pair scores of one citing record (a corpus position) into its
/// score vector. Levels without pairs are left missing.
PaperScoreVector aggregate_paper(const CountingContext& ctx, const PairScorer& scorer, std::size_t record,
                                 const IntervalCounts& counts);

/// Score vectors of every present-interval citing paper, ordered by paper id.
/// Throws DataError when `ctx` does not intern exactly like `counts`.
std::vector<PaperScoreVector> score_papers(const CountingContext& ctx, const IntervalCounts& counts);

/// paper_id, year, journal, the thirteen scores, n_pairs_{paper,journal,subject},
/// future_citations. Missing values are empty fields. `header` lines are
/// written first, each prefixed with "# ".
void write_scores_csv(std::ostream& out, std::span<const PaperScoreVector> scores,
                      std::span<const std::string> header = {});
std::vector<PaperScoreVector> read_scores_csv(std::istream& in);

}  // namespace cocite
