#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cocite/corpus.hpp"
#include "json.hpp"

namespace cocite {

enum class Level : std::uint8_t { Paper = 0, Journal = 1, Subject = 2 };
inline constexpr std::array<Level, 3> kLevels{Level::Paper, Level::Journal, Level::Subject};

std::string_view to_string(Level level);
Level parse_level(std::string_view name);
constexpr std::size_t index_of(Level level) { return static_cast<std::size_t>(level); }

using ElementId = std::uint32_t;
inline constexpr ElementId kNoElement = 0xFFFFFFFFu;

/// Unordered element pair packed into 64 bits with the smaller id in the high word.
constexpr std::uint64_t pack_pair(ElementId x, ElementId y) {
  return x <= y ? (std::uint64_t{x} << 32) | y : (std::uint64_t{y} << 32) | x;
}
constexpr ElementId pair_first(std::uint64_t key) { return static_cast<ElementId>(key >> 32); }
constexpr ElementId pair_second(std::uint64_t key) { return static_cast<ElementId>(key & 0xFFFFFFFFu); }

struct PairCount {
  std::uint64_t key = 0;
  std::uint64_t count = 0;

  ElementId first() const { return pair_first(key); }
  ElementId second() const { return pair_second(key); }
  friend bool operator==(const PairCount&, const PairCount&) = default;
};

/// Sorted string table; an element's id is its rank, so id order equals
/// string order and pair canonicalisation agrees with the string ids.
class Interner {
 public:
  Interner() = default;
  explicit Interner(std::vector<std::string> names);  // sorts and deduplicates

  std::optional<ElementId> find(std::string_view name) const;
  ElementId id(std::string_view name) const;  // throws DataError when absent
  const std::string& name(ElementId id) const { return names_[id]; }
  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

  friend bool operator==(const Interner&, const Interner&) = default;

 private:
  std::vector<std::string> names_;
};

using InternTables = std::array<Interner, 3>;

struct CountOptions {
  /// Count each journal/SC pair at most once per citing paper instead of with
  /// the multiplicity induced by its paper-level pairs.
  bool collapse_per_paper = false;
  /// Leave references without any metadata out of paper-level counting too.
  bool drop_dangling = false;

  friend bool operator==(const CountOptions&, const CountOptions&) = default;
};

/// Interned, pre-resolved view of a corpus and catalog. Keeps references to
/// both; they must outlive the context.
class CountingContext {
 public:
  CountingContext(const Corpus& corpus, const JournalCatalog& catalog, CountOptions options = {});

  const Corpus& corpus() const { return *corpus_; }
  const JournalCatalog& catalog() const { return *catalog_; }
  const CountOptions& options() const { return options_; }
  const Interner& interner(Level level) const { return (*interners_)[index_of(level)]; }
  std::shared_ptr<const InternTables> interners() const { return interners_; }

  RefStatus status(ElementId paper) const { return status_[paper]; }
  /// kNoElement unless the paper resolves to an indexed journal.
  ElementId journal_of(ElementId paper) const { return journal_of_[paper]; }
  std::span<const ElementId> categories_of(ElementId journal) const {
    return {category_flat_.data() + category_offsets_[journal],
            category_offsets_[journal + 1] - category_offsets_[journal]};
  }

  /// Position of the record in the corpus, or -1 when the id is only cited.
  std::int64_t record_of(ElementId paper) const { return record_of_[paper]; }
  /// Paper-level countable references of a corpus record, in record order.
  std::span<const ElementId> countable_refs(std::size_t record) const {
    return {ref_flat_.data() + ref_offsets_[record], ref_offsets_[record + 1] - ref_offsets_[record]};
  }

 private:
  const Corpus* corpus_;
  const JournalCatalog* catalog_;
  CountOptions options_;
  std::shared_ptr<const InternTables> interners_;
  std::vector<RefStatus> status_;
  std::vector<ElementId> journal_of_;
  std::vector<std::size_t> category_offsets_;
  std::vector<ElementId> category_flat_;
  std::vector<std::int64_t> record_of_;
  std::vector<std::size_t> ref_offsets_;
  std::vector<ElementId> ref_flat_;
};

/// Appends the pair multiset of one citing record at `level`, sorted by key for
/// the journal and subject levels and in reference order for the paper level.
/// Unresolvable cited works are skipped at the journal and subject levels.
void enumerate_pairs(const CountingContext& ctx, std::size_t record, Level level,
                     std::vector<PairCount>& out);
std::vector<PairCount> enumerate_pairs(const CountingContext& ctx, std::string_view citing_id, Level level);

/// Upper-triangular sparse frequency matrix: entries sorted by packed key plus
/// a row index over the first element.
class PairTable {
 public:
  PairTable() = default;
  /// `entries` must be sorted by key with unique keys and non-zero counts.
  PairTable(std::vector<PairCount> entries, std::size_t element_count);

  std::uint64_t frequency(ElementId x, ElementId y) const;
  std::uint64_t total() const { return total_; }
  std::size_t size() const { return entries_.size(); }
  std::span<const PairCount> entries() const { return entries_; }

  friend bool operator==(const PairTable& a, const PairTable& b) { return a.entries_ == b.entries_; }

 private:
  std::vector<PairCount> entries_;
  std::vector<std::size_t> rows_;
  std::uint64_t total_ = 0;
};

/// Pair frequencies F and element citation counts d for every interval and
/// level. Immutable once built.
class IntervalCounts {
 public:
  IntervalCounts() = default;

  const WindowSpec& window() const { return *window_; }
  const CountOptions& options() const { return options_; }
  const Interner& interner(Level level) const { return (*interners_)[index_of(level)]; }
  std::shared_ptr<const InternTables> interners() const { return interners_; }

  const PairTable& pairs(Interval interval, Level level) const {
    return tables_[index_of(interval)][index_of(level)].pairs;
  }
  std::span<const std::uint64_t> elem_cites(Interval interval, Level level) const {
    return tables_[index_of(interval)][index_of(level)].cites;
  }
  std::uint64_t cites(Interval interval, Level level, ElementId element) const {
    auto d = elem_cites(interval, level);
    return element < d.size() ? d[element] : 0;
  }
  /// Interned ids of the citing papers counted in `interval`, sorted.
  std::span<const ElementId> citing(Interval interval) const { return citing_[index_of(interval)]; }

  std::uint64_t frequency(Interval interval, Level level, std::string_view x, std::string_view y) const;
  std::uint64_t cites(Interval interval, Level level, std::string_view element) const;

  friend bool operator==(const IntervalCounts& a, const IntervalCounts& b);

 private:
  friend IntervalCounts count_intervals(const CountingContext&, std::span<const SampleSet>, const WindowSpec&,
                                        unsigned);
  friend IntervalCounts merge_counts(std::span<const IntervalCounts>);
  friend IntervalCounts read_counts(std::istream&, nlohmann::json*);

  struct LevelTable {
    PairTable pairs;
    std::vector<std::uint64_t> cites;
  };

  std::optional<WindowSpec> window_;
  CountOptions options_;
  std::shared_ptr<const InternTables> interners_;
  std::array<std::vector<ElementId>, 3> citing_;
  std::array<std::array<LevelTable, 3>, 3> tables_;
};

/// Counts every sample (at most one per interval; absent intervals stay empty)
/// using `shards` independently counted partitions merged by pointwise sum.
/// The result does not depend on the shard count. Throws DataError when a
/// sample member is not a corpus record or lies outside its interval.
IntervalCounts count_intervals(const CountingContext& ctx, std::span<const SampleSet> samples,
                               const WindowSpec& window, unsigned shards = 1);

/// Pointwise sum of counts over disjoint citing-paper partitions. Throws
/// DataError on overlapping partitions or mismatched window/options/interning.
IntervalCounts merge_counts(std::span<const IntervalCounts> parts);

/// Binary cache. Every section starts with a 24-byte header: magic "CCL1",
/// u32 kind, u32 level, u32 interval, u64 entry count. Sections: metadata
/// (JSON text), one interning table per level (u64 length + UTF-8 bytes per
/// entry), citing ids per interval, element counts (id, d) and pair
/// frequencies (a, b, F) as little-endian u64, all sorted.
void write_counts(std::ostream& out, const IntervalCounts& counts, const nlohmann::json& metadata = {});
IntervalCounts read_counts(std::istream& in, nlohmann::json* metadata = nullptr);

}  // namespace cocite
