#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cocite {

/// One bibliographic record. After ingestion `refs` holds no duplicates and
/// never contains `id` itself.
struct PaperRecord {
  std::string id;
  int year = 0;
  std::string journal;
  std::vector<std::string> refs;

  friend bool operator==(const PaperRecord&, const PaperRecord&) = default;
};

struct LoadReport {
  std::size_t records = 0;
  std::size_t dropped_duplicate_refs = 0;
  std::size_t dropped_self_refs = 0;
};

/// Immutable collection of records with unique ids. Cited works that only
/// need metadata (journal) can be listed as records with empty `refs`.
class Corpus {
 public:
  Corpus() = default;

  /// Deduplicates reference lists and removes self references.
  /// Throws DataError naming the id when two records share it.
  static Corpus from_records(std::vector<PaperRecord> records, LoadReport* report = nullptr);

  std::span<const PaperRecord> records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  const PaperRecord* find(std::string_view id) const;

 private:
  std::vector<PaperRecord> records_;
  std::vector<std::uint32_t> by_id_;  // record positions sorted by id
};

enum class InputFormat { JsonLines, Csv };

InputFormat parse_input_format(std::string_view name);

/// JSON-Lines: {"id": str, "year": int, "journal": str, "refs": [str, ...]}.
/// CSV: header id,year,journal,refs with refs separated by ';'.
/// Blank lines and lines starting with '#' are skipped. Errors carry the line number.
Corpus read_corpus(std::istream& in, InputFormat format, LoadReport* report = nullptr);
Corpus load_corpus(const std::filesystem::path& path, InputFormat format,
                   LoadReport* report = nullptr);

void write_corpus_jsonl(std::ostream& out, const Corpus& corpus);

/// Journal to subject-category assignments plus display names. A journal row
/// with an empty category marks the journal as explicitly unindexed; journals
/// absent from the catalog are treated the same way.
class JournalCatalog {
 public:
  void add(std::string_view journal, std::string_view category, std::string_view name = {});

  bool contains(std::string_view journal) const;
  bool is_indexed(std::string_view journal) const;
  bool has_category(std::string_view category) const;

  /// Sorted, unique. Empty for unknown or unindexed journals.
  std::span<const std::string> categories(std::string_view journal) const;
  std::string_view name(std::string_view journal) const;

  std::vector<std::string> journals() const;
  const std::set<std::string, std::less<>>& all_categories() const { return all_categories_; }

 private:
  struct Entry {
    std::string name;
    std::vector<std::string> categories;
  };
  std::map<std::string, Entry, std::less<>> entries_;
  std::set<std::string, std::less<>> all_categories_;
};

/// CSV with columns journal_id, subject_category_id, journal_name; one row per
/// assignment. A header row is recognised and skipped.
JournalCatalog read_catalog(std::istream& in);
JournalCatalog load_catalog(const std::filesystem::path& path);

void write_catalog_csv(std::ostream& out, const JournalCatalog& catalog);

enum class Interval : std::uint8_t { Past = 0, Present = 1, Future = 2 };
inline constexpr std::array<Interval, 3> kIntervals{Interval::Past, Interval::Present,
                                                    Interval::Future};

std::string_view to_string(Interval interval);
Interval parse_interval(std::string_view name);
constexpr std::size_t index_of(Interval interval) { return static_cast<std::size_t>(interval); }

struct YearRange {
  int first = 0;
  int last = 0;
  bool contains(int year) const { return year >= first && year <= last; }
  friend bool operator==(const YearRange&, const YearRange&) = default;
};

/// Present range T0 with a past window immediately before it and a future
/// window immediately after it.
class WindowSpec {
 public:
  /// Throws ValidationError unless t0_first <= t0_last, past_len >= 1, future_len >= 1.
  WindowSpec(int t0_first, int t0_last, int past_len = 7, int future_len = 7);
  static WindowSpec single_year(int year, int past_len = 7, int future_len = 7) {
    return WindowSpec(year, year, past_len, future_len);
  }

  YearRange range(Interval interval) const;
  std::optional<Interval> classify(int year) const;

  int t0_first() const { return t0_first_; }
  int t0_last() const { return t0_last_; }
  int past_len() const { return past_len_; }
  int future_len() const { return future_len_; }

  friend bool operator==(const WindowSpec&, const WindowSpec&) = default;

 private:
  int t0_first_;
  int t0_last_;
  int past_len_;
  int future_len_;
};

/// Parses "2003" or "2003-2005".
YearRange parse_year_range(std::string_view text);

struct SampleSet {
  Interval interval = Interval::Present;
  std::vector<std::string> ids;  // sorted

  bool contains(std::string_view id) const;
  friend bool operator==(const SampleSet&, const SampleSet&) = default;
};

/// Records in `interval` whose references cite at least `min_field_journals`
/// distinct journals carrying `field_category`. Throws ValidationError if the
/// category is unknown to the catalog.
SampleSet select_sample(const Corpus& corpus, const JournalCatalog& catalog,
                        const WindowSpec& window, Interval interval,
                        std::string_view field_category, int min_field_journals = 2);

enum class RefStatus { Resolved, Unindexed, Dangling };

struct ResolvedRef {
  RefStatus status = RefStatus::Dangling;
  std::string_view journal;                  // empty when dangling
  std::span<const std::string> categories;  // empty unless resolved
};

/// Journal and subject categories of a cited work. Unindexed and dangling
/// works keep their paper-level identity but carry no journal/SC levels.
ResolvedRef resolve_levels(const Corpus& corpus, const JournalCatalog& catalog,
                           std::string_view cited_id);

}  // namespace cocite
