#include "cocite/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <unordered_set>

#include "json.hpp"

#include "cocite/csv.hpp"
#include "cocite/error.hpp"

namespace cocite {

namespace {

std::string line_prefix(std::size_t line_no) { return "line " + std::to_string(line_no) + ": "; }

int parse_int(std::string_view text, std::string_view what) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw DataError("invalid " + std::string(what) + " '" + std::string(text) + "'");
  }
  return value;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

PaperRecord record_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw DataError("record is not a JSON object");
  auto require = [&](const char* key) -> const nlohmann::json& {
    auto it = j.find(key);
    if (it == j.end()) throw DataError(std::string("missing field '") + key + "'");
    return *it;
  };
  PaperRecord rec;
  const auto& id = require("id");
  const auto& year = require("year");
  const auto& journal = require("journal");
  const auto& refs = require("refs");
  if (!id.is_string()) throw DataError("field 'id' must be a string");
  if (!year.is_number_integer()) throw DataError("field 'year' must be an integer");
  if (!journal.is_string()) throw DataError("field 'journal' must be a string");
  if (!refs.is_array()) throw DataError("field 'refs' must be an array");
  rec.id = id.get<std::string>();
  rec.year = year.get<int>();
  rec.journal = journal.get<std::string>();
  rec.refs.reserve(refs.size());
  for (const auto& r : refs) {
    if (!r.is_string()) throw DataError("field 'refs' must contain strings");
    rec.refs.push_back(r.get<std::string>());
  }
  if (rec.id.empty()) throw DataError("field 'id' is empty");
  return rec;
}

std::vector<PaperRecord> parse_jsonl(std::istream& in) {
  std::vector<PaperRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::is_skippable(line)) continue;
    try {
      records.push_back(record_from_json(nlohmann::json::parse(csv::chomp(line))));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(line_prefix(line_no) + "malformed JSON record: " + e.what());
    } catch (const DataError& e) {
      throw DataError(line_prefix(line_no) + e.what());
    }
  }
  return records;
}

std::vector<PaperRecord> parse_csv(std::istream& in) {
  std::vector<PaperRecord> records;
  std::array<std::size_t, 4> column{0, 1, 2, 3};
  bool first = true;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::is_skippable(line)) continue;
    try {
      auto fields = csv::split_line(csv::chomp(line));
      if (first) {
        first = false;
        if (!fields.empty() && trim(fields[0]) == "id") {
          const std::array<std::string_view, 4> names{"id", "year", "journal", "refs"};
          for (std::size_t k = 0; k < names.size(); ++k) {
            auto it = std::find_if(fields.begin(), fields.end(),
                                   [&](const std::string& f) { return trim(f) == names[k]; });
            if (it == fields.end()) throw DataError("header lacks column '" + std::string(names[k]) + "'");
            column[k] = static_cast<std::size_t>(it - fields.begin());
          }
          continue;
        }
      }
      const std::size_t needed = *std::max_element(column.begin(), column.end()) + 1;
      if (fields.size() < needed) throw DataError("expected at least " + std::to_string(needed) + " fields");
      PaperRecord rec;
      rec.id = std::string(trim(fields[column[0]]));
      rec.year = parse_int(trim(fields[column[1]]), "year");
      rec.journal = std::string(trim(fields[column[2]]));
      std::string_view refs = fields[column[3]];
      while (!refs.empty()) {
        auto pos = refs.find(';');
        auto ref = trim(refs.substr(0, pos));
        if (!ref.empty()) rec.refs.emplace_back(ref);
        if (pos == std::string_view::npos) break;
        refs.remove_prefix(pos + 1);
      }
      if (rec.id.empty()) throw DataError("empty id");
      records.push_back(std::move(rec));
    } catch (const DataError& e) {
      throw DataError(line_prefix(line_no) + e.what());
    }
  }
  return records;
}

}  // namespace

Corpus Corpus::from_records(std::vector<PaperRecord> records, LoadReport* report) {
  LoadReport local;
  local.records = records.size();
  std::unordered_set<std::string_view> seen;
  for (auto& rec : records) {
    seen.clear();
    std::vector<std::string> kept;
    kept.reserve(rec.refs.size());
    for (auto& ref : rec.refs) {
      if (ref == rec.id) {
        ++local.dropped_self_refs;
        continue;
      }
      if (!seen.insert(ref).second) {
        ++local.dropped_duplicate_refs;
        continue;
      }
      kept.push_back(ref);
    }
    rec.refs = std::move(kept);
  }

  Corpus corpus;
  corpus.records_ = std::move(records);
  corpus.by_id_.resize(corpus.records_.size());
  for (std::uint32_t i = 0; i < corpus.by_id_.size(); ++i) corpus.by_id_[i] = i;
  const auto& recs = corpus.records_;
  std::sort(corpus.by_id_.begin(), corpus.by_id_.end(),
            [&](std::uint32_t a, std::uint32_t b) { return recs[a].id < recs[b].id; });
  for (std::size_t i = 1; i < corpus.by_id_.size(); ++i) {
    if (recs[corpus.by_id_[i - 1]].id == recs[corpus.by_id_[i]].id) {
      throw DataError("duplicate paper id '" + recs[corpus.by_id_[i]].id + "'");
    }
  }
  if (report) *report = local;
  return corpus;
}

const PaperRecord* Corpus::find(std::string_view id) const {
  auto it = std::lower_bound(by_id_.begin(), by_id_.end(), id,
                             [&](std::uint32_t pos, std::string_view key) { return records_[pos].id < key; });
  if (it == by_id_.end() || records_[*it].id != id) return nullptr;
  return &records_[*it];
}

InputFormat parse_input_format(std::string_view name) {
  if (name == "jsonl" || name == "json") return InputFormat::JsonLines;
  if (name == "csv") return InputFormat::Csv;
  throw ValidationError("unknown corpus format '" + std::string(name) + "' (expected jsonl or csv)");
}

Corpus read_corpus(std::istream& in, InputFormat format, LoadReport* report) {
  auto records = format == InputFormat::JsonLines ? parse_jsonl(in) : parse_csv(in);
  return Corpus::from_records(std::move(records), report);
}

Corpus load_corpus(const std::filesystem::path& path, InputFormat format, LoadReport* report) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file '" + path.string() + "'");
  try {
    return read_corpus(in, format, report);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_corpus_jsonl(std::ostream& out, const Corpus& corpus) {
  for (const auto& rec : corpus.records()) {
    nlohmann::ordered_json j;
    j["id"] = rec.id;
    j["year"] = rec.year;
    j["journal"] = rec.journal;
    j["refs"] = rec.refs;
    out << j.dump() << '\n';
  }
}

void JournalCatalog::add(std::string_view journal, std::string_view category, std::string_view name) {
  auto it = entries_.find(journal);
  if (it == entries_.end()) it = entries_.emplace(std::string(journal), Entry{}).first;
  if (!name.empty()) it->second.name = std::string(name);
  if (category.empty()) return;
  auto& cats = it->second.categories;
  auto pos = std::lower_bound(cats.begin(), cats.end(), category);
  if (pos == cats.end() || *pos != category) cats.insert(pos, std::string(category));
  all_categories_.emplace(category);
}

bool JournalCatalog::contains(std::string_view journal) const { return entries_.find(journal) != entries_.end(); }

bool JournalCatalog::is_indexed(std::string_view journal) const { return !categories(journal).empty(); }

bool JournalCatalog::has_category(std::string_view category) const {
  return all_categories_.find(category) != all_categories_.end();
}

std::span<const std::string> JournalCatalog::categories(std::string_view journal) const {
  auto it = entries_.find(journal);
  if (it == entries_.end()) return {};
  return it->second.categories;
}

std::string_view JournalCatalog::name(std::string_view journal) const {
  auto it = entries_.find(journal);
  if (it == entries_.end()) return {};
  return it->second.name;
}

std::vector<std::string> JournalCatalog::journals() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [id, entry] : entries_) out.push_back(id);
  return out;
}

JournalCatalog read_catalog(std::istream& in) {
  JournalCatalog catalog;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::is_skippable(line)) continue;
    try {
      auto fields = csv::split_line(csv::chomp(line));
      if (first) {
        first = false;
        if (!fields.empty() && trim(fields[0]) == "journal_id") continue;
      }
      if (fields.size() < 2) throw DataError("expected journal_id,subject_category_id[,journal_name]");
      auto journal = trim(fields[0]);
      if (journal.empty()) throw DataError("empty journal_id");
      catalog.add(journal, trim(fields[1]), fields.size() > 2 ? trim(fields[2]) : std::string_view{});
    } catch (const DataError& e) {
      throw DataError(line_prefix(line_no) + e.what());
    }
  }
  return catalog;
}

JournalCatalog load_catalog(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open catalog file '" + path.string() + "'");
  try {
    return read_catalog(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_catalog_csv(std::ostream& out, const JournalCatalog& catalog) {
  out << "journal_id,subject_category_id,journal_name\n";
  for (const auto& journal : catalog.journals()) {
    auto cats = catalog.categories(journal);
    const std::string name(catalog.name(journal));
    if (cats.empty()) {
      out << csv::join({journal, "", name}) << '\n';
      continue;
    }
    for (const auto& cat : cats) out << csv::join({journal, cat, name}) << '\n';
  }
}

std::string_view to_string(Interval interval) {
  switch (interval) {
    case Interval::Past: return "past";
    case Interval::Present: return "present";
    case Interval::Future: return "future";
  }
  return "?";
}

Interval parse_interval(std::string_view name) {
  if (name == "past" || name == "T-1") return Interval::Past;
  if (name == "present" || name == "T0") return Interval::Present;
  if (name == "future" || name == "T1") return Interval::Future;
  throw ValidationError("unknown interval '" + std::string(name) + "'");
}

WindowSpec::WindowSpec(int t0_first, int t0_last, int past_len, int future_len)
    : t0_first_(t0_first), t0_last_(t0_last), past_len_(past_len), future_len_(future_len) {
  if (t0_first > t0_last) throw ValidationError("present range is empty");
  if (past_len < 1) throw ValidationError("past window length must be >= 1");
  if (future_len < 1) throw ValidationError("future window length must be >= 1");
}

YearRange WindowSpec::range(Interval interval) const {
  switch (interval) {
    case Interval::Past: return {t0_first_ - past_len_, t0_first_ - 1};
    case Interval::Present: return {t0_first_, t0_last_};
    case Interval::Future: return {t0_last_ + 1, t0_last_ + future_len_};
  }
  return {};
}

std::optional<Interval> WindowSpec::classify(int year) const {
  for (auto interval : kIntervals) {
    if (range(interval).contains(year)) return interval;
  }
  return std::nullopt;
}

YearRange parse_year_range(std::string_view text) {
  text = trim(text);
  // a leading '-' belongs to a negative year, so search for the separator after it
  auto dash = text.find('-', 1);
  try {
    if (dash == std::string_view::npos) {
      int y = parse_int(text, "year");
      return {y, y};
    }
    return {parse_int(trim(text.substr(0, dash)), "year"), parse_int(trim(text.substr(dash + 1)), "year")};
  } catch (const DataError& e) {
    throw ValidationError(e.what());
  }
}

bool SampleSet::contains(std::string_view id) const { return std::binary_search(ids.begin(), ids.end(), id); }

SampleSet select_sample(const Corpus& corpus, const JournalCatalog& catalog, const WindowSpec& window,
                        Interval interval, std::string_view field_category, int min_field_journals) {
  if (!catalog.has_category(field_category)) {
    throw ValidationError("subject category '" + std::string(field_category) + "' is unknown to the catalog");
  }
  const YearRange years = window.range(interval);
  SampleSet sample{interval, {}};
  std::vector<std::string_view> field_journals;
  for (const auto& rec : corpus.records()) {
    if (!years.contains(rec.year)) continue;
    if (min_field_journals > 0) {
      field_journals.clear();
      for (const auto& ref : rec.refs) {
        auto resolved = resolve_levels(corpus, catalog, ref);
        if (resolved.status != RefStatus::Resolved) continue;
        if (std::binary_search(resolved.categories.begin(), resolved.categories.end(), field_category)) {
          field_journals.push_back(resolved.journal);
        }
      }
      std::sort(field_journals.begin(), field_journals.end());
      auto distinct = std::unique(field_journals.begin(), field_journals.end()) - field_journals.begin();
      if (distinct < min_field_journals) continue;
    }
    sample.ids.push_back(rec.id);
  }
  std::sort(sample.ids.begin(), sample.ids.end());
  return sample;
}

ResolvedRef resolve_levels(const Corpus& corpus, const JournalCatalog& catalog, std::string_view cited_id) {
  const PaperRecord* cited = corpus.find(cited_id);
  if (!cited) return {RefStatus::Dangling, {}, {}};
  auto cats = catalog.categories(cited->journal);
  if (cats.empty()) return {RefStatus::Unindexed, cited->journal, {}};
  return {RefStatus::Resolved, cited->journal, cats};
}

}  // namespace cocite
