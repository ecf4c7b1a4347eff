#include "cocite/cooccur.hpp"

#include <algorithm>
#include <exception>
#include <istream>
#include <ostream>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "cocite/error.hpp"

namespace cocite {

std::string_view to_string(Level level) {
  switch (level) {
    case Level::Paper: return "paper";
    case Level::Journal: return "journal";
    case Level::Subject: return "subject";
  }
  return "?";
}

Level parse_level(std::string_view name) {
  if (name == "paper" || name == "cit") return Level::Paper;
  if (name == "journal" || name == "jr") return Level::Journal;
  if (name == "subject" || name == "sc") return Level::Subject;
  throw ValidationError("unknown level '" + std::string(name) + "'");
}

Interner::Interner(std::vector<std::string> names) : names_(std::move(names)) {
  std::sort(names_.begin(), names_.end());
  names_.erase(std::unique(names_.begin(), names_.end()), names_.end());
  if (names_.size() >= kNoElement) throw DataError("too many distinct elements to intern");
}

std::optional<ElementId> Interner::find(std::string_view name) const {
  auto it = std::lower_bound(names_.begin(), names_.end(), name);
  if (it == names_.end() || *it != name) return std::nullopt;
  return static_cast<ElementId>(it - names_.begin());
}

ElementId Interner::id(std::string_view name) const {
  auto found = find(name);
  if (!found) throw DataError("unknown element '" + std::string(name) + "'");
  return *found;
}

CountingContext::CountingContext(const Corpus& corpus, const JournalCatalog& catalog, CountOptions options)
    : corpus_(&corpus), catalog_(&catalog), options_(options) {
  const auto records = corpus.records();

  std::unordered_set<std::string_view> paper_set;
  paper_set.reserve(records.size() * 2);
  std::vector<std::string> journal_names = catalog.journals();
  for (const auto& rec : records) {
    paper_set.insert(rec.id);
    for (const auto& ref : rec.refs) paper_set.insert(ref);
    journal_names.push_back(rec.journal);
  }
  std::vector<std::string> paper_names(paper_set.begin(), paper_set.end());
  paper_set = {};
  auto tables = std::make_shared<InternTables>();
  (*tables)[index_of(Level::Paper)] = Interner(std::move(paper_names));
  (*tables)[index_of(Level::Journal)] = Interner(std::move(journal_names));
  (*tables)[index_of(Level::Subject)] =
      Interner(std::vector<std::string>(catalog.all_categories().begin(), catalog.all_categories().end()));
  interners_ = tables;

  const Interner& papers = (*tables)[index_of(Level::Paper)];
  const Interner& journals = (*tables)[index_of(Level::Journal)];
  const Interner& subjects = (*tables)[index_of(Level::Subject)];

  std::unordered_map<std::string_view, ElementId> paper_ids;
  paper_ids.reserve(papers.size());
  for (ElementId i = 0; i < papers.size(); ++i) paper_ids.emplace(papers.name(i), i);

  category_offsets_.assign(journals.size() + 1, 0);
  for (ElementId j = 0; j < journals.size(); ++j) {
    for (const auto& cat : catalog.categories(journals.name(j))) category_flat_.push_back(subjects.id(cat));
    category_offsets_[j + 1] = category_flat_.size();
  }

  record_of_.assign(papers.size(), -1);
  status_.assign(papers.size(), RefStatus::Dangling);
  journal_of_.assign(papers.size(), kNoElement);
  for (std::size_t r = 0; r < records.size(); ++r) {
    const ElementId id = paper_ids.at(records[r].id);
    record_of_[id] = static_cast<std::int64_t>(r);
    const ElementId journal = journals.id(records[r].journal);
    if (category_offsets_[journal + 1] > category_offsets_[journal]) {
      status_[id] = RefStatus::Resolved;
      journal_of_[id] = journal;
    } else {
      status_[id] = RefStatus::Unindexed;
    }
  }

  ref_offsets_.assign(records.size() + 1, 0);
  for (std::size_t r = 0; r < records.size(); ++r) {
    for (const auto& ref : records[r].refs) {
      const ElementId id = paper_ids.at(ref);
      if (options_.drop_dangling && status_[id] == RefStatus::Dangling) continue;
      ref_flat_.push_back(id);
    }
    ref_offsets_[r + 1] = ref_flat_.size();
  }
}

namespace {

struct Scratch {
  std::vector<ElementId> ids;
  std::vector<std::pair<ElementId, std::uint64_t>> groups;
  std::vector<std::uint64_t> copairs;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> copair_groups;
};

template <class T>
void group_sorted(const std::vector<T>& sorted, std::vector<std::pair<T, std::uint64_t>>& groups) {
  groups.clear();
  for (const T& v : sorted) {
    if (!groups.empty() && groups.back().first == v) {
      ++groups.back().second;
    } else {
      groups.emplace_back(v, 1);
    }
  }
}

void emit_paper(std::span<const ElementId> refs, std::vector<PairCount>& out) {
  for (std::size_t i = 0; i < refs.size(); ++i) {
    for (std::size_t j = i + 1; j < refs.size(); ++j) out.push_back({pack_pair(refs[i], refs[j]), 1});
  }
}

void emit_journal(const CountingContext& ctx, std::span<const ElementId> refs, Scratch& s,
                  std::vector<PairCount>& out) {
  const bool collapse = ctx.options().collapse_per_paper;
  s.ids.clear();
  for (ElementId r : refs) {
    const ElementId j = ctx.journal_of(r);
    if (j != kNoElement) s.ids.push_back(j);
  }
  std::sort(s.ids.begin(), s.ids.end());
  group_sorted(s.ids, s.groups);
  for (std::size_t g = 0; g < s.groups.size(); ++g) {
    const auto [jg, cg] = s.groups[g];
    if (cg >= 2) out.push_back({pack_pair(jg, jg), collapse ? 1 : cg * (cg - 1) / 2});
    for (std::size_t h = g + 1; h < s.groups.size(); ++h) {
      const auto [jh, ch] = s.groups[h];
      out.push_back({pack_pair(jg, jh), collapse ? 1 : cg * ch});
    }
  }
}

// Cross product of category sets over all reference pairs, counted in closed
// form: {A,A} occurs C(s_A, 2) times and {A,B} occurs s_A*s_B - s_AB times,
// where s_AB counts references carrying both categories.
void emit_subject(const CountingContext& ctx, std::span<const ElementId> refs, Scratch& s,
                  std::vector<PairCount>& out) {
  const bool collapse = ctx.options().collapse_per_paper;
  s.ids.clear();
  s.copairs.clear();
  for (ElementId r : refs) {
    const ElementId j = ctx.journal_of(r);
    if (j == kNoElement) continue;
    const auto cats = ctx.categories_of(j);
    for (std::size_t a = 0; a < cats.size(); ++a) {
      s.ids.push_back(cats[a]);
      for (std::size_t b = a + 1; b < cats.size(); ++b) s.copairs.push_back(pack_pair(cats[a], cats[b]));
    }
  }
  std::sort(s.ids.begin(), s.ids.end());
  group_sorted(s.ids, s.groups);
  std::sort(s.copairs.begin(), s.copairs.end());
  group_sorted(s.copairs, s.copair_groups);

  auto co = s.copair_groups.begin();
  for (std::size_t g = 0; g < s.groups.size(); ++g) {
    const auto [ag, sg] = s.groups[g];
    if (sg >= 2) out.push_back({pack_pair(ag, ag), collapse ? 1 : sg * (sg - 1) / 2});
    for (std::size_t h = g + 1; h < s.groups.size(); ++h) {
      const auto [ah, sh] = s.groups[h];
      const std::uint64_t key = pack_pair(ag, ah);
      while (co != s.copair_groups.end() && co->first < key) ++co;
      const std::uint64_t both = (co != s.copair_groups.end() && co->first == key) ? co->second : 0;
      const std::uint64_t n = sg * sh - both;
      if (n > 0) out.push_back({key, collapse ? 1 : n});
    }
  }
}

void emit(const CountingContext& ctx, std::size_t record, Level level, Scratch& s, std::vector<PairCount>& out) {
  const auto refs = ctx.countable_refs(record);
  switch (level) {
    case Level::Paper: emit_paper(refs, out); break;
    case Level::Journal: emit_journal(ctx, refs, s, out); break;
    case Level::Subject: emit_subject(ctx, refs, s, out); break;
  }
}

void add_cites(const CountingContext& ctx, std::size_t record, std::array<std::vector<std::uint64_t>, 3>& cites) {
  for (ElementId r : ctx.countable_refs(record)) {
    ++cites[index_of(Level::Paper)][r];
    const ElementId j = ctx.journal_of(r);
    if (j == kNoElement) continue;
    ++cites[index_of(Level::Journal)][j];
    for (ElementId c : ctx.categories_of(j)) ++cites[index_of(Level::Subject)][c];
  }
}

void sort_reduce(std::vector<PairCount>& v) {
  std::sort(v.begin(), v.end(), [](const PairCount& a, const PairCount& b) { return a.key < b.key; });
  std::size_t w = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (w > 0 && v[w - 1].key == v[i].key) {
      v[w - 1].count += v[i].count;
    } else {
      v[w++] = v[i];
    }
  }
  v.resize(w);
  v.shrink_to_fit();
}

std::vector<PairCount> merge_sum(const std::vector<PairCount>& a, const std::vector<PairCount>& b) {
  std::vector<PairCount> out;
  out.reserve(std::max(a.size(), b.size()));
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (i->key < j->key) {
      out.push_back(*i++);
    } else if (j->key < i->key) {
      out.push_back(*j++);
    } else {
      out.push_back({i->key, i->count + j->count});
      ++i;
      ++j;
    }
  }
  out.insert(out.end(), i, a.end());
  out.insert(out.end(), j, b.end());
  return out;
}

// Pairwise tree reduction; the result is a function of the multiset of runs only.
std::vector<PairCount> merge_runs(std::vector<std::vector<PairCount>> runs) {
  if (runs.empty()) return {};
  while (runs.size() > 1) {
    std::vector<std::vector<PairCount>> next;
    for (std::size_t i = 0; i + 1 < runs.size(); i += 2) {
      next.push_back(merge_sum(runs[i], runs[i + 1]));
      runs[i] = {};
      runs[i + 1] = {};
    }
    if (runs.size() % 2) next.push_back(std::move(runs.back()));
    runs = std::move(next);
  }
  return std::move(runs.front());
}

struct ShardOutput {
  std::array<std::vector<PairCount>, 3> pairs;
  std::array<std::vector<std::uint64_t>, 3> cites;
};

void count_shard(const CountingContext& ctx, std::span<const std::size_t> records, ShardOutput& out) {
  Scratch scratch;
  for (auto level : kLevels) out.cites[index_of(level)].assign(ctx.interner(level).size(), 0);
  std::size_t paper_pairs = 0;
  for (std::size_t r : records) {
    const std::size_t n = ctx.countable_refs(r).size();
    paper_pairs += n * (n - 1) / 2;
  }
  out.pairs[index_of(Level::Paper)].reserve(paper_pairs);
  for (std::size_t r : records) {
    for (auto level : kLevels) emit(ctx, r, level, scratch, out.pairs[index_of(level)]);
    add_cites(ctx, r, out.cites);
  }
  for (auto& v : out.pairs) sort_reduce(v);
}

}  // namespace

void enumerate_pairs(const CountingContext& ctx, std::size_t record, Level level, std::vector<PairCount>& out) {
  Scratch scratch;
  emit(ctx, record, level, scratch, out);
}

std::vector<PairCount> enumerate_pairs(const CountingContext& ctx, std::string_view citing_id, Level level) {
  auto id = ctx.interner(Level::Paper).find(citing_id);
  if (!id || ctx.record_of(*id) < 0) throw DataError("'" + std::string(citing_id) + "' is not a corpus record");
  std::vector<PairCount> out;
  enumerate_pairs(ctx, static_cast<std::size_t>(ctx.record_of(*id)), level, out);
  return out;
}

PairTable::PairTable(std::vector<PairCount> entries, std::size_t element_count)
    : entries_(std::move(entries)), rows_(element_count + 1, 0) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (i > 0 && entries_[i - 1].key >= e.key) throw DataError("pair entries not strictly sorted");
    if (e.second() >= element_count) throw DataError("pair element out of range");
    if (e.count == 0) throw DataError("zero pair frequency");
    total_ += e.count;
  }
  // rows_[a] = first entry whose first element is >= a
  std::size_t pos = 0;
  for (std::size_t a = 0; a <= element_count; ++a) {
    while (pos < entries_.size() && entries_[pos].first() < a) ++pos;
    rows_[a] = pos;
  }
}

std::uint64_t PairTable::frequency(ElementId x, ElementId y) const {
  const ElementId a = std::min(x, y);
  if (std::size_t{a} + 1 >= rows_.size()) return 0;
  const std::uint64_t key = pack_pair(x, y);
  auto first = entries_.begin() + static_cast<std::ptrdiff_t>(rows_[a]);
  auto last = entries_.begin() + static_cast<std::ptrdiff_t>(rows_[a + 1]);
  auto it = std::lower_bound(first, last, key, [](const PairCount& e, std::uint64_t k) { return e.key < k; });
  return (it != last && it->key == key) ? it->count : 0;
}

std::uint64_t IntervalCounts::frequency(Interval interval, Level level, std::string_view x,
                                        std::string_view y) const {
  auto a = interner(level).find(x);
  auto b = interner(level).find(y);
  if (!a || !b) return 0;
  return pairs(interval, level).frequency(*a, *b);
}

std::uint64_t IntervalCounts::cites(Interval interval, Level level, std::string_view element) const {
  auto id = interner(level).find(element);
  return id ? cites(interval, level, *id) : 0;
}

bool operator==(const IntervalCounts& a, const IntervalCounts& b) {
  if (a.window_ != b.window_ || a.options_ != b.options_ || a.citing_ != b.citing_) return false;
  if ((a.interners_ == nullptr) != (b.interners_ == nullptr)) return false;
  if (a.interners_ && a.interners_ != b.interners_ && *a.interners_ != *b.interners_) return false;
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t l = 0; l < 3; ++l) {
      if (!(a.tables_[i][l].pairs == b.tables_[i][l].pairs)) return false;
      if (a.tables_[i][l].cites != b.tables_[i][l].cites) return false;
    }
  }
  return true;
}

IntervalCounts count_intervals(const CountingContext& ctx, std::span<const SampleSet> samples,
                               const WindowSpec& window, unsigned shards) {
  if (shards == 0) throw ValidationError("shard count must be >= 1");
  std::array<const SampleSet*, 3> by_interval{};
  for (const auto& sample : samples) {
    auto& slot = by_interval[index_of(sample.interval)];
    if (slot) throw DataError("more than one sample for interval " + std::string(to_string(sample.interval)));
    slot = &sample;
  }

  IntervalCounts result;
  result.window_ = window;
  result.options_ = ctx.options();
  result.interners_ = ctx.interners();
  const Interner& papers = ctx.interner(Level::Paper);

  for (auto interval : kIntervals) {
    std::vector<std::size_t> records;
    auto& citing = result.citing_[index_of(interval)];
    if (const SampleSet* sample = by_interval[index_of(interval)]) {
      const YearRange years = window.range(interval);
      for (const auto& id : sample->ids) {
        auto element = papers.find(id);
        if (!element || ctx.record_of(*element) < 0) {
          throw DataError("sampled paper '" + id + "' is not a corpus record");
        }
        const auto record = static_cast<std::size_t>(ctx.record_of(*element));
        if (!years.contains(ctx.corpus().records()[record].year)) {
          throw DataError("window/sample mismatch: '" + id + "' lies outside the " +
                          std::string(to_string(interval)) + " interval");
        }
        citing.push_back(*element);
      }
      std::sort(citing.begin(), citing.end());
      if (std::adjacent_find(citing.begin(), citing.end()) != citing.end()) {
        throw DataError("sample lists a paper twice");
      }
      records.reserve(citing.size());
      for (ElementId e : citing) records.push_back(static_cast<std::size_t>(ctx.record_of(e)));
    }

    const std::size_t shard_count = std::max<std::size_t>(1, std::min<std::size_t>(shards, records.size()));
    std::vector<ShardOutput> outputs(shard_count);
    std::vector<std::exception_ptr> errors(shard_count);
    auto run = [&](std::size_t s) {
      try {
        const std::size_t begin = records.size() * s / shard_count;
        const std::size_t end = records.size() * (s + 1) / shard_count;
        count_shard(ctx, std::span<const std::size_t>(records).subspan(begin, end - begin), outputs[s]);
      } catch (...) {
        errors[s] = std::current_exception();
      }
    };
    if (shard_count == 1) {
      run(0);
    } else {
      std::vector<std::thread> workers;
      workers.reserve(shard_count);
      for (std::size_t s = 0; s < shard_count; ++s) workers.emplace_back(run, s);
      for (auto& w : workers) w.join();
    }
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }

    for (auto level : kLevels) {
      const std::size_t l = index_of(level);
      std::vector<std::vector<PairCount>> runs;
      runs.reserve(shard_count);
      std::vector<std::uint64_t> cites(ctx.interner(level).size(), 0);
      for (auto& out : outputs) {
        runs.push_back(std::move(out.pairs[l]));
        for (std::size_t e = 0; e < cites.size(); ++e) cites[e] += out.cites[l][e];
        out.cites[l] = {};
      }
      auto& table = result.tables_[index_of(interval)][l];
      table.pairs = PairTable(merge_runs(std::move(runs)), ctx.interner(level).size());
      table.cites = std::move(cites);
    }
  }
  return result;
}

IntervalCounts merge_counts(std::span<const IntervalCounts> parts) {
  if (parts.empty()) throw DataError("nothing to merge");
  const IntervalCounts& first = parts.front();
  for (const auto& part : parts) {
    if (part.window_ != first.window_) throw DataError("cannot merge counts built for different windows");
    if (part.options_ != first.options_) throw DataError("cannot merge counts built with different options");
    if (part.interners_ != first.interners_ && *part.interners_ != *first.interners_) {
      throw DataError("cannot merge counts with different interning tables");
    }
  }
  IntervalCounts result;
  result.window_ = first.window_;
  result.options_ = first.options_;
  result.interners_ = first.interners_;
  for (auto interval : kIntervals) {
    const std::size_t i = index_of(interval);
    auto& citing = result.citing_[i];
    for (const auto& part : parts) citing.insert(citing.end(), part.citing_[i].begin(), part.citing_[i].end());
    std::sort(citing.begin(), citing.end());
    if (auto dup = std::adjacent_find(citing.begin(), citing.end()); dup != citing.end()) {
      throw DataError("overlapping partitions: paper '" + first.interner(Level::Paper).name(*dup) +
                      "' is counted in more than one part");
    }
    for (auto level : kLevels) {
      const std::size_t l = index_of(level);
      std::vector<std::vector<PairCount>> runs;
      std::vector<std::uint64_t> cites(first.interner(level).size(), 0);
      for (const auto& part : parts) {
        const auto& table = part.tables_[i][l];
        runs.emplace_back(table.pairs.entries().begin(), table.pairs.entries().end());
        for (std::size_t e = 0; e < table.cites.size(); ++e) cites[e] += table.cites[e];
      }
      result.tables_[i][l].pairs = PairTable(merge_runs(std::move(runs)), first.interner(level).size());
      result.tables_[i][l].cites = std::move(cites);
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// binary cache

namespace {

constexpr char kMagic[4] = {'C', 'C', 'L', '1'};
constexpr std::uint32_t kNotApplicable = 0xFFFFFFFFu;

enum class SectionKind : std::uint32_t { Meta = 1, Intern = 2, Citing = 3, Cites = 4, Pairs = 5 };

class LeWriter {
 public:
  explicit LeWriter(std::ostream& out) : out_(out) { buf_.reserve(kChunk); }
  ~LeWriter() { flush(); }

  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    maybe_flush();
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    maybe_flush();
  }
  void bytes(std::string_view s) {
    buf_.append(s);
    maybe_flush();
  }
  void header(SectionKind kind, std::uint32_t level, std::uint32_t interval, std::uint64_t count) {
    bytes(std::string_view(kMagic, 4));
    u32(static_cast<std::uint32_t>(kind));
    u32(level);
    u32(interval);
    u64(count);
  }
  void flush() {
    out_.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
    buf_.clear();
  }

 private:
  static constexpr std::size_t kChunk = 1 << 16;
  void maybe_flush() {
    if (buf_.size() >= kChunk) flush();
  }
  std::ostream& out_;
  std::string buf_;
};

class LeReader {
 public:
  explicit LeReader(std::istream& in) : in_(in) {}

  std::uint32_t u32() {
    unsigned char b[4];
    read(b, 4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }
  std::uint64_t u64() {
    unsigned char b[8];
    read(b, 8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }
  std::string bytes(std::uint64_t n) {
    if (n > (std::uint64_t{1} << 32)) throw DataError("counts cache: implausible string length");
    std::string s(n, '\0');
    read(s.data(), n);
    return s;
  }
  std::uint64_t header(SectionKind kind, std::uint32_t level, std::uint32_t interval) {
    char magic[4];
    read(magic, 4);
    if (!std::equal(magic, magic + 4, kMagic)) throw DataError("counts cache: bad magic (not a CCL1 file)");
    const std::uint32_t k = u32();
    const std::uint32_t l = u32();
    const std::uint32_t i = u32();
    if (k != static_cast<std::uint32_t>(kind) || l != level || i != interval) {
      throw DataError("counts cache: unexpected section layout");
    }
    return u64();
  }

 private:
  void read(void* dst, std::size_t n) {
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) throw DataError("counts cache: truncated file");
  }
  std::istream& in_;
};

}  // namespace

void write_counts(std::ostream& out, const IntervalCounts& counts, const nlohmann::json& metadata) {
  if (!counts.interners()) throw DataError("cannot write empty counts");
  const WindowSpec& w = counts.window();
  nlohmann::json meta;
  meta["format"] = 1;
  meta["window"] = {{"t0_first", w.t0_first()},
                    {"t0_last", w.t0_last()},
                    {"past_len", w.past_len()},
                    {"future_len", w.future_len()}};
  meta["options"] = {{"collapse_per_paper", counts.options().collapse_per_paper},
                     {"drop_dangling", counts.options().drop_dangling}};
  meta["meta"] = metadata;
  const std::string text = meta.dump();

  LeWriter wr(out);
  wr.header(SectionKind::Meta, kNotApplicable, kNotApplicable, text.size());
  wr.bytes(text);
  for (auto level : kLevels) {
    const auto& names = counts.interner(level).names();
    wr.header(SectionKind::Intern, index_of(level), kNotApplicable, names.size());
    for (const auto& name : names) {
      wr.u64(name.size());
      wr.bytes(name);
    }
  }
  for (auto interval : kIntervals) {
    auto citing = counts.citing(interval);
    wr.header(SectionKind::Citing, kNotApplicable, index_of(interval), citing.size());
    for (ElementId e : citing) wr.u64(e);
  }
  for (auto interval : kIntervals) {
    for (auto level : kLevels) {
      auto cites = counts.elem_cites(interval, level);
      const auto nonzero = static_cast<std::uint64_t>(std::count_if(cites.begin(), cites.end(),
                                                                    [](std::uint64_t d) { return d != 0; }));
      wr.header(SectionKind::Cites, index_of(level), index_of(interval), nonzero);
      for (std::size_t e = 0; e < cites.size(); ++e) {
        if (cites[e] == 0) continue;
        wr.u64(e);
        wr.u64(cites[e]);
      }
      const auto& table = counts.pairs(interval, level);
      wr.header(SectionKind::Pairs, index_of(level), index_of(interval), table.size());
      for (const auto& entry : table.entries()) {
        wr.u64(entry.first());
        wr.u64(entry.second());
        wr.u64(entry.count);
      }
    }
  }
  wr.flush();
  if (!out) throw DataError("failed writing counts cache");
}

IntervalCounts read_counts(std::istream& in, nlohmann::json* metadata) {
  LeReader rd(in);
  IntervalCounts counts;
  const std::uint64_t meta_len = rd.header(SectionKind::Meta, kNotApplicable, kNotApplicable);
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(rd.bytes(meta_len));
    const auto& w = meta.at("window");
    counts.window_ = WindowSpec(w.at("t0_first").get<int>(), w.at("t0_last").get<int>(),
                                w.at("past_len").get<int>(), w.at("future_len").get<int>());
    counts.options_.collapse_per_paper = meta.at("options").at("collapse_per_paper").get<bool>();
    counts.options_.drop_dangling = meta.at("options").at("drop_dangling").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("counts cache: bad metadata section: ") + e.what());
  } catch (const ValidationError& e) {
    throw DataError(std::string("counts cache: bad window: ") + e.what());
  }
  if (metadata) *metadata = meta.value("meta", nlohmann::json{});

  auto tables = std::make_shared<InternTables>();
  for (auto level : kLevels) {
    const std::uint64_t n = rd.header(SectionKind::Intern, index_of(level), kNotApplicable);
    std::vector<std::string> names;
    names.reserve(n);
    for (std::uint64_t k = 0; k < n; ++k) names.push_back(rd.bytes(rd.u64()));
    if (!std::is_sorted(names.begin(), names.end()) ||
        std::adjacent_find(names.begin(), names.end()) != names.end()) {
      throw DataError("counts cache: interning table not sorted");
    }
    (*tables)[index_of(level)] = Interner(std::move(names));
  }
  counts.interners_ = tables;
  const std::size_t papers = (*tables)[index_of(Level::Paper)].size();

  for (auto interval : kIntervals) {
    const std::uint64_t n = rd.header(SectionKind::Citing, kNotApplicable, index_of(interval));
    auto& citing = counts.citing_[index_of(interval)];
    for (std::uint64_t k = 0; k < n; ++k) {
      const std::uint64_t e = rd.u64();
      if (e >= papers || (!citing.empty() && e <= citing.back())) throw DataError("counts cache: bad citing ids");
      citing.push_back(static_cast<ElementId>(e));
    }
  }
  for (auto interval : kIntervals) {
    for (auto level : kLevels) {
      const std::size_t size = (*tables)[index_of(level)].size();
      auto& table = counts.tables_[index_of(interval)][index_of(level)];
      table.cites.assign(size, 0);
      const std::uint64_t n_cites = rd.header(SectionKind::Cites, index_of(level), index_of(interval));
      for (std::uint64_t k = 0; k < n_cites; ++k) {
        const std::uint64_t e = rd.u64();
        const std::uint64_t d = rd.u64();
        if (e >= size) throw DataError("counts cache: element id out of range");
        table.cites[e] = d;
      }
      const std::uint64_t n_pairs = rd.header(SectionKind::Pairs, index_of(level), index_of(interval));
      std::vector<PairCount> entries;
      entries.reserve(n_pairs);
      for (std::uint64_t k = 0; k < n_pairs; ++k) {
        const std::uint64_t a = rd.u64();
        const std::uint64_t b = rd.u64();
        const std::uint64_t f = rd.u64();
        if (a > b || b >= size) throw DataError("counts cache: pair key out of range");
        entries.push_back({pack_pair(static_cast<ElementId>(a), static_cast<ElementId>(b)), f});
      }
      table.pairs = PairTable(std::move(entries), size);
    }
  }
  return counts;
}

}  // namespace cocite
