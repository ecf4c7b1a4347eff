#include "cocite/indexes.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <map>
#include <ostream>

#include "cocite/csv.hpp"
#include "cocite/error.hpp"

namespace cocite {

double weight_w(std::uint64_t d_i, std::uint64_t d_j) {
  if (d_i == 0 || d_j == 0) throw DataError("weight W needs positive citation counts");
  return 1.0 / (static_cast<double>(d_i) * static_cast<double>(d_j));
}

double novelty_score(std::uint64_t f_past, std::uint64_t f_present, std::uint64_t d_i, std::uint64_t d_j) {
  return static_cast<double>(f_past + f_present) * weight_w(d_i, d_j);
}

int absolute_novelty(std::uint64_t f_past) { return f_past == 0 ? 1 : 0; }

double anticipation_acit(std::uint64_t f_future, std::uint64_t d_i, std::uint64_t d_j) {
  return static_cast<double>(f_future) * weight_w(d_i, d_j);
}

double anticipation_share_delta(std::uint64_t f_future, std::uint64_t total_future, std::uint64_t f_past,
                                std::uint64_t total_past) {
  if (total_future == 0 || total_past == 0) {
    throw DegenerateError("share difference undefined: no pairs in the past or future interval");
  }
  return static_cast<double>(f_future) / static_cast<double>(total_future) -
         static_cast<double>(f_past) / static_cast<double>(total_past);
}

double alt_ratio(std::uint64_t f_present, std::uint64_t f_past) {
  return static_cast<double>(f_present) / static_cast<double>(f_past + 1);
}

PairScorer::PairScorer(const IntervalCounts& counts) : counts_(&counts) {}

std::uint64_t PairScorer::present(Level level, ElementId a, ElementId b) const {
  const std::uint64_t f = counts_->pairs(Interval::Present, level).frequency(a, b);
  if (f == 0) throw DataError("pair is not observed in the present interval");
  return f;
}

std::uint64_t PairScorer::weight_basis(Level level, ElementId element) const {
  return counts_->cites(Interval::Past, level, element) + counts_->cites(Interval::Present, level, element);
}

double PairScorer::novelty(Level level, ElementId a, ElementId b) const {
  const std::uint64_t f0 = present(level, a, b);
  const std::uint64_t fp = counts_->pairs(Interval::Past, level).frequency(a, b);
  return novelty_score(fp, f0, weight_basis(level, a), weight_basis(level, b));
}

int PairScorer::absolute_novelty(ElementId a, ElementId b) const {
  present(Level::Paper, a, b);
  return cocite::absolute_novelty(counts_->pairs(Interval::Past, Level::Paper).frequency(a, b));
}

double PairScorer::acit(ElementId a, ElementId b) const {
  present(Level::Paper, a, b);
  const std::uint64_t f1 = counts_->pairs(Interval::Future, Level::Paper).frequency(a, b);
  return anticipation_acit(f1, weight_basis(Level::Paper, a), weight_basis(Level::Paper, b));
}

double PairScorer::share_delta(Level level, ElementId a, ElementId b) const {
  present(level, a, b);
  const auto& future = counts_->pairs(Interval::Future, level);
  const auto& past = counts_->pairs(Interval::Past, level);
  return anticipation_share_delta(future.frequency(a, b), future.total(), past.frequency(a, b), past.total());
}

double PairScorer::alt_ratio(Level level, ElementId a, ElementId b) const {
  const std::uint64_t f0 = present(level, a, b);
  return cocite::alt_ratio(f0, counts_->pairs(Interval::Past, level).frequency(a, b));
}

std::vector<PairScore> all_share_deltas(const IntervalCounts& counts, Level level) {
  const auto past = counts.pairs(Interval::Past, level).entries();
  const auto future = counts.pairs(Interval::Future, level).entries();
  const std::uint64_t total_past = counts.pairs(Interval::Past, level).total();
  const std::uint64_t total_future = counts.pairs(Interval::Future, level).total();
  std::vector<PairScore> out;
  auto i = past.begin();
  auto j = future.begin();
  while (i != past.end() || j != future.end()) {
    std::uint64_t key;
    std::uint64_t fp = 0;
    std::uint64_t ff = 0;
    if (j == future.end() || (i != past.end() && i->key < j->key)) {
      key = i->key;
      fp = (i++)->count;
    } else if (i == past.end() || j->key < i->key) {
      key = j->key;
      ff = (j++)->count;
    } else {
      key = i->key;
      fp = (i++)->count;
      ff = (j++)->count;
    }
    out.push_back({level, pair_first(key), pair_second(key),
                   anticipation_share_delta(ff, total_future, fp, total_past)});
  }
  return out;
}

std::optional<double> weighted_mean(std::span<const WeightedValue> values) {
  double sum = 0.0;
  std::uint64_t n = 0;
  for (const auto& v : values) {
    sum += v.value * static_cast<double>(v.weight);
    n += v.weight;
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

std::optional<double> p90_nearest_rank(std::span<const WeightedValue> values) {
  std::vector<WeightedValue> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const WeightedValue& a, const WeightedValue& b) { return a.value < b.value; });
  std::uint64_t n = 0;
  for (const auto& v : sorted) n += v.weight;
  if (n == 0) return std::nullopt;
  const std::uint64_t rank = (9 * n + 9) / 10;  // ceil(0.9 n)
  std::uint64_t cumulative = 0;
  for (const auto& v : sorted) {
    cumulative += v.weight;
    if (cumulative >= rank) return v.value;
  }
  return sorted.back().value;
}

const ScoreVariable& score_variable(std::string_view name) {
  for (const auto& var : kScoreVariables) {
    if (name == var.name) return var;
  }
  throw ValidationError("unknown score variable '" + std::string(name) + "'");
}

PaperScoreVector aggregate_paper(const CountingContext& ctx, const PairScorer& scorer, std::size_t record,
                                 const IntervalCounts& counts) {
  const PaperRecord& rec = ctx.corpus().records()[record];
  PaperScoreVector v;
  v.paper_id = rec.id;
  v.year = rec.year;
  v.journal = rec.journal;
  v.future_citations = counts.cites(Interval::Future, Level::Paper, ctx.interner(Level::Paper).id(rec.id));

  std::vector<PairCount> pairs;
  std::vector<WeightedValue> novelty, anticipation, alt;
  for (auto level : kLevels) {
    pairs.clear();
    novelty.clear();
    anticipation.clear();
    alt.clear();
    enumerate_pairs(ctx, record, level, pairs);
    std::uint64_t n = 0;
    std::uint64_t brand_new = 0;
    for (const auto& p : pairs) {
      const ElementId a = p.first();
      const ElementId b = p.second();
      n += p.count;
      novelty.push_back({scorer.novelty(level, a, b), p.count});
      alt.push_back({scorer.alt_ratio(level, a, b), p.count});
      if (level == Level::Paper) {
        anticipation.push_back({scorer.acit(a, b), p.count});
        brand_new += p.count * static_cast<std::uint64_t>(scorer.absolute_novelty(a, b));
      } else {
        anticipation.push_back({scorer.share_delta(level, a, b), p.count});
      }
    }
    v.n_pairs[index_of(level)] = n;
    if (n == 0) continue;
    const auto mean = weighted_mean(novelty);
    const auto p90 = p90_nearest_rank(novelty);
    const auto ant = weighted_mean(anticipation);
    const auto alt_mean = weighted_mean(alt);
    switch (level) {
      case Level::Paper:
        v.cit_mean = mean;
        v.cit_p90 = p90;
        v.acit_mean = ant;
        v.cit_alt_mean = alt_mean;
        v.ncit_pct = 100.0 * static_cast<double>(brand_new) / static_cast<double>(n);
        break;
      case Level::Journal:
        v.jr_mean = mean;
        v.jr_p90 = p90;
        v.ajr_mean = ant;
        v.jr_alt_mean = alt_mean;
        break;
      case Level::Subject:
        v.sc_mean = mean;
        v.sc_p90 = p90;
        v.asc_mean = ant;
        v.sc_alt_mean = alt_mean;
        break;
    }
  }
  return v;
}

std::vector<PaperScoreVector> score_papers(const CountingContext& ctx, const IntervalCounts& counts) {
  if (ctx.interners() != counts.interners() && *ctx.interners() != *counts.interners()) {
    throw DataError("counts were built from a different corpus or catalog");
  }
  if (ctx.options() != counts.options()) throw DataError("counts were built with different counting options");
  PairScorer scorer(counts);
  std::vector<PaperScoreVector> out;
  const auto citing = counts.citing(Interval::Present);
  out.reserve(citing.size());
  for (ElementId id : citing) {
    const std::int64_t record = ctx.record_of(id);
    if (record < 0) throw DataError("counted paper is missing from the corpus");
    out.push_back(aggregate_paper(ctx, scorer, static_cast<std::size_t>(record), counts));
  }
  return out;
}

namespace {

const std::array<const char*, 20> kColumns{
    "paper_id",     "year",        "journal",      "cit_mean",     "cit_p90",      "jr_mean",     "jr_p90",
    "sc_mean",      "sc_p90",      "ncit_pct",     "acit_mean",    "ajr_mean",     "asc_mean",    "cit_alt_mean",
    "jr_alt_mean",  "sc_alt_mean", "n_pairs_paper", "n_pairs_journal", "n_pairs_subject", "future_citations"};

std::string opt_field(const std::optional<double>& v) { return v ? csv::format_double(*v) : std::string(); }

template <class T>
T parse_number(std::string_view text, const char* column) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw DataError("bad value '" + std::string(text) + "' in column " + column);
  }
  return value;
}

}  // namespace

void write_scores_csv(std::ostream& out, std::span<const PaperScoreVector> scores,
                      std::span<const std::string> header) {
  for (const auto& line : header) out << "# " << line << '\n';
  std::vector<std::string> fields(kColumns.begin(), kColumns.end());
  out << csv::join(fields) << '\n';
  for (const auto& v : scores) {
    fields = {v.paper_id,
              std::to_string(v.year),
              v.journal,
              opt_field(v.cit_mean),
              opt_field(v.cit_p90),
              opt_field(v.jr_mean),
              opt_field(v.jr_p90),
              opt_field(v.sc_mean),
              opt_field(v.sc_p90),
              opt_field(v.ncit_pct),
              opt_field(v.acit_mean),
              opt_field(v.ajr_mean),
              opt_field(v.asc_mean),
              opt_field(v.cit_alt_mean),
              opt_field(v.jr_alt_mean),
              opt_field(v.sc_alt_mean),
              std::to_string(v.n_pairs[0]),
              std::to_string(v.n_pairs[1]),
              std::to_string(v.n_pairs[2]),
              std::to_string(v.future_citations)};
    out << csv::join(fields) << '\n';
  }
}

std::vector<PaperScoreVector> read_scores_csv(std::istream& in) {
  std::vector<PaperScoreVector> out;
  std::map<std::string, std::size_t, std::less<>> column;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::is_skippable(line)) continue;
    try {
      auto fields = csv::split_line(csv::chomp(line));
      if (column.empty()) {
        for (std::size_t i = 0; i < fields.size(); ++i) column[fields[i]] = i;
        for (const char* name : kColumns) {
          if (!column.contains(name)) throw DataError(std::string("missing column ") + name);
        }
        continue;
      }
      auto get = [&](const char* name) -> std::string_view {
        const std::size_t i = column.at(name);
        if (i >= fields.size()) throw DataError("row has too few fields");
        return fields[i];
      };
      auto opt = [&](const char* name) -> std::optional<double> {
        auto text = get(name);
        if (text.empty()) return std::nullopt;
        return parse_number<double>(text, name);
      };
      PaperScoreVector v;
      v.paper_id = std::string(get("paper_id"));
      v.year = parse_number<int>(get("year"), "year");
      v.journal = std::string(get("journal"));
      for (const auto& var : kScoreVariables) v.*var.field = opt(var.name);
      v.n_pairs[0] = parse_number<std::uint64_t>(get("n_pairs_paper"), "n_pairs_paper");
      v.n_pairs[1] = parse_number<std::uint64_t>(get("n_pairs_journal"), "n_pairs_journal");
      v.n_pairs[2] = parse_number<std::uint64_t>(get("n_pairs_subject"), "n_pairs_subject");
      v.future_citations = parse_number<std::uint64_t>(get("future_citations"), "future_citations");
      out.push_back(std::move(v));
    } catch (const DataError& e) {
      throw DataError("scores line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (column.empty()) throw DataError("scores file has no header");
  return out;
}

}  // namespace cocite
