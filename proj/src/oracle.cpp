#include "cocite/oracle.hpp"

#include <algorithm>
#include <set>

#include "cocite/error.hpp"

namespace cocite::oracle {

namespace {

const char* const kLevelNames[3] = {"paper", "journal", "subject"};

struct Meta {
  bool found = false;
  bool indexed = false;
  std::string journal;
  std::vector<std::string> categories;
};

Meta lookup(const Corpus& corpus, const JournalCatalog& catalog, const std::string& id) {
  Meta m;
  for (const auto& rec : corpus.records()) {
    if (rec.id == id) {
      m.found = true;
      m.journal = rec.journal;
      auto cats = catalog.categories(rec.journal);
      m.categories.assign(cats.begin(), cats.end());
      m.indexed = !m.categories.empty();
      return m;
    }
  }
  return m;
}

std::pair<std::string, std::string> ordered(const std::string& x, const std::string& y) {
  if (y < x) return {y, x};
  return {x, y};
}

double p90_by_rank(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  // first position whose cumulative share reaches 90%
  for (std::size_t k = 0; k < n; ++k) {
    if (10 * (k + 1) >= 9 * n) return values[k];
  }
  return values.back();
}

double average(const std::vector<double>& values) {
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

}  // namespace

Result brute_force_scores(const Corpus& corpus, const JournalCatalog& catalog, const WindowSpec& window,
                          const std::string& field_category, int min_field_journals) {
  if (corpus.size() > kMaxPapers) {
    throw ValidationError("brute-force scorer refuses corpora above " + std::to_string(kMaxPapers) + " papers");
  }
  const int first[3] = {window.t0_first() - window.past_len(), window.t0_first(), window.t0_last() + 1};
  const int last[3] = {window.t0_first() - 1, window.t0_last(), window.t0_last() + window.future_len()};

  Result out;
  for (int I = 0; I < 3; ++I) {
    for (const auto& rec : corpus.records()) {
      if (rec.year < first[I] || rec.year > last[I]) continue;
      std::set<std::string> field_journals;
      for (const auto& ref : rec.refs) {
        Meta m = lookup(corpus, catalog, ref);
        if (!m.found) continue;
        if (std::find(m.categories.begin(), m.categories.end(), field_category) != m.categories.end()) {
          field_journals.insert(m.journal);
        }
      }
      if (static_cast<int>(field_journals.size()) >= min_field_journals) out.samples[I].push_back(rec.id);
    }
    std::sort(out.samples[I].begin(), out.samples[I].end());
  }

  std::map<std::string, Meta> meta;
  auto meta_of = [&](const std::string& id) -> const Meta& {
    auto it = meta.find(id);
    if (it == meta.end()) it = meta.emplace(id, lookup(corpus, catalog, id)).first;
    return it->second;
  };
  auto refs_of = [&](const std::string& id) -> const std::vector<std::string>& {
    for (const auto& rec : corpus.records()) {
      if (rec.id == id) return rec.refs;
    }
    throw DataError("sampled id missing");
  };

  for (int I = 0; I < 3; ++I) {
    const auto interval = static_cast<Interval>(I);
    for (const auto& citing : out.samples[I]) {
      const auto& refs = refs_of(citing);
      for (const auto& r : refs) {
        ++out.elem_cites[{interval, "paper", r}];
        const Meta& m = meta_of(r);
        if (!m.indexed) continue;
        ++out.elem_cites[{interval, "journal", m.journal}];
        for (const auto& sc : m.categories) ++out.elem_cites[{interval, "subject", sc}];
      }
      for (std::size_t i = 0; i < refs.size(); ++i) {
        for (std::size_t j = i + 1; j < refs.size(); ++j) {
          auto p = ordered(refs[i], refs[j]);
          ++out.pair_freq[{interval, "paper", p.first, p.second}];
          const Meta& mi = meta_of(refs[i]);
          const Meta& mj = meta_of(refs[j]);
          if (!mi.indexed || !mj.indexed) continue;
          auto jp = ordered(mi.journal, mj.journal);
          ++out.pair_freq[{interval, "journal", jp.first, jp.second}];
          for (const auto& a : mi.categories) {
            for (const auto& b : mj.categories) {
              auto sp = ordered(a, b);
              ++out.pair_freq[{interval, "subject", sp.first, sp.second}];
            }
          }
        }
      }
    }
  }

  auto F = [&](Interval I, const char* level, const std::string& a, const std::string& b) -> double {
    auto p = ordered(a, b);
    auto it = out.pair_freq.find({I, level, p.first, p.second});
    return it == out.pair_freq.end() ? 0.0 : static_cast<double>(it->second);
  };
  auto d = [&](const char* level, const std::string& e) -> double {
    double total = 0.0;
    for (auto I : {Interval::Past, Interval::Present}) {
      auto it = out.elem_cites.find({I, level, e});
      if (it != out.elem_cites.end()) total += static_cast<double>(it->second);
    }
    return total;
  };
  auto level_total = [&](Interval I, const char* level) {
    double total = 0.0;
    for (const auto& [key, f] : out.pair_freq) {
      if (std::get<0>(key) == I && std::get<1>(key) == level) total += static_cast<double>(f);
    }
    return total;
  };

  const double totals[2][3] = {
      {level_total(Interval::Past, "paper"), level_total(Interval::Past, "journal"),
       level_total(Interval::Past, "subject")},
      {level_total(Interval::Future, "paper"), level_total(Interval::Future, "journal"),
       level_total(Interval::Future, "subject")}};

  for (const auto& citing : out.samples[1]) {
    Result::Vector v;
    v.paper_id = citing;
    auto fc = out.elem_cites.find({Interval::Future, "paper", citing});
    v.future_citations = fc == out.elem_cites.end() ? 0 : fc->second;
    const auto& refs = refs_of(citing);

    // element pairs of this paper, with multiplicity, per level
    std::vector<std::pair<std::string, std::string>> pairs[3];
    for (std::size_t i = 0; i < refs.size(); ++i) {
      for (std::size_t j = i + 1; j < refs.size(); ++j) {
        pairs[0].emplace_back(refs[i], refs[j]);
        const Meta& mi = meta_of(refs[i]);
        const Meta& mj = meta_of(refs[j]);
        if (!mi.indexed || !mj.indexed) continue;
        pairs[1].emplace_back(mi.journal, mj.journal);
        for (const auto& a : mi.categories) {
          for (const auto& b : mj.categories) pairs[2].emplace_back(a, b);
        }
      }
    }

    for (int L = 0; L < 3; ++L) {
      const char* level = kLevelNames[L];
      v.n_pairs[static_cast<std::size_t>(L)] = pairs[L].size();
      if (pairs[L].empty()) continue;
      std::vector<double> novelty, anticipation, alt;
      double fresh = 0.0;
      for (const auto& [x, y] : pairs[L]) {
        const double f_past = F(Interval::Past, level, x, y);
        const double f_now = F(Interval::Present, level, x, y);
        const double f_next = F(Interval::Future, level, x, y);
        const double w = 1.0 / (d(level, x) * d(level, y));
        novelty.push_back((f_past + f_now) * w);
        alt.push_back(f_now / (f_past + 1.0));
        if (L == 0) {
          anticipation.push_back(f_next * w);
          if (f_past == 0.0) fresh += 1.0;
        } else {
          const double total_next = totals[1][L];
          const double total_past = totals[0][L];
          if (total_next == 0.0 || total_past == 0.0) {
            throw DegenerateError("no pairs in the past or future interval");
          }
          anticipation.push_back(f_next / total_next - f_past / total_past);
        }
      }
      const std::string prefix = L == 0 ? "cit" : L == 1 ? "jr" : "sc";
      const std::string ant = L == 0 ? "acit" : L == 1 ? "ajr" : "asc";
      v.scores[prefix + "_mean"] = average(novelty);
      v.scores[prefix + "_p90"] = p90_by_rank(novelty);
      v.scores[ant + "_mean"] = average(anticipation);
      v.scores[prefix + "_alt_mean"] = average(alt);
      if (L == 0) v.scores["ncit_pct"] = 100.0 * fresh / static_cast<double>(pairs[0].size());
    }
    out.vectors.push_back(std::move(v));
  }
  return out;
}

}  // namespace cocite::oracle
