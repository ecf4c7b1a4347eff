#include "cocite/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "cocite/error.hpp"

namespace cocite {

std::uint64_t SynthRng::below(std::uint64_t n) {
  if (n == 0) throw ValidationError("empty range");
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw ValidationError("synth config: " + message);
}

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

std::string format_id(char prefix, int width, std::size_t n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%0*zu", prefix, width, n);
  return buf;
}

std::string category_id(int k) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "SC%02d", k);
  return buf;
}

// Prefix sums over paper weights for weighted sampling.
class Fenwick {
 public:
  explicit Fenwick(std::size_t n) : tree_(n + 1, 0.0), value_(n, 0.0) {}

  void set(std::size_t i, double w) {
    const double delta = w - value_[i];
    value_[i] = w;
    for (std::size_t k = i + 1; k < tree_.size(); k += k & (~k + 1)) tree_[k] += delta;
  }
  double get(std::size_t i) const { return value_[i]; }

  double total() const {
    double s = 0.0;
    for (std::size_t k = tree_.size() - 1; k > 0; k -= k & (~k + 1)) s += tree_[k];
    return s;
  }

  // Smallest index whose prefix sum exceeds target.
  std::size_t find(double target) const {
    std::size_t pos = 0;
    std::size_t step = 1;
    while (step * 2 < tree_.size()) step *= 2;
    for (; step > 0; step /= 2) {
      if (pos + step < tree_.size() && tree_[pos + step] <= target) {
        pos += step;
        target -= tree_[pos];
      }
    }
    return std::min(pos, value_.size() - 1);
  }

 private:
  std::vector<double> tree_;
  std::vector<double> value_;
};

struct Paper {
  std::string id;
  int year;
  int journal;
  std::vector<std::size_t> refs;        // positions of cited papers
  std::vector<std::string> dangling;  // cited ids outside the corpus
};

class Generator {
 public:
  explicit Generator(const SynthConfig& config) : cfg_(config), rng_(config.seed), window_(config.window()) {}

  SynthCorpus run() {
    build_catalog();
    const std::size_t total =
        static_cast<std::size_t>(cfg_.last_year - cfg_.first_year + 1) * static_cast<std::size_t>(cfg_.papers_per_year);
    papers_.reserve(total);
    for (std::size_t i = 0; i < total; ++i) {
      const int year = cfg_.first_year + static_cast<int>(i / static_cast<std::size_t>(cfg_.papers_per_year));
      papers_.push_back({format_id('W', 7, i), year, 0, {}, {}});
    }
    choose_trend_elements();

    Fenwick weights(total);
    indegree_.assign(total, 0);
    by_journal_.assign(static_cast<std::size_t>(cfg_.journals), {});
    std::size_t active = 0;
    for (int year = cfg_.first_year; year <= cfg_.last_year; ++year) {
      // papers of earlier years become citable
      for (; active < total && papers_[active].year < year; ++active) {
        weights.set(active, weight(0));
        by_journal_[static_cast<std::size_t>(papers_[active].journal)].push_back(active);
      }
      const std::size_t begin = static_cast<std::size_t>(year - cfg_.first_year) * static_cast<std::size_t>(cfg_.papers_per_year);
      for (std::size_t p = begin; p < begin + static_cast<std::size_t>(cfg_.papers_per_year); ++p) {
        if (auto source = mirror_source(p)) {
          mirror(p, *source);
        } else {
          papers_[p].journal = static_cast<int>(rng_.below(static_cast<std::uint64_t>(cfg_.journals)));
          draw_refs(p, active, weights);
          plant(p);
        }
        for (std::size_t r : papers_[p].refs) {
          ++indegree_[r];
          weights.set(r, weight(indegree_[r]));
        }
      }
    }

    std::vector<PaperRecord> records;
    records.reserve(total);
    for (const auto& paper : papers_) {
      PaperRecord rec{paper.id, paper.year, journal_id(paper.journal), {}};
      for (std::size_t r : paper.refs) rec.refs.push_back(papers_[r].id);
      for (const auto& d : paper.dangling) rec.refs.push_back(d);
      records.push_back(std::move(rec));
    }
    SynthCorpus out;
    out.corpus = Corpus::from_records(std::move(records));
    out.catalog = std::move(catalog_);
    out.planted = trends_;
    return out;
  }

 private:
  static std::string journal_id(int j) { return format_id('J', 3, static_cast<std::size_t>(j)); }

  double weight(std::uint64_t indegree) const {
    return std::pow(1.0 + static_cast<double>(indegree), cfg_.attachment_exponent);
  }

  void build_catalog() {
    journal_categories_.assign(static_cast<std::size_t>(cfg_.journals), {});
    const int indexed = cfg_.journals - cfg_.unindexed_journals;
    for (int j = 0; j < cfg_.journals; ++j) {
      const std::string id = journal_id(j);
      const std::string name = "Journal " + std::to_string(j);
      if (j >= indexed) {
        catalog_.add(id, "", name);
        continue;
      }
      auto& cats = journal_categories_[static_cast<std::size_t>(j)];
      if (rng_.chance(cfg_.field_category_prob)) cats.push_back(0);
      for (int k = 1; k < cfg_.categories; ++k) {
        if (rng_.chance(cfg_.category_prob)) cats.push_back(k);
      }
      if (cats.empty()) cats.push_back(static_cast<int>(rng_.below(static_cast<std::uint64_t>(cfg_.categories))));
      for (int k : cats) catalog_.add(id, category_id(k), name);
    }
  }

  void choose_trend_elements() {
    const int indexed = cfg_.journals - cfg_.unindexed_journals;
    for (const auto& t : cfg_.trends) {
      PlantedTrend trend = t;
      if (trend.a.empty() || trend.b.empty()) {
        std::uint64_t range = 0;
        if (trend.level == "paper") range = static_cast<std::uint64_t>(cfg_.papers_per_year);
        if (trend.level == "journal") range = static_cast<std::uint64_t>(indexed);
        if (trend.level == "subject") range = static_cast<std::uint64_t>(cfg_.categories);
        require(range >= 2, "cannot choose two distinct " + trend.level + " elements for a planted trend");
        const std::uint64_t x = rng_.below(range);
        std::uint64_t y = rng_.below(range - 1);
        if (y >= x) ++y;
        auto name = [&](std::uint64_t k) {
          if (trend.level == "paper") return papers_[k].id;
          if (trend.level == "journal") return journal_id(static_cast<int>(k));
          return category_id(static_cast<int>(k));
        };
        trend.a = name(std::min(x, y));
        trend.b = name(std::max(x, y));
      }
      trends_.push_back(std::move(trend));
    }
  }

  void draw_refs(std::size_t p, std::size_t active, Fenwick& weights) {
    if (active == 0) return;
    const auto span = static_cast<std::uint64_t>(cfg_.refs_max - cfg_.refs_min + 1);
    const std::size_t k = std::min(static_cast<std::size_t>(cfg_.refs_min) + rng_.below(span), active);
    auto& paper = papers_[p];
    std::vector<std::pair<std::size_t, double>> taken;
    int misses = 0;
    while (paper.refs.size() + paper.dangling.size() < k) {
      if (cfg_.dangling_prob > 0.0 && rng_.chance(cfg_.dangling_prob)) {
        std::string id = format_id('D', 5, rng_.below(static_cast<std::uint64_t>(cfg_.dangling_pool)));
        if (std::find(paper.dangling.begin(), paper.dangling.end(), id) == paper.dangling.end()) {
          paper.dangling.push_back(std::move(id));
        } else if (paper.dangling.size() >= static_cast<std::size_t>(cfg_.dangling_pool)) {
          break;
        }
        continue;
      }
      const double total = weights.total();
      std::size_t pick;
      if (misses >= 64) {
        do {
          pick = rng_.below(active);
        } while (weights.get(pick) == 0.0);
        misses = 0;
      } else if (total > 0.0) {
        pick = weights.find(rng_.uniform() * total);
      } else {
        pick = rng_.below(active);
      }
      // rounding can leave a taken paper reachable; draw again
      if (pick >= active || weights.get(pick) == 0.0) {
        ++misses;
        continue;
      }
      taken.emplace_back(pick, weights.get(pick));
      weights.set(pick, 0.0);
      paper.refs.push_back(pick);
      if (paper.refs.size() == active) break;
    }
    for (const auto& [pick, w] : taken) weights.set(pick, w);
  }

  std::optional<std::size_t> random_prior_in_journal(int journal, int year) {
    const auto& pool = by_journal_[static_cast<std::size_t>(journal)];
    if (pool.empty() || papers_[pool.front()].year >= year) return std::nullopt;
    return pool[rng_.below(pool.size())];
  }

  void add_ref(std::size_t p, std::optional<std::size_t> cited) {
    if (!cited) return;
    auto& refs = papers_[p].refs;
    if (std::find(refs.begin(), refs.end(), *cited) == refs.end()) refs.push_back(*cited);
  }

  std::optional<std::size_t> element_ref(const PlantedTrend& trend, const std::string& element, int year) {
    if (trend.level == "paper") {
      auto it = std::lower_bound(papers_.begin(), papers_.end(), element,
                                 [](const Paper& a, const std::string& id) { return a.id < id; });
      if (it == papers_.end() || it->id != element || it->year >= year) return std::nullopt;
      return static_cast<std::size_t>(it - papers_.begin());
    }
    if (trend.level == "journal") {
      for (int j = 0; j < cfg_.journals; ++j) {
        if (journal_id(j) == element) return random_prior_in_journal(j, year);
      }
      return std::nullopt;
    }
    std::vector<int> carriers;
    for (int j = 0; j < cfg_.journals; ++j) {
      const auto& cats = journal_categories_[static_cast<std::size_t>(j)];
      for (int k : cats) {
        if (category_id(k) == element && !by_journal_[static_cast<std::size_t>(j)].empty()) carriers.push_back(j);
      }
    }
    if (carriers.empty()) return std::nullopt;
    return random_prior_in_journal(carriers[rng_.below(carriers.size())], year);
  }

  void plant(std::size_t p) {
    const int year = papers_[p].year;
    const auto interval = window_.classify(year);
    for (const auto& trend : trends_) {
      double prob = cfg_.plant_base_rate;
      if (interval && *interval == trend.interval) prob = std::min(1.0, prob * trend.multiplier);
      if (!rng_.chance(prob)) continue;
      add_ref(p, element_ref(trend, trend.a, year));
      add_ref(p, element_ref(trend, trend.b, year));
    }
  }

  std::optional<std::size_t> mirror_source(std::size_t p) const {
    if (!cfg_.future_mirrors_past) return std::nullopt;
    const int year = papers_[p].year;
    const int offset = year - (cfg_.t0_last + 1);
    if (offset < 0 || offset >= cfg_.future_len || offset >= cfg_.past_len) return std::nullopt;
    const int source_year = cfg_.t0_first - cfg_.past_len + offset;
    if (source_year < cfg_.first_year) return std::nullopt;
    const std::size_t shift =
        static_cast<std::size_t>(year - source_year) * static_cast<std::size_t>(cfg_.papers_per_year);
    return p - shift;
  }

  void mirror(std::size_t p, std::size_t source) {
    auto& paper = papers_[p];
    const auto& original = papers_[source];
    paper.journal = original.journal;
    paper.dangling = original.dangling;
    std::set<std::size_t> used;
    for (std::size_t r : original.refs) {
      std::vector<std::size_t> candidates;
      for (std::size_t c : by_journal_[static_cast<std::size_t>(papers_[r].journal)]) {
        if (window_.classify(papers_[c].year) == Interval::Present && !used.contains(c)) candidates.push_back(c);
      }
      const std::size_t chosen = candidates.empty() ? r : candidates[rng_.below(candidates.size())];
      used.insert(chosen);
      paper.refs.push_back(chosen);
    }
  }

  const SynthConfig& cfg_;
  SynthRng rng_;
  WindowSpec window_;
  JournalCatalog catalog_;
  std::vector<std::vector<int>> journal_categories_;
  std::vector<Paper> papers_;
  std::vector<std::uint64_t> indegree_;
  std::vector<std::vector<std::size_t>> by_journal_;
  std::vector<PlantedTrend> trends_;
};

const std::set<std::string, std::less<>> kConfigKeys{
    "seed",         "first_year",      "last_year",          "journals",     "categories",
    "field_category_prob", "category_prob", "unindexed_journals", "papers_per_year", "refs_min",
    "refs_max",     "attachment_exponent", "dangling_prob",  "dangling_pool", "t0_first",
    "t0_last",      "past_len",        "future_len",         "plant_base_rate", "trends",
    "future_mirrors_past"};

}  // namespace

void SynthConfig::validate() const {
  require(papers_per_year > 0, "papers_per_year must be positive (the corpus would be empty)");
  require(first_year <= last_year, "first_year must not exceed last_year");
  require(journals > 0, "journals must be positive");
  require(categories > 0, "categories must be positive");
  require(unindexed_journals >= 0 && unindexed_journals < journals,
          "unindexed_journals must leave at least one indexed journal");
  require(refs_min >= 1 && refs_max >= refs_min, "need 1 <= refs_min <= refs_max");
  require(papers_per_year >= refs_max, "infeasible: refs_max " + std::to_string(refs_max) +
                                           " exceeds the " + std::to_string(papers_per_year) +
                                           " papers available to the second year");
  require(is_probability(field_category_prob) && is_probability(category_prob) && is_probability(dangling_prob) &&
              is_probability(plant_base_rate),
          "probabilities must lie in [0, 1]");
  require(dangling_pool >= 1, "dangling_pool must be positive");
  require(attachment_exponent >= 0.0, "attachment_exponent must be non-negative");
  try {
    (void)window();
  } catch (const ValidationError& e) {
    require(false, e.what());
  }
  for (const auto& t : trends) {
    require(t.level == "paper" || t.level == "journal" || t.level == "subject",
            "trend level must be paper, journal or subject");
    require(t.multiplier >= 1.0, "trend multiplier must be at least 1");
    require(t.a.empty() == t.b.empty(), "trend elements must be given together");
    require(t.a.empty() || t.a != t.b, "trend elements must differ");
  }
}

SynthConfig synth_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("synth config: expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!kConfigKeys.contains(key)) throw ValidationError("synth config: unknown key '" + key + "'");
  }
  SynthConfig c;
  try {
    c.seed = j.value("seed", c.seed);
    c.first_year = j.value("first_year", c.first_year);
    c.last_year = j.value("last_year", c.last_year);
    c.journals = j.value("journals", c.journals);
    c.categories = j.value("categories", c.categories);
    c.field_category_prob = j.value("field_category_prob", c.field_category_prob);
    c.category_prob = j.value("category_prob", c.category_prob);
    c.unindexed_journals = j.value("unindexed_journals", c.unindexed_journals);
    c.papers_per_year = j.value("papers_per_year", c.papers_per_year);
    c.refs_min = j.value("refs_min", c.refs_min);
    c.refs_max = j.value("refs_max", c.refs_max);
    c.attachment_exponent = j.value("attachment_exponent", c.attachment_exponent);
    c.dangling_prob = j.value("dangling_prob", c.dangling_prob);
    c.dangling_pool = j.value("dangling_pool", c.dangling_pool);
    c.t0_first = j.value("t0_first", c.t0_first);
    c.t0_last = j.value("t0_last", c.t0_last);
    c.past_len = j.value("past_len", c.past_len);
    c.future_len = j.value("future_len", c.future_len);
    c.plant_base_rate = j.value("plant_base_rate", c.plant_base_rate);
    c.future_mirrors_past = j.value("future_mirrors_past", c.future_mirrors_past);
    if (j.contains("trends")) {
      for (const auto& t : j.at("trends")) {
        PlantedTrend trend;
        trend.level = t.value("level", trend.level);
        trend.a = t.value("a", trend.a);
        trend.b = t.value("b", trend.b);
        trend.interval = parse_interval(t.value("interval", std::string("future")));
        trend.multiplier = t.value("multiplier", trend.multiplier);
        c.trends.push_back(std::move(trend));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("synth config: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::json to_json(const SynthConfig& c) {
  nlohmann::ordered_json j;
  j["seed"] = c.seed;
  j["first_year"] = c.first_year;
  j["last_year"] = c.last_year;
  j["journals"] = c.journals;
  j["categories"] = c.categories;
  j["field_category_prob"] = c.field_category_prob;
  j["category_prob"] = c.category_prob;
  j["unindexed_journals"] = c.unindexed_journals;
  j["papers_per_year"] = c.papers_per_year;
  j["refs_min"] = c.refs_min;
  j["refs_max"] = c.refs_max;
  j["attachment_exponent"] = c.attachment_exponent;
  j["dangling_prob"] = c.dangling_prob;
  j["dangling_pool"] = c.dangling_pool;
  j["t0_first"] = c.t0_first;
  j["t0_last"] = c.t0_last;
  j["past_len"] = c.past_len;
  j["future_len"] = c.future_len;
  j["plant_base_rate"] = c.plant_base_rate;
  j["future_mirrors_past"] = c.future_mirrors_past;
  j["trends"] = nlohmann::ordered_json::array();
  for (const auto& t : c.trends) {
    j["trends"].push_back({{"level", t.level},
                           {"a", t.a},
                           {"b", t.b},
                           {"interval", std::string(to_string(t.interval))},
                           {"multiplier", t.multiplier}});
  }
  return nlohmann::json::parse(j.dump());
}

SynthConfig load_synth_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read synth config '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("synth config '" + path.string() + "': " + e.what());
  }
  return synth_config_from_json(j);
}

SynthCorpus generate_corpus(const SynthConfig& config) {
  config.validate();
  return Generator(config).run();
}

void write_synth(const SynthCorpus& synth, const std::filesystem::path& dir, const std::vector<std::string>& header) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw DataError("cannot write '" + (dir / name).string() + "'");
    return out;
  };
  auto comment = [&](std::ostream& out) {
    for (const auto& line : header) out << "# " << line << '\n';
  };
  {
    auto out = open("corpus.jsonl");
    comment(out);
    write_corpus_jsonl(out, synth.corpus);
  }
  {
    auto out = open("catalog.csv");
    comment(out);
    write_catalog_csv(out, synth.catalog);
  }
  auto out = open("planted.json");
  nlohmann::ordered_json planted = nlohmann::ordered_json::array();
  for (const auto& t : synth.planted) {
    planted.push_back({{"level", t.level},
                       {"a", t.a},
                       {"b", t.b},
                       {"interval", std::string(to_string(t.interval))},
                       {"multiplier", t.multiplier}});
  }
  nlohmann::ordered_json doc;
  doc["header"] = header;
  doc["trends"] = std::move(planted);
  out << doc.dump(2) << '\n';
}

}  // namespace cocite
