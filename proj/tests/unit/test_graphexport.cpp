#include <filesystem>
#include <fstream>
#include <set>
#include <tuple>
#include <random>
#include <sstream>

#include "cocite/error.hpp"
#include "cocite/graphexport.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace cocite;
using testutil::catalog_of;
using testutil::corpus_of;

namespace {

SampleSet sample_of(std::vector<std::string> ids) {
  std::sort(ids.begin(), ids.end());
  return SampleSet{Interval::Present, std::move(ids)};
}

std::string gexf_of(const JournalGraph& g) {
  std::ostringstream out;
  write_gexf(out, g);
  return out.str();
}

JournalGraph random_graph(std::mt19937_64& rng) {
  JournalGraph g;
  const std::size_t n = 1 + rng() % 12;
  for (std::size_t i = 0; i < n; ++i) {
    JournalNode node;
    node.id = "J" + std::to_string(i);
    node.name = i % 3 == 0 ? "A & B <" + std::to_string(i) + "> \"quoted\"" : "Journal " + std::to_string(i);
    node.citations_received = rng() % 1000;
    auto maybe = [&]() -> std::optional<double> {
      if (rng() % 4 == 0) return std::nullopt;
      return static_cast<double>(rng() % 100000) / 7919.0;
    };
    node.cit_alt = maybe();
    node.jr_alt = maybe();
    node.sc_alt = maybe();
    node.acit = maybe();
    node.ajr = maybe();
    node.asc = maybe();
    g.nodes.push_back(node);
  }
  std::sort(g.nodes.begin(), g.nodes.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  for (const auto& a : g.nodes) {
    for (const auto& b : g.nodes) {
      if (rng() % 3 == 0) g.edges.push_back({a.id, b.id, 1 + rng() % 50});
    }
  }
  std::sort(g.edges.begin(), g.edges.end(),
            [](const auto& a, const auto& b) { return std::tie(a.source, a.target) < std::tie(b.source, b.target); });
  return g;
}

}  // namespace

TEST_CASE("one paper citing two works in J2 gives J1->J2 weight 2") {
  const Corpus corpus = corpus_of({
      {"A", 1998, "J2", {}},
      {"B", 1999, "J2", {}},
      {"P", 2003, "J1", {"A", "B"}},
  });
  const auto catalog = catalog_of({{"J1", "SC1"}, {"J2", "SC1"}});
  const JournalGraph g = build_journal_graph(sample_of({"P"}), corpus, catalog);
  REQUIRE(g.edges.size() == 1);
  CHECK(g.edges[0] == JournalEdge{"J1", "J2", 2});
  REQUIRE(g.nodes.size() == 2);
  CHECK(g.nodes[0].id == "J1");
  CHECK(g.nodes[0].citations_received == 0);
  CHECK(g.nodes[1].citations_received == 2);
  CHECK(g.nodes[1].name == "Name of J2");
}

TEST_CASE("no references between journals gives no edge") {
  const Corpus corpus = corpus_of({
      {"P", 2003, "J1", {}},
      {"Q", 2003, "J2", {}},
  });
  const JournalGraph g = build_journal_graph(sample_of({"P", "Q"}), corpus, catalog_of({{"J1", "S"}, {"J2", "S"}}));
  CHECK(g.edges.empty());
  CHECK(g.nodes.size() == 2);
}

TEST_CASE("top_k truncation keeps the most-cited journals and warns when too large") {
  const Corpus corpus = corpus_of({
      {"a1", 1998, "J1", {}},
      {"a2", 1998, "J1", {}},
      {"a3", 1998, "J1", {}},
      {"b1", 1998, "J2", {}},
      {"b2", 1998, "J2", {}},
      {"c1", 1998, "J3", {}},
      {"P", 2003, "J3", {"a1", "a2", "a3", "b1", "b2", "c1"}},
  });
  const auto catalog = catalog_of({{"J1", "S"}, {"J2", "S"}, {"J3", "S"}});
  std::vector<std::string> warnings;
  const JournalGraph two = build_journal_graph(sample_of({"P"}), corpus, catalog, {2, EdgeMode::Citation}, &warnings);
  REQUIRE(two.nodes.size() == 2);
  CHECK(two.nodes[0].id == "J1");
  CHECK(two.nodes[1].id == "J2");
  CHECK(two.edges.empty());  // the only citing journal was cut
  CHECK(warnings.empty());

  const JournalGraph all = build_journal_graph(sample_of({"P"}), corpus, catalog, {10, EdgeMode::Citation}, &warnings);
  CHECK(all.nodes.size() == 3);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("10") != std::string::npos);
}

TEST_CASE("co-citation edges are undirected journal pairs") {
  const Corpus corpus = corpus_of({
      {"A", 1998, "J1", {}},
      {"B", 1998, "J2", {}},
      {"C", 1998, "J2", {}},
      {"P", 2003, "J3", {"A", "B", "C"}},
  });
  const auto catalog = catalog_of({{"J1", "S"}, {"J2", "S"}, {"J3", "S"}});
  const JournalGraph g = build_journal_graph(sample_of({"P"}), corpus, catalog, {70, EdgeMode::CoCitation});
  CHECK_FALSE(g.directed);
  REQUIRE(g.edges.size() == 2);
  CHECK(g.edges[0] == JournalEdge{"J1", "J2", 2});
  CHECK(g.edges[1] == JournalEdge{"J2", "J2", 1});
}

TEST_CASE("out-edge weights sum to the resolvable references between kept journals") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    auto cfg = testutil::small_config(seed);
    const SynthCorpus synth = generate_corpus(cfg);
    const WindowSpec window = cfg.window();
    const SampleSet sample = select_sample(synth.corpus, synth.catalog, window, Interval::Present, "SC00", 1);
    REQUIRE_FALSE(sample.ids.empty());
    for (std::size_t top_k : {3u, 7u, 70u}) {
      const JournalGraph g = build_journal_graph(sample, synth.corpus, synth.catalog, {top_k, EdgeMode::Citation});
      std::set<std::string> kept;
      for (const auto& n : g.nodes) kept.insert(n.id);
      std::uint64_t expected = 0;
      for (const auto& id : sample.ids) {
        const PaperRecord* rec = synth.corpus.find(id);
        if (!kept.contains(rec->journal)) continue;
        for (const auto& ref : rec->refs) {
          const auto r = resolve_levels(synth.corpus, synth.catalog, ref);
          if (r.status == RefStatus::Resolved && kept.contains(std::string(r.journal))) ++expected;
        }
      }
      std::uint64_t total = 0;
      for (const auto& e : g.edges) total += e.weight;
      CHECK(total == expected);
      // citations_received is non-increasing along the rank, so every dropped journal ranks below every kept one
      const auto ranked = journal_citations(sample, synth.corpus, synth.catalog);
      for (std::size_t i = 1; i < ranked.size(); ++i) CHECK(ranked[i - 1].second >= ranked[i].second);
      CHECK(g.nodes.size() == std::min(top_k, ranked.size()));
    }
  }
}

TEST_CASE("journal index table") {
  std::vector<PaperScoreVector> scores(3);
  scores[0].paper_id = "p1";
  scores[0].journal = "J1";
  scores[0].cit_alt_mean = 0.9;
  scores[0].acit_mean = 2.0;
  scores[1].paper_id = "p2";
  scores[1].journal = "J1";
  scores[1].cit_alt_mean = 1.1;
  scores[2].paper_id = "p3";
  scores[2].journal = "J2";
  scores[2].cit_alt_mean = 0.5;
  scores[2].jr_mean = 3.0;

  const std::vector<std::string> ranking{"J2", "J1", "J3"};
  const auto rows = journal_index_table(scores, ranking, 36);
  REQUIRE(rows.size() == 2);  // J3 has no papers
  const auto col = [](std::string_view name) {
    for (std::size_t i = 0; i < kScoreVariables.size(); ++i) {
      if (name == kScoreVariables[i].name) return i;
    }
    return kScoreVariables.size();
  };
  CHECK(rows[1].journal == "J1");
  CHECK(rows[1].papers == 2);
  CHECK(*rows[1].means[col("cit_alt_mean")] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(*rows[1].means[col("acit_mean")] == 2.0);
  CHECK_FALSE(rows[1].means[col("jr_mean")].has_value());
  // a journal with one paper reproduces that paper's vector
  CHECK(rows[0].journal == "J2");
  CHECK(rows[0].papers == 1);
  for (std::size_t i = 0; i < kScoreVariables.size(); ++i) CHECK(rows[0].means[i] == scores[2].*kScoreVariables[i].field);

  const auto top1 = journal_index_table(scores, ranking, 1);
  REQUIRE(top1.size() == 1);
  CHECK(top1[0].journal == "J2");

  JournalGraph g;
  g.nodes.push_back({"J1", "one", 5, {}, {}, {}, {}, {}, {}});
  attach_index_means(g, rows);
  CHECK(*g.nodes[0].cit_alt == doctest::Approx(1.0));
  CHECK(*g.nodes[0].acit == 2.0);
  CHECK_FALSE(g.nodes[0].ajr.has_value());

  std::ostringstream csv;
  write_journal_table_csv(csv, rows);
  std::size_t lines = 0;
  for (char c : csv.str()) lines += c == '\n' ? 1 : 0;
  CHECK(lines == 3);
  CHECK(csv.str().rfind("journal,name,papers,cit_mean", 0) == 0);
}

TEST_CASE("empty graph exports a valid GEXF document") {
  const std::string text = gexf_of(JournalGraph{});
  CHECK(text.find("<gexf") != std::string::npos);
  std::istringstream in(text);
  const JournalGraph back = read_gexf(in);
  CHECK(back.nodes.empty());
  CHECK(back.edges.empty());
}

TEST_CASE("GEXF round trip on a toy graph and on random graphs") {
  JournalGraph toy;
  toy.nodes.push_back({"J1", "Alpha", 3, 1.5, std::nullopt, 0.25, 1e-17, 12345.678, std::nullopt});
  toy.nodes.push_back({"J2", "Beta & <Gamma>", 0, {}, {}, {}, {}, {}, {}});
  toy.nodes.push_back({"J3", "Delta", 9, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6});
  toy.edges.push_back({"J1", "J2", 2});
  toy.edges.push_back({"J3", "J1", 7});
  std::istringstream in(gexf_of(toy));
  const JournalGraph back = read_gexf(in);
  CHECK(back.directed);
  CHECK(back.nodes == toy.nodes);
  CHECK(back.edges == toy.edges);

  std::mt19937_64 rng(11);
  for (int i = 0; i < 10; ++i) {
    JournalGraph g = random_graph(rng);
    g.directed = i % 2 == 0;
    std::istringstream s(gexf_of(g));
    const JournalGraph r = read_gexf(s);
    CHECK(r.directed == g.directed);
    CHECK(r.nodes == g.nodes);
    CHECK(r.edges == g.edges);
  }
}

TEST_CASE("edge list CSV has one row per edge and export is byte-deterministic") {
  std::mt19937_64 rng(3);
  const JournalGraph g = random_graph(rng);
  std::ostringstream out;
  write_edgelist_csv(out, g, std::vector<std::string>{"tool: test"});
  std::istringstream lines(out.str());
  std::string line;
  std::size_t rows = 0;
  bool header_seen = false;
  while (std::getline(lines, line)) {
    if (line.rfind("#", 0) == 0) continue;
    if (!header_seen) {
      CHECK(line == "source,target,weight");
      header_seen = true;
      continue;
    }
    ++rows;
  }
  CHECK(rows == g.edges.size());

  const auto dir = std::filesystem::temp_directory_path() / "cocite_graph_test";
  std::filesystem::create_directories(dir);
  export_graph(g, GraphFormat::Gexf, dir / "a.gexf");
  export_graph(g, GraphFormat::Gexf, dir / "b.gexf");
  export_graph(g, GraphFormat::EdgeListCsv, dir / "a.csv");
  export_graph(g, GraphFormat::EdgeListCsv, dir / "b.csv");
  const auto slurp = [](const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(f), {});
  };
  CHECK(slurp(dir / "a.gexf") == slurp(dir / "b.gexf"));
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
  CHECK(slurp(dir / "a.gexf") == gexf_of(g));
  CHECK_THROWS_AS(export_graph(g, GraphFormat::Gexf, dir / "missing" / "x.gexf"), DataError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("graph format names") {
  CHECK(parse_graph_format("gexf") == GraphFormat::Gexf);
  CHECK(parse_graph_format("edgelist_csv") == GraphFormat::EdgeListCsv);
  CHECK(parse_graph_format("csv") == GraphFormat::EdgeListCsv);
  CHECK_THROWS_AS((void)parse_graph_format("graphml"), ValidationError);
}
