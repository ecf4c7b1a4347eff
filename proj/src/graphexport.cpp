#include "cocite/graphexport.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "cocite/csv.hpp"
#include "cocite/error.hpp"

namespace cocite {

namespace {

using EdgeKey = std::pair<std::string, std::string>;

struct NodeAttribute {
  const char* title;
  std::optional<double> JournalNode::*field;
  const char* score;  // matching kScoreVariables name
};

constexpr std::array<NodeAttribute, 6> kNodeIndexes{{
    {"cit_alt", &JournalNode::cit_alt, "cit_alt_mean"},
    {"jr_alt", &JournalNode::jr_alt, "jr_alt_mean"},
    {"sc_alt", &JournalNode::sc_alt, "sc_alt_mean"},
    {"acit", &JournalNode::acit, "acit_mean"},
    {"ajr", &JournalNode::ajr, "ajr_mean"},
    {"asc", &JournalNode::asc, "asc_mean"},
}};

std::size_t score_index(std::string_view name) {
  for (std::size_t i = 0; i < kScoreVariables.size(); ++i) {
    if (name == kScoreVariables[i].name) return i;
  }
  throw ValidationError("unknown score variable");
}

std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

}  // namespace

std::vector<std::pair<std::string, std::uint64_t>> journal_citations(const SampleSet& sample,
                                                                     const Corpus& corpus,
                                                                     const JournalCatalog& catalog) {
  std::map<std::string, std::uint64_t, std::less<>> received;
  for (const auto& id : sample.ids) {
    const PaperRecord* rec = corpus.find(id);
    if (!rec) throw DataError("sampled paper '" + id + "' is not a corpus record");
    received.try_emplace(rec->journal, 0);
    for (const auto& ref : rec->refs) {
      auto resolved = resolve_levels(corpus, catalog, ref);
      if (resolved.status != RefStatus::Resolved) continue;
      auto it = received.find(resolved.journal);
      if (it == received.end()) it = received.emplace(std::string(resolved.journal), 0).first;
      ++it->second;
    }
  }
  std::vector<std::pair<std::string, std::uint64_t>> ranked(received.begin(), received.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return ranked;
}

JournalGraph build_journal_graph(const SampleSet& sample, const Corpus& corpus, const JournalCatalog& catalog,
                                 const GraphOptions& options, std::vector<std::string>* warnings) {
  const auto ranked = journal_citations(sample, corpus, catalog);
  if (options.top_k > ranked.size() && warnings) {
    warnings->push_back("top_k " + std::to_string(options.top_k) + " exceeds the " +
                        std::to_string(ranked.size()) + " journals present; keeping all");
  }
  const std::size_t keep = std::min(options.top_k, ranked.size());
  std::set<std::string, std::less<>> kept;
  JournalGraph graph;
  graph.directed = options.edges == EdgeMode::Citation;
  for (std::size_t i = 0; i < keep; ++i) {
    kept.insert(ranked[i].first);
    JournalNode node;
    node.id = ranked[i].first;
    node.name = std::string(catalog.name(ranked[i].first));
    node.citations_received = ranked[i].second;
    graph.nodes.push_back(std::move(node));
  }
  std::sort(graph.nodes.begin(), graph.nodes.end(),
            [](const JournalNode& a, const JournalNode& b) { return a.id < b.id; });

  std::map<EdgeKey, std::uint64_t> weights;
  std::vector<std::string_view> cited;
  for (const auto& id : sample.ids) {
    const PaperRecord* rec = corpus.find(id);
    cited.clear();
    for (const auto& ref : rec->refs) {
      auto resolved = resolve_levels(corpus, catalog, ref);
      if (resolved.status == RefStatus::Resolved && kept.contains(resolved.journal)) {
        cited.push_back(resolved.journal);
      }
    }
    if (options.edges == EdgeMode::Citation) {
      if (!kept.contains(rec->journal)) continue;
      for (auto j : cited) ++weights[{rec->journal, std::string(j)}];
    } else {
      for (std::size_t a = 0; a < cited.size(); ++a) {
        for (std::size_t b = a + 1; b < cited.size(); ++b) {
          auto x = std::min(cited[a], cited[b]);
          auto y = std::max(cited[a], cited[b]);
          ++weights[{std::string(x), std::string(y)}];
        }
      }
    }
  }
  for (const auto& [key, w] : weights) graph.edges.push_back({key.first, key.second, w});
  return graph;
}

std::vector<JournalIndexRow> journal_index_table(std::span<const PaperScoreVector> scores,
                                                 std::span<const std::string> ranking, std::size_t top_k) {
  struct Acc {
    std::size_t papers = 0;
    std::array<double, kScoreVariables.size()> sum{};
    std::array<std::size_t, kScoreVariables.size()> n{};
  };
  std::map<std::string, Acc, std::less<>> by_journal;
  for (const auto& v : scores) {
    auto& acc = by_journal[v.journal];
    ++acc.papers;
    for (std::size_t i = 0; i < kScoreVariables.size(); ++i) {
      if (const auto& value = v.*kScoreVariables[i].field) {
        acc.sum[i] += *value;
        ++acc.n[i];
      }
    }
  }
  std::vector<JournalIndexRow> rows;
  for (std::size_t r = 0; r < ranking.size() && r < top_k; ++r) {
    auto it = by_journal.find(ranking[r]);
    if (it == by_journal.end()) continue;
    JournalIndexRow row;
    row.journal = ranking[r];
    row.papers = it->second.papers;
    for (std::size_t i = 0; i < kScoreVariables.size(); ++i) {
      if (it->second.n[i] > 0) row.means[i] = it->second.sum[i] / static_cast<double>(it->second.n[i]);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void attach_index_means(JournalGraph& graph, std::span<const JournalIndexRow> rows) {
  std::map<std::string_view, const JournalIndexRow*> by_id;
  for (const auto& row : rows) by_id[row.journal] = &row;
  for (auto& node : graph.nodes) {
    auto it = by_id.find(node.id);
    if (it == by_id.end()) continue;
    for (const auto& attr : kNodeIndexes) node.*attr.field = it->second->means[score_index(attr.score)];
  }
}

void write_journal_table_csv(std::ostream& out, std::span<const JournalIndexRow> rows,
                             std::span<const std::string> header) {
  for (const auto& line : header) out << "# " << line << '\n';
  std::vector<std::string> fields{"journal", "name", "papers"};
  for (const auto& var : kScoreVariables) fields.emplace_back(var.name);
  out << csv::join(fields) << '\n';
  std::vector<const JournalIndexRow*> sorted;
  for (const auto& row : rows) sorted.push_back(&row);
  std::sort(sorted.begin(), sorted.end(), [](const JournalIndexRow* a, const JournalIndexRow* b) {
    return std::tie(a->name, a->journal) < std::tie(b->name, b->journal);
  });
  for (const auto* row : sorted) {
    fields = {row->journal, row->name, std::to_string(row->papers)};
    for (const auto& m : row->means) fields.push_back(m ? csv::format_double(*m) : std::string());
    out << csv::join(fields) << '\n';
  }
}

GraphFormat parse_graph_format(std::string_view name) {
  if (name == "gexf") return GraphFormat::Gexf;
  if (name == "csv" || name == "edgelist" || name == "edgelist_csv") return GraphFormat::EdgeListCsv;
  throw ValidationError("unknown graph format '" + std::string(name) + "' (expected gexf or csv)");
}

void write_gexf(std::ostream& out, const JournalGraph& graph, std::span<const std::string> header) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<gexf xmlns=\"http://www.gexf.net/1.2draft\" xmlns:viz=\"http://www.gexf.net/1.2draft/viz\" "
         "version=\"1.2\">\n";
  out << "  <meta>\n    <creator>cocite</creator>\n    <description>";
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "; " : "") << xml_escape(header[i]);
  out << "</description>\n  </meta>\n";
  out << "  <graph mode=\"static\" defaultedgetype=\"" << (graph.directed ? "directed" : "undirected") << "\">\n";
  out << "    <attributes class=\"node\">\n";
  out << "      <attribute id=\"name\" title=\"name\" type=\"string\"/>\n";
  out << "      <attribute id=\"citations_received\" title=\"citations_received\" type=\"long\"/>\n";
  for (const auto& attr : kNodeIndexes) {
    out << "      <attribute id=\"" << attr.title << "\" title=\"" << attr.title << "\" type=\"double\"/>\n";
  }
  out << "    </attributes>\n    <nodes>\n";
  for (const auto& node : graph.nodes) {
    out << "      <node id=\"" << xml_escape(node.id) << "\" label=\"" << xml_escape(node.name) << "\">\n";
    out << "        <attvalues>\n";
    out << "          <attvalue for=\"name\" value=\"" << xml_escape(node.name) << "\"/>\n";
    out << "          <attvalue for=\"citations_received\" value=\"" << node.citations_received << "\"/>\n";
    for (const auto& attr : kNodeIndexes) {
      if (const auto& v = node.*attr.field) {
        out << "          <attvalue for=\"" << attr.title << "\" value=\"" << csv::format_double(*v) << "\"/>\n";
      }
    }
    out << "        </attvalues>\n";
    out << "        <viz:size value=\"" << node.citations_received << "\"/>\n";
    out << "      </node>\n";
  }
  out << "    </nodes>\n    <edges>\n";
  for (std::size_t i = 0; i < graph.edges.size(); ++i) {
    const auto& e = graph.edges[i];
    out << "      <edge id=\"" << i << "\" source=\"" << xml_escape(e.source) << "\" target=\""
        << xml_escape(e.target) << "\" weight=\"" << e.weight << "\"/>\n";
  }
  out << "    </edges>\n  </graph>\n</gexf>\n";
}

void write_edgelist_csv(std::ostream& out, const JournalGraph& graph, std::span<const std::string> header) {
  for (const auto& line : header) out << "# " << line << '\n';
  out << "source,target,weight\n";
  for (const auto& e : graph.edges) out << csv::join({e.source, e.target, std::to_string(e.weight)}) << '\n';
}

void export_graph(const JournalGraph& graph, GraphFormat format, const std::filesystem::path& path,
                  std::span<const std::string> header) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write graph file '" + path.string() + "'");
  if (format == GraphFormat::Gexf) {
    write_gexf(out, graph, header);
  } else {
    write_edgelist_csv(out, graph, header);
  }
  if (!out) throw DataError("failed writing graph file '" + path.string() + "'");
}

namespace {

template <class T>
T parse_value(const std::string& text) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) throw DataError("GEXF: bad number '" + text + "'");
  return value;
}

}  // namespace

JournalGraph read_gexf(std::istream& in) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    throw DataError(std::string("GEXF: ") + e.what());
  }
  JournalGraph graph;
  try {
    const auto& g = tree.get_child("gexf.graph");
    graph.directed = g.get<std::string>("<xmlattr>.defaultedgetype", "directed") == "directed";
    std::map<std::string, std::string> titles;
    for (const auto& [tag, attrs] : g) {
      if (tag != "attributes") continue;
      for (const auto& [atag, attr] : attrs) {
        if (atag == "attribute") titles[attr.get<std::string>("<xmlattr>.id")] = attr.get<std::string>("<xmlattr>.title");
      }
    }
    if (auto nodes = g.get_child_optional("nodes")) {
      for (const auto& [tag, n] : *nodes) {
        if (tag != "node") continue;
        JournalNode node;
        node.id = n.get<std::string>("<xmlattr>.id");
        node.name = n.get<std::string>("<xmlattr>.label", "");
        if (auto values = n.get_child_optional("attvalues")) {
          for (const auto& [vtag, v] : *values) {
            if (vtag != "attvalue") continue;
            const std::string title = titles.at(v.get<std::string>("<xmlattr>.for"));
            const std::string value = v.get<std::string>("<xmlattr>.value");
            if (title == "name") {
              node.name = value;
            } else if (title == "citations_received") {
              node.citations_received = parse_value<std::uint64_t>(value);
            } else {
              for (const auto& attr : kNodeIndexes) {
                if (title == attr.title) node.*attr.field = parse_value<double>(value);
              }
            }
          }
        }
        graph.nodes.push_back(std::move(node));
      }
    }
    if (auto edges = g.get_child_optional("edges")) {
      for (const auto& [tag, e] : *edges) {
        if (tag != "edge") continue;
        graph.edges.push_back({e.get<std::string>("<xmlattr>.source"), e.get<std::string>("<xmlattr>.target"),
                               parse_value<std::uint64_t>(e.get<std::string>("<xmlattr>.weight", "1"))});
      }
    }
  } catch (const pt::ptree_error& e) {
    throw DataError(std::string("GEXF: ") + e.what());
  } catch (const std::out_of_range&) {
    throw DataError("GEXF: attvalue refers to an undeclared attribute");
  }
  return graph;
}

}  // namespace cocite
