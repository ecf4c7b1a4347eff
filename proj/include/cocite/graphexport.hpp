#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cocite/corpus.hpp"
#include "cocite/indexes.hpp"

namespace cocite {

struct JournalNode {
  std::string id;
  std::string name;
  std::uint64_t citations_received = 0;
  std::optional<double> cit_alt, jr_alt, sc_alt, acit, ajr, asc;

  friend bool operator==(const JournalNode&, const JournalNode&) = default;
};

struct JournalEdge {
  std::string source;
  std::string target;
  std::uint64_t weight = 0;

  friend bool operator==(const JournalEdge&, const JournalEdge&) = default;
};

/// Nodes sorted by id, edges by (source, target).
struct JournalGraph {
  bool directed = true;
  std::vector<JournalNode> nodes;
  std::vector<JournalEdge> edges;
};

enum class EdgeMode {
  Citation,    // citing journal -> cited journal
  CoCitation,  // undirected, journal pairs co-cited by one paper
};

struct GraphOptions {
  std::size_t top_k = 70;
  EdgeMode edges = EdgeMode::Citation;
};

/// Journals ranked by citations received from the sampled papers (descending,
/// ties by id). Journals of sampled papers that receive nothing rank last.
std::vector<std::pair<std::string, std::uint64_t>> journal_citations(const SampleSet& sample,
                                                                     const Corpus& corpus,
                                                                     const JournalCatalog& catalog);

/// Journal network of the sampled papers restricted to the top_k journals by
/// citations received. Only references resolving to an indexed journal count.
/// When top_k exceeds the journal universe every journal is kept and a warning
/// is appended.
JournalGraph build_journal_graph(const SampleSet& sample, const Corpus& corpus, const JournalCatalog& catalog,
                                 const GraphOptions& options = {}, std::vector<std::string>* warnings = nullptr);

struct JournalIndexRow {
  std::string journal;
  std::string name;
  std::size_t papers = 0;
  std::array<std::optional<double>, kScoreVariables.size()> means;  // kScoreVariables order
};

/// Unweighted per-paper mean of every score for the first top_k journals of
/// `ranking` that published at least one scored paper, in ranking order.
/// Missing scores are skipped per variable.
std::vector<JournalIndexRow> journal_index_table(std::span<const PaperScoreVector> scores,
                                                 std::span<const std::string> ranking, std::size_t top_k);

/// Copies cit_alt, jr_alt, sc_alt, acit, ajr and asc means onto matching nodes.
void attach_index_means(JournalGraph& graph, std::span<const JournalIndexRow> rows);

/// Rows sorted by name, then id.
void write_journal_table_csv(std::ostream& out, std::span<const JournalIndexRow> rows,
                             std::span<const std::string> header = {});

enum class GraphFormat { Gexf, EdgeListCsv };
GraphFormat parse_graph_format(std::string_view name);

/// GEXF 1.2 with node attributes (name, citations_received, six index means),
/// a viz size equal to citations_received and weighted edges.
void write_gexf(std::ostream& out, const JournalGraph& graph, std::span<const std::string> header = {});
/// source,target,weight
void write_edgelist_csv(std::ostream& out, const JournalGraph& graph, std::span<const std::string> header = {});
/// Throws DataError when the path cannot be written.
void export_graph(const JournalGraph& graph, GraphFormat format, const std::filesystem::path& path,
                  std::span<const std::string> header = {});

/// Reads the GEXF subset written by write_gexf.
JournalGraph read_gexf(std::istream& in);

}  // namespace cocite
