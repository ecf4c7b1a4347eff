#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "cocite/corpus.hpp"
#include "cocite/cooccur.hpp"
#include "cocite/graphexport.hpp"
#include "json.hpp"

namespace cocite {

inline constexpr const char* kToolVersion = "cocite 1.0.0";

/// Polynomial degree per score variable used when no override is given.
const std::map<std::string, int>& default_degrees();

/// Variable orders of the nested models: citation, journal, then subject level.
const std::vector<std::pair<std::string, std::vector<std::string>>>& hierarchy_orders();

struct RunConfig {
  std::filesystem::path corpus;
  std::filesystem::path catalog;
  std::string input_format = "jsonl";
  std::string t0 = "2003";  // "2003" or "2003-2005"
  int past_len = 7;
  int future_len = 7;
  std::string field_category;
  int min_field_journals = 2;
  bool collapse_per_paper = false;
  bool drop_dangling = false;
  double top_frac = 0.05;
  std::map<std::string, int> degrees;  // overrides of default_degrees()
  std::size_t top_k = 70;              // graph nodes
  std::size_t table_top_k = 36;        // journal index table rows
  std::string graph_format = "gexf";
  std::string edges = "citation";      // or "cocitation"
  std::filesystem::path out_dir = "out";
  unsigned shards = 1;

  /// Throws ValidationError on any invalid field.
  void validate() const;
  WindowSpec window() const;
  CountOptions count_options() const;
  int degree(const std::string& variable) const;

  /// Every field that affects results; shard count and paths are left out.
  nlohmann::json to_json() const;
  std::string digest() const;

  std::filesystem::path counts_path() const { return out_dir / "counts.ccl"; }
  std::filesystem::path scores_path() const { return out_dir / "scores.csv"; }
  std::filesystem::path curves_path() const { return out_dir / "curves.csv"; }
  std::filesystem::path fits_path() const { return out_dir / "fits.json"; }
  std::filesystem::path graph_path() const;
  std::filesystem::path journal_table_path() const { return out_dir / "journals.csv"; }
};

/// Parses "name=degree".
std::pair<std::string, int> parse_degree_override(const std::string& text);

/// Each command reads its inputs from files and writes its outputs to files;
/// warnings go to `log`.
void cmd_count(const RunConfig& config, std::ostream& log);
void cmd_score(const RunConfig& config, std::ostream& log);
void cmd_analyze(const RunConfig& config, std::ostream& log);
void cmd_graph(const RunConfig& config, std::ostream& log);
void cmd_pipeline(const RunConfig& config, std::ostream& log);

/// Writes corpus.jsonl, catalog.csv and planted.json for a JSON synth config.
void cmd_synth(const std::filesystem::path& config_path, const std::filesystem::path& out_dir, std::ostream& log);

/// 0 success, 2 validation, 3 data, 4 degenerate statistics, 1 anything else.
int exit_code_for(const std::exception& e);

}  // namespace cocite
