// Command-line front end: count, score, analyze, graph, synth, pipeline.

#include <iostream>

#include "CLI11.hpp"
#include "cocite/commands.hpp"
#include "cocite/error.hpp"

int main(int argc, char** argv) {
  cocite::RunConfig config;
  std::vector<std::string> degree_overrides;
  std::string out_dir = config.out_dir.string();
  std::string corpus, catalog;

  CLI::App app{"Co-citation novelty and anticipation indexes"};
  app.set_config("--config", "", "TOML file with option defaults; flags take precedence");
  app.require_subcommand(1);
  app.fallthrough();

  app.add_option("--corpus", corpus, "Corpus file (JSON-Lines or CSV)");
  app.add_option("--catalog", catalog, "Catalog CSV: journal_id,subject_category_id,journal_name");
  app.add_option("--format", config.input_format, "Corpus format: jsonl or csv")->capture_default_str();
  app.add_option("--t0", config.t0, "Present interval, e.g. 2003 or 2003-2005")->capture_default_str();
  app.add_option("--past", config.past_len, "Past window length in years")->capture_default_str();
  app.add_option("--future", config.future_len, "Future window length in years")->capture_default_str();
  app.add_option("--field", config.field_category, "Field subject category used for sampling");
  app.add_option("--min-field-journals", config.min_field_journals, "Distinct field journals a paper must cite")
      ->capture_default_str();
  app.add_flag("--collapse-per-paper", config.collapse_per_paper,
               "Count each journal/subject pair once per citing paper");
  app.add_flag("--drop-dangling", config.drop_dangling, "Leave references without metadata out entirely");
  app.add_option("--top-frac", config.top_frac, "Share of papers labelled hits")->capture_default_str();
  app.add_option("--degree", degree_overrides, "Polynomial degree override, name=degree (repeatable)");
  app.add_option("--top-k", config.top_k, "Journals kept in the graph")->capture_default_str();
  app.add_option("--table-top-k", config.table_top_k, "Journals in the index table")->capture_default_str();
  app.add_option("--graph-format", config.graph_format, "gexf or csv")->capture_default_str();
  app.add_option("--edges", config.edges, "citation or cocitation")->capture_default_str();
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();
  app.add_option("--shards", config.shards, "Counting shards (threads)")->capture_default_str();

  auto* count = app.add_subcommand("count", "Count co-citation pairs into a binary cache");
  auto* score = app.add_subcommand("score", "Score present-interval papers from the cache");
  auto* analyze = app.add_subcommand("analyze", "Hit curves, logistic fits and mutual information");
  auto* graph = app.add_subcommand("graph", "Journal network and per-journal index table");
  auto* pipeline = app.add_subcommand("pipeline", "count, score, analyze and graph in turn");
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus and catalog");
  std::string synth_config;
  synth->add_option("synth_config", synth_config, "JSON synth configuration")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    config.corpus = corpus;
    config.catalog = catalog;
    config.out_dir = out_dir;
    for (const auto& text : degree_overrides) {
      auto [name, d] = cocite::parse_degree_override(text);
      config.degrees[name] = d;
    }
    if (synth->parsed()) {
      cocite::cmd_synth(synth_config, config.out_dir, std::cerr);
    } else if (count->parsed()) {
      cocite::cmd_count(config, std::cerr);
    } else if (score->parsed()) {
      cocite::cmd_score(config, std::cerr);
    } else if (analyze->parsed()) {
      cocite::cmd_analyze(config, std::cerr);
    } else if (graph->parsed()) {
      cocite::cmd_graph(config, std::cerr);
    } else if (pipeline->parsed()) {
      cocite::cmd_pipeline(config, std::cerr);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cocite::exit_code_for(e);
  }
  return 0;
}
