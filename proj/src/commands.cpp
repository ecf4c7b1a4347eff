#include "cocite/commands.hpp"

#include <fstream>
#include <ostream>

#include "cocite/csv.hpp"
#include "cocite/digest.hpp"
#include "cocite/error.hpp"
#include "cocite/indexes.hpp"
#include "cocite/stats.hpp"
#include "cocite/synth.hpp"

namespace cocite {

const std::map<std::string, int>& default_degrees() {
  static const std::map<std::string, int> degrees{
      {"cit_mean", 2},     {"cit_p90", 2},      {"jr_mean", 2},      {"jr_p90", 2},     {"sc_mean", 2},
      {"sc_p90", 2},       {"ncit_pct", 2},     {"acit_mean", 2},    {"ajr_mean", 3},   {"asc_mean", 3},
      {"cit_alt_mean", 2}, {"jr_alt_mean", 2},  {"sc_alt_mean", 2},
  };
  return degrees;
}

const std::vector<std::pair<std::string, std::vector<std::string>>>& hierarchy_orders() {
  static const std::vector<std::pair<std::string, std::vector<std::string>>> orders{
      {"alt", {"cit_alt_mean", "jr_alt_mean", "sc_alt_mean"}},
      {"anticipation", {"acit_mean", "ajr_mean", "asc_mean"}},
  };
  return orders;
}

void RunConfig::validate() const {
  if (corpus.empty()) throw ValidationError("no corpus path given");
  if (catalog.empty()) throw ValidationError("no catalog path given");
  (void)parse_input_format(input_format);
  (void)window();
  if (field_category.empty()) throw ValidationError("no field category given");
  if (min_field_journals < 0) throw ValidationError("min_field_journals must be >= 0");
  if (!(top_frac > 0.0 && top_frac < 1.0)) throw ValidationError("top_frac must lie in (0, 1)");
  for (const auto& [name, d] : degrees) {
    (void)score_variable(name);
    if (d < 0 || d > 4) throw ValidationError("degree of '" + name + "' must lie in 0..4");
  }
  if (top_k < 1) throw ValidationError("top_k must be positive");
  if (table_top_k < 1) throw ValidationError("table_top_k must be positive");
  (void)parse_graph_format(graph_format);
  if (edges != "citation" && edges != "cocitation") {
    throw ValidationError("edges must be 'citation' or 'cocitation'");
  }
  if (shards < 1 || shards > 1024) throw ValidationError("shards must lie in 1..1024");
}

WindowSpec RunConfig::window() const {
  const YearRange years = parse_year_range(t0);
  return WindowSpec(years.first, years.last, past_len, future_len);
}

CountOptions RunConfig::count_options() const { return {collapse_per_paper, drop_dangling}; }

int RunConfig::degree(const std::string& variable) const {
  if (auto it = degrees.find(variable); it != degrees.end()) return it->second;
  return default_degrees().at(variable);
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j;
  const WindowSpec w = window();
  j["input_format"] = input_format;
  j["window"] = {{"t0_first", w.t0_first()}, {"t0_last", w.t0_last()}, {"past_len", past_len},
                 {"future_len", future_len}};
  j["field_category"] = field_category;
  j["min_field_journals"] = min_field_journals;
  j["collapse_per_paper"] = collapse_per_paper;
  j["drop_dangling"] = drop_dangling;
  j["top_frac"] = top_frac;
  nlohmann::json deg;
  for (const auto& [name, d] : default_degrees()) deg[name] = degree(name);
  j["degrees"] = deg;
  j["top_k"] = top_k;
  j["table_top_k"] = table_top_k;
  j["graph_format"] = graph_format;
  j["edges"] = edges;
  return j;
}

std::string RunConfig::digest() const { return sha256_hex(to_json().dump()); }

std::filesystem::path RunConfig::graph_path() const {
  return out_dir / (parse_graph_format(graph_format) == GraphFormat::Gexf ? "journals.gexf" : "journal_edges.csv");
}

std::pair<std::string, int> parse_degree_override(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw ValidationError("degree override '" + text + "' is not name=degree");
  const std::string name = text.substr(0, eq);
  (void)score_variable(name);
  int d = 0;
  try {
    std::size_t used = 0;
    d = std::stoi(text.substr(eq + 1), &used);
    if (used != text.size() - eq - 1) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw ValidationError("degree override '" + text + "' has no integer degree");
  }
  if (d < 0 || d > 4) throw ValidationError("degree of '" + name + "' must lie in 0..4");
  return {name, d};
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ValidationError*>(&e)) return 2;
  if (dynamic_cast<const DataError*>(&e)) return 3;
  if (dynamic_cast<const DegenerateError*>(&e)) return 4;
  return 1;
}

namespace {

using Inputs = std::vector<std::pair<std::string, std::filesystem::path>>;

struct Provenance {
  std::string command;
  nlohmann::json config;
  std::string config_sha256;
  std::vector<std::pair<std::string, std::string>> inputs;  // label, sha256

  std::vector<std::string> lines() const {
    std::vector<std::string> out{
        std::string("tool: ") + kToolVersion,
        "command: " + command,
        "config: " + config.dump(),
        "config_sha256: " + config_sha256,
    };
    for (const auto& [label, hex] : inputs) out.push_back("input " + label + " sha256: " + hex);
    return out;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["tool"] = kToolVersion;
    j["command"] = command;
    j["config"] = config;
    j["config_sha256"] = config_sha256;
    for (const auto& [label, hex] : inputs) j["inputs"][label] = hex;
    return j;
  }
};

Provenance provenance(const RunConfig& config, std::string command, const Inputs& inputs) {
  Provenance p{std::move(command), config.to_json(), config.digest(), {}};
  for (const auto& [label, path] : inputs) p.inputs.emplace_back(label, sha256_file(path));
  return p;
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

void require_file(const std::filesystem::path& path, const char* what) {
  if (!std::filesystem::is_regular_file(path)) {
    throw DataError(std::string(what) + " '" + path.string() + "' does not exist");
  }
}

struct LoadedInputs {
  Corpus corpus;
  JournalCatalog catalog;
};

LoadedInputs load_inputs(const RunConfig& config, std::ostream& log) {
  require_file(config.corpus, "corpus file");
  require_file(config.catalog, "catalog file");
  LoadedInputs in;
  LoadReport report;
  in.corpus = load_corpus(config.corpus, parse_input_format(config.input_format), &report);
  in.catalog = load_catalog(config.catalog);
  if (report.dropped_duplicate_refs || report.dropped_self_refs) {
    log << "corpus: dropped " << report.dropped_duplicate_refs << " duplicate and " << report.dropped_self_refs
        << " self references\n";
  }
  return in;
}

IntervalCounts load_cache(const RunConfig& config, nlohmann::json* meta) {
  require_file(config.counts_path(), "counts cache");
  std::ifstream in(config.counts_path(), std::ios::binary);
  IntervalCounts counts = read_counts(in, meta);
  if (counts.window() != config.window()) {
    throw DataError("counts cache '" + config.counts_path().string() +
                    "' was built for a different window; rerun count");
  }
  if (counts.options() != config.count_options()) {
    throw DataError("counts cache '" + config.counts_path().string() +
                    "' was built with different counting options; rerun count");
  }
  return counts;
}

void check_cache_inputs(const RunConfig& config, const nlohmann::json& meta) {
  if (!meta.contains("inputs")) return;
  const auto& inputs = meta.at("inputs");
  const std::pair<const char*, std::filesystem::path> files[] = {{"corpus", config.corpus},
                                                                 {"catalog", config.catalog}};
  for (const auto& [label, path] : files) {
    if (inputs.contains(label) && inputs.at(label).get<std::string>() != sha256_file(path)) {
      throw DataError(std::string("counts cache was built from a different ") + label + " file; rerun count");
    }
  }
}

std::vector<PaperScoreVector> load_scores(const RunConfig& config) {
  require_file(config.scores_path(), "scores file");
  std::ifstream in(config.scores_path(), std::ios::binary);
  return read_scores_csv(in);
}

nlohmann::json fit_json(const LogisticFit& fit) {
  nlohmann::json j;
  nlohmann::json vars = nlohmann::json::array();
  nlohmann::json degrees = nlohmann::json::array();
  for (const auto& [name, d] : fit.variables) {
    vars.push_back(name);
    degrees.push_back(d);
  }
  j["variables"] = vars;
  j["degrees"] = degrees;
  j["coefficients"] = fit.coefficients;
  j["null_deviance"] = fit.null_deviance;
  j["residual_deviance"] = fit.residual_deviance;
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  j["separation"] = fit.separation;
  j["n"] = fit.n;
  return j;
}

}  // namespace

void cmd_count(const RunConfig& config, std::ostream& log) {
  config.validate();
  auto in = load_inputs(config, log);
  const Provenance prov = provenance(config, "count", {{"corpus", config.corpus}, {"catalog", config.catalog}});
  const WindowSpec window = config.window();
  std::vector<SampleSet> samples;
  for (auto interval : kIntervals) {
    samples.push_back(select_sample(in.corpus, in.catalog, window, interval, config.field_category,
                                    config.min_field_journals));
    log << "sample " << to_string(interval) << ": " << samples.back().ids.size() << " papers\n";
  }
  CountingContext ctx(in.corpus, in.catalog, config.count_options());
  const IntervalCounts counts = count_intervals(ctx, samples, window, config.shards);
  auto out = open_output(config.counts_path());
  write_counts(out, counts, prov.to_json());
  finish(out, config.counts_path());
}

void cmd_score(const RunConfig& config, std::ostream& log) {
  config.validate();
  nlohmann::json meta;
  const IntervalCounts counts = load_cache(config, &meta);
  auto in = load_inputs(config, log);
  check_cache_inputs(config, meta);
  const Provenance prov = provenance(config, "score", {{"corpus", config.corpus},
                                                       {"catalog", config.catalog},
                                                       {"counts", config.counts_path()}});
  CountingContext ctx(in.corpus, in.catalog, config.count_options());
  const auto scores = score_papers(ctx, counts);
  log << "scored " << scores.size() << " present-interval papers\n";
  auto out = open_output(config.scores_path());
  write_scores_csv(out, scores, prov.lines());
  finish(out, config.scores_path());
}

void cmd_analyze(const RunConfig& config, std::ostream& log) {
  config.validate();
  const auto scores = load_scores(config);
  const Provenance prov = provenance(config, "analyze", {{"scores", config.scores_path()}});
  if (scores.empty()) throw DegenerateError("no scored papers; hit labels are undefined");

  IdMap<std::uint64_t> future;
  for (const auto& v : scores) future.emplace(v.paper_id, v.future_citations);
  const HitLabels labels = hit_labels(future, config.top_frac);
  std::uint64_t hits = 0;
  for (const auto& [id, label] : labels.labels) hits += static_cast<std::uint64_t>(label);
  if (labels.tie_warning) {
    log << "warning: ties at the maximum citation count exceed top_frac; realized hit rate "
        << labels.realized_rate << "\n";
  }

  std::map<std::string, PercentileSeries> series;
  for (const auto& var : kScoreVariables) {
    IdMap<double> values;
    for (const auto& v : scores) {
      if (const auto& x = v.*var.field) values.emplace(v.paper_id, *x);
    }
    if (!values.empty()) series.emplace(var.name, percentile_rank(values, var.name));
  }

  auto curves = open_output(config.curves_path());
  for (const auto& line : prov.lines()) curves << "# " << line << '\n';
  curves << "variable,percentile,probability,n,hits\n";

  nlohmann::json report;
  report["meta"] = prov.to_json();
  report["hit_labels"] = {{"threshold", labels.threshold},
                          {"realized_rate", labels.realized_rate},
                          {"tie_warning", labels.tie_warning},
                          {"n", labels.labels.size()},
                          {"hits", hits}};
  nlohmann::json bivariate = nlohmann::json::array();
  for (const auto& var : kScoreVariables) {
    nlohmann::json entry;
    entry["variable"] = var.name;
    const int degree = config.degree(var.name);
    entry["degrees"] = {degree};
    auto it = series.find(var.name);
    if (it == series.end()) {
      entry["error"] = "no paper has this score";
      bivariate.push_back(entry);
      continue;
    }
    for (const auto& p : hit_curve(it->second, labels)) {
      curves << csv::join({var.name, std::to_string(p.percentile), csv::format_double(p.probability),
                           std::to_string(p.n), std::to_string(p.hits)})
             << '\n';
    }
    entry["mi_bits"] = mutual_information(labels, it->second).mi_bits;
    try {
      const LogisticFit fit = fit_logistic_poly(it->second, labels, degree);
      entry.update(fit_json(fit));
      entry["deviance_drop"] = fit.null_deviance - fit.residual_deviance;
      entry["df"] = degree;
    } catch (const DegenerateError& e) {
      entry["error"] = e.what();
      log << "warning: " << var.name << ": " << e.what() << '\n';
    }
    bivariate.push_back(entry);
  }
  report["bivariate"] = bivariate;
  finish(curves, config.curves_path());

  nlohmann::json hierarchical = nlohmann::json::array();
  for (const auto& [name, order] : hierarchy_orders()) {
    nlohmann::json entry;
    entry["name"] = name;
    entry["order"] = order;
    std::vector<std::pair<PercentileSeries, int>> vars;
    for (const auto& v : order) {
      auto it = series.find(v);
      if (it == series.end()) {
        entry["error"] = "variable '" + v + "' has no scores";
        break;
      }
      vars.emplace_back(it->second, config.degree(v));
    }
    if (!entry.contains("error")) {
      try {
        const auto fits = hierarchical_fit(vars, labels);
        nlohmann::json steps = nlohmann::json::array();
        for (std::size_t k = 0; k < fits.size(); ++k) {
          nlohmann::json step = fit_json(fits[k]);
          if (k > 0) {
            step["deviance_drop"] = fits[k - 1].residual_deviance - fits[k].residual_deviance;
            step["df"] = fits[k].variables.back().second;
          }
          steps.push_back(step);
        }
        entry["steps"] = steps;
      } catch (const DegenerateError& e) {
        entry["error"] = e.what();
        log << "warning: hierarchy " << name << ": " << e.what() << '\n';
      }
    }
    hierarchical.push_back(entry);
  }
  report["hierarchical"] = hierarchical;

  auto fits = open_output(config.fits_path());
  fits << report.dump(2) << '\n';
  finish(fits, config.fits_path());
}

void cmd_graph(const RunConfig& config, std::ostream& log) {
  config.validate();
  nlohmann::json meta;
  const IntervalCounts counts = load_cache(config, &meta);
  auto in = load_inputs(config, log);
  check_cache_inputs(config, meta);
  const bool have_scores = std::filesystem::is_regular_file(config.scores_path());
  Inputs inputs{{"corpus", config.corpus}, {"catalog", config.catalog}, {"counts", config.counts_path()}};
  if (have_scores) inputs.emplace_back("scores", config.scores_path());
  const Provenance prov = provenance(config, "graph", inputs);

  SampleSet sample{Interval::Present, {}};
  for (ElementId id : counts.citing(Interval::Present)) sample.ids.push_back(counts.interner(Level::Paper).name(id));

  GraphOptions options;
  options.top_k = config.top_k;
  options.edges = config.edges == "citation" ? EdgeMode::Citation : EdgeMode::CoCitation;
  std::vector<std::string> warnings;
  JournalGraph graph = build_journal_graph(sample, in.corpus, in.catalog, options, &warnings);
  for (const auto& w : warnings) log << "warning: " << w << '\n';

  if (have_scores) {
    const auto scores = load_scores(config);
    std::vector<std::string> ranking;
    for (const auto& [journal, n] : journal_citations(sample, in.corpus, in.catalog)) ranking.push_back(journal);
    auto rows = journal_index_table(scores, ranking, config.table_top_k);
    for (auto& row : rows) row.name = std::string(in.catalog.name(row.journal));
    auto table = open_output(config.journal_table_path());
    write_journal_table_csv(table, rows, prov.lines());
    finish(table, config.journal_table_path());
    auto node_rows = journal_index_table(scores, ranking, config.top_k);
    attach_index_means(graph, node_rows);
  } else {
    log << "warning: no scores file; graph nodes carry no index means and no journal table is written\n";
  }
  export_graph(graph, parse_graph_format(config.graph_format), config.graph_path(), prov.lines());
}

void cmd_pipeline(const RunConfig& config, std::ostream& log) {
  cmd_count(config, log);
  cmd_score(config, log);
  cmd_analyze(config, log);
  cmd_graph(config, log);
}

void cmd_synth(const std::filesystem::path& config_path, const std::filesystem::path& out_dir, std::ostream& log) {
  const SynthConfig config = load_synth_config(config_path);
  const std::string config_text = to_json(config).dump();
  const SynthCorpus synth = generate_corpus(config);
  write_synth(synth, out_dir,
              {std::string("tool: ") + kToolVersion, "command: synth", "config: " + config_text,
               "config_sha256: " + sha256_hex(config_text)});
  log << "generated " << synth.corpus.size() << " papers in " << synth.catalog.journals().size() << " journals\n";
}

}  // namespace cocite
