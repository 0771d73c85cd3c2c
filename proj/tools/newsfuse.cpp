#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "newsfuse/experiment.hpp"
#include "newsfuse/jsonl.hpp"

namespace {

using namespace newsfuse;
namespace fs = std::filesystem;

// Flag values layered over the config file; unset flags leave the file's value.
struct Overrides {
  std::string config_path;
  std::string corpus;
  std::string features_dir;
  std::string annotations;
  std::string output;
  std::string features;
  std::string fusion_mode;
  std::string aggregation;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> top_k;
  bool no_perturbation = false;
  bool perturb_all = false;
  bool dump_similarity = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "Experiment config (JSON)");
  cmd->add_option("--corpus", o.corpus, "Corpus file (corpus.jsonl)");
  cmd->add_option("--features-dir", o.features_dir, "Directory holding <language>/<tag>.jsonl");
  cmd->add_option("--annotations", o.annotations, "Entity annotation file");
  cmd->add_option("--seed", o.seed, "Perturbation seed (u64)");
  cmd->add_option("--fusion-mode", o.fusion_mode, "mean-of-five | mean-of-groups");
}

std::vector<Configuration> parse_list(const std::string& list) {
  std::vector<Configuration> out;
  std::stringstream in(list);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(parse_configuration(item));
  }
  return out;
}

ExperimentConfig resolve_config(const Overrides& o) {
  ExperimentConfig config = o.config_path.empty() ? ExperimentConfig{} : load_experiment_config(o.config_path);
  if (!o.corpus.empty()) config.corpus_path = o.corpus;
  if (!o.features_dir.empty()) config.features_dir = o.features_dir;
  if (!o.annotations.empty()) config.annotations_path = o.annotations;
  if (!o.output.empty()) config.output_dir = o.output;
  if (!o.features.empty()) config.configurations = canonical_configurations(parse_list(o.features));
  if (!o.fusion_mode.empty()) config.fusion_mode = parse_fusion_mode(o.fusion_mode);
  if (!o.aggregation.empty()) config.domain_aggregation = parse_domain_aggregation(o.aggregation);
  if (o.seed) config.seed = *o.seed;
  if (o.top_k) config.top_k = *o.top_k;
  if (o.no_perturbation) config.perturbation = false;
  if (o.perturb_all) config.perturb_all_features = true;
  if (o.dump_similarity) config.dump_similarity = true;
  return config;
}

int cmd_validate(const Overrides& o) {
  const ValidationSummary summary = validate_inputs(resolve_config(o));
  std::cout << summary.render();
  return summary.ok() ? 0 : 1;
}

int cmd_run(const Overrides& o) {
  const ExperimentConfig config = resolve_config(o);
  const RunOutcome outcome = run_experiment(config);
  std::cout << render_report(outcome.report, ReportStyle::event_table) << '\n'
            << render_report(outcome.report, ReportStyle::domain_table) << '\n';
  for (const auto& t : outcome.timings) {
    std::cout << "stage " << t.stage << ": " << std::fixed << std::setprecision(3) << t.seconds << " s\n";
  }
  std::cout.unsetf(std::ios::floatfield);
  std::cout << "wrote " << outcome.written.size() << " files to " << config.output_dir.string() << '\n';
  if (!outcome.report.unscorable.empty()) {
    std::cout << outcome.report.unscorable.size() << " unscorable queries (event has no other article)\n";
  }
  return 0;
}

int cmd_query(const Overrides& o, const std::string& article_id) {
  const ExperimentConfig config = resolve_config(o);
  const std::vector<Configuration> requested = o.features.empty() ? std::vector<Configuration>{Configuration::combined}
                                                                  : parse_list(o.features);
  if (requested.size() != 1) throw Error("query takes exactly one configuration in --features");
  const Configuration configuration = requested.front();
  const RankedList ranked = query_experiment(config, article_id, configuration, config.top_k);
  const Corpus corpus = load_corpus(config.corpus_path);
  const Article& query = corpus.at(article_id);
  std::cout << "query " << article_id << " [" << to_string(query.language) << ", event \"" << query.event
            << "\"] configuration " << to_string(configuration) << '\n';
  std::size_t rank = 0;
  for (const RankedEntry& e : ranked.entries) {
    std::cout << std::setw(4) << ++rank << "  " << (e.relevant ? '+' : ' ') << ' ' << std::left << std::setw(16)
              << e.article_id << std::right << ' ' << jsonl::format_double(e.score) << "  "
              << corpus.at(e.article_id).event << '\n';
  }
  return 0;
}

int cmd_report(const std::string& input, const std::string& style) {
  std::ifstream in(input);
  if (!in) throw Error("cannot open report '" + input + "'");
  const EvaluationReport report = parse_report(in, input);
  std::cout << render_report(report, parse_report_style(style));
  return 0;
}

// Pools per-window text vectors ({article_id, window, vector} records) into one
// text_embedding vector per article, in the feature-file layout.
int cmd_pool(const std::string& input, const std::string& output, const std::string& language) {
  std::ifstream in(input);
  if (!in) throw Error("cannot open '" + input + "'");
  std::map<std::string, std::map<std::size_t, VectorXr>> windows;
  jsonl::for_each_record(in, input, [&](std::size_t line, const nlohmann::json& record) {
    const std::string where = jsonl::location(input, line);
    const std::string id = jsonl::require_string(record, "article_id", where);
    const std::size_t window = jsonl::require_index(record, "window", where);
    const auto values = record.at("vector").get<std::vector<double>>();
    if (!windows[id].emplace(window, Eigen::Map<const VectorXr>(values.data(), static_cast<Eigen::Index>(values.size())))
             .second) {
      throw Error(where + ": duplicate window " + std::to_string(window) + " for '" + id + "'");
    }
  });
  FeatureMatrix pooled;
  pooled.tag = FeatureTag::text_embedding;
  pooled.language = parse_language(language);
  std::vector<VectorXr> rows;
  for (const auto& [id, by_index] : windows) {
    std::vector<VectorXr> ordered;
    for (const auto& [index, vec] : by_index) ordered.push_back(vec);
    pooled.row_ids.push_back(id);
    rows.push_back(article_text_vector<double>(ordered));
  }
  if (rows.empty()) throw Error("no window vectors in '" + input + "'");
  pooled.rows.resize(static_cast<Eigen::Index>(rows.size()), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != pooled.rows.cols()) throw Error("article '" + pooled.row_ids[i] + "' has a different dimension");
    pooled.rows.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  }
  if (output.empty() || output == "-") {
    std::cout << serialize_feature_matrix(pooled);
  } else {
    write_feature_matrix(output, pooled);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multimodal news retrieval and average-precision evaluation"};
  app.require_subcommand(1);

  Overrides validate_opts;
  auto* validate = app.add_subcommand("validate", "Check corpus, feature files and annotations");
  add_common(validate, validate_opts);
  validate->add_option("--features", validate_opts.features, "Configurations to check inputs for");

  Overrides run_opts;
  auto* run = app.add_subcommand("run", "Evaluate every configuration and write the report");
  add_common(run, run_opts);
  run->add_option("--features", run_opts.features, "Comma list of configurations: B,E,Tbar,O,P,L,Vbar,T+V");
  run->add_option("--output", run_opts.output, "Output directory");
  run->add_option("--domain-aggregation", run_opts.aggregation, "event-mean | query-pooled");
  run->add_flag("--no-perturbation", run_opts.no_perturbation, "Leave zero entity scores as they are");
  run->add_flag("--perturb-all", run_opts.perturb_all, "Perturb zero scores of every raw feature");
  run->add_flag("--dump-similarity", run_opts.dump_similarity, "Write similarity/<language>/<config>.jsonl");

  Overrides query_opts;
  std::string article_id;
  auto* query = app.add_subcommand("query", "Rank the corpus against one article");
  add_common(query, query_opts);
  query->add_option("article_id", article_id, "Query article id")->required();
  query->add_option("--features", query_opts.features, "One configuration (default T+V)");
  query->add_option("--top-k", query_opts.top_k, "Number of results");

  std::string report_input = "report.jsonl";
  std::string report_style = "event-table";
  auto* report = app.add_subcommand("report", "Re-render a report.jsonl");
  report->add_option("--input", report_input, "Machine report to read");
  report->add_option("--style", report_style, "event-table | domain-table | machine");

  std::string pool_input;
  std::string pool_output;
  std::string pool_language = "en";
  auto* pool = app.add_subcommand("pool", "Mean-pool per-window text vectors into article vectors");
  pool->add_option("--input", pool_input, "Window vectors {article_id, window, vector}")->required();
  pool->add_option("--output", pool_output, "Feature file to write (default stdout)");
  pool->add_option("--language", pool_language, "Language recorded in the manifest line");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate) return cmd_validate(validate_opts);
    if (*run) return cmd_run(run_opts);
    if (*query) return cmd_query(query_opts, article_id);
    if (*report) return cmd_report(report_input, report_style);
    if (*pool) return cmd_pool(pool_input, pool_output, pool_language);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
