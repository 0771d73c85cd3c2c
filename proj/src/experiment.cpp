#include "newsfuse/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <set>
#include <sstream>

#include "newsfuse/digest.hpp"
#include "newsfuse/jsonl.hpp"

namespace newsfuse {

namespace fs = std::filesystem;

namespace {

fs::path resolve(const fs::path& base_dir, const std::string& value) {
  fs::path p(value);
  if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
  return p;
}

std::string join(const std::vector<std::string>& items, std::size_t limit = 5) {
  std::string out;
  for (std::size_t i = 0; i < items.size() && i < limit; ++i) {
    if (i != 0) out += ", ";
    out += items[i];
  }
  if (items.size() > limit) out += ", ... (" + std::to_string(items.size()) + " total)";
  return out;
}

class Stopwatch {
 public:
  explicit Stopwatch(std::vector<StageTiming>& sink) : sink_(sink) {}
  void lap(std::string stage) {
    const auto now = std::chrono::steady_clock::now();
    sink_.push_back({std::move(stage), std::chrono::duration<double>(now - last_).count()});
    last_ = now;
  }

 private:
  std::vector<StageTiming>& sink_;
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

// Per-file findings of the validation scan.
struct FeatureFileScan {
  std::vector<std::string> dimension_errors;
  std::vector<std::string> coverage_errors;
};

FeatureFileScan scan_feature_file(const fs::path& path, FeatureTag tag, Language language, const Corpus& corpus) {
  FeatureFileScan scan;
  const std::string source = path.string();
  const std::size_t expected = expected_dim(tag);
  const auto partition = corpus.partition(language);
  std::set<std::string, std::less<>> pending(partition.begin(), partition.end());
  bool have_header = false;
  std::ifstream in(path);
  try {
    jsonl::for_each_record(in, source, [&](std::size_t line, const nlohmann::json& record) {
      const std::string where = jsonl::location(source, line);
      if (!have_header) {
        have_header = true;
        const std::size_t dim = jsonl::require_index(record, "dim", where);
        if (dim != expected) {
          scan.dimension_errors.push_back(where + ": manifest dim " + std::to_string(dim) + ", expected " +
                                          std::to_string(expected));
        }
        if (jsonl::require_string(record, "feature", where) != to_string(tag) ||
            jsonl::require_string(record, "language", where) != to_string(language)) {
          scan.dimension_errors.push_back(where + ": manifest record does not describe " +
                                          std::string(to_string(language)) + "/" + std::string(to_string(tag)));
        }
        return;
      }
      const std::string id = jsonl::require_string(record, "article_id", where);
      auto it = pending.find(id);
      if (it != pending.end()) {
        pending.erase(it);
      } else if (corpus.find(id) != nullptr && corpus.at(id).language == language) {
        scan.coverage_errors.push_back(where + ": duplicate vector for '" + id + "'");
      } else {
        scan.coverage_errors.push_back(where + ": unknown article id '" + id + "'");
      }
      const auto vec = record.find("vector");
      if (vec == record.end() || !vec->is_array()) {
        scan.dimension_errors.push_back(where + ": missing vector");
        return;
      }
      if (vec->size() != expected) {
        scan.dimension_errors.push_back(where + ": '" + id + "' has " + std::to_string(vec->size()) +
                                        " components, expected " + std::to_string(expected));
      }
      for (const auto& c : *vec) {
        if (!c.is_number() || !std::isfinite(c.get<double>())) {
          scan.dimension_errors.push_back(where + ": '" + id + "' has a non-finite component");
          break;
        }
      }
    });
  } catch (const Error& e) {
    scan.dimension_errors.push_back(e.what());
  }
  if (!have_header) scan.dimension_errors.push_back(source + ": missing manifest record");
  for (const std::string& id : pending) scan.coverage_errors.push_back(source + ": no vector for article '" + id + "'");
  return scan;
}

SimilarityMatrix raw_similarity(const FeatureMatrix& features, const PipelineOptions& options,
                                std::vector<PerturbationRecord>* perturbations) {
  SimilarityMatrix matrix = similarity_matrix(features);
  const bool perturb =
      options.perturbation && (features.tag == FeatureTag::entity || options.perturb_all_features);
  if (!perturb) return matrix;
  PerturbationStats stats;
  matrix = perturb_zero_rows(matrix, options.seed, &stats);
  if (perturbations != nullptr) perturbations->push_back({features.language, features.tag, stats});
  return matrix;
}

}  // namespace

ExperimentConfig parse_experiment_config(const nlohmann::json& doc, const fs::path& base_dir) {
  if (!doc.is_object()) throw Error("experiment config must be a JSON object");
  static const std::set<std::string> known{"corpus_path",  "features_dir",          "annotations_path",
                                           "output_dir",   "seed",                  "configurations",
                                           "fusion_mode",  "perturbation",          "perturb_all_features",
                                           "domain_aggregation", "dump_similarity", "top_k"};
  for (const auto& [key, value] : doc.items()) {
    if (known.count(key) == 0) throw Error("unknown experiment config field '" + key + "'");
  }
  ExperimentConfig config;
  try {
    if (doc.contains("corpus_path")) config.corpus_path = resolve(base_dir, doc["corpus_path"].get<std::string>());
    if (doc.contains("features_dir")) config.features_dir = resolve(base_dir, doc["features_dir"].get<std::string>());
    if (doc.contains("annotations_path")) {
      config.annotations_path = resolve(base_dir, doc["annotations_path"].get<std::string>());
    }
    if (doc.contains("output_dir")) config.output_dir = resolve(base_dir, doc["output_dir"].get<std::string>());
    if (doc.contains("seed")) config.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("configurations")) {
      std::vector<Configuration> configurations;
      for (const auto& c : doc["configurations"]) configurations.push_back(parse_configuration(c.get<std::string>()));
      config.configurations = canonical_configurations(configurations);
    }
    if (doc.contains("fusion_mode")) config.fusion_mode = parse_fusion_mode(doc["fusion_mode"].get<std::string>());
    if (doc.contains("perturbation")) config.perturbation = doc["perturbation"].get<bool>();
    if (doc.contains("perturb_all_features")) config.perturb_all_features = doc["perturb_all_features"].get<bool>();
    if (doc.contains("domain_aggregation")) {
      config.domain_aggregation = parse_domain_aggregation(doc["domain_aggregation"].get<std::string>());
    }
    if (doc.contains("dump_similarity")) config.dump_similarity = doc["dump_similarity"].get<bool>();
    if (doc.contains("top_k")) config.top_k = doc["top_k"].get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed experiment config: ") + e.what());
  }
  return config;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(jsonl::read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(path.string() + ": malformed experiment config: " + e.what());
  }
  return parse_experiment_config(doc, path.parent_path());
}

nlohmann::json to_json(const ExperimentConfig& config) {
  nlohmann::json doc{{"corpus_path", config.corpus_path.string()},
                     {"features_dir", config.features_dir.string()},
                     {"annotations_path", config.annotations_path.string()},
                     {"output_dir", config.output_dir.string()},
                     {"seed", config.seed},
                     {"configurations", nlohmann::json::array()},
                     {"fusion_mode", std::string(to_string(config.fusion_mode))},
                     {"perturbation", config.perturbation},
                     {"perturb_all_features", config.perturb_all_features},
                     {"domain_aggregation", std::string(to_string(config.domain_aggregation))},
                     {"dump_similarity", config.dump_similarity},
                     {"top_k", config.top_k}};
  for (Configuration c : config.configurations) doc["configurations"].push_back(std::string(to_string(c)));
  return doc;
}

std::string config_hash(const ExperimentConfig& config) {
  nlohmann::json doc = to_json(config);
  doc.erase("output_dir");
  doc.erase("top_k");
  doc.erase("dump_similarity");
  return sha256_hex(doc.dump());
}

std::vector<Configuration> canonical_configurations(std::span<const Configuration> configurations) {
  std::vector<Configuration> out(configurations.begin(), configurations.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (out.empty()) throw Error("no configurations selected");
  return out;
}

std::vector<FeatureTag> features_of(Configuration configuration) {
  switch (configuration) {
    case Configuration::bert: return {FeatureTag::text_embedding};
    case Configuration::entity: return {FeatureTag::entity};
    case Configuration::textual: return {FeatureTag::text_embedding, FeatureTag::entity};
    case Configuration::objects: return {FeatureTag::objects};
    case Configuration::places: return {FeatureTag::places};
    case Configuration::geolocation: return {FeatureTag::geolocation};
    case Configuration::visual: return {FeatureTag::objects, FeatureTag::places, FeatureTag::geolocation};
    case Configuration::combined: return {kFeatureTags.begin(), kFeatureTags.end()};
  }
  return {};
}

std::vector<FeatureTag> required_features(std::span<const Configuration> configurations) {
  std::set<FeatureTag> tags;
  for (Configuration c : configurations) {
    for (FeatureTag tag : features_of(c)) tags.insert(tag);
  }
  return {tags.begin(), tags.end()};
}

bool ValidationSummary::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

std::size_t ValidationSummary::passed() const {
  return static_cast<std::size_t>(std::count_if(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; }));
}

std::string ValidationSummary::render() const {
  std::ostringstream out;
  for (const CheckResult& c : checks) {
    out << (c.passed ? "[PASS] " : "[FAIL] ") << c.name;
    if (!c.detail.empty()) out << ": " << c.detail;
    out << '\n';
  }
  out << passed() << "/" << checks.size() << " checks passed\n";
  return out.str();
}

ValidationSummary validate_inputs(const ExperimentConfig& config) {
  ValidationSummary summary;
  auto add = [&summary](std::string name, bool passed, std::string detail) {
    summary.checks.push_back({std::move(name), passed, std::move(detail)});
  };

  std::optional<Corpus> corpus;
  try {
    corpus = load_corpus(config.corpus_path);
    std::string detail = std::to_string(corpus->size()) + " articles";
    for (Language l : corpus->languages()) {
      detail += ", " + std::string(to_string(l)) + " " + std::to_string(corpus->partition(l).size());
    }
    add("corpus schema", true, detail);
  } catch (const std::exception& e) {
    add("corpus schema", false, e.what());
  }

  std::vector<FeatureTag> dense;
  for (FeatureTag tag : required_features(config.configurations)) {
    if (tag != FeatureTag::entity) dense.push_back(tag);
  }
  const auto all_tags = required_features(config.configurations);
  const bool need_entities = std::find(all_tags.begin(), all_tags.end(), FeatureTag::entity) != all_tags.end();

  if (!corpus) {
    for (const char* name : {"feature manifests", "feature files", "feature dimensions", "feature coverage",
                             "annotation coverage", "annotation spans"}) {
      add(name, false, "skipped: corpus did not load");
    }
    return summary;
  }

  std::vector<std::string> manifest_errors;
  std::vector<std::string> missing_files;
  std::vector<std::string> dimension_errors;
  std::vector<std::string> coverage_errors;
  for (Language language : corpus->languages()) {
    const std::size_t rows = corpus->partition(language).size();
    const fs::path mpath = manifest_path(config.features_dir, language);
    try {
      if (!fs::exists(mpath)) throw Error("missing " + mpath.string());
      const FeatureManifest manifest = load_feature_manifest(mpath);
      if (manifest.language != language) throw Error(mpath.string() + ": wrong language");
      for (FeatureTag tag : dense) {
        const FeatureManifestEntry* entry = manifest.find(tag);
        if (entry == nullptr) {
          manifest_errors.push_back(mpath.string() + ": no entry for " + std::string(to_string(tag)));
        } else if (entry->dim != expected_dim(tag) || entry->count != rows) {
          manifest_errors.push_back(mpath.string() + ": " + std::string(to_string(tag)) + " lists dim " +
                                    std::to_string(entry->dim) + " count " + std::to_string(entry->count) +
                                    ", expected dim " + std::to_string(expected_dim(tag)) + " count " +
                                    std::to_string(rows));
        }
      }
    } catch (const std::exception& e) {
      manifest_errors.push_back(e.what());
    }

    for (FeatureTag tag : dense) {
      const fs::path path = feature_path(config.features_dir, language, tag);
      if (!fs::exists(path)) {
        missing_files.push_back(path.string());
        continue;
      }
      FeatureFileScan scan = scan_feature_file(path, tag, language, *corpus);
      dimension_errors.insert(dimension_errors.end(), scan.dimension_errors.begin(), scan.dimension_errors.end());
      coverage_errors.insert(coverage_errors.end(), scan.coverage_errors.begin(), scan.coverage_errors.end());
    }
  }
  add("feature manifests", manifest_errors.empty(), join(manifest_errors));
  add("feature files", missing_files.empty(), missing_files.empty() ? "" : "missing " + join(missing_files));
  add("feature dimensions", dimension_errors.empty(), join(dimension_errors));
  add("feature coverage", coverage_errors.empty(), join(coverage_errors));

  if (!need_entities) {
    add("annotation coverage", true, "not required by the selected configurations");
    add("annotation spans", true, "not required by the selected configurations");
    return summary;
  }
  std::vector<ArticleAnnotations> annotations;
  try {
    annotations = load_annotations(config.annotations_path);
  } catch (const std::exception& e) {
    add("annotation coverage", false, e.what());
    add("annotation spans", false, "skipped: annotations did not load");
    return summary;
  }
  const AnnotationIssues issues = check_annotations(*corpus, annotations);
  std::vector<std::string> coverage;
  for (const auto& id : issues.missing_articles) coverage.push_back("no annotation record for article '" + id + "'");
  for (const auto& id : issues.unknown_articles) coverage.push_back("annotation for unknown article '" + id + "'");
  add("annotation coverage", coverage.empty(), join(coverage));
  add("annotation spans", issues.span_errors.empty(), join(issues.span_errors));
  return summary;
}

SimilarityMatrix configuration_matrix(const std::map<FeatureTag, SimilarityMatrix>& raw, Configuration configuration,
                                      FusionMode fusion_mode) {
  auto gather = [&raw, configuration](Configuration part) {
    std::vector<SimilarityMatrix> parts;
    for (FeatureTag tag : features_of(part)) {
      auto it = raw.find(tag);
      if (it == raw.end()) {
        throw Error("configuration " + std::string(to_string(configuration)) + " needs the " +
                    std::string(to_string(tag)) + " similarity matrix");
      }
      parts.push_back(it->second);
    }
    return parts;
  };
  if (configuration == Configuration::combined && fusion_mode == FusionMode::mean_of_groups) {
    const std::vector<SimilarityMatrix> groups{fuse(gather(Configuration::textual)), fuse(gather(Configuration::visual))};
    return fuse(groups);
  }
  return fuse(gather(configuration));
}

std::vector<LanguageMatrices> build_similarities(std::span<const LanguageFeatures> features,
                                                 const PipelineOptions& options,
                                                 std::vector<PerturbationRecord>* perturbations) {
  const std::vector<Configuration> configurations = canonical_configurations(options.configurations);
  const std::vector<FeatureTag> needed = required_features(configurations);
  std::vector<LanguageMatrices> out;
  for (const LanguageFeatures& lf : features) {
    std::map<FeatureTag, SimilarityMatrix> raw;
    for (FeatureTag tag : needed) {
      auto it = lf.by_tag.find(tag);
      if (it == lf.by_tag.end()) {
        throw Error("missing " + std::string(to_string(tag)) + " features for " + std::string(to_string(lf.language)));
      }
      raw.emplace(tag, raw_similarity(it->second, options, perturbations));
    }
    LanguageMatrices lm;
    lm.language = lf.language;
    for (Configuration c : configurations) lm.by_configuration.emplace(c, configuration_matrix(raw, c, options.fusion_mode));
    out.push_back(std::move(lm));
  }
  return out;
}

EvaluationReport run_pipeline(const Corpus& corpus, std::span<const LanguageFeatures> features,
                              const PipelineOptions& options) {
  const std::vector<Configuration> configurations = canonical_configurations(options.configurations);
  const std::vector<LanguageMatrices> matrices = build_similarities(features, options);
  EvaluationReport report = evaluate(corpus, matrices, configurations, options.domain_aggregation);
  report.seed = options.seed.value;
  report.corpus_digest = corpus.digest();
  report.fusion_mode = options.fusion_mode;
  report.perturbation = options.perturbation;
  return report;
}

PipelineOptions pipeline_options(const ExperimentConfig& config) {
  PipelineOptions options;
  options.configurations = canonical_configurations(config.configurations);
  options.fusion_mode = config.fusion_mode;
  options.perturbation = config.perturbation;
  options.perturb_all_features = config.perturb_all_features;
  options.seed = PerturbationSeed{config.seed};
  options.domain_aggregation = config.domain_aggregation;
  return options;
}

LoadedExperiment load_experiment(const ExperimentConfig& config, std::span<const Configuration> configurations) {
  LoadedExperiment loaded;
  loaded.corpus = load_corpus(config.corpus_path);
  const std::vector<FeatureTag> needed = required_features(configurations);
  const bool need_entities = std::find(needed.begin(), needed.end(), FeatureTag::entity) != needed.end();

  std::map<std::string, std::vector<LinkedEntity>> linked;
  if (need_entities) {
    const auto annotations = load_annotations(config.annotations_path);
    const AnnotationIssues issues = check_annotations(loaded.corpus, annotations);
    if (!issues.missing_articles.empty()) {
      throw Error("article '" + issues.missing_articles.front() + "' has no entity annotation record");
    }
    if (!issues.unknown_articles.empty()) {
      throw Error("annotation record for unknown article '" + issues.unknown_articles.front() + "'");
    }
    if (!issues.span_errors.empty()) throw Error("invalid annotation span: " + issues.span_errors.front());
    linked = link_corpus(loaded.corpus, annotations);
  }

  for (Language language : loaded.corpus.languages()) {
    LanguageFeatures lf;
    lf.language = language;
    for (FeatureTag tag : needed) {
      if (tag == FeatureTag::entity) continue;
      lf.by_tag.emplace(tag, load_feature_matrix(feature_path(config.features_dir, language, tag), tag, language,
                                                 loaded.corpus));
    }
    if (need_entities) {
      EntityVocabulary vocabulary = build_vocabulary(loaded.corpus, language, linked);
      lf.by_tag.emplace(FeatureTag::entity, entity_feature_matrix(loaded.corpus, language, vocabulary, linked));
      loaded.vocabularies.emplace(language, std::move(vocabulary));
    }
    loaded.features.push_back(std::move(lf));
  }
  return loaded;
}

RunOutcome run_experiment(const ExperimentConfig& config) {
  if (config.output_dir.empty()) throw Error("no output directory configured");
  RunOutcome outcome;
  Stopwatch watch(outcome.timings);

  const PipelineOptions options = pipeline_options(config);
  const LoadedExperiment loaded = load_experiment(config, options.configurations);
  watch.lap("load");

  std::vector<PerturbationRecord> perturbations;
  const std::vector<LanguageMatrices> matrices = build_similarities(loaded.features, options, &perturbations);
  watch.lap("similarity");

  EvaluationReport report = evaluate(loaded.corpus, matrices, options.configurations, options.domain_aggregation);
  report.seed = config.seed;
  report.corpus_digest = loaded.corpus.digest();
  report.config_hash = config_hash(config);
  report.fusion_mode = config.fusion_mode;
  report.perturbation = config.perturbation;
  watch.lap("evaluation");

  auto write = [&outcome](const fs::path& path, const std::string& content) {
    jsonl::write_file_atomic(path, content);
    outcome.written.push_back(path);
  };
  write(config.output_dir / "report.jsonl", render_report(report, ReportStyle::machine));
  write(config.output_dir / "report_events.txt", render_report(report, ReportStyle::event_table));
  write(config.output_dir / "report_domains.txt", render_report(report, ReportStyle::domain_table));
  if (config.dump_similarity) {
    for (const LanguageMatrices& lm : matrices) {
      for (const auto& [configuration, matrix] : lm.by_configuration) {
        write(config.output_dir / "similarity" / std::string(to_string(lm.language)) /
                  (std::string(to_string(configuration)) + ".jsonl"),
              serialize_similarity_matrix(matrix, to_string(configuration), report.config_hash));
      }
    }
  }
  watch.lap("write");

  nlohmann::json manifest{{"config", to_json(config)},
                          {"config_hash", report.config_hash},
                          {"seed", config.seed},
                          {"corpus_digest", report.corpus_digest},
                          {"unscorable_queries", report.unscorable.size()},
                          {"files", nlohmann::json::array()},
                          {"perturbation", nlohmann::json::array()},
                          {"vocabulary", nlohmann::json::object()},
                          {"timings_seconds", nlohmann::json::object()}};
  for (const auto& path : outcome.written) manifest["files"].push_back(fs::relative(path, config.output_dir).string());
  for (const auto& p : perturbations) {
    nlohmann::json record{{"language", std::string(to_string(p.language))},
                          {"feature", std::string(to_string(p.tag))},
                          {"injected", p.stats.injected},
                          {"max_injected", p.stats.max_injected},
                          {"order_preserved", p.stats.order_preserved()}};
    if (p.stats.min_nonzero) record["min_nonzero"] = *p.stats.min_nonzero;
    manifest["perturbation"].push_back(record);
  }
  for (const auto& [language, vocabulary] : loaded.vocabularies) {
    manifest["vocabulary"][std::string(to_string(language))] = vocabulary.size();
  }
  for (const auto& t : outcome.timings) manifest["timings_seconds"][t.stage] = t.seconds;
  write(config.output_dir / "manifest.json", manifest.dump(2) + "\n");

  outcome.report = std::move(report);
  return outcome;
}

RankedList query_experiment(const ExperimentConfig& config, std::string_view article_id, Configuration configuration,
                            std::size_t top_k) {
  PipelineOptions options = pipeline_options(config);
  options.configurations = {configuration};
  const LoadedExperiment loaded = load_experiment(config, options.configurations);
  const Article& article = loaded.corpus.at(article_id);
  auto lf = std::find_if(loaded.features.begin(), loaded.features.end(),
                         [&article](const LanguageFeatures& f) { return f.language == article.language; });
  const std::vector<LanguageMatrices> matrices = build_similarities(std::span(&*lf, 1), options);
  RankedList ranked = rank_for_query(matrices.front().by_configuration.at(configuration), article_id, loaded.corpus);
  if (ranked.entries.size() > top_k) ranked.entries.resize(top_k);
  return ranked;
}

}  // namespace newsfuse
