#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "newsfuse/corpus.hpp"
#include "newsfuse/entities.hpp"
#include "newsfuse/features.hpp"
#include "newsfuse/retrieval_eval.hpp"
#include "newsfuse/similarity.hpp"

namespace newsfuse {

struct ExperimentConfig {
  std::filesystem::path corpus_path;
  std::filesystem::path features_dir;
  std::filesystem::path annotations_path;
  std::filesystem::path output_dir;
  std::uint64_t seed = 0;
  std::vector<Configuration> configurations{kConfigurations.begin(), kConfigurations.end()};
  FusionMode fusion_mode = FusionMode::mean_of_five;
  bool perturbation = true;
  // Apply the zero-score perturbation to every raw feature, not only entities.
  bool perturb_all_features = false;
  DomainAggregation domain_aggregation = DomainAggregation::event_mean;
  bool dump_similarity = false;
  std::size_t top_k = 10;
};

// JSON object with the ExperimentConfig field names; relative paths resolve against base_dir.
ExperimentConfig parse_experiment_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& config);

// SHA-256 over every field that affects results (output_dir and top_k excluded).
std::string config_hash(const ExperimentConfig& config);

// Sorted into column order, duplicates dropped; throws when empty.
std::vector<Configuration> canonical_configurations(std::span<const Configuration> configurations);

// Raw features a configuration averages over.
std::vector<FeatureTag> features_of(Configuration configuration);
std::vector<FeatureTag> required_features(std::span<const Configuration> configurations);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ValidationSummary {
  std::vector<CheckResult> checks;

  bool ok() const;
  std::size_t passed() const;
  std::string render() const;
};

// Corpus schema, feature manifests, feature files, dimensions, coverage,
// annotation coverage and annotation spans.
ValidationSummary validate_inputs(const ExperimentConfig& config);

// All raw feature matrices of one language partition.
struct LanguageFeatures {
  Language language = Language::en;
  std::map<FeatureTag, FeatureMatrix> by_tag;
};

struct PipelineOptions {
  std::vector<Configuration> configurations{kConfigurations.begin(), kConfigurations.end()};
  FusionMode fusion_mode = FusionMode::mean_of_five;
  bool perturbation = true;
  bool perturb_all_features = false;
  PerturbationSeed seed;
  DomainAggregation domain_aggregation = DomainAggregation::event_mean;
};

struct PerturbationRecord {
  Language language = Language::en;
  FeatureTag tag = FeatureTag::entity;
  PerturbationStats stats;
};

// Similarity for a configuration from the raw per-feature matrices.
SimilarityMatrix configuration_matrix(const std::map<FeatureTag, SimilarityMatrix>& raw, Configuration configuration,
                                      FusionMode fusion_mode);

// Raw cosine matrices (entity perturbation applied) and one fused matrix per requested
// configuration, for each language.
std::vector<LanguageMatrices> build_similarities(std::span<const LanguageFeatures> features,
                                                 const PipelineOptions& options,
                                                 std::vector<PerturbationRecord>* perturbations = nullptr);

// build_similarities followed by evaluate, with run metadata filled in.
EvaluationReport run_pipeline(const Corpus& corpus, std::span<const LanguageFeatures> features,
                              const PipelineOptions& options);

PipelineOptions pipeline_options(const ExperimentConfig& config);

// Corpus plus every feature matrix the requested configurations need; entity
// matrices are derived from the annotation file.
struct LoadedExperiment {
  Corpus corpus;
  std::vector<LanguageFeatures> features;
  std::map<Language, EntityVocabulary> vocabularies;
};

LoadedExperiment load_experiment(const ExperimentConfig& config, std::span<const Configuration> configurations);

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct RunOutcome {
  EvaluationReport report;
  std::vector<StageTiming> timings;
  std::vector<std::filesystem::path> written;
};

// Writes report.jsonl, report_events.txt, report_domains.txt, manifest.json (and
// optional similarity dumps) into output_dir, each atomically.
RunOutcome run_experiment(const ExperimentConfig& config);

// Top-k ranking of one article under one configuration.
RankedList query_experiment(const ExperimentConfig& config, std::string_view article_id, Configuration configuration,
                            std::size_t top_k);

}  // namespace newsfuse
