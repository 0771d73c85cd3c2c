#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "newsfuse/corpus.hpp"
#include "newsfuse/similarity.hpp"
#include "newsfuse/types.hpp"

namespace newsfuse {

struct RankedEntry {
  std::string article_id;
  double score = 0.0;
  bool relevant = false;

  bool operator==(const RankedEntry&) const = default;
};

// Every other article of the query's language partition, best score first; equal
// scores are ordered by article id. Relevant means same event as the query.
struct RankedList {
  std::string query_id;
  std::vector<RankedEntry> entries;

  std::size_t n_relevant() const;
  bool scorable() const { return n_relevant() > 0; }
};

RankedList rank_for_query(const SimilarityMatrix& matrix, std::string_view query_id, const Corpus& corpus);

// Non-interpolated average precision, sum over n of (R_n - R_{n-1}) * P_n. Recall only
// moves at relevant ranks, by 1/n_relevant each time, so the sum reduces to the mean of
// the precision values observed at each relevant rank.
struct APResult {
  std::string query_id;
  double ap = 0.0;
  std::size_t n_relevant = 0;
  std::size_t list_length = 0;
  std::vector<std::size_t> relevant_ranks;  // 1-based, ascending

  // Relevant entries among the top n.
  std::size_t hits_at(std::size_t n) const;
  double precision_at(std::size_t n) const;
  double recall_at(std::size_t n) const;
};

// Throws Error when the list holds no relevant entry (unscorable query).
APResult average_precision(const RankedList& ranked);

struct QueryScore {
  Language language = Language::en;
  Configuration configuration = Configuration::combined;
  std::string query_id;
  std::string event;
  Domain domain = Domain::politics;
  double ap = 0.0;
  std::size_t n_relevant = 0;
};

struct EventScore {
  Language language = Language::en;
  Configuration configuration = Configuration::combined;
  Domain domain = Domain::politics;
  std::string event;
  double ap = 0.0;
  std::size_t n_queries = 0;
};

struct DomainScore {
  Language language = Language::en;
  Configuration configuration = Configuration::combined;
  Domain domain = Domain::politics;
  double ap = 0.0;
  std::size_t n_events = 0;
  std::size_t n_queries = 0;
};

// Queries whose event has no other article in the same language.
struct UnscorableQuery {
  Language language = Language::en;
  std::string query_id;
  std::string event;
};

struct EvaluationReport {
  std::uint64_t seed = 0;
  std::string corpus_digest;
  std::string config_hash;
  FusionMode fusion_mode = FusionMode::mean_of_five;
  DomainAggregation aggregation = DomainAggregation::event_mean;
  bool perturbation = true;
  std::vector<Language> languages;
  std::vector<Configuration> configurations;

  std::vector<QueryScore> queries;
  std::vector<EventScore> events;
  std::vector<DomainScore> domains;
  std::vector<UnscorableQuery> unscorable;

  const EventScore* find_event(Language language, Configuration configuration, std::string_view event) const;
  const DomainScore* find_domain(Language language, Configuration configuration, Domain domain) const;
};

// Similarity matrices for one language, keyed by the configuration they score.
struct LanguageMatrices {
  Language language = Language::en;
  std::map<Configuration, SimilarityMatrix> by_configuration;
};

// Leave-one-out retrieval for every query of every language and configuration,
// aggregated to event means and then to domains. Only the result grid is filled;
// run metadata (seed, digests, modes) is left to the caller.
EvaluationReport evaluate(const Corpus& corpus, std::span<const LanguageMatrices> matrices,
                          std::span<const Configuration> configurations,
                          DomainAggregation aggregation = DomainAggregation::event_mean);

enum class ReportStyle { event_table, domain_table, machine };

ReportStyle parse_report_style(std::string_view text);

// event_table: rows grouped by domain, one column per configuration, AP x 100
// rounded half away from zero, row maxima suffixed with '*'.
// domain_table: per-domain T̄/V̄/T+V for each language.
// machine: line-delimited JSON records at full precision.
std::string render_report(const EvaluationReport& report, ReportStyle style);

// Integer table cell for an AP value.
long percent_cell(double ap);

EvaluationReport parse_report(std::istream& in, std::string_view source = "report.jsonl");

}  // namespace newsfuse
