#include "newsfuse/entities.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <utility>

#include "newsfuse/jsonl.hpp"
#include "newsfuse/utf8.hpp"

namespace newsfuse {

namespace {

using SpanKey = std::pair<std::size_t, std::size_t>;

std::string describe(std::size_t start, std::size_t end) {
  return "(" + std::to_string(start) + "," + std::to_string(end) + ")";
}

void check_bounds(std::size_t start, std::size_t end, std::string_view kind) {
  if (start >= end) throw Error("invalid " + std::string(kind) + " span " + describe(start, end) + ": start >= end");
}

// True when a should replace b as the resolution of a span.
bool outranks(const LinkerCandidate& a, const LinkerCandidate& b) {
  if (a.pagerank != b.pagerank) return a.pagerank > b.pagerank;
  return a.entity_iri < b.entity_iri;
}

}  // namespace

std::vector<LinkedEntity> merge_annotations(std::span<const NerSpan> ner,
                                            std::span<const LinkerCandidate> candidates) {
  std::set<SpanKey> ner_spans;
  for (const NerSpan& span : ner) {
    check_bounds(span.start, span.end, "NER");
    ner_spans.emplace(span.start, span.end);
  }

  std::map<SpanKey, const LinkerCandidate*> best;
  for (const LinkerCandidate& candidate : candidates) {
    check_bounds(candidate.start, candidate.end, "linker");
    if (candidate.entity_iri.empty()) {
      throw Error("linker candidate at " + describe(candidate.start, candidate.end) + " has an empty IRI");
    }
    if (!(candidate.pagerank >= 0.0) || !std::isfinite(candidate.pagerank)) {
      throw Error("linker candidate at " + describe(candidate.start, candidate.end) + " has invalid pagerank");
    }
    const SpanKey key{candidate.start, candidate.end};
    if (ner_spans.count(key) == 0) continue;
    auto [it, inserted] = best.emplace(key, &candidate);
    if (!inserted && outranks(candidate, *it->second)) it->second = &candidate;
  }

  // std::map iterates by (start, end), which is the required output order.
  std::vector<LinkedEntity> linked;
  linked.reserve(best.size());
  for (const auto& [key, candidate] : best) linked.push_back({key.first, key.second, candidate->entity_iri});
  return linked;
}

EntityVocabulary::EntityVocabulary(Language language, std::vector<std::string> sorted_unique_entries)
    : language_(language), entries_(std::move(sorted_unique_entries)) {
  if (!std::is_sorted(entries_.begin(), entries_.end()) ||
      std::adjacent_find(entries_.begin(), entries_.end()) != entries_.end()) {
    throw Error("entity vocabulary entries must be sorted and distinct");
  }
}

std::optional<std::size_t> EntityVocabulary::index_of(std::string_view iri) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), iri);
  if (it == entries_.end() || *it != iri) return std::nullopt;
  return static_cast<std::size_t>(it - entries_.begin());
}

EntityVocabulary build_vocabulary(Language language, std::span<const std::vector<LinkedEntity>> per_article) {
  std::vector<std::string> iris;
  for (const auto& entities : per_article) {
    for (const LinkedEntity& entity : entities) iris.push_back(entity.entity_iri);
  }
  std::sort(iris.begin(), iris.end());
  iris.erase(std::unique(iris.begin(), iris.end()), iris.end());
  return EntityVocabulary(language, std::move(iris));
}

EntityVector entity_vector(std::string_view article_id, std::span<const LinkedEntity> entities,
                           const EntityVocabulary& vocabulary) {
  EntityVector out{std::string(article_id), vocabulary.size(), {}};
  out.support.reserve(entities.size());
  for (const LinkedEntity& entity : entities) {
    auto index = vocabulary.index_of(entity.entity_iri);
    if (!index) {
      throw Error("entity '" + entity.entity_iri + "' of article '" + std::string(article_id) +
                  "' is not in the " + std::string(to_string(vocabulary.language())) + " vocabulary");
    }
    out.support.push_back(*index);
  }
  std::sort(out.support.begin(), out.support.end());
  out.support.erase(std::unique(out.support.begin(), out.support.end()), out.support.end());
  return out;
}

std::vector<ArticleAnnotations> parse_annotations(std::istream& in, std::string_view source) {
  std::vector<ArticleAnnotations> out;
  std::set<std::string> seen;
  jsonl::for_each_record(in, source, [&](std::size_t line, const nlohmann::json& record) {
    const std::string where = jsonl::location(source, line);
    ArticleAnnotations annotations;
    annotations.article_id = jsonl::require_string(record, "article_id", where);
    if (!seen.insert(annotations.article_id).second) {
      throw Error(where + ": duplicate annotation record for article '" + annotations.article_id + "'");
    }
    auto list = [&](const char* field) -> const nlohmann::json& {
      auto it = record.find(field);
      if (it == record.end() || !it->is_array()) {
        throw Error(where + ": malformed record: field '" + field + "' must be an array");
      }
      return *it;
    };
    for (const auto& span : list("ner")) {
      NerSpan s;
      s.start = jsonl::require_index(span, "start", where);
      s.end = jsonl::require_index(span, "end", where);
      s.surface = jsonl::require_string(span, "surface", where);
      annotations.ner.push_back(std::move(s));
    }
    for (const auto& candidate : list("candidates")) {
      LinkerCandidate c;
      c.start = jsonl::require_index(candidate, "start", where);
      c.end = jsonl::require_index(candidate, "end", where);
      c.entity_iri = jsonl::require_string(candidate, "entity_iri", where);
      c.pagerank = jsonl::require_number(candidate, "pagerank", where);
      annotations.candidates.push_back(std::move(c));
    }
    out.push_back(std::move(annotations));
  });
  return out;
}

std::vector<ArticleAnnotations> load_annotations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open annotations '" + path.string() + "'");
  return parse_annotations(in, path.string());
}

std::string serialize_annotations(std::span<const ArticleAnnotations> annotations) {
  std::string out;
  for (const ArticleAnnotations& a : annotations) {
    nlohmann::json record;
    record["article_id"] = a.article_id;
    record["ner"] = nlohmann::json::array();
    for (const NerSpan& s : a.ner) record["ner"].push_back({{"start", s.start}, {"end", s.end}, {"surface", s.surface}});
    record["candidates"] = nlohmann::json::array();
    for (const LinkerCandidate& c : a.candidates) {
      record["candidates"].push_back(
          {{"start", c.start}, {"end", c.end}, {"entity_iri", c.entity_iri}, {"pagerank", c.pagerank}});
    }
    out += record.dump();
    out += '\n';
  }
  return out;
}

AnnotationIssues check_annotations(const Corpus& corpus, std::span<const ArticleAnnotations> annotations) {
  AnnotationIssues issues;
  std::set<std::string_view> covered;
  for (const ArticleAnnotations& a : annotations) {
    const Article* article = corpus.find(a.article_id);
    if (article == nullptr) {
      issues.unknown_articles.push_back(a.article_id);
      continue;
    }
    covered.insert(article->id);
    const std::string text = text_of(*article);
    const auto offsets = utf8::boundaries(text);
    const std::size_t length = offsets.size() - 1;
    auto span_ok = [&](std::size_t start, std::size_t end, std::string_view kind) {
      if (start < end && end <= length) return true;
      issues.span_errors.push_back(a.article_id + ": " + std::string(kind) + " span " + describe(start, end) +
                                   " outside text of length " + std::to_string(length));
      return false;
    };
    for (const NerSpan& s : a.ner) {
      if (!span_ok(s.start, s.end, "NER")) continue;
      std::string_view surface(text.data() + offsets[s.start], offsets[s.end] - offsets[s.start]);
      if (surface != s.surface) {
        issues.span_errors.push_back(a.article_id + ": NER span " + describe(s.start, s.end) + " surface '" +
                                     s.surface + "' does not match text '" + std::string(surface) + "'");
      }
    }
    for (const LinkerCandidate& c : a.candidates) {
      span_ok(c.start, c.end, "linker");
      if (c.entity_iri.empty()) {
        issues.span_errors.push_back(a.article_id + ": linker span " + describe(c.start, c.end) + " has an empty IRI");
      }
      if (!(c.pagerank >= 0.0) || !std::isfinite(c.pagerank)) {
        issues.span_errors.push_back(a.article_id + ": linker span " + describe(c.start, c.end) +
                                     " has invalid pagerank");
      }
    }
  }
  for (const Article& article : corpus.articles()) {
    if (covered.count(article.id) == 0) issues.missing_articles.push_back(article.id);
  }
  return issues;
}

std::map<std::string, std::vector<LinkedEntity>> link_corpus(const Corpus& corpus,
                                                             std::span<const ArticleAnnotations> annotations) {
  std::map<std::string, const ArticleAnnotations*, std::less<>> by_id;
  for (const ArticleAnnotations& a : annotations) by_id.emplace(a.article_id, &a);
  std::map<std::string, std::vector<LinkedEntity>> linked;
  for (const Article& article : corpus.articles()) {
    auto it = by_id.find(article.id);
    if (it == by_id.end()) throw Error("article '" + article.id + "' has no entity annotation record");
    try {
      linked.emplace(article.id, merge_annotations(it->second->ner, it->second->candidates));
    } catch (const Error& e) {
      throw Error("article '" + article.id + "': " + e.what());
    }
  }
  return linked;
}

EntityVocabulary build_vocabulary(const Corpus& corpus, Language language,
                                  const std::map<std::string, std::vector<LinkedEntity>>& linked) {
  std::vector<std::vector<LinkedEntity>> per_article;
  for (const std::string& id : corpus.partition(language)) {
    auto it = linked.find(id);
    if (it == linked.end()) throw Error("article '" + id + "' has no linked entities");
    per_article.push_back(it->second);
  }
  return build_vocabulary(language, per_article);
}

FeatureMatrix entity_feature_matrix(const Corpus& corpus, Language language, const EntityVocabulary& vocabulary,
                                    const std::map<std::string, std::vector<LinkedEntity>>& linked) {
  const auto partition = corpus.partition(language);
  FeatureMatrix matrix;
  matrix.tag = FeatureTag::entity;
  matrix.language = language;
  matrix.row_ids.assign(partition.begin(), partition.end());
  matrix.rows = MatrixXr::Zero(static_cast<Eigen::Index>(partition.size()),
                               static_cast<Eigen::Index>(vocabulary.size()));
  for (std::size_t i = 0; i < partition.size(); ++i) {
    auto it = linked.find(partition[i]);
    if (it == linked.end()) throw Error("article '" + partition[i] + "' has no linked entities");
    const EntityVector bits = entity_vector(partition[i], it->second, vocabulary);
    for (std::size_t k : bits.support) matrix.rows(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = 1.0;
  }
  return matrix;
}

}  // namespace newsfuse
