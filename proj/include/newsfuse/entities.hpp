#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "newsfuse/corpus.hpp"
#include "newsfuse/features.hpp"
#include "newsfuse/types.hpp"

namespace newsfuse {

// Offsets are code points into text_of(article); end is exclusive.
struct NerSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string surface;
};

struct LinkerCandidate {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string entity_iri;
  double pagerank = 0.0;
};

struct LinkedEntity {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string entity_iri;

  bool operator==(const LinkedEntity&) const = default;
};

struct ArticleAnnotations {
  std::string article_id;
  std::vector<NerSpan> ner;
  std::vector<LinkerCandidate> candidates;
};

// Keeps only spans where the NER output and the linker agree on the exact
// (start, end) pair. At each such span the candidate with the highest pagerank
// wins; equal pageranks fall back to the smallest IRI. Sorted by start.
std::vector<LinkedEntity> merge_annotations(std::span<const NerSpan> ner,
                                            std::span<const LinkerCandidate> candidates);

class EntityVocabulary {
 public:
  EntityVocabulary() = default;
  EntityVocabulary(Language language, std::vector<std::string> sorted_unique_entries);

  Language language() const { return language_; }
  const std::vector<std::string>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::optional<std::size_t> index_of(std::string_view iri) const;

 private:
  Language language_ = Language::en;
  std::vector<std::string> entries_;
};

// Sorted distinct IRIs across all articles of one language partition.
EntityVocabulary build_vocabulary(Language language, std::span<const std::vector<LinkedEntity>> per_article);

// Binary presence vector, stored as the sorted indices of its set bits.
struct EntityVector {
  std::string article_id;
  std::size_t dimension = 0;
  std::vector<std::size_t> support;

  template <typename Scalar = double>
  Vector<Scalar> dense() const {
    Vector<Scalar> bits = Vector<Scalar>::Zero(static_cast<Eigen::Index>(dimension));
    for (std::size_t k : support) bits[static_cast<Eigen::Index>(k)] = Scalar(1);
    return bits;
  }
};

// Mention multiplicity is ignored. Throws if an IRI is missing from the vocabulary.
EntityVector entity_vector(std::string_view article_id, std::span<const LinkedEntity> entities,
                           const EntityVocabulary& vocabulary);

// Annotation file: one record per article,
// {"article_id", "ner": [{start,end,surface}], "candidates": [{start,end,entity_iri,pagerank}]}.
std::vector<ArticleAnnotations> parse_annotations(std::istream& in, std::string_view source = "annotations");
std::vector<ArticleAnnotations> load_annotations(const std::filesystem::path& path);
std::string serialize_annotations(std::span<const ArticleAnnotations> annotations);

// Problems found when checking annotations against the corpus; empty means consistent.
struct AnnotationIssues {
  std::vector<std::string> missing_articles;  // corpus ids with no record
  std::vector<std::string> unknown_articles;  // record ids not in the corpus
  std::vector<std::string> span_errors;       // human-readable, one per offending span
};
AnnotationIssues check_annotations(const Corpus& corpus, std::span<const ArticleAnnotations> annotations);

// Linked entities per article id, for every article of the corpus. Articles without an
// annotation record raise Error naming the id.
std::map<std::string, std::vector<LinkedEntity>> link_corpus(const Corpus& corpus,
                                                             std::span<const ArticleAnnotations> annotations);

// Vocabulary of one language partition built from link_corpus output.
EntityVocabulary build_vocabulary(const Corpus& corpus, Language language,
                                  const std::map<std::string, std::vector<LinkedEntity>>& linked);

// Stack of binary entity vectors in partition order, ready for cosine similarity.
FeatureMatrix entity_feature_matrix(const Corpus& corpus, Language language, const EntityVocabulary& vocabulary,
                                    const std::map<std::string, std::vector<LinkedEntity>>& linked);

}  // namespace newsfuse
