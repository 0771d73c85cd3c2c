#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "newsfuse/types.hpp"

namespace newsfuse {

struct Article {
  std::string id;
  std::string title;
  std::string body;
  std::string image_ref;
  std::string event;
  Domain domain = Domain::politics;
  Language language = Language::en;

  bool operator==(const Article&) const = default;
};

// Validated, immutable article collection. Articles are held sorted by id, and each
// language partition lists its ids in the same lexicographic order.
class Corpus {
 public:
  Corpus() = default;

  // Checks every Article and Corpus invariant; throws Error naming the offender.
  static Corpus from_articles(std::vector<Article> articles);

  const std::vector<Article>& articles() const { return articles_; }
  std::size_t size() const { return articles_.size(); }

  std::span<const std::string> partition(Language language) const;
  // Languages with at least one article, in enum order.
  std::vector<Language> languages() const;

  const Article& at(std::string_view id) const;
  const Article* find(std::string_view id) const;

  // Domain of an event label; throws on unknown event.
  Domain domain_of(std::string_view event) const;

  // SHA-256 of the canonical serialization.
  std::string digest() const;

 private:
  std::vector<Article> articles_;
  std::map<Language, std::vector<std::string>> partitions_;
  std::map<std::string, Domain, std::less<>> event_domains_;
};

Corpus parse_corpus(std::istream& in, std::string_view source = "corpus");
Corpus load_corpus(const std::filesystem::path& path);

// One JSON object per line, articles in id order. parse_corpus inverts it.
std::string serialize_corpus(const Corpus& corpus);
void write_corpus(const std::filesystem::path& path, const Corpus& corpus);

// Canonical text fed to the entity and embedding pipelines: title, newline, body.
// Body-less articles contribute the bare title.
std::string text_of(const Article& article);

}  // namespace newsfuse
