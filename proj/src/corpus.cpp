#include "newsfuse/corpus.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>

#include "newsfuse/digest.hpp"
#include "newsfuse/jsonl.hpp"

namespace newsfuse {

namespace {

constexpr std::array<const char*, 7> kArticleFields{"id", "title", "body", "image_ref", "event", "domain", "language"};

Article article_from_record(const nlohmann::json& record, const std::string& where) {
  for (const auto& [key, value] : record.items()) {
    if (std::find_if(kArticleFields.begin(), kArticleFields.end(),
                     [&key](const char* field) { return key == field; }) == kArticleFields.end()) {
      throw Error(where + ": malformed record: unexpected field '" + key + "'");
    }
  }
  Article article;
  article.id = jsonl::require_string(record, "id", where);
  article.title = jsonl::require_string(record, "title", where);
  article.body = jsonl::require_string(record, "body", where);
  article.image_ref = jsonl::require_string(record, "image_ref", where);
  article.event = jsonl::require_string(record, "event", where);
  try {
    article.domain = parse_domain(jsonl::require_string(record, "domain", where));
    article.language = parse_language(jsonl::require_string(record, "language", where));
  } catch (const Error& e) {
    throw Error(where + ": " + e.what());
  }
  return article;
}

nlohmann::json record_of(const Article& article) {
  nlohmann::json record = nlohmann::json::object();
  record["id"] = article.id;
  record["title"] = article.title;
  record["body"] = article.body;
  record["image_ref"] = article.image_ref;
  record["event"] = article.event;
  record["domain"] = std::string(to_string(article.domain));
  record["language"] = std::string(to_string(article.language));
  return record;
}

void check_article(const Article& article) {
  if (article.id.empty()) throw Error("article with empty id");
  if (article.event.empty()) throw Error("article '" + article.id + "' has an empty event label");
  if (article.title.empty() && article.body.empty()) {
    throw Error("article '" + article.id + "' has neither title nor body");
  }
}

}  // namespace

Corpus Corpus::from_articles(std::vector<Article> articles) {
  if (articles.empty()) throw Error("empty corpus");
  for (const Article& article : articles) check_article(article);

  std::sort(articles.begin(), articles.end(), [](const Article& a, const Article& b) { return a.id < b.id; });
  auto dup = std::adjacent_find(articles.begin(), articles.end(),
                                [](const Article& a, const Article& b) { return a.id == b.id; });
  if (dup != articles.end()) throw Error("duplicate article id '" + dup->id + "'");

  Corpus corpus;
  for (const Article& article : articles) {
    auto [it, inserted] = corpus.event_domains_.emplace(article.event, article.domain);
    if (!inserted && it->second != article.domain) {
      throw Error("event '" + article.event + "' spans domains '" + std::string(to_string(it->second)) + "' and '" +
                  std::string(to_string(article.domain)) + "' (article '" + article.id + "')");
    }
    corpus.partitions_[article.language].push_back(article.id);
  }
  corpus.articles_ = std::move(articles);
  return corpus;
}

std::span<const std::string> Corpus::partition(Language language) const {
  auto it = partitions_.find(language);
  if (it == partitions_.end()) return {};
  return it->second;
}

std::vector<Language> Corpus::languages() const {
  std::vector<Language> out;
  for (Language language : kLanguages) {
    if (partitions_.count(language) != 0) out.push_back(language);
  }
  return out;
}

const Article* Corpus::find(std::string_view id) const {
  auto it = std::lower_bound(articles_.begin(), articles_.end(), id,
                             [](const Article& a, std::string_view key) { return a.id < key; });
  if (it == articles_.end() || it->id != id) return nullptr;
  return &*it;
}

const Article& Corpus::at(std::string_view id) const {
  const Article* article = find(id);
  if (article == nullptr) throw Error("unknown article id '" + std::string(id) + "'");
  return *article;
}

Domain Corpus::domain_of(std::string_view event) const {
  auto it = event_domains_.find(event);
  if (it == event_domains_.end()) throw Error("unknown event '" + std::string(event) + "'");
  return it->second;
}

std::string Corpus::digest() const { return sha256_hex(serialize_corpus(*this)); }

Corpus parse_corpus(std::istream& in, std::string_view source) {
  std::vector<Article> articles;
  std::map<std::string, std::size_t, std::less<>> first_seen;
  jsonl::for_each_record(in, source, [&](std::size_t line, const nlohmann::json& record) {
    const std::string where = jsonl::location(source, line);
    Article article = article_from_record(record, where);
    try {
      check_article(article);
    } catch (const Error& e) {
      throw Error(where + ": " + e.what());
    }
    auto [it, inserted] = first_seen.emplace(article.id, line);
    if (!inserted) {
      throw Error(where + ": duplicate article id '" + article.id + "' (first seen on line " +
                  std::to_string(it->second) + ")");
    }
    articles.push_back(std::move(article));
  });
  return Corpus::from_articles(std::move(articles));
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus '" + path.string() + "'");
  return parse_corpus(in, path.string());
}

std::string serialize_corpus(const Corpus& corpus) {
  std::string out;
  for (const Article& article : corpus.articles()) {
    out += record_of(article).dump();
    out += '\n';
  }
  return out;
}

void write_corpus(const std::filesystem::path& path, const Corpus& corpus) {
  jsonl::write_file_atomic(path, serialize_corpus(corpus));
}

std::string text_of(const Article& article) {
  if (article.body.empty()) return article.title;
  return article.title + "\n" + article.body;
}

}  // namespace newsfuse
