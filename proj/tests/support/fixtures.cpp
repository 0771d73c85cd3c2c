#include "fixtures.hpp"

#include <algorithm>
#include <random>
#include <set>

#include "newsfuse/jsonl.hpp"

namespace newsfuse::testing {

namespace fs = std::filesystem;

namespace {

std::string pad(std::size_t value, int width) {
  std::string s = std::to_string(value);
  return std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(s.size()))), '0') + s;
}

std::string event_name(std::size_t e) { return "event " + pad(e, 2); }

// Deterministic stand-in for linker output: the text is a run of entity surfaces,
// each one both an NER span and a linker span, with a losing distractor candidate.
ArticleAnnotations annotate(const Article& article, const std::vector<std::size_t>& entity_ids,
                            std::size_t title_length) {
  ArticleAnnotations a;
  a.article_id = article.id;
  std::size_t offset = title_length + 1;
  for (std::size_t id : entity_ids) {
    const std::string surface = "Ent" + pad(id, 5);
    a.ner.push_back({offset, offset + surface.size(), surface});
    a.candidates.push_back({offset, offset + surface.size(), "wiki:" + surface, 0.9});
    a.candidates.push_back({offset, offset + surface.size(), "wiki:Alt" + surface, 0.1});
    offset += surface.size() + 1;
  }
  return a;
}

}  // namespace

Fixture make_fixture(const FixtureOptions& options) {
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<Article> articles;
  std::map<std::string, std::vector<std::size_t>> article_entities;
  std::map<std::string, std::size_t> article_event;

  for (Language language : options.languages) {
    std::size_t total = options.events * options.articles_per_event;
    if (auto it = options.articles_per_language.find(language); it != options.articles_per_language.end()) {
      total = it->second;
    }
    const std::size_t pool = options.entity_pool.count(language) ? options.entity_pool.at(language) : 200;
    // Each event owns a slice of the entity pool; the remainder is background noise.
    const std::size_t slice = std::max<std::size_t>(1, pool / (options.events + 1));
    std::uniform_int_distribution<std::size_t> any_entity(0, pool - 1);
    std::uniform_int_distribution<std::size_t> in_slice(0, slice - 1);

    for (std::size_t i = 0; i < total; ++i) {
      const std::size_t e = i % options.events;
      Article article;
      article.language = language;
      article.event = event_name(e);
      article.domain = kDomains[e % kDomains.size()];
      article.id = std::string(to_string(language)) + "-" + pad(e, 2) + "-" + pad(i / options.events, 3);
      article.title = "Report " + article.id;
      article.image_ref = "images/" + article.id + ".jpg";

      std::vector<std::size_t> entities;
      if (options.kind == FixtureKind::one_hot) {
        entities.push_back(e);
      } else {
        std::bernoulli_distribution from_event(0.6);
        for (std::size_t k = 0; k < options.entities_per_article; ++k) {
          entities.push_back(from_event(rng) ? (e * slice + in_slice(rng)) % pool : any_entity(rng));
        }
        if (options.cover_entity_pool) {
          for (std::size_t id = i; id < pool; id += total) entities.push_back(id);
        }
      }
      for (std::size_t id : entities) article.body += "Ent" + pad(id, 5) + " ";
      if (article.body.empty()) article.body = "no entities";
      article_entities[article.id] = entities;
      article_event[article.id] = e;
      articles.push_back(std::move(article));
    }
  }

  Fixture fixture;
  fixture.corpus = Corpus::from_articles(articles);
  for (const Article& article : fixture.corpus.articles()) {
    fixture.annotations.push_back(annotate(article, article_entities.at(article.id), article.title.size()));
  }
  const auto linked = link_corpus(fixture.corpus, fixture.annotations);

  for (Language language : fixture.corpus.languages()) {
    LanguageFeatures lf;
    lf.language = language;
    const auto partition = fixture.corpus.partition(language);
    const auto rows = static_cast<Eigen::Index>(partition.size());
    for (FeatureTag tag : kDenseFeatureTags) {
      const auto dim = static_cast<Eigen::Index>(expected_dim(tag));
      FeatureMatrix m;
      m.tag = tag;
      m.language = language;
      m.row_ids.assign(partition.begin(), partition.end());
      m.rows = MatrixXr::Zero(rows, dim);
      // Centroids are drawn per (feature, event) so features disagree with each other.
      std::vector<VectorXr> centroids;
      if (options.kind == FixtureKind::noisy) {
        for (std::size_t e = 0; e < options.events; ++e) {
          VectorXr c(dim);
          for (Eigen::Index j = 0; j < dim; ++j) c[j] = std::abs(gauss(rng));
          centroids.push_back(std::move(c));
        }
      }
      for (Eigen::Index i = 0; i < rows; ++i) {
        const std::size_t e = article_event.at(partition[static_cast<std::size_t>(i)]);
        if (options.kind == FixtureKind::one_hot) {
          m.rows(i, static_cast<Eigen::Index>(e)) = 1.0;
        } else {
          for (Eigen::Index j = 0; j < dim; ++j) {
            m.rows(i, j) = std::max(0.0, centroids[e][j] + options.noise * gauss(rng));
          }
        }
      }
      lf.by_tag.emplace(tag, std::move(m));
    }
    const EntityVocabulary vocabulary = build_vocabulary(fixture.corpus, language, linked);
    lf.by_tag.emplace(FeatureTag::entity, entity_feature_matrix(fixture.corpus, language, vocabulary, linked));
    fixture.features.push_back(std::move(lf));
  }
  return fixture;
}

void write_fixture(const Fixture& fixture, const fs::path& dir, std::uint64_t seed) {
  fs::create_directories(dir);
  write_corpus(dir / "corpus.jsonl", fixture.corpus);
  jsonl::write_file_atomic(dir / "annotations.jsonl", serialize_annotations(fixture.annotations));
  for (const LanguageFeatures& lf : fixture.features) {
    std::vector<FeatureMatrix> dense;
    for (FeatureTag tag : kDenseFeatureTags) dense.push_back(lf.by_tag.at(tag));
    write_feature_directory(dir / "features", lf.language, dense);
  }
  nlohmann::json config{{"corpus_path", "corpus.jsonl"},
                        {"features_dir", "features"},
                        {"annotations_path", "annotations.jsonl"},
                        {"output_dir", "out"},
                        {"seed", seed}};
  jsonl::write_file_atomic(dir / "config.json", config.dump(2) + "\n");
}

ExperimentConfig fixture_config(const fs::path& dir, std::uint64_t seed) {
  ExperimentConfig config;
  config.corpus_path = dir / "corpus.jsonl";
  config.features_dir = dir / "features";
  config.annotations_path = dir / "annotations.jsonl";
  config.output_dir = dir / "out";
  config.seed = seed;
  return config;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("newsfuse-test-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace newsfuse::testing
