#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "newsfuse/experiment.hpp"

namespace newsfuse::testing {

enum class FixtureKind {
  // Every feature is the one-hot indicator of the article's event.
  one_hot,
  // Event centroids plus Gaussian noise; entities drawn from event pools with
  // background noise, so some pairs share no entity at all.
  noisy,
};

struct FixtureOptions {
  FixtureKind kind = FixtureKind::noisy;
  std::size_t events = 25;
  // Articles per event, used for every language unless articles_per_language is set.
  std::size_t articles_per_event = 8;
  std::map<Language, std::size_t> articles_per_language;
  std::vector<Language> languages{Language::en, Language::de};
  std::map<Language, std::size_t> entity_pool;  // default 200 per language
  std::size_t entities_per_article = 6;
  // Deal the whole entity pool out across articles so the vocabulary equals the pool.
  bool cover_entity_pool = false;
  double noise = 1.0;
  std::uint64_t seed = 7;
};

struct Fixture {
  Corpus corpus;
  std::vector<ArticleAnnotations> annotations;
  std::vector<LanguageFeatures> features;  // dense features plus the derived entity matrix
};

Fixture make_fixture(const FixtureOptions& options);

// corpus.jsonl, features/<lang>/{manifest.json,<tag>.jsonl}, annotations.jsonl, config.json.
void write_fixture(const Fixture& fixture, const std::filesystem::path& dir, std::uint64_t seed = 42);

ExperimentConfig fixture_config(const std::filesystem::path& dir, std::uint64_t seed = 42);

// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

}  // namespace newsfuse::testing
