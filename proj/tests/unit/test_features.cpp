#include <gtest/gtest.h>

#include <cstring>
#include <numeric>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "newsfuse/features.hpp"

using namespace newsfuse;

namespace {

VectorXr vec(std::initializer_list<double> values) {
  VectorXr v(static_cast<Eigen::Index>(values.size()));
  std::copy(values.begin(), values.end(), v.data());
  return v;
}

Corpus small_corpus(std::size_t n, Language language = Language::de) {
  std::vector<Article> articles;
  for (std::size_t i = 0; i < n; ++i) {
    articles.push_back({"de-pol-" + std::to_string(100 + i), "t", "b", "", "e", Domain::politics, language});
  }
  return Corpus::from_articles(articles);
}

FeatureMatrix random_matrix(const Corpus& corpus, FeatureTag tag, Language language, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  FeatureMatrix m;
  m.tag = tag;
  m.language = language;
  const auto partition = corpus.partition(language);
  m.row_ids.assign(partition.begin(), partition.end());
  m.rows.resize(static_cast<Eigen::Index>(partition.size()), static_cast<Eigen::Index>(expected_dim(tag)));
  for (Eigen::Index i = 0; i < m.rows.size(); ++i) m.rows.data()[i] = gauss(rng) * std::pow(10.0, gauss(rng));
  return m;
}

}  // namespace

TEST(SegmentText, ArithmeticOnWindowRule) {
  EXPECT_EQ(segment_text(std::string(3200, 'a')),
            (std::vector<WindowSpan>{{0, 1500}, {1500, 3000}, {3000, 3200}}));
  EXPECT_EQ(segment_text(std::string(900, 'a')), (std::vector<WindowSpan>{{0, 900}}));
  EXPECT_EQ(segment_text(std::string(1500, 'a')), (std::vector<WindowSpan>{{0, 1500}}));
  EXPECT_THROW(segment_text(""), Error);
}

TEST(SegmentText, CountsCodePoints) {
  std::string text;
  for (int i = 0; i < 1501; ++i) text += "ä";  // two bytes each
  const auto spans = segment_text(text);
  ASSERT_EQ(spans.size(), 2u);
  EXPECT_EQ(spans[1], (WindowSpan{1500, 1501}));
}

TEST(SegmentText, TilesTextContiguously) {
  std::mt19937 rng(1);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t length = 1 + rng() % 10000;
    const auto spans = segment_text(std::string(length, 'x'));
    std::size_t covered = 0;
    std::size_t cursor = 0;
    for (std::size_t i = 0; i < spans.size(); ++i) {
      EXPECT_EQ(spans[i].start, cursor);
      EXPECT_LE(spans[i].size(), kWindowChars);
      if (i + 1 < spans.size()) EXPECT_EQ(spans[i].size(), kWindowChars);
      cursor = spans[i].end;
      covered += spans[i].size();
    }
    EXPECT_EQ(covered, length);
    EXPECT_EQ(cursor, length);
  }
}

TEST(MeanPool, Examples) {
  const std::vector<VectorXr> two{vec({1, 3}), vec({3, 5})};
  EXPECT_EQ(mean_pool<double>(two), vec({2, 4}));
  const std::vector<VectorXr> one{vec({7, 7, 7})};
  EXPECT_EQ(mean_pool<double>(one), vec({7, 7, 7}));
  const std::vector<VectorXr> four{vec({1, 0}), vec({0, 1}), vec({1, 1}), vec({0, 0})};
  EXPECT_EQ(mean_pool<double>(four), vec({0.5, 0.5}));
}

TEST(MeanPool, Errors) {
  EXPECT_THROW(mean_pool<double>(std::vector<VectorXr>{}), Error);
  const std::vector<VectorXr> mismatch{vec({1, 2}), vec({1, 2, 3})};
  EXPECT_THROW(mean_pool<double>(mismatch), Error);
  const std::vector<VectorXr> nan{vec({1, std::nan("")})};
  EXPECT_THROW(mean_pool<double>(nan), Error);
}

TEST(MeanPool, PermutationInvariantAndIdempotent) {
  std::mt19937 rng(9);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<VectorXr> vectors(2 + rng() % 8, VectorXr(16));
    for (auto& v : vectors) {
      for (Eigen::Index j = 0; j < v.size(); ++j) v[j] = gauss(rng);
    }
    const VectorXr reference = mean_pool<double>(vectors);
    std::shuffle(vectors.begin(), vectors.end(), rng);
    EXPECT_TRUE(mean_pool<double>(vectors).isApprox(reference, 1e-12));
    const std::vector<VectorXr> same(5, vectors.front());
    EXPECT_TRUE(mean_pool<double>(same).isApprox(vectors.front(), 1e-15));
  }
}

TEST(ArticleTextVector, Examples) {
  const VectorXr v = vec({0.25, -1.5, 3});
  EXPECT_EQ(article_text_vector<double>(std::vector<VectorXr>{v}), v);
  const std::vector<VectorXr> windows{vec({2, 0}), vec({0, 2})};
  EXPECT_EQ(article_text_vector<double>(windows), vec({1, 1}));
}

// With equal token counts per window the mean of window means equals the flat
// mean over all tokens.
TEST(ArticleTextVector, MatchesFlatTokenMeanForEqualWindows) {
  std::mt19937 rng(21);
  std::normal_distribution<double> gauss;
  const int tokens_per_window = 7;
  const Eigen::Index dim = 768;
  RowMatrix<double> tokens(3 * tokens_per_window, dim);
  for (Eigen::Index i = 0; i < tokens.size(); ++i) tokens.data()[i] = gauss(rng);

  std::vector<VectorXr> windows;
  for (int w = 0; w < 3; ++w) windows.push_back(mean_pool_rows(tokens.middleRows(w * tokens_per_window, tokens_per_window)));

  VectorXr oracle = VectorXr::Zero(dim);
  for (Eigen::Index i = 0; i < tokens.rows(); ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) oracle[j] += tokens(i, j);
  }
  oracle /= static_cast<double>(tokens.rows());
  EXPECT_LT((article_text_vector<double>(windows) - oracle).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ArticleTextVector, ShortTextEqualsItsSingleWindow) {
  const auto spans = segment_text(std::string(1200, 'q'));
  ASSERT_EQ(spans.size(), 1u);
  const VectorXr window = vec({0.1, 0.2, 0.3});
  EXPECT_EQ(article_text_vector<double>(std::vector<VectorXr>{window}), window);
}

TEST(FeatureFile, LoadsThirtyFiveGermanPoliticsVectors) {
  const Corpus corpus = small_corpus(35);
  const FeatureMatrix m = random_matrix(corpus, FeatureTag::objects, Language::de, 1);
  std::istringstream in(serialize_feature_matrix(m));
  const FeatureMatrix back = parse_feature_matrix(in, "objects.jsonl", FeatureTag::objects, Language::de, corpus, 2048);
  EXPECT_EQ(back.rows.rows(), 35);
  EXPECT_EQ(back.rows.cols(), 2048);
}

TEST(FeatureFile, RoundTripIsBitExact) {
  const Corpus corpus = small_corpus(6, Language::en);
  for (FeatureTag tag : kDenseFeatureTags) {
    const FeatureMatrix m = random_matrix(corpus, tag, Language::en, static_cast<std::uint64_t>(tag) + 3);
    std::istringstream in(serialize_feature_matrix(m));
    const FeatureMatrix back = parse_feature_matrix(in, "f", tag, Language::en, corpus, expected_dim(tag));
    EXPECT_EQ(back.row_ids, m.row_ids);
    EXPECT_EQ(std::memcmp(back.rows.data(), m.rows.data(), sizeof(double) * static_cast<std::size_t>(m.rows.size())), 0);
  }
}

TEST(FeatureFile, RowsFollowPartitionOrderWhateverFileOrder) {
  const Corpus corpus = small_corpus(3, Language::en);
  std::string text = R"({"feature":"objects","language":"en","dim":2048,"count":3})" "\n";
  const auto ids = corpus.partition(Language::en);
  for (int i = 2; i >= 0; --i) {
    std::string row = R"({"article_id":")" + ids[static_cast<std::size_t>(i)] + R"(","vector":[)";
    for (int j = 0; j < 2048; ++j) row += (j ? "," : "") + std::to_string(i);
    text += row + "]}\n";
  }
  std::istringstream in(text);
  const FeatureMatrix m = parse_feature_matrix(in, "f", FeatureTag::objects, Language::en, corpus, 2048);
  EXPECT_EQ(m.rows(0, 0), 0.0);
  EXPECT_EQ(m.rows(2, 5), 2.0);
}

namespace {

std::string load_error(const std::string& text, const Corpus& corpus, std::size_t dim = 2048) {
  std::istringstream in(text);
  try {
    parse_feature_matrix(in, "objects.jsonl", FeatureTag::objects, Language::en, corpus, dim);
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

std::string row(const std::string& id, std::size_t dim, const std::string& value = "0.5") {
  std::string r = R"({"article_id":")" + id + R"(","vector":[)";
  for (std::size_t j = 0; j < dim; ++j) r += (j ? "," : "") + value;
  return r + "]}\n";
}

}  // namespace

TEST(FeatureFile, Errors) {
  const Corpus corpus = small_corpus(2, Language::en);
  const auto ids = corpus.partition(Language::en);
  const std::string header = R"({"feature":"objects","language":"en","dim":2048,"count":2})" "\n";

  EXPECT_NE(load_error(header + row(ids[0], 2047) + row(ids[1], 2048), corpus).find("dimension mismatch"),
            std::string::npos);
  EXPECT_NE(load_error(R"({"feature":"objects","language":"en","dim":2047,"count":2})" "\n", corpus)
                .find("dimension mismatch"),
            std::string::npos);
  const std::string missing = load_error(header + row(ids[0], 2048), corpus);
  EXPECT_NE(missing.find("'" + ids[1] + "' has no vector"), std::string::npos) << missing;
  EXPECT_NE(load_error(header + row(ids[0], 2048) + row(ids[1], 2048) + row("stranger", 2048), corpus)
                .find("unknown article id 'stranger'"),
            std::string::npos);
  EXPECT_NE(load_error(header + row(ids[0], 2048) + row(ids[1], 2048, "null"), corpus).find("non-finite"),
            std::string::npos);
  EXPECT_NE(load_error(header + row(ids[0], 2048) + row(ids[0], 2048), corpus).find("duplicate"), std::string::npos);
  EXPECT_NE(load_error(R"({"feature":"places","language":"en","dim":2048,"count":2})" "\n", corpus).find("places"),
            std::string::npos);
}

TEST(FeatureFile, CheckFeatureMatrix) {
  const Corpus corpus = small_corpus(3, Language::en);
  FeatureMatrix m = random_matrix(corpus, FeatureTag::text_embedding, Language::en, 4);
  EXPECT_NO_THROW(check_feature_matrix(m, corpus, 768));
  EXPECT_THROW(check_feature_matrix(m, corpus, 2048), Error);
  m.rows(1, 3) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(check_feature_matrix(m, corpus, 768), Error);
}

TEST(FeatureDirectory, WritesFilesAndManifest) {
  const auto dir = newsfuse::testing::scratch_dir("feature-dir");
  const Corpus corpus = small_corpus(4, Language::en);
  std::vector<FeatureMatrix> matrices;
  for (FeatureTag tag : kDenseFeatureTags) matrices.push_back(random_matrix(corpus, tag, Language::en, 8));
  write_feature_directory(dir / "features", Language::en, matrices);
  const FeatureManifest manifest = load_feature_manifest(manifest_path(dir / "features", Language::en));
  ASSERT_EQ(manifest.entries.size(), 4u);
  EXPECT_EQ(manifest.find(FeatureTag::text_embedding)->dim, 768u);
  EXPECT_EQ(manifest.find(FeatureTag::geolocation)->file, "geolocation.jsonl");
  const FeatureMatrix back =
      load_feature_matrix(feature_path(dir / "features", Language::en, FeatureTag::places), FeatureTag::places,
                          Language::en, corpus);
  EXPECT_EQ(back.rows, matrices[1].rows);
}
