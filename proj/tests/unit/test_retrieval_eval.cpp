#include <gtest/gtest.h>

#include <numeric>
#include <random>
#include <sstream>

#include "newsfuse/retrieval_eval.hpp"

using namespace newsfuse;

namespace {

RankedList list_of(const std::vector<int>& relevance) {
  RankedList r;
  r.query_id = "q";
  for (std::size_t i = 0; i < relevance.size(); ++i) {
    r.entries.push_back({"d" + std::to_string(i), 1.0 - static_cast<double>(i) / 100.0, relevance[i] != 0});
  }
  return r;
}

// Direct expansion of sum_n (R_n - R_{n-1}) P_n over every rank n.
double ap_oracle(const std::vector<int>& relevance) {
  const double total = std::accumulate(relevance.begin(), relevance.end(), 0.0);
  double hits = 0, previous_recall = 0, ap = 0;
  for (std::size_t n = 1; n <= relevance.size(); ++n) {
    hits += relevance[n - 1];
    const double recall = hits / total;
    const double precision = hits / static_cast<double>(n);
    ap += (recall - previous_recall) * precision;
    previous_recall = recall;
  }
  return ap;
}

Corpus three_articles() {
  return Corpus::from_articles({{"a1", "t", "", "", "x", Domain::sport, Language::en},
                                {"a2", "t", "", "", "x", Domain::sport, Language::en},
                                {"a3", "t", "", "", "y", Domain::sport, Language::en},
                                {"a9", "t", "", "", "x", Domain::sport, Language::en},
                                {"b1", "t", "", "", "solo", Domain::health, Language::en}});
}

SimilarityMatrix scores_for(const Corpus& corpus, std::initializer_list<std::tuple<int, int, double>> entries) {
  SimilarityMatrix m;
  m.features = {FeatureTag::entity};
  const auto ids = corpus.partition(Language::en);
  m.ids.assign(ids.begin(), ids.end());
  m.scores = MatrixXr::Zero(static_cast<Eigen::Index>(ids.size()), static_cast<Eigen::Index>(ids.size()));
  for (auto [i, j, s] : entries) m.scores(i, j) = m.scores(j, i) = s;
  return m;
}

}  // namespace

TEST(RankForQuery, OrdersByScore) {
  const Corpus corpus = three_articles();
  // indices: a1=0, a2=1, a3=2, a9=3, b1=4
  const SimilarityMatrix m = scores_for(corpus, {{0, 1, 0.9}, {0, 2, 0.1}, {0, 3, 0.05}, {0, 4, 0.01}});
  const RankedList r = rank_for_query(m, "a1", corpus);
  ASSERT_EQ(r.entries.size(), 4u);
  EXPECT_EQ(r.entries[0].article_id, "a2");
  EXPECT_EQ(r.entries[1].article_id, "a3");
  EXPECT_TRUE(r.entries[0].relevant);
  EXPECT_FALSE(r.entries[1].relevant);
  EXPECT_EQ(r.n_relevant(), 2u);
  for (const auto& e : r.entries) EXPECT_NE(e.article_id, "a1");
}

TEST(RankForQuery, TiesBreakOnIdAscending) {
  const Corpus corpus = three_articles();
  const SimilarityMatrix m = scores_for(corpus, {{2, 3, 0.5}, {2, 1, 0.5}});
  const RankedList r = rank_for_query(m, "a3", corpus);
  EXPECT_EQ(r.entries[0].article_id, "a2");
  EXPECT_EQ(r.entries[1].article_id, "a9");
}

TEST(RankForQuery, SoleEventMemberIsUnscorable) {
  const Corpus corpus = three_articles();
  const RankedList r = rank_for_query(scores_for(corpus, {}), "b1", corpus);
  EXPECT_EQ(r.n_relevant(), 0u);
  EXPECT_FALSE(r.scorable());
  EXPECT_THROW(average_precision(r), Error);
}

TEST(RankForQuery, UnknownQuery) {
  const Corpus corpus = three_articles();
  EXPECT_THROW(rank_for_query(scores_for(corpus, {}), "nope", corpus), Error);
}

TEST(AveragePrecision, Examples) {
  EXPECT_NEAR(average_precision(list_of({1, 0, 1, 0})).ap, (1.0 + 2.0 / 3.0) / 2.0, 1e-15);
  EXPECT_EQ(average_precision(list_of({1, 1, 1, 0, 0})).ap, 1.0);
  EXPECT_NEAR(average_precision(list_of({0, 0, 1})).ap, 1.0 / 3.0, 1e-15);
}

TEST(AveragePrecision, ExposesPrecisionAndRecallSteps) {
  const APResult r = average_precision(list_of({0, 1, 0, 1}));
  EXPECT_EQ(r.relevant_ranks, (std::vector<std::size_t>{2, 4}));
  EXPECT_EQ(r.hits_at(3), 1u);
  EXPECT_EQ(r.precision_at(2), 0.5);
  EXPECT_EQ(r.recall_at(4), 1.0);
  EXPECT_EQ(r.recall_at(0), 0.0);
}

TEST(AveragePrecision, MatchesOracleOnRandomLists) {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t length = 2 + rng() % 49;
    std::vector<int> relevance(length);
    for (auto& r : relevance) r = static_cast<int>(rng() % 2);
    if (std::accumulate(relevance.begin(), relevance.end(), 0) == 0) relevance[rng() % length] = 1;
    const APResult result = average_precision(list_of(relevance));
    ASSERT_NEAR(result.ap, ap_oracle(relevance), 1e-12);
    ASSERT_GE(result.ap, 0.0);
    ASSERT_LE(result.ap, 1.0);
  }
}

TEST(AveragePrecision, PerfectIffRelevantFirst) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t length = 2 + rng() % 20;
    std::vector<int> relevance(length);
    for (auto& r : relevance) r = static_cast<int>(rng() % 2);
    relevance[0] = 1;
    const bool sorted = std::is_sorted(relevance.begin(), relevance.end(), std::greater<>());
    EXPECT_EQ(average_precision(list_of(relevance)).ap == 1.0, sorted);
  }
}

TEST(AveragePrecision, SwappingUpARelevantNeverHurts) {
  std::mt19937_64 rng(91);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t length = 2 + rng() % 30;
    std::vector<int> relevance(length);
    for (auto& r : relevance) r = static_cast<int>(rng() % 2);
    relevance[rng() % length] = 1;
    for (std::size_t i = 0; i + 1 < length; ++i) {
      if (relevance[i] == 0 && relevance[i + 1] == 1) {
        std::vector<int> improved = relevance;
        std::swap(improved[i], improved[i + 1]);
        EXPECT_GE(average_precision(list_of(improved)).ap, average_precision(list_of(relevance)).ap);
      }
    }
  }
}

TEST(Evaluate, EventAndDomainMeans) {
  const Corpus corpus = three_articles();
  // a1 query: a2 (x, rel) 0.9, a3 0.1, a9 (x) 0.05  -> AP (1 + 2/3)/2
  const SimilarityMatrix m = scores_for(corpus, {{0, 1, 0.9}, {0, 2, 0.1}, {0, 3, 0.05}, {1, 3, 0.8}, {2, 4, 0.3}});
  const std::vector<LanguageMatrices> input{{Language::en, {{Configuration::entity, m}}}};
  const std::vector<Configuration> configs{Configuration::entity};
  const EvaluationReport report = evaluate(corpus, input, configs);

  ASSERT_EQ(report.unscorable.size(), 2u);  // a3 (event y) and b1 (event solo)
  double sum = 0;
  std::size_t count = 0;
  for (const QueryScore& q : report.queries) {
    EXPECT_EQ(q.event, "x");
    sum += q.ap;
    ++count;
  }
  ASSERT_EQ(count, 3u);
  const EventScore* x = report.find_event(Language::en, Configuration::entity, "x");
  ASSERT_NE(x, nullptr);
  EXPECT_DOUBLE_EQ(x->ap, sum / 3.0);
  EXPECT_EQ(report.find_event(Language::en, Configuration::entity, "y"), nullptr);
  const DomainScore* sport = report.find_domain(Language::en, Configuration::entity, Domain::sport);
  ASSERT_NE(sport, nullptr);
  EXPECT_EQ(sport->ap, x->ap);
  EXPECT_EQ(sport->n_events, 1u);
}

TEST(Evaluate, DomainIsMeanOfEventMeansNotPooled) {
  std::vector<Article> articles;
  // Event p has 2 articles, event q has 4, both in politics.
  for (int i = 0; i < 2; ++i) articles.push_back({"p" + std::to_string(i), "t", "", "", "p", Domain::politics, Language::de});
  for (int i = 0; i < 4; ++i) articles.push_back({"q" + std::to_string(i), "t", "", "", "q", Domain::politics, Language::de});
  const Corpus corpus = Corpus::from_articles(articles);
  SimilarityMatrix m;
  m.language = Language::de;
  m.features = {FeatureTag::objects};
  const auto ids = corpus.partition(Language::de);
  m.ids.assign(ids.begin(), ids.end());
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unit;
  m.scores = MatrixXr::Zero(6, 6);
  for (int i = 0; i < 6; ++i)
    for (int j = i + 1; j < 6; ++j) m.scores(i, j) = m.scores(j, i) = unit(rng);
  const std::vector<LanguageMatrices> input{{Language::de, {{Configuration::objects, m}}}};
  const std::vector<Configuration> configs{Configuration::objects};

  const EvaluationReport by_event = evaluate(corpus, input, configs, DomainAggregation::event_mean);
  const double p = by_event.find_event(Language::de, Configuration::objects, "p")->ap;
  const double q = by_event.find_event(Language::de, Configuration::objects, "q")->ap;
  EXPECT_DOUBLE_EQ(by_event.find_domain(Language::de, Configuration::objects, Domain::politics)->ap, (p + q) / 2);

  const EvaluationReport pooled = evaluate(corpus, input, configs, DomainAggregation::query_pooled);
  double sum = 0;
  for (const auto& qs : pooled.queries) sum += qs.ap;
  EXPECT_DOUBLE_EQ(pooled.find_domain(Language::de, Configuration::objects, Domain::politics)->ap, sum / 6);
}

TEST(Evaluate, MissingConfigurationMatrix) {
  const Corpus corpus = three_articles();
  const std::vector<LanguageMatrices> input{{Language::en, {{Configuration::entity, scores_for(corpus, {})}}}};
  const std::vector<Configuration> configs{Configuration::entity, Configuration::bert};
  EXPECT_THROW(evaluate(corpus, input, configs), Error);
}

TEST(RenderReport, PercentCells) {
  EXPECT_EQ(percent_cell(0.8333), 83);
  EXPECT_EQ(percent_cell(1.0), 100);
  EXPECT_EQ(percent_cell(0.835), 84);  // 83.5 rounds away from zero
  EXPECT_EQ(percent_cell(0.0), 0);
}

namespace {

EvaluationReport handmade(const std::vector<double>& row) {
  EvaluationReport report;
  report.languages = {Language::en};
  report.configurations.assign(kConfigurations.begin(), kConfigurations.end());
  report.config_hash = "cafe";
  for (std::size_t c = 0; c < row.size(); ++c) {
    report.events.push_back({Language::en, kConfigurations[c], Domain::politics,
                             "2016 United States presidential election", row[c], 12});
    report.domains.push_back({Language::en, kConfigurations[c], Domain::politics, row[c], 1, 12});
  }
  return report;
}

}  // namespace

TEST(RenderReport, EventTableMarksRowMaximum) {
  const std::string table =
      render_report(handmade({0.14, 0.39, 0.35, 0.23, 0.35, 0.30, 0.31, 0.42}), ReportStyle::event_table);
  EXPECT_NE(table.find("    B     E     T̄     O     P     L     V̄  Mean \n"), std::string::npos) << table;
  EXPECT_NE(table.find("   14    39    35    23    35    30    31    42*\n"), std::string::npos) << table;
  EXPECT_EQ(std::count(table.begin(), table.end(), '*'), 2);  // legend + one marked cell
}

TEST(RenderReport, TiesAllMarked) {
  const std::string table =
      render_report(handmade({0.5, 0.2, 0.5, 0.1, 0.1, 0.1, 0.1, 0.3}), ReportStyle::event_table);
  EXPECT_NE(table.find("   50*   20    50*   10 "), std::string::npos) << table;
}

TEST(RenderReport, DomainTableShape) {
  const std::string table =
      render_report(handmade({0.14, 0.39, 0.55, 0.23, 0.35, 0.30, 0.32, 0.47}), ReportStyle::domain_table);
  EXPECT_NE(table.find("English"), std::string::npos);
  EXPECT_NE(table.find("    T̄     V̄   T+V \n"), std::string::npos) << table;
  EXPECT_NE(table.find("politics       55*   32    47 \n"), std::string::npos) << table;
}

TEST(RenderReport, MachineRoundTrip) {
  EvaluationReport report = handmade({0.14, 0.39, 0.35, 0.23, 0.35, 0.30, 0.31, 1.0 / 3.0});
  report.seed = 18446744073709551615ull;
  report.corpus_digest = "abc";
  report.queries.push_back({Language::en, Configuration::entity, "q1", "ev", Domain::sport, 0.1 + 0.2, 3});
  report.unscorable.push_back({Language::de, "q2", "solo"});
  const std::string machine = render_report(report, ReportStyle::machine);
  std::istringstream in(machine);
  const EvaluationReport back = parse_report(in);
  EXPECT_EQ(render_report(back, ReportStyle::machine), machine);
  EXPECT_EQ(back.seed, report.seed);
  EXPECT_EQ(back.queries.at(0).ap, 0.1 + 0.2);
  EXPECT_EQ(back.events.back().ap, 1.0 / 3.0);
}

TEST(RenderReport, StyleNames) {
  EXPECT_EQ(parse_report_style("machine"), ReportStyle::machine);
  EXPECT_THROW(parse_report_style("html"), Error);
}
