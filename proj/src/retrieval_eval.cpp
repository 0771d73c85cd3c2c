#include "newsfuse/retrieval_eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>

#include "newsfuse/jsonl.hpp"
#include "newsfuse/utf8.hpp"

namespace newsfuse {

namespace {

Eigen::Index index_of(const std::vector<std::string>& ids, std::string_view id) {
  auto it = std::find(ids.begin(), ids.end(), id);
  if (it == ids.end()) throw Error("unknown query id '" + std::string(id) + "'");
  return static_cast<Eigen::Index>(it - ids.begin());
}

// events[i] is the event label of ids[i].
RankedList rank_row(const SimilarityMatrix& matrix, Eigen::Index query, const std::vector<std::string>& events) {
  RankedList ranked;
  ranked.query_id = matrix.ids[static_cast<std::size_t>(query)];
  const std::string& query_event = events[static_cast<std::size_t>(query)];
  ranked.entries.reserve(matrix.ids.size() - 1);
  for (Eigen::Index j = 0; j < matrix.scores.cols(); ++j) {
    if (j == query) continue;
    ranked.entries.push_back({matrix.ids[static_cast<std::size_t>(j)], matrix.scores(query, j),
                              events[static_cast<std::size_t>(j)] == query_event});
  }
  std::sort(ranked.entries.begin(), ranked.entries.end(), [](const RankedEntry& a, const RankedEntry& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.article_id < b.article_id;
  });
  return ranked;
}

std::vector<std::string> events_of(const SimilarityMatrix& matrix, const Corpus& corpus) {
  std::vector<std::string> events;
  events.reserve(matrix.ids.size());
  for (const std::string& id : matrix.ids) {
    const Article& article = corpus.at(id);
    if (article.language != matrix.language) {
      throw Error("article '" + id + "' is not in the " + std::string(to_string(matrix.language)) + " partition");
    }
    events.push_back(article.event);
  }
  return events;
}

std::string_view language_title(Language language) {
  return language == Language::en ? "English" : "German";
}

// Pads to terminal columns, so T̄ and V̄ align.
std::string pad_left(std::string_view text, std::size_t width) {
  const std::size_t length = utf8::display_width(text);
  return std::string(width > length ? width - length : 0, ' ') + std::string(text);
}

std::string pad_right(std::string_view text, std::size_t width) {
  const std::size_t length = utf8::display_width(text);
  return std::string(text) + std::string(width > length ? width - length : 0, ' ');
}

// Formats one table row of AP values, marking every cell equal to the row maximum.
std::vector<std::string> marked_cells(const std::vector<std::optional<double>>& values) {
  std::optional<long> best;
  for (const auto& v : values) {
    if (v && (!best || percent_cell(*v) > *best)) best = percent_cell(*v);
  }
  std::vector<std::string> cells;
  for (const auto& v : values) {
    if (!v) {
      cells.emplace_back("- ");
      continue;
    }
    cells.push_back(std::to_string(percent_cell(*v)) + (percent_cell(*v) == best ? "*" : " "));
  }
  return cells;
}

std::string render_event_table(const EvaluationReport& report) {
  constexpr std::size_t kCell = 6;
  std::ostringstream out;
  bool first_language = true;
  for (Language language : report.languages) {
    std::set<std::tuple<Domain, std::string>> rows;
    for (const EventScore& e : report.events) {
      if (e.language == language) rows.emplace(e.domain, e.event);
    }
    std::size_t event_width = 5;
    for (const auto& [domain, event] : rows) event_width = std::max(event_width, utf8::display_width(event));

    if (!first_language) out << '\n';
    first_language = false;
    out << language_title(language) << " (" << to_string(language)
        << "): average precision per event x100, * marks the row maximum\n";
    out << "run " << report.config_hash << " seed " << report.seed << '\n';
    out << pad_right("Domain", 12) << pad_right("Event", event_width);
    for (Configuration c : report.configurations) out << pad_left(column_header(c), kCell - 1) << ' ';
    out << '\n';

    std::optional<Domain> current;
    for (const auto& [domain, event] : rows) {
      out << pad_right(current == domain ? "" : to_string(domain), 12);
      current = domain;
      out << pad_right(event, event_width);
      std::vector<std::optional<double>> values;
      for (Configuration c : report.configurations) {
        const EventScore* score = report.find_event(language, c, event);
        values.push_back(score ? std::optional<double>(score->ap) : std::nullopt);
      }
      for (const std::string& cell : marked_cells(values)) out << pad_left(cell, kCell);
      out << '\n';
    }
  }
  return out.str();
}

std::string render_domain_table(const EvaluationReport& report) {
  constexpr std::size_t kCell = 6;
  constexpr std::array<Configuration, 3> kColumns{Configuration::textual, Configuration::visual,
                                                  Configuration::combined};
  std::ostringstream out;
  out << "Average precision per domain x100, * marks the maximum within each language\n";
  out << "run " << report.config_hash << " seed " << report.seed << '\n';
  out << pad_right("", 12);
  for (Language language : report.languages) {
    out << pad_right(std::string(" ") + std::string(language_title(language)), kCell * kColumns.size());
  }
  out << '\n' << pad_right("Domain", 12);
  for (std::size_t l = 0; l < report.languages.size(); ++l) {
    for (Configuration c : kColumns) {
      out << pad_left(c == Configuration::combined ? "T+V" : column_header(c), kCell - 1) << ' ';
    }
  }
  out << '\n';
  for (Domain domain : kDomains) {
    bool any = false;
    std::string line = pad_right(to_string(domain), 12);
    for (Language language : report.languages) {
      std::vector<std::optional<double>> values;
      for (Configuration c : kColumns) {
        const DomainScore* score = report.find_domain(language, c, domain);
        any = any || score != nullptr;
        values.push_back(score ? std::optional<double>(score->ap) : std::nullopt);
      }
      for (const std::string& cell : marked_cells(values)) line += pad_left(cell, kCell);
    }
    if (any) out << line << '\n';
  }
  return out.str();
}

std::string render_machine(const EvaluationReport& report) {
  std::string out;
  auto emit = [&out](const nlohmann::json& record) {
    out += record.dump();
    out += '\n';
  };
  nlohmann::json run{{"record", "run"},
                     {"seed", report.seed},
                     {"corpus_digest", report.corpus_digest},
                     {"config_hash", report.config_hash},
                     {"manifest", "manifest.json"},
                     {"fusion_mode", std::string(to_string(report.fusion_mode))},
                     {"domain_aggregation", std::string(to_string(report.aggregation))},
                     {"perturbation", report.perturbation},
                     {"languages", nlohmann::json::array()},
                     {"configurations", nlohmann::json::array()}};
  for (Language l : report.languages) run["languages"].push_back(std::string(to_string(l)));
  for (Configuration c : report.configurations) run["configurations"].push_back(std::string(to_string(c)));
  emit(run);
  for (const UnscorableQuery& u : report.unscorable) {
    emit({{"record", "unscorable"},
          {"language", std::string(to_string(u.language))},
          {"query_id", u.query_id},
          {"event", u.event}});
  }
  for (const QueryScore& q : report.queries) {
    emit({{"record", "query"},
          {"language", std::string(to_string(q.language))},
          {"configuration", std::string(to_string(q.configuration))},
          {"query_id", q.query_id},
          {"event", q.event},
          {"domain", std::string(to_string(q.domain))},
          {"ap", q.ap},
          {"n_relevant", q.n_relevant}});
  }
  for (const EventScore& e : report.events) {
    emit({{"record", "event"},
          {"language", std::string(to_string(e.language))},
          {"configuration", std::string(to_string(e.configuration))},
          {"domain", std::string(to_string(e.domain))},
          {"event", e.event},
          {"ap", e.ap},
          {"n_queries", e.n_queries}});
  }
  for (const DomainScore& d : report.domains) {
    emit({{"record", "domain"},
          {"language", std::string(to_string(d.language))},
          {"configuration", std::string(to_string(d.configuration))},
          {"domain", std::string(to_string(d.domain))},
          {"ap", d.ap},
          {"n_events", d.n_events},
          {"n_queries", d.n_queries}});
  }
  return out;
}

}  // namespace

std::size_t RankedList::n_relevant() const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [](const RankedEntry& e) { return e.relevant; }));
}

RankedList rank_for_query(const SimilarityMatrix& matrix, std::string_view query_id, const Corpus& corpus) {
  const Eigen::Index query = index_of(matrix.ids, query_id);
  return rank_row(matrix, query, events_of(matrix, corpus));
}

std::size_t APResult::hits_at(std::size_t n) const {
  return static_cast<std::size_t>(std::upper_bound(relevant_ranks.begin(), relevant_ranks.end(), n) -
                                  relevant_ranks.begin());
}

double APResult::precision_at(std::size_t n) const {
  return n == 0 ? 0.0 : static_cast<double>(hits_at(n)) / static_cast<double>(n);
}

double APResult::recall_at(std::size_t n) const {
  return n_relevant == 0 ? 0.0 : static_cast<double>(hits_at(n)) / static_cast<double>(n_relevant);
}

APResult average_precision(const RankedList& ranked) {
  APResult result;
  result.query_id = ranked.query_id;
  result.list_length = ranked.entries.size();
  double sum = 0.0;
  for (std::size_t k = 0; k < ranked.entries.size(); ++k) {
    if (!ranked.entries[k].relevant) continue;
    result.relevant_ranks.push_back(k + 1);
    sum += static_cast<double>(result.relevant_ranks.size()) / static_cast<double>(k + 1);
  }
  result.n_relevant = result.relevant_ranks.size();
  if (result.n_relevant == 0) throw Error("query '" + ranked.query_id + "' is unscorable: no relevant article");
  result.ap = sum / static_cast<double>(result.n_relevant);
  return result;
}

const EventScore* EvaluationReport::find_event(Language language, Configuration configuration,
                                               std::string_view event) const {
  for (const EventScore& e : events) {
    if (e.language == language && e.configuration == configuration && e.event == event) return &e;
  }
  return nullptr;
}

const DomainScore* EvaluationReport::find_domain(Language language, Configuration configuration,
                                                 Domain domain) const {
  for (const DomainScore& d : domains) {
    if (d.language == language && d.configuration == configuration && d.domain == domain) return &d;
  }
  return nullptr;
}

EvaluationReport evaluate(const Corpus& corpus, std::span<const LanguageMatrices> matrices,
                          std::span<const Configuration> configurations, DomainAggregation aggregation) {
  if (configurations.empty()) throw Error("evaluate: no configurations requested");
  EvaluationReport report;
  report.aggregation = aggregation;
  report.configurations.assign(configurations.begin(), configurations.end());

  for (const LanguageMatrices& lm : matrices) {
    report.languages.push_back(lm.language);
    const auto partition = corpus.partition(lm.language);
    bool unscorable_recorded = false;
    for (Configuration configuration : configurations) {
      auto it = lm.by_configuration.find(configuration);
      if (it == lm.by_configuration.end()) {
        throw Error("configuration " + std::string(to_string(configuration)) + " is missing its similarity matrix for " +
                    std::string(to_string(lm.language)));
      }
      const SimilarityMatrix& matrix = it->second;
      if (!std::equal(partition.begin(), partition.end(), matrix.ids.begin(), matrix.ids.end())) {
        throw Error("similarity matrix for " + std::string(to_string(configuration)) + "/" +
                    std::string(to_string(lm.language)) + " is not aligned with the corpus partition");
      }
      const std::vector<std::string> events = events_of(matrix, corpus);

      // (domain, event) -> member query APs, ordered for a deterministic reduction.
      std::map<std::tuple<Domain, std::string>, std::vector<double>> by_event;
      for (Eigen::Index q = 0; q < static_cast<Eigen::Index>(matrix.ids.size()); ++q) {
        const RankedList ranked = rank_row(matrix, q, events);
        const std::string& event = events[static_cast<std::size_t>(q)];
        if (!ranked.scorable()) {
          if (!unscorable_recorded) report.unscorable.push_back({lm.language, ranked.query_id, event});
          continue;
        }
        const APResult ap = average_precision(ranked);
        const Domain domain = corpus.domain_of(event);
        report.queries.push_back({lm.language, configuration, ranked.query_id, event, domain, ap.ap, ap.n_relevant});
        by_event[{domain, event}].push_back(ap.ap);
      }
      unscorable_recorded = true;

      std::map<Domain, std::vector<double>> event_means;
      std::map<Domain, std::vector<double>> pooled;
      for (const auto& [key, aps] : by_event) {
        const auto& [domain, event] = key;
        const double mean = std::accumulate(aps.begin(), aps.end(), 0.0) / static_cast<double>(aps.size());
        report.events.push_back({lm.language, configuration, domain, event, mean, aps.size()});
        event_means[domain].push_back(mean);
        pooled[domain].insert(pooled[domain].end(), aps.begin(), aps.end());
      }
      for (const auto& [domain, means] : event_means) {
        const auto& values = aggregation == DomainAggregation::event_mean ? means : pooled[domain];
        const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
        report.domains.push_back({lm.language, configuration, domain, mean, means.size(), pooled[domain].size()});
      }
    }
  }
  return report;
}

ReportStyle parse_report_style(std::string_view text) {
  if (text == "event-table") return ReportStyle::event_table;
  if (text == "domain-table") return ReportStyle::domain_table;
  if (text == "machine") return ReportStyle::machine;
  throw Error("unknown report style '" + std::string(text) + "' (expected event-table, domain-table or machine)");
}

long percent_cell(double ap) { return std::lround(ap * 100.0); }

std::string render_report(const EvaluationReport& report, ReportStyle style) {
  switch (style) {
    case ReportStyle::event_table: return render_event_table(report);
    case ReportStyle::domain_table: return render_domain_table(report);
    case ReportStyle::machine: return render_machine(report);
  }
  return {};
}

EvaluationReport parse_report(std::istream& in, std::string_view source) {
  EvaluationReport report;
  bool have_run = false;
  jsonl::for_each_record(in, source, [&](std::size_t line, const nlohmann::json& r) {
    const std::string where = jsonl::location(source, line);
    const std::string kind = jsonl::require_string(r, "record", where);
    try {
      if (kind == "run") {
        report.seed = r.at("seed").get<std::uint64_t>();
        report.corpus_digest = r.at("corpus_digest").get<std::string>();
        report.config_hash = r.at("config_hash").get<std::string>();
        report.fusion_mode = parse_fusion_mode(r.at("fusion_mode").get<std::string>());
        report.aggregation = parse_domain_aggregation(r.at("domain_aggregation").get<std::string>());
        report.perturbation = r.at("perturbation").get<bool>();
        for (const auto& l : r.at("languages")) report.languages.push_back(parse_language(l.get<std::string>()));
        for (const auto& c : r.at("configurations")) {
          report.configurations.push_back(parse_configuration(c.get<std::string>()));
        }
        have_run = true;
      } else if (kind == "unscorable") {
        report.unscorable.push_back({parse_language(r.at("language").get<std::string>()),
                                     r.at("query_id").get<std::string>(), r.at("event").get<std::string>()});
      } else if (kind == "query") {
        report.queries.push_back({parse_language(r.at("language").get<std::string>()),
                                  parse_configuration(r.at("configuration").get<std::string>()),
                                  r.at("query_id").get<std::string>(), r.at("event").get<std::string>(),
                                  parse_domain(r.at("domain").get<std::string>()), r.at("ap").get<double>(),
                                  r.at("n_relevant").get<std::size_t>()});
      } else if (kind == "event") {
        report.events.push_back({parse_language(r.at("language").get<std::string>()),
                                 parse_configuration(r.at("configuration").get<std::string>()),
                                 parse_domain(r.at("domain").get<std::string>()), r.at("event").get<std::string>(),
                                 r.at("ap").get<double>(), r.at("n_queries").get<std::size_t>()});
      } else if (kind == "domain") {
        report.domains.push_back({parse_language(r.at("language").get<std::string>()),
                                  parse_configuration(r.at("configuration").get<std::string>()),
                                  parse_domain(r.at("domain").get<std::string>()), r.at("ap").get<double>(),
                                  r.at("n_events").get<std::size_t>(), r.at("n_queries").get<std::size_t>()});
      } else {
        throw Error("unknown record kind '" + kind + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(where + ": malformed report record: " + e.what());
    } catch (const Error& e) {
      throw Error(where + ": " + e.what());
    }
  });
  if (!have_run) throw Error(std::string(source) + ": missing run record");
  return report;
}

}  // namespace newsfuse
