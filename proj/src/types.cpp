#include "newsfuse/types.hpp"

#include <algorithm>
#include <cctype>

namespace newsfuse {

namespace {

template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view text, const std::array<Enum, N>& values, std::string_view what) {
  for (Enum value : values) {
    if (to_string(value) == text) return value;
  }
  throw Error("unknown " + std::string(what) + " value '" + std::string(text) + "'");
}

}  // namespace

std::string_view to_string(Language language) {
  switch (language) {
    case Language::en: return "en";
    case Language::de: return "de";
  }
  return "?";
}

std::string_view to_string(Domain domain) {
  switch (domain) {
    case Domain::politics: return "politics";
    case Domain::environment: return "environment";
    case Domain::finance: return "finance";
    case Domain::health: return "health";
    case Domain::sport: return "sport";
  }
  return "?";
}

std::string_view to_string(FeatureTag tag) {
  switch (tag) {
    case FeatureTag::objects: return "objects";
    case FeatureTag::places: return "places";
    case FeatureTag::geolocation: return "geolocation";
    case FeatureTag::text_embedding: return "text_embedding";
    case FeatureTag::entity: return "entity";
  }
  return "?";
}

std::string_view to_string(FusionMode mode) {
  return mode == FusionMode::mean_of_five ? "mean-of-five" : "mean-of-groups";
}

std::string_view to_string(DomainAggregation aggregation) {
  return aggregation == DomainAggregation::event_mean ? "event-mean" : "query-pooled";
}

std::string_view to_string(Configuration configuration) {
  switch (configuration) {
    case Configuration::bert: return "B";
    case Configuration::entity: return "E";
    case Configuration::textual: return "Tbar";
    case Configuration::objects: return "O";
    case Configuration::places: return "P";
    case Configuration::geolocation: return "L";
    case Configuration::visual: return "Vbar";
    case Configuration::combined: return "T+V";
  }
  return "?";
}

std::string_view column_header(Configuration configuration) {
  switch (configuration) {
    case Configuration::textual: return "T̄";
    case Configuration::visual: return "V̄";
    case Configuration::combined: return "Mean";
    default: return to_string(configuration);
  }
}

Language parse_language(std::string_view text) { return parse_enum(text, kLanguages, "language"); }
Domain parse_domain(std::string_view text) { return parse_enum(text, kDomains, "domain"); }
FeatureTag parse_feature_tag(std::string_view text) { return parse_enum(text, kFeatureTags, "feature"); }

FusionMode parse_fusion_mode(std::string_view text) {
  constexpr std::array modes{FusionMode::mean_of_five, FusionMode::mean_of_groups};
  return parse_enum(text, modes, "fusion mode");
}

DomainAggregation parse_domain_aggregation(std::string_view text) {
  constexpr std::array modes{DomainAggregation::event_mean, DomainAggregation::query_pooled};
  return parse_enum(text, modes, "domain aggregation");
}

Configuration parse_configuration(std::string_view text) {
  if (text == "T̄") return Configuration::textual;
  if (text == "V̄") return Configuration::visual;
  std::string upper(text);
  std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
  if (upper == "TBAR" || upper == "T") return Configuration::textual;
  if (upper == "VBAR" || upper == "V") return Configuration::visual;
  if (upper == "TV" || upper == "T+V" || upper == "MEAN") return Configuration::combined;
  for (Configuration c : kConfigurations) {
    if (to_string(c) == upper) return c;
  }
  throw Error("unknown configuration '" + std::string(text) + "'");
}

std::size_t expected_dim(FeatureTag tag, std::size_t entity_vocabulary_size) {
  switch (tag) {
    case FeatureTag::objects:
    case FeatureTag::places:
    case FeatureTag::geolocation: return 2048;
    case FeatureTag::text_embedding: return 768;
    case FeatureTag::entity: return entity_vocabulary_size;
  }
  return 0;
}

}  // namespace newsfuse
