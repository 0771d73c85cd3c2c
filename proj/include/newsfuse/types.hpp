#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace newsfuse {

// Dense storage is row-major: one row per article.
template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXr = RowMatrix<double>;
using VectorXr = Vector<double>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Language { en, de };
enum class Domain { politics, environment, finance, health, sport };

// Raw per-article descriptors.
enum class FeatureTag { objects, places, geolocation, text_embedding, entity };

// Evaluated retrieval configurations, in table column order:
// B, E, T̄, O, P, L, V̄, T+V.
enum class Configuration { bert, entity, textual, objects, places, geolocation, visual, combined };

enum class FusionMode { mean_of_five, mean_of_groups };
enum class DomainAggregation { event_mean, query_pooled };

inline constexpr std::array<Language, 2> kLanguages{Language::en, Language::de};
inline constexpr std::array<Domain, 5> kDomains{Domain::politics, Domain::environment, Domain::finance,
                                                Domain::health, Domain::sport};
inline constexpr std::array<FeatureTag, 5> kFeatureTags{FeatureTag::objects, FeatureTag::places,
                                                        FeatureTag::geolocation, FeatureTag::text_embedding,
                                                        FeatureTag::entity};
// Features that arrive as files from the extractor.
inline constexpr std::array<FeatureTag, 4> kDenseFeatureTags{FeatureTag::objects, FeatureTag::places,
                                                             FeatureTag::geolocation, FeatureTag::text_embedding};
inline constexpr std::array<Configuration, 8> kConfigurations{
    Configuration::bert,    Configuration::entity,      Configuration::textual, Configuration::objects,
    Configuration::places,  Configuration::geolocation, Configuration::visual,  Configuration::combined};

std::string_view to_string(Language language);
std::string_view to_string(Domain domain);
std::string_view to_string(FeatureTag tag);
std::string_view to_string(FusionMode mode);
std::string_view to_string(DomainAggregation aggregation);

// Machine name used in files and flags: B, E, Tbar, O, P, L, Vbar, T+V.
std::string_view to_string(Configuration configuration);
// Table header: B, E, T̄, O, P, L, V̄, Mean.
std::string_view column_header(Configuration configuration);

Language parse_language(std::string_view text);
Domain parse_domain(std::string_view text);
FeatureTag parse_feature_tag(std::string_view text);
FusionMode parse_fusion_mode(std::string_view text);
DomainAggregation parse_domain_aggregation(std::string_view text);
// Accepts machine names plus the aliases T̄/V̄/TV/Mean and lowercase forms.
Configuration parse_configuration(std::string_view text);

// objects/places/geolocation -> 2048, text_embedding -> 768, entity -> vocabulary size.
std::size_t expected_dim(FeatureTag tag, std::size_t entity_vocabulary_size = 0);

}  // namespace newsfuse
