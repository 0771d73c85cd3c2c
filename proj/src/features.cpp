#include "newsfuse/features.hpp"

#include <fstream>
#include <map>

#include "newsfuse/jsonl.hpp"
#include "newsfuse/utf8.hpp"

namespace newsfuse {

namespace fs = std::filesystem;

void check_feature_matrix(const FeatureMatrix& matrix, const Corpus& corpus, std::size_t expected) {
  const std::string what = std::string(to_string(matrix.tag)) + "/" + std::string(to_string(matrix.language));
  if (static_cast<std::size_t>(matrix.rows.rows()) != matrix.row_ids.size()) {
    throw Error(what + ": row count " + std::to_string(matrix.rows.rows()) + " does not match " +
                std::to_string(matrix.row_ids.size()) + " row ids");
  }
  if (static_cast<std::size_t>(matrix.rows.cols()) != expected) {
    throw Error(what + ": dimension " + std::to_string(matrix.rows.cols()) + " does not match expected " +
                std::to_string(expected));
  }
  const auto partition = corpus.partition(matrix.language);
  if (!std::equal(partition.begin(), partition.end(), matrix.row_ids.begin(), matrix.row_ids.end())) {
    throw Error(what + ": row ids do not match the corpus partition");
  }
  if (!matrix.rows.allFinite()) throw Error(what + ": non-finite component");
}

std::vector<WindowSpan> segment_text(std::string_view text, std::size_t window_chars) {
  if (window_chars == 0) throw Error("segment_text: window size must be positive");
  const std::size_t length = utf8::length(text);
  if (length == 0) throw Error("segment_text: empty text has no windows");
  std::vector<WindowSpan> spans;
  spans.reserve((length + window_chars - 1) / window_chars);
  for (std::size_t start = 0; start < length; start += window_chars) {
    spans.push_back({start, std::min(start + window_chars, length)});
  }
  return spans;
}

fs::path feature_path(const fs::path& features_dir, Language language, FeatureTag tag) {
  return features_dir / std::string(to_string(language)) / (std::string(to_string(tag)) + ".jsonl");
}

fs::path manifest_path(const fs::path& features_dir, Language language) {
  return features_dir / std::string(to_string(language)) / "manifest.json";
}

std::string serialize_feature_matrix(const FeatureMatrix& matrix) {
  nlohmann::json header{{"feature", std::string(to_string(matrix.tag))},
                        {"language", std::string(to_string(matrix.language))},
                        {"dim", matrix.rows.cols()},
                        {"count", matrix.rows.rows()}};
  std::string out = header.dump();
  out += '\n';
  for (Eigen::Index i = 0; i < matrix.rows.rows(); ++i) {
    out += "{\"article_id\":";
    out += nlohmann::json(matrix.row_ids[static_cast<std::size_t>(i)]).dump();
    out += ",\"vector\":[";
    for (Eigen::Index j = 0; j < matrix.rows.cols(); ++j) {
      if (j != 0) out += ',';
      out += jsonl::format_double(matrix.rows(i, j));
    }
    out += "]}\n";
  }
  return out;
}

void write_feature_matrix(const fs::path& path, const FeatureMatrix& matrix) {
  jsonl::write_file_atomic(path, serialize_feature_matrix(matrix));
}

FeatureMatrix parse_feature_matrix(std::istream& in, std::string_view source, FeatureTag tag, Language language,
                                   const Corpus& corpus, std::size_t expected) {
  const auto partition = corpus.partition(language);
  std::map<std::string_view, Eigen::Index> row_of;
  for (std::size_t i = 0; i < partition.size(); ++i) row_of.emplace(partition[i], static_cast<Eigen::Index>(i));

  FeatureMatrix matrix;
  matrix.tag = tag;
  matrix.language = language;
  matrix.row_ids.assign(partition.begin(), partition.end());
  matrix.rows = MatrixXr::Zero(static_cast<Eigen::Index>(partition.size()), static_cast<Eigen::Index>(expected));
  std::vector<bool> filled(partition.size(), false);

  bool have_header = false;
  std::size_t declared_count = 0;
  jsonl::for_each_record(in, source, [&](std::size_t line, const nlohmann::json& record) {
    const std::string where = jsonl::location(source, line);
    if (!have_header) {
      const std::string feature = jsonl::require_string(record, "feature", where);
      const std::string lang = jsonl::require_string(record, "language", where);
      const std::size_t dim = jsonl::require_index(record, "dim", where);
      declared_count = jsonl::require_index(record, "count", where);
      if (feature != to_string(tag)) {
        throw Error(where + ": file holds feature '" + feature + "', expected '" + std::string(to_string(tag)) + "'");
      }
      if (lang != to_string(language)) {
        throw Error(where + ": file holds language '" + lang + "', expected '" + std::string(to_string(language)) +
                    "'");
      }
      if (dim != expected) {
        throw Error(where + ": dimension mismatch: manifest dim " + std::to_string(dim) + ", expected " +
                    std::to_string(expected));
      }
      have_header = true;
      return;
    }
    const std::string id = jsonl::require_string(record, "article_id", where);
    auto row = row_of.find(id);
    if (row == row_of.end()) {
      throw Error(where + ": unknown article id '" + id + "' for language " + std::string(to_string(language)));
    }
    if (filled[static_cast<std::size_t>(row->second)]) throw Error(where + ": duplicate vector for article '" + id + "'");
    auto vec = record.find("vector");
    if (vec == record.end() || !vec->is_array()) throw Error(where + ": malformed record: 'vector' must be an array");
    if (vec->size() != expected) {
      throw Error(where + ": dimension mismatch for article '" + id + "': " + std::to_string(vec->size()) +
                  " components, expected " + std::to_string(expected));
    }
    Eigen::Index j = 0;
    for (const auto& component : *vec) {
      if (!component.is_number()) {
        throw Error(where + ": non-finite or non-numeric component " + std::to_string(j) + " for article '" + id + "'");
      }
      const double value = component.get<double>();
      if (!std::isfinite(value)) throw Error(where + ": non-finite component for article '" + id + "'");
      matrix.rows(row->second, j++) = value;
    }
    filled[static_cast<std::size_t>(row->second)] = true;
  });
  if (!have_header) throw Error(std::string(source) + ": missing manifest record");
  for (std::size_t i = 0; i < filled.size(); ++i) {
    if (!filled[i]) throw Error(std::string(source) + ": article '" + partition[i] + "' has no vector");
  }
  if (declared_count != partition.size()) {
    throw Error(std::string(source) + ": manifest count " + std::to_string(declared_count) + " does not match " +
                std::to_string(partition.size()) + " rows");
  }
  return matrix;
}

FeatureMatrix load_feature_matrix(const fs::path& path, FeatureTag tag, Language language, const Corpus& corpus,
                                  std::size_t expected) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open feature file '" + path.string() + "'");
  return parse_feature_matrix(in, path.string(), tag, language, corpus, expected);
}

FeatureMatrix load_feature_matrix(const fs::path& path, FeatureTag tag, Language language, const Corpus& corpus) {
  if (tag == FeatureTag::entity) throw Error("entity feature files need an explicit vocabulary dimension");
  return load_feature_matrix(path, tag, language, corpus, expected_dim(tag));
}

const FeatureManifestEntry* FeatureManifest::find(FeatureTag tag) const {
  for (const auto& entry : entries) {
    if (entry.tag == tag) return &entry;
  }
  return nullptr;
}

FeatureManifest load_feature_manifest(const fs::path& path) {
  const std::string where = path.string();
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(jsonl::read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(where + ": malformed manifest: " + e.what());
  }
  FeatureManifest manifest;
  try {
    manifest.language = parse_language(jsonl::require_string(doc, "language", where));
    auto features = doc.find("features");
    if (features == doc.end() || !features->is_array()) throw Error(where + ": 'features' must be an array");
    for (const auto& item : *features) {
      FeatureManifestEntry entry;
      entry.tag = parse_feature_tag(jsonl::require_string(item, "feature", where));
      entry.dim = jsonl::require_index(item, "dim", where);
      entry.count = jsonl::require_index(item, "count", where);
      entry.file = jsonl::require_string(item, "file", where);
      manifest.entries.push_back(std::move(entry));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(where + ": malformed manifest: " + e.what());
  }
  return manifest;
}

void write_feature_manifest(const fs::path& path, const FeatureManifest& manifest) {
  nlohmann::json doc{{"language", std::string(to_string(manifest.language))}, {"features", nlohmann::json::array()}};
  for (const auto& entry : manifest.entries) {
    doc["features"].push_back({{"feature", std::string(to_string(entry.tag))},
                               {"dim", entry.dim},
                               {"count", entry.count},
                               {"file", entry.file}});
  }
  jsonl::write_file_atomic(path, doc.dump(2) + "\n");
}

void write_feature_directory(const fs::path& features_dir, Language language, std::span<const FeatureMatrix> matrices) {
  FeatureManifest manifest{language, {}};
  for (const FeatureMatrix& matrix : matrices) {
    if (matrix.language != language) throw Error("feature matrix language does not match directory language");
    const fs::path path = feature_path(features_dir, language, matrix.tag);
    write_feature_matrix(path, matrix);
    manifest.entries.push_back({matrix.tag, static_cast<std::size_t>(matrix.rows.cols()),
                                static_cast<std::size_t>(matrix.rows.rows()), path.filename().string()});
  }
  write_feature_manifest(manifest_path(features_dir, language), manifest);
}

}  // namespace newsfuse
