#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "newsfuse/corpus.hpp"
#include "newsfuse/types.hpp"

namespace newsfuse {

inline constexpr std::size_t kWindowChars = 1500;

// Corpus-wide stack of one descriptor: row i belongs to row_ids[i], and row_ids is
// exactly the language partition of the corpus.
struct FeatureMatrix {
  FeatureTag tag = FeatureTag::objects;
  Language language = Language::en;
  std::vector<std::string> row_ids;
  MatrixXr rows;

  Eigen::Index dim() const { return rows.cols(); }
};

// Checks row count, dimension, finiteness and alignment with the corpus partition.
void check_feature_matrix(const FeatureMatrix& matrix, const Corpus& corpus, std::size_t expected_dim);

struct WindowSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - start; }
  bool operator==(const WindowSpan&) const = default;
};

// Contiguous non-overlapping windows of window_chars code points; the last one may be
// shorter. Throws on empty text.
std::vector<WindowSpan> segment_text(std::string_view text, std::size_t window_chars = kWindowChars);

// Componentwise mean of the rows of a non-empty matrix.
template <typename Derived>
Vector<typename Derived::Scalar> mean_pool_rows(const Eigen::MatrixBase<Derived>& rows) {
  using Scalar = typename Derived::Scalar;
  if (rows.rows() == 0) throw Error("mean_pool: no vectors");
  if (!rows.allFinite()) throw Error("mean_pool: non-finite component");
  return (rows.colwise().sum() / Scalar(rows.rows())).transpose();
}

template <typename Scalar>
Vector<Scalar> mean_pool(std::span<const Vector<Scalar>> vectors) {
  if (vectors.empty()) throw Error("mean_pool: no vectors");
  const Eigen::Index dim = vectors.front().size();
  RowMatrix<Scalar> stacked(static_cast<Eigen::Index>(vectors.size()), dim);
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].size() != dim) {
      throw Error("mean_pool: dimension mismatch (" + std::to_string(vectors[i].size()) + " vs " +
                  std::to_string(dim) + ")");
    }
    stacked.row(static_cast<Eigen::Index>(i)) = vectors[i].transpose();
  }
  return mean_pool_rows(stacked);
}

// Whole-article text vector: the unweighted mean of the per-window pooled vectors.
template <typename Scalar>
Vector<Scalar> article_text_vector(std::span<const Vector<Scalar>> window_vectors) {
  return mean_pool(window_vectors);
}

// Feature file layout: the first line is the manifest record
//   {"feature": <tag>, "language": <lang>, "dim": <n>, "count": <rows>}
// followed by one {"article_id": <id>, "vector": [...]} line per row. Floats use the
// shortest round-trip decimal form.
std::filesystem::path feature_path(const std::filesystem::path& features_dir, Language language, FeatureTag tag);
std::filesystem::path manifest_path(const std::filesystem::path& features_dir, Language language);

std::string serialize_feature_matrix(const FeatureMatrix& matrix);
void write_feature_matrix(const std::filesystem::path& path, const FeatureMatrix& matrix);

// Rows come back in corpus partition order whatever the file order was.
FeatureMatrix parse_feature_matrix(std::istream& in, std::string_view source, FeatureTag tag, Language language,
                                   const Corpus& corpus, std::size_t expected_dim);
FeatureMatrix load_feature_matrix(const std::filesystem::path& path, FeatureTag tag, Language language,
                                  const Corpus& corpus);
FeatureMatrix load_feature_matrix(const std::filesystem::path& path, FeatureTag tag, Language language,
                                  const Corpus& corpus, std::size_t expected_dim);

// Per-directory manifest.json listing each feature file with its dim and row count.
struct FeatureManifestEntry {
  FeatureTag tag = FeatureTag::objects;
  std::size_t dim = 0;
  std::size_t count = 0;
  std::string file;
};

struct FeatureManifest {
  Language language = Language::en;
  std::vector<FeatureManifestEntry> entries;

  const FeatureManifestEntry* find(FeatureTag tag) const;
};

FeatureManifest load_feature_manifest(const std::filesystem::path& path);
void write_feature_manifest(const std::filesystem::path& path, const FeatureManifest& manifest);

// Writes <features_dir>/<lang>/<tag>.jsonl for each matrix plus the manifest.
void write_feature_directory(const std::filesystem::path& features_dir, Language language,
                             std::span<const FeatureMatrix> matrices);

}  // namespace newsfuse
