#include "newsfuse/similarity.hpp"

#include <algorithm>
#include <iostream>
#include <numeric>

#include "newsfuse/jsonl.hpp"

namespace newsfuse {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view data, std::uint64_t hash = 0xCBF29CE484222325ull) {
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 0x100000001B3ull;
  }
  return hash;
}

}  // namespace

std::string SimilarityMatrix::feature_key() const {
  std::string key;
  for (FeatureTag tag : features) {
    if (!key.empty()) key += '+';
    key += to_string(tag);
  }
  return key;
}

SimilarityMatrix similarity_matrix(const FeatureMatrix& features) {
  SimilarityMatrix out;
  out.features = {features.tag};
  out.language = features.language;
  out.ids = features.row_ids;
  out.scores = cosine_matrix(features.rows);
  return out;
}

double perturbation_value(PerturbationSeed seed, std::string_view id_a, std::string_view id_b) {
  if (id_b < id_a) std::swap(id_a, id_b);
  // 0xFF never occurs in UTF-8, so it separates the two ids unambiguously.
  const std::uint64_t key = fnv1a(id_b, fnv1a("\xFF", fnv1a(id_a)));
  const std::uint64_t bits = splitmix64(seed.value ^ splitmix64(key));
  // Midpoint of one of 2^53 equal cells of (0, 1): never 0, never 1.
  const double unit = (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
  return unit * kPerturbationCeiling;
}

SimilarityMatrix perturb_zero_rows(const SimilarityMatrix& matrix, PerturbationSeed seed, PerturbationStats* stats) {
  SimilarityMatrix out = matrix;
  PerturbationStats local;
  const Eigen::Index n = out.scores.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double score = out.scores(i, j);
      if (score == 0.0) {
        const double value = perturbation_value(seed, out.ids[static_cast<std::size_t>(i)],
                                                out.ids[static_cast<std::size_t>(j)]);
        out.scores(i, j) = value;
        out.scores(j, i) = value;
        ++local.injected;
        local.max_injected = std::max(local.max_injected, value);
      } else if (score > 0.0 && (!local.min_nonzero || score < *local.min_nonzero)) {
        local.min_nonzero = score;
      }
    }
  }
  if (!local.order_preserved()) {
    std::clog << "warning: perturbation of " << matrix.feature_key() << "/" << to_string(matrix.language)
              << " injected " << local.max_injected << ", not below the smallest nonzero score "
              << *local.min_nonzero << "\n";
  }
  if (stats != nullptr) *stats = local;
  return out;
}

SimilarityMatrix fuse(std::span<const SimilarityMatrix> matrices) {
  if (matrices.empty()) throw Error("fuse: no similarity matrices");
  const SimilarityMatrix& first = matrices.front();
  for (const SimilarityMatrix& m : matrices) {
    if (m.language != first.language) throw Error("fuse: matrices from different languages");
    if (m.ids != first.ids) throw Error("fuse: id order mismatch between " + first.feature_key() + " and " + m.feature_key());
    if (m.scores.rows() != first.scores.rows() || m.scores.cols() != first.scores.cols()) {
      throw Error("fuse: score shape mismatch");
    }
  }

  std::vector<std::size_t> order(matrices.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<std::string> keys;
  keys.reserve(matrices.size());
  for (const SimilarityMatrix& m : matrices) keys.push_back(m.feature_key());
  std::stable_sort(order.begin(), order.end(), [&keys](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });

  SimilarityMatrix out;
  out.language = first.language;
  out.ids = first.ids;
  out.scores = matrices[order.front()].scores;
  for (std::size_t k = 1; k < order.size(); ++k) out.scores += matrices[order[k]].scores;
  if (matrices.size() > 1) out.scores /= static_cast<double>(matrices.size());

  for (const SimilarityMatrix& m : matrices) out.features.insert(out.features.end(), m.features.begin(), m.features.end());
  std::sort(out.features.begin(), out.features.end());
  out.features.erase(std::unique(out.features.begin(), out.features.end()), out.features.end());
  return out;
}

std::string serialize_similarity_matrix(const SimilarityMatrix& matrix, std::string_view label,
                                        std::string_view config_hash) {
  nlohmann::json header{{"feature", std::string(label)},
                        {"features", matrix.feature_key()},
                        {"language", std::string(to_string(matrix.language))},
                        {"dim", matrix.scores.cols()},
                        {"count", matrix.scores.rows()}};
  if (!config_hash.empty()) header["config_hash"] = std::string(config_hash);
  std::string out = header.dump();
  out += '\n';
  for (Eigen::Index i = 0; i < matrix.scores.rows(); ++i) {
    out += "{\"article_id\":";
    out += nlohmann::json(matrix.ids[static_cast<std::size_t>(i)]).dump();
    out += ",\"vector\":[";
    for (Eigen::Index j = 0; j < matrix.scores.cols(); ++j) {
      if (j != 0) out += ',';
      out += jsonl::format_double(matrix.scores(i, j));
    }
    out += "]}\n";
  }
  return out;
}

}  // namespace newsfuse
