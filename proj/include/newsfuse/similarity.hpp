#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "newsfuse/features.hpp"
#include "newsfuse/types.hpp"

namespace newsfuse {

// Pairwise scores over one language partition. The diagonal is held at zero and is
// never ranked.
struct SimilarityMatrix {
  std::vector<FeatureTag> features;  // sorted, distinct
  Language language = Language::en;
  std::vector<std::string> ids;
  MatrixXr scores;

  // Feature names joined with '+', e.g. "entity+text_embedding".
  std::string feature_key() const;
};

template <typename DerivedU, typename DerivedV>
typename DerivedU::Scalar cosine(const Eigen::MatrixBase<DerivedU>& u, const Eigen::MatrixBase<DerivedV>& v) {
  using Scalar = typename DerivedU::Scalar;
  if (u.size() != v.size()) {
    throw Error("cosine: dimension mismatch (" + std::to_string(u.size()) + " vs " + std::to_string(v.size()) + ")");
  }
  if (!u.allFinite() || !v.allFinite()) throw Error("cosine: non-finite input");
  const Scalar nu = u.norm();
  const Scalar nv = v.norm();
  if (nu == Scalar(0) || nv == Scalar(0)) return Scalar(0);
  return u.dot(v) / (nu * nv);
}

// Cosine between every pair of rows, diagonal zeroed. Rows with zero norm score 0
// against everything. The result is exactly symmetric.
template <typename Derived>
RowMatrix<typename Derived::Scalar> cosine_matrix(const Eigen::MatrixBase<Derived>& rows) {
  using Scalar = typename Derived::Scalar;
  if (!rows.allFinite()) throw Error("cosine: non-finite input");
  RowMatrix<Scalar> unit = rows;
  for (Eigen::Index i = 0; i < unit.rows(); ++i) {
    const Scalar norm = unit.row(i).norm();
    if (norm > Scalar(0)) unit.row(i) /= norm;
  }
  const Eigen::Index n = unit.rows();
  RowMatrix<Scalar> lower = RowMatrix<Scalar>::Zero(n, n);
  lower.template selfadjointView<Eigen::Lower>().rankUpdate(unit);
  RowMatrix<Scalar> scores = lower.template selfadjointView<Eigen::Lower>();
  scores = scores.cwiseMax(Scalar(-1)).cwiseMin(Scalar(1));
  scores.diagonal().setZero();
  return scores;
}

SimilarityMatrix similarity_matrix(const FeatureMatrix& features);

struct PerturbationSeed {
  std::uint64_t value = 0;
};

// Injected values lie in the open interval (0, kPerturbationCeiling).
inline constexpr double kPerturbationCeiling = 1e-6;

// Deterministic draw keyed by the seed and the unordered id pair.
double perturbation_value(PerturbationSeed seed, std::string_view id_a, std::string_view id_b);

struct PerturbationStats {
  std::size_t injected = 0;
  double max_injected = 0.0;
  std::optional<double> min_nonzero;  // smallest positive score left untouched

  // True when every injected value stays below every untouched positive score.
  bool order_preserved() const { return !min_nonzero || injected == 0 || max_injected < *min_nonzero; }
};

// Replaces every exactly-zero off-diagonal score with perturbation_value(...).
// Nonzero scores are left as they are. Logs a warning if an injected value would
// reach the smallest positive score.
SimilarityMatrix perturb_zero_rows(const SimilarityMatrix& matrix, PerturbationSeed seed,
                                   PerturbationStats* stats = nullptr);

// Entrywise mean over matrices sharing language and id order; features are the union.
// Inputs are summed in feature_key order, so argument order never changes the bits.
SimilarityMatrix fuse(std::span<const SimilarityMatrix> matrices);

// Dump in the feature-file layout, one row per query id; label names the configuration.
std::string serialize_similarity_matrix(const SimilarityMatrix& matrix, std::string_view label,
                                        std::string_view config_hash = {});

}  // namespace newsfuse
