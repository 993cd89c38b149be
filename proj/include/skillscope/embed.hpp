#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "skillscope/lexicon.hpp"

namespace skillscope::embed {

struct TrainingParams {
  int dim = 100;
  int window = 5;
  int epochs = 5;
  int negative = 5;
  int min_count = 5;
  double learning_rate = 0.025;
  /// Frequent-word subsampling threshold; 0 disables it.
  double subsample = 0.0;
  std::uint64_t seed = 0;
};

/// Skip-gram word vectors (input embeddings), one row per vocabulary entry.
struct EmbeddingModel {
  std::vector<std::string> vocab;
  Eigen::MatrixXd vectors;  // |vocab| x dim
  TrainingParams meta;

  int dim() const { return static_cast<int>(vectors.cols()); }
  /// Row index, or -1 when out of vocabulary.
  long index_of(const std::string& token) const;

  void build_index();

 private:
  std::unordered_map<std::string, long> index_;
};

/// Domain categories reuse the lexicon types; one category per domain.
using DomainScheme = lexicon::SkillScheme;

/// Trains on the corpus docs followed by one pseudo-document per domain
/// (its keyword tokens). Single-threaded, so a fixed seed gives identical vectors.
EmbeddingModel train_embeddings(const std::vector<textnorm::NormalizedDoc>& docs, const DomainScheme& scheme,
                                const TrainingParams& params);
EmbeddingModel train_embeddings(const std::vector<textnorm::Tokens>& sentences, const TrainingParams& params);

struct DocVector {
  Eigen::VectorXd value;
  std::size_t in_vocab = 0;
  bool all_oov() const { return in_vocab == 0; }
};

/// Unweighted mean of the in-vocabulary token vectors; zero when none are known.
DocVector doc_vector(const textnorm::Tokens& tokens, const EmbeddingModel& m);
/// Mean over every token of every keyword in the category.
DocVector category_vector(const lexicon::SkillCategory& cat, const EmbeddingModel& m);

/// u.v / (|u||v|), or 0 when either norm vanishes.
template <typename A, typename B>
typename A::Scalar cosine(const Eigen::MatrixBase<A>& u, const Eigen::MatrixBase<B>& v) {
  using Scalar = typename A::Scalar;
  const Scalar nu = u.norm();
  const Scalar nv = v.norm();
  if (nu == Scalar(0) || nv == Scalar(0)) return Scalar(0);
  return u.dot(v) / (nu * nv);
}

struct DomainAssignment {
  std::string ad_id;
  std::string domain;  // "unassigned" when the doc has no known tokens
  long domain_index = -1;
  double similarity = 0.0;
  double domain_intensity = 0.0;
};

inline constexpr const char* kUnassigned = "unassigned";

/// Precomputed domain centroids for repeated assignment.
class DomainAssigner {
 public:
  DomainAssigner(const DomainScheme& scheme, const EmbeddingModel& model);
  DomainAssignment assign(const textnorm::NormalizedDoc& doc) const;
  const Eigen::MatrixXd& centroids() const { return centroids_; }

 private:
  const DomainScheme& scheme_;
  const EmbeddingModel& model_;
  Eigen::MatrixXd centroids_;  // domains x dim
};

DomainAssignment assign_domain(const textnorm::NormalizedDoc& doc, const DomainScheme& scheme,
                               const EmbeddingModel& m);

struct DomainFeatures {
  lexicon::FeatureMatrix features;  // single column "domain_intensity"
  std::vector<DomainAssignment> assignments;
  /// Mean intensity and ad count per domain, in scheme order.
  std::vector<std::pair<std::string, std::pair<double, std::size_t>>> per_domain;
};

DomainFeatures domain_features(const std::vector<textnorm::NormalizedDoc>& docs, const DomainScheme& scheme,
                               const EmbeddingModel& m);
std::string assignments_csv(const DomainFeatures& f);
std::string per_domain_json(const DomainFeatures& f);

/// Binary layout (little-endian): "SKEMB" magic, version byte, u32 dim,
/// u64 vocab size, meta block, u32-length-prefixed vocab strings, then the
/// row-major float64 matrix. A JSON sidecar (<path>.json) holds the meta.
void save_model(const EmbeddingModel& m, const std::filesystem::path& path);
EmbeddingModel load_model(const std::filesystem::path& path);
std::string meta_json(const TrainingParams& p);

}  // namespace skillscope::embed
