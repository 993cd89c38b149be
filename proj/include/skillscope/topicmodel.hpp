#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "skillscope/lexicon.hpp"
#include "skillscope/textnorm.hpp"

namespace skillscope::topicmodel {

/// Pruned document-term data: each doc is its sequence of vocabulary ids
/// (order and multiplicity kept, pruned tokens removed).
struct Dtm {
  std::vector<std::string> vocab;  // sorted
  std::vector<std::vector<int>> doc_tokens;
  std::vector<int> doc_freq;
  std::vector<std::string> doc_ids;
  std::vector<bool> emptied;  // doc had tokens but lost all of them to pruning

  std::size_t n_docs() const { return doc_tokens.size(); }
  std::size_t total_tokens() const;
  /// Vocabulary id or -1.
  int id_of(const std::string& token) const;
  std::vector<int> encode(const textnorm::Tokens& tokens) const;
};

inline constexpr int kDefaultMinDf = 20;
inline constexpr double kDefaultMaxDfFraction = 0.60;

/// Keeps tokens with min_df <= document frequency <= max_df_fraction * n_docs.
Dtm build_dtm(const std::vector<textnorm::NormalizedDoc>& docs, int min_df = kDefaultMinDf,
              double max_df_fraction = kDefaultMaxDfFraction);

struct LdaParams {
  int K = 10;
  /// Symmetric doc-topic prior; defaults to 50/K when unset.
  std::optional<double> alpha;
  double beta = 0.01;
  int iterations = 1000;
  int burn_in = 500;
  int thin = 50;
  std::uint64_t seed = 0;
  /// Re-derive all count tables after every sweep and compare (slow).
  bool verify_counts = false;

  double alpha_value() const { return alpha ? *alpha : 50.0 / K; }
};

struct LdaModel {
  int K = 0;
  double alpha = 0.0;
  double beta = 0.0;
  std::vector<std::string> vocab;
  Eigen::MatrixXd phi;    // K x |vocab|
  Eigen::MatrixXd theta;  // n_docs x K
  std::vector<std::string> doc_ids;
  int iterations = 0;
  int burn_in = 0;
  int thin = 0;
  std::uint64_t seed = 0;
  int samples_averaged = 0;
  /// Collapsed log joint log p(w, z) after each sweep.
  std::vector<double> loglik_trace;

  int vocab_id(const std::string& token) const;
};

/// Collapsed Gibbs sampling. phi and theta are averaged over post-burn-in
/// samples taken every `thin` sweeps:
///   phi[k,w]   = (n_kw + beta)  / (n_k + V beta)
///   theta[d,k] = (n_dk + alpha) / (n_d + K alpha)
LdaModel fit_lda(const Dtm& dtm, const LdaParams& params);

/// Gibbs inference for a new document with phi held fixed.
Eigen::VectorXd infer_theta(const textnorm::Tokens& doc, const LdaModel& m, int iterations, std::uint64_t seed);

/// argmax; ties go to the lowest index.
template <typename Derived>
Eigen::Index dominant_topic(const Eigen::MatrixBase<Derived>& theta_row) {
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < theta_row.size(); ++k)
    if (theta_row(k) > theta_row(best)) best = k;
  return best;
}

/// Indices of the top_n words of topic k by phi, descending (ties by id).
std::vector<int> top_words(const LdaModel& m, int k, int top_n);

// ---------------------------------------------------------------------------
// C_V coherence

struct CoherenceParams {
  int top_n = 30;
  int window = 110;
  double epsilon = 1e-12;
};

struct CoherenceResult {
  std::vector<double> per_topic;
  double mean = 0.0;
  /// Top words absent from every reference window (probabilities fall back to epsilon).
  std::vector<std::string> absent_words;
};

/// Topics are lists of token ids; reference docs are id sequences. Empty docs
/// are skipped; a doc shorter than the window counts as one window.
CoherenceResult coherence_cv(const std::vector<std::vector<int>>& topics,
                             const std::vector<std::vector<int>>& reference_docs, int window,
                             double epsilon = 1e-12);
/// String-token convenience wrapper.
CoherenceResult coherence_cv(const std::vector<textnorm::Tokens>& topics,
                             const std::vector<textnorm::Tokens>& reference_docs, int window,
                             double epsilon = 1e-12);
/// Model coherence against the (pruned) dtm the model was fitted on.
CoherenceResult coherence_cv(const LdaModel& m, const Dtm& dtm, const CoherenceParams& params = {});

// ---------------------------------------------------------------------------
// Topic count selection

struct SelectKParams {
  std::vector<int> k_grid;
  std::size_t sample_size = 0;  // 0: use all docs
  int replicates = 2;
  int min_df = kDefaultMinDf;
  double max_df_fraction = kDefaultMaxDfFraction;
  LdaParams lda{.K = 0, .alpha = std::nullopt, .beta = 0.01, .iterations = 300, .burn_in = 150, .thin = 25};
  CoherenceParams coherence;
  std::uint64_t seed = 0;
};

struct KScore {
  int K = 0;
  std::vector<double> replicate_scores;
  double mean = 0.0;
};

struct SelectKResult {
  int chosen_k = 0;
  std::vector<KScore> scores;
  bool samples_disjoint = true;
};

/// Fits each K on `replicates` uniform samples (seed + K + r per fit) and
/// picks the K with the highest mean C_V; ties go to the smaller K.
SelectKResult select_k(const std::vector<textnorm::NormalizedDoc>& docs, const SelectKParams& params);
std::string to_json(const SelectKResult& r);
std::string to_csv(const SelectKResult& r);

// ---------------------------------------------------------------------------
// Reporting and I/O

struct TopicRow {
  int topic = 0;  // 1-based
  std::size_t dominant_count = 0;
  double share = 0.0;
  double coherence = 0.0;
  std::vector<std::string> keywords;
};

struct TopicReport {
  std::vector<TopicRow> topics;
  std::size_t n_docs = 0;
};

TopicReport topic_report(const LdaModel& m, const Eigen::MatrixXd& theta, const std::vector<double>& coherence,
                         int top_n = 30);
std::string to_json(const TopicReport& r);
std::string to_markdown(const TopicReport& r);

/// Doc-topic probabilities as FeatureMatrix columns topic1prob..topicKprob.
lexicon::FeatureMatrix theta_features(const LdaModel& m);
/// ad_id,topic1prob,...,topicKprob
std::string theta_csv(const LdaModel& m);

/// `<prefix>.json` holds K, priors, vocab and training meta; `<prefix>.phi.bin`
/// holds phi as row-major little-endian float64.
void save_model(const LdaModel& m, const std::filesystem::path& prefix);
LdaModel load_model(const std::filesystem::path& prefix);

}  // namespace skillscope::topicmodel
