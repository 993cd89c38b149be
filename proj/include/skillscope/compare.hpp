#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "skillscope/corpus.hpp"
#include "skillscope/econo.hpp"
#include "skillscope/embed.hpp"
#include "skillscope/lexicon.hpp"
#include "skillscope/topicmodel.hpp"

namespace skillscope::compare {

struct LdaConfig {
  /// Fixed topic count; when unset the count is chosen by select_k over k_grid.
  std::optional<int> K;
  std::vector<int> k_grid{10, 15, 20, 24, 30};
  std::size_t sample_size = 0;
  int replicates = 2;
  int min_df = topicmodel::kDefaultMinDf;
  double max_df_fraction = topicmodel::kDefaultMaxDfFraction;
  topicmodel::LdaParams fit;
  topicmodel::LdaParams select{.K = 0, .alpha = std::nullopt, .beta = 0.01, .iterations = 300, .burn_in = 150, .thin = 25};
  topicmodel::CoherenceParams coherence;
};

struct CompareConfig {
  /// Methods in run order. Built-ins: spitz5, deming10, disco, lda; any other
  /// name must appear in `schemes`.
  std::vector<std::string> methods{"spitz5", "deming10", "disco", "lda"};
  /// Lexicon schemes by method name; built-in names fall back to the bundled files.
  std::vector<std::pair<std::string, lexicon::SkillScheme>> schemes;
  std::optional<lexicon::SkillScheme> disco_domains;
  embed::TrainingParams embedding;
  LdaConfig lda;
  bool robust_se = false;
  std::uint64_t seed = 0;
};

/// Reads the JSON run configuration; scheme paths resolve against `base`.
/// Unknown keys are rejected.
CompareConfig parse_config(std::string_view json_text, const std::filesystem::path& base);
/// Canonical JSON echo of the configuration (schemes by name and keyword count).
std::string config_json(const CompareConfig& cfg);

struct MethodRun {
  std::string method;
  bool ok = false;
  std::string error;
  lexicon::FeatureMatrix features;  // raw, before standardization
  std::vector<std::string> regressors;  // columns entering the regressions
  std::optional<std::string> dropped_column;
  econo::StandardizationMeta standardization;
  std::array<econo::RegressionResult, 3> models;
  /// LDA only.
  std::optional<topicmodel::LdaModel> lda;
  std::optional<topicmodel::SelectKResult> k_selection;
  std::optional<topicmodel::CoherenceResult> coherence;

  double r2_adj_model3() const { return models[2].r2_adj; }
};

/// Builds the method's features, standardizes them and fits Models 1-3.
/// Failures are recorded in the run instead of thrown.
MethodRun run_method(const std::string& method, const corpus::Corpus& c,
                     const std::vector<textnorm::NormalizedDoc>& docs, const CompareConfig& cfg);

/// Standardizes `features` and fits the three models; LDA probability
/// columns lose their last topic first.
MethodRun regress_features(std::string method, lexicon::FeatureMatrix features, const corpus::Corpus& c,
                           bool robust_se);

struct ComparisonReport {
  std::vector<MethodRun> runs;     // in config order
  std::vector<std::size_t> ranking;  // indices into runs, successful methods only
  std::uint64_t corpus_hash = 0;
  std::size_t n_ads = 0;
  std::string config;  // config_json
};

/// Orders successful runs by Model 3 adjusted R2, descending; ties by name.
std::vector<std::size_t> rank_runs(const std::vector<MethodRun>& runs);

ComparisonReport compare_all(const corpus::Corpus& c, const std::vector<textnorm::NormalizedDoc>& docs,
                             const CompareConfig& cfg);

/// Refits LDA at each K and regresses; runs are named lda<K>.
std::vector<MethodRun> lda_k_variants(const corpus::Corpus& c, const std::vector<textnorm::NormalizedDoc>& docs,
                                      const std::vector<int>& k_list, const CompareConfig& cfg);

std::string to_json(const ComparisonReport& r);
std::string to_markdown(const ComparisonReport& r);
/// rank,method,n_features,r2_adj_model1,r2_adj_model2,r2_adj_model3
std::string ranking_csv(const ComparisonReport& r);

}  // namespace skillscope::compare
