#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "skillscope/corpus.hpp"
#include "skillscope/lexicon.hpp"

namespace skillscope::synth {

struct SynthConfig {
  std::size_t n_docs = 2000;
  int K_true = 4;
  int vocab_size = 200;
  int doc_length_min = 40;
  int doc_length_max = 80;
  /// Symmetric Dirichlet prior of the per-doc topic mixtures.
  double alpha_true = 0.3;
  /// Symmetric Dirichlet concentration of word weights inside a topic's block.
  double word_concentration = 2.0;
  /// Probability mass a topic spreads uniformly over words outside its block.
  double leakage = 0.10;

  double beta0 = 10.2;
  /// Log-wage effect per topic share; empty gives an even spread over [-0.6, 0.6].
  std::vector<double> beta_topic;
  std::vector<std::string> counties{"Greater London", "West Midlands", "Greater Manchester", "Kent", "Essex"};
  std::vector<double> county_effects{0.15, 0.0, -0.05, 0.05, -0.08};
  /// Twelve month effects; empty gives a mild seasonal profile.
  std::vector<double> month_effects;
  /// Indexed by JobType::code(): full/permanent, full/temporary, part/permanent, part/temporary.
  std::vector<double> job_type_effects{0.0, -0.08, -0.15, -0.2};
  double noise_sd = 0.2;
  int year = 2018;
  std::uint64_t seed = 0;

  std::vector<double> topic_betas() const;
  std::vector<double> months() const;
};

/// Throws invalid_synth_config on inconsistent settings.
void validate(const SynthConfig& cfg);

/// Synthetic word for vocabulary index i: "zx" followed by three letters.
std::string word(int i);

struct GroundTruth {
  std::vector<std::string> vocab;
  Eigen::MatrixXd phi;    // K x V
  Eigen::MatrixXd theta;  // n x K
  std::vector<std::vector<int>> assignments;  // per token topic
  std::vector<std::vector<int>> words;        // per token vocabulary index
  std::vector<int> county;
  std::vector<int> month;     // 1..12
  std::vector<int> job_type;  // JobType::code()
  Eigen::VectorXd signal;     // beta0 + beta.theta + FE
  Eigen::VectorXd noise;

  /// Planted topic of each doc: argmax of theta.
  std::vector<int> dominant() const;
  /// Indices of the top_n words of topic k under the planted phi.
  std::vector<int> top_words(int k, int top_n) const;
};

struct SynthCorpus {
  corpus::Corpus corpus;
  GroundTruth truth;
};

SynthCorpus generate(const SynthConfig& cfg);

/// Redraws the token streams from the stored theta and phi with the
/// config's seed; equal to the generated truth.words.
std::vector<std::vector<int>> regenerate_tokens(const SynthConfig& cfg, const GroundTruth& truth);

/// Population R2 of log wage on (theta, FE): var(signal) / (var(signal) + sd^2),
/// var(signal) estimated by simulating `draws` docs.
double design_r2(const SynthConfig& cfg, std::size_t draws = 200000);
/// Noise sd giving the requested design R2.
double noise_sd_for_r2(const SynthConfig& cfg, double target_r2, std::size_t draws = 200000);

/// Coarse straw-man scheme: `categories` x `keywords` single-word keywords
/// sampled round-robin across the planted topic blocks, so every category
/// mixes all topics.
lexicon::SkillScheme mismatched_dictionary(const SynthConfig& cfg, int categories = 5, int keywords = 10,
                                           std::uint64_t seed = 1);
/// One category per planted topic holding its top words.
lexicon::SkillScheme aligned_dictionary(const SynthConfig& cfg, const GroundTruth& truth, int keywords = 10);

std::string truth_json(const SynthConfig& cfg, const GroundTruth& truth);
std::string config_json(const SynthConfig& cfg);
SynthConfig parse_config(std::string_view json_text);

}  // namespace skillscope::synth
