#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "skillscope/textnorm.hpp"

namespace skillscope::lexicon {

using Keyword = textnorm::Tokens;  // a unigram or a multiword phrase

struct SkillCategory {
  std::string name;
  std::vector<Keyword> keywords;  // unique, normalized
};

struct SkillScheme {
  std::string name;
  std::vector<SkillCategory> categories;

  std::size_t keyword_count() const;
};

struct LoadWarnings {
  std::vector<std::string> dropped_keywords;  // "category: raw keyword"
  std::size_t duplicates_removed = 0;
};

/// Parses {"name": str, "categories": [{"name": str, "keywords": [str...]}...]}.
/// Keywords pass through the normalization pipeline with stopword removal
/// off, then get deduplicated.
SkillScheme parse_scheme(std::string_view json_text, const textnorm::NormConfig& cfg = textnorm::NormConfig::bundled(),
                         LoadWarnings* warnings = nullptr);
SkillScheme load_scheme(const std::filesystem::path& path,
                        const textnorm::NormConfig& cfg = textnorm::NormConfig::bundled(),
                        LoadWarnings* warnings = nullptr);
/// One of the bundled schemes: "spitz5", "deming10", "disco_nondomain", "disco_domains".
SkillScheme bundled_scheme(std::string_view name);
std::string to_json(const SkillScheme& scheme);

/// True when `keyword` occurs as a contiguous run of `tokens`.
bool contains_phrase(const textnorm::Tokens& tokens, const Keyword& keyword);

/// Fraction of the category's keywords occurring at least once in the doc.
double intensity(const textnorm::Tokens& doc, const SkillCategory& cat);
inline double intensity(const textnorm::NormalizedDoc& doc, const SkillCategory& cat) {
  return intensity(doc.tokens, cat);
}
inline int binary_presence(const textnorm::Tokens& doc, const SkillCategory& cat) {
  return intensity(doc, cat) > 0.0 ? 1 : 0;
}

/// Keyword index over a whole scheme. Scanning a doc costs one hash lookup
/// per token plus verification of the phrases that start there.
class SchemeMatcher {
 public:
  explicit SchemeMatcher(const SkillScheme& scheme);

  /// Intensity per category, in scheme order.
  Eigen::VectorXd intensities(const textnorm::Tokens& doc) const;

 private:
  struct Entry {
    std::size_t category;
    std::size_t keyword;  // global keyword slot
    const Keyword* phrase;
  };
  std::unordered_map<std::string, std::vector<Entry>> by_first_token_;
  std::vector<std::size_t> category_sizes_;
  std::size_t total_keywords_ = 0;
};

enum class FeatureKind { intensity, binary, probability };
std::string_view to_string(FeatureKind k);
FeatureKind parse_feature_kind(std::string_view s);

/// Per-ad feature values for one method; rows follow corpus order.
struct FeatureMatrix {
  std::string method;
  std::vector<std::string> ad_ids;
  std::vector<std::string> feature_names;
  Eigen::MatrixXd values;
  FeatureKind kind = FeatureKind::intensity;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
};

FeatureMatrix score_corpus(const std::vector<textnorm::NormalizedDoc>& docs, const SkillScheme& scheme,
                           FeatureKind kind = FeatureKind::intensity);

/// Column means: average intensity, or share of ads for binary features.
std::vector<std::pair<std::string, double>> prevalence(const FeatureMatrix& f);
std::string prevalence_json(const FeatureMatrix& f);

/// CSV: ad_id,<feature>...; values written with round-trip precision.
std::string to_csv(const FeatureMatrix& f);
FeatureMatrix features_from_csv(std::string_view text, std::string method, FeatureKind kind);

}  // namespace skillscope::lexicon
