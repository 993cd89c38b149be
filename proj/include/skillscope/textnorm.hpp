#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "skillscope/corpus.hpp"

namespace skillscope::textnorm {

using Tokens = std::vector<std::string>;

struct NormalizedDoc {
  std::string ad_id;
  Tokens tokens;
};

/// Stopword list, lemma table and switches for the normalization pipeline.
///
/// Lemma targets must be fixed points of the table, lowercase [a-z]{2,} and
/// not stopwords; otherwise re-normalizing a normalized document could move
/// it. The constructors enforce this.
class NormConfig {
 public:
  NormConfig(std::unordered_set<std::string> stopwords, std::unordered_map<std::string, std::string> lemmas,
             bool strip_html = true);

  /// Bundled English stopwords (179 entries) and lemma table.
  static const NormConfig& bundled();
  static NormConfig from_files(const std::filesystem::path& stopword_file, const std::filesystem::path& lemma_file,
                               bool strip_html = true);

  const std::unordered_set<std::string>& stopwords() const { return stopwords_; }
  const std::unordered_map<std::string, std::string>& lemmas() const { return lemmas_; }
  bool strip_html() const { return strip_html_; }
  bool remove_stopwords() const { return remove_stopwords_; }

  bool is_stopword(std::string_view t) const { return stopwords_.count(std::string(t)) != 0; }
  const std::string& lemma(const std::string& token) const;

  /// Copy with stopword removal switched off (used for keyword phrases).
  NormConfig without_stopword_removal() const;

 private:
  std::unordered_set<std::string> stopwords_;
  std::unordered_map<std::string, std::string> lemmas_;
  bool strip_html_ = true;
  bool remove_stopwords_ = true;
};

std::unordered_set<std::string> load_stopwords(const std::filesystem::path& path);
std::unordered_map<std::string, std::string> load_lemma_table(const std::filesystem::path& path);

/// Per-call diagnostics; malformed HTML ("<" with no closing ">") is counted.
struct NormStats {
  std::size_t unclosed_tags = 0;
};

/// lowercase -> decode entities -> strip tags -> transliterate accents ->
/// delete digits -> non-[a-z] to space -> split -> drop stopwords ->
/// lemmatize -> drop tokens shorter than 2.
Tokens normalize(std::string_view text, const NormConfig& cfg, NormStats* stats = nullptr);

// Individual stages, exposed for testing.
std::string decode_entities(std::string_view text);
std::string strip_tags(std::string_view text, NormStats* stats = nullptr);
std::string transliterate(std::string_view utf8);

std::vector<NormalizedDoc> normalize_corpus(const corpus::Corpus& c, const NormConfig& cfg);

std::string join(const Tokens& tokens);

/// One JSON object per line: {"id": ..., "tokens": [...]}.
std::string to_jsonl(const std::vector<NormalizedDoc>& docs);
std::vector<NormalizedDoc> docs_from_jsonl(std::string_view text);

}  // namespace skillscope::textnorm
