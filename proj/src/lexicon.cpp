#include "skillscope/lexicon.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include "json.hpp"

namespace skillscope::lexicon {

using nlohmann::json;

std::size_t SkillScheme::keyword_count() const {
  std::size_t n = 0;
  for (const auto& c : categories) n += c.keywords.size();
  return n;
}

SkillScheme parse_scheme(std::string_view json_text, const textnorm::NormConfig& cfg, LoadWarnings* warnings) {
  json j = json::parse(json_text, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("categories") || !j["categories"].is_array())
    throw Error("malformed_scheme", "scheme JSON must be an object with a 'categories' array");

  const auto phrase_cfg = cfg.without_stopword_removal();
  SkillScheme scheme;
  scheme.name = j.value("name", std::string("unnamed"));
  std::set<std::string> names;
  for (const auto& jc : j["categories"]) {
    if (!jc.is_object() || !jc.contains("name") || !jc.contains("keywords") || !jc["keywords"].is_array())
      throw Error("malformed_scheme", "each category needs 'name' and a 'keywords' array");
    SkillCategory cat;
    cat.name = jc["name"].get<std::string>();
    if (!names.insert(cat.name).second) throw Error("malformed_scheme", "duplicate category name '" + cat.name + "'");
    std::set<Keyword> seen;
    for (const auto& jk : jc["keywords"]) {
      if (!jk.is_string()) throw Error("malformed_scheme", "keywords must be strings in category '" + cat.name + "'");
      const auto raw = jk.get<std::string>();
      Keyword kw = textnorm::normalize(raw, phrase_cfg);
      if (kw.empty()) {
        if (warnings) warnings->dropped_keywords.push_back(cat.name + ": " + raw);
        continue;
      }
      if (!seen.insert(kw).second) {
        if (warnings) ++warnings->duplicates_removed;
        continue;
      }
      cat.keywords.push_back(std::move(kw));
    }
    if (cat.keywords.empty())
      throw Error("empty_category:" + cat.name, "category '" + cat.name + "' has no keywords after normalization");
    scheme.categories.push_back(std::move(cat));
  }
  if (scheme.categories.empty()) throw Error("malformed_scheme", "scheme has no categories");
  return scheme;
}

SkillScheme load_scheme(const std::filesystem::path& path, const textnorm::NormConfig& cfg, LoadWarnings* warnings) {
  return parse_scheme(read_file(path), cfg, warnings);
}

SkillScheme bundled_scheme(std::string_view name) {
  return load_scheme(resource_path("schemes/" + std::string(name) + ".json"));
}

std::string to_json(const SkillScheme& scheme) {
  json j;
  j["name"] = scheme.name;
  j["categories"] = json::array();
  for (const auto& c : scheme.categories) {
    json kws = json::array();
    for (const auto& k : c.keywords) kws.push_back(textnorm::join(k));
    j["categories"].push_back({{"name", c.name}, {"keywords", kws}});
  }
  return j.dump(2);
}

bool contains_phrase(const textnorm::Tokens& tokens, const Keyword& keyword) {
  if (keyword.empty() || keyword.size() > tokens.size()) return false;
  return std::search(tokens.begin(), tokens.end(), keyword.begin(), keyword.end()) != tokens.end();
}

double intensity(const textnorm::Tokens& doc, const SkillCategory& cat) {
  if (cat.keywords.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& k : cat.keywords)
    if (contains_phrase(doc, k)) ++hits;
  return static_cast<double>(hits) / static_cast<double>(cat.keywords.size());
}

SchemeMatcher::SchemeMatcher(const SkillScheme& scheme) {
  for (std::size_t c = 0; c < scheme.categories.size(); ++c) {
    const auto& cat = scheme.categories[c];
    category_sizes_.push_back(cat.keywords.size());
    for (const auto& kw : cat.keywords) {
      by_first_token_[kw.front()].push_back({c, total_keywords_, &kw});
      ++total_keywords_;
    }
  }
}

Eigen::VectorXd SchemeMatcher::intensities(const textnorm::Tokens& doc) const {
  std::vector<char> hit(total_keywords_, 0);
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(category_sizes_.size()));
  for (std::size_t i = 0; i < doc.size(); ++i) {
    auto it = by_first_token_.find(doc[i]);
    if (it == by_first_token_.end()) continue;
    for (const auto& e : it->second) {
      if (hit[e.keyword]) continue;
      const Keyword& p = *e.phrase;
      if (i + p.size() > doc.size()) continue;
      if (std::equal(p.begin() + 1, p.end(), doc.begin() + static_cast<std::ptrdiff_t>(i) + 1)) {
        hit[e.keyword] = 1;
        counts(static_cast<Eigen::Index>(e.category)) += 1.0;
      }
    }
  }
  for (Eigen::Index c = 0; c < counts.size(); ++c) counts(c) /= static_cast<double>(category_sizes_[static_cast<std::size_t>(c)]);
  return counts;
}

std::string_view to_string(FeatureKind k) {
  switch (k) {
    case FeatureKind::intensity: return "intensity";
    case FeatureKind::binary: return "binary";
    case FeatureKind::probability: return "probability";
  }
  return "intensity";
}

FeatureKind parse_feature_kind(std::string_view s) {
  if (s == "intensity") return FeatureKind::intensity;
  if (s == "binary") return FeatureKind::binary;
  if (s == "probability") return FeatureKind::probability;
  throw Error("unknown_feature_kind", "unknown feature kind '" + std::string(s) + "'");
}

FeatureMatrix score_corpus(const std::vector<textnorm::NormalizedDoc>& docs, const SkillScheme& scheme,
                           FeatureKind kind) {
  if (docs.empty()) throw Error("no_documents", "cannot score an empty document list");
  FeatureMatrix f;
  f.method = scheme.name;
  f.kind = kind;
  for (const auto& c : scheme.categories) f.feature_names.push_back(c.name);
  f.values.resize(static_cast<Eigen::Index>(docs.size()), static_cast<Eigen::Index>(scheme.categories.size()));
  f.ad_ids.resize(docs.size());
  SchemeMatcher matcher(scheme);
  parallel_for(docs.size(), [&](std::size_t i) {
    f.ad_ids[i] = docs[i].ad_id;
    Eigen::VectorXd row = matcher.intensities(docs[i].tokens);
    if (kind == FeatureKind::binary) row = (row.array() > 0.0).cast<double>();
    f.values.row(static_cast<Eigen::Index>(i)) = row.transpose();
  });
  return f;
}

std::vector<std::pair<std::string, double>> prevalence(const FeatureMatrix& f) {
  std::vector<std::pair<std::string, double>> out;
  for (Eigen::Index c = 0; c < f.cols(); ++c)
    out.emplace_back(f.feature_names[static_cast<std::size_t>(c)], f.rows() ? f.values.col(c).mean() : 0.0);
  return out;
}

std::string prevalence_json(const FeatureMatrix& f) {
  json j;
  j["method"] = f.method;
  j["kind"] = to_string(f.kind);
  j["n"] = f.rows();
  json rows = json::array();
  for (const auto& [name, mean] : prevalence(f)) rows.push_back({{"feature", name}, {"mean", mean}});
  j["prevalence"] = rows;
  return j.dump(2);
}

std::string to_csv(const FeatureMatrix& f) {
  std::vector<std::string> header{"ad_id"};
  header.insert(header.end(), f.feature_names.begin(), f.feature_names.end());
  std::string out = csv_line(header);
  for (Eigen::Index r = 0; r < f.rows(); ++r) {
    std::vector<std::string> row{f.ad_ids[static_cast<std::size_t>(r)]};
    for (Eigen::Index c = 0; c < f.cols(); ++c) row.push_back(format_double(f.values(r, c)));
    out += csv_line(row);
  }
  return out;
}

FeatureMatrix features_from_csv(std::string_view text, std::string method, FeatureKind kind) {
  auto rows = parse_csv(text);
  if (rows.empty() || rows[0].size() < 2 || rows[0][0] != "ad_id")
    throw Error("malformed_features", "feature CSV must start with an 'ad_id' column followed by features");
  FeatureMatrix f;
  f.method = std::move(method);
  f.kind = kind;
  f.feature_names.assign(rows[0].begin() + 1, rows[0].end());
  const auto n = static_cast<Eigen::Index>(rows.size() - 1);
  const auto p = static_cast<Eigen::Index>(f.feature_names.size());
  f.values.resize(n, p);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& row = rows[static_cast<std::size_t>(r) + 1];
    if (static_cast<Eigen::Index>(row.size()) != p + 1)
      throw Error("malformed_features", "feature CSV row " + std::to_string(r + 1) + " has the wrong width");
    f.ad_ids.push_back(row[0]);
    for (Eigen::Index c = 0; c < p; ++c) {
      const auto& cell = row[static_cast<std::size_t>(c) + 1];
      double v = 0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size())
        throw Error("malformed_features", "non-numeric feature value '" + cell + "'");
      f.values(r, c) = v;
    }
  }
  return f;
}

}  // namespace skillscope::lexicon
