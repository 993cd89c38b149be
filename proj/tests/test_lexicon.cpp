#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "skillscope/lexicon.hpp"

using namespace skillscope;
using namespace skillscope::lexicon;
using textnorm::Tokens;

TEST_CASE("phrase matching is contiguous and ordered") {
  const Tokens doc{"team", "player", "with", "project", "management"};
  CHECK(contains_phrase(doc, {"project", "management"}));
  CHECK(!contains_phrase(doc, {"management", "project"}));
  CHECK(!contains_phrase(doc, {"team", "project"}));
  CHECK(contains_phrase(doc, {"team"}));
  CHECK(!contains_phrase({}, {"team"}));
}

TEST_CASE("intensity counts keywords, not occurrences") {
  SkillCategory cat{"Social", {{"team"}, {"communication"}, {"project", "management"}, {"mentor"}}};
  const Tokens doc{"team", "team", "team", "project", "management"};
  CHECK(intensity(doc, cat) == doctest::Approx(0.5));
  CHECK(binary_presence(doc, cat) == 1);
  CHECK(binary_presence(Tokens{"excel"}, cat) == 0);
}

TEST_CASE("scheme matcher agrees with the naive scan") {
  const SkillScheme scheme = bundled_scheme("spitz5");
  const SchemeMatcher matcher(scheme);
  std::vector<std::string> pool;
  for (const auto& c : scheme.categories)
    for (const auto& k : c.keywords) pool.insert(pool.end(), k.begin(), k.end());
  pool.push_back("filler");
  std::mt19937_64 rng(11);
  for (int d = 0; d < 200; ++d) {
    Tokens doc(30);
    for (auto& t : doc) t = pool[rng() % pool.size()];
    const Eigen::VectorXd fast = matcher.intensities(doc);
    for (std::size_t c = 0; c < scheme.categories.size(); ++c)
      CHECK(fast(static_cast<Eigen::Index>(c)) == oracle::intensity(doc, scheme.categories[c].keywords));
  }
}

TEST_CASE("scheme parsing normalizes and deduplicates keywords") {
  LoadWarnings w;
  const SkillScheme s = parse_scheme(
      R"({"name":"t","categories":[{"name":"A","keywords":["Managing","manage","Take apart","123"]}]})",
      textnorm::NormConfig::bundled(), &w);
  REQUIRE(s.categories.size() == 1);
  CHECK(s.categories[0].keywords == std::vector<Keyword>{{"manage"}, {"take", "apart"}});
  CHECK(w.duplicates_removed == 1);
  CHECK(w.dropped_keywords.size() == 1);
}

TEST_CASE("malformed schemes are rejected") {
  CHECK_THROWS_AS(parse_scheme(R"({"name":"x"})"), Error);
  CHECK_THROWS_AS(parse_scheme(R"({"categories":[{"name":"A","keywords":[]}]})"), Error);
  CHECK_THROWS_AS(parse_scheme(R"({"categories":[{"name":"A","keywords":["x1"]},{"name":"A","keywords":["b"]}]})"),
                  Error);
  CHECK_THROWS_AS(parse_scheme(R"({"categories":[]})"), Error);
}

TEST_CASE("bundled schemes have the expected shape") {
  CHECK(bundled_scheme("spitz5").categories.size() == 5);
  CHECK(bundled_scheme("deming10").categories.size() == 10);
  CHECK(bundled_scheme("disco_nondomain").categories.size() == 8);
  CHECK(!bundled_scheme("disco_domains").categories.empty());
  for (const char* name : {"spitz5", "deming10", "disco_nondomain", "disco_domains"})
    for (const auto& c : bundled_scheme(name).categories) CHECK(!c.keywords.empty());
}

TEST_CASE("feature csv round trip") {
  const SkillScheme s{"mini", {{"A", {{"excel"}}}, {"B", {{"team"}, {"lead"}}}}};
  std::vector<textnorm::NormalizedDoc> docs{{"d1", {"excel", "team"}}, {"d2", {"lead"}}, {"d3", {}}};
  const FeatureMatrix f = score_corpus(docs, s);
  CHECK(f.values(0, 0) == 1.0);
  CHECK(f.values(0, 1) == 0.5);
  CHECK(f.values(2, 1) == 0.0);
  const FeatureMatrix back = features_from_csv(to_csv(f), "mini", FeatureKind::intensity);
  CHECK(back.ad_ids == f.ad_ids);
  CHECK(back.feature_names == f.feature_names);
  CHECK(back.values == f.values);
  const FeatureMatrix bin = score_corpus(docs, s, FeatureKind::binary);
  CHECK(bin.values(1, 1) == 1.0);
  const auto prev = prevalence(bin);
  CHECK(prev[1].second == doctest::Approx(2.0 / 3.0));
  CHECK_THROWS_AS(score_corpus({}, s), Error);
  CHECK_THROWS_AS(features_from_csv("x,y\n", "m", FeatureKind::intensity), Error);
}

TEST_CASE("feature kind names") {
  CHECK(parse_feature_kind(to_string(FeatureKind::probability)) == FeatureKind::probability);
  CHECK_THROWS_AS(parse_feature_kind("odds"), Error);
}
