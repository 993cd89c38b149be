#include <doctest.h>

#include <set>

#include "skillscope/synth.hpp"

using namespace skillscope;
using namespace skillscope::synth;

namespace {

SynthConfig small(std::uint64_t seed) {
  SynthConfig c;
  c.n_docs = 300;
  c.vocab_size = 80;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("generation is deterministic per seed") {
  const SynthCorpus a = generate(small(1));
  const SynthCorpus b = generate(small(1));
  const SynthCorpus c = generate(small(2));
  CHECK(corpus::content_hash(a.corpus) == corpus::content_hash(b.corpus));
  CHECK(a.truth.theta == b.truth.theta);
  CHECK(corpus::content_hash(a.corpus) != corpus::content_hash(c.corpus));
  CHECK(truth_json(small(1), a.truth) == truth_json(small(1), b.truth));
}

TEST_CASE("generated ads are well formed") {
  const SynthConfig cfg = small(3);
  const SynthCorpus s = generate(cfg);
  REQUIRE(s.corpus.ads.size() == cfg.n_docs);
  std::set<std::string> ids;
  for (std::size_t i = 0; i < s.corpus.ads.size(); ++i) {
    const auto& ad = s.corpus.ads[i];
    ids.insert(ad.id);
    CHECK(ad.wage > 0.0);
    CHECK(std::log(ad.wage) == doctest::Approx(s.truth.signal(static_cast<Eigen::Index>(i)) + s.truth.noise(static_cast<Eigen::Index>(i))));
    CHECK(ad.posting_date.year == cfg.year);
    const auto len = s.truth.words[i].size();
    CHECK(len >= static_cast<std::size_t>(cfg.doc_length_min));
    CHECK(len <= static_cast<std::size_t>(cfg.doc_length_max));
    CHECK(s.truth.assignments[i].size() == len);
  }
  CHECK(ids.size() == cfg.n_docs);
  CHECK(s.corpus.ads[0].id == "syn0000001");
  for (Eigen::Index k = 0; k < s.truth.phi.rows(); ++k) CHECK(s.truth.phi.row(k).sum() == doctest::Approx(1.0));
  for (Eigen::Index d = 0; d < s.truth.theta.rows(); ++d) CHECK(s.truth.theta.row(d).sum() == doctest::Approx(1.0));
}

TEST_CASE("synthetic words are distinct lowercase tokens") {
  std::set<std::string> seen;
  for (int i = 0; i < 2000; ++i) {
    const std::string w = word(i);
    CHECK(w.size() == 5);
    CHECK(w.rfind("zx", 0) == 0);
    seen.insert(w);
  }
  CHECK(seen.size() == 2000);
}

TEST_CASE("token streams can be regenerated") {
  const SynthConfig cfg = small(4);
  const SynthCorpus s = generate(cfg);
  CHECK(regenerate_tokens(cfg, s.truth) == s.truth.words);
}

TEST_CASE("noise level hits the requested design r2") {
  SynthConfig cfg = small(5);
  cfg.noise_sd = noise_sd_for_r2(cfg, 0.4, 50000);
  CHECK(design_r2(cfg, 50000) == doctest::Approx(0.4).epsilon(0.02));
  CHECK_THROWS_AS(noise_sd_for_r2(cfg, 0.0), Error);
}

TEST_CASE("invalid configurations") {
  SynthConfig c = small(6);
  c.K_true = 0;
  CHECK_THROWS_AS(validate(c), Error);
  c = small(6);
  c.doc_length_min = 90;
  CHECK_THROWS_AS(validate(c), Error);
  c = small(6);
  c.county_effects.pop_back();
  CHECK_THROWS_AS(validate(c), Error);
  c = small(6);
  c.beta_topic = {1.0};
  CHECK_THROWS_AS(validate(c), Error);
  CHECK_NOTHROW(validate(small(6)));
}

TEST_CASE("config json round trip") {
  SynthConfig c = small(7);
  c.noise_sd = 0.33;
  const SynthConfig back = parse_config(config_json(c));
  CHECK(config_json(back) == config_json(c));
  CHECK_THROWS_AS(parse_config(R"({"n_docs": 10, "bogus": 1})"), Error);
  CHECK_THROWS_AS(parse_config("[1,2]"), Error);
}

TEST_CASE("straw-man and aligned dictionaries") {
  const SynthConfig cfg = small(8);
  const SynthCorpus s = generate(cfg);
  const auto mis = mismatched_dictionary(cfg, 5, 10, 1);
  REQUIRE(mis.categories.size() == 5);
  const int block = cfg.vocab_size / cfg.K_true;
  for (const auto& cat : mis.categories) {
    CHECK(cat.keywords.size() == 10);
    std::set<int> topics;
    for (const auto& kw : cat.keywords)
      for (int i = 0; i < cfg.vocab_size; ++i)
        if (word(i) == kw[0]) topics.insert(i / block);
    CHECK(topics.size() == static_cast<std::size_t>(cfg.K_true));
  }
  const auto aligned = aligned_dictionary(cfg, s.truth, 10);
  CHECK(aligned.categories.size() == static_cast<std::size_t>(cfg.K_true));
}
