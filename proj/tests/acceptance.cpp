// Acceptance suite: one PASS/FAIL line per criterion. Exit status is nonzero
// when any criterion fails.

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <unistd.h>
#include <vector>

#include "oracles.hpp"
#include "skillscope/common.hpp"
#include "skillscope/compare.hpp"
#include "skillscope/corpus.hpp"
#include "skillscope/econo.hpp"
#include "skillscope/lexicon.hpp"
#include "skillscope/synth.hpp"
#include "skillscope/textnorm.hpp"
#include "skillscope/topicmodel.hpp"

using namespace skillscope;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

int failures = 0;

void criterion(int id, const char* name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (s > budget_s) {
    o.pass = false;
    o.detail += "; over time budget " + fmt("%.0f", budget_s) + " s";
  }
  if (!o.pass) ++failures;
  std::printf("%s %2d %-28s %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), s);
  std::fflush(stdout);
}

// Every fitted LDA model and standardized design seen by the suite, for the
// hygiene criterion.
std::vector<topicmodel::LdaModel> fitted_models;
std::vector<Eigen::MatrixXd> standardized_designs;

synth::SynthConfig planted_config() {
  synth::SynthConfig cfg;
  cfg.n_docs = 2000;
  cfg.K_true = 4;
  cfg.vocab_size = 200;
  cfg.seed = 20240601;
  return cfg;
}

const synth::SynthCorpus& planted() {
  static const synth::SynthCorpus s = synth::generate(planted_config());
  return s;
}

const std::vector<textnorm::NormalizedDoc>& planted_docs() {
  static const auto docs = textnorm::normalize_corpus(planted().corpus, textnorm::NormConfig::bundled());
  return docs;
}

Outcome ols_oracle() {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  double worst_beta = 0.0, worst_r2 = 0.0;
  for (int rep = 0; rep < 25; ++rep) {
    const int n = 200, p = 4;
    Eigen::MatrixXd X(n, p);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < p; ++j) X(i, j) = normal(rng) * (j + 1);
      y(i) = 1.5 + X.row(i).dot(Eigen::Vector4d(0.3, -0.2, 0.1, 0.05)) + normal(rng);
    }
    const auto r = econo::fit_ols(y, X, {"a", "b", "c", "d"});
    const Eigen::VectorXd ref = oracle::ols_normal_equations(y, X);
    worst_beta = std::max(worst_beta, std::abs(r.intercept.estimate - ref(0)));
    for (int j = 0; j < p; ++j) worst_beta = std::max(worst_beta, std::abs(r.coefficients[j].estimate - ref(j + 1)));
    const double formula = 1.0 - (1.0 - r.r2) * (n - 1.0) / (n - p - 1.0);
    worst_r2 = std::max(worst_r2, std::abs(r.r2_adj - formula));
  }
  return {worst_beta < 1e-8 && worst_r2 < 1e-12,
          "max |beta - oracle| = " + fmt("%.2e", worst_beta) + ", max |r2_adj - formula| = " + fmt("%.2e", worst_r2)};
}

Outcome fwl_equivalence() {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> normal;
  double worst = 0.0;
  for (int rep = 0; rep < 10; ++rep) {
    const int n = 600 + 140 * rep;
    const int levels[3] = {5 + rep % 3, 12, 4};  // at most 6 + 11 + 3 = 20 dummies
    Eigen::MatrixXd X(n, 3);
    Eigen::VectorXd y(n);
    std::vector<std::vector<int>> groups(3, std::vector<int>(static_cast<std::size_t>(n)));
    std::vector<econo::FeCodes> fe;
    for (int g = 0; g < 3; ++g) {
      std::vector<long> keys;
      for (int i = 0; i < n; ++i) {
        groups[g][i] = static_cast<int>(rng() % static_cast<unsigned>(levels[g]));
        keys.push_back(groups[g][i]);
      }
      fe.push_back(econo::make_fe("g" + std::to_string(g), keys));
    }
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < 3; ++j) X(i, j) = normal(rng) + 0.3 * groups[j][i];
      y(i) = 2.0 + X.row(i).dot(Eigen::Vector3d(0.5, -0.25, 0.125)) + 0.1 * groups[0][i] - 0.05 * groups[1][i] +
             0.2 * groups[2][i] + normal(rng);
    }
    const auto r = econo::fit_ols(y, X, {"a", "b", "c"}, fe);
    const Eigen::VectorXd ref = oracle::ols_with_dummies(y, X, groups);
    for (int j = 0; j < 3; ++j) worst = std::max(worst, std::abs(r.coefficients[j].estimate - ref(j)));
  }
  return {worst < 1e-8, "max |beta_demeaned - beta_dummies| = " + fmt("%.2e", worst) + " over 10 instances"};
}

Outcome gini_oracle() {
  std::mt19937_64 rng(13);
  std::lognormal_distribution<double> wage(10.0, 0.6);
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 1 + rng() % 500;
    std::vector<double> x(n);
    for (auto& v : x) v = wage(rng);
    worst = std::max(worst, std::abs(corpus::gini(x) - oracle::gini_pairwise(x)));
  }
  const double g4 = corpus::gini(std::vector<double>{1, 2, 3, 4});
  return {worst < 1e-10 && g4 == 0.25,
          "max |sorted - pairwise| = " + fmt("%.2e", worst) + ", gini{1,2,3,4} = " + fmt("%g", g4)};
}

Outcome intensity_oracle() {
  std::mt19937_64 rng(14);
  const std::vector<std::string> pool{"data", "analysis", "team", "lead", "sql", "python", "customer",
                                      "service", "manage", "project", "report", "write"};
  auto pick = [&] { return pool[rng() % pool.size()]; };
  int mismatches = 0;
  for (int rep = 0; rep < 200; ++rep) {
    textnorm::Tokens doc(rng() % 40);
    for (auto& t : doc) t = pick();
    lexicon::SkillCategory cat{"c", {}};
    const std::size_t nk = 1 + rng() % 8;
    while (cat.keywords.size() < nk) {
      lexicon::Keyword kw(1 + rng() % 3);
      for (auto& t : kw) t = pick();
      if (std::find(cat.keywords.begin(), cat.keywords.end(), kw) == cat.keywords.end()) cat.keywords.push_back(kw);
    }
    const double expect = oracle::intensity(doc, cat.keywords);
    const lexicon::SkillScheme scheme{"s", {cat}};
    if (lexicon::intensity(doc, cat) != expect || lexicon::SchemeMatcher(scheme).intensities(doc)(0) != expect)
      ++mismatches;
  }
  lexicon::SkillCategory ten{"ten", {}};
  for (int i = 0; i < 10; ++i) ten.keywords.push_back({"kw" + std::string(1, static_cast<char>('a' + i))});
  const double three = lexicon::intensity(textnorm::Tokens{"kwa", "x", "kwc", "kwa", "kwj"}, ten);
  return {mismatches == 0 && three == 0.3,
          std::to_string(mismatches) + " mismatches in 200 pairs, 3-of-10 -> " + fmt("%g", three)};
}

Outcome coherence_oracle() {
  const std::vector<textnorm::Tokens> docs{{"data", "sql", "python", "report", "data", "team"},
                                           {"python", "model", "data", "sql"},
                                           {"team", "lead", "report", "manage", "team", "client", "sql"},
                                           {"client", "report", "data"}};
  const std::vector<textnorm::Tokens> topics{{"data", "sql", "python"}, {"team", "report", "client"}};
  const int window = 4;
  const auto ref = oracle::coherence_cv(topics, docs, window);
  const auto got = topicmodel::coherence_cv(topics, docs, window);

  // the same through a model whose top words are the topic words
  std::vector<textnorm::NormalizedDoc> nd;
  for (std::size_t i = 0; i < docs.size(); ++i) nd.push_back({"d" + std::to_string(i), docs[i]});
  const auto dtm = topicmodel::build_dtm(nd, 1, 1.0);
  topicmodel::LdaModel m;
  m.K = 2;
  m.vocab = dtm.vocab;
  m.phi = Eigen::MatrixXd::Constant(2, static_cast<Eigen::Index>(dtm.vocab.size()), 0.01);
  for (int k = 0; k < 2; ++k)
    for (int r = 0; r < 3; ++r) m.phi(k, dtm.id_of(topics[k][r])) = 1.0 - 0.1 * r;
  const auto via_model = topicmodel::coherence_cv(m, dtm, {.top_n = 3, .window = window, .epsilon = 1e-12});

  double worst = 0.0;
  for (int k = 0; k < 2; ++k) {
    worst = std::max(worst, std::abs(got.per_topic[k] - ref[k]));
    worst = std::max(worst, std::abs(via_model.per_topic[k] - ref[k]));
  }
  const std::vector<textnorm::Tokens> together{{"alpha", "beta", "gamma"}, {"gamma", "beta", "alpha"}};
  const double perfect = topicmodel::coherence_cv({{"alpha", "beta", "gamma"}}, together, 10).per_topic[0];
  return {worst < 1e-9 && std::abs(perfect - 1.0) < 1e-9,
          "max |pipeline - brute force| = " + fmt("%.2e", worst) + ", perfect co-occurrence = " + fmt("%.12f", perfect)};
}

Outcome lda_recovery() {
  const auto& s = planted();
  const auto dtm = topicmodel::build_dtm(planted_docs());
  topicmodel::LdaParams p;
  p.K = 4;
  p.seed = 99;
  auto m = topicmodel::fit_lda(dtm, p);

  const auto V = static_cast<Eigen::Index>(s.truth.vocab.size());
  Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(4, V);
  for (Eigen::Index w = 0; w < static_cast<Eigen::Index>(m.vocab.size()); ++w) {
    const auto it = std::find(s.truth.vocab.begin(), s.truth.vocab.end(), m.vocab[static_cast<std::size_t>(w)]);
    phi.col(it - s.truth.vocab.begin()) = m.phi.col(w);
  }
  const auto match = oracle::greedy_match(phi, s.truth.phi);
  double tv = 0.0;
  for (int k = 0; k < 4; ++k) tv += 0.5 * (phi.row(k) - s.truth.phi.row(match[k])).cwiseAbs().sum();
  tv /= 4.0;

  const auto planted_dom = s.truth.dominant();
  std::size_t agree = 0;
  for (Eigen::Index d = 0; d < m.theta.rows(); ++d)
    if (match[static_cast<std::size_t>(topicmodel::dominant_topic(m.theta.row(d)))] ==
        planted_dom[static_cast<std::size_t>(d)])
      ++agree;
  const double purity = static_cast<double>(agree) / static_cast<double>(m.theta.rows());
  fitted_models.push_back(std::move(m));
  return {tv < 0.15 && purity >= 0.90,
          "mean TV = " + fmt("%.4f", tv) + ", purity = " + fmt("%.4f", purity) + ", vocab " +
              std::to_string(dtm.vocab.size())};
}

Outcome k_selection() {
  topicmodel::SelectKParams p;
  p.k_grid = {2, 3, 4, 5, 6};
  p.sample_size = 1000;
  p.replicates = 2;
  p.seed = 5;
  const auto r = topicmodel::select_k(planted_docs(), p);
  double at2 = 0, at4 = 0;
  std::string table;
  for (const auto& s : r.scores) {
    if (s.K == 2) at2 = s.mean;
    if (s.K == 4) at4 = s.mean;
    table += (table.empty() ? "" : " ") + std::to_string(s.K) + ":" + fmt("%.4f", s.mean);
  }
  return {at4 > at2 && (r.chosen_k == 4 || r.chosen_k == 5) && r.samples_disjoint,
          "chosen K = " + std::to_string(r.chosen_k) + ", C_V " + table};
}

Outcome end_to_end_ranking() {
  auto cfg = planted_config();
  cfg.seed = 777;
  cfg.noise_sd = synth::noise_sd_for_r2(cfg, 0.5);
  const auto s = synth::generate(cfg);
  const auto docs = textnorm::normalize_corpus(s.corpus, textnorm::NormConfig::bundled());

  compare::CompareConfig cc;
  cc.methods = {"lda", "mismatched"};
  cc.schemes.emplace_back("mismatched", synth::mismatched_dictionary(cfg));
  cc.lda.k_grid = {2, 3, 4, 5, 6};
  cc.lda.sample_size = 1000;
  cc.seed = 31;
  const auto report = compare::compare_all(s.corpus, docs, cc);

  lexicon::FeatureMatrix truth;
  truth.method = "true_theta";
  truth.kind = lexicon::FeatureKind::probability;
  for (const auto& ad : s.corpus.ads) truth.ad_ids.push_back(ad.id);
  for (int k = 1; k <= cfg.K_true; ++k) truth.feature_names.push_back("topic" + std::to_string(k) + "prob");
  truth.values = s.truth.theta;
  const auto oracle_run = compare::regress_features("true_theta", truth, s.corpus, false);

  const auto& lda = report.runs[0];
  const auto& straw = report.runs[1];
  if (!lda.ok || !straw.ok || !oracle_run.ok)
    return {false, "method failed: " + lda.error + straw.error + oracle_run.error};
  for (const auto* run : {&lda, &straw, &oracle_run}) {
    const auto& st = run->standardization;
    Eigen::MatrixXd z(run->features.rows(), static_cast<Eigen::Index>(st.names.size()));
    for (Eigen::Index j = 0; j < z.cols(); ++j)
      z.col(j) = (run->features.values.col(j).array() - st.mean(j)) / st.sd(j);
    standardized_designs.push_back(std::move(z));
  }
  if (lda.lda) fitted_models.push_back(*lda.lda);

  const double r_lda = lda.r2_adj_model3(), r_straw = straw.r2_adj_model3(), r_true = oracle_run.r2_adj_model3();
  const bool ranked_first = !report.ranking.empty() && report.runs[report.ranking[0]].method == "lda";
  return {ranked_first && r_lda - r_straw >= 0.10 && std::abs(r_lda - r_true) <= 0.10,
          "r2_adj(M3): lda " + fmt("%.4f", r_lda) + " (K=" + std::to_string(lda.lda ? lda.lda->K : 0) +
              "), mismatched " + fmt("%.4f", r_straw) + ", true theta " + fmt("%.4f", r_true) + ", design R2 " +
              fmt("%.3f", synth::design_r2(cfg))};
}

Outcome normalization_contract() {
  std::mt19937_64 rng(15);
  const std::vector<std::string> pieces{
      "Senior", "DATA", "analyst", "<p>", "</p>", "<br/>", "<div class=\"x\">", "&amp;", "&nbsp;", "&eacute;",
      "&#233;", "&lt;b&gt;", "caf\xc3\xa9", "na\xc3\xafve", "\xc3\x9f", "\xe2\x82\xac", "2023", "h4ck3r", "C++",
      "e-mail", "the", "and", "of", "running", "teams", "analyses", "  ", "\t", "\n", "!!!", "x", "ab", "<unclosed",
      "Z\xc3\xbcrich", "\xe6\x97\xa5\xe6\x9c\xac", "o'clock", "it's", "R&D", "50%", ""};
  const auto& cfg = textnorm::NormConfig::bundled();
  int idem = 0, alphabet = 0, stop = 0;
  for (int i = 0; i < 1000; ++i) {
    std::string text;
    const int parts = i % 50 == 0 ? 0 : static_cast<int>(rng() % 25);
    for (int k = 0; k < parts; ++k) {
      text += pieces[rng() % pieces.size()];
      if (rng() % 3) text += ' ';
    }
    const auto once = textnorm::normalize(text, cfg);
    if (textnorm::normalize(textnorm::join(once), cfg) != once) ++idem;
    for (const auto& t : once) {
      if (t.size() < 2 || t.find_first_not_of("abcdefghijklmnopqrstuvwxyz") != std::string::npos) ++alphabet;
      if (cfg.is_stopword(t)) ++stop;
    }
  }
  return {idem == 0 && alphabet == 0 && stop == 0,
          "violations: idempotence " + std::to_string(idem) + ", alphabet " + std::to_string(alphabet) +
              ", stopwords " + std::to_string(stop) + " over 1000 strings"};
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / ("skillscope_accept_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto cfg = planted_config();
  cfg.n_docs = 800;
  cfg.seed = 4242;
  const auto s = synth::generate(cfg);
  corpus::save(s.corpus, dir / "corpus.csv", corpus::Format::csv);
  write_file(dir / "straw.json", lexicon::to_json(synth::mismatched_dictionary(cfg)));
  write_file(dir / "run.json",
             R"({"methods": ["spitz5", "straw", "lda"], "schemes": {"straw": "straw.json"},
                 "lda": {"k_grid": [3, 4], "sample_size": 400, "min_df": 5,
                         "select": {"iterations": 60, "burn_in": 30, "thin": 10},
                         "fit": {"iterations": 200, "burn_in": 100, "thin": 20}}})");
  const std::string cli = SKILLSCOPE_CLI;
  std::string bodies[2];
  for (int run = 0; run < 2; ++run) {
    const std::string out = "report" + std::to_string(run);
    const std::string cmd = "\"" + cli + "\" compare --workdir \"" + dir.string() +
                            "\" --input corpus.csv --config run.json --seed 7 --out " + out + " > /dev/null";
    if (std::system(cmd.c_str()) != 0) return {false, "compare exited nonzero"};
    bodies[run] = read_file(dir / (out + ".json")) + read_file(dir / (out + ".md")) +
                  read_file(dir / (out + "_ranking.csv"));
  }
  fs::remove_all(dir);
  return {bodies[0] == bodies[1] && !bodies[0].empty(),
          std::string(bodies[0] == bodies[1] ? "identical" : "different") + " report bodies (" +
              std::to_string(bodies[0].size()) + " bytes)"};
}

Outcome probability_hygiene() {
  double phi_err = 0, theta_err = 0, mean_err = 0, sd_err = 0;
  for (const auto& m : fitted_models) {
    phi_err = std::max(phi_err, (m.phi.rowwise().sum().array() - 1.0).abs().maxCoeff());
    theta_err = std::max(theta_err, (m.theta.rowwise().sum().array() - 1.0).abs().maxCoeff());
    if (m.phi.minCoeff() <= 0.0 || m.theta.minCoeff() <= 0.0) phi_err = 1.0;
  }
  for (const auto& z : standardized_designs)
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
      const double mean = z.col(j).mean();
      const double sd = std::sqrt((z.col(j).array() - mean).square().sum() / static_cast<double>(z.rows() - 1));
      mean_err = std::max(mean_err, std::abs(mean));
      sd_err = std::max(sd_err, std::abs(sd - 1.0));
    }
  const bool covered = !fitted_models.empty() && !standardized_designs.empty();
  return {covered && phi_err < 1e-9 && theta_err < 1e-9 && mean_err < 1e-10 && sd_err < 1e-10,
          std::to_string(fitted_models.size()) + " models, " + std::to_string(standardized_designs.size()) +
              " designs; max row-sum error phi " + fmt("%.1e", phi_err) + " theta " + fmt("%.1e", theta_err) +
              ", max |mean| " + fmt("%.1e", mean_err) + ", max |sd-1| " + fmt("%.1e", sd_err)};
}

Outcome throughput() {
  synth::SynthConfig cfg;
  cfg.n_docs = 100000;
  cfg.K_true = 8;
  cfg.vocab_size = 2000;
  cfg.doc_length_min = 80;
  cfg.doc_length_max = 160;
  cfg.seed = 100000;
  auto s = synth::generate(cfg);
  // splice skill phrases and markup into the synthetic text
  const auto scheme = lexicon::bundled_scheme("spitz5");
  std::vector<std::string> phrases;
  for (const auto& c : scheme.categories)
    for (const auto& kw : c.keywords) phrases.push_back(textnorm::join(kw));
  std::mt19937_64 rng(16);
  for (auto& ad : s.corpus.ads) {
    std::string extra = "<p>Responsibilities &amp; skills:</p><ul>";
    const int n = static_cast<int>(rng() % 12);
    for (int i = 0; i < n; ++i) extra += "<li>" + phrases[rng() % phrases.size()] + "</li>";
    ad.description_raw = extra + "</ul> " + ad.description_raw;
  }
  const auto t0 = std::chrono::steady_clock::now();
  const auto docs = textnorm::normalize_corpus(s.corpus, textnorm::NormConfig::bundled());
  const auto f = lexicon::score_corpus(docs, scheme);
  const auto [z, meta] = econo::standardize(f);
  const auto r = econo::fit_ols(econo::RegressionSpec{z, econo::model_fe(3), false}, s.corpus);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  standardized_designs.push_back(z.values);
  return {secs < 600.0 && r.n == 100000,
          "normalize + spitz5 + Model 3 on " + std::to_string(r.n) + " ads in " + fmt("%.1f", secs) + " s on " +
              std::to_string(worker_count()) + " worker(s), r2_adj " + fmt("%.4f", r.r2_adj)};
}

}  // namespace

int main() {
  criterion(1, "ols_oracle", 5, ols_oracle);
  criterion(2, "fwl_fe_equivalence", 30, fwl_equivalence);
  criterion(3, "gini_oracle", 60, gini_oracle);
  criterion(4, "intensity_oracle", 60, intensity_oracle);
  criterion(5, "coherence_cv_oracle", 60, coherence_oracle);
  criterion(6, "lda_recovery", 120, lda_recovery);
  criterion(7, "k_selection", 300, k_selection);
  criterion(8, "end_to_end_ranking", 300, end_to_end_ranking);
  criterion(9, "normalization_contract", 60, normalization_contract);
  criterion(10, "compare_determinism", 300, determinism);
  criterion(11, "probability_hygiene", 60, probability_hygiene);
  criterion(12, "throughput_100k", 600, throughput);
  std::printf("%d of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
