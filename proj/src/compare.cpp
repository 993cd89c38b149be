#include "skillscope/compare.hpp"

#include <algorithm>
#include <set>

#include "json.hpp"

namespace skillscope::compare {

using nlohmann::json;

namespace {

const std::set<std::string> kBuiltinLexicon{"spitz5", "deming10"};

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw Error("unknown_config_key", "unknown key '" + it.key() + "' in " + where);
}

void read_lda_params(const json& j, topicmodel::LdaParams& p, const std::string& where) {
  reject_unknown(j, {"alpha", "beta", "iterations", "burn_in", "thin"}, where);
  if (j.contains("alpha") && !j["alpha"].is_null()) p.alpha = j["alpha"].get<double>();
  p.beta = j.value("beta", p.beta);
  p.iterations = j.value("iterations", p.iterations);
  p.burn_in = j.value("burn_in", p.burn_in);
  p.thin = j.value("thin", p.thin);
}

json lda_params_json(const topicmodel::LdaParams& p) {
  return {{"alpha", p.alpha ? json(*p.alpha) : json(nullptr)},
          {"beta", p.beta},
          {"iterations", p.iterations},
          {"burn_in", p.burn_in},
          {"thin", p.thin}};
}

}  // namespace

CompareConfig parse_config(std::string_view json_text, const std::filesystem::path& base) {
  json j = json::parse(json_text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error("malformed_config", "run configuration is not a JSON object");
  CompareConfig cfg;
  try {
    reject_unknown(j, {"methods", "schemes", "disco", "embedding", "lda", "robust_se", "seed", "trim_quantile",
                       "stopwords", "lemmas", "counties", "threads"},
                   "config");
    if (j.contains("methods")) cfg.methods = j["methods"].get<std::vector<std::string>>();
    auto resolve = [&](const std::string& p) {
      std::filesystem::path path(p);
      return path.is_absolute() ? path : base / path;
    };
    if (j.contains("schemes"))
      for (auto it = j["schemes"].begin(); it != j["schemes"].end(); ++it)
        cfg.schemes.emplace_back(it.key(), lexicon::load_scheme(resolve(it.value().get<std::string>())));
    if (j.contains("disco")) {
      const auto& d = j["disco"];
      reject_unknown(d, {"nondomain", "domains"}, "disco");
      if (d.contains("nondomain"))
        cfg.schemes.emplace_back("disco", lexicon::load_scheme(resolve(d["nondomain"].get<std::string>())));
      if (d.contains("domains")) cfg.disco_domains = lexicon::load_scheme(resolve(d["domains"].get<std::string>()));
    }
    if (j.contains("embedding")) {
      const auto& e = j["embedding"];
      reject_unknown(e, {"dim", "window", "epochs", "negative", "min_count", "learning_rate", "subsample"}, "embedding");
      auto& p = cfg.embedding;
      p.dim = e.value("dim", p.dim);
      p.window = e.value("window", p.window);
      p.epochs = e.value("epochs", p.epochs);
      p.negative = e.value("negative", p.negative);
      p.min_count = e.value("min_count", p.min_count);
      p.learning_rate = e.value("learning_rate", p.learning_rate);
      p.subsample = e.value("subsample", p.subsample);
    }
    if (j.contains("lda")) {
      const auto& l = j["lda"];
      reject_unknown(l, {"K", "k_grid", "sample_size", "replicates", "min_df", "max_df", "fit", "select", "top_n",
                         "window"},
                     "lda");
      auto& c = cfg.lda;
      if (l.contains("K") && !l["K"].is_null()) c.K = l["K"].get<int>();
      if (l.contains("k_grid")) c.k_grid = l["k_grid"].get<std::vector<int>>();
      c.sample_size = l.value("sample_size", c.sample_size);
      c.replicates = l.value("replicates", c.replicates);
      c.min_df = l.value("min_df", c.min_df);
      c.max_df_fraction = l.value("max_df", c.max_df_fraction);
      if (l.contains("fit")) read_lda_params(l["fit"], c.fit, "lda.fit");
      if (l.contains("select")) read_lda_params(l["select"], c.select, "lda.select");
      c.coherence.top_n = l.value("top_n", c.coherence.top_n);
      c.coherence.window = l.value("window", c.coherence.window);
    }
    cfg.robust_se = j.value("robust_se", cfg.robust_se);
    cfg.seed = j.value("seed", cfg.seed);
  } catch (const json::exception& e) {
    throw Error("malformed_config", std::string("bad value in run configuration: ") + e.what());
  }
  return cfg;
}

std::string config_json(const CompareConfig& cfg) {
  json j;
  j["methods"] = cfg.methods;
  j["schemes"] = json::object();
  for (const auto& [name, s] : cfg.schemes)
    j["schemes"][name] = {{"name", s.name}, {"categories", s.categories.size()}, {"keywords", s.keyword_count()}};
  if (cfg.disco_domains)
    j["disco_domains"] = {{"name", cfg.disco_domains->name},
                          {"categories", cfg.disco_domains->categories.size()},
                          {"keywords", cfg.disco_domains->keyword_count()}};
  j["embedding"] = json::parse(embed::meta_json(cfg.embedding));
  const auto& l = cfg.lda;
  j["lda"] = {{"K", l.K ? json(*l.K) : json(nullptr)},
              {"k_grid", l.k_grid},
              {"sample_size", l.sample_size},
              {"replicates", l.replicates},
              {"min_df", l.min_df},
              {"max_df", l.max_df_fraction},
              {"fit", lda_params_json(l.fit)},
              {"select", lda_params_json(l.select)},
              {"top_n", l.coherence.top_n},
              {"window", l.coherence.window}};
  j["robust_se"] = cfg.robust_se;
  j["seed"] = cfg.seed;
  return j.dump(2);
}

MethodRun regress_features(std::string method, lexicon::FeatureMatrix features, const corpus::Corpus& c,
                           bool robust_se) {
  MethodRun run;
  run.method = std::move(method);
  run.features = std::move(features);
  try {
    lexicon::FeatureMatrix design = run.features;
    if (design.kind == lexicon::FeatureKind::probability && design.cols() > 1) {
      // rows sum to one: drop the last topic as the reference category
      run.dropped_column = design.feature_names.back();
      design.feature_names.pop_back();
      design.values.conservativeResize(Eigen::NoChange, design.cols() - 1);
    }
    auto [z, meta] = econo::standardize(design);
    run.standardization = std::move(meta);
    run.regressors = z.feature_names;
    for (int m = 1; m <= 3; ++m) {
      econo::RegressionSpec spec{z, econo::model_fe(m), robust_se};
      run.models[static_cast<std::size_t>(m - 1)] = econo::fit_ols(spec, c);
    }
    run.ok = true;
  } catch (const Error& e) {
    run.error = e.code() + ": " + e.what();
  }
  return run;
}

namespace {

std::optional<lexicon::SkillScheme> configured_scheme(const CompareConfig& cfg, const std::string& name) {
  for (const auto& [n, s] : cfg.schemes)
    if (n == name) return s;
  return std::nullopt;
}

MethodRun run_lda(const std::string& name, int K, const corpus::Corpus& c,
                  const std::vector<textnorm::NormalizedDoc>& docs, const CompareConfig& cfg,
                  std::optional<topicmodel::SelectKResult> selection) {
  const auto dtm = topicmodel::build_dtm(docs, cfg.lda.min_df, cfg.lda.max_df_fraction);
  topicmodel::LdaParams p = cfg.lda.fit;
  p.K = K;
  p.seed = cfg.seed;
  auto model = topicmodel::fit_lda(dtm, p);
  auto run = regress_features(name, topicmodel::theta_features(model), c, cfg.robust_se);
  run.coherence = topicmodel::coherence_cv(model, dtm, cfg.lda.coherence);
  run.k_selection = std::move(selection);
  run.lda = std::move(model);
  return run;
}

}  // namespace

MethodRun run_method(const std::string& method, const corpus::Corpus& c,
                     const std::vector<textnorm::NormalizedDoc>& docs, const CompareConfig& cfg) {
  try {
    if (docs.size() != c.ads.size()) throw Error("docs_misaligned", "normalized docs do not match the corpus");
    if (method == "lda") {
      std::optional<topicmodel::SelectKResult> selection;
      int K = cfg.lda.K.value_or(0);
      if (!cfg.lda.K) {
        topicmodel::SelectKParams sp;
        sp.k_grid = cfg.lda.k_grid;
        sp.sample_size = cfg.lda.sample_size;
        sp.replicates = cfg.lda.replicates;
        sp.min_df = cfg.lda.min_df;
        sp.max_df_fraction = cfg.lda.max_df_fraction;
        sp.lda = cfg.lda.select;
        sp.coherence = cfg.lda.coherence;
        sp.seed = cfg.seed;
        selection = topicmodel::select_k(docs, sp);
        K = selection->chosen_k;
      }
      return run_lda("lda", K, c, docs, cfg, std::move(selection));
    }
    if (method == "disco") {
      auto nondomain = configured_scheme(cfg, "disco").value_or(lexicon::bundled_scheme("disco_nondomain"));
      auto domains = cfg.disco_domains.value_or(lexicon::bundled_scheme("disco_domains"));
      embed::TrainingParams ep = cfg.embedding;
      ep.seed = cfg.seed;
      const auto model = embed::train_embeddings(docs, domains, ep);
      const auto dom = embed::domain_features(docs, domains, model);
      auto f = lexicon::score_corpus(docs, nondomain);
      // the domain column leads, as in the published table
      Eigen::MatrixXd values(f.rows(), f.cols() + 1);
      values.col(0) = dom.features.values.col(0);
      values.rightCols(f.cols()) = f.values;
      f.values = std::move(values);
      f.feature_names.insert(f.feature_names.begin(), dom.features.feature_names[0]);
      f.method = "disco";
      return regress_features("disco", std::move(f), c, cfg.robust_se);
    }
    auto scheme = configured_scheme(cfg, method);
    if (!scheme) {
      if (!kBuiltinLexicon.count(method)) throw Error("unknown_method", "no scheme configured for method " + method);
      scheme = lexicon::bundled_scheme(method);
    }
    auto f = lexicon::score_corpus(docs, *scheme);
    f.method = method;
    return regress_features(method, std::move(f), c, cfg.robust_se);
  } catch (const Error& e) {
    MethodRun run;
    run.method = method;
    run.error = e.code() + ": " + e.what();
    return run;
  }
}

std::vector<std::size_t> rank_runs(const std::vector<MethodRun>& runs) {
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < runs.size(); ++i)
    if (runs[i].ok) order.push_back(i);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ra = runs[a].r2_adj_model3(), rb = runs[b].r2_adj_model3();
    if (ra != rb) return ra > rb;
    return runs[a].method < runs[b].method;
  });
  return order;
}

ComparisonReport compare_all(const corpus::Corpus& c, const std::vector<textnorm::NormalizedDoc>& docs,
                             const CompareConfig& cfg) {
  ComparisonReport r;
  r.corpus_hash = corpus::content_hash(c);
  r.n_ads = c.ads.size();
  r.config = config_json(cfg);
  for (const auto& m : cfg.methods) r.runs.push_back(run_method(m, c, docs, cfg));
  r.ranking = rank_runs(r.runs);
  return r;
}

std::vector<MethodRun> lda_k_variants(const corpus::Corpus& c, const std::vector<textnorm::NormalizedDoc>& docs,
                                      const std::vector<int>& k_list, const CompareConfig& cfg) {
  std::vector<MethodRun> runs;
  for (int K : k_list) {
    const std::string name = "lda" + std::to_string(K);
    try {
      runs.push_back(run_lda(name, K, c, docs, cfg, std::nullopt));
    } catch (const Error& e) {
      MethodRun run;
      run.method = name;
      run.error = e.code() + ": " + e.what();
      runs.push_back(std::move(run));
    }
  }
  return runs;
}

namespace {

json run_json(const MethodRun& run) {
  json j;
  j["method"] = run.method;
  j["ok"] = run.ok;
  if (!run.ok) {
    j["error"] = run.error;
    return j;
  }
  j["features"] = run.features.feature_names;
  j["regressors"] = run.regressors;
  j["dropped_column"] = run.dropped_column ? json(*run.dropped_column) : json(nullptr);
  j["standardization"] = json::array();
  for (std::size_t i = 0; i < run.standardization.names.size(); ++i)
    j["standardization"].push_back({{"name", run.standardization.names[i]},
                                    {"mean", run.standardization.mean(static_cast<Eigen::Index>(i))},
                                    {"sd", run.standardization.sd(static_cast<Eigen::Index>(i))}});
  j["models"] = json::array();
  for (int m = 0; m < 3; ++m)
    j["models"].push_back(json::parse(econo::to_json(run.models[static_cast<std::size_t>(m)], econo::model_fe(m + 1))));
  if (run.lda) j["lda"] = {{"K", run.lda->K}, {"alpha", run.lda->alpha}, {"beta", run.lda->beta}};
  if (run.k_selection) j["k_selection"] = json::parse(topicmodel::to_json(*run.k_selection));
  if (run.coherence) j["coherence"] = {{"per_topic", run.coherence->per_topic}, {"mean", run.coherence->mean}};
  return j;
}

}  // namespace

std::string to_json(const ComparisonReport& r) {
  json j;
  j["corpus_hash"] = hex64(r.corpus_hash);
  j["n_ads"] = r.n_ads;
  j["config"] = json::parse(r.config);
  j["ranking"] = json::array();
  for (std::size_t i = 0; i < r.ranking.size(); ++i) {
    const auto& run = r.runs[r.ranking[i]];
    j["ranking"].push_back({{"rank", i + 1}, {"method", run.method}, {"r2_adj_model3", run.r2_adj_model3()}});
  }
  j["methods"] = json::array();
  for (const auto& run : r.runs) j["methods"].push_back(run_json(run));
  return j.dump(2) + "\n";
}

std::string to_markdown(const ComparisonReport& r) {
  std::string out = "# Skill measure comparison\n\n";
  out += "Corpus: " + std::to_string(r.n_ads) + " ads, hash " + hex64(r.corpus_hash) + "\n\n";
  out += "## Ranking by Model 3 adjusted R2\n\n| Rank | Method | Features | R2adj Model1 | R2adj Model2 | R2adj Model3 |\n";
  out += "|---:|---|---:|---:|---:|---:|\n";
  for (std::size_t i = 0; i < r.ranking.size(); ++i) {
    const auto& run = r.runs[r.ranking[i]];
    out += "| " + std::to_string(i + 1) + " | " + run.method + " | " + std::to_string(run.regressors.size()) + " | " +
           fixed(run.models[0].r2_adj, 3) + " | " + fixed(run.models[1].r2_adj, 3) + " | " +
           fixed(run.models[2].r2_adj, 3) + " |\n";
  }
  for (const auto& run : r.runs)
    if (!run.ok) out += "\nFailed: " + run.method + " (" + run.error + ")\n";
  for (const auto& run : r.runs) {
    if (!run.ok) continue;
    std::vector<econo::RegressionResult> models(run.models.begin(), run.models.end());
    out += "\n" + econo::to_markdown(models, {econo::model_fe(1), econo::model_fe(2), econo::model_fe(3)}, run.method);
    if (run.dropped_column) out += "\nReference category (omitted): " + *run.dropped_column + "\n";
  }
  return out;
}

std::string ranking_csv(const ComparisonReport& r) {
  std::string out = csv_line({"rank", "method", "n_features", "r2_adj_model1", "r2_adj_model2", "r2_adj_model3"});
  for (std::size_t i = 0; i < r.ranking.size(); ++i) {
    const auto& run = r.runs[r.ranking[i]];
    out += csv_line({std::to_string(i + 1), run.method, std::to_string(run.regressors.size()),
                     format_double(run.models[0].r2_adj), format_double(run.models[1].r2_adj),
                     format_double(run.models[2].r2_adj)});
  }
  return out;
}

}  // namespace skillscope::compare
