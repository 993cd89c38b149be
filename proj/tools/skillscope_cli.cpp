#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "skillscope/common.hpp"
#include "skillscope/compare.hpp"
#include "skillscope/corpus.hpp"
#include "skillscope/econo.hpp"
#include "skillscope/embed.hpp"
#include "skillscope/lexicon.hpp"
#include "skillscope/synth.hpp"
#include "skillscope/textnorm.hpp"
#include "skillscope/topicmodel.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace skillscope;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Globals {
  std::string workdir = ".";
  std::string config;
  std::optional<std::uint64_t> seed;
};

Globals g;

fs::path in_workdir(const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : fs::path(g.workdir) / path;
}

std::uint64_t require_seed() {
  if (!g.seed) throw Error("seed_required", "seed required");
  return *g.seed;
}

fs::path require_file(const std::string& p, const std::string& what) {
  const fs::path path = in_workdir(p);
  if (!fs::exists(path)) throw Error("missing_" + what, "missing " + what + " file: " + path.string());
  return path;
}

json config_json() {
  if (g.config.empty()) return json::object();
  json j = json::parse(read_file(in_workdir(g.config)), nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error("malformed_config", "config is not a JSON object");
  return j;
}

/// Records what a stage read and wrote, so the run can be repeated exactly.
class Manifest {
 public:
  explicit Manifest(std::string stage) : stage_(std::move(stage)) {}
  void param(const std::string& k, json v) { params_[k] = std::move(v); }
  void input(const fs::path& p) { inputs_[p.string()] = hex64(fnv1a64(read_file(p))); }
  void output(const fs::path& p, std::string_view contents) {
    write_file(p, contents);
    outputs_[p.string()] = hex64(fnv1a64(contents));
  }
  void write() const {
    json j;
    j["stage"] = stage_;
    j["version"] = kVersion;
    j["workdir"] = g.workdir;
    j["seed"] = g.seed ? json(*g.seed) : json(nullptr);
    j["config_file"] = g.config.empty() ? json(nullptr) : json(g.config);
    j["config"] = config_json();
    j["params"] = params_;
    j["inputs"] = inputs_;
    j["outputs"] = outputs_;
    write_file(in_workdir("manifest_" + stage_ + ".json"), j.dump(2) + "\n");
  }

 private:
  std::string stage_;
  json params_ = json::object();
  json inputs_ = json::object();
  json outputs_ = json::object();
};

textnorm::NormConfig norm_config(const std::string& stopwords, const std::string& lemmas) {
  if (stopwords.empty() && lemmas.empty()) return textnorm::NormConfig::bundled();
  return textnorm::NormConfig::from_files(
      stopwords.empty() ? resource_path("data/stopwords_en.txt") : in_workdir(stopwords),
      lemmas.empty() ? resource_path("data/lemmas_en.tsv") : in_workdir(lemmas));
}

corpus::Corpus load_corpus(const fs::path& p) { return corpus::load(p, corpus::format_from_extension(p)); }

lexicon::SkillScheme scheme_for(const std::string& method, const std::string& override_path) {
  if (!override_path.empty()) return lexicon::load_scheme(require_file(override_path, "scheme"));
  if (method == "spitz5" || method == "deming10") return lexicon::bundled_scheme(method);
  if (method == "disco") return lexicon::bundled_scheme("disco_nondomain");
  throw Error("unknown_method", "unknown method: " + method);
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error("bad_int_list", "not an integer list: " + s);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

struct IngestArgs {
  std::string input, format, output = "ingested.csv";
};

void run_ingest(const IngestArgs& a) {
  Manifest m("ingest");
  const fs::path in = require_file(a.input, "input");
  m.input(in);
  const auto fmt = a.format.empty() ? corpus::format_from_extension(in) : corpus::parse_format(a.format);
  auto c = corpus::load(in, fmt);
  const fs::path out = in_workdir(a.output);
  m.output(out, corpus::to_csv(c));
  json rej = json::array();
  for (const auto& r : c.rejected) rej.push_back({{"row", r.row}, {"id", r.id}, {"reason", r.reason}});
  m.output(in_workdir("ingest_log.json"),
           json{{"input_rows", c.input_rows}, {"loaded", c.ads.size()}, {"rejected", rej}}.dump(2) + "\n");
  m.param("format", fmt == corpus::Format::csv ? "csv" : "jsonl");
  m.write();
  std::printf("ingested %zu of %zu rows -> %s\n", c.ads.size(), c.input_rows, out.string().c_str());
}

struct CleanArgs {
  std::string input = "ingested.csv", output = "clean.csv", counties;
  double trim = 0.005;
};

void run_clean(const CleanArgs& a) {
  Manifest m("clean");
  const fs::path in = require_file(a.input, "input");
  m.input(in);
  auto c = load_corpus(in);
  const auto counties =
      a.counties.empty() ? corpus::CountyList::bundled() : corpus::CountyList::from_file(require_file(a.counties, "counties"));
  auto cleaned = corpus::clean(c, a.trim, counties);
  m.param("trim_quantile", a.trim);
  m.output(in_workdir(a.output), corpus::to_csv(cleaned));
  m.output(in_workdir("cleaning_log.json"), corpus::cleaning_log_json(cleaned));
  m.output(in_workdir("wage_summary.json"), corpus::to_json(corpus::summarize(cleaned)));
  m.write();
  std::printf("cleaned: %zu ads kept\n", cleaned.ads.size());
}

struct NormalizeArgs {
  std::string input = "clean.csv", output = "docs.jsonl", stopwords, lemmas;
};

void run_normalize(const NormalizeArgs& a) {
  Manifest m("normalize");
  const fs::path in = require_file(a.input, "input");
  m.input(in);
  const auto c = load_corpus(in);
  const auto cfg = norm_config(a.stopwords, a.lemmas);
  const auto docs = textnorm::normalize_corpus(c, cfg);
  m.output(in_workdir(a.output), textnorm::to_jsonl(docs));
  m.write();
  std::printf("normalized %zu docs\n", docs.size());
}

struct SkillsArgs {
  std::string method, docs = "docs.jsonl", scheme, domains, embeddings = "embeddings.bin";
  bool binary = false;
};

void run_skills(const SkillsArgs& a) {
  Manifest m("skills");
  const fs::path docs_path = require_file(a.docs, "docs");
  m.input(docs_path);
  const auto docs = textnorm::docs_from_jsonl(read_file(docs_path));
  const auto scheme = scheme_for(a.method, a.scheme);
  auto f = lexicon::score_corpus(docs, scheme, a.binary ? lexicon::FeatureKind::binary : lexicon::FeatureKind::intensity);
  f.method = a.method;
  if (a.method == "disco") {
    const fs::path emb = require_file(a.embeddings, "embeddings");
    m.input(emb);
    const auto model = embed::load_model(emb);
    const auto domains = a.domains.empty() ? lexicon::bundled_scheme("disco_domains")
                                           : lexicon::load_scheme(require_file(a.domains, "scheme"));
    const auto dom = embed::domain_features(docs, domains, model);
    Eigen::MatrixXd values(f.rows(), f.cols() + 1);
    values.col(0) = dom.features.values.col(0);
    values.rightCols(f.cols()) = f.values;
    f.values = std::move(values);
    f.feature_names.insert(f.feature_names.begin(), dom.features.feature_names[0]);
    m.output(in_workdir("domain_assignments.csv"), embed::assignments_csv(dom));
    m.output(in_workdir("domain_summary.json"), embed::per_domain_json(dom));
  }
  m.param("method", a.method);
  m.param("binary", a.binary);
  m.output(in_workdir("features_" + a.method + ".csv"), lexicon::to_csv(f));
  m.output(in_workdir("prevalence_" + a.method + ".json"), lexicon::prevalence_json(f));
  m.write();
  std::printf("%s: %lld features for %lld ads\n", a.method.c_str(), static_cast<long long>(f.cols()),
              static_cast<long long>(f.rows()));
}

struct EmbedArgs {
  std::string docs = "docs.jsonl", domains, output = "embeddings.bin";
  embed::TrainingParams p;
};

void run_embed_train(EmbedArgs a) {
  a.p.seed = require_seed();
  Manifest m("embed-train");
  const fs::path docs_path = require_file(a.docs, "docs");
  m.input(docs_path);
  const auto docs = textnorm::docs_from_jsonl(read_file(docs_path));
  const auto domains = a.domains.empty() ? lexicon::bundled_scheme("disco_domains")
                                         : lexicon::load_scheme(require_file(a.domains, "scheme"));
  const auto model = embed::train_embeddings(docs, domains, a.p);
  const fs::path out = in_workdir(a.output);
  embed::save_model(model, out);
  m.input(out);
  m.param("training", json::parse(embed::meta_json(a.p)));
  m.write();
  std::printf("trained %zu vectors of dim %d\n", model.vocab.size(), model.dim());
}

struct SelectArgs {
  std::string docs = "docs.jsonl", k_grid = "10,15,20,24,30";
  topicmodel::SelectKParams p;
};

void run_select_k(SelectArgs a) {
  a.p.seed = require_seed();
  a.p.k_grid = parse_int_list(a.k_grid);
  Manifest m("lda-select-k");
  const fs::path docs_path = require_file(a.docs, "docs");
  m.input(docs_path);
  const auto docs = textnorm::docs_from_jsonl(read_file(docs_path));
  const auto r = topicmodel::select_k(docs, a.p);
  m.param("k_grid", a.p.k_grid);
  m.param("sample_size", a.p.sample_size);
  m.param("replicates", a.p.replicates);
  m.param("min_df", a.p.min_df);
  m.param("max_df", a.p.max_df_fraction);
  m.output(in_workdir("k_selection.json"), topicmodel::to_json(r) + "\n");
  m.output(in_workdir("k_selection.csv"), topicmodel::to_csv(r));
  m.write();
  std::printf("chosen K = %d\n", r.chosen_k);
}

struct FitArgs {
  std::string docs = "docs.jsonl", prefix = "lda_model";
  int K = 0;
  int min_df = topicmodel::kDefaultMinDf;
  double max_df = topicmodel::kDefaultMaxDfFraction;
  std::optional<double> alpha;
  topicmodel::LdaParams p;
  topicmodel::CoherenceParams coherence;
};

void run_lda_fit(FitArgs a) {
  a.p.seed = require_seed();
  Manifest m("lda-fit");
  const fs::path docs_path = require_file(a.docs, "docs");
  m.input(docs_path);
  if (a.K <= 0) {
    const fs::path sel = require_file("k_selection.json", "k_selection");
    m.input(sel);
    a.K = json::parse(read_file(sel))["chosen_k"].get<int>();
  }
  a.p.K = a.K;
  a.p.alpha = a.alpha;
  const auto docs = textnorm::docs_from_jsonl(read_file(docs_path));
  const auto dtm = topicmodel::build_dtm(docs, a.min_df, a.max_df);
  const auto model = topicmodel::fit_lda(dtm, a.p);
  const auto coh = topicmodel::coherence_cv(model, dtm, a.coherence);
  const fs::path prefix = in_workdir(a.prefix);
  topicmodel::save_model(model, prefix);
  m.input(prefix.string() + ".json");
  m.output(in_workdir("theta.csv"), topicmodel::theta_csv(model));
  const auto report = topicmodel::topic_report(model, model.theta, coh.per_topic, a.coherence.top_n);
  m.output(in_workdir("topics.json"), topicmodel::to_json(report) + "\n");
  m.output(in_workdir("topics.md"), topicmodel::to_markdown(report));
  m.param("K", a.K);
  m.param("min_df", a.min_df);
  m.param("max_df", a.max_df);
  m.param("iterations", a.p.iterations);
  m.param("burn_in", a.p.burn_in);
  m.param("thin", a.p.thin);
  m.param("vocab_size", dtm.vocab.size());
  m.param("coherence_mean", coh.mean);
  m.write();
  std::printf("fitted K = %d on %zu docs, vocab %zu, mean C_V %.4f\n", a.K, dtm.n_docs(), dtm.vocab.size(), coh.mean);
}

struct RegressArgs {
  std::string method, corpus = "clean.csv", features;
  int model = 3;
  bool robust = false;
};

void run_regress(const RegressArgs& a) {
  Manifest m("regress");
  fs::path feat_path;
  lexicon::FeatureKind kind = lexicon::FeatureKind::intensity;
  if (!a.features.empty()) {
    feat_path = require_file(a.features, "features");
  } else if (a.method == "lda") {
    feat_path = require_file("theta.csv", "theta");
  } else {
    feat_path = require_file("features_" + a.method + ".csv", "features");
  }
  if (a.method.rfind("lda", 0) == 0) kind = lexicon::FeatureKind::probability;
  const fs::path corpus_path = require_file(a.corpus, "corpus");
  m.input(corpus_path);
  m.input(feat_path);
  const auto c = load_corpus(corpus_path);
  auto f = lexicon::features_from_csv(read_file(feat_path), a.method, kind);
  auto run = compare::regress_features(a.method, std::move(f), c, a.robust);
  if (!run.ok) throw Error("regression_failed", run.error);
  const auto& r = run.models[static_cast<std::size_t>(a.model - 1)];
  const auto fe = econo::model_fe(a.model);
  const std::string stem = "regression_" + a.method + "_model" + std::to_string(a.model);
  m.output(in_workdir(stem + ".json"), econo::to_json(r, fe) + "\n");
  m.output(in_workdir(stem + ".md"), econo::to_markdown({r}, {fe}, a.method, {a.model}) + "\n" + econo::interpretation_text(r));
  m.param("method", a.method);
  m.param("model", a.model);
  m.param("robust_se", a.robust);
  m.write();
  std::printf("%s model %d: r2_adj = %.4f, n = %zu\n", a.method.c_str(), a.model, r.r2_adj, r.n);
}

struct CompareArgs {
  std::string input, format, out_prefix = "report";
  std::vector<int> k_variants;
};

void run_compare(const CompareArgs& a) {
  const std::uint64_t seed = require_seed();
  Manifest m("compare");
  const fs::path in = require_file(a.input, "input");
  m.input(in);
  json raw = config_json();
  auto cfg = compare::parse_config(raw.dump(), g.config.empty() ? fs::path(g.workdir)
                                                                : in_workdir(g.config).parent_path());
  cfg.seed = seed;
  const double trim = raw.value("trim_quantile", 0.005);
  const auto counties = raw.contains("counties")
                            ? corpus::CountyList::from_file(in_workdir(raw["counties"].get<std::string>()))
                            : corpus::CountyList::bundled();
  const auto norm = norm_config(raw.value("stopwords", std::string()), raw.value("lemmas", std::string()));

  const auto fmt = a.format.empty() ? corpus::format_from_extension(in) : corpus::parse_format(a.format);
  const auto cleaned = corpus::clean(corpus::load(in, fmt), trim, counties);
  const auto docs = textnorm::normalize_corpus(cleaned, norm);
  auto report = compare::compare_all(cleaned, docs, cfg);
  if (!a.k_variants.empty()) {
    auto extra = compare::lda_k_variants(cleaned, docs, a.k_variants, cfg);
    for (auto& r : extra) report.runs.push_back(std::move(r));
    report.ranking = compare::rank_runs(report.runs);
  }
  m.output(in_workdir(a.out_prefix + ".json"), compare::to_json(report));
  m.output(in_workdir(a.out_prefix + ".md"), compare::to_markdown(report));
  m.output(in_workdir(a.out_prefix + "_ranking.csv"), compare::ranking_csv(report));
  m.param("trim_quantile", trim);
  m.param("k_variants", a.k_variants);
  m.write();
  for (std::size_t i = 0; i < report.ranking.size(); ++i) {
    const auto& run = report.runs[report.ranking[i]];
    std::printf("%zu. %s r2_adj(Model3) = %.4f\n", i + 1, run.method.c_str(), run.r2_adj_model3());
  }
  for (const auto& run : report.runs)
    if (!run.ok) std::printf("failed: %s (%s)\n", run.method.c_str(), run.error.c_str());
}

struct SynthArgs {
  std::string output = "synth_corpus.csv";
  std::size_t n_docs = 0;
  int K = 0;
  std::optional<double> target_r2;
};

void run_synth(const SynthArgs& a) {
  Manifest m("synth");
  json raw = config_json();
  synth::SynthConfig cfg = raw.contains("synth") ? synth::parse_config(raw["synth"].dump()) : synth::SynthConfig{};
  cfg.seed = require_seed();
  if (a.n_docs) cfg.n_docs = a.n_docs;
  if (a.K) {
    cfg.K_true = a.K;
    cfg.beta_topic.clear();
  }
  if (a.target_r2) cfg.noise_sd = synth::noise_sd_for_r2(cfg, *a.target_r2);
  const auto s = synth::generate(cfg);
  const fs::path out = in_workdir(a.output);
  m.output(out, fs::path(out).extension() == ".jsonl" ? corpus::to_jsonl(s.corpus) : corpus::to_csv(s.corpus));
  m.output(in_workdir("synth_truth.json"), synth::truth_json(cfg, s.truth));
  m.output(in_workdir("synth_config.json"), synth::config_json(cfg) + "\n");
  m.output(in_workdir("mismatched_scheme.json"), lexicon::to_json(synth::mismatched_dictionary(cfg)) + "\n");
  m.output(in_workdir("aligned_scheme.json"), lexicon::to_json(synth::aligned_dictionary(cfg, s.truth)) + "\n");
  m.param("n_docs", cfg.n_docs);
  m.param("K_true", cfg.K_true);
  m.param("noise_sd", cfg.noise_sd);
  m.write();
  std::printf("generated %zu synthetic ads (K_true = %d, noise sd %.4f)\n", cfg.n_docs, cfg.K_true, cfg.noise_sd);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"skillscope: skill measures from job ads and their wage premia"};
  app.set_version_flag("--version", std::string("skillscope ") + kVersion);
  app.require_subcommand(1);
  app.add_option("--workdir", g.workdir, "Directory that relative paths resolve against");
  app.add_option("--config", g.config, "Run configuration (JSON)");
  app.add_option("--seed", g.seed, "Random seed (required by stochastic subcommands)");
  app.fallthrough();

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Load a raw CSV/JSONL corpus and validate rows");
  c_ingest->add_option("--input", ingest.input, "Raw corpus file")->required();
  c_ingest->add_option("--format", ingest.format, "csv or jsonl (default: from extension)");
  c_ingest->add_option("--output", ingest.output, "Validated corpus (CSV)")->capture_default_str();

  CleanArgs clean;
  auto* c_clean = app.add_subcommand("clean", "Drop incomplete, duplicate, non-UK and outlier-wage ads");
  c_clean->add_option("--input", clean.input, "Corpus")->capture_default_str();
  c_clean->add_option("--output", clean.output, "Cleaned corpus")->capture_default_str();
  c_clean->add_option("--trim", clean.trim, "Two-sided wage trim quantile")->capture_default_str();
  c_clean->add_option("--counties", clean.counties, "Override UK county list");

  NormalizeArgs norm;
  auto* c_norm = app.add_subcommand("normalize", "Tokenize descriptions");
  c_norm->add_option("--input", norm.input, "Corpus")->capture_default_str();
  c_norm->add_option("--output", norm.output, "Normalized docs (JSONL)")->capture_default_str();
  c_norm->add_option("--stopwords", norm.stopwords, "Stopword list override");
  c_norm->add_option("--lemmas", norm.lemmas, "Lemma table override");

  SkillsArgs skills;
  auto* c_skills = app.add_subcommand("skills", "Score keyword skill intensities");
  c_skills->add_option("--method", skills.method, "spitz5, deming10 or disco")
      ->required()
      ->check(CLI::IsMember({"spitz5", "deming10", "disco"}));
  c_skills->add_option("--docs", skills.docs, "Normalized docs")->capture_default_str();
  c_skills->add_option("--scheme", skills.scheme, "Scheme file override");
  c_skills->add_option("--domains", skills.domains, "Domain scheme for disco");
  c_skills->add_option("--embeddings", skills.embeddings, "Embedding model for disco")->capture_default_str();
  c_skills->add_flag("--binary", skills.binary, "0/1 presence instead of intensity");

  EmbedArgs emb;
  auto* c_emb = app.add_subcommand("embed-train", "Train skip-gram vectors for domain matching");
  c_emb->add_option("--docs", emb.docs, "Normalized docs")->capture_default_str();
  c_emb->add_option("--domains", emb.domains, "Domain scheme");
  c_emb->add_option("--output", emb.output, "Model file")->capture_default_str();
  c_emb->add_option("--dim", emb.p.dim, "Vector size")->capture_default_str();
  c_emb->add_option("--window", emb.p.window, "Context window")->capture_default_str();
  c_emb->add_option("--epochs", emb.p.epochs, "Epochs")->capture_default_str();
  c_emb->add_option("--negative", emb.p.negative, "Negative samples")->capture_default_str();
  c_emb->add_option("--min-count", emb.p.min_count, "Minimum token count")->capture_default_str();
  c_emb->add_option("--lr", emb.p.learning_rate, "Initial learning rate")->capture_default_str();
  c_emb->add_option("--subsample", emb.p.subsample, "Frequent-word subsampling threshold")->capture_default_str();

  SelectArgs sel;
  auto* c_sel = app.add_subcommand("lda-select-k", "Choose the topic count by C_V coherence");
  c_sel->add_option("--docs", sel.docs, "Normalized docs")->capture_default_str();
  c_sel->add_option("--k-grid", sel.k_grid, "Comma-separated topic counts")->capture_default_str();
  c_sel->add_option("--sample-size", sel.p.sample_size, "Docs per replicate (0: all)")->capture_default_str();
  c_sel->add_option("--replicates", sel.p.replicates, "Samples per K")->capture_default_str();
  c_sel->add_option("--min-df", sel.p.min_df, "Minimum document frequency")->capture_default_str();
  c_sel->add_option("--max-df", sel.p.max_df_fraction, "Maximum document share")->capture_default_str();
  c_sel->add_option("--iterations", sel.p.lda.iterations, "Gibbs sweeps per fit")->capture_default_str();
  c_sel->add_option("--burn-in", sel.p.lda.burn_in, "Burn-in sweeps")->capture_default_str();
  c_sel->add_option("--thin", sel.p.lda.thin, "Sample spacing")->capture_default_str();
  c_sel->add_option("--top-n", sel.p.coherence.top_n, "Top words per topic")->capture_default_str();
  c_sel->add_option("--window", sel.p.coherence.window, "Coherence window")->capture_default_str();

  FitArgs fit;
  auto* c_fit = app.add_subcommand("lda-fit", "Fit LDA on all docs and write theta");
  c_fit->add_option("--docs", fit.docs, "Normalized docs")->capture_default_str();
  c_fit->add_option("--k", fit.K, "Topic count (default: k_selection.json)");
  c_fit->add_option("--prefix", fit.prefix, "Model file prefix")->capture_default_str();
  c_fit->add_option("--min-df", fit.min_df, "Minimum document frequency")->capture_default_str();
  c_fit->add_option("--max-df", fit.max_df, "Maximum document share")->capture_default_str();
  c_fit->add_option("--alpha", fit.alpha, "Doc-topic prior (default 50/K)");
  c_fit->add_option("--beta", fit.p.beta, "Topic-word prior")->capture_default_str();
  c_fit->add_option("--iterations", fit.p.iterations, "Gibbs sweeps")->capture_default_str();
  c_fit->add_option("--burn-in", fit.p.burn_in, "Burn-in sweeps")->capture_default_str();
  c_fit->add_option("--thin", fit.p.thin, "Sample spacing")->capture_default_str();
  c_fit->add_option("--top-n", fit.coherence.top_n, "Top words per topic")->capture_default_str();
  c_fit->add_option("--window", fit.coherence.window, "Coherence window")->capture_default_str();
  c_fit->add_flag("--verify-counts", fit.p.verify_counts, "Re-check Gibbs count tables every sweep");

  RegressArgs reg;
  auto* c_reg = app.add_subcommand("regress", "Regress log wage on standardized skill features");
  c_reg->add_option("--method", reg.method, "spitz5, deming10, disco, lda or a custom name")->required();
  c_reg->add_option("--model", reg.model, "1: no FE, 2: job type and month, 3: plus county")->capture_default_str()
      ->check(CLI::Range(1, 3));
  c_reg->add_option("--corpus", reg.corpus, "Cleaned corpus")->capture_default_str();
  c_reg->add_option("--features", reg.features, "Feature CSV (default: features_<method>.csv or theta.csv)");
  c_reg->add_flag("--robust", reg.robust, "HC1 standard errors");

  CompareArgs cmp;
  auto* c_cmp = app.add_subcommand("compare", "Run every method on one corpus and rank by adjusted R2");
  c_cmp->add_option("--input", cmp.input, "Raw corpus")->required();
  c_cmp->add_option("--format", cmp.format, "csv or jsonl (default: from extension)");
  c_cmp->add_option("--out", cmp.out_prefix, "Report file prefix")->capture_default_str();
  c_cmp->add_option("--lda-k", cmp.k_variants, "Extra LDA topic counts to refit")->delimiter(',');

  SynthArgs syn;
  auto* c_syn = app.add_subcommand("synth", "Generate a synthetic corpus with planted structure");
  c_syn->add_option("--output", syn.output, "Corpus file")->capture_default_str();
  c_syn->add_option("--n-docs", syn.n_docs, "Number of ads");
  c_syn->add_option("--k", syn.K, "Planted topic count");
  c_syn->add_option("--target-r2", syn.target_r2, "Calibrate noise to this design R2");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*c_ingest) run_ingest(ingest);
    else if (*c_clean) run_clean(clean);
    else if (*c_norm) run_normalize(norm);
    else if (*c_skills) run_skills(skills);
    else if (*c_emb) run_embed_train(emb);
    else if (*c_sel) run_select_k(sel);
    else if (*c_fit) run_lda_fit(fit);
    else if (*c_reg) run_regress(reg);
    else if (*c_cmp) run_compare(cmp);
    else if (*c_syn) run_synth(syn);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 2;
  }
  return 0;
}
