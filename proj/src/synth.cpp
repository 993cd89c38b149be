#include "skillscope/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <cstdio>
#include <random>

#include "json.hpp"

namespace skillscope::synth {

using nlohmann::json;

namespace {

enum Stream : std::uint64_t { kPhi = 1, kDocs = 2, kTokens = 3, kFixedEffects = 4, kNoise = 5, kDesign = 6 };

std::mt19937_64 stream(std::uint64_t seed, Stream s) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(s)};
  return std::mt19937_64(seq);
}

std::vector<double> dirichlet(std::mt19937_64& rng, int k, double alpha) {
  std::gamma_distribution<double> gamma(alpha, 1.0);
  std::vector<double> v(static_cast<std::size_t>(k));
  double sum = 0.0;
  do {
    sum = 0.0;
    for (auto& x : v) sum += (x = gamma(rng));
  } while (!(sum > 0.0));
  for (auto& x : v) x /= sum;
  return v;
}

int draw(const std::vector<double>& cumulative, std::mt19937_64& rng) {
  const double u = uniform01(rng) * cumulative.back();
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return static_cast<int>(std::min<std::ptrdiff_t>(it - cumulative.begin(),
                                                   static_cast<std::ptrdiff_t>(cumulative.size()) - 1));
}

std::vector<double> cumsum(const double* p, std::size_t n) {
  std::vector<double> c(n);
  std::partial_sum(p, p + n, c.begin());
  return c;
}

int block_of(int word, int V, int K) { return static_cast<int>(static_cast<long>(word) * K / V); }

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return lo + static_cast<int>(uniform01(rng) * static_cast<double>(hi - lo + 1));
}

struct FeDraw {
  int county, month, job_type, day;
};

FeDraw draw_fe(const SynthConfig& cfg, std::mt19937_64& rng) {
  FeDraw f;
  f.county = uniform_int(rng, 0, static_cast<int>(cfg.counties.size()) - 1);
  f.month = uniform_int(rng, 1, 12);
  f.job_type = uniform_int(rng, 0, 3);
  f.day = uniform_int(rng, 1, 28);
  return f;
}

double signal_of(const SynthConfig& cfg, const std::vector<double>& betas, const std::vector<double>& months,
                 const double* theta, const FeDraw& f) {
  double s = cfg.beta0;
  for (int k = 0; k < cfg.K_true; ++k) s += betas[static_cast<std::size_t>(k)] * theta[k];
  s += cfg.county_effects[static_cast<std::size_t>(f.county)];
  s += months[static_cast<std::size_t>(f.month - 1)];
  s += cfg.job_type_effects[static_cast<std::size_t>(f.job_type)];
  return s;
}

}  // namespace

std::vector<double> SynthConfig::topic_betas() const {
  if (!beta_topic.empty()) return beta_topic;
  std::vector<double> b(static_cast<std::size_t>(K_true), 0.0);
  for (int k = 0; k < K_true && K_true > 1; ++k) b[static_cast<std::size_t>(k)] = -0.6 + 1.2 * k / (K_true - 1);
  return b;
}

std::vector<double> SynthConfig::months() const {
  if (!month_effects.empty()) return month_effects;
  std::vector<double> m(12);
  for (int i = 0; i < 12; ++i) m[static_cast<std::size_t>(i)] = 0.03 * std::sin(2.0 * M_PI * i / 12.0);
  return m;
}

void validate(const SynthConfig& cfg) {
  auto fail = [](const std::string& why) { throw Error("invalid_synth_config", why); };
  if (cfg.n_docs == 0) fail("n_docs must be positive");
  if (cfg.K_true < 1) fail("K_true must be >= 1");
  if (cfg.vocab_size < cfg.K_true || cfg.vocab_size > 26 * 26 * 26) fail("vocab_size must lie in [K_true, 17576]");
  if (cfg.doc_length_min < 1 || cfg.doc_length_max < cfg.doc_length_min) fail("bad doc length range");
  if (!(cfg.alpha_true > 0.0) || !(cfg.word_concentration > 0.0)) fail("concentrations must be positive");
  if (!(cfg.leakage >= 0.0 && cfg.leakage < 1.0)) fail("leakage must lie in [0, 1)");
  if (cfg.K_true == 1 && cfg.leakage > 0.0 && cfg.vocab_size == 1) fail("leakage needs words outside the block");
  if (!(cfg.noise_sd >= 0.0)) fail("noise_sd must be >= 0");
  if (cfg.counties.empty() || cfg.counties.size() != cfg.county_effects.size())
    fail("one effect per county required");
  if (cfg.job_type_effects.size() != 4) fail("four job type effects required");
  if (!cfg.month_effects.empty() && cfg.month_effects.size() != 12) fail("twelve month effects required");
  if (!cfg.beta_topic.empty() && static_cast<int>(cfg.beta_topic.size()) != cfg.K_true)
    fail("one beta per planted topic required");
}

std::string word(int i) {
  std::string w = "zx";
  w += static_cast<char>('a' + (i / 676) % 26);
  w += static_cast<char>('a' + (i / 26) % 26);
  w += static_cast<char>('a' + i % 26);
  return w;
}

std::vector<int> GroundTruth::dominant() const {
  std::vector<int> d(static_cast<std::size_t>(theta.rows()));
  for (Eigen::Index i = 0; i < theta.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < theta.cols(); ++k)
      if (theta(i, k) > theta(i, best)) best = k;
    d[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return d;
}

std::vector<int> GroundTruth::top_words(int k, int top_n) const {
  std::vector<int> ids(static_cast<std::size_t>(phi.cols()));
  std::iota(ids.begin(), ids.end(), 0);
  std::stable_sort(ids.begin(), ids.end(), [&](int a, int b) { return phi(k, a) > phi(k, b); });
  ids.resize(std::min<std::size_t>(ids.size(), static_cast<std::size_t>(top_n)));
  return ids;
}

namespace {

Eigen::MatrixXd planted_phi(const SynthConfig& cfg) {
  const int K = cfg.K_true, V = cfg.vocab_size;
  auto rng = stream(cfg.seed, kPhi);
  Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(K, V);
  for (int k = 0; k < K; ++k) {
    std::vector<int> inside, outside;
    for (int w = 0; w < V; ++w) (block_of(w, V, K) == k ? inside : outside).push_back(w);
    const auto weights = dirichlet(rng, static_cast<int>(inside.size()), cfg.word_concentration);
    const double leak = outside.empty() ? 0.0 : cfg.leakage;
    for (std::size_t i = 0; i < inside.size(); ++i) phi(k, inside[i]) = (1.0 - leak) * weights[i];
    for (int w : outside) phi(k, w) = leak / static_cast<double>(outside.size());
  }
  return phi;
}

void draw_tokens(const SynthConfig& cfg, const Eigen::MatrixXd& theta, const Eigen::MatrixXd& phi,
                 std::vector<std::vector<int>>& words, std::vector<std::vector<int>>* assignments) {
  const int K = static_cast<int>(phi.rows());
  const auto V = static_cast<std::size_t>(phi.cols());
  std::vector<std::vector<double>> word_cdf;
  for (int k = 0; k < K; ++k) {
    const Eigen::RowVectorXd row = phi.row(k);
    word_cdf.push_back(cumsum(row.data(), V));
  }
  auto rng = stream(cfg.seed, kTokens);
  const auto n = static_cast<std::size_t>(theta.rows());
  words.assign(n, {});
  if (assignments) assignments->assign(n, {});
  for (std::size_t d = 0; d < n; ++d) {
    const Eigen::RowVectorXd t = theta.row(static_cast<Eigen::Index>(d));
    const auto topic_cdf = cumsum(t.data(), static_cast<std::size_t>(K));
    const int len = uniform_int(rng, cfg.doc_length_min, cfg.doc_length_max);
    for (int i = 0; i < len; ++i) {
      const int z = draw(topic_cdf, rng);
      words[d].push_back(draw(word_cdf[static_cast<std::size_t>(z)], rng));
      if (assignments) (*assignments)[d].push_back(z);
    }
  }
}

}  // namespace

SynthCorpus generate(const SynthConfig& cfg) {
  validate(cfg);
  const int K = cfg.K_true, V = cfg.vocab_size;
  const auto n = cfg.n_docs;
  SynthCorpus out;
  auto& t = out.truth;
  for (int w = 0; w < V; ++w) t.vocab.push_back(word(w));
  t.phi = planted_phi(cfg);

  auto doc_rng = stream(cfg.seed, kDocs);
  t.theta.resize(static_cast<Eigen::Index>(n), K);
  for (std::size_t d = 0; d < n; ++d) {
    const auto th = dirichlet(doc_rng, K, cfg.alpha_true);
    for (int k = 0; k < K; ++k) t.theta(static_cast<Eigen::Index>(d), k) = th[static_cast<std::size_t>(k)];
  }
  draw_tokens(cfg, t.theta, t.phi, t.words, &t.assignments);

  auto fe_rng = stream(cfg.seed, kFixedEffects);
  auto noise_rng = stream(cfg.seed, kNoise);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto betas = cfg.topic_betas();
  const auto months = cfg.months();
  t.signal.resize(static_cast<Eigen::Index>(n));
  t.noise.resize(static_cast<Eigen::Index>(n));

  auto& c = out.corpus;
  c.source = "synth:seed=" + std::to_string(cfg.seed);
  c.input_rows = n;
  char id[32];
  for (std::size_t d = 0; d < n; ++d) {
    const FeDraw f = draw_fe(cfg, fe_rng);
    t.county.push_back(f.county);
    t.month.push_back(f.month);
    t.job_type.push_back(f.job_type);
    const Eigen::RowVectorXd th = t.theta.row(static_cast<Eigen::Index>(d));
    const double s = signal_of(cfg, betas, months, th.data(), f);
    const double e = cfg.noise_sd * normal(noise_rng);
    t.signal(static_cast<Eigen::Index>(d)) = s;
    t.noise(static_cast<Eigen::Index>(d)) = e;

    corpus::JobAd ad;
    std::snprintf(id, sizeof id, "syn%07zu", d + 1);
    ad.id = id;
    ad.title = "Synthetic role " + std::to_string(d + 1);
    ad.company = "Synthetic employer " + std::to_string(d % 97 + 1);
    ad.county = cfg.counties[static_cast<std::size_t>(f.county)];
    ad.posting_date = corpus::Date{cfg.year, f.month, f.day};
    ad.job_type.hours = f.job_type / 2 ? corpus::Hours::part_time : corpus::Hours::full_time;
    ad.job_type.contract = f.job_type % 2 ? corpus::Contract::temporary : corpus::Contract::permanent;
    ad.wage = std::exp(s + e);
    std::string text;
    for (int w : t.words[d]) {
      if (!text.empty()) text += ' ';
      text += t.vocab[static_cast<std::size_t>(w)];
    }
    ad.description_raw = std::move(text);
    c.ads.push_back(std::move(ad));
  }
  const auto dom = t.dominant();
  for (std::size_t d = 0; d < n; ++d) c.ads[d].category = "Planted topic " + std::to_string(dom[d] + 1);
  return out;
}

std::vector<std::vector<int>> regenerate_tokens(const SynthConfig& cfg, const GroundTruth& truth) {
  std::vector<std::vector<int>> words;
  draw_tokens(cfg, truth.theta, truth.phi, words, nullptr);
  return words;
}

double design_r2(const SynthConfig& cfg, std::size_t draws) {
  validate(cfg);
  auto rng = stream(cfg.seed, kDesign);
  const auto betas = cfg.topic_betas();
  const auto months = cfg.months();
  double mean = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < draws; ++i) {
    const auto th = dirichlet(rng, cfg.K_true, cfg.alpha_true);
    const double s = signal_of(cfg, betas, months, th.data(), draw_fe(cfg, rng));
    const double delta = s - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (s - mean);
  }
  const double var = draws > 1 ? m2 / static_cast<double>(draws - 1) : 0.0;
  const double total = var + cfg.noise_sd * cfg.noise_sd;
  return total > 0.0 ? var / total : 0.0;
}

double noise_sd_for_r2(const SynthConfig& cfg, double target_r2, std::size_t draws) {
  if (!(target_r2 > 0.0 && target_r2 <= 1.0)) throw Error("invalid_target", "target R2 must lie in (0, 1]");
  SynthConfig quiet = cfg;
  quiet.noise_sd = 1.0;
  // r = v / (v + 1) at unit noise
  const double r = design_r2(quiet, draws);
  const double var = r / (1.0 - r);
  return std::sqrt(var * (1.0 - target_r2) / target_r2);
}

lexicon::SkillScheme mismatched_dictionary(const SynthConfig& cfg, int categories, int keywords, std::uint64_t seed) {
  validate(cfg);
  const int K = cfg.K_true, V = cfg.vocab_size;
  std::vector<std::vector<int>> blocks(static_cast<std::size_t>(K));
  for (int w = 0; w < V; ++w) blocks[static_cast<std::size_t>(block_of(w, V, K))].push_back(w);
  std::mt19937_64 rng(seed);
  for (auto& b : blocks) std::shuffle(b.begin(), b.end(), rng);
  std::vector<std::size_t> next(static_cast<std::size_t>(K), 0);

  lexicon::SkillScheme s;
  s.name = "mismatched";
  int turn = 0;
  for (int c = 0; c < categories; ++c) {
    lexicon::SkillCategory cat;
    cat.name = "Straw category " + std::to_string(c + 1);
    for (int i = 0; i < keywords; ++i) {
      // next topic block that still has unused words
      int tries = 0;
      while (next[static_cast<std::size_t>(turn % K)] >= blocks[static_cast<std::size_t>(turn % K)].size()) {
        ++turn;
        if (++tries > K) throw Error("invalid_synth_config", "not enough words for the requested dictionary");
      }
      const auto b = static_cast<std::size_t>(turn % K);
      cat.keywords.push_back({word(blocks[b][next[b]++])});
      ++turn;
    }
    s.categories.push_back(std::move(cat));
  }
  return s;
}

lexicon::SkillScheme aligned_dictionary(const SynthConfig& cfg, const GroundTruth& truth, int keywords) {
  lexicon::SkillScheme s;
  s.name = "aligned";
  for (int k = 0; k < cfg.K_true; ++k) {
    lexicon::SkillCategory cat;
    cat.name = "Planted topic " + std::to_string(k + 1);
    for (int w : truth.top_words(k, keywords)) cat.keywords.push_back({truth.vocab[static_cast<std::size_t>(w)]});
    s.categories.push_back(std::move(cat));
  }
  return s;
}

namespace {

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> r(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) r[static_cast<std::size_t>(j)] = m(i, j);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace

std::string config_json(const SynthConfig& cfg) {
  json j;
  j["n_docs"] = cfg.n_docs;
  j["K_true"] = cfg.K_true;
  j["vocab_size"] = cfg.vocab_size;
  j["doc_length_min"] = cfg.doc_length_min;
  j["doc_length_max"] = cfg.doc_length_max;
  j["alpha_true"] = cfg.alpha_true;
  j["word_concentration"] = cfg.word_concentration;
  j["leakage"] = cfg.leakage;
  j["beta0"] = cfg.beta0;
  j["beta_topic"] = cfg.topic_betas();
  j["counties"] = cfg.counties;
  j["county_effects"] = cfg.county_effects;
  j["month_effects"] = cfg.months();
  j["job_type_effects"] = cfg.job_type_effects;
  j["noise_sd"] = cfg.noise_sd;
  j["year"] = cfg.year;
  j["seed"] = cfg.seed;
  return j.dump(2);
}

SynthConfig parse_config(std::string_view json_text) {
  json j = json::parse(json_text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error("malformed_config", "synth configuration is not a JSON object");
  SynthConfig c;
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const auto& k = it.key();
      const auto& v = it.value();
      if (k == "n_docs") c.n_docs = v.get<std::size_t>();
      else if (k == "K_true") c.K_true = v.get<int>();
      else if (k == "vocab_size") c.vocab_size = v.get<int>();
      else if (k == "doc_length_min") c.doc_length_min = v.get<int>();
      else if (k == "doc_length_max") c.doc_length_max = v.get<int>();
      else if (k == "alpha_true") c.alpha_true = v.get<double>();
      else if (k == "word_concentration") c.word_concentration = v.get<double>();
      else if (k == "leakage") c.leakage = v.get<double>();
      else if (k == "beta0") c.beta0 = v.get<double>();
      else if (k == "beta_topic") c.beta_topic = v.get<std::vector<double>>();
      else if (k == "counties") c.counties = v.get<std::vector<std::string>>();
      else if (k == "county_effects") c.county_effects = v.get<std::vector<double>>();
      else if (k == "month_effects") c.month_effects = v.get<std::vector<double>>();
      else if (k == "job_type_effects") c.job_type_effects = v.get<std::vector<double>>();
      else if (k == "noise_sd") c.noise_sd = v.get<double>();
      else if (k == "year") c.year = v.get<int>();
      else if (k == "seed") c.seed = v.get<std::uint64_t>();
      else throw Error("unknown_config_key", "unknown key '" + k + "' in synth config");
    }
  } catch (const json::exception& e) {
    throw Error("malformed_config", std::string("bad value in synth config: ") + e.what());
  }
  validate(c);
  return c;
}

std::string truth_json(const SynthConfig& cfg, const GroundTruth& t) {
  json j;
  j["config"] = json::parse(config_json(cfg));
  j["vocab"] = t.vocab;
  j["phi"] = matrix_json(t.phi);
  j["theta"] = matrix_json(t.theta);
  j["dominant_topic"] = t.dominant();
  j["assignments"] = t.assignments;
  j["county"] = t.county;
  j["month"] = t.month;
  j["job_type"] = t.job_type;
  j["signal"] = std::vector<double>(t.signal.data(), t.signal.data() + t.signal.size());
  j["noise"] = std::vector<double>(t.noise.data(), t.noise.data() + t.noise.size());
  j["design_r2"] = design_r2(cfg, 50000);
  return j.dump() + "\n";
}

}  // namespace skillscope::synth
