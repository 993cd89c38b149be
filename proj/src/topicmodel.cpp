#include "skillscope/topicmodel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

namespace skillscope::topicmodel {

using nlohmann::json;

std::size_t Dtm::total_tokens() const {
  std::size_t n = 0;
  for (const auto& d : doc_tokens) n += d.size();
  return n;
}

int Dtm::id_of(const std::string& token) const {
  auto it = std::lower_bound(vocab.begin(), vocab.end(), token);
  return it != vocab.end() && *it == token ? static_cast<int>(it - vocab.begin()) : -1;
}

std::vector<int> Dtm::encode(const textnorm::Tokens& tokens) const {
  std::vector<int> ids;
  for (const auto& t : tokens)
    if (int id = id_of(t); id >= 0) ids.push_back(id);
  return ids;
}

Dtm build_dtm(const std::vector<textnorm::NormalizedDoc>& docs, int min_df, double max_df_fraction) {
  if (docs.empty()) throw Error("no_documents", "cannot build a document-term matrix without documents");
  if (!(max_df_fraction > 0.0 && max_df_fraction <= 1.0))
    throw Error("invalid_max_df", "max_df_fraction must lie in (0, 1]");

  std::unordered_map<std::string, int> df;
  for (const auto& d : docs) {
    std::unordered_set<std::string_view> seen(d.tokens.begin(), d.tokens.end());
    for (auto t : seen) ++df[std::string(t)];
  }
  const double max_df = max_df_fraction * static_cast<double>(docs.size());
  Dtm dtm;
  for (const auto& [t, n] : df)
    if (n >= min_df && static_cast<double>(n) <= max_df + 1e-9) dtm.vocab.push_back(t);
  if (dtm.vocab.empty()) throw Error("empty_vocabulary", "no token survives the document-frequency filter");
  std::sort(dtm.vocab.begin(), dtm.vocab.end());
  for (const auto& t : dtm.vocab) dtm.doc_freq.push_back(df[t]);

  std::unordered_map<std::string_view, int> index;
  for (std::size_t i = 0; i < dtm.vocab.size(); ++i) index[dtm.vocab[i]] = static_cast<int>(i);
  for (const auto& d : docs) {
    std::vector<int> ids;
    for (const auto& t : d.tokens)
      if (auto it = index.find(t); it != index.end()) ids.push_back(it->second);
    dtm.emptied.push_back(ids.empty() && !d.tokens.empty());
    dtm.doc_tokens.push_back(std::move(ids));
    dtm.doc_ids.push_back(d.ad_id);
  }
  return dtm;
}

int LdaModel::vocab_id(const std::string& token) const {
  auto it = std::lower_bound(vocab.begin(), vocab.end(), token);
  return it != vocab.end() && *it == token ? static_cast<int>(it - vocab.begin()) : -1;
}

namespace {

int sample_discrete(const std::vector<double>& cumulative, double u) {
  const double target = u * cumulative.back();
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
  return static_cast<int>(std::min<std::ptrdiff_t>(it - cumulative.begin(), static_cast<std::ptrdiff_t>(cumulative.size()) - 1));
}

struct GibbsState {
  int K, V, D;
  double alpha, beta;
  std::vector<std::vector<int>> z;
  std::vector<int> n_dk;  // D x K
  std::vector<int> n_wk;  // V x K
  std::vector<int> n_k;
  std::vector<int> n_d;

  double log_joint() const {
    double ll = K * (std::lgamma(V * beta) - V * std::lgamma(beta));
    for (int k = 0; k < K; ++k) {
      double s = 0.0;
      for (int w = 0; w < V; ++w) s += std::lgamma(n_wk[static_cast<std::size_t>(w) * K + k] + beta);
      ll += s - std::lgamma(n_k[k] + V * beta);
    }
    ll += D * (std::lgamma(K * alpha) - K * std::lgamma(alpha));
    for (int d = 0; d < D; ++d) {
      double s = 0.0;
      for (int k = 0; k < K; ++k) s += std::lgamma(n_dk[static_cast<std::size_t>(d) * K + k] + alpha);
      ll += s - std::lgamma(n_d[d] + K * alpha);
    }
    return ll;
  }

  void verify(const Dtm& dtm) const {
    std::vector<int> dk(n_dk.size(), 0), wk(n_wk.size(), 0), k_tot(n_k.size(), 0);
    for (int d = 0; d < D; ++d) {
      const auto& words = dtm.doc_tokens[d];
      int sum_k = 0;
      for (std::size_t i = 0; i < words.size(); ++i) {
        int k = z[d][i];
        ++dk[static_cast<std::size_t>(d) * K + k];
        ++wk[static_cast<std::size_t>(words[i]) * K + k];
        ++k_tot[k];
      }
      for (int k = 0; k < K; ++k) sum_k += n_dk[static_cast<std::size_t>(d) * K + k];
      if (sum_k != static_cast<int>(words.size()) || sum_k != n_d[d])
        throw Error("gibbs_bookkeeping", "doc-topic counts do not sum to the doc length");
    }
    if (dk != n_dk || wk != n_wk || k_tot != n_k)
      throw Error("gibbs_bookkeeping", "Gibbs count tables drifted from the topic assignments");
  }
};

}  // namespace

LdaModel fit_lda(const Dtm& dtm, const LdaParams& params) {
  if (params.K < 1) throw Error("invalid_params", "K must be >= 1");
  if (params.burn_in < 0 || params.iterations <= params.burn_in)
    throw Error("invalid_params", "iterations must exceed burn_in >= 0");
  if (params.thin < 1) throw Error("invalid_params", "thin must be >= 1");
  if (!(params.beta > 0.0) || !(params.alpha_value() > 0.0)) throw Error("invalid_params", "priors must be positive");

  GibbsState s;
  s.K = params.K;
  s.V = static_cast<int>(dtm.vocab.size());
  s.D = static_cast<int>(dtm.n_docs());
  s.alpha = params.alpha_value();
  s.beta = params.beta;
  const int K = s.K, V = s.V, D = s.D;
  s.n_dk.assign(static_cast<std::size_t>(D) * K, 0);
  s.n_wk.assign(static_cast<std::size_t>(V) * K, 0);
  s.n_k.assign(K, 0);
  s.n_d.assign(D, 0);
  s.z.resize(D);

  std::mt19937_64 rng(params.seed);
  for (int d = 0; d < D; ++d) {
    const auto& words = dtm.doc_tokens[d];
    s.z[d].resize(words.size());
    s.n_d[d] = static_cast<int>(words.size());
    for (std::size_t i = 0; i < words.size(); ++i) {
      int k = static_cast<int>(rng() % static_cast<std::uint64_t>(K));
      s.z[d][i] = k;
      ++s.n_dk[static_cast<std::size_t>(d) * K + k];
      ++s.n_wk[static_cast<std::size_t>(words[i]) * K + k];
      ++s.n_k[k];
    }
  }

  LdaModel m;
  m.K = K;
  m.alpha = s.alpha;
  m.beta = s.beta;
  m.vocab = dtm.vocab;
  m.doc_ids = dtm.doc_ids;
  m.iterations = params.iterations;
  m.burn_in = params.burn_in;
  m.thin = params.thin;
  m.seed = params.seed;
  m.phi = Eigen::MatrixXd::Zero(K, V);
  m.theta = Eigen::MatrixXd::Zero(D, K);

  const double v_beta = V * s.beta;
  const double k_alpha = K * s.alpha;
  auto accumulate = [&] {
    for (int k = 0; k < K; ++k)
      for (int w = 0; w < V; ++w)
        m.phi(k, w) += (s.n_wk[static_cast<std::size_t>(w) * K + k] + s.beta) / (s.n_k[k] + v_beta);
    for (int d = 0; d < D; ++d)
      for (int k = 0; k < K; ++k)
        m.theta(d, k) += (s.n_dk[static_cast<std::size_t>(d) * K + k] + s.alpha) / (s.n_d[d] + k_alpha);
    ++m.samples_averaged;
  };

  std::vector<double> cumulative(K);
  for (int sweep = 1; sweep <= params.iterations; ++sweep) {
    for (int d = 0; d < D; ++d) {
      const auto& words = dtm.doc_tokens[d];
      int* dk = &s.n_dk[static_cast<std::size_t>(d) * K];
      for (std::size_t i = 0; i < words.size(); ++i) {
        const int w = words[i];
        int* wk = &s.n_wk[static_cast<std::size_t>(w) * K];
        int k = s.z[d][i];
        --dk[k];
        --wk[k];
        --s.n_k[k];
        double acc = 0.0;
        for (int j = 0; j < K; ++j) {
          acc += (dk[j] + s.alpha) * (wk[j] + s.beta) / (s.n_k[j] + v_beta);
          cumulative[j] = acc;
        }
        k = sample_discrete(cumulative, uniform01(rng));
        s.z[d][i] = k;
        ++dk[k];
        ++wk[k];
        ++s.n_k[k];
      }
    }
    if (params.verify_counts) s.verify(dtm);
    m.loglik_trace.push_back(s.log_joint());
    if (sweep > params.burn_in && (sweep - params.burn_in) % params.thin == 0) accumulate();
  }
  if (m.samples_averaged == 0) accumulate();

  m.phi /= m.samples_averaged;
  m.theta /= m.samples_averaged;
  // averaging keeps rows stochastic; renormalize away the rounding
  for (int k = 0; k < K; ++k) m.phi.row(k) /= m.phi.row(k).sum();
  for (int d = 0; d < D; ++d) m.theta.row(d) /= m.theta.row(d).sum();
  return m;
}

Eigen::VectorXd infer_theta(const textnorm::Tokens& doc, const LdaModel& m, int iterations, std::uint64_t seed) {
  const int K = m.K;
  std::vector<int> words;
  for (const auto& t : doc)
    if (int id = m.vocab_id(t); id >= 0) words.push_back(id);
  if (words.empty() || iterations < 1) return Eigen::VectorXd::Constant(K, 1.0 / K);

  std::mt19937_64 rng(seed);
  std::vector<int> z(words.size()), n_dk(K, 0);
  for (auto& k : z) {
    k = static_cast<int>(rng() % static_cast<std::uint64_t>(K));
    ++n_dk[k];
  }
  const double n = static_cast<double>(words.size());
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(K);
  int samples = 0;
  const int burn = iterations / 2;
  std::vector<double> cumulative(K);
  for (int it = 1; it <= iterations; ++it) {
    for (std::size_t i = 0; i < words.size(); ++i) {
      --n_dk[z[i]];
      double acc = 0.0;
      for (int k = 0; k < K; ++k) {
        acc += (n_dk[k] + m.alpha) * m.phi(k, words[i]);
        cumulative[k] = acc;
      }
      z[i] = sample_discrete(cumulative, uniform01(rng));
      ++n_dk[z[i]];
    }
    if (it > burn) {
      for (int k = 0; k < K; ++k) sum(k) += (n_dk[k] + m.alpha) / (n + K * m.alpha);
      ++samples;
    }
  }
  sum /= samples;
  return sum / sum.sum();
}

std::vector<int> top_words(const LdaModel& m, int k, int top_n) {
  const int V = static_cast<int>(m.phi.cols());
  std::vector<int> ids(V);
  std::iota(ids.begin(), ids.end(), 0);
  const int n = std::min(top_n, V);
  std::partial_sort(ids.begin(), ids.begin() + n, ids.end(), [&](int a, int b) {
    return m.phi(k, a) != m.phi(k, b) ? m.phi(k, a) > m.phi(k, b) : a < b;
  });
  ids.resize(n);
  return ids;
}

CoherenceResult coherence_cv(const LdaModel& m, const Dtm& dtm, const CoherenceParams& params) {
  std::vector<std::vector<int>> topics;
  std::vector<std::vector<std::string>> words;
  for (int k = 0; k < m.K; ++k) {
    // model and dtm vocabularies may differ (e.g. a model loaded from disk)
    std::vector<int> ids;
    std::vector<std::string> names;
    for (int w : top_words(m, k, params.top_n)) {
      names.push_back(m.vocab[static_cast<std::size_t>(w)]);
      ids.push_back(dtm.id_of(names.back()));
    }
    topics.push_back(std::move(ids));
    words.push_back(std::move(names));
  }
  auto r = coherence_cv(topics, dtm.doc_tokens, params.window, params.epsilon);
  r.absent_words.clear();
  std::vector<bool> present(dtm.vocab.size(), false);
  for (const auto& doc : dtm.doc_tokens)
    for (int id : doc) present[static_cast<std::size_t>(id)] = true;
  for (std::size_t k = 0; k < topics.size(); ++k)
    for (std::size_t i = 0; i < topics[k].size(); ++i) {
      const int id = topics[k][i];
      const bool seen = id >= 0 && present[static_cast<std::size_t>(id)];
      if (!seen && std::find(r.absent_words.begin(), r.absent_words.end(), words[k][i]) == r.absent_words.end())
        r.absent_words.push_back(words[k][i]);
    }
  return r;
}

SelectKResult select_k(const std::vector<textnorm::NormalizedDoc>& docs, const SelectKParams& params) {
  if (params.k_grid.empty()) throw Error("empty_k_grid", "k grid must not be empty");
  if (params.replicates < 1) throw Error("invalid_params", "replicates must be >= 1");
  const std::size_t n = docs.size();
  const std::size_t sample = params.sample_size == 0 ? n : params.sample_size;
  if (sample > n) throw Error("invalid_sample_size", "sample_size exceeds the number of documents");

  SelectKResult result;
  std::mt19937_64 rng(params.seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::vector<textnorm::NormalizedDoc>> samples;
  result.samples_disjoint = sample * static_cast<std::size_t>(params.replicates) <= n;
  if (result.samples_disjoint) std::shuffle(order.begin(), order.end(), rng);
  for (int r = 0; r < params.replicates; ++r) {
    // without room for disjoint samples each replicate reshuffles independently
    if (!result.samples_disjoint) std::shuffle(order.begin(), order.end(), rng);
    const std::size_t offset = result.samples_disjoint ? static_cast<std::size_t>(r) * sample : 0;
    std::vector<std::size_t> pick(order.begin() + static_cast<std::ptrdiff_t>(offset),
                                  order.begin() + static_cast<std::ptrdiff_t>(offset + sample));
    std::sort(pick.begin(), pick.end());
    std::vector<textnorm::NormalizedDoc> s;
    s.reserve(sample);
    for (auto i : pick) s.push_back(docs[i]);
    samples.push_back(std::move(s));
  }
  std::vector<Dtm> dtms;
  for (const auto& s : samples) dtms.push_back(build_dtm(s, params.min_df, params.max_df_fraction));

  const std::size_t jobs = params.k_grid.size() * static_cast<std::size_t>(params.replicates);
  std::vector<double> scores(jobs, 0.0);
  parallel_for(jobs, [&](std::size_t j) {
    const int K = params.k_grid[j / static_cast<std::size_t>(params.replicates)];
    const int r = static_cast<int>(j % static_cast<std::size_t>(params.replicates));
    LdaParams lp = params.lda;
    lp.K = K;
    lp.seed = params.seed + static_cast<std::uint64_t>(K) + static_cast<std::uint64_t>(r);
    LdaModel m = fit_lda(dtms[static_cast<std::size_t>(r)], lp);
    scores[j] = coherence_cv(m, dtms[static_cast<std::size_t>(r)], params.coherence).mean;
  });

  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < params.k_grid.size(); ++g) {
    KScore ks;
    ks.K = params.k_grid[g];
    for (int r = 0; r < params.replicates; ++r)
      ks.replicate_scores.push_back(scores[g * static_cast<std::size_t>(params.replicates) + static_cast<std::size_t>(r)]);
    ks.mean = std::accumulate(ks.replicate_scores.begin(), ks.replicate_scores.end(), 0.0) / params.replicates;
    if (ks.mean > best || (ks.mean == best && ks.K < result.chosen_k)) {
      best = ks.mean;
      result.chosen_k = ks.K;
    }
    result.scores.push_back(std::move(ks));
  }
  return result;
}

std::string to_json(const SelectKResult& r) {
  json j;
  j["chosen_k"] = r.chosen_k;
  j["samples_disjoint"] = r.samples_disjoint;
  j["scores"] = json::array();
  for (const auto& s : r.scores) j["scores"].push_back({{"K", s.K}, {"mean", s.mean}, {"replicates", s.replicate_scores}});
  return j.dump(2);
}

std::string to_csv(const SelectKResult& r) {
  std::string out = csv_line({"K", "mean_cv"});
  for (const auto& s : r.scores) out += csv_line({std::to_string(s.K), format_double(s.mean)});
  return out;
}

TopicReport topic_report(const LdaModel& m, const Eigen::MatrixXd& theta, const std::vector<double>& coherence,
                         int top_n) {
  TopicReport r;
  r.n_docs = static_cast<std::size_t>(theta.rows());
  std::vector<std::size_t> counts(static_cast<std::size_t>(m.K), 0);
  for (Eigen::Index d = 0; d < theta.rows(); ++d) ++counts[static_cast<std::size_t>(dominant_topic(theta.row(d)))];
  for (int k = 0; k < m.K; ++k) {
    TopicRow row;
    row.topic = k + 1;
    row.dominant_count = counts[static_cast<std::size_t>(k)];
    row.share = r.n_docs ? static_cast<double>(row.dominant_count) / static_cast<double>(r.n_docs) : 0.0;
    row.coherence = static_cast<std::size_t>(k) < coherence.size() ? coherence[static_cast<std::size_t>(k)] : 0.0;
    for (int w : top_words(m, k, top_n)) row.keywords.push_back(m.vocab[static_cast<std::size_t>(w)]);
    r.topics.push_back(std::move(row));
  }
  return r;
}

std::string to_json(const TopicReport& r) {
  json j;
  j["n_docs"] = r.n_docs;
  j["topics"] = json::array();
  for (const auto& t : r.topics)
    j["topics"].push_back({{"topic", t.topic},
                           {"dominant_count", t.dominant_count},
                           {"share", t.share},
                           {"coherence", t.coherence},
                           {"keywords", t.keywords}});
  return j.dump(2);
}

std::string to_markdown(const TopicReport& r) {
  std::string out = "| Dominant Topic | Job Ad Count | % Job Ads | C_V | Keywords per Topic |\n|---|---:|---:|---:|---|\n";
  for (const auto& t : r.topics) {
    std::string kw;
    for (std::size_t i = 0; i < t.keywords.size(); ++i) kw += (i ? ", " : "") + t.keywords[i];
    out += "| Topic" + std::to_string(t.topic) + " | " + std::to_string(t.dominant_count) + " | " +
           fixed(100.0 * t.share, 2) + " | " + fixed(t.coherence, 3) + " | " + kw + " |\n";
  }
  return out;
}

lexicon::FeatureMatrix theta_features(const LdaModel& m) {
  lexicon::FeatureMatrix f;
  f.method = "lda" + std::to_string(m.K);
  f.kind = lexicon::FeatureKind::probability;
  f.ad_ids = m.doc_ids;
  for (int k = 1; k <= m.K; ++k) f.feature_names.push_back("topic" + std::to_string(k) + "prob");
  f.values = m.theta;
  return f;
}

std::string theta_csv(const LdaModel& m) { return lexicon::to_csv(theta_features(m)); }

namespace {
void put_f64(std::string& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}
}  // namespace

void save_model(const LdaModel& m, const std::filesystem::path& prefix) {
  json j;
  j["format"] = "skillscope-lda";
  j["version"] = 1;
  j["K"] = m.K;
  j["alpha"] = m.alpha;
  j["beta"] = m.beta;
  j["vocab"] = m.vocab;
  j["iterations"] = m.iterations;
  j["burn_in"] = m.burn_in;
  j["thin"] = m.thin;
  j["seed"] = m.seed;
  j["samples_averaged"] = m.samples_averaged;
  j["phi_file"] = prefix.filename().string() + ".phi.bin";
  write_file(prefix.string() + ".json", j.dump(2));
  std::string bin;
  bin.reserve(static_cast<std::size_t>(m.phi.size()) * 8);
  for (Eigen::Index k = 0; k < m.phi.rows(); ++k)
    for (Eigen::Index w = 0; w < m.phi.cols(); ++w) put_f64(bin, m.phi(k, w));
  write_file(prefix.string() + ".phi.bin", bin);
}

LdaModel load_model(const std::filesystem::path& prefix) {
  json j = json::parse(read_file(prefix.string() + ".json"), nullptr, false);
  if (j.is_discarded() || j.value("format", "") != "skillscope-lda")
    throw Error("corrupt_model", "not an LDA model header: " + prefix.string() + ".json");
  LdaModel m;
  m.K = j["K"];
  m.alpha = j["alpha"];
  m.beta = j["beta"];
  m.vocab = j["vocab"].get<std::vector<std::string>>();
  m.iterations = j["iterations"];
  m.burn_in = j["burn_in"];
  m.thin = j["thin"];
  m.seed = j["seed"];
  m.samples_averaged = j["samples_averaged"];
  const std::string bin = read_file(prefix.string() + ".phi.bin");
  const auto V = static_cast<Eigen::Index>(m.vocab.size());
  if (bin.size() != static_cast<std::size_t>(m.K * V) * 8) throw Error("corrupt_model", "phi matrix has the wrong size");
  m.phi.resize(m.K, V);
  std::size_t pos = 0;
  for (Eigen::Index k = 0; k < m.K; ++k)
    for (Eigen::Index w = 0; w < V; ++w) {
      std::uint64_t bits = 0;
      for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bin[pos++])) << (8 * i);
      m.phi(k, w) = std::bit_cast<double>(bits);
    }
  return m;
}

}  // namespace skillscope::topicmodel
