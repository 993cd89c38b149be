#include "skillscope/embed.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <numeric>
#include <random>

#include "json.hpp"

namespace skillscope::embed {

long EmbeddingModel::index_of(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? -1 : it->second;
}

void EmbeddingModel::build_index() {
  index_.clear();
  for (std::size_t i = 0; i < vocab.size(); ++i) index_[vocab[i]] = static_cast<long>(i);
}

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void validate(const TrainingParams& p) {
  if (p.dim < 2) throw Error("invalid_params", "embedding dim must be >= 2");
  if (p.window < 1) throw Error("invalid_params", "window must be >= 1");
  if (p.epochs < 0) throw Error("invalid_params", "epochs must be >= 0");
  if (p.negative < 0) throw Error("invalid_params", "negative samples must be >= 0");
  if (p.min_count < 1) throw Error("invalid_params", "min_count must be >= 1");
  if (!(p.learning_rate > 0)) throw Error("invalid_params", "learning rate must be positive");
}

}  // namespace

EmbeddingModel train_embeddings(const std::vector<textnorm::Tokens>& sentences, const TrainingParams& params) {
  validate(params);
  std::unordered_map<std::string, std::size_t> counts;
  std::size_t stream_len = 0;
  for (const auto& s : sentences)
    for (const auto& t : s) {
      ++counts[t];
      ++stream_len;
    }
  if (stream_len == 0) throw Error("empty_token_stream", "no tokens to train embeddings on");

  EmbeddingModel m;
  m.meta = params;
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (const auto& [t, c] : counts)
    if (c >= static_cast<std::size_t>(params.min_count)) kept.emplace_back(t, c);
  if (kept.empty()) throw Error("empty_vocabulary", "vocabulary is empty after the min-count filter");
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  std::vector<double> freq;
  for (const auto& [t, c] : kept) {
    m.vocab.push_back(t);
    freq.push_back(static_cast<double>(c));
  }
  m.build_index();

  const auto V = static_cast<Eigen::Index>(m.vocab.size());
  const int D = params.dim;
  std::mt19937_64 rng(params.seed);

  RowMatrix in(V, D), out = RowMatrix::Zero(V, D);
  for (Eigen::Index r = 0; r < V; ++r)
    for (int c = 0; c < D; ++c) in(r, c) = (uniform01(rng) - 0.5) / D;

  std::vector<std::vector<long>> encoded;
  encoded.reserve(sentences.size());
  std::size_t train_words = 0;
  for (const auto& s : sentences) {
    std::vector<long> ids;
    for (const auto& t : s)
      if (long id = m.index_of(t); id >= 0) ids.push_back(id);
    train_words += ids.size();
    encoded.push_back(std::move(ids));
  }

  // unigram^(3/4) noise distribution
  std::vector<double> noise_cdf(freq.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < freq.size(); ++i) noise_cdf[i] = (acc += std::pow(freq[i], 0.75));
  for (auto& v : noise_cdf) v /= acc;
  auto draw_noise = [&]() -> long {
    auto it = std::upper_bound(noise_cdf.begin(), noise_cdf.end(), uniform01(rng));
    return std::min<long>(static_cast<long>(it - noise_cdf.begin()), V - 1);
  };

  const double total = static_cast<double>(train_words) * params.epochs + 1.0;
  const double sub_total = params.subsample * static_cast<double>(train_words);
  double processed = 0.0;
  Eigen::VectorXd grad(D);
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    for (const auto& sentence : encoded) {
      std::vector<long> sent;
      sent.reserve(sentence.size());
      for (long id : sentence) {
        processed += 1.0;
        if (params.subsample > 0.0) {
          double f = freq[static_cast<std::size_t>(id)];
          double keep = (std::sqrt(f / sub_total) + 1.0) * sub_total / f;
          if (keep < uniform01(rng)) continue;
        }
        sent.push_back(id);
      }
      const double alpha = params.learning_rate * std::max(1.0 - processed / total, 1e-4);
      const auto n = static_cast<long>(sent.size());
      for (long pos = 0; pos < n; ++pos) {
        const long center = sent[static_cast<std::size_t>(pos)];
        const long reduced = static_cast<long>(rng() % static_cast<std::uint64_t>(params.window));
        const long span = params.window - reduced;
        for (long c = std::max(0L, pos - span); c <= std::min(n - 1, pos + span); ++c) {
          if (c == pos) continue;
          const long context = sent[static_cast<std::size_t>(c)];
          auto l1 = in.row(context);
          grad.setZero();
          for (int d = 0; d <= params.negative; ++d) {
            long target;
            double label;
            if (d == 0) {
              target = center;
              label = 1.0;
            } else {
              target = draw_noise();
              if (target == center) continue;
              label = 0.0;
            }
            auto l2 = out.row(target);
            const double score = 1.0 / (1.0 + std::exp(-l1.dot(l2)));
            const double g = (label - score) * alpha;
            grad += g * l2.transpose();
            l2 += g * l1;
          }
          l1 += grad.transpose();
        }
      }
    }
  }
  m.vectors = in;
  return m;
}

EmbeddingModel train_embeddings(const std::vector<textnorm::NormalizedDoc>& docs, const DomainScheme& scheme,
                                const TrainingParams& params) {
  std::vector<textnorm::Tokens> sentences;
  sentences.reserve(docs.size() + scheme.categories.size());
  for (const auto& d : docs) sentences.push_back(d.tokens);
  for (const auto& cat : scheme.categories) {
    textnorm::Tokens flat;
    for (const auto& kw : cat.keywords) flat.insert(flat.end(), kw.begin(), kw.end());
    sentences.push_back(std::move(flat));
  }
  return train_embeddings(sentences, params);
}

DocVector doc_vector(const textnorm::Tokens& tokens, const EmbeddingModel& m) {
  DocVector out{Eigen::VectorXd::Zero(m.dim()), 0};
  for (const auto& t : tokens) {
    long id = m.index_of(t);
    if (id < 0) continue;
    out.value += m.vectors.row(id).transpose();
    ++out.in_vocab;
  }
  if (out.in_vocab) out.value /= static_cast<double>(out.in_vocab);
  return out;
}

DocVector category_vector(const lexicon::SkillCategory& cat, const EmbeddingModel& m) {
  textnorm::Tokens flat;
  for (const auto& kw : cat.keywords) flat.insert(flat.end(), kw.begin(), kw.end());
  return doc_vector(flat, m);
}

DomainAssigner::DomainAssigner(const DomainScheme& scheme, const EmbeddingModel& model)
    : scheme_(scheme), model_(model) {
  if (scheme.categories.empty()) throw Error("empty_domain_scheme", "domain scheme has no domains");
  centroids_.resize(static_cast<Eigen::Index>(scheme.categories.size()), model.dim());
  for (std::size_t k = 0; k < scheme.categories.size(); ++k)
    centroids_.row(static_cast<Eigen::Index>(k)) = category_vector(scheme.categories[k], model).value.transpose();
}

DomainAssignment DomainAssigner::assign(const textnorm::NormalizedDoc& doc) const {
  DomainAssignment a;
  a.ad_id = doc.ad_id;
  a.domain = kUnassigned;
  DocVector v = doc_vector(doc.tokens, model_);
  if (v.all_oov()) return a;
  double best = -2.0;
  for (Eigen::Index k = 0; k < centroids_.rows(); ++k) {
    double s = cosine(v.value, centroids_.row(k).transpose());
    if (s > best) {
      best = s;
      a.domain_index = k;
    }
  }
  const auto& cat = scheme_.categories[static_cast<std::size_t>(a.domain_index)];
  a.domain = cat.name;
  a.similarity = best;
  a.domain_intensity = lexicon::intensity(doc.tokens, cat);
  return a;
}

DomainAssignment assign_domain(const textnorm::NormalizedDoc& doc, const DomainScheme& scheme,
                               const EmbeddingModel& m) {
  return DomainAssigner(scheme, m).assign(doc);
}

DomainFeatures domain_features(const std::vector<textnorm::NormalizedDoc>& docs, const DomainScheme& scheme,
                               const EmbeddingModel& m) {
  DomainAssigner assigner(scheme, m);
  DomainFeatures out;
  out.assignments.resize(docs.size());
  parallel_for(docs.size(), [&](std::size_t i) { out.assignments[i] = assigner.assign(docs[i]); });

  auto& f = out.features;
  f.method = "disco_domain";
  f.kind = lexicon::FeatureKind::intensity;
  f.feature_names = {"domain_intensity"};
  f.values.resize(static_cast<Eigen::Index>(docs.size()), 1);
  std::vector<double> sums(scheme.categories.size(), 0.0);
  std::vector<std::size_t> counts(scheme.categories.size(), 0);
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const auto& a = out.assignments[i];
    f.ad_ids.push_back(a.ad_id);
    f.values(static_cast<Eigen::Index>(i), 0) = a.domain_intensity;
    if (a.domain_index >= 0) {
      sums[static_cast<std::size_t>(a.domain_index)] += a.domain_intensity;
      ++counts[static_cast<std::size_t>(a.domain_index)];
    }
  }
  for (std::size_t k = 0; k < scheme.categories.size(); ++k)
    out.per_domain.push_back(
        {scheme.categories[k].name, {counts[k] ? sums[k] / static_cast<double>(counts[k]) : 0.0, counts[k]}});
  return out;
}

std::string assignments_csv(const DomainFeatures& f) {
  std::string out = csv_line({"ad_id", "domain", "similarity", "domain_intensity"});
  for (const auto& a : f.assignments)
    out += csv_line({a.ad_id, a.domain, format_double(a.similarity), format_double(a.domain_intensity)});
  return out;
}

std::string per_domain_json(const DomainFeatures& f) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& [name, stat] : f.per_domain)
    rows.push_back({{"domain", name}, {"mean_intensity", stat.first}, {"ads", stat.second}});
  return rows.dump(2);
}

namespace {

constexpr char kMagic[5] = {'S', 'K', 'E', 'M', 'B'};
constexpr std::uint8_t kVersion = 1;

template <typename T>
void put_le(std::string& out, T value) {
  static_assert(std::is_integral_v<T>);
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF));
}
void put_f64(std::string& out, double v) { put_le(out, std::bit_cast<std::uint64_t>(v)); }

struct Reader {
  const std::string& buf;
  std::size_t pos = 0;
  template <typename T>
  T get() {
    if (pos + sizeof(T) > buf.size()) throw Error("corrupt_model", "embedding file is truncated");
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
    pos += sizeof(T);
    return static_cast<T>(v);
  }
  double f64() { return std::bit_cast<double>(get<std::uint64_t>()); }
  std::string bytes(std::size_t n) {
    if (pos + n > buf.size()) throw Error("corrupt_model", "embedding file is truncated");
    std::string s = buf.substr(pos, n);
    pos += n;
    return s;
  }
};

}  // namespace

std::string meta_json(const TrainingParams& p) {
  nlohmann::json j{{"dim", p.dim},           {"window", p.window},       {"epochs", p.epochs},
                   {"negative", p.negative}, {"min_count", p.min_count}, {"learning_rate", p.learning_rate},
                   {"subsample", p.subsample}, {"seed", p.seed}};
  return j.dump(2);
}

void save_model(const EmbeddingModel& m, const std::filesystem::path& path) {
  std::string out(kMagic, sizeof kMagic);
  out.push_back(static_cast<char>(kVersion));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.dim()));
  put_le<std::uint64_t>(out, m.vocab.size());
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.meta.window));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.meta.epochs));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.meta.negative));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.meta.min_count));
  put_le<std::uint64_t>(out, m.meta.seed);
  put_f64(out, m.meta.learning_rate);
  put_f64(out, m.meta.subsample);
  for (const auto& w : m.vocab) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(w.size()));
    out += w;
  }
  for (Eigen::Index r = 0; r < m.vectors.rows(); ++r)
    for (Eigen::Index c = 0; c < m.vectors.cols(); ++c) put_f64(out, m.vectors(r, c));
  write_file(path, out);
  write_file(path.string() + ".json", meta_json(m.meta));
}

EmbeddingModel load_model(const std::filesystem::path& path) {
  const std::string buf = read_file(path);
  Reader rd{buf};
  if (rd.bytes(sizeof kMagic) != std::string(kMagic, sizeof kMagic))
    throw Error("corrupt_model", "not an embedding model file: " + path.string());
  if (auto v = rd.get<std::uint8_t>(); v != kVersion)
    throw Error("corrupt_model", "unsupported embedding model version " + std::to_string(v));
  EmbeddingModel m;
  m.meta.dim = static_cast<int>(rd.get<std::uint32_t>());
  const auto n = rd.get<std::uint64_t>();
  m.meta.window = static_cast<int>(rd.get<std::uint32_t>());
  m.meta.epochs = static_cast<int>(rd.get<std::uint32_t>());
  m.meta.negative = static_cast<int>(rd.get<std::uint32_t>());
  m.meta.min_count = static_cast<int>(rd.get<std::uint32_t>());
  m.meta.seed = rd.get<std::uint64_t>();
  m.meta.learning_rate = rd.f64();
  m.meta.subsample = rd.f64();
  for (std::uint64_t i = 0; i < n; ++i) m.vocab.push_back(rd.bytes(rd.get<std::uint32_t>()));
  m.vectors.resize(static_cast<Eigen::Index>(n), m.meta.dim);
  for (Eigen::Index r = 0; r < m.vectors.rows(); ++r)
    for (Eigen::Index c = 0; c < m.vectors.cols(); ++c) m.vectors(r, c) = rd.f64();
  if (rd.pos != buf.size()) throw Error("corrupt_model", "trailing bytes in embedding model file");
  m.build_index();
  return m;
}

}  // namespace skillscope::embed
