#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "skillscope/embed.hpp"
#include "skillscope/topicmodel.hpp"

namespace skillscope::topicmodel {

namespace {

constexpr int kMaxTopN = 64;

struct WindowCounts {
  // distinct presence masks over the topic's top words, with window counts
  std::map<std::uint64_t, std::uint64_t> masks;
  std::uint64_t n_windows = 0;
};

WindowCounts count_windows(const std::vector<int>& topic, const std::vector<std::vector<int>>& docs, int window) {
  std::unordered_map<int, std::vector<int>> slot;
  for (std::size_t i = 0; i < topic.size(); ++i)
    if (topic[i] >= 0) slot[topic[i]].push_back(static_cast<int>(i));

  WindowCounts wc;
  std::vector<int> live(topic.size(), 0);
  for (const auto& doc : docs) {
    if (doc.empty()) continue;
    const std::size_t w = static_cast<std::size_t>(window);
    const std::size_t first_end = std::min(doc.size(), w);
    std::fill(live.begin(), live.end(), 0);
    std::uint64_t mask = 0;
    auto add = [&](int id, int delta) {
      auto it = slot.find(id);
      if (it == slot.end()) return;
      for (int s : it->second) {
        live[s] += delta;
        if (live[s] > 0)
          mask |= std::uint64_t{1} << s;
        else
          mask &= ~(std::uint64_t{1} << s);
      }
    };
    for (std::size_t i = 0; i < first_end; ++i) add(doc[i], 1);
    ++wc.masks[mask];
    ++wc.n_windows;
    for (std::size_t end = first_end; end < doc.size(); ++end) {
      add(doc[end - w], -1);
      add(doc[end], 1);
      ++wc.masks[mask];
      ++wc.n_windows;
    }
  }
  return wc;
}

}  // namespace

CoherenceResult coherence_cv(const std::vector<std::vector<int>>& topics,
                             const std::vector<std::vector<int>>& reference_docs, int window, double epsilon) {
  if (window < 1) throw Error("invalid_window", "coherence window must be >= 1");
  CoherenceResult result;
  result.per_topic.assign(topics.size(), 0.0);
  std::vector<std::vector<int>> absent(topics.size());

  parallel_for(topics.size(), [&](std::size_t t) {
    const auto& topic = topics[t];
    const int n = static_cast<int>(topic.size());
    if (n > kMaxTopN) throw Error("invalid_top_n", "coherence supports at most 64 top words");
    if (n == 0) return;
    const WindowCounts wc = count_windows(topic, reference_docs, window);
    Eigen::MatrixXd joint = Eigen::MatrixXd::Zero(n, n);
    for (const auto& [mask, count] : wc.masks)
      for (int i = 0; i < n; ++i) {
        if (!(mask >> i & 1)) continue;
        for (int j = i; j < n; ++j)
          if (mask >> j & 1) joint(i, j) += static_cast<double>(count);
      }
    const double total = static_cast<double>(std::max<std::uint64_t>(wc.n_windows, 1));
    joint /= total;
    Eigen::VectorXd marginal(n);
    for (int i = 0; i < n; ++i) {
      marginal(i) = joint(i, i) > 0.0 ? joint(i, i) : epsilon;
      if (joint(i, i) == 0.0) absent[t].push_back(topic[static_cast<std::size_t>(i)]);
    }
    Eigen::MatrixXd npmi(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        const double p = joint(i, j) + epsilon;
        npmi(i, j) = npmi(j, i) = std::log(p / (marginal(i) * marginal(j))) / -std::log(p);
      }
    const Eigen::VectorXd sum = npmi.rowwise().sum();
    double score = 0.0;
    for (int i = 0; i < n; ++i) score += embed::cosine(npmi.row(i).transpose(), sum);
    result.per_topic[t] = score / n;
  });

  for (const auto& a : absent)
    for (int id : a) result.absent_words.push_back(std::to_string(id));
  if (!topics.empty()) {
    double s = 0.0;
    for (double v : result.per_topic) s += v;
    result.mean = s / static_cast<double>(topics.size());
  }
  return result;
}

CoherenceResult coherence_cv(const std::vector<textnorm::Tokens>& topics,
                             const std::vector<textnorm::Tokens>& reference_docs, int window, double epsilon) {
  std::unordered_map<std::string, int> ids;
  std::vector<std::string> names;
  auto intern = [&](const std::string& t) {
    auto [it, fresh] = ids.emplace(t, static_cast<int>(names.size()));
    if (fresh) names.push_back(t);
    return it->second;
  };
  std::vector<std::vector<int>> topic_ids, doc_ids;
  for (const auto& t : topics) {
    std::vector<int> v;
    for (const auto& w : t) v.push_back(intern(w));
    topic_ids.push_back(std::move(v));
  }
  for (const auto& d : reference_docs) {
    std::vector<int> v;
    for (const auto& w : d) v.push_back(intern(w));
    doc_ids.push_back(std::move(v));
  }
  auto r = coherence_cv(topic_ids, doc_ids, window, epsilon);
  for (auto& w : r.absent_words) w = names[static_cast<std::size_t>(std::stoi(w))];
  return r;
}

}  // namespace skillscope::topicmodel
