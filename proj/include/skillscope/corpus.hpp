#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "skillscope/common.hpp"

namespace skillscope::corpus {

enum class Hours { full_time, part_time };
enum class Contract { permanent, temporary };

struct JobType {
  Hours hours = Hours::full_time;
  Contract contract = Contract::permanent;

  /// Dense code in [0, 4), used as a fixed-effect level.
  int code() const { return static_cast<int>(hours) * 2 + static_cast<int>(contract); }
  friend bool operator==(const JobType&, const JobType&) = default;
};

std::string_view to_string(Hours h);
std::string_view to_string(Contract c);
std::optional<Hours> parse_hours(std::string_view s);
std::optional<Contract> parse_contract(std::string_view s);

struct Date {
  int year = 1970;
  int month = 1;
  int day = 1;

  std::string iso() const;
  friend auto operator<=>(const Date&, const Date&) = default;
};

/// Strict YYYY-MM-DD with calendar validation.
std::optional<Date> parse_iso_date(std::string_view s);

struct JobAd {
  std::string id;
  std::string title;
  std::string category;
  std::string company;
  std::string county;
  Date posting_date;
  JobType job_type;
  double wage = 0.0;  // GBP per annum
  std::string description_raw;

  int posting_month() const { return posting_date.month; }
};

struct Rejection {
  std::size_t row = 0;  // 1-based data row (header excluded)
  std::string id;
  std::string reason;
};

struct Corpus {
  std::vector<JobAd> ads;
  std::string source;
  std::size_t input_rows = 0;
  std::vector<Rejection> rejected;
  /// Per-rule drop counts, load rejections included.
  std::map<std::string, std::size_t> cleaning_log;
  /// Trim quantile already applied by clean(), if any.
  std::optional<double> trim_applied;
};

enum class Format { csv, jsonl };
Format parse_format(std::string_view s);
Format format_from_extension(const std::filesystem::path& path);

inline constexpr const char* kColumns[] = {"id",      "title",    "category",      "company", "county",
                                           "posting_date", "job_type", "contract_type", "wage",    "description"};

Corpus load(const std::filesystem::path& path, Format format);
/// Parses already-read text; `source` is recorded as provenance.
Corpus load_text(std::string_view text, Format format, std::string source = "<memory>");

/// Serializes ads in the input schema (rejections are not written).
std::string to_csv(const Corpus& c);
std::string to_jsonl(const Corpus& c);
void save(const Corpus& c, const std::filesystem::path& path, Format format);

/// Cleaning log as {"rule": count, ...}.
std::string cleaning_log_json(const Corpus& c);

/// County list used by the UK-location rule; lookups are case-insensitive.
class CountyList {
 public:
  static CountyList bundled();
  static CountyList from_file(const std::filesystem::path& path);
  static CountyList from_names(const std::vector<std::string>& names);
  bool contains(std::string_view county) const;
  std::size_t size() const { return names_.size(); }

 private:
  std::vector<std::string> names_;  // normalized, sorted
};

/// Nearest-rank quantile: the smallest value whose rank reaches ceil(q * n).
/// `sorted` must be ascending and non-empty.
double nearest_rank_quantile(const std::vector<double>& sorted, double q);

/// Drops missing fields, duplicates, non-UK locations and wage outliers, in
/// that order. Applying it twice with the same quantile changes nothing.
Corpus clean(const Corpus& c, double trim_quantile = 0.005, const CountyList& counties = CountyList::bundled());

/// Gini coefficient via the sorted formula
///   G = sum_i (2i - n - 1) x_(i) / (n^2 mu),  i = 1..n.
template <typename Derived>
typename Derived::Scalar gini(const Eigen::DenseBase<Derived>& values) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = values.size();
  if (n == 0) return Scalar(0);
  const auto evaluated = values.derived().eval();
  std::vector<Scalar> x(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = evaluated(i);
  std::sort(x.begin(), x.end());
  Scalar weighted(0), total(0);
  for (Eigen::Index i = 0; i < n; ++i) {
    weighted += Scalar(2 * (i + 1) - n - 1) * x[static_cast<std::size_t>(i)];
    total += x[static_cast<std::size_t>(i)];
  }
  if (total == Scalar(0)) return Scalar(0);
  return weighted / (Scalar(n) * total);
}

inline double gini(const std::vector<double>& values) {
  return gini(Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size())));
}

struct CategoryStats {
  std::size_t n = 0;
  double mean = 0.0;
  double gini = 0.0;
};

struct WageSummary {
  std::size_t n = 0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::map<std::string, double> quantiles;  // "p10", "p25", ...
  double gini = 0.0;
  std::map<std::string, CategoryStats> per_category;
};

WageSummary summarize(const Corpus& c);
std::string to_json(const WageSummary& s);

/// Canonical content hash of the ads (order-sensitive).
std::uint64_t content_hash(const Corpus& c);

}  // namespace skillscope::corpus
