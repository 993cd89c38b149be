#include "skillscope/corpus.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

namespace skillscope::corpus {

using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string squash_separators(std::string_view s) {
  std::string out = lower(trim(s));
  for (auto& c : out)
    if (c == '-' || c == ' ') c = '_';
  return out;
}

std::optional<double> parse_number(std::string_view s) {
  std::string t = trim(s);
  if (t.empty()) return std::nullopt;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) return std::nullopt;
  return v;
}

struct RawRow {
  std::size_t row = 0;
  std::map<std::string, std::string> fields;
  bool wage_null = false;
};

void accept_row(Corpus& c, std::unordered_set<std::string>& seen_ids, const RawRow& raw) {
  auto reject = [&](std::string reason) {
    auto it = raw.fields.find("id");
    c.rejected.push_back({raw.row, it == raw.fields.end() ? "" : it->second, reason});
    ++c.cleaning_log[reason];
  };
  const auto& f = raw.fields;
  JobAd ad;
  ad.id = trim(f.at("id"));
  ad.title = f.at("title");
  ad.category = f.at("category");
  ad.company = f.at("company");
  ad.county = f.at("county");
  ad.description_raw = f.at("description");

  const std::string wage_text = trim(f.at("wage"));
  if (raw.wage_null || wage_text.empty()) return reject("missing_wage");
  auto wage = parse_number(wage_text);
  if (!wage || !std::isfinite(*wage)) return reject("non_numeric_wage");
  if (*wage <= 0.0) return reject("non_positive_wage");
  ad.wage = *wage;

  auto date = parse_iso_date(trim(f.at("posting_date")));
  if (!date) return reject("bad_posting_date");
  ad.posting_date = *date;

  auto hours = parse_hours(f.at("job_type"));
  if (!hours) return reject("bad_job_type");
  auto contract = parse_contract(f.at("contract_type"));
  if (!contract) return reject("bad_contract_type");
  ad.job_type = {*hours, *contract};

  if (!ad.id.empty() && !seen_ids.insert(ad.id).second) return reject("duplicate_id");
  c.ads.push_back(std::move(ad));
}

Corpus load_csv(std::string_view text, std::string source) {
  Corpus c;
  c.source = std::move(source);
  auto rows = parse_csv(text);
  if (rows.empty()) throw Error("missing_header", "CSV input has no header row");
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < rows[0].size(); ++i) index[lower(trim(rows[0][i]))] = i;
  std::vector<std::size_t> cols;
  for (const char* name : kColumns) {
    auto it = index.find(name);
    if (it == index.end())
      throw Error(std::string("missing_column:") + name, std::string("missing mandatory column '") + name + "'");
    cols.push_back(it->second);
  }
  std::unordered_set<std::string> seen;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    ++c.input_rows;
    const auto& row = rows[r];
    if (row.size() != rows[0].size()) {
      c.rejected.push_back({r, row.empty() ? "" : row[0], "malformed_row"});
      ++c.cleaning_log["malformed_row"];
      continue;
    }
    RawRow raw;
    raw.row = r;
    for (std::size_t k = 0; k < cols.size(); ++k) raw.fields[kColumns[k]] = row[cols[k]];
    accept_row(c, seen, raw);
  }
  return c;
}

std::string json_field_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "";
  return v.dump();
}

Corpus load_jsonl(std::string_view text, std::string source) {
  Corpus c;
  c.source = std::move(source);
  std::unordered_set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    if (trim(line).empty()) continue;
    ++line_no;
    ++c.input_rows;
    json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) {
      c.rejected.push_back({line_no, "", "malformed_row"});
      ++c.cleaning_log["malformed_row"];
      continue;
    }
    RawRow raw;
    raw.row = line_no;
    for (const char* name : kColumns) {
      if (!obj.contains(name))
        throw Error(std::string("missing_column:") + name,
                    std::string("missing mandatory field '") + name + "' on line " + std::to_string(line_no));
      raw.fields[name] = json_field_text(obj[name]);
    }
    raw.wage_null = obj["wage"].is_null();
    accept_row(c, seen, raw);
  }
  return c;
}

}  // namespace

std::string_view to_string(Hours h) { return h == Hours::full_time ? "full_time" : "part_time"; }
std::string_view to_string(Contract c) { return c == Contract::permanent ? "permanent" : "temporary"; }

std::optional<Hours> parse_hours(std::string_view s) {
  std::string t = squash_separators(s);
  if (t == "full_time" || t == "fulltime") return Hours::full_time;
  if (t == "part_time" || t == "parttime") return Hours::part_time;
  return std::nullopt;
}

std::optional<Contract> parse_contract(std::string_view s) {
  std::string t = squash_separators(s);
  if (t == "permanent") return Contract::permanent;
  if (t == "temporary" || t == "temp") return Contract::temporary;
  return std::nullopt;
}

std::string Date::iso() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
  return buf;
}

std::optional<Date> parse_iso_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  auto num = [&](std::size_t off, std::size_t len) -> std::optional<int> {
    int v = 0;
    for (std::size_t i = off; i < off + len; ++i) {
      if (!std::isdigit(static_cast<unsigned char>(s[i]))) return std::nullopt;
      v = v * 10 + (s[i] - '0');
    }
    return v;
  };
  auto y = num(0, 4), m = num(5, 2), d = num(8, 2);
  if (!y || !m || !d || *m < 1 || *m > 12 || *d < 1) return std::nullopt;
  static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  bool leap = (*y % 4 == 0 && *y % 100 != 0) || *y % 400 == 0;
  int max_day = kDays[*m - 1] + ((*m == 2 && leap) ? 1 : 0);
  if (*d > max_day) return std::nullopt;
  return Date{*y, *m, *d};
}

Format parse_format(std::string_view s) {
  std::string t = lower(trim(s));
  if (t == "csv") return Format::csv;
  if (t == "jsonl") return Format::jsonl;
  throw Error("unknown_format", "unknown corpus format '" + std::string(s) + "' (expected csv or jsonl)");
}

Format format_from_extension(const std::filesystem::path& path) {
  std::string ext = lower(path.extension().string());
  if (ext == ".jsonl" || ext == ".json") return Format::jsonl;
  return Format::csv;
}

Corpus load(const std::filesystem::path& path, Format format) {
  return load_text(read_file(path), format, path.string());
}

Corpus load_text(std::string_view text, Format format, std::string source) {
  return format == Format::csv ? load_csv(text, std::move(source)) : load_jsonl(text, std::move(source));
}

namespace {
std::vector<std::string> ad_fields(const JobAd& a) {
  return {a.id,
          a.title,
          a.category,
          a.company,
          a.county,
          a.posting_date.iso(),
          std::string(to_string(a.job_type.hours)),
          std::string(to_string(a.job_type.contract)),
          format_double(a.wage),
          a.description_raw};
}
}  // namespace

std::string to_csv(const Corpus& c) {
  std::string out = csv_line(std::vector<std::string>(std::begin(kColumns), std::end(kColumns)));
  for (const auto& a : c.ads) out += csv_line(ad_fields(a));
  return out;
}

std::string to_jsonl(const Corpus& c) {
  std::string out;
  for (const auto& a : c.ads) {
    json j = json::object();
    auto fields = ad_fields(a);
    for (std::size_t k = 0; k < fields.size(); ++k) j[kColumns[k]] = fields[k];
    j["wage"] = a.wage;
    out += j.dump();
    out.push_back('\n');
  }
  return out;
}

void save(const Corpus& c, const std::filesystem::path& path, Format format) {
  write_file(path, format == Format::csv ? to_csv(c) : to_jsonl(c));
}

std::string cleaning_log_json(const Corpus& c) {
  json j = json::object();
  for (const auto& [rule, count] : c.cleaning_log) j[rule] = count;
  return j.dump(2);
}

namespace {
std::string normalize_county(std::string_view s) {
  std::string t = lower(trim(s));
  std::string out;
  bool space = false;
  for (char ch : t) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      space = true;
      continue;
    }
    if (space && !out.empty()) out.push_back(' ');
    space = false;
    out.push_back(ch);
  }
  return out;
}
}  // namespace

CountyList CountyList::from_names(const std::vector<std::string>& names) {
  CountyList l;
  for (const auto& n : names) {
    auto k = normalize_county(n);
    if (!k.empty() && k[0] != '#') l.names_.push_back(k);
  }
  std::sort(l.names_.begin(), l.names_.end());
  l.names_.erase(std::unique(l.names_.begin(), l.names_.end()), l.names_.end());
  return l;
}

CountyList CountyList::from_file(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::vector<std::string> names;
  for (std::string line; std::getline(in, line);) names.push_back(line);
  return from_names(names);
}

CountyList CountyList::bundled() {
  static const CountyList list = from_file(resource_path("data/uk_counties.txt"));
  return list;
}

bool CountyList::contains(std::string_view county) const {
  return std::binary_search(names_.begin(), names_.end(), normalize_county(county));
}

double nearest_rank_quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw Error("empty_sample", "quantile of an empty sample");
  const double n = static_cast<double>(sorted.size());
  // guard against q*n landing a hair above an integer
  auto rank = static_cast<std::size_t>(std::ceil(q * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

Corpus clean(const Corpus& c, double trim_quantile, const CountyList& counties) {
  if (!(trim_quantile >= 0.0 && trim_quantile < 0.25))
    throw Error("invalid_trim_quantile", "trim_quantile must lie in [0, 0.25)");

  Corpus out;
  out.source = c.source;
  out.input_rows = c.input_rows;
  out.rejected = c.rejected;
  out.cleaning_log = c.cleaning_log;
  out.trim_applied = c.trim_applied;
  for (const char* rule : {"missing_field", "duplicate", "non_uk_location", "wage_trim"}) out.cleaning_log[rule] += 0;

  auto drop = [&](const JobAd& a, const char* rule) {
    out.rejected.push_back({0, a.id, rule});
    ++out.cleaning_log[rule];
  };

  std::vector<JobAd> kept;
  kept.reserve(c.ads.size());
  std::set<std::tuple<std::string, std::string, std::string, std::string>> seen;
  for (const auto& a : c.ads) {
    bool missing = false;
    for (const std::string* f : {&a.id, &a.title, &a.category, &a.company, &a.county, &a.description_raw})
      if (trim(*f).empty()) missing = true;
    if (missing) {
      drop(a, "missing_field");
      continue;
    }
    if (!seen.emplace(a.title, a.company, a.county, a.description_raw).second) {
      drop(a, "duplicate");
      continue;
    }
    if (!counties.contains(a.county)) {
      drop(a, "non_uk_location");
      continue;
    }
    kept.push_back(a);
  }

  if (trim_quantile > 0.0 && out.trim_applied != trim_quantile && !kept.empty()) {
    std::vector<double> wages;
    wages.reserve(kept.size());
    for (const auto& a : kept) wages.push_back(a.wage);
    std::sort(wages.begin(), wages.end());
    const double lo = nearest_rank_quantile(wages, trim_quantile);
    const double hi = nearest_rank_quantile(wages, 1.0 - trim_quantile);
    std::vector<JobAd> trimmed;
    trimmed.reserve(kept.size());
    for (auto& a : kept) {
      if (a.wage < lo || a.wage > hi) drop(a, "wage_trim");
      else trimmed.push_back(std::move(a));
    }
    kept = std::move(trimmed);
  }
  if (trim_quantile > 0.0) out.trim_applied = trim_quantile;

  if (kept.empty()) throw Error("corpus_empty", "no advertisements survive cleaning");
  out.ads = std::move(kept);
  return out;
}

WageSummary summarize(const Corpus& c) {
  if (c.ads.empty()) throw Error("corpus_empty", "cannot summarize an empty corpus");
  WageSummary s;
  std::vector<double> wages;
  std::map<std::string, std::vector<double>> by_cat;
  for (const auto& a : c.ads) {
    wages.push_back(a.wage);
    by_cat[a.category].push_back(a.wage);
  }
  Eigen::Map<const Eigen::VectorXd> w(wages.data(), static_cast<Eigen::Index>(wages.size()));
  s.n = wages.size();
  s.mean = w.mean();
  s.min = w.minCoeff();
  s.max = w.maxCoeff();
  s.gini = gini(w);
  std::vector<double> sorted = wages;
  std::sort(sorted.begin(), sorted.end());
  for (auto [name, q] : {std::pair{"p10", 0.10}, {"p25", 0.25}, {"p50", 0.50}, {"p75", 0.75}, {"p90", 0.90}})
    s.quantiles[name] = nearest_rank_quantile(sorted, q);
  for (const auto& [cat, ws] : by_cat) {
    Eigen::Map<const Eigen::VectorXd> v(ws.data(), static_cast<Eigen::Index>(ws.size()));
    s.per_category[cat] = {ws.size(), v.mean(), gini(v)};
  }
  return s;
}

std::string to_json(const WageSummary& s) {
  json j;
  j["n"] = s.n;
  j["mean"] = s.mean;
  j["min"] = s.min;
  j["max"] = s.max;
  j["quantiles"] = s.quantiles;
  j["gini"] = s.gini;
  json cats = json::array();
  // descending mean, matching the per-category chart layout
  std::vector<std::pair<std::string, CategoryStats>> rows(s.per_category.begin(), s.per_category.end());
  std::stable_sort(rows.begin(), rows.end(), [](auto& a, auto& b) { return a.second.mean > b.second.mean; });
  for (const auto& [name, st] : rows) cats.push_back({{"category", name}, {"n", st.n}, {"mean", st.mean}, {"gini", st.gini}});
  j["per_category"] = cats;
  return j.dump(2);
}

std::uint64_t content_hash(const Corpus& c) {
  std::uint64_t h = fnv1a64("");
  for (const auto& a : c.ads) {
    for (const auto& f : ad_fields(a)) {
      h = fnv1a64(f, h);
      h = fnv1a64("\x1f", h);
    }
    h = fnv1a64("\x1e", h);
  }
  return h;
}

}  // namespace skillscope::corpus
