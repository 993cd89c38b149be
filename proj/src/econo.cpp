#include "skillscope/econo.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <map>
#include <unordered_map>

#include "json.hpp"

namespace skillscope::econo {

using nlohmann::json;

std::string_view to_string(FeGroup g) {
  switch (g) {
    case FeGroup::job_type: return "job_type";
    case FeGroup::posting_month: return "posting_month";
    case FeGroup::county: return "county";
  }
  return "?";
}

FeGroup parse_fe_group(std::string_view s) {
  if (s == "job_type") return FeGroup::job_type;
  if (s == "posting_month" || s == "month") return FeGroup::posting_month;
  if (s == "county") return FeGroup::county;
  throw Error("unknown_fe_group", "unknown fixed-effect group: " + std::string(s));
}

std::vector<FeGroup> model_fe(int model) {
  switch (model) {
    case 1: return {};
    case 2: return {FeGroup::job_type, FeGroup::posting_month};
    case 3: return {FeGroup::job_type, FeGroup::posting_month, FeGroup::county};
  }
  throw Error("unknown_model", "model must be 1, 2 or 3");
}

std::pair<lexicon::FeatureMatrix, StandardizationMeta> standardize(const lexicon::FeatureMatrix& f) {
  StandardizationMeta meta;
  meta.names = f.feature_names;
  lexicon::FeatureMatrix out = f;
  out.values = standardize_columns(f.values, f.feature_names, &meta.mean, &meta.sd);
  return {std::move(out), std::move(meta)};
}

FeCodes make_fe(std::string name, const std::vector<long>& keys) {
  std::vector<long> sorted = keys;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  FeCodes fe;
  fe.name = std::move(name);
  fe.n_levels = static_cast<int>(sorted.size());
  fe.level.reserve(keys.size());
  for (long k : keys)
    fe.level.push_back(static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), k) - sorted.begin()));
  return fe;
}

FeCodes corpus_fe(const corpus::Corpus& c, FeGroup g) {
  std::vector<long> keys;
  keys.reserve(c.ads.size());
  if (g == FeGroup::county) {
    std::map<std::string, long> ids;
    for (const auto& ad : c.ads) ids.emplace(ad.county, 0);
    long next = 0;
    for (auto& [name, id] : ids) id = next++;
    for (const auto& ad : c.ads) keys.push_back(ids[ad.county]);
  } else {
    for (const auto& ad : c.ads) keys.push_back(g == FeGroup::job_type ? ad.job_type.code() : ad.posting_month());
  }
  return make_fe(std::string(to_string(g)), keys);
}

int demean(Eigen::MatrixXd& m, const std::vector<FeCodes>& fe, double tol, int max_sweeps) {
  if (fe.empty()) {
    m.rowwise() -= m.colwise().mean();
    return 1;
  }
  for (const auto& g : fe)
    if (static_cast<Eigen::Index>(g.level.size()) != m.rows())
      throw Error("fe_misaligned", "fixed-effect codes do not match the number of rows");

  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    double worst = 0.0;
    for (const auto& g : fe) {
      Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(g.n_levels, m.cols());
      Eigen::VectorXd counts = Eigen::VectorXd::Zero(g.n_levels);
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        sums.row(g.level[static_cast<std::size_t>(i)]) += m.row(i);
        counts(g.level[static_cast<std::size_t>(i)]) += 1.0;
      }
      for (int l = 0; l < g.n_levels; ++l)
        if (counts(l) > 0) sums.row(l) /= counts(l);
      worst = std::max(worst, sums.cwiseAbs().maxCoeff());
      for (Eigen::Index i = 0; i < m.rows(); ++i) m.row(i) -= sums.row(g.level[static_cast<std::size_t>(i)]);
    }
    if (worst < tol) return sweep;
  }
  throw Error("demeaning_not_converged", "fixed-effect demeaning did not converge");
}

std::string stars_for(double p) {
  if (p < 0.01) return "***";
  if (p < 0.05) return "**";
  if (p < 0.1) return "*";
  return "";
}

namespace {

Coefficient make_coef(std::string name, double est, double se, double dof) {
  Coefficient c;
  c.name = std::move(name);
  c.estimate = est;
  c.std_error = se;
  if (se > 0.0) {
    c.t_stat = est / se;
    boost::math::students_t dist(dof);
    c.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(c.t_stat)));
  } else {
    c.t_stat = est == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), est);
    c.p_value = est == 0.0 ? 1.0 : 0.0;
  }
  c.stars = stars_for(c.p_value);
  return c;
}

}  // namespace

RegressionResult fit_ols(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, const std::vector<std::string>& names,
                         const std::vector<FeCodes>& fe, bool robust_se) {
  const Eigen::Index n = y.size();
  const Eigen::Index p = X.cols();
  if (X.rows() != n) throw Error("shape_mismatch", "X and y have different row counts");
  if (static_cast<Eigen::Index>(names.size()) != p) throw Error("shape_mismatch", "one name per feature column required");

  RegressionResult r;
  r.n = static_cast<std::size_t>(n);
  r.p = static_cast<std::size_t>(p);
  r.robust_se = robust_se;
  for (const auto& g : fe) {
    r.fe_absorbed.emplace_back(g.name, std::max(g.n_levels - 1, 0));
    r.absorbed += std::max(g.n_levels - 1, 0);
  }
  r.dof = static_cast<double>(n - p - r.absorbed - 1);
  if (r.dof < 1.0)
    throw Error("insufficient_observations", "need n > features + absorbed dummies + 1 (n = " + std::to_string(n) + ")");

  Eigen::MatrixXd data(n, p + 1);
  data.col(0) = y;
  data.rightCols(p) = X;
  const Eigen::RowVectorXd means = data.colwise().mean();
  r.demean_sweeps = demean(data, fe);
  const Eigen::VectorXd yt = data.col(0);
  const Eigen::MatrixXd Xt = data.rightCols(p);

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  Eigen::MatrixXd xtx_inv = Eigen::MatrixXd::Zero(p, p);
  if (p > 0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xt);
    qr.setThreshold(1e-10);
    if (qr.rank() < p) {
      std::string cols;
      const auto& perm = qr.colsPermutation().indices();
      std::vector<int> dropped(perm.data() + qr.rank(), perm.data() + p);
      std::sort(dropped.begin(), dropped.end());
      for (int j : dropped) cols += (cols.empty() ? "" : ",") + names[static_cast<std::size_t>(j)];
      throw Error("collinear_features:" + cols, "feature matrix is rank deficient; collinear columns: " + cols);
    }
    beta = qr.solve(yt);
    // (X'X)^-1 = P R^-1 R^-T P'
    const Eigen::MatrixXd R = qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd Rinv =
        R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
    const Eigen::MatrixXd inner = Rinv * Rinv.transpose();
    xtx_inv = qr.colsPermutation() * inner * qr.colsPermutation().transpose();
  }

  r.fitted_within = Xt * beta;
  const Eigen::VectorXd e = yt - r.fitted_within;
  const double rss = e.squaredNorm();
  const double tss = (y.array() - y.mean()).matrix().squaredNorm();
  const double tss_within = yt.squaredNorm();
  const double nd = static_cast<double>(n);
  r.r2 = tss > 0.0 ? 1.0 - rss / tss : 0.0;
  r.r2_adj = adjusted_r2(r.r2, nd, static_cast<double>(p + r.absorbed));
  if (!fe.empty()) {
    const double r2w = tss_within > 0.0 ? 1.0 - rss / tss_within : 0.0;
    r.r2_adj_within = adjusted_r2(r2w, nd, static_cast<double>(p));
  }
  r.residuals.rss = rss;
  r.residuals.sigma = std::sqrt(rss / r.dof);
  r.residuals.min = n ? e.minCoeff() : 0.0;
  r.residuals.max = n ? e.maxCoeff() : 0.0;
  r.residuals.mean = n ? e.mean() : 0.0;

  const Eigen::VectorXd xbar = means.tail(p).transpose();
  Eigen::MatrixXd vcov;
  double var_const = 0.0;  // variance of the demeaned-intercept (= mean of y)
  Eigen::VectorXd cov_const = Eigen::VectorXd::Zero(p);
  if (!robust_se) {
    const double s2 = rss / r.dof;
    vcov = s2 * xtx_inv;
    var_const = s2 / nd;
  } else {
    const double scale = nd / r.dof;
    const Eigen::MatrixXd meat = Xt.transpose() * e.array().square().matrix().asDiagonal() * Xt;
    vcov = scale * xtx_inv * meat * xtx_inv;
    const double e2 = e.squaredNorm();
    var_const = scale * e2 / (nd * nd);
    cov_const = scale * xtx_inv * (Xt.transpose() * e.array().square().matrix()) / nd;
  }

  const double b0 = means(0) - xbar.dot(beta);
  const double var_b0 = var_const + xbar.dot(vcov * xbar) - 2.0 * xbar.dot(cov_const);
  r.intercept = make_coef("(Intercept)", b0, std::sqrt(std::max(var_b0, 0.0)), r.dof);
  for (Eigen::Index j = 0; j < p; ++j)
    r.coefficients.push_back(
        make_coef(names[static_cast<std::size_t>(j)], beta(j), std::sqrt(std::max(vcov(j, j), 0.0)), r.dof));
  return r;
}

RegressionResult fit_ols(const RegressionSpec& spec, const corpus::Corpus& c) {
  const auto& f = spec.features;
  if (c.ads.empty()) throw Error("corpus_empty", "no ads to regress");
  std::unordered_map<std::string, Eigen::Index> row_of;
  for (std::size_t i = 0; i < f.ad_ids.size(); ++i) row_of.emplace(f.ad_ids[i], static_cast<Eigen::Index>(i));
  const auto n = static_cast<Eigen::Index>(c.ads.size());
  Eigen::VectorXd y(n);
  Eigen::MatrixXd X(n, f.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& ad = c.ads[static_cast<std::size_t>(i)];
    auto it = row_of.find(ad.id);
    if (it == row_of.end()) throw Error("feature_rows_misaligned", "no feature row for ad " + ad.id);
    y(i) = std::log(ad.wage);
    X.row(i) = f.values.row(it->second);
  }
  std::vector<FeCodes> fe;
  for (auto g : spec.fe_sets) fe.push_back(corpus_fe(c, g));
  return fit_ols(y, X, f.feature_names, fe, spec.robust_se);
}

std::string interpret(double beta, std::string_view stars) {
  std::string pct = fixed(100.0 * beta, 1);
  if (pct == "-0.0") pct = "0.0";
  std::string out;
  if (pct == "0.0")
    out = pct;
  else if (pct[0] == '-')
    out = "−" + pct.substr(1);
  else
    out = "+" + pct;
  out += "% per SD";
  if (stars == "***")
    out += ", p<0.01";
  else if (stars == "**")
    out += ", p<0.05";
  else if (stars == "*")
    out += ", p<0.1";
  return out;
}

std::string interpretation_text(const RegressionResult& r) {
  std::string out;
  for (const auto& c : r.coefficients) out += c.name + ": " + interpret(c.estimate, c.stars) + "\n";
  return out;
}

namespace {
json coef_json(const Coefficient& c) {
  return {{"name", c.name},     {"estimate", c.estimate}, {"std_error", c.std_error},
          {"t_stat", c.t_stat}, {"p_value", c.p_value},   {"stars", c.stars}};
}
}  // namespace

std::string to_json(const RegressionResult& r, const std::vector<FeGroup>& fe_sets) {
  json j;
  j["n"] = r.n;
  j["p"] = r.p;
  j["absorbed"] = r.absorbed;
  j["dof"] = r.dof;
  j["se_type"] = r.robust_se ? "HC1" : "classical";
  j["fe_sets"] = json::array();
  for (auto g : fe_sets) j["fe_sets"].push_back(std::string(to_string(g)));
  j["fe_absorbed"] = json::object();
  for (const auto& [name, k] : r.fe_absorbed) j["fe_absorbed"][name] = k;
  j["intercept"] = coef_json(r.intercept);
  j["coefficients"] = json::array();
  for (const auto& c : r.coefficients) j["coefficients"].push_back(coef_json(c));
  j["r2"] = r.r2;
  j["r2_adj"] = r.r2_adj;
  j["r2_adj_within"] = r.r2_adj_within ? json(*r.r2_adj_within) : json(nullptr);
  j["residuals"] = {{"rss", r.residuals.rss},
                    {"sigma", r.residuals.sigma},
                    {"min", r.residuals.min},
                    {"max", r.residuals.max},
                    {"mean", r.residuals.mean}};
  j["demean_sweeps"] = r.demean_sweeps;
  return j.dump(2);
}

std::string to_markdown(const std::vector<RegressionResult>& models, const std::vector<std::vector<FeGroup>>& fe_sets,
                        std::string_view title, const std::vector<int>& numbers) {
  std::string out;
  if (!title.empty()) out += "### " + std::string(title) + "\n\n";
  out += "| |";
  for (std::size_t m = 0; m < models.size(); ++m)
    out += " Model" + std::to_string(m < numbers.size() ? numbers[m] : static_cast<int>(m + 1)) + " |";
  out += "\n|---|";
  for (std::size_t m = 0; m < models.size(); ++m) out += "---:|";
  out += "\n";

  auto coef_rows = [&](const std::string& label, auto pick) {
    std::string est = "| " + label + " |", se = "| |";
    for (const auto& r : models) {
      const Coefficient* c = pick(r);
      est += c ? " " + fixed(c->estimate, 3) + c->stars + " |" : " |";
      se += c ? " (" + fixed(c->std_error, 3) + ") |" : " |";
    }
    out += est + "\n" + se + "\n";
  };
  std::vector<std::string> names;
  for (const auto& r : models)
    for (const auto& c : r.coefficients)
      if (std::find(names.begin(), names.end(), c.name) == names.end()) names.push_back(c.name);
  for (const auto& name : names)
    coef_rows(name, [&](const RegressionResult& r) -> const Coefficient* {
      for (const auto& c : r.coefficients)
        if (c.name == name) return &c;
      return nullptr;
    });
  coef_rows("Constant", [](const RegressionResult& r) -> const Coefficient* { return &r.intercept; });

  const std::pair<FeGroup, const char*> fe_rows[] = {
      {FeGroup::job_type, "Job type FE"}, {FeGroup::posting_month, "Month FE"}, {FeGroup::county, "County FE"}};
  for (const auto& [g, label] : fe_rows) {
    out += std::string("| ") + label + " |";
    for (std::size_t m = 0; m < models.size(); ++m) {
      const bool on = m < fe_sets.size() && std::find(fe_sets[m].begin(), fe_sets[m].end(), g) != fe_sets[m].end();
      out += on ? " Yes |" : " No |";
    }
    out += "\n";
  }
  out += "| R2adj |";
  for (const auto& r : models) out += " " + fixed(r.r2_adj, 3) + " |";
  out += "\n| R2adj within |";
  for (const auto& r : models) out += r.r2_adj_within ? " " + fixed(*r.r2_adj_within, 3) + " |" : " |";
  out += "\n| Number of observations |";
  for (const auto& r : models) out += " " + std::to_string(r.n) + " |";
  out += "\n";
  return out;
}

}  // namespace skillscope::econo
