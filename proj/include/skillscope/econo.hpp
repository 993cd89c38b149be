#pragma once

#include <Eigen/Core>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "skillscope/corpus.hpp"
#include "skillscope/lexicon.hpp"

namespace skillscope::econo {

enum class FeGroup { job_type, posting_month, county };
std::string_view to_string(FeGroup g);
FeGroup parse_fe_group(std::string_view s);

/// Fixed-effect sets of the three standard models: none; job type and month;
/// job type, month and county.
std::vector<FeGroup> model_fe(int model);

struct StandardizationMeta {
  std::vector<std::string> names;
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;  // sample SD, n - 1 denominator
};

/// z = (x - mean) / sd per column. Throws "zero_variance:<name>" for a
/// constant column.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> standardize_columns(
    const Eigen::MatrixBase<Derived>& x, const std::vector<std::string>& names,
    Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>* mean_out = nullptr,
    Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>* sd_out = nullptr) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = x.rows();
  if (n < 2) throw Error("insufficient_observations", "standardization needs at least two rows");
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> z(n, x.cols());
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> mean(x.cols()), sd(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const Scalar m = x.col(j).mean();
    auto centered = (x.col(j).array() - m).matrix().eval();
    const Scalar s = std::sqrt(centered.squaredNorm() / Scalar(n - 1));
    const Scalar scale = std::max(Scalar(1), x.col(j).cwiseAbs().maxCoeff());
    if (!(s > Scalar(1e-12) * scale)) {
      const std::string name = static_cast<std::size_t>(j) < names.size() ? names[static_cast<std::size_t>(j)]
                                                                          : "col" + std::to_string(j);
      throw Error("zero_variance:" + name, "feature '" + name + "' is constant and cannot be standardized");
    }
    z.col(j) = centered / s;
    mean(j) = m;
    sd(j) = s;
  }
  if (mean_out) *mean_out = mean;
  if (sd_out) *sd_out = sd;
  return z;
}

std::pair<lexicon::FeatureMatrix, StandardizationMeta> standardize(const lexicon::FeatureMatrix& f);

/// A fixed-effect grouping as dense level codes per row.
struct FeCodes {
  std::string name;
  std::vector<int> level;
  int n_levels = 0;
};

/// Dense codes from arbitrary integer keys (levels numbered in ascending key order).
FeCodes make_fe(std::string name, const std::vector<long>& keys);
FeCodes corpus_fe(const corpus::Corpus& c, FeGroup g);

/// Alternating group demeaning of every column of `m` over all groupings
/// until the largest within-group mean falls below `tol`. Returns the sweep count.
int demean(Eigen::MatrixXd& m, const std::vector<FeCodes>& fe, double tol = 1e-10, int max_sweeps = 10000);

struct Coefficient {
  std::string name;
  double estimate = 0.0;
  double std_error = 0.0;
  double t_stat = 0.0;
  double p_value = 1.0;
  std::string stars;
};

/// "***" for p < 0.01, "**" for p < 0.05, "*" for p < 0.1.
std::string stars_for(double p);

struct ResidualSummary {
  double rss = 0.0;
  double sigma = 0.0;
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
};

struct RegressionResult {
  Coefficient intercept;
  std::vector<Coefficient> coefficients;
  std::vector<std::pair<std::string, int>> fe_absorbed;  // (group, levels - 1)
  double r2 = 0.0;
  double r2_adj = 0.0;
  /// Only defined when fixed effects are absorbed.
  std::optional<double> r2_adj_within;
  std::size_t n = 0;
  std::size_t p = 0;
  int absorbed = 0;
  double dof = 0.0;
  bool robust_se = false;
  int demean_sweeps = 0;
  ResidualSummary residuals;
  Eigen::VectorXd fitted_within;  // demeaned X times beta
};

/// OLS of y on X plus absorbed fixed effects.
///   r2, r2_adj:    against total variation of y, penalty p + absorbed
///   r2_adj_within: against demeaned variation of y, penalty p
///   dof = n - p - absorbed - 1
RegressionResult fit_ols(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, const std::vector<std::string>& names,
                         const std::vector<FeCodes>& fe = {}, bool robust_se = false);

struct RegressionSpec {
  lexicon::FeatureMatrix features;  // already standardized
  std::vector<FeGroup> fe_sets;
  bool robust_se = false;
};

/// Aligns feature rows to the corpus by ad id and regresses ln(wage).
RegressionResult fit_ols(const RegressionSpec& spec, const corpus::Corpus& c);

inline double adjusted_r2(double r2, double n, double p) { return 1.0 - (1.0 - r2) * (n - 1.0) / (n - p - 1.0); }

/// "+12.4% per SD, p<0.01"; the p clause is omitted without stars.
std::string interpret(double beta, std::string_view stars);
/// One "<feature>: <interpretation>" line per coefficient.
std::string interpretation_text(const RegressionResult& r);

std::string to_json(const RegressionResult& r, const std::vector<FeGroup>& fe_sets);
/// Side-by-side models: coefficient rows with stars, SEs in parentheses, FE
/// indicator rows, R2adj, R2adj within and N. Columns are headed Model1..N
/// unless `numbers` gives the model number of each column.
std::string to_markdown(const std::vector<RegressionResult>& models, const std::vector<std::vector<FeGroup>>& fe_sets,
                        std::string_view title = {}, const std::vector<int>& numbers = {});

}  // namespace skillscope::econo
