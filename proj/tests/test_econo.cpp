#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "skillscope/econo.hpp"

using namespace skillscope;
using namespace skillscope::econo;

namespace {

struct Panel {
  Eigen::VectorXd y;
  Eigen::MatrixXd X;
  std::vector<std::vector<int>> groups;
  std::vector<FeCodes> fe;
};

Panel make_panel(int n, int p, std::uint64_t seed, bool with_fe) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  Panel d;
  d.X.resize(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) d.X(i, j) = z(rng);
  d.y = Eigen::VectorXd::Constant(n, 10.0);
  for (int j = 0; j < p; ++j) d.y += (0.1 * (j + 1)) * d.X.col(j);
  if (with_fe) {
    const int sizes[] = {4, 12, 7};
    const char* names[] = {"job_type", "posting_month", "county"};
    for (int g = 0; g < 3; ++g) {
      std::vector<int> level(static_cast<std::size_t>(n));
      std::vector<long> keys;
      for (int i = 0; i < n; ++i) {
        level[static_cast<std::size_t>(i)] = static_cast<int>(rng() % static_cast<unsigned>(sizes[g]));
        d.y(i) += 0.2 * level[static_cast<std::size_t>(i)] - 0.05 * g;
        keys.push_back(level[static_cast<std::size_t>(i)]);
      }
      d.groups.push_back(level);
      d.fe.push_back(make_fe(names[g], keys));
    }
  }
  for (int i = 0; i < n; ++i) d.y(i) += 0.3 * z(rng);
  return d;
}

std::vector<std::string> names_for(int p) {
  std::vector<std::string> n;
  for (int j = 0; j < p; ++j) n.push_back("x" + std::to_string(j + 1));
  return n;
}

}  // namespace

TEST_CASE("standardizing 1, 2, 3 gives -1, 0, 1") {
  Eigen::MatrixXd x(3, 1);
  x << 1, 2, 3;
  Eigen::VectorXd mean, sd;
  const Eigen::MatrixXd z = standardize_columns(x, {"c"}, &mean, &sd);
  CHECK(z(0, 0) == doctest::Approx(-1.0));
  CHECK(z(1, 0) == doctest::Approx(0.0));
  CHECK(z(2, 0) == doctest::Approx(1.0));
  CHECK(mean(0) == 2.0);
  CHECK(sd(0) == 1.0);
}

TEST_CASE("constant columns are rejected by name") {
  Eigen::MatrixXd x(4, 2);
  x << 1, 5, 2, 5, 3, 5, 4, 5;
  try {
    standardize_columns(x, {"ok", "Cognitive"});
    FAIL("expected zero_variance");
  } catch (const Error& e) {
    CHECK(e.code() == "zero_variance:Cognitive");
  }
}

TEST_CASE("standardized columns have mean zero and unit sd") {
  const Panel d = make_panel(300, 3, 1, false);
  const Eigen::MatrixXd z = standardize_columns(d.X, names_for(3));
  for (Eigen::Index j = 0; j < 3; ++j) {
    CHECK(std::abs(z.col(j).mean()) < 1e-12);
    CHECK(z.col(j).squaredNorm() / 299.0 == doctest::Approx(1.0));
  }
  const Eigen::MatrixXf zf = standardize_columns(d.X.cast<float>().eval(), names_for(3));
  CHECK(zf(0, 0) == doctest::Approx(z(0, 0)).epsilon(1e-4));
}

TEST_CASE("adjusted r2 reference value") { CHECK(adjusted_r2(0.5, 11, 2) == doctest::Approx(0.375)); }

TEST_CASE("pooled OLS matches the normal equations") {
  const Panel d = make_panel(200, 3, 2, false);
  const RegressionResult r = fit_ols(d.y, d.X, names_for(3));
  const Eigen::VectorXd b = oracle::ols_normal_equations(d.y, d.X);
  CHECK(r.intercept.estimate == doctest::Approx(b(0)).epsilon(1e-10));
  for (int j = 0; j < 3; ++j) CHECK(r.coefficients[static_cast<std::size_t>(j)].estimate == doctest::Approx(b(j + 1)).epsilon(1e-10));
  CHECK(r.dof == 196.0);
  CHECK(!r.r2_adj_within);
  CHECK(r.r2_adj == doctest::Approx(adjusted_r2(r.r2, 200, 3)));
}

TEST_CASE("classical standard errors match sigma^2 (Z'Z)^-1") {
  const Panel d = make_panel(150, 2, 3, false);
  const RegressionResult r = fit_ols(d.y, d.X, names_for(2));
  Eigen::MatrixXd Z(150, 3);
  Z.col(0).setOnes();
  Z.rightCols(2) = d.X;
  const Eigen::VectorXd b = oracle::ols_normal_equations(d.y, d.X);
  const Eigen::VectorXd e = d.y - Z * b;
  const double s2 = e.squaredNorm() / (150 - 3);
  const Eigen::MatrixXd V = s2 * (Z.transpose() * Z).inverse();
  CHECK(r.intercept.std_error == doctest::Approx(std::sqrt(V(0, 0))).epsilon(1e-9));
  CHECK(r.coefficients[1].std_error == doctest::Approx(std::sqrt(V(2, 2))).epsilon(1e-9));
  CHECK(r.coefficients[1].t_stat == doctest::Approx(r.coefficients[1].estimate / r.coefficients[1].std_error));
}

TEST_CASE("HC1 standard errors match the sandwich") {
  const Panel d = make_panel(150, 2, 4, false);
  const RegressionResult r = fit_ols(d.y, d.X, names_for(2), {}, true);
  Eigen::MatrixXd Z(150, 3);
  Z.col(0).setOnes();
  Z.rightCols(2) = d.X;
  const Eigen::VectorXd b = oracle::ols_normal_equations(d.y, d.X);
  const Eigen::VectorXd e = d.y - Z * b;
  const Eigen::MatrixXd bread = (Z.transpose() * Z).inverse();
  const Eigen::MatrixXd meat = Z.transpose() * e.array().square().matrix().asDiagonal() * Z;
  const Eigen::MatrixXd V = bread * meat * bread * (150.0 / 147.0);
  CHECK(r.robust_se);
  CHECK(r.coefficients[0].std_error == doctest::Approx(std::sqrt(V(1, 1))).epsilon(1e-9));
}

TEST_CASE("absorbed fixed effects match explicit dummies") {
  const Panel d = make_panel(400, 2, 5, true);
  const RegressionResult r = fit_ols(d.y, d.X, names_for(2), d.fe);
  const Eigen::VectorXd b = oracle::ols_with_dummies(d.y, d.X, d.groups);
  CHECK(r.coefficients[0].estimate == doctest::Approx(b(0)).epsilon(1e-8));
  CHECK(r.coefficients[1].estimate == doctest::Approx(b(1)).epsilon(1e-8));
  CHECK(r.absorbed == 3 + 11 + 6);
  CHECK(r.dof == 400.0 - 2 - 20 - 1);
  REQUIRE(r.r2_adj_within);
  CHECK(r.fe_absorbed.size() == 3);
}

TEST_CASE("residuals are orthogonal to the demeaned regressors") {
  const Panel d = make_panel(300, 3, 6, true);
  Eigen::MatrixXd Xd = d.X;
  demean(Xd, d.fe);
  Eigen::MatrixXd yd = d.y;
  demean(yd, d.fe);
  const RegressionResult r = fit_ols(d.y, d.X, names_for(3), d.fe);
  const Eigen::VectorXd resid = yd.col(0) - r.fitted_within;
  CHECK((Xd.transpose() * resid).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("row permutation leaves estimates unchanged") {
  const Panel d = make_panel(120, 2, 7, true);
  std::vector<int> perm(120);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(1));
  Eigen::VectorXd y2(120);
  Eigen::MatrixXd X2(120, 2);
  std::vector<FeCodes> fe2 = d.fe;
  for (int i = 0; i < 120; ++i) {
    y2(i) = d.y(perm[static_cast<std::size_t>(i)]);
    X2.row(i) = d.X.row(perm[static_cast<std::size_t>(i)]);
    for (std::size_t g = 0; g < fe2.size(); ++g)
      fe2[g].level[static_cast<std::size_t>(i)] = d.fe[g].level[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
  }
  const RegressionResult a = fit_ols(d.y, d.X, names_for(2), d.fe);
  const RegressionResult b = fit_ols(y2, X2, names_for(2), fe2);
  CHECK(a.coefficients[0].estimate == doctest::Approx(b.coefficients[0].estimate).epsilon(1e-10));
  CHECK(a.r2_adj == doctest::Approx(b.r2_adj).epsilon(1e-10));
}

TEST_CASE("rescaling wages moves only the intercept") {
  const Panel d = make_panel(150, 2, 8, false);
  const RegressionResult a = fit_ols(d.y, d.X, names_for(2));
  const Eigen::VectorXd shifted = (d.y.array() + std::log(1000.0)).matrix();
  const RegressionResult b = fit_ols(shifted, d.X, names_for(2));
  CHECK(b.intercept.estimate == doctest::Approx(a.intercept.estimate + std::log(1000.0)));
  CHECK(b.coefficients[0].estimate == doctest::Approx(a.coefficients[0].estimate).epsilon(1e-10));
  CHECK(b.r2 == doctest::Approx(a.r2).epsilon(1e-10));
}

TEST_CASE("frisch waugh lovell") {
  const Panel d = make_panel(250, 3, 9, false);
  const RegressionResult full = fit_ols(d.y, d.X, names_for(3));
  // Partial x1 and y on [1, x2, x3], then regress residual on residual.
  Eigen::MatrixXd W(250, 3);
  W.col(0).setOnes();
  W.rightCols(2) = d.X.rightCols(2);
  auto resid = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    return v - W * (W.transpose() * W).ldlt().solve(W.transpose() * v);
  };
  const Eigen::VectorXd rx = resid(d.X.col(0));
  const Eigen::VectorXd ry = resid(d.y);
  CHECK(full.coefficients[0].estimate == doctest::Approx(rx.dot(ry) / rx.squaredNorm()).epsilon(1e-10));
}

TEST_CASE("collinear and undersized designs fail") {
  const Panel d = make_panel(50, 2, 10, false);
  Eigen::MatrixXd X(50, 3);
  X << d.X, d.X.col(0) * 2.0 + d.X.col(1);
  try {
    fit_ols(d.y, X, names_for(3));
    FAIL("expected collinear_features");
  } catch (const Error& e) {
    CHECK(e.code().rfind("collinear_features:", 0) == 0);
  }
  CHECK_THROWS_AS(fit_ols(d.y.head(3), d.X.topRows(3), names_for(2)), Error);
  CHECK_THROWS_AS(fit_ols(d.y, d.X.topRows(10), names_for(2)), Error);
  CHECK_THROWS_AS(fit_ols(d.y, d.X, names_for(1)), Error);
}

TEST_CASE("significance stars") {
  CHECK(stars_for(0.009) == "***");
  CHECK(stars_for(0.01) == "**");
  CHECK(stars_for(0.049) == "**");
  CHECK(stars_for(0.05) == "*");
  CHECK(stars_for(0.099) == "*");
  CHECK(stars_for(0.1) == "");
}

TEST_CASE("interpretation strings") {
  CHECK(interpret(0.124, "***") == "+12.4% per SD, p<0.01");
  CHECK(interpret(0.0, "") == "0.0% per SD");
  CHECK(interpret(-0.030, "") == "\xE2\x88\x92" "3.0% per SD");
  CHECK(interpret(0.04, "**") == "+4.0% per SD, p<0.05");
  CHECK(interpret(0.04, "*") == "+4.0% per SD, p<0.1");
}

TEST_CASE("model fixed-effect sets") {
  CHECK(model_fe(1).empty());
  CHECK(model_fe(2) == std::vector<FeGroup>{FeGroup::job_type, FeGroup::posting_month});
  CHECK(model_fe(3).size() == 3);
  CHECK_THROWS_AS(model_fe(4), Error);
  CHECK(parse_fe_group(to_string(FeGroup::county)) == FeGroup::county);
  CHECK_THROWS_AS(parse_fe_group("weekday"), Error);
}

TEST_CASE("fe codes are dense in key order") {
  const FeCodes f = make_fe("g", {30, 10, 30, 20});
  CHECK(f.level == std::vector<int>{2, 0, 2, 1});
  CHECK(f.n_levels == 3);
}

TEST_CASE("regression tables") {
  const Panel d = make_panel(200, 2, 11, true);
  const RegressionResult m1 = fit_ols(d.y, d.X, names_for(2));
  const RegressionResult m3 = fit_ols(d.y, d.X, names_for(2), d.fe);
  const std::string md = to_markdown({m1, m3}, {{}, model_fe(3)}, "Demo");
  CHECK(md.find("Constant") != std::string::npos);
  CHECK(md.find("County FE") != std::string::npos);
  CHECK(md.find("Number of observations") != std::string::npos);
  CHECK(to_json(m3, model_fe(3)).find("r2_adj_within") != std::string::npos);
}
