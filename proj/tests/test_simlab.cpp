#include "arpen/error.hpp"
#include "arpen/simlab.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace arpen;

namespace {

// Innovations of a p = 0 design are y - X beta exactly.
Eigen::VectorXd raw_errors(const SimulatedData& s) { return s.data.y - s.data.x * s.truth.beta; }

double mean(const Eigen::VectorXd& v) { return v.mean(); }
double central_moment(const Eigen::VectorXd& v, int k) {
  const double m = v.mean();
  return (v.array() - m).pow(k).mean();
}

TEST(SimCaseConfig, DefaultsAndValidation) {
  const SimCaseConfig r = SimCaseConfig{}.resolved();
  EXPECT_EQ(r.beta_true.size(), 8);
  EXPECT_EQ(r.phi_true.size(), 1);
  EXPECT_DOUBLE_EQ(r.phi_true[0], 0.8);
  EXPECT_EQ(*r.contamination_rate, 0.0);
  EXPECT_TRUE(r.covariate_cov.isIdentity());

  SimCaseConfig c2;
  c2.sim_case = SimCase::Case2;
  c2.ar_order_true = 2;
  const auto r2 = c2.resolved();
  EXPECT_EQ(r2.beta_true.size(), 40);
  EXPECT_EQ((r2.beta_true.array() != 0.0).count(), 20);
  EXPECT_DOUBLE_EQ(r2.phi_true[1], -0.2);

  SimCaseConfig c3;
  c3.sim_case = SimCase::Case3;
  EXPECT_DOUBLE_EQ(*c3.resolved().contamination_rate, 0.1);
  EXPECT_EQ(c3.resolved().contaminated_count(), 30);

  SimCaseConfig bad;
  bad.contamination_rate = 0.1;
  EXPECT_THROW(bad.resolved(), ConfigError);
  bad = {};
  bad.phi_true = Eigen::VectorXd::Constant(2, 0.1);
  EXPECT_THROW(bad.resolved(), ConfigError);
  bad = {};
  bad.covariate_cov = -Eigen::MatrixXd::Identity(8, 8);
  EXPECT_THROW(bad.resolved(), ConfigError);
}

TEST(Ar1Covariance, Entries) {
  const auto s = ar1_covariance(3, 0.5);
  EXPECT_DOUBLE_EQ(s(0, 2), 0.25);
  EXPECT_DOUBLE_EQ(s(1, 1), 1.0);
}

TEST(GenerateCase, DeterministicPerSeedAndRep) {
  SimCaseConfig c;
  const auto a = generate_case(c, 4);
  const auto b = generate_case(c, 4);
  const auto other = generate_case(c, 5);
  EXPECT_EQ(a.data.y, b.data.y);
  EXPECT_EQ(a.data.x, b.data.x);
  EXPECT_NE(a.data.y, other.data.y);
}

TEST(GenerateCase, ZeroContaminationCase3EqualsCase1) {
  SimCaseConfig c1;
  c1.nu = 3.0;
  SimCaseConfig c3 = c1;
  c3.sim_case = SimCase::Case3;
  c3.contamination_rate = 0.0;
  for (int rep = 0; rep < 3; ++rep) {
    const auto a = generate_case(c1, rep);
    const auto b = generate_case(c3, rep);
    EXPECT_EQ(a.data.y, b.data.y);
    EXPECT_EQ(a.data.x, b.data.x);
  }
}

TEST(GenerateCase, ContaminationHitsLeadingInnovations) {
  SimCaseConfig c;
  c.sim_case = SimCase::Case3;
  c.ar_order_true = 0;
  c.nu = 3.0;
  const auto s = generate_case(c, 0);
  const Eigen::VectorXd a = raw_errors(s);
  for (int t = 0; t < 30; ++t) EXPECT_NEAR(a[t], 50.0, 6.0) << t;
  EXPECT_LT(std::abs(a.tail(270).mean()), 1.0);
}

TEST(GenerateCase, HeavyTailsAtNuThree) {
  SimCaseConfig c;
  c.n = 100000;
  c.ar_order_true = 0;
  c.nu = 3.0;
  const Eigen::VectorXd a = raw_errors(generate_case(c, 0));
  const double kurt = central_moment(a, 4) / std::pow(central_moment(a, 2), 2);
  EXPECT_GT(kurt, 6.0);
}

TEST(GenerateCase, ArAutocorrelation) {
  SimCaseConfig c;
  c.n = 100000;
  c.innovation = InnovationKind::Normal;
  const auto s = generate_case(c, 0);
  const Eigen::VectorXd e = raw_errors(s);
  const Eigen::Index n = e.size();
  const double m = e.mean();
  const Eigen::VectorXd z = e.array() - m;
  const double acf1 = z.head(n - 1).dot(z.tail(n - 1)) / z.squaredNorm();
  EXPECT_NEAR(acf1, 0.8, 0.02);
}

TEST(GenerateCase, InnovationMeanAndNormalLimit) {
  SimCaseConfig c;
  c.n = 100000;
  c.ar_order_true = 0;
  c.nu = 1e6;
  const Eigen::VectorXd t = raw_errors(generate_case(c, 1));
  EXPECT_LT(std::abs(mean(t)), 5.0 / std::sqrt(100000.0));
  c.innovation = InnovationKind::Normal;
  const Eigen::VectorXd z = raw_errors(generate_case(c, 2));
  EXPECT_LT(std::abs(mean(t) - mean(z)), 0.01);
  EXPECT_LT(std::abs(central_moment(t, 2) - central_moment(z, 2)), 0.01);
}

TEST(SelectionMetrics, PerfectAndPerturbedFits) {
  FitResult f;
  f.state.beta = default_beta(SimCase::Case1);
  f.model.p = 1;
  ParameterState truth;
  truth.beta = f.state.beta;
  truth.phi = Eigen::VectorXd::Constant(1, 0.8);
  auto m = selection_metrics(f, truth);
  EXPECT_EQ(m.correct, 5.0);
  EXPECT_EQ(m.incorrect, 0.0);
  EXPECT_EQ(m.cor_fit, 1.0);
  EXPECT_EQ(m.ar_order_hit, 1.0);
  EXPECT_EQ(m.mse, 0.0);

  f.state.beta[0] += 0.3;
  m = selection_metrics(f, truth);
  EXPECT_NEAR(m.mse, 0.09, 1e-14);

  f.state.beta[2] = 0.01;
  f.state.beta[1] = 0.0;
  f.model.p = 2;
  m = selection_metrics(f, truth);
  EXPECT_EQ(m.correct, 4.0);
  EXPECT_EQ(m.incorrect, 1.0);
  EXPECT_EQ(m.cor_fit, 0.0);
  EXPECT_EQ(m.ar_order_hit, 0.0);
}

TEST(SelectionMetrics, BoundsHoldOnRandomFits) {
  std::mt19937_64 rng(61);
  ParameterState truth;
  truth.beta = default_beta(SimCase::Case1);
  truth.phi = Eigen::VectorXd::Constant(1, 0.8);
  std::bernoulli_distribution zero(0.4);
  for (int i = 0; i < 200; ++i) {
    FitResult f;
    f.state.beta = test::random_vector(rng, 8, -3, 3);
    for (Eigen::Index j = 0; j < 8; ++j) {
      if (zero(rng)) f.state.beta[j] = 0.0;
    }
    const auto m = selection_metrics(f, truth);
    EXPECT_GE(m.correct, 0.0);
    EXPECT_LE(m.correct, 5.0);
    EXPECT_GE(m.incorrect, 0.0);
    EXPECT_LE(m.incorrect, 3.0);
    EXPECT_EQ(m.cor_fit == 1.0, m.correct == 5.0 && m.incorrect == 0.0);
    EXPECT_GE(m.mse, 0.0);
  }
}

TEST(SelectionMetrics, WeightedMse) {
  FitResult f;
  f.state.beta = Eigen::VectorXd::Zero(2);
  ParameterState truth;
  truth.beta = Eigen::VectorXd::Ones(2);
  Eigen::MatrixXd cov(2, 2);
  cov << 1.0, 0.5, 0.5, 1.0;
  EXPECT_NEAR(selection_metrics(f, truth, 1e-4, cov).mse, 3.0, 1e-14);
}

StudyOptions quick_options() {
  StudyOptions o;
  o.grid.lambda_grid = step_grid(0.0, 1.0, 0.25);
  o.grid.gamma_grid = {0.5, 1.0};
  o.grid.lambda2_grid = {0.0, 0.5};
  o.p_max = 2;
  o.threads = 1;
  return o;
}

TEST(RunStudy, SingleReplicationMatchesDirectMetrics) {
  SimCaseConfig c;
  c.reps = 1;
  c.n = 120;
  const StudyOptions o = quick_options();
  const std::vector<StudyMethod> methods{{"SCAD", ErrorFamily::t_fixed(10.0), PenaltyKind::Scad}};
  const StudyReport r = run_study(c, methods, o);
  ASSERT_EQ(r.reps_completed, 1);
  const auto sim = generate_case(c, 0);
  const OrderSelection s = select_ar_order(sim.data, ErrorFamily::t_fixed(10.0), PenaltyKind::Scad, 2, o.grid);
  const auto m = selection_metrics(s.report.best, sim.truth);
  EXPECT_EQ(r.rows[0].mean_mse, m.mse);
  EXPECT_EQ(r.rows[0].mean_correct, m.correct);
  EXPECT_EQ(r.rows[0].ar_order_hits, static_cast<int>(m.ar_order_hit));
  EXPECT_EQ(r.rows[0].mean_estimates, s.report.best.slopes());
}

TEST(RunStudy, DeterministicAcrossThreadCounts) {
  SimCaseConfig c;
  c.reps = 4;
  c.n = 100;
  StudyOptions o = quick_options();
  const auto methods = default_methods(ErrorFamily::t_fixed(10.0));
  const StudyReport a = run_study(c, methods, o);
  o.threads = 3;
  const StudyReport b = run_study(c, methods, o);
  std::ostringstream sa, sb;
  write_selection_table(a, ReportFormat::Csv, sa);
  write_estimation_table(a, ReportFormat::Csv, sa);
  write_selection_table(b, ReportFormat::Csv, sb);
  write_estimation_table(b, ReportFormat::Csv, sb);
  EXPECT_EQ(sa.str(), sb.str());
  ASSERT_EQ(a.rows.size(), 6u);
  EXPECT_EQ(a.rows[0].method, "OLS");
  for (std::size_t k = 0; k < a.rows.size(); ++k) EXPECT_EQ(a.rows[k].mean_mse, b.rows[k].mean_mse);
}

TEST(RunStudy, SelectionTableHeader) {
  SimCaseConfig c;
  c.reps = 1;
  c.n = 80;
  const StudyReport r = run_study(c, {{"OLS", ErrorFamily::normal(), PenaltyKind::None}}, quick_options());
  std::ostringstream os;
  write_selection_table(r, ReportFormat::Csv, os);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "Method,MSE,Correct,Incorrect,Cor.fit,AR order");
}

}  // namespace
