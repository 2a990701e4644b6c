#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "pcg/error.hpp"
#include "pcg/mlp.hpp"

namespace pcg {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd random_inputs(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, scale);
  MatrixXd X(rows, cols);
  for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = n(rng);
  return X;
}

MlpModel randomized(std::uint64_t seed, std::size_t inputs) {
  MlpModel m = init_model(seed, inputs);
  std::mt19937_64 rng(seed * 7 + 1);
  std::normal_distribution<double> n(0.0, 0.5);
  VectorXd theta = m.parameters();
  for (Eigen::Index i = 0; i < theta.size(); ++i) theta[i] = n(rng);
  m.set_parameters(theta);
  return m;
}

// Three nested loops straight from the layer formula, no Eigen.
double reference_forward(const MlpModel& m, const std::vector<double>& x) {
  const auto& L = m.layers;
  std::vector<double> h1(kHidden1), h2(kHidden2);
  for (std::size_t r = 0; r < kHidden1; ++r) {
    double z = L[0].biases(static_cast<Eigen::Index>(r));
    for (std::size_t c = 0; c < x.size(); ++c) z += L[0].weights(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) * x[c];
    h1[r] = 1.0 / (1.0 + std::exp(-z));
  }
  for (std::size_t r = 0; r < kHidden2; ++r) {
    double z = L[1].biases(static_cast<Eigen::Index>(r));
    for (std::size_t c = 0; c < kHidden1; ++c) z += L[1].weights(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) * h1[c];
    h2[r] = z;
  }
  double y = L[2].biases(0);
  for (std::size_t c = 0; c < kHidden2; ++c) y += L[2].weights(0, static_cast<Eigen::Index>(c)) * h2[c];
  return y;
}

TEST(Init, Deterministic) {
  EXPECT_EQ(init_model(3).parameters(), init_model(3).parameters());
  EXPECT_NE(init_model(3).parameters(), init_model(4).parameters());
}

TEST(Init, RangeShapesAndBiases) {
  const MlpModel m = init_model(11);
  EXPECT_EQ(m.layers[0].weights.rows(), 10);
  EXPECT_EQ(m.layers[0].weights.cols(), 324);
  EXPECT_EQ(m.layers[1].weights.rows(), 5);
  EXPECT_EQ(m.layers[1].weights.cols(), 10);
  EXPECT_EQ(m.layers[2].weights.rows(), 1);
  EXPECT_EQ(m.layers[2].weights.cols(), 5);
  EXPECT_EQ(m.layers[0].activation, Activation::Logistic);
  EXPECT_EQ(m.layers[1].activation, Activation::Linear);
  EXPECT_EQ(m.layers[2].activation, Activation::Linear);
  for (const DenseLayer& l : m.layers) {
    EXPECT_LE(l.weights.maxCoeff(), 0.5);
    EXPECT_GE(l.weights.minCoeff(), -0.5);
    EXPECT_TRUE(l.biases.isZero());
  }
  EXPECT_GT(m.layers[0].weights.maxCoeff(), 0.45);
  EXPECT_LT(m.layers[0].weights.minCoeff(), -0.45);
}

TEST(Parameters, CountAndRoundTrip) {
  // 324*10 + 10 + 10*5 + 5 + 5*1 + 1
  EXPECT_EQ(init_model(0).parameter_count(), 3311u);
  MlpModel m = init_model(1);
  VectorXd theta = VectorXd::LinSpaced(3311, -1.0, 1.0);
  m.set_parameters(theta);
  EXPECT_EQ(m.parameters(), theta);
  EXPECT_EQ(m.layers[0].weights(0, 1), theta[1]);         // row-major W1
  EXPECT_EQ(m.layers[0].biases(0), theta[3240]);
  EXPECT_EQ(m.layers[2].biases(0), theta[3310]);
}

TEST(Forward, ZeroWeightsGiveOutputBias) {
  MlpModel m = init_model(2);
  VectorXd theta = VectorXd::Zero(3311);
  theta[3310] = 0.37;
  m.set_parameters(theta);
  const MatrixXd X = random_inputs(5, 324, 9);
  const VectorXd y = forward_batch(m, X);
  for (Eigen::Index i = 0; i < y.size(); ++i) EXPECT_EQ(y(i), 0.37);
}

TEST(Forward, ZeroInputClosedForm) {
  MlpModel m = randomized(5, 324);
  m.layers[0].weights.setZero();
  m.layers[0].biases.setZero();
  const std::vector<double> x(324, 0.0);
  // Every hidden-1 unit sits at logistic(0) = 0.5.
  double expect = m.layers[2].biases(0);
  for (int j = 0; j < 5; ++j) {
    double h2 = m.layers[1].biases(j);
    for (int k = 0; k < 10; ++k) h2 += m.layers[1].weights(j, k) * 0.5;
    expect += m.layers[2].weights(0, j) * h2;
  }
  EXPECT_NEAR(forward(m, x), expect, 1e-15);
}

TEST(Forward, MatchesReference) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const MlpModel m = randomized(seed, 324);
    const MatrixXd X = random_inputs(8, 324, 100 + seed);
    const VectorXd batch = forward_batch(m, X);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      std::vector<double> x(324);
      for (int c = 0; c < 324; ++c) x[static_cast<std::size_t>(c)] = X(i, c);
      EXPECT_NEAR(forward(m, x), reference_forward(m, x), 1e-12);
      EXPECT_NEAR(batch(i), reference_forward(m, x), 1e-12);
    }
  }
}

TEST(Logistic, StableTails) {
  EXPECT_EQ(logistic(0.0), 0.5);
  EXPECT_EQ(logistic(-1000.0), 0.0);
  EXPECT_EQ(logistic(1000.0), 1.0);
  EXPECT_NEAR(logistic(2.0) + logistic(-2.0), 1.0, 1e-15);
}

TEST(Jacobian, MatchesCentralDifferences) {
  double worst = 0.0;
  for (std::uint64_t probe = 0; probe < 100; ++probe) {
    MlpModel m = randomized(200 + probe, 12);
    const MatrixXd X = random_inputs(1, 12, 500 + probe);
    const MatrixXd J = jacobian(m, X);
    ASSERT_EQ(J.cols(), static_cast<Eigen::Index>(m.parameter_count()));
    const VectorXd theta = m.parameters();
    VectorXd fd(theta.size());
    const double h = 1e-5;
    for (Eigen::Index p = 0; p < theta.size(); ++p) {
      VectorXd tp = theta, tm = theta;
      tp[p] += h;
      tm[p] -= h;
      m.set_parameters(tp);
      const double yp = forward_batch(m, X)(0);
      m.set_parameters(tm);
      const double ym = forward_batch(m, X)(0);
      fd[p] = (yp - ym) / (2.0 * h);
    }
    m.set_parameters(theta);
    worst = std::max(worst, (J.row(0).transpose() - fd).norm() / fd.norm());
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Jacobian, ZeroInputZeroFirstLayer) {
  MlpModel m = randomized(3, 324);
  m.layers[0].weights.setZero();
  const MatrixXd J = jacobian(m, MatrixXd::Zero(1, 324));
  EXPECT_TRUE(J.leftCols(3240).isZero());
  EXPECT_FALSE(J.middleCols(3240, 10).isZero());
}

TEST(Train, LinearTargetMatchesLeastSquares) {
  const MatrixXd X5 = random_inputs(200, 5, 42, 0.5);
  const VectorXd w = (VectorXd(5) << 0.3, -0.2, 0.1, 0.25, -0.15).finished();
  const VectorXd y = X5 * w + VectorXd::Constant(200, 0.05);
  MatrixXd A(200, 6);
  A << X5, VectorXd::Ones(200);
  const VectorXd beta = (A.transpose() * A).ldlt().solve(A.transpose() * y);
  const VectorXd ls = A * beta;

  TrainConfig cfg;
  cfg.early_stopping = false;
  cfg.max_epochs = 300;
  cfg.mse_goal = 1e-12;
  const TrainResult r = fit_lm(X5, y, cfg);
  const VectorXd pred = forward_batch(r.model, X5);
  EXPECT_LT((pred - y).squaredNorm() / 200.0, 1e-6);
  EXPECT_LT((pred - ls).cwiseAbs().maxCoeff(), 1e-3);
}

// XOR on the first two of 324 slots, each pattern repeated three times.
void xor_data(MatrixXd& X, VectorXd& t) {
  X = MatrixXd::Zero(12, 324);
  t.resize(12);
  const double pts[4][3] = {{0, 0, -1}, {0, 1, 1}, {1, 0, 1}, {1, 1, -1}};
  for (int i = 0; i < 12; ++i) {
    X(i, 0) = pts[i % 4][0];
    X(i, 1) = pts[i % 4][1];
    t(i) = pts[i % 4][2];
  }
}

TEST(Train, Xor) {
  MatrixXd X;
  VectorXd t;
  xor_data(X, t);
  TrainConfig cfg;
  cfg.early_stopping = false;
  cfg.max_epochs = 100;
  cfg.mse_goal = 1e-3;
  int solved = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    cfg.seed = seed;
    const TrainResult r = train_lm(X, t, cfg);
    const double mse = (forward_batch(r.model, X) - t).squaredNorm() / 12.0;
    solved += mse < 0.01;
  }
  EXPECT_GE(solved, 8);
}

TEST(Train, AcceptedStepsDecreaseSse) {
  const MatrixXd X = random_inputs(60, 324, 8);
  VectorXd t(60);
  for (int i = 0; i < 60; ++i) t(i) = X(i, 0) + 0.5 * X(i, 1) > 0 ? 1.0 : -1.0;
  TrainConfig cfg;
  cfg.max_epochs = 30;
  cfg.early_stopping = false;
  const TrainResult r = train_lm(X, t, cfg);
  ASSERT_GE(r.report.accepted_sse.size(), 2u);
  for (std::size_t k = 1; k < r.report.accepted_sse.size(); ++k) {
    EXPECT_LT(r.report.accepted_sse[k], r.report.accepted_sse[k - 1]);
  }
  EXPECT_EQ(r.report.epochs.size() + 1, r.report.accepted_sse.size());
}

TEST(Train, DeterministicGivenSeed) {
  const MatrixXd X = random_inputs(40, 324, 10);
  VectorXd t(40);
  for (int i = 0; i < 40; ++i) t(i) = X(i, 3) > 0 ? 1.0 : -1.0;
  TrainConfig cfg;
  cfg.max_epochs = 15;
  cfg.seed = 77;
  const TrainResult a = train_lm(X, t, cfg);
  const TrainResult b = train_lm(X, t, cfg);
  EXPECT_EQ(a.model.parameters(), b.model.parameters());
  EXPECT_EQ(a.report.val_count, 6u);
}

TEST(Train, NegatedTargetsFromNegatedModel) {
  const MatrixXd X = random_inputs(30, 324, 12);
  VectorXd t(30);
  for (int i = 0; i < 30; ++i) t(i) = X(i, 5) - X(i, 6) > 0 ? 1.0 : -1.0;
  TrainConfig cfg;
  cfg.max_epochs = 10;
  cfg.seed = 3;
  const MlpModel init = init_model(cfg.seed);
  MlpModel neg = init;
  neg.layers[2].weights = -neg.layers[2].weights;
  neg.layers[2].biases = -neg.layers[2].biases;
  const TrainResult a = train_lm(X, t, cfg, init);
  const TrainResult b = train_lm(X, -t, cfg, neg);
  const MatrixXd probe = random_inputs(20, 324, 13);
  EXPECT_EQ(forward_batch(b.model, probe), -forward_batch(a.model, probe));
}

TEST(Train, EarlyStoppingRestoresBestValidationModel) {
  const MatrixXd X = random_inputs(80, 324, 21);
  VectorXd t(80);
  std::mt19937_64 rng(4);
  for (int i = 0; i < 80; ++i) t(i) = rng() % 2 ? 1.0 : -1.0;  // pure noise: validation cannot improve for long
  TrainConfig cfg;
  cfg.patience = 3;
  cfg.max_epochs = 100;
  const TrainResult r = train_lm(X, t, cfg);
  EXPECT_EQ(r.report.stop, StopReason::ValidationPatience);
  EXPECT_EQ(r.report.val_count, 12u);
  double best = std::numeric_limits<double>::infinity();
  for (const EpochRecord& e : r.report.epochs) best = std::min(best, e.val_mse);
  EXPECT_LE(static_cast<int>(r.report.epochs.size()), 100);
  (void)best;
}

TEST(Train, InputErrors) {
  const MatrixXd X = random_inputs(12, 324, 1);
  try {
    train_lm(X, VectorXd::Ones(12), TrainConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DegenerateData);
  }
  VectorXd t = VectorXd::Ones(12);
  t(0) = -1.0;
  t(1) = 0.5;
  EXPECT_THROW(train_lm(X, t, TrainConfig{}), Error);
  t(1) = 1.0;
  EXPECT_THROW(train_lm(X.topRows(9), t.head(9), TrainConfig{}), Error);
  TrainConfig bad;
  bad.lambda_down = 2.0;
  EXPECT_THROW(train_lm(X, t, bad), Error);
  bad = TrainConfig{};
  bad.val_fraction = 0.5;
  EXPECT_THROW(bad.validate(), Error);
}

}  // namespace
}  // namespace pcg
