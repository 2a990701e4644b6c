#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pcg/feature_assembly.hpp"

namespace pcg {

inline constexpr std::size_t kHidden1 = 10;
inline constexpr std::size_t kHidden2 = 5;

enum class Activation { Logistic, Linear };

std::string activation_name(Activation a);
std::optional<Activation> parse_activation(const std::string& name);

struct DenseLayer {
  Eigen::MatrixXd weights;  // outputs x inputs
  Eigen::VectorXd biases;
  Activation activation{Activation::Linear};
};

// inputs -> 10 (logistic) -> 5 (linear) -> 1 (linear). The scaler and
// imputer turn a raw FeatureVector into the network input.
struct MlpModel {
  std::array<DenseLayer, 3> layers;
  Scaler scaler;
  Imputer imputer;
  std::uint64_t rng_seed{0};

  std::size_t input_size() const { return static_cast<std::size_t>(layers[0].weights.cols()); }
  std::size_t parameter_count() const;

  // Flattened parameters: W1 row-major, b1, W2 row-major, b2, W3, b3.
  Eigen::VectorXd parameters() const;
  void set_parameters(const Eigen::VectorXd& theta);
};

// Weights uniform in [-0.5, 0.5] from a seeded 64-bit Mersenne Twister,
// biases zero. Scaler is the identity, imputer medians zero.
MlpModel init_model(std::uint64_t seed, std::size_t inputs = kFeatureCount);

double logistic(double z);

// Network output for one already imputed and scaled input vector.
double forward(const MlpModel& model, std::span<const double> x);

// Outputs for each row of X.
Eigen::VectorXd forward_batch(const MlpModel& model, const Eigen::MatrixXd& X);

// d(output)/d(parameter) per row of X, columns ordered as parameters().
// The residual is output - target, so this is also its Jacobian.
Eigen::MatrixXd jacobian(const MlpModel& model, const Eigen::MatrixXd& X);

struct TrainConfig {
  int max_epochs{100};
  double mse_goal{1e-3};
  double lambda_init{1e-3};
  double lambda_up{10.0};
  double lambda_down{0.1};
  double lambda_max{1e10};
  double val_fraction{0.15};
  int patience{6};
  bool early_stopping{true};
  std::uint64_t seed{0};

  void validate() const;
};

struct EpochRecord {
  int epoch{0};
  double train_mse{0.0};
  double val_mse{0.0};  // NaN without a validation split
  double lambda{0.0};
};

enum class StopReason { MseGoal, MaxEpochs, LambdaMax, ValidationPatience };

std::string stop_reason_name(StopReason r);

struct TrainReport {
  std::vector<EpochRecord> epochs;
  std::vector<double> accepted_sse;  // training SSE after init and each accepted step
  StopReason stop{StopReason::MaxEpochs};
  std::size_t train_count{0};
  std::size_t val_count{0};
};

struct TrainResult {
  MlpModel model;
  TrainReport report;
};

// Levenberg-Marquardt on the sum of squared errors. Each epoch solves
// (J^T J + lambda I) delta = -J^T r, growing lambda until the SSE drops.
// When there are fewer samples than parameters the equivalent
// sample-space system (J J^T + lambda I) u = r, delta = -J^T u is
// solved instead. X rows are imputed, scaled inputs; targets are +-1.
// initial replaces init_model(cfg.seed) when given.
TrainResult train_lm(const Eigen::MatrixXd& X, const Eigen::VectorXd& targets, const TrainConfig& cfg,
                     const std::optional<MlpModel>& initial = std::nullopt);

// The same optimizer on arbitrary finite targets (no class checks).
TrainResult fit_lm(const Eigen::MatrixXd& X, const Eigen::VectorXd& targets, const TrainConfig& cfg,
                   const std::optional<MlpModel>& initial = std::nullopt);

}  // namespace pcg
