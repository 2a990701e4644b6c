#include "pcg/mlp.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "pcg/error.hpp"
#include "pcg/rng.hpp"

namespace pcg {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Hidden activations for every row of X.
struct Activations {
  MatrixXd h1;  // N x 10
  MatrixXd h2;  // N x 5
  VectorXd y;
};

Activations propagate(const MlpModel& m, const MatrixXd& X) {
  if (static_cast<std::size_t>(X.cols()) != m.input_size()) {
    throw Error(Errc::InvalidArgument, "input width " + std::to_string(X.cols()) + " does not match model");
  }
  Activations a;
  a.h1 = (X * m.layers[0].weights.transpose()).rowwise() + m.layers[0].biases.transpose();
  a.h1 = a.h1.unaryExpr([](double z) { return logistic(z); });
  a.h2 = (a.h1 * m.layers[1].weights.transpose()).rowwise() + m.layers[1].biases.transpose();
  a.y = (a.h2 * m.layers[2].weights.transpose()).col(0).array() + m.layers[2].biases(0);
  return a;
}

double sse(const MlpModel& m, const MatrixXd& X, const VectorXd& t) { return (forward_batch(m, X) - t).squaredNorm(); }

MatrixXd take_rows(const MatrixXd& X, const std::vector<std::size_t>& rows) {
  MatrixXd out(static_cast<Index>(rows.size()), X.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = X.row(static_cast<Index>(rows[i]));
  return out;
}

VectorXd take_rows(const VectorXd& v, const std::vector<std::size_t>& rows) {
  VectorXd out(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Index>(i)) = v(static_cast<Index>(rows[i]));
  return out;
}

// Damped Gauss-Newton step, or nullopt when the damped system is not
// positive definite.
std::optional<VectorXd> lm_step(const MatrixXd& J, const VectorXd& r, double lambda) {
  if (J.rows() < J.cols()) {
    MatrixXd A = J * J.transpose();
    A.diagonal().array() += lambda;
    Eigen::LLT<MatrixXd> llt(A);
    if (llt.info() != Eigen::Success) return std::nullopt;
    return VectorXd(-(J.transpose() * llt.solve(r)));
  }
  MatrixXd A = J.transpose() * J;
  A.diagonal().array() += lambda;
  Eigen::LLT<MatrixXd> llt(A);
  if (llt.info() != Eigen::Success) return std::nullopt;
  return VectorXd(-llt.solve(J.transpose() * r));
}

}  // namespace

std::string activation_name(Activation a) { return a == Activation::Logistic ? "logsig" : "purelin"; }

std::optional<Activation> parse_activation(const std::string& name) {
  if (name == "logsig") return Activation::Logistic;
  if (name == "purelin") return Activation::Linear;
  return std::nullopt;
}

std::size_t MlpModel::parameter_count() const {
  std::size_t n = 0;
  for (const DenseLayer& l : layers) n += static_cast<std::size_t>(l.weights.size() + l.biases.size());
  return n;
}

Eigen::VectorXd MlpModel::parameters() const {
  VectorXd theta(static_cast<Index>(parameter_count()));
  Index k = 0;
  for (const DenseLayer& l : layers) {
    for (Index r = 0; r < l.weights.rows(); ++r) {
      for (Index c = 0; c < l.weights.cols(); ++c) theta(k++) = l.weights(r, c);
    }
    for (Index r = 0; r < l.biases.size(); ++r) theta(k++) = l.biases(r);
  }
  return theta;
}

void MlpModel::set_parameters(const Eigen::VectorXd& theta) {
  if (static_cast<std::size_t>(theta.size()) != parameter_count()) {
    throw Error(Errc::InvalidArgument, "parameter vector has the wrong length");
  }
  Index k = 0;
  for (DenseLayer& l : layers) {
    for (Index r = 0; r < l.weights.rows(); ++r) {
      for (Index c = 0; c < l.weights.cols(); ++c) l.weights(r, c) = theta(k++);
    }
    for (Index r = 0; r < l.biases.size(); ++r) l.biases(r) = theta(k++);
  }
}

MlpModel init_model(std::uint64_t seed, std::size_t inputs) {
  std::mt19937_64 rng(seed);
  const std::array<std::pair<std::size_t, std::size_t>, 3> shapes{{{kHidden1, inputs}, {kHidden2, kHidden1}, {1, kHidden2}}};
  MlpModel m;
  m.rng_seed = seed;
  for (std::size_t l = 0; l < 3; ++l) {
    DenseLayer& layer = m.layers[l];
    layer.activation = l == 0 ? Activation::Logistic : Activation::Linear;
    layer.weights.resize(static_cast<Index>(shapes[l].first), static_cast<Index>(shapes[l].second));
    for (Index r = 0; r < layer.weights.rows(); ++r) {
      for (Index c = 0; c < layer.weights.cols(); ++c) layer.weights(r, c) = uniform01(rng) - 0.5;
    }
    layer.biases = VectorXd::Zero(static_cast<Index>(shapes[l].first));
  }
  m.scaler.mean.assign(inputs, 0.0);
  m.scaler.std.assign(inputs, 1.0);
  m.imputer.median.assign(inputs, 0.0);
  return m;
}

double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double forward(const MlpModel& model, std::span<const double> x) {
  if (x.size() != model.input_size()) throw Error(Errc::InvalidArgument, "input width does not match model");
  const Eigen::Map<const VectorXd> v(x.data(), static_cast<Index>(x.size()));
  VectorXd h1 = model.layers[0].weights * v + model.layers[0].biases;
  h1 = h1.unaryExpr([](double z) { return logistic(z); });
  const VectorXd h2 = model.layers[1].weights * h1 + model.layers[1].biases;
  return (model.layers[2].weights * h2)(0) + model.layers[2].biases(0);
}

Eigen::VectorXd forward_batch(const MlpModel& model, const Eigen::MatrixXd& X) { return propagate(model, X).y; }

Eigen::MatrixXd jacobian(const MlpModel& model, const Eigen::MatrixXd& X) {
  const Activations a = propagate(model, X);
  const MatrixXd& W2 = model.layers[1].weights;
  const VectorXd w3 = model.layers[2].weights.row(0).transpose();
  const Index n = X.rows();
  const Index d = X.cols();
  const Index h1 = static_cast<Index>(kHidden1);
  const Index h2 = static_cast<Index>(kHidden2);

  // Output is linear in H2 and H2 is linear in H1, so dy/dH1 does not
  // depend on the sample.
  const VectorXd g1 = W2.transpose() * w3;

  const Index off_b1 = h1 * d;
  const Index off_w2 = off_b1 + h1;
  const Index off_b2 = off_w2 + h2 * h1;
  const Index off_w3 = off_b2 + h2;
  const Index off_b3 = off_w3 + h2;

  MatrixXd J(n, off_b3 + 1);
  for (Index s = 0; s < n; ++s) {
    for (Index i = 0; i < h1; ++i) {
      const double h = a.h1(s, i);
      const double delta = g1(i) * h * (1.0 - h);
      J.block(s, i * d, 1, d) = delta * X.row(s);
      J(s, off_b1 + i) = delta;
    }
    for (Index j = 0; j < h2; ++j) {
      J.block(s, off_w2 + j * h1, 1, h1) = w3(j) * a.h1.row(s);
      J(s, off_b2 + j) = w3(j);
      J(s, off_w3 + j) = a.h2(s, j);
    }
    J(s, off_b3) = 1.0;
  }
  return J;
}

void TrainConfig::validate() const {
  if (max_epochs < 0) throw Error(Errc::InvalidArgument, "max_epochs must be non-negative");
  if (!(mse_goal >= 0.0)) throw Error(Errc::InvalidArgument, "mse_goal must be non-negative");
  if (!(lambda_init > 0.0)) throw Error(Errc::InvalidArgument, "lambda_init must be positive");
  if (!(lambda_down > 0.0 && lambda_down < 1.0 && lambda_up > 1.0)) {
    throw Error(Errc::InvalidArgument, "lambda factors must satisfy 0 < down < 1 < up");
  }
  if (!(lambda_max >= lambda_init)) throw Error(Errc::InvalidArgument, "lambda_max below lambda_init");
  if (!(val_fraction >= 0.0 && val_fraction < 0.5)) throw Error(Errc::InvalidArgument, "val_fraction must be in [0, 0.5)");
  if (patience < 1) throw Error(Errc::InvalidArgument, "patience must be at least 1");
}

std::string stop_reason_name(StopReason r) {
  switch (r) {
    case StopReason::MseGoal: return "mse_goal";
    case StopReason::MaxEpochs: return "max_epochs";
    case StopReason::LambdaMax: return "lambda_max";
    case StopReason::ValidationPatience: return "validation_patience";
  }
  return "unknown";
}

TrainResult train_lm(const Eigen::MatrixXd& X, const Eigen::VectorXd& targets, const TrainConfig& cfg,
                     const std::optional<MlpModel>& initial) {
  for (Index i = 0; i < targets.size(); ++i) {
    if (targets(i) != -1.0 && targets(i) != 1.0) throw Error(Errc::InvalidArgument, "targets must be -1 or +1");
  }
  if (targets.size() > 0 && (targets.array() == targets(0)).all()) {
    throw Error(Errc::DegenerateData, "all targets belong to one class");
  }
  return fit_lm(X, targets, cfg, initial);
}

TrainResult fit_lm(const Eigen::MatrixXd& X, const Eigen::VectorXd& targets, const TrainConfig& cfg,
                   const std::optional<MlpModel>& initial) {
  cfg.validate();
  const auto n = static_cast<std::size_t>(X.rows());
  if (static_cast<std::size_t>(targets.size()) != n) throw Error(Errc::InvalidArgument, "one target per row required");
  if (n < 10) throw Error(Errc::InvalidArgument, "training needs at least 10 samples");
  if (!X.allFinite() || !targets.allFinite()) throw Error(Errc::InvalidArgument, "training data must be finite");

  TrainResult result;
  MlpModel& model = result.model;
  model = initial ? *initial : init_model(cfg.seed, static_cast<std::size_t>(X.cols()));
  if (model.input_size() != static_cast<std::size_t>(X.cols())) {
    throw Error(Errc::InvalidArgument, "initial model does not match input width");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::size_t n_val = 0;
  if (cfg.early_stopping && cfg.val_fraction > 0.0) {
    std::mt19937_64 split_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    shuffle(order, split_rng);
    n_val = static_cast<std::size_t>(std::floor(cfg.val_fraction * static_cast<double>(n)));
  }
  const std::vector<std::size_t> train_rows(order.begin(), order.end() - static_cast<std::ptrdiff_t>(n_val));
  const std::vector<std::size_t> val_rows(order.end() - static_cast<std::ptrdiff_t>(n_val), order.end());
  const MatrixXd Xt = n_val ? take_rows(X, train_rows) : X;
  const VectorXd tt = n_val ? take_rows(targets, train_rows) : targets;
  const MatrixXd Xv = take_rows(X, val_rows);
  const VectorXd tv = take_rows(targets, val_rows);

  TrainReport& report = result.report;
  report.train_count = train_rows.size();
  report.val_count = val_rows.size();
  const double nt = static_cast<double>(train_rows.size());
  const auto val_mse = [&](const MlpModel& m) {
    return n_val ? sse(m, Xv, tv) / static_cast<double>(n_val) : std::numeric_limits<double>::quiet_NaN();
  };

  VectorXd theta = model.parameters();
  VectorXd residual = forward_batch(model, Xt) - tt;
  double current = residual.squaredNorm();
  report.accepted_sse.push_back(current);

  MlpModel best = model;
  double best_val = val_mse(model);
  int fails = 0;
  double lambda = cfg.lambda_init;
  report.stop = StopReason::MaxEpochs;

  if (current / nt <= cfg.mse_goal) {
    report.stop = StopReason::MseGoal;
  } else {
    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
      const MatrixXd J = jacobian(model, Xt);
      bool accepted = false;
      bool solved_once = false;
      while (lambda <= cfg.lambda_max) {
        const std::optional<VectorXd> delta = lm_step(J, residual, lambda);
        if (delta) {
          solved_once = true;
          MlpModel trial = model;
          trial.set_parameters(theta + *delta);
          const VectorXd r_new = forward_batch(trial, Xt) - tt;
          const double s_new = r_new.squaredNorm();
          if (std::isfinite(s_new) && s_new < current) {
            model = std::move(trial);
            theta = model.parameters();
            residual = r_new;
            current = s_new;
            lambda = std::max(lambda * cfg.lambda_down, std::numeric_limits<double>::min());
            accepted = true;
            break;
          }
        }
        lambda *= cfg.lambda_up;
      }
      if (!accepted) {
        if (!solved_once) throw Error(Errc::SingularSystem, "damped normal equations not positive definite");
        report.stop = StopReason::LambdaMax;
        break;
      }
      report.accepted_sse.push_back(current);
      const double vm = val_mse(model);
      report.epochs.push_back({epoch, current / nt, vm, lambda});

      if (n_val) {
        if (vm < best_val) {
          best_val = vm;
          best = model;
          fails = 0;
        } else if (++fails >= cfg.patience) {
          report.stop = StopReason::ValidationPatience;
          break;
        }
      }
      if (current / nt <= cfg.mse_goal) {
        report.stop = StopReason::MseGoal;
        break;
      }
    }
  }
  if (n_val) model = best;
  return result;
}

}  // namespace pcg
