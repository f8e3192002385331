#include "lithub/logistic.hpp"

#include <cmath>
#include <string>

#include "lithub/error.hpp"

namespace lithub {

namespace {

// log(1 + exp(-z)) for label 1, log(1 + exp(z)) for label 0, computed stably.
double pointwise_loss(double z, int y) {
  const double s = y ? -z : z;
  return s > 0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s));
}

void check_hyper(const TrainHyper& h) {
  if (!(h.learning_rate > 0) || h.epochs <= 0 || !(h.l2 >= 0))
    throw Error(Errc::BadInput, "learning rate and epochs must be positive, l2 non-negative");
}

void check_finite(double loss, int epoch) {
  if (!std::isfinite(loss))
    throw Error(Errc::NonFiniteLoss, "training diverged at epoch " + std::to_string(epoch) +
                                         "; lower the learning rate");
}

}  // namespace

double sigmoid(double z) noexcept {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double dot(const SparseVector& x, std::span<const double> weights) noexcept {
  double s = 0;
  for (const auto& [idx, v] : x.entries) s += v * weights[idx];
  return s;
}

LossGradient log_loss_gradient(std::span<const SparseVector> features, std::span<const int> labels,
                               std::span<const double> weights, double bias, double l2) {
  LossGradient out;
  out.grad_weights.assign(weights.size(), 0.0);
  const double n = static_cast<double>(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    const double z = dot(features[i], weights) + bias;
    out.loss += pointwise_loss(z, labels[i]);
    const double r = (sigmoid(z) - labels[i]) / n;
    for (const auto& [idx, v] : features[i].entries) out.grad_weights[idx] += r * v;
    out.grad_bias += r;
  }
  out.loss /= n;
  double sq = 0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    sq += weights[j] * weights[j];
    out.grad_weights[j] += l2 * weights[j];
  }
  out.loss += 0.5 * l2 * sq;
  return out;
}

LogisticFit fit_logistic(std::span<const SparseVector> features, std::span<const int> labels, std::size_t dim,
                         const TrainHyper& hyper) {
  check_hyper(hyper);
  std::size_t pos = 0;
  for (int y : labels) pos += y ? 1 : 0;
  if (features.empty() || pos == 0 || pos == labels.size())
    throw Error(Errc::SingleClassDataset, "training data needs both classes");

  LogisticFit fit;
  fit.weights.assign(dim, 0.0);
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    auto lg = log_loss_gradient(features, labels, fit.weights, fit.bias, hyper.l2);
    check_finite(lg.loss, epoch);
    fit.loss_history.push_back(lg.loss);
    for (std::size_t j = 0; j < dim; ++j) fit.weights[j] -= hyper.learning_rate * lg.grad_weights[j];
    fit.bias -= hyper.learning_rate * lg.grad_bias;
  }
  auto final_loss = log_loss_gradient(features, labels, fit.weights, fit.bias, hyper.l2).loss;
  check_finite(final_loss, hyper.epochs);
  fit.loss_history.push_back(final_loss);
  return fit;
}

MultiHeadGradient multihead_loss_gradient(std::span<const SparseVector> features, std::span<const int> labels,
                                          const std::vector<std::vector<double>>& weights,
                                          std::span<const double> biases, double l2) {
  const std::size_t n = features.size();
  const std::size_t heads = weights.size();
  MultiHeadGradient out;
  out.grad_weights.reserve(heads);
  for (const auto& w : weights) out.grad_weights.emplace_back(w.size(), 0.0);
  out.grad_biases.assign(heads, 0.0);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < heads; ++k) {
      const int y = labels[i * heads + k];
      const double z = dot(features[i], weights[k]) + biases[k];
      out.loss += pointwise_loss(z, y) * inv_n;
      const double r = (sigmoid(z) - y) * inv_n;
      for (const auto& [idx, v] : features[i].entries) out.grad_weights[k][idx] += r * v;
      out.grad_biases[k] += r;
    }
  }
  for (std::size_t k = 0; k < heads; ++k) {
    double sq = 0;
    for (std::size_t j = 0; j < weights[k].size(); ++j) {
      sq += weights[k][j] * weights[k][j];
      out.grad_weights[k][j] += l2 * weights[k][j];
    }
    out.loss += 0.5 * l2 * sq;
  }
  return out;
}

MultiHeadFit fit_multihead(std::span<const SparseVector> features, std::span<const int> labels, std::size_t heads,
                           std::size_t dim, const TrainHyper& hyper) {
  check_hyper(hyper);
  const std::size_t n = features.size();
  if (labels.size() != n * heads) throw Error(Errc::BadInput, "label matrix shape mismatch");
  for (std::size_t k = 0; k < heads; ++k) {
    std::size_t pos = 0;
    for (std::size_t i = 0; i < n; ++i) pos += labels[i * heads + k] ? 1 : 0;
    if (pos == 0 || pos == n) throw Error(Errc::DegenerateTopic, std::to_string(k));
  }

  MultiHeadFit fit;
  fit.weights.assign(heads, std::vector<double>(dim, 0.0));
  fit.biases.assign(heads, 0.0);
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    auto g = multihead_loss_gradient(features, labels, fit.weights, fit.biases, hyper.l2);
    check_finite(g.loss, epoch);
    fit.loss_history.push_back(g.loss);
    for (std::size_t k = 0; k < heads; ++k) {
      for (std::size_t j = 0; j < dim; ++j) fit.weights[k][j] -= hyper.learning_rate * g.grad_weights[k][j];
      fit.biases[k] -= hyper.learning_rate * g.grad_biases[k];
    }
  }
  const double final_loss = multihead_loss_gradient(features, labels, fit.weights, fit.biases, hyper.l2).loss;
  check_finite(final_loss, hyper.epochs);
  fit.loss_history.push_back(final_loss);
  return fit;
}

}  // namespace lithub
