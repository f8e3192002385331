#pragma once
#include <cstddef>
#include <span>
#include <vector>

#include "lithub/text_core.hpp"

namespace lithub {

struct TrainHyper {
  double learning_rate = 0.05;
  int epochs = 300;
  double l2 = 1e-4;
};

double sigmoid(double z) noexcept;
double dot(const SparseVector& x, std::span<const double> weights) noexcept;

// Mean log loss plus (l2 / 2) * ||w||^2, with its gradient.
struct LossGradient {
  double loss = 0;
  std::vector<double> grad_weights;
  double grad_bias = 0;
};

LossGradient log_loss_gradient(std::span<const SparseVector> features, std::span<const int> labels,
                               std::span<const double> weights, double bias, double l2);

struct LogisticFit {
  std::vector<double> weights;
  double bias = 0;
  std::vector<double> loss_history;  // loss before each epoch, then the final loss
};

// Full-batch gradient descent from zero weights. Throws SingleClassDataset,
// NonFiniteLoss, BadInput (non-positive hyperparameters).
LogisticFit fit_logistic(std::span<const SparseVector> features, std::span<const int> labels, std::size_t dim,
                         const TrainHyper& hyper);

// K heads over one shared feature space, trained jointly on the summed loss.
// labels is row-major n x K. Heads with a single class throw
// Error{DegenerateTopic} naming the head index.
struct MultiHeadFit {
  std::vector<std::vector<double>> weights;
  std::vector<double> biases;
  std::vector<double> loss_history;
};

// Summed per-head loss (each head's mean log loss plus its l2 term) with
// per-head gradients.
struct MultiHeadGradient {
  double loss = 0;
  std::vector<std::vector<double>> grad_weights;
  std::vector<double> grad_biases;
};

MultiHeadGradient multihead_loss_gradient(std::span<const SparseVector> features, std::span<const int> labels,
                                          const std::vector<std::vector<double>>& weights,
                                          std::span<const double> biases, double l2);

MultiHeadFit fit_multihead(std::span<const SparseVector> features, std::span<const int> labels, std::size_t heads,
                           std::size_t dim, const TrainHyper& hyper);

}  // namespace lithub
