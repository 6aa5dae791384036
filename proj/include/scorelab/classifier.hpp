#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "scorelab/metric_core.hpp"

namespace scorelab::nn {

/// Multinomial logistic regression: logits = W x + b.
class SoftmaxLinear {
 public:
  SoftmaxLinear(std::size_t input_dim, std::size_t class_count);
  /// `weights` is class_count x input_dim, row-major.
  SoftmaxLinear(std::size_t input_dim, std::size_t class_count, std::vector<double> weights,
                std::vector<double> biases);

  /// Small Gaussian initialization.
  static SoftmaxLinear random(std::size_t input_dim, std::size_t class_count, std::uint64_t seed,
                              double scale = 0.1);

  std::size_t input_dim() const noexcept { return input_dim_; }
  std::size_t class_count() const noexcept { return class_count_; }

  std::vector<double> logits(std::span<const double> x) const;
  /// d p_j / d x = p_j (w_j - sum_k p_k w_k).
  std::vector<double> grad_class_prob(std::span<const double> x, std::size_t j) const;

  /// Cross-entropy loss for (x, label); adds d loss / d params into `grad`,
  /// laid out like parameters().
  double loss_and_accumulate(std::span<const double> x, std::size_t label,
                             std::span<double> grad) const;

  /// Parameters in declaration order: weights then biases.
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> params);
  std::size_t parameter_count() const noexcept { return weights_.size() + biases_.size(); }

  const std::vector<double>& weights() const noexcept { return weights_; }
  const std::vector<double>& biases() const noexcept { return biases_; }

  friend bool operator==(const SoftmaxLinear&, const SoftmaxLinear&) = default;

 private:
  std::size_t input_dim_;
  std::size_t class_count_;
  std::vector<double> weights_;
  std::vector<double> biases_;
};

enum class Activation : std::uint8_t { tanh = 1, rectifier = 2 };

/// One hidden layer: logits = W2 act(W1 x + b1) + b2.
class MLPClassifier {
 public:
  static constexpr std::size_t kDefaultHidden = 64;

  MLPClassifier(std::size_t input_dim, std::size_t hidden, std::size_t class_count,
                Activation activation, std::vector<double> hidden_weights,
                std::vector<double> hidden_biases, std::vector<double> output_weights,
                std::vector<double> output_biases);

  /// Glorot-style Gaussian initialization.
  static MLPClassifier random(std::size_t input_dim, std::size_t hidden, std::size_t class_count,
                              Activation activation, std::uint64_t seed);

  std::size_t input_dim() const noexcept { return input_dim_; }
  std::size_t hidden() const noexcept { return hidden_; }
  std::size_t class_count() const noexcept { return class_count_; }
  Activation activation() const noexcept { return activation_; }

  std::vector<double> logits(std::span<const double> x) const;
  std::vector<double> grad_class_prob(std::span<const double> x, std::size_t j) const;
  double loss_and_accumulate(std::span<const double> x, std::size_t label,
                             std::span<double> grad) const;

  /// hidden weights, hidden biases, output weights, output biases.
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> params);
  std::size_t parameter_count() const noexcept;

  const std::vector<double>& hidden_weights() const noexcept { return w1_; }
  const std::vector<double>& hidden_biases() const noexcept { return b1_; }
  const std::vector<double>& output_weights() const noexcept { return w2_; }
  const std::vector<double>& output_biases() const noexcept { return b2_; }

  friend bool operator==(const MLPClassifier&, const MLPClassifier&) = default;

 private:
  struct Forward {
    std::vector<double> pre;     // W1 x + b1
    std::vector<double> hidden;  // act(pre)
    std::vector<double> logits;
  };
  Forward forward(std::span<const double> x) const;
  double act(double v) const;
  double act_derivative(double pre, double post) const;

  std::size_t input_dim_;
  std::size_t hidden_;
  std::size_t class_count_;
  Activation activation_;
  std::vector<double> w1_, b1_, w2_, b2_;
};

using Classifier = std::variant<SoftmaxLinear, MLPClassifier>;

std::size_t input_dim(const Classifier& model);
std::size_t class_count(const Classifier& model);

/// Numerically stable softmax (max-subtracted).
std::vector<double> softmax(std::span<const double> logits);

ClassDistribution predict_proba(const Classifier& model, std::span<const double> x);
/// Exact gradient of p(y = j | x) with respect to x.
std::vector<double> grad_class_prob(const Classifier& model, std::span<const double> x,
                                    std::size_t j);

/// Class probabilities for every row of `points` (n x d, row-major).
ProbMatrix predict_matrix(const Classifier& model, std::span<const double> points,
                          std::size_t n_points);

/// Labeled points drawn from isotropic Gaussian blobs.
struct SyntheticDataset {
  std::size_t input_dim = 0;
  std::size_t class_count = 0;
  std::vector<double> points;  ///< size() x input_dim, row-major
  std::vector<std::size_t> labels;

  std::size_t size() const noexcept { return labels.size(); }
  std::span<const double> point(std::size_t i) const {
    return {points.data() + i * input_dim, input_dim};
  }
  void validate() const;
};

struct BlobSpec {
  std::size_t class_count = 10;
  std::size_t input_dim = 16;
  std::size_t per_class = 200;
  double center_scale = 3.0;  ///< stddev of the blob centers
  double spread = 1.0;        ///< stddev of each blob
  std::uint64_t seed = 0;
};

/// Blob centers for `spec`; sampling a dataset from the same spec reuses them.
std::vector<double> blob_centers(const BlobSpec& spec);
/// Points interleaved by class (label i % K). `stream` selects an independent
/// draw around the same centers, e.g. 0 for training and 1 for held-out data.
SyntheticDataset make_blobs(const BlobSpec& spec, std::uint64_t stream = 0);

struct TrainConfig {
  double learning_rate = 0.1;
  std::size_t epochs = 30;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
};

struct TrainResult {
  Classifier model;
  /// Mean training loss before training, then after each epoch.
  std::vector<double> loss_trace;
};

double mean_loss(const Classifier& model, const SyntheticDataset& data);
double accuracy(const Classifier& model, const SyntheticDataset& data);

/// Minibatch gradient descent on cross-entropy. Throws TrainingFailure on a
/// non-finite loss.
TrainResult train(Classifier model, const SyntheticDataset& data, const TrainConfig& config);

}  // namespace scorelab::nn
