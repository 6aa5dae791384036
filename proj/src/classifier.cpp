#include "scorelab/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "scorelab/errors.hpp"
#include "scorelab/random.hpp"

namespace scorelab::nn {

namespace {

void require_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw InvalidInput(std::string(what) + " contains non-finite values");
  }
}

void require_size(std::span<const double> v, std::size_t n, const char* what) {
  if (v.size() != n) {
    throw InvalidInput(std::string(what) + ": expected " + std::to_string(n) + " values, got " +
                       std::to_string(v.size()));
  }
}

// out = M v for row-major M (rows x cols), plus bias.
std::vector<double> affine(std::span<const double> m, std::span<const double> bias,
                           std::span<const double> v, std::size_t rows, std::size_t cols) {
  std::vector<double> out(bias.begin(), bias.end());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* mr = m.data() + r * cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += mr[c] * v[c];
    out[r] += acc;
  }
  return out;
}

// out = M^T v.
std::vector<double> transpose_times(std::span<const double> m, std::span<const double> v,
                                    std::size_t rows, std::size_t cols) {
  std::vector<double> out(cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* mr = m.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) out[c] += mr[c] * v[r];
  }
  return out;
}

// d p_j / d logits.
std::vector<double> prob_grad_wrt_logits(std::span<const double> p, std::size_t j) {
  std::vector<double> g(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) g[k] = p[j] * ((k == j ? 1.0 : 0.0) - p[k]);
  return g;
}

double cross_entropy(std::span<const double> logits, std::size_t label) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double s = 0.0;
  for (double z : logits) s += std::exp(z - mx);
  return mx + std::log(s) - logits[label];
}

void check_label(std::size_t label, std::size_t class_count) {
  if (label >= class_count) throw InvalidInput("class index " + std::to_string(label) + " out of range");
}

}  // namespace

// --- SoftmaxLinear -------------------------------------------------------

SoftmaxLinear::SoftmaxLinear(std::size_t input_dim, std::size_t class_count)
    : SoftmaxLinear(input_dim, class_count, std::vector<double>(input_dim * class_count, 0.0),
                    std::vector<double>(class_count, 0.0)) {}

SoftmaxLinear::SoftmaxLinear(std::size_t input_dim, std::size_t class_count,
                             std::vector<double> weights, std::vector<double> biases)
    : input_dim_(input_dim),
      class_count_(class_count),
      weights_(std::move(weights)),
      biases_(std::move(biases)) {
  if (input_dim_ == 0) throw InvalidInput("input dimension must be positive");
  if (class_count_ < 2) throw InvalidInput("classifier needs at least two classes");
  require_size(weights_, class_count_ * input_dim_, "softmax weights");
  require_size(biases_, class_count_, "softmax biases");
  require_finite(weights_, "softmax weights");
  require_finite(biases_, "softmax biases");
}

SoftmaxLinear SoftmaxLinear::random(std::size_t input_dim, std::size_t class_count,
                                    std::uint64_t seed, double scale) {
  Rng rng(seed);
  std::normal_distribution<double> g(0.0, scale);
  std::vector<double> w(input_dim * class_count);
  for (double& v : w) v = g(rng);
  std::vector<double> b(class_count);
  for (double& v : b) v = g(rng);
  return SoftmaxLinear(input_dim, class_count, std::move(w), std::move(b));
}

std::vector<double> SoftmaxLinear::logits(std::span<const double> x) const {
  require_size(x, input_dim_, "input");
  return affine(weights_, biases_, x, class_count_, input_dim_);
}

std::vector<double> SoftmaxLinear::grad_class_prob(std::span<const double> x, std::size_t j) const {
  check_label(j, class_count_);
  const auto p = softmax(logits(x));
  return transpose_times(weights_, prob_grad_wrt_logits(p, j), class_count_, input_dim_);
}

double SoftmaxLinear::loss_and_accumulate(std::span<const double> x, std::size_t label,
                                          std::span<double> grad) const {
  check_label(label, class_count_);
  const auto z = logits(x);
  auto dz = softmax(z);
  dz[label] -= 1.0;
  for (std::size_t k = 0; k < class_count_; ++k) {
    double* gw = grad.data() + k * input_dim_;
    for (std::size_t c = 0; c < input_dim_; ++c) gw[c] += dz[k] * x[c];
    grad[weights_.size() + k] += dz[k];
  }
  return cross_entropy(z, label);
}

std::vector<double> SoftmaxLinear::parameters() const {
  std::vector<double> out(weights_);
  out.insert(out.end(), biases_.begin(), biases_.end());
  return out;
}

void SoftmaxLinear::set_parameters(std::span<const double> params) {
  require_size(params, parameter_count(), "parameters");
  std::copy_n(params.begin(), weights_.size(), weights_.begin());
  std::copy(params.begin() + static_cast<std::ptrdiff_t>(weights_.size()), params.end(), biases_.begin());
}

// --- MLPClassifier -------------------------------------------------------

MLPClassifier::MLPClassifier(std::size_t input_dim, std::size_t hidden, std::size_t class_count,
                             Activation activation, std::vector<double> hidden_weights,
                             std::vector<double> hidden_biases, std::vector<double> output_weights,
                             std::vector<double> output_biases)
    : input_dim_(input_dim),
      hidden_(hidden),
      class_count_(class_count),
      activation_(activation),
      w1_(std::move(hidden_weights)),
      b1_(std::move(hidden_biases)),
      w2_(std::move(output_weights)),
      b2_(std::move(output_biases)) {
  if (input_dim_ == 0) throw InvalidInput("input dimension must be positive");
  if (hidden_ == 0) throw InvalidInput("hidden width must be positive");
  if (class_count_ < 2) throw InvalidInput("classifier needs at least two classes");
  if (activation_ != Activation::tanh && activation_ != Activation::rectifier) {
    throw InvalidInput("unknown activation");
  }
  require_size(w1_, hidden_ * input_dim_, "hidden weights");
  require_size(b1_, hidden_, "hidden biases");
  require_size(w2_, class_count_ * hidden_, "output weights");
  require_size(b2_, class_count_, "output biases");
  for (const auto* v : {&w1_, &b1_, &w2_, &b2_}) require_finite(*v, "MLP parameters");
}

MLPClassifier MLPClassifier::random(std::size_t input_dim, std::size_t hidden,
                                    std::size_t class_count, Activation activation,
                                    std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> g1(0.0, std::sqrt(2.0 / static_cast<double>(input_dim + hidden)));
  std::normal_distribution<double> g2(0.0, std::sqrt(2.0 / static_cast<double>(hidden + class_count)));
  std::vector<double> w1(hidden * input_dim), w2(class_count * hidden);
  for (double& v : w1) v = g1(rng);
  for (double& v : w2) v = g2(rng);
  return MLPClassifier(input_dim, hidden, class_count, activation, std::move(w1),
                       std::vector<double>(hidden, 0.0), std::move(w2),
                       std::vector<double>(class_count, 0.0));
}

double MLPClassifier::act(double v) const {
  return activation_ == Activation::tanh ? std::tanh(v) : std::max(v, 0.0);
}

double MLPClassifier::act_derivative(double pre, double post) const {
  if (activation_ == Activation::tanh) return 1.0 - post * post;
  return pre > 0.0 ? 1.0 : 0.0;  // subgradient 0 at the kink
}

MLPClassifier::Forward MLPClassifier::forward(std::span<const double> x) const {
  require_size(x, input_dim_, "input");
  Forward f;
  f.pre = affine(w1_, b1_, x, hidden_, input_dim_);
  f.hidden.resize(hidden_);
  std::transform(f.pre.begin(), f.pre.end(), f.hidden.begin(), [this](double v) { return act(v); });
  f.logits = affine(w2_, b2_, f.hidden, class_count_, hidden_);
  return f;
}

std::vector<double> MLPClassifier::logits(std::span<const double> x) const {
  return forward(x).logits;
}

std::vector<double> MLPClassifier::grad_class_prob(std::span<const double> x, std::size_t j) const {
  check_label(j, class_count_);
  const auto f = forward(x);
  const auto dz = prob_grad_wrt_logits(softmax(f.logits), j);
  auto dh = transpose_times(w2_, dz, class_count_, hidden_);
  for (std::size_t u = 0; u < hidden_; ++u) dh[u] *= act_derivative(f.pre[u], f.hidden[u]);
  return transpose_times(w1_, dh, hidden_, input_dim_);
}

double MLPClassifier::loss_and_accumulate(std::span<const double> x, std::size_t label,
                                          std::span<double> grad) const {
  check_label(label, class_count_);
  const auto f = forward(x);
  auto dz = softmax(f.logits);
  dz[label] -= 1.0;

  double* gw1 = grad.data();
  double* gb1 = gw1 + w1_.size();
  double* gw2 = gb1 + b1_.size();
  double* gb2 = gw2 + w2_.size();

  for (std::size_t k = 0; k < class_count_; ++k) {
    for (std::size_t u = 0; u < hidden_; ++u) gw2[k * hidden_ + u] += dz[k] * f.hidden[u];
    gb2[k] += dz[k];
  }
  auto dh = transpose_times(w2_, dz, class_count_, hidden_);
  for (std::size_t u = 0; u < hidden_; ++u) {
    const double d = dh[u] * act_derivative(f.pre[u], f.hidden[u]);
    for (std::size_t c = 0; c < input_dim_; ++c) gw1[u * input_dim_ + c] += d * x[c];
    gb1[u] += d;
  }
  return cross_entropy(f.logits, label);
}

std::vector<double> MLPClassifier::parameters() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (const auto* v : {&w1_, &b1_, &w2_, &b2_}) out.insert(out.end(), v->begin(), v->end());
  return out;
}

void MLPClassifier::set_parameters(std::span<const double> params) {
  require_size(params, parameter_count(), "parameters");
  auto it = params.begin();
  for (auto* v : {&w1_, &b1_, &w2_, &b2_}) {
    std::copy_n(it, v->size(), v->begin());
    it += static_cast<std::ptrdiff_t>(v->size());
  }
}

std::size_t MLPClassifier::parameter_count() const noexcept {
  return w1_.size() + b1_.size() + w2_.size() + b2_.size();
}

// --- free functions ------------------------------------------------------

std::size_t input_dim(const Classifier& model) {
  return std::visit([](const auto& m) { return m.input_dim(); }, model);
}

std::size_t class_count(const Classifier& model) {
  return std::visit([](const auto& m) { return m.class_count(); }, model);
}

std::vector<double> softmax(std::span<const double> logits) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double s = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    p[k] = std::exp(logits[k] - mx);
    s += p[k];
  }
  for (double& v : p) v /= s;
  return p;
}

ClassDistribution predict_proba(const Classifier& model, std::span<const double> x) {
  require_finite(x, "input");
  return ClassDistribution(softmax(std::visit([&](const auto& m) { return m.logits(x); }, model)));
}

std::vector<double> grad_class_prob(const Classifier& model, std::span<const double> x,
                                    std::size_t j) {
  require_finite(x, "input");
  return std::visit([&](const auto& m) { return m.grad_class_prob(x, j); }, model);
}

ProbMatrix predict_matrix(const Classifier& model, std::span<const double> points,
                          std::size_t n_points) {
  const std::size_t d = input_dim(model);
  const std::size_t k = class_count(model);
  require_size(points, n_points * d, "points");
  std::vector<double> values;
  values.reserve(n_points * k);
  for (std::size_t i = 0; i < n_points; ++i) {
    auto p = predict_proba(model, points.subspan(i * d, d));
    values.insert(values.end(), p.probs().begin(), p.probs().end());
  }
  return ProbMatrix(n_points, k, std::move(values), false);
}

void SyntheticDataset::validate() const {
  if (input_dim == 0 || class_count < 2) throw InvalidInput("dataset needs d >= 1 and K >= 2");
  if (points.size() != labels.size() * input_dim) throw InvalidInput("dataset points/labels size mismatch");
  require_finite(points, "dataset points");
  std::vector<bool> seen(class_count, false);
  for (std::size_t l : labels) {
    if (l >= class_count) throw InvalidInput("dataset label out of range");
    seen[l] = true;
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw InvalidInput("every class must be represented in the dataset");
  }
}

std::vector<double> blob_centers(const BlobSpec& spec) {
  Rng rng(mix_seed(spec.seed, 0xC0FFEE));
  std::normal_distribution<double> g(0.0, spec.center_scale);
  std::vector<double> centers(spec.class_count * spec.input_dim);
  for (double& v : centers) v = g(rng);
  return centers;
}

SyntheticDataset make_blobs(const BlobSpec& spec, std::uint64_t stream) {
  if (spec.class_count < 2 || spec.input_dim == 0 || spec.per_class == 0) {
    throw InvalidInput("blob spec needs K >= 2, d >= 1 and at least one point per class");
  }
  if (!(spec.spread > 0.0) || !(spec.center_scale >= 0.0)) {
    throw InvalidInput("blob spread must be positive");
  }
  const auto centers = blob_centers(spec);
  Rng rng(mix_seed(spec.seed, stream + 1));
  std::normal_distribution<double> g(0.0, spec.spread);

  SyntheticDataset data;
  data.input_dim = spec.input_dim;
  data.class_count = spec.class_count;
  const std::size_t n = spec.class_count * spec.per_class;
  data.points.reserve(n * spec.input_dim);
  data.labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t label = i % spec.class_count;
    for (std::size_t c = 0; c < spec.input_dim; ++c) {
      data.points.push_back(centers[label * spec.input_dim + c] + g(rng));
    }
    data.labels.push_back(label);
  }
  return data;
}

double mean_loss(const Classifier& model, const SyntheticDataset& data) {
  return std::visit(
      [&](const auto& m) {
        std::vector<double> scratch(m.parameter_count(), 0.0);
        double total = 0.0;
        for (std::size_t i = 0; i < data.size(); ++i) {
          total += m.loss_and_accumulate(data.point(i), data.labels[i], scratch);
        }
        return total / static_cast<double>(data.size());
      },
      model);
}

double accuracy(const Classifier& model, const SyntheticDataset& data) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto z = std::visit([&](const auto& m) { return m.logits(data.point(i)); }, model);
    const auto best = static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin());
    if (best == data.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

TrainResult train(Classifier model, const SyntheticDataset& data, const TrainConfig& config) {
  data.validate();
  if (input_dim(model) != data.input_dim || class_count(model) != data.class_count) {
    throw InvalidInput("model and dataset shapes disagree");
  }
  if (config.batch_size == 0) throw InvalidInput("batch size must be positive");
  if (!(config.learning_rate > 0.0)) throw InvalidInput("learning rate must be positive");

  TrainResult result{model, {}};
  auto check = [&](double loss) {
    if (!std::isfinite(loss)) throw TrainingFailure("training loss became non-finite");
    result.loss_trace.push_back(loss);
  };
  check(mean_loss(result.model, data));

  Rng rng(config.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::visit(
      [&](auto& m) {
        std::vector<double> params = m.parameters();
        std::vector<double> grad(params.size());
        for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
          std::shuffle(order.begin(), order.end(), rng);
          for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t stop = std::min(order.size(), start + config.batch_size);
            std::fill(grad.begin(), grad.end(), 0.0);
            for (std::size_t i = start; i < stop; ++i) {
              m.loss_and_accumulate(data.point(order[i]), data.labels[order[i]], grad);
            }
            const double step = config.learning_rate / static_cast<double>(stop - start);
            for (std::size_t p = 0; p < params.size(); ++p) params[p] -= step * grad[p];
            if (!std::all_of(params.begin(), params.end(), [](double v) { return std::isfinite(v); })) {
              throw TrainingFailure("parameters became non-finite in epoch " + std::to_string(epoch));
            }
            m.set_parameters(params);
          }
          check(mean_loss(m, data));
        }
      },
      result.model);
  return result;
}

}  // namespace scorelab::nn
