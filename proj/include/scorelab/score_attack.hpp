#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "scorelab/classifier.hpp"
#include "scorelab/metric_core.hpp"

namespace scorelab::attack {

/// Initial samples drawn uniformly from [lo, hi]^dim.
struct UniformBox {
  double lo = -1.0;
  double hi = 1.0;
  std::size_t dim = 0;
};

/// Initial samples taken from a fixed point set; sample i starts at point
/// i mod size, so a zero-step attack replays the set in order.
struct EmpiricalInit {
  std::size_t dim = 0;
  std::vector<double> points;  ///< row-major, count() x dim

  std::size_t count() const noexcept { return dim == 0 ? 0 : points.size() / dim; }
};

struct FixedInit {
  std::vector<double> point;
};

using InitDistribution = std::variant<UniformBox, EmpiricalInit, FixedInit>;

struct AttackConfig {
  double epsilon = 0.001;
  std::size_t max_iters = 100;
  double early_stop_delta = 1e-3;  ///< converged once p(y=j|x) >= 1 - delta
  InitDistribution init = UniformBox{};
  std::uint64_t seed = 0;
  /// Optional clamp applied after every step; off by default.
  std::optional<std::pair<double, double>> clip;

  void validate() const;
};

/// Target class cycles through (j + 1) mod K with every emitted sample.
class AttackState {
 public:
  explicit AttackState(std::size_t class_count, std::size_t start = 0);

  std::size_t current_class() const noexcept { return current_; }
  std::size_t emitted() const noexcept { return emitted_; }
  /// Returns the class for the next sample and advances.
  std::size_t next();

 private:
  std::size_t class_count_;
  std::size_t current_;
  std::size_t emitted_ = 0;
};

struct AttackTrace {
  double initial_prob = 0.0;
  /// p(y = j | x) after each step.
  std::vector<double> target_prob;
  std::size_t iterations = 0;
  bool converged = false;
};

struct AttackedBatch {
  ProbMatrix probs;
  std::size_t dim = 0;
  std::vector<double> samples;  ///< row-major, n x dim
  std::vector<std::size_t> targets;
  std::vector<AttackTrace> traces;
};

/// x + epsilon * sgn(grad_x p(y = j | x)), with sgn(0) = 0.
std::vector<double> fgsm_step(std::span<const double> x, std::size_t j,
                              const nn::Classifier& model, double epsilon);

/// Draws the starting point for sample `index` of a run.
std::vector<double> draw_initial(const AttackConfig& config, std::size_t input_dim,
                                 std::size_t index);

/// Sign-gradient ascent on p(y = j | x) from `start`.
std::pair<std::vector<double>, AttackTrace> optimize_from(const nn::Classifier& model,
                                                          std::size_t j,
                                                          std::vector<double> start,
                                                          const AttackConfig& config);

/// Draws the first initial sample from `config.init` and optimizes it.
std::pair<std::vector<double>, AttackTrace> optimize_sample(const nn::Classifier& model,
                                                            std::size_t j,
                                                            const AttackConfig& config);

/// Emits `n_samples` optimized samples; sample i targets class i mod K.
AttackedBatch generate_attacked_batch(const nn::Classifier& model, const AttackConfig& config,
                                      std::size_t n_samples);

/// The classifier's probabilities over `points` verbatim.
ProbMatrix replay_generator(const nn::Classifier& model, std::span<const double> points,
                            std::size_t n_points);

}  // namespace scorelab::attack
