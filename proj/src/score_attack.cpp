#include "scorelab/score_attack.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "scorelab/errors.hpp"
#include "scorelab/random.hpp"

namespace scorelab::attack {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

double target_prob(const nn::Classifier& model, std::span<const double> x, std::size_t j) {
  return nn::predict_proba(model, x)[j];
}

}  // namespace

void AttackConfig::validate() const {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw InvalidInput("epsilon must be >= 0");
  if (!(early_stop_delta > 0.0 && early_stop_delta < 1.0)) {
    throw InvalidInput("early_stop_delta must lie in (0, 1)");
  }
  if (clip && !(clip->first < clip->second)) throw InvalidInput("clip range needs lo < hi");
  std::visit(overloaded{
                 [](const UniformBox& b) {
                   if (!(b.lo < b.hi)) throw InvalidInput("uniform_box needs lo < hi");
                 },
                 [](const EmpiricalInit& e) {
                   if (e.dim == 0 || e.points.empty() || e.points.size() % e.dim != 0) {
                     throw InvalidInput("empirical init needs a non-empty d-column point set");
                   }
                 },
                 [](const FixedInit& f) {
                   if (f.point.empty()) throw InvalidInput("fixed init point is empty");
                 },
             },
             init);
}

AttackState::AttackState(std::size_t class_count, std::size_t start)
    : class_count_(class_count), current_(start) {
  if (class_count_ == 0) throw InvalidInput("class count must be positive");
  if (start >= class_count_) throw InvalidInput("starting class out of range");
}

std::size_t AttackState::next() {
  const std::size_t j = current_;
  current_ = (current_ + 1) % class_count_;
  ++emitted_;
  return j;
}

std::vector<double> fgsm_step(std::span<const double> x, std::size_t j,
                              const nn::Classifier& model, double epsilon) {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw InvalidInput("epsilon must be finite and non-negative");
  const auto grad = nn::grad_class_prob(model, x, j);
  std::vector<double> out(x.begin(), x.end());
  for (std::size_t c = 0; c < out.size(); ++c) {
    if (!std::isfinite(grad[c])) throw AttackFailure("gradient is not finite");
    out[c] += epsilon * sign(grad[c]);
    if (!std::isfinite(out[c])) throw AttackFailure("sample left the finite range");
  }
  return out;
}

std::vector<double> draw_initial(const AttackConfig& config, std::size_t input_dim,
                                 std::size_t index) {
  std::vector<double> x = std::visit(
      overloaded{
          [&](const UniformBox& b) {
            if (b.dim != 0 && b.dim != input_dim) throw InvalidInput("uniform_box dimension mismatch");
            Rng rng(mix_seed(config.seed, index));
            std::uniform_real_distribution<double> u(b.lo, b.hi);
            std::vector<double> v(input_dim);
            for (double& e : v) e = u(rng);
            return v;
          },
          [&](const EmpiricalInit& e) {
            if (e.dim != input_dim) throw InvalidInput("empirical init dimension mismatch");
            const std::size_t row = index % e.count();
            auto first = e.points.begin() + static_cast<std::ptrdiff_t>(row * e.dim);
            return std::vector<double>(first, first + static_cast<std::ptrdiff_t>(e.dim));
          },
          [&](const FixedInit& f) {
            if (f.point.size() != input_dim) throw InvalidInput("fixed init dimension mismatch");
            return f.point;
          },
      },
      config.init);
  if (!std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); })) {
    throw InvalidInput("initial sample is not finite");
  }
  return x;
}

std::pair<std::vector<double>, AttackTrace> optimize_from(const nn::Classifier& model,
                                                          std::size_t j,
                                                          std::vector<double> start,
                                                          const AttackConfig& config) {
  config.validate();
  if (j >= nn::class_count(model)) throw InvalidInput("target class out of range");
  if (start.size() != nn::input_dim(model)) throw InvalidInput("initial sample dimension mismatch");

  AttackTrace trace;
  std::vector<double> x = std::move(start);
  double p = target_prob(model, x, j);
  trace.initial_prob = p;
  const double goal = 1.0 - config.early_stop_delta;
  trace.target_prob.reserve(std::min<std::size_t>(config.max_iters, 1024));
  while (p < goal && trace.iterations < config.max_iters) {
    x = fgsm_step(x, j, model, config.epsilon);
    if (config.clip) {
      for (double& v : x) v = std::clamp(v, config.clip->first, config.clip->second);
    }
    p = target_prob(model, x, j);
    trace.target_prob.push_back(p);
    ++trace.iterations;
  }
  trace.converged = p >= goal;
  return {std::move(x), std::move(trace)};
}

std::pair<std::vector<double>, AttackTrace> optimize_sample(const nn::Classifier& model,
                                                            std::size_t j,
                                                            const AttackConfig& config) {
  config.validate();
  return optimize_from(model, j, draw_initial(config, nn::input_dim(model), 0), config);
}

AttackedBatch generate_attacked_batch(const nn::Classifier& model, const AttackConfig& config,
                                      std::size_t n_samples) {
  config.validate();
  if (n_samples == 0) throw InvalidInput("n_samples must be positive");
  const std::size_t d = nn::input_dim(model);
  const std::size_t k = nn::class_count(model);

  std::vector<double> samples;
  std::vector<std::size_t> targets;
  std::vector<AttackTrace> traces;
  samples.reserve(n_samples * d);
  targets.reserve(n_samples);
  traces.reserve(n_samples);

  // Sample i targets class i mod K regardless of evaluation order.
  AttackState state(k);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const std::size_t j = state.next();
    auto [x, trace] = optimize_from(model, j, draw_initial(config, d, i), config);
    samples.insert(samples.end(), x.begin(), x.end());
    targets.push_back(j);
    traces.push_back(std::move(trace));
  }
  auto probs = nn::predict_matrix(model, samples, n_samples);
  return AttackedBatch{std::move(probs), d, std::move(samples), std::move(targets), std::move(traces)};
}

ProbMatrix replay_generator(const nn::Classifier& model, std::span<const double> points,
                            std::size_t n_points) {
  if (n_points == 0) throw InvalidInput("replay needs at least one sample");
  return nn::predict_matrix(model, points, n_points);
}

}  // namespace scorelab::attack
