#include "scorelab/gaussian_testbed.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "scorelab/errors.hpp"
#include "scorelab/random.hpp"

namespace scorelab::testbed {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double log_joint(double x, double mean, double variance, double weight) {
  const double d = x - mean;
  return std::log(weight) - 0.5 * std::log(2.0 * std::numbers::pi * variance) -
         d * d / (2.0 * variance);
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

MixtureSpec MixtureSpec::reference(ScaleReading reading) {
  MixtureSpec s;
  s.class_variances = {to_variance(2.0, reading), to_variance(2.0, reading)};
  return s;
}

void MixtureSpec::validate() const {
  for (double v : class_variances) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidInput("mixture variances must be positive");
  }
  for (double m : class_means) {
    if (!std::isfinite(m)) throw InvalidInput("mixture means must be finite");
  }
  for (double w : class_weights) {
    if (!(w >= 0.0)) throw InvalidInput("mixture weights must be non-negative");
  }
  if (std::abs(class_weights[0] + class_weights[1] - 1.0) > 1e-12) {
    throw InvalidInput("mixture weights must sum to 1");
  }
}

double to_variance(double scale_param, ScaleReading reading) {
  return reading == ScaleReading::variance ? scale_param : scale_param * scale_param;
}

void Sampler1D::validate() const {
  std::visit(overloaded{
                 [](const TwoPoint& s) {
                   if (!(s.weight >= 0.0 && s.weight <= 1.0)) {
                     throw InvalidInput("two_point weight must lie in [0, 1]");
                   }
                 },
                 [](const Uniform& s) {
                   if (!(s.lo < s.hi)) throw InvalidInput("uniform sampler needs lo < hi");
                 },
                 [](const Normal& s) {
                   if (!(s.variance > 0.0)) throw InvalidInput("normal sampler needs variance > 0");
                 },
                 [](const TrueMixture& s) { s.spec.validate(); },
                 [](const Empirical& s) {
                   if (s.values.empty()) throw InvalidInput("empirical sampler has no values");
                 },
             },
             kind);
}

std::string Sampler1D::describe() const {
  return std::visit(
      overloaded{
          [](const TwoPoint& s) {
            return "two_point(" + fmt(s.a) + ", " + fmt(s.b) + ", " + fmt(s.weight) + ")";
          },
          [](const Uniform& s) { return "uniform(" + fmt(s.lo) + ", " + fmt(s.hi) + ")"; },
          [](const Normal& s) { return "normal(" + fmt(s.mean) + ", var=" + fmt(s.variance) + ")"; },
          [](const TrueMixture&) { return std::string("true_mixture"); },
          [](const Empirical& s) { return "empirical(" + std::to_string(s.values.size()) + ")"; },
      },
      kind);
}

std::vector<double> Sampler1D::draw(std::size_t n) const {
  validate();
  Rng rng(seed);
  std::vector<double> out;
  out.reserve(n);
  std::visit(overloaded{
                 [&](const TwoPoint& s) {
                   std::bernoulli_distribution pick_a(s.weight);
                   for (std::size_t i = 0; i < n; ++i) out.push_back(pick_a(rng) ? s.a : s.b);
                 },
                 [&](const Uniform& s) {
                   std::uniform_real_distribution<double> u(s.lo, s.hi);
                   for (std::size_t i = 0; i < n; ++i) out.push_back(u(rng));
                 },
                 [&](const Normal& s) {
                   std::normal_distribution<double> g(s.mean, std::sqrt(s.variance));
                   for (std::size_t i = 0; i < n; ++i) out.push_back(g(rng));
                 },
                 [&](const TrueMixture& s) {
                   std::bernoulli_distribution pick_first(s.spec.class_weights[0]);
                   std::normal_distribution<double> g;
                   for (std::size_t i = 0; i < n; ++i) {
                     const int c = pick_first(rng) ? 0 : 1;
                     out.push_back(s.spec.class_means[c] + std::sqrt(s.spec.class_variances[c]) * g(rng));
                   }
                 },
                 [&](const Empirical& s) {
                   for (std::size_t i = 0; i < n; ++i) out.push_back(s.values[i % s.values.size()]);
                 },
             },
             kind);
  return out;
}

ClassDistribution bayes_posterior(double x, const MixtureSpec& spec) {
  if (!std::isfinite(x)) throw InvalidInput("bayes_posterior: x must be finite");
  spec.validate();
  const double l0 = log_joint(x, spec.class_means[0], spec.class_variances[0], spec.class_weights[0]);
  const double l1 = log_joint(x, spec.class_means[1], spec.class_variances[1], spec.class_weights[1]);
  // p1 = 1 / (1 + exp(l0 - l1)), written so neither branch overflows.
  const double d = l1 - l0;
  double p1;
  if (d >= 0.0) {
    p1 = 1.0 / (1.0 + std::exp(-d));
  } else {
    const double e = std::exp(d);
    p1 = e / (1.0 + e);
  }
  return ClassDistribution({1.0 - p1, p1});
}

ProbMatrix posterior_matrix(const std::vector<double>& xs, const MixtureSpec& spec) {
  if (xs.empty()) throw InvalidInput("posterior_matrix: no samples");
  spec.validate();
  std::vector<double> values;
  values.reserve(xs.size() * 2);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i])) {
      throw InvalidInput("sample " + std::to_string(i) + " is not finite");
    }
    auto p = bayes_posterior(xs[i], spec);
    values.push_back(p[0]);
    values.push_back(p[1]);
  }
  return ProbMatrix(xs.size(), 2, std::move(values), false);
}

TestbedReport score_of_sampler(const Sampler1D& sampler, const MixtureSpec& spec,
                               std::size_t n_samples) {
  if (n_samples == 0) throw InvalidInput("score_of_sampler: n_samples must be positive");
  const auto matrix = posterior_matrix(sampler.draw(n_samples), spec);
  const auto decomposition = entropy_decomposition(matrix);

  TestbedReport r;
  r.sampler = sampler.describe();
  r.score_nats = improved_score(matrix);
  r.score_exp = std::exp(r.score_nats);
  r.marginal_entropy = decomposition.marginal_entropy;
  r.mean_conditional_entropy = decomposition.mean_conditional_entropy;
  r.n_samples = n_samples;
  r.seed = sampler.seed;
  return r;
}

std::vector<Sampler1D> reference_samplers(const MixtureSpec& spec, std::uint64_t seed,
                                          ScaleReading reading) {
  return {
      Sampler1D{TwoPoint{-10.0, 10.0, 0.5}, mix_seed(seed, 0)},
      Sampler1D{Uniform{-100.0, 100.0}, mix_seed(seed, 1)},
      Sampler1D{Normal{0.0, to_variance(20.0, reading)}, mix_seed(seed, 2)},
      Sampler1D{TrueMixture{spec}, mix_seed(seed, 3)},
  };
}

std::vector<TestbedReport> score_ordering_demo(const MixtureSpec& spec, std::size_t n_samples,
                                               std::uint64_t seed, ScaleReading reading) {
  std::vector<TestbedReport> reports;
  for (const auto& s : reference_samplers(spec, seed, reading)) {
    reports.push_back(score_of_sampler(s, spec, n_samples));
  }
  std::stable_sort(reports.begin(), reports.end(),
                   [](const TestbedReport& a, const TestbedReport& b) { return a.score_nats > b.score_nats; });
  return reports;
}

}  // namespace scorelab::testbed
