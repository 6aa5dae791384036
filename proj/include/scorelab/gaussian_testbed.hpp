#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "scorelab/metric_core.hpp"

namespace scorelab::testbed {

/// How the second parameter of N(mu, s) is read.
enum class ScaleReading { variance, stddev };

/// Two-class one-dimensional Gaussian mixture.
struct MixtureSpec {
  std::array<double, 2> class_means{-1.0, 1.0};
  std::array<double, 2> class_variances{2.0, 2.0};
  std::array<double, 2> class_weights{0.5, 0.5};

  /// N(-1, 2) and N(1, 2) with equal weights.
  static MixtureSpec reference(ScaleReading reading = ScaleReading::variance);

  void validate() const;
};

/// Converts the second parameter of a normal to a variance under `reading`.
double to_variance(double scale_param, ScaleReading reading);

struct TwoPoint {
  double a = -10.0;
  double b = 10.0;
  double weight = 0.5;  ///< probability of emitting `a`
};
struct Uniform {
  double lo = -100.0;
  double hi = 100.0;
};
struct Normal {
  double mean = 0.0;
  double variance = 20.0;
};
struct TrueMixture {
  MixtureSpec spec;
};
struct Empirical {
  std::vector<double> values;  ///< cycled in order
};

using SamplerKind = std::variant<TwoPoint, Uniform, Normal, TrueMixture, Empirical>;

struct Sampler1D {
  SamplerKind kind;
  std::uint64_t seed = 0;

  void validate() const;
  std::string describe() const;
  std::vector<double> draw(std::size_t n) const;
};

struct TestbedReport {
  std::string sampler;
  double score_nats = 0.0;
  double score_exp = 1.0;
  double marginal_entropy = 0.0;
  double mean_conditional_entropy = 0.0;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
};

inline constexpr std::size_t kDefaultSamples = 100'000;

/// (p(y=0|x), p(y=1|x)) under the mixture, evaluated in log space.
ClassDistribution bayes_posterior(double x, const MixtureSpec& spec);

ProbMatrix posterior_matrix(const std::vector<double>& xs, const MixtureSpec& spec);

TestbedReport score_of_sampler(const Sampler1D& sampler, const MixtureSpec& spec,
                               std::size_t n_samples = kDefaultSamples);

/// The four reference samplers: two-point at +/-10, U(-100, 100), N(0, 20)
/// with `reading`, and the mixture itself. Sub-seeds are derived from `seed`.
std::vector<Sampler1D> reference_samplers(const MixtureSpec& spec, std::uint64_t seed,
                                          ScaleReading reading = ScaleReading::variance);

/// Scores the reference samplers and returns them sorted by score, best first.
std::vector<TestbedReport> score_ordering_demo(const MixtureSpec& spec,
                                               std::size_t n_samples, std::uint64_t seed,
                                               ScaleReading reading = ScaleReading::variance);

}  // namespace scorelab::testbed
