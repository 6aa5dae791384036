#include "scorelab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "scorelab/errors.hpp"
#include "scorelab/random.hpp"

namespace scorelab::experiments {

namespace {

// Writes softmax(logits) into `out`.
void softmax_into(const std::vector<double>& logits, double* out) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double s = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    out[k] = std::exp(logits[k] - mx);
    s += out[k];
  }
  for (std::size_t k = 0; k < logits.size(); ++k) out[k] /= s;
}

}  // namespace

const SplitStudyRow& SplitStudyResult::at(std::size_t n_splits) const {
  for (const auto& r : rows) {
    if (r.n_splits == n_splits) return r;
  }
  throw InvalidInput("split count " + std::to_string(n_splits) + " not in study");
}

double SplitStudyResult::pooled_standard_error(std::size_t splits_a, std::size_t splits_b) const {
  const auto& a = at(splits_a);
  const auto& b = at(splits_b);
  return std::sqrt(a.std * a.std / static_cast<double>(a.n_splits) +
                   b.std * b.std / static_cast<double>(b.n_splits));
}

SplitStudyResult split_study(const ProbMatrix& matrix, const std::vector<std::size_t>& split_counts,
                             RemainderPolicy policy, std::optional<std::uint64_t> shuffle_seed,
                             std::string source) {
  if (split_counts.empty()) throw InvalidInput("split study needs at least one split count");
  // Validate every count up front so a bad grid fails before any work.
  for (std::size_t n : split_counts) split_ranges(matrix.rows(), SplitSpec{n, policy});

  SplitStudyResult result;
  result.source = std::move(source);
  result.n_rows = matrix.rows();
  result.class_count = matrix.class_count();
  for (std::size_t n : split_counts) {
    const auto report = inception_score(matrix, SplitSpec{n, policy}, shuffle_seed);
    result.rows.push_back({n, report.mean, report.std});
  }
  return result;
}

EntropyStudyResult entropy_study(const ProbMatrix& matrix, std::size_t buckets) {
  if (buckets == 0) throw InvalidInput("entropy histogram needs at least one bucket");
  const auto decomposition = entropy_decomposition(matrix);

  EntropyStudyResult r;
  r.mean_conditional_entropy_bits = decomposition.mean_conditional_entropy_bits();
  r.marginal_entropy_bits = decomposition.marginal_entropy_bits();
  r.mutual_information_bits = decomposition.mutual_information_bits();
  r.max_entropy_bits = std::log2(static_cast<double>(matrix.class_count()));
  r.histogram.assign(buckets, 0);
  const double width = r.max_entropy_bits / static_cast<double>(buckets);
  for (std::size_t i = 0; i < matrix.rows(); ++i) {
    const double h = nats_to_bits(entropy(matrix.row(i)));
    auto b = static_cast<std::size_t>(std::max(0.0, h) / width);
    r.histogram[std::min(b, buckets - 1)] += 1;
  }
  return r;
}

std::vector<std::pair<std::size_t, double>> top_classes(const ProbMatrix& matrix, std::size_t k) {
  if (k == 0 || k > matrix.class_count()) {
    throw InvalidInput("top_classes: k must lie in [1, " + std::to_string(matrix.class_count()) + "]");
  }
  const auto marginal = marginal_of(matrix);
  std::vector<std::size_t> order(matrix.class_count());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return marginal[a] > marginal[b]; });
  std::vector<std::pair<std::size_t, double>> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.emplace_back(order[i], marginal[order[i]]);
  return out;
}

ProbMatrix make_heterogeneous_matrix(const HeterogeneousSpec& spec) {
  if (spec.rows == 0 || spec.class_count < 2) throw InvalidInput("need rows >= 1 and K >= 2");
  if (!(spec.sharp_fraction >= 0.0 && spec.sharp_fraction <= 1.0)) {
    throw InvalidInput("sharp_fraction must lie in [0, 1]");
  }
  Rng rng(spec.seed);
  std::normal_distribution<double> g(0.0, spec.logit_scale);
  std::uniform_int_distribution<std::size_t> pick(0, spec.class_count - 1);
  std::bernoulli_distribution is_sharp(spec.sharp_fraction);

  std::vector<double> values(spec.rows * spec.class_count);
  std::vector<double> logits(spec.class_count);
  for (std::size_t i = 0; i < spec.rows; ++i) {
    for (double& z : logits) z = g(rng);
    if (is_sharp(rng)) logits[pick(rng)] += spec.sharp_boost;
    softmax_into(logits, values.data() + i * spec.class_count);
  }
  return ProbMatrix(spec.rows, spec.class_count, std::move(values), false);
}

ProbMatrix make_cycling_one_hot(std::size_t rows, std::size_t class_count) {
  std::vector<double> values(rows * class_count, 0.0);
  for (std::size_t i = 0; i < rows; ++i) values[i * class_count + i % class_count] = 1.0;
  return ProbMatrix(rows, class_count, std::move(values));
}

ProbMatrix make_uniform_matrix(std::size_t rows, std::size_t class_count) {
  return ProbMatrix(rows, class_count,
                    std::vector<double>(rows * class_count, 1.0 / static_cast<double>(class_count)));
}

ProbMatrix make_random_matrix(std::size_t rows, std::size_t class_count, std::uint64_t seed) {
  if (rows == 0 || class_count < 2) throw InvalidInput("need rows >= 1 and K >= 2");
  Rng rng(seed);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> temp(0.1, 5.0);
  std::vector<double> values(rows * class_count);
  std::vector<double> logits(class_count);
  for (std::size_t i = 0; i < rows; ++i) {
    const double t = temp(rng);
    for (double& z : logits) z = t * g(rng);
    softmax_into(logits, values.data() + i * class_count);
  }
  return ProbMatrix(rows, class_count, std::move(values), false);
}

}  // namespace scorelab::experiments
