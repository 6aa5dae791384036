#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "scorelab/metric_core.hpp"

namespace scorelab::experiments {

/// Split counts used for the split-sensitivity table.
inline const std::vector<std::size_t> kReferenceSplitGrid{1, 2, 5, 10, 20, 50, 100, 200};

struct SplitStudyRow {
  std::size_t n_splits = 0;
  double mean = 0.0;
  double std = 0.0;
};

struct SplitStudyResult {
  std::vector<SplitStudyRow> rows;
  std::string source;
  std::size_t n_rows = 0;
  std::size_t class_count = 0;

  const SplitStudyRow& at(std::size_t n_splits) const;
  /// sqrt(std_a^2 / n_a + std_b^2 / n_b): standard error of the difference of
  /// the two split-count means.
  double pooled_standard_error(std::size_t splits_a, std::size_t splits_b) const;
};

SplitStudyResult split_study(const ProbMatrix& matrix, const std::vector<std::size_t>& split_counts,
                             RemainderPolicy policy = RemainderPolicy::reject,
                             std::optional<std::uint64_t> shuffle_seed = std::nullopt,
                             std::string source = {});

struct EntropyStudyResult {
  double mean_conditional_entropy_bits = 0.0;
  double marginal_entropy_bits = 0.0;
  double mutual_information_bits = 0.0;
  double max_entropy_bits = 0.0;  ///< log2 K
  /// Per-row entropy counts over equal-width buckets of [0, log2 K].
  std::vector<std::size_t> histogram;
};

EntropyStudyResult entropy_study(const ProbMatrix& matrix, std::size_t buckets = 10);

/// The k classes with the largest marginal probability, ties by ascending
/// index.
std::vector<std::pair<std::size_t, double>> top_classes(const ProbMatrix& matrix, std::size_t k);

/// Parameters for a synthetic matrix mixing confident and diffuse rows.
struct HeterogeneousSpec {
  std::size_t rows = 50'000;
  std::size_t class_count = 1000;
  double sharp_fraction = 0.7;  ///< share of rows concentrated on one class
  double sharp_boost = 9.0;     ///< logit added to the chosen class of sharp rows
  double logit_scale = 1.0;     ///< stddev of the Gaussian background logits
  std::uint64_t seed = 0;
};

ProbMatrix make_heterogeneous_matrix(const HeterogeneousSpec& spec);

/// One-hot rows cycling over the classes: row i has all mass on i mod K.
ProbMatrix make_cycling_one_hot(std::size_t rows, std::size_t class_count);
ProbMatrix make_uniform_matrix(std::size_t rows, std::size_t class_count);
/// Softmax of Gaussian logits with per-row temperature drawn from [0.1, 5].
ProbMatrix make_random_matrix(std::size_t rows, std::size_t class_count, std::uint64_t seed);

}  // namespace scorelab::experiments
