#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace scorelab {

/// Tolerance on row sums for distributions built in memory.
inline constexpr double kSimplexTolerance = 1e-9;

/// Floor applied to the reference distribution inside KL.
inline constexpr double kProbabilityFloor = 1e-12;

/// A single K-vector on the probability simplex.
class ClassDistribution {
 public:
  /// Validates that every entry is finite and non-negative and that the
  /// entries sum to one within `tolerance`. Throws InvalidInput otherwise.
  explicit ClassDistribution(std::vector<double> probs, double tolerance = kSimplexTolerance);

  static ClassDistribution uniform(std::size_t class_count);
  static ClassDistribution one_hot(std::size_t class_count, std::size_t index);

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const noexcept { return probs_; }

  friend bool operator==(const ClassDistribution&, const ClassDistribution&) = default;

 private:
  std::vector<double> probs_;
};

/// N rows of K-class probability distributions stored row-major.
class ProbMatrix {
 public:
  /// Takes ownership of `values` (size rows*class_count). Every row is checked
  /// against the simplex invariants unless `validate` is false.
  ProbMatrix(std::size_t rows, std::size_t class_count, std::vector<double> values,
             bool validate = true);

  static ProbMatrix from_rows(const std::vector<std::vector<double>>& rows);
  static ProbMatrix from_distributions(std::span<const ClassDistribution> rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t class_count() const noexcept { return class_count_; }

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * class_count_, class_count_};
  }
  std::span<const double> values() const noexcept { return values_; }

  const std::vector<std::string>& labels() const noexcept { return labels_; }
  /// Attaches one identifier per row.
  void set_labels(std::vector<std::string> labels);

  /// Returns a new matrix whose i-th row is row `order[i]` of this one.
  ProbMatrix permuted(std::span<const std::size_t> order) const;
  /// Contiguous row range [first, first + count).
  ProbMatrix slice(std::size_t first, std::size_t count) const;

  friend bool operator==(const ProbMatrix&, const ProbMatrix&) = default;

 private:
  std::size_t rows_;
  std::size_t class_count_;
  std::vector<double> values_;
  std::vector<std::string> labels_;
};

enum class RemainderPolicy { reject, last_split_absorbs };

struct SplitSpec {
  std::size_t n_splits = 10;
  RemainderPolicy remainder_policy = RemainderPolicy::reject;
};

/// Half-open row ranges for each split. Throws InvalidInput when the spec
/// cannot be applied to `rows`.
std::vector<std::pair<std::size_t, std::size_t>> split_ranges(std::size_t rows,
                                                              const SplitSpec& split);

struct ScoreReport {
  std::vector<double> per_split_scores;
  double mean = 0.0;
  double std = 0.0;  ///< population standard deviation
  std::size_t n_splits = 0;
  std::size_t rows = 0;
  std::size_t class_count = 0;
  std::string log_base = "e";
};

struct EntropyReport {
  double marginal_entropy = 0.0;
  double mean_conditional_entropy = 0.0;
  double mutual_information = 0.0;

  double marginal_entropy_bits() const;
  double mean_conditional_entropy_bits() const;
  double mutual_information_bits() const;
};

double nats_to_bits(double nats);

/// Arithmetic mean of the rows.
ClassDistribution marginal_of(const ProbMatrix& matrix);

/// sum_i p_i ln(p_i / q_i) with q floored at kProbabilityFloor and 0 ln 0 = 0.
double kl_divergence(std::span<const double> p, std::span<const double> q);
double kl_divergence(const ClassDistribution& p, const ClassDistribution& q);

/// Shannon entropy in nats.
double entropy(std::span<const double> p);
double entropy(const ClassDistribution& p);

/// Split-protocol Inception Score. Rows are scored in order unless `seed` is
/// given, in which case a seeded permutation is applied before splitting.
ScoreReport inception_score(const ProbMatrix& matrix, const SplitSpec& split = {},
                            std::optional<std::uint64_t> seed = std::nullopt);

/// Mean KL from each row to the marginal of the whole matrix, in nats.
double improved_score(const ProbMatrix& matrix);

EntropyReport entropy_decomposition(const ProbMatrix& matrix);

/// True iff every per-split score is inside [1, K] up to 1e-9.
bool bounds_check(const ScoreReport& report);

/// Accumulates the improved score over batches of rows.
///
/// Each batch contributes the sum of its rows and the sum of its row
/// entropies; merging is associative, so the final value does not depend on
/// how the rows were batched or ordered.
class ImprovedScoreAccumulator {
 public:
  explicit ImprovedScoreAccumulator(std::size_t class_count);

  void add_row(std::span<const double> row);
  void add(const ProbMatrix& batch);
  void merge(const ImprovedScoreAccumulator& other);

  std::size_t count() const noexcept { return count_; }
  /// Throws InvalidInput when no rows have been added.
  double value() const;

 private:
  std::size_t class_count_;
  std::size_t count_ = 0;
  std::vector<double> row_sum_;
  double entropy_sum_ = 0.0;
};

}  // namespace scorelab
