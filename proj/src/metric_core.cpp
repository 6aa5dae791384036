#include "scorelab/metric_core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "scorelab/errors.hpp"
#include "scorelab/random.hpp"

namespace scorelab {

namespace {

void check_simplex(std::span<const double> probs, double tolerance, const std::string& what) {
  double sum = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    const double v = probs[k];
    if (!std::isfinite(v) || v < 0.0) {
      throw InvalidInput(what + ": entry " + std::to_string(k) + " is negative or non-finite");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > tolerance) {
    throw InvalidInput(what + ": entries sum to " + std::to_string(sum) + ", expected 1");
  }
}

// Sum of p_k ln q_k with q floored.
double cross_term(std::span<const double> p, std::span<const double> log_q) {
  double acc = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] > 0.0) acc += p[k] * log_q[k];
  }
  return acc;
}

std::vector<double> floored_log(std::span<const double> q) {
  std::vector<double> out(q.size());
  for (std::size_t k = 0; k < q.size(); ++k) out[k] = std::log(std::max(q[k], kProbabilityFloor));
  return out;
}

double neg_entropy(std::span<const double> p) {
  double acc = 0.0;
  for (double v : p) {
    if (v > 0.0) acc += v * std::log(v);
  }
  return acc;
}

// Column mean over rows [first, last).
std::vector<double> mean_rows(const ProbMatrix& m, std::size_t first, std::size_t last) {
  const std::size_t k = m.class_count();
  std::vector<double> acc(k, 0.0);
  for (std::size_t i = first; i < last; ++i) {
    auto r = m.row(i);
    for (std::size_t c = 0; c < k; ++c) acc[c] += r[c];
  }
  const double inv = 1.0 / static_cast<double>(last - first);
  for (double& v : acc) v *= inv;
  return acc;
}

// Mean over rows [first, last) of KL(row || marginal of the same rows).
double mean_kl_to_marginal(const ProbMatrix& m, std::size_t first, std::size_t last) {
  const auto log_marginal = floored_log(mean_rows(m, first, last));
  double acc = 0.0;
  for (std::size_t i = first; i < last; ++i) {
    auto r = m.row(i);
    acc += neg_entropy(r) - cross_term(r, log_marginal);
  }
  return acc / static_cast<double>(last - first);
}

}  // namespace

ClassDistribution::ClassDistribution(std::vector<double> probs, double tolerance)
    : probs_(std::move(probs)) {
  if (probs_.empty()) throw InvalidInput("class distribution is empty");
  check_simplex(probs_, tolerance, "class distribution");
}

ClassDistribution ClassDistribution::uniform(std::size_t class_count) {
  if (class_count == 0) throw InvalidInput("class count must be positive");
  return ClassDistribution(std::vector<double>(class_count, 1.0 / static_cast<double>(class_count)));
}

ClassDistribution ClassDistribution::one_hot(std::size_t class_count, std::size_t index) {
  if (index >= class_count) throw InvalidInput("one-hot index out of range");
  std::vector<double> p(class_count, 0.0);
  p[index] = 1.0;
  return ClassDistribution(std::move(p));
}

ProbMatrix::ProbMatrix(std::size_t rows, std::size_t class_count, std::vector<double> values,
                       bool validate)
    : rows_(rows), class_count_(class_count), values_(std::move(values)) {
  if (rows_ < 1) throw InvalidInput("probability matrix needs at least one row");
  if (class_count_ < 2) throw InvalidInput("probability matrix needs at least two classes");
  if (values_.size() != rows_ * class_count_) {
    throw InvalidInput("probability matrix payload has " + std::to_string(values_.size()) +
                       " entries, expected " + std::to_string(rows_ * class_count_));
  }
  if (validate) {
    for (std::size_t i = 0; i < rows_; ++i) check_simplex(row(i), kSimplexTolerance, "row " + std::to_string(i));
  }
}

ProbMatrix ProbMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw InvalidInput("probability matrix needs at least one row");
  const std::size_t k = rows.front().size();
  std::vector<double> values;
  values.reserve(rows.size() * k);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != k) throw InvalidInput("row " + std::to_string(i) + " has the wrong length");
    values.insert(values.end(), rows[i].begin(), rows[i].end());
  }
  return ProbMatrix(rows.size(), k, std::move(values));
}

ProbMatrix ProbMatrix::from_distributions(std::span<const ClassDistribution> rows) {
  if (rows.empty()) throw InvalidInput("probability matrix needs at least one row");
  const std::size_t k = rows.front().size();
  std::vector<double> values;
  values.reserve(rows.size() * k);
  for (const auto& r : rows) {
    if (r.size() != k) throw InvalidInput("distributions have mismatched class counts");
    values.insert(values.end(), r.probs().begin(), r.probs().end());
  }
  // Rows are already validated distributions.
  return ProbMatrix(rows.size(), k, std::move(values), false);
}

void ProbMatrix::set_labels(std::vector<std::string> labels) {
  if (!labels.empty() && labels.size() != rows_) {
    throw InvalidInput("expected one label per row");
  }
  labels_ = std::move(labels);
}

ProbMatrix ProbMatrix::permuted(std::span<const std::size_t> order) const {
  if (order.size() != rows_) throw InvalidInput("permutation length does not match row count");
  std::vector<double> values(values_.size());
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < rows_; ++i) {
    if (order[i] >= rows_) throw InvalidInput("permutation index out of range");
    auto src = row(order[i]);
    std::copy(src.begin(), src.end(), values.begin() + static_cast<std::ptrdiff_t>(i * class_count_));
    if (!labels_.empty()) labels.push_back(labels_[order[i]]);
  }
  ProbMatrix out(rows_, class_count_, std::move(values), false);
  out.labels_ = std::move(labels);
  return out;
}

ProbMatrix ProbMatrix::slice(std::size_t first, std::size_t count) const {
  if (count == 0 || first + count > rows_) throw InvalidInput("row slice out of range");
  auto begin = values_.begin() + static_cast<std::ptrdiff_t>(first * class_count_);
  std::vector<double> values(begin, begin + static_cast<std::ptrdiff_t>(count * class_count_));
  ProbMatrix out(count, class_count_, std::move(values), false);
  if (!labels_.empty()) {
    auto lb = labels_.begin() + static_cast<std::ptrdiff_t>(first);
    out.labels_.assign(lb, lb + static_cast<std::ptrdiff_t>(count));
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> split_ranges(std::size_t rows,
                                                              const SplitSpec& split) {
  if (split.n_splits == 0) throw InvalidInput("n_splits must be positive");
  if (split.n_splits > rows) {
    throw InvalidInput("n_splits (" + std::to_string(split.n_splits) + ") exceeds row count (" +
                       std::to_string(rows) + ")");
  }
  const std::size_t chunk = rows / split.n_splits;
  const std::size_t remainder = rows % split.n_splits;
  if (remainder != 0 && split.remainder_policy == RemainderPolicy::reject) {
    throw InvalidInput(std::to_string(rows) + " rows do not divide into " +
                       std::to_string(split.n_splits) + " equal splits");
  }
  std::vector<std::pair<std::size_t, std::size_t>> out;
  out.reserve(split.n_splits);
  for (std::size_t s = 0; s < split.n_splits; ++s) {
    const std::size_t first = s * chunk;
    const std::size_t last = (s + 1 == split.n_splits) ? rows : first + chunk;
    out.emplace_back(first, last);
  }
  return out;
}

double EntropyReport::marginal_entropy_bits() const { return nats_to_bits(marginal_entropy); }
double EntropyReport::mean_conditional_entropy_bits() const {
  return nats_to_bits(mean_conditional_entropy);
}
double EntropyReport::mutual_information_bits() const { return nats_to_bits(mutual_information); }

double nats_to_bits(double nats) { return nats / std::numbers::ln2; }

ClassDistribution marginal_of(const ProbMatrix& matrix) {
  return ClassDistribution(mean_rows(matrix, 0, matrix.rows()));
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw InvalidInput("kl_divergence: length mismatch (" + std::to_string(p.size()) + " vs " +
                       std::to_string(q.size()) + ")");
  }
  double acc = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] > 0.0) acc += p[k] * (std::log(p[k]) - std::log(std::max(q[k], kProbabilityFloor)));
  }
  return acc;
}

double kl_divergence(const ClassDistribution& p, const ClassDistribution& q) {
  return kl_divergence(p.probs(), q.probs());
}

double entropy(std::span<const double> p) { return -neg_entropy(p); }

double entropy(const ClassDistribution& p) { return entropy(p.probs()); }

ScoreReport inception_score(const ProbMatrix& matrix, const SplitSpec& split,
                            std::optional<std::uint64_t> seed) {
  const auto ranges = split_ranges(matrix.rows(), split);

  std::optional<ProbMatrix> shuffled;
  if (seed) shuffled = matrix.permuted(random_permutation(matrix.rows(), *seed));
  const ProbMatrix& m = shuffled ? *shuffled : matrix;

  ScoreReport report;
  report.n_splits = split.n_splits;
  report.rows = matrix.rows();
  report.class_count = matrix.class_count();
  report.per_split_scores.reserve(ranges.size());
  for (auto [first, last] : ranges) {
    report.per_split_scores.push_back(std::exp(mean_kl_to_marginal(m, first, last)));
  }

  const double n = static_cast<double>(ranges.size());
  report.mean = std::accumulate(report.per_split_scores.begin(), report.per_split_scores.end(), 0.0) / n;
  if (ranges.size() > 1) {
    double ss = 0.0;
    for (double s : report.per_split_scores) ss += (s - report.mean) * (s - report.mean);
    report.std = std::sqrt(ss / n);
  }
  return report;
}

double improved_score(const ProbMatrix& matrix) {
  return mean_kl_to_marginal(matrix, 0, matrix.rows());
}

EntropyReport entropy_decomposition(const ProbMatrix& matrix) {
  EntropyReport r;
  r.marginal_entropy = entropy(marginal_of(matrix));
  double acc = 0.0;
  for (std::size_t i = 0; i < matrix.rows(); ++i) acc += entropy(matrix.row(i));
  r.mean_conditional_entropy = acc / static_cast<double>(matrix.rows());
  r.mutual_information = r.marginal_entropy - r.mean_conditional_entropy;
  return r;
}

bool bounds_check(const ScoreReport& report) {
  const double upper = static_cast<double>(report.class_count) + 1e-9;
  return std::all_of(report.per_split_scores.begin(), report.per_split_scores.end(),
                     [upper](double s) { return s >= 1.0 - 1e-9 && s <= upper; });
}

ImprovedScoreAccumulator::ImprovedScoreAccumulator(std::size_t class_count)
    : class_count_(class_count), row_sum_(class_count, 0.0) {
  if (class_count < 2) throw InvalidInput("accumulator needs at least two classes");
}

void ImprovedScoreAccumulator::add_row(std::span<const double> row) {
  if (row.size() != class_count_) throw InvalidInput("row length does not match class count");
  for (std::size_t k = 0; k < class_count_; ++k) row_sum_[k] += row[k];
  entropy_sum_ += entropy(row);
  ++count_;
}

void ImprovedScoreAccumulator::add(const ProbMatrix& batch) {
  for (std::size_t i = 0; i < batch.rows(); ++i) add_row(batch.row(i));
}

void ImprovedScoreAccumulator::merge(const ImprovedScoreAccumulator& other) {
  if (other.class_count_ != class_count_) throw InvalidInput("accumulators have different class counts");
  for (std::size_t k = 0; k < class_count_; ++k) row_sum_[k] += other.row_sum_[k];
  entropy_sum_ += other.entropy_sum_;
  count_ += other.count_;
}

double ImprovedScoreAccumulator::value() const {
  if (count_ == 0) throw InvalidInput("no rows accumulated");
  const double n = static_cast<double>(count_);
  std::vector<double> marginal(row_sum_);
  for (double& v : marginal) v /= n;
  return entropy(marginal) - entropy_sum_ / n;
}

}  // namespace scorelab
