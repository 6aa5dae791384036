#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scorelab/classifier.hpp"
#include "scorelab/metric_core.hpp"

namespace scorelab::io {

/// PMAT layout (all little-endian):
///   "PMAT" | u16 version | u64 N | u32 K | N*K f64, row-major
inline constexpr std::string_view kPmatMagic = "PMAT";
inline constexpr std::uint16_t kPmatVersion = 1;
inline constexpr std::size_t kPmatHeaderSize = 4 + 2 + 8 + 4;

/// SLMD layout (all little-endian):
///   "SLMD" | u16 version | u8 architecture | u8 activation |
///   u32 input_dim | u32 hidden | u32 class_count | f64 parameter blocks
/// Parameter blocks follow declaration order: weights, biases for the
/// linear model; hidden weights, hidden biases, output weights, output
/// biases for the MLP. Linear models store hidden = 0 and activation = 0.
inline constexpr std::string_view kModelMagic = "SLMD";
inline constexpr std::uint16_t kModelVersion = 1;
enum class ArchitectureTag : std::uint8_t { softmax_linear = 1, mlp = 2 };

enum class MatrixFormat { pmat, csv, automatic };

MatrixFormat parse_matrix_format(std::string_view name);

struct LoadOptions {
  MatrixFormat format = MatrixFormat::automatic;
  bool validate = true;
  /// Rows whose sums are off by more than this are rejected; rows off by
  /// more than kSimplexTolerance but within this are renormalized.
  double row_sum_tolerance = 1e-6;
};

struct LoadedMatrix {
  ProbMatrix matrix;
  /// Number of rows rescaled to sum to exactly one.
  std::size_t renormalized_rows = 0;
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::span<const std::byte> bytes) noexcept;
std::uint64_t fnv1a64(std::string_view bytes) noexcept;
std::string digest_hex(std::uint64_t digest);

std::vector<std::byte> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::byte> bytes);

std::vector<std::byte> encode_pmat(const ProbMatrix& matrix);
/// Parses a PMAT image without simplex validation; throws LoadError on a
/// malformed header or a payload of the wrong length.
ProbMatrix decode_pmat(std::span<const std::byte> bytes);

std::string encode_csv(const ProbMatrix& matrix, bool header = true);
/// Parses CSV text; a first line starting with "class_" is treated as the
/// header. Errors cite 1-based line numbers.
ProbMatrix decode_csv(std::string_view text);

/// Detects the format, decodes, and applies the row-sum policy of `options`.
LoadedMatrix load_matrix(const std::filesystem::path& path, const LoadOptions& options = {});
/// Format is chosen from the extension (".csv" or PMAT otherwise) when
/// `format` is automatic.
void save_matrix(const std::filesystem::path& path, const ProbMatrix& matrix,
                 MatrixFormat format = MatrixFormat::automatic);

/// Applies the row-sum policy to an already decoded matrix.
LoadedMatrix validate_rows(const ProbMatrix& raw, double row_sum_tolerance);

std::vector<std::byte> encode_model(const nn::Classifier& model);
nn::Classifier decode_model(std::span<const std::byte> bytes);
nn::Classifier load_model(const std::filesystem::path& path);
void save_model(const std::filesystem::path& path, const nn::Classifier& model);

/// Dataset CSV: header "label,x_0,...,x_{d-1}", one labeled point per line.
std::string encode_dataset_csv(const nn::SyntheticDataset& data);
nn::SyntheticDataset decode_dataset_csv(std::string_view text, std::size_t class_count = 0);

/// Point CSV: header "x_0,...,x_{d-1}", one point per line. Returns the
/// row-major points and sets `dim`.
std::string encode_points_csv(std::span<const double> points, std::size_t dim);
std::vector<double> decode_points_csv(std::string_view text, std::size_t& dim);

/// Decimal form with 17 significant digits; parses back to the same bits.
std::string format_double(double v);

}  // namespace scorelab::io
