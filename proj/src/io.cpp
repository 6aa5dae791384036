#include "scorelab/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "scorelab/errors.hpp"

namespace scorelab::io {

namespace {

class ByteWriter {
 public:
  void raw(std::string_view s) {
    for (char c : s) out_.push_back(static_cast<std::byte>(c));
  }
  template <class U>
  void uint(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) out_.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xFF));
  }
  void f64(double v) { uint(std::bit_cast<std::uint64_t>(v)); }
  void f64s(std::span<const double> vs) {
    for (double v : vs) f64(v);
  }
  void reserve(std::size_t n) { out_.reserve(n); }
  std::vector<std::byte> take() { return std::move(out_); }

 private:
  std::vector<std::byte> out_;
};

class ByteReader {
 public:
  ByteReader(std::span<const std::byte> bytes, std::string what) : bytes_(bytes), what_(std::move(what)) {}

  std::string_view raw(std::size_t n) {
    need(n);
    std::string_view s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  template <class U>
  U uint() {
    need(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      v |= static_cast<U>(std::to_integer<std::uint64_t>(bytes_[pos_ + i]) << (8 * i));
    }
    pos_ += sizeof(U);
    return v;
  }
  double f64() { return std::bit_cast<double>(uint<std::uint64_t>()); }
  std::vector<double> f64s(std::size_t n) {
    if (n > remaining() / 8) fail("truncated parameter block");
    std::vector<double> out(n);
    for (double& v : out) v = f64();
    return out;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  [[noreturn]] void fail(const std::string& msg) const { throw LoadError(what_ + ": " + msg); }

 private:
  void need(std::size_t n) {
    if (remaining() < n) fail("unexpected end of data");
  }
  std::span<const std::byte> bytes_;
  std::size_t pos_ = 0;
  std::string what_;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Splits `text` into lines, dropping blank ones; keeps 1-based line numbers.
std::vector<std::pair<std::size_t, std::string_view>> lines_of(std::string_view text) {
  std::vector<std::pair<std::size_t, std::string_view>> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    auto line = trim(text.substr(0, nl));
    if (!line.empty()) out.emplace_back(line_no, line);
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  return out;
}

double parse_number(std::string_view field, std::size_t line_no) {
  field = trim(field);
  double v = 0.0;
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || field.empty()) {
    throw LoadError("line " + std::to_string(line_no) + ": cannot parse number '" + std::string(field) + "'");
  }
  return v;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = line.find(',');
    out.push_back(line.substr(0, comma));
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  return out;
}

bool has_extension(const std::filesystem::path& path, std::string_view ext) {
  auto e = path.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
  return e == ext;
}

std::string_view as_text(std::span<const std::byte> bytes) {
  return {reinterpret_cast<const char*>(bytes.data()), bytes.size()};
}

}  // namespace

MatrixFormat parse_matrix_format(std::string_view name) {
  if (name == "pmat") return MatrixFormat::pmat;
  if (name == "csv") return MatrixFormat::csv;
  if (name == "auto") return MatrixFormat::automatic;
  throw InvalidInput("unknown matrix format '" + std::string(name) + "' (expected pmat, csv or auto)");
}

std::uint64_t fnv1a64(std::span<const std::byte> bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::byte b : bytes) {
    h ^= std::to_integer<std::uint64_t>(b);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  return fnv1a64(std::as_bytes(std::span(bytes.data(), bytes.size())));
}

std::string digest_hex(std::uint64_t digest) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(digest));
  return buf;
}

std::vector<std::byte> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0, std::ios::beg);
  std::vector<std::byte> bytes(size);
  if (size > 0 && !in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size))) {
    throw LoadError("cannot read " + path.string());
  }
  return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::byte> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw LoadError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw LoadError("cannot write " + path.string());
}

std::vector<std::byte> encode_pmat(const ProbMatrix& matrix) {
  ByteWriter w;
  w.reserve(kPmatHeaderSize + matrix.values().size() * 8);
  w.raw(kPmatMagic);
  w.uint<std::uint16_t>(kPmatVersion);
  w.uint<std::uint64_t>(matrix.rows());
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(matrix.class_count()));
  w.f64s(matrix.values());
  return w.take();
}

ProbMatrix decode_pmat(std::span<const std::byte> bytes) {
  ByteReader r(bytes, "PMAT");
  if (bytes.size() < kPmatHeaderSize) r.fail("file shorter than the 18-byte header");
  if (r.raw(4) != kPmatMagic) r.fail("bad magic bytes");
  const auto version = r.uint<std::uint16_t>();
  if (version != kPmatVersion) r.fail("unsupported version " + std::to_string(version));
  const auto rows = r.uint<std::uint64_t>();
  const auto k = r.uint<std::uint32_t>();
  if (rows == 0) r.fail("header declares zero rows");
  if (k < 2) r.fail("header declares fewer than two classes");
  if (rows > r.remaining() / 8 / k || rows * k * 8 != r.remaining()) {
    r.fail("payload is " + std::to_string(r.remaining()) + " bytes, header implies " +
           std::to_string(rows * k * 8));
  }
  auto values = r.f64s(static_cast<std::size_t>(rows * k));
  return ProbMatrix(static_cast<std::size_t>(rows), k, std::move(values), false);
}

std::string format_double(double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf, static_cast<std::size_t>(n));
}

std::string encode_csv(const ProbMatrix& matrix, bool header) {
  std::string out;
  out.reserve(matrix.values().size() * 24);
  const std::size_t k = matrix.class_count();
  if (header) {
    for (std::size_t c = 0; c < k; ++c) {
      if (c) out += ',';
      out += "class_" + std::to_string(c);
    }
    out += '\n';
  }
  for (std::size_t i = 0; i < matrix.rows(); ++i) {
    auto row = matrix.row(i);
    for (std::size_t c = 0; c < k; ++c) {
      if (c) out += ',';
      out += format_double(row[c]);
    }
    out += '\n';
  }
  return out;
}

ProbMatrix decode_csv(std::string_view text) {
  auto lines = lines_of(text);
  std::size_t first = 0;
  std::size_t k = 0;
  if (!lines.empty() && lines.front().second.starts_with("class_")) {
    k = split_fields(lines.front().second).size();
    first = 1;
  }
  if (first >= lines.size()) throw LoadError("CSV contains no data rows");
  if (k == 0) k = split_fields(lines[first].second).size();

  std::vector<double> values;
  values.reserve((lines.size() - first) * k);
  for (std::size_t i = first; i < lines.size(); ++i) {
    const auto [line_no, line] = lines[i];
    const auto fields = split_fields(line);
    if (fields.size() != k) {
      throw LoadError("line " + std::to_string(line_no) + ": expected " + std::to_string(k) +
                      " fields, found " + std::to_string(fields.size()));
    }
    for (auto f : fields) values.push_back(parse_number(f, line_no));
  }
  if (k < 2) throw LoadError("CSV needs at least two class columns");
  return ProbMatrix(lines.size() - first, k, std::move(values), false);
}

LoadedMatrix validate_rows(const ProbMatrix& raw, double row_sum_tolerance) {
  const std::size_t k = raw.class_count();
  std::vector<double> values(raw.values().begin(), raw.values().end());
  std::size_t renormalized = 0;
  for (std::size_t i = 0; i < raw.rows(); ++i) {
    double* row = values.data() + i * k;
    double sum = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      if (!std::isfinite(row[c]) || row[c] < 0.0) {
        throw LoadError("row " + std::to_string(i) + ": entry " + std::to_string(c) +
                        " is negative or non-finite");
      }
      sum += row[c];
    }
    if (std::abs(sum - 1.0) > row_sum_tolerance) {
      throw LoadError("row " + std::to_string(i) + ": sums to " + format_double(sum) +
                      ", outside tolerance " + format_double(row_sum_tolerance));
    }
    if (std::abs(sum - 1.0) > kSimplexTolerance) {
      for (std::size_t c = 0; c < k; ++c) row[c] /= sum;
      ++renormalized;
    }
  }
  ProbMatrix m(raw.rows(), k, std::move(values));
  m.set_labels(raw.labels());
  return {std::move(m), renormalized};
}

LoadedMatrix load_matrix(const std::filesystem::path& path, const LoadOptions& options) {
  const auto bytes = read_file(path);
  MatrixFormat format = options.format;
  if (format == MatrixFormat::automatic) {
    if (bytes.size() >= 4 && as_text(bytes).substr(0, 4) == kPmatMagic) {
      format = MatrixFormat::pmat;
    } else if (has_extension(path, ".pmat")) {
      format = MatrixFormat::pmat;
    } else {
      format = MatrixFormat::csv;
    }
  }
  ProbMatrix raw = [&] {
    try {
      return format == MatrixFormat::pmat ? decode_pmat(bytes) : decode_csv(as_text(bytes));
    } catch (const LoadError& e) {
      throw LoadError(path.string() + ": " + e.what());
    }
  }();
  if (!options.validate) return {std::move(raw), 0};
  try {
    return validate_rows(raw, options.row_sum_tolerance);
  } catch (const LoadError& e) {
    throw LoadError(path.string() + ": " + e.what());
  }
}

void save_matrix(const std::filesystem::path& path, const ProbMatrix& matrix, MatrixFormat format) {
  if (format == MatrixFormat::automatic) {
    format = has_extension(path, ".csv") ? MatrixFormat::csv : MatrixFormat::pmat;
  }
  if (format == MatrixFormat::pmat) {
    write_file(path, encode_pmat(matrix));
  } else {
    const auto text = encode_csv(matrix);
    write_file(path, std::as_bytes(std::span(text.data(), text.size())));
  }
}

std::vector<std::byte> encode_model(const nn::Classifier& model) {
  ByteWriter w;
  w.raw(kModelMagic);
  w.uint<std::uint16_t>(kModelVersion);
  if (const auto* lin = std::get_if<nn::SoftmaxLinear>(&model)) {
    w.uint<std::uint8_t>(static_cast<std::uint8_t>(ArchitectureTag::softmax_linear));
    w.uint<std::uint8_t>(0);
    w.uint<std::uint32_t>(static_cast<std::uint32_t>(lin->input_dim()));
    w.uint<std::uint32_t>(0);
    w.uint<std::uint32_t>(static_cast<std::uint32_t>(lin->class_count()));
    w.f64s(lin->weights());
    w.f64s(lin->biases());
  } else {
    const auto& mlp = std::get<nn::MLPClassifier>(model);
    w.uint<std::uint8_t>(static_cast<std::uint8_t>(ArchitectureTag::mlp));
    w.uint<std::uint8_t>(static_cast<std::uint8_t>(mlp.activation()));
    w.uint<std::uint32_t>(static_cast<std::uint32_t>(mlp.input_dim()));
    w.uint<std::uint32_t>(static_cast<std::uint32_t>(mlp.hidden()));
    w.uint<std::uint32_t>(static_cast<std::uint32_t>(mlp.class_count()));
    w.f64s(mlp.hidden_weights());
    w.f64s(mlp.hidden_biases());
    w.f64s(mlp.output_weights());
    w.f64s(mlp.output_biases());
  }
  return w.take();
}

nn::Classifier decode_model(std::span<const std::byte> bytes) {
  ByteReader r(bytes, "SLMD");
  if (r.raw(4) != kModelMagic) r.fail("bad magic bytes");
  const auto version = r.uint<std::uint16_t>();
  if (version != kModelVersion) r.fail("unsupported version " + std::to_string(version));
  const auto arch = r.uint<std::uint8_t>();
  const auto activation = r.uint<std::uint8_t>();
  const std::size_t d = r.uint<std::uint32_t>();
  const std::size_t h = r.uint<std::uint32_t>();
  const std::size_t k = r.uint<std::uint32_t>();

  auto finish = [&](auto&& model) -> nn::Classifier {
    if (r.remaining() != 0) r.fail(std::to_string(r.remaining()) + " trailing bytes");
    return std::forward<decltype(model)>(model);
  };
  try {
    if (arch == static_cast<std::uint8_t>(ArchitectureTag::softmax_linear)) {
      auto w = r.f64s(k * d);
      auto b = r.f64s(k);
      return finish(nn::SoftmaxLinear(d, k, std::move(w), std::move(b)));
    }
    if (arch == static_cast<std::uint8_t>(ArchitectureTag::mlp)) {
      auto w1 = r.f64s(h * d);
      auto b1 = r.f64s(h);
      auto w2 = r.f64s(k * h);
      auto b2 = r.f64s(k);
      return finish(nn::MLPClassifier(d, h, k, static_cast<nn::Activation>(activation), std::move(w1),
                                      std::move(b1), std::move(w2), std::move(b2)));
    }
  } catch (const InvalidInput& e) {
    r.fail(e.what());
  }
  r.fail("unknown architecture tag " + std::to_string(arch));
}

nn::Classifier load_model(const std::filesystem::path& path) {
  try {
    return decode_model(read_file(path));
  } catch (const LoadError& e) {
    throw LoadError(path.string() + ": " + e.what());
  }
}

void save_model(const std::filesystem::path& path, const nn::Classifier& model) {
  write_file(path, encode_model(model));
}

std::string encode_dataset_csv(const nn::SyntheticDataset& data) {
  std::string out = "label";
  for (std::size_t c = 0; c < data.input_dim; ++c) out += ",x_" + std::to_string(c);
  out += '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    out += std::to_string(data.labels[i]);
    for (double v : data.point(i)) out += "," + format_double(v);
    out += '\n';
  }
  return out;
}

nn::SyntheticDataset decode_dataset_csv(std::string_view text, std::size_t class_count) {
  auto lines = lines_of(text);
  if (lines.empty() || !lines.front().second.starts_with("label")) {
    throw LoadError("dataset CSV must start with a 'label,x_0,...' header");
  }
  const std::size_t cols = split_fields(lines.front().second).size();
  if (cols < 2) throw LoadError("dataset CSV needs at least one feature column");

  nn::SyntheticDataset data;
  data.input_dim = cols - 1;
  std::size_t max_label = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto [line_no, line] = lines[i];
    const auto fields = split_fields(line);
    if (fields.size() != cols) {
      throw LoadError("line " + std::to_string(line_no) + ": expected " + std::to_string(cols) + " fields");
    }
    const double label = parse_number(fields[0], line_no);
    if (label < 0 || label != std::floor(label)) {
      throw LoadError("line " + std::to_string(line_no) + ": label must be a non-negative integer");
    }
    data.labels.push_back(static_cast<std::size_t>(label));
    max_label = std::max(max_label, data.labels.back());
    for (std::size_t c = 1; c < cols; ++c) data.points.push_back(parse_number(fields[c], line_no));
  }
  data.class_count = class_count ? class_count : max_label + 1;
  try {
    data.validate();
  } catch (const InvalidInput& e) {
    throw LoadError(std::string("dataset CSV: ") + e.what());
  }
  return data;
}

std::string encode_points_csv(std::span<const double> points, std::size_t dim) {
  std::string out;
  for (std::size_t c = 0; c < dim; ++c) out += (c ? ",x_" : "x_") + std::to_string(c);
  out += '\n';
  for (std::size_t i = 0; i < points.size(); i += dim) {
    for (std::size_t c = 0; c < dim; ++c) {
      if (c) out += ',';
      out += format_double(points[i + c]);
    }
    out += '\n';
  }
  return out;
}

std::vector<double> decode_points_csv(std::string_view text, std::size_t& dim) {
  auto lines = lines_of(text);
  std::size_t first = 0;
  if (!lines.empty() && (lines.front().second.starts_with("x_") || lines.front().second.starts_with("label"))) {
    first = 1;
  }
  if (first >= lines.size()) throw LoadError("point CSV contains no rows");
  // A leading label column (dataset CSV) is skipped.
  const bool labeled = lines.front().second.starts_with("label");
  const std::size_t cols = split_fields(lines[first].second).size();
  dim = labeled ? cols - 1 : cols;
  if (dim == 0) throw LoadError("point CSV has no coordinates");
  std::vector<double> points;
  for (std::size_t i = first; i < lines.size(); ++i) {
    const auto [line_no, line] = lines[i];
    const auto fields = split_fields(line);
    if (fields.size() != cols) {
      throw LoadError("line " + std::to_string(line_no) + ": expected " + std::to_string(cols) + " fields");
    }
    for (std::size_t c = labeled ? 1 : 0; c < cols; ++c) points.push_back(parse_number(fields[c], line_no));
  }
  return points;
}

}  // namespace scorelab::io
