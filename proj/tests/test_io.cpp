#include <doctest.h>

#include <bit>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <string>

#include "scorelab/errors.hpp"
#include "scorelab/experiments.hpp"
#include "scorelab/io.hpp"

using namespace scorelab;
using namespace scorelab::io;
namespace fs = std::filesystem;

namespace {

fs::path tmp(const std::string& name) {
  const fs::path dir = fs::path(SCORELAB_TEST_TMP) / "io";
  fs::create_directories(dir);
  return dir / name;
}

template <typename T>
T read_le(const std::vector<std::byte>& bytes, std::size_t offset) {
  std::uint64_t v = 0;
  for (std::size_t b = 0; b < sizeof(T); ++b) v |= std::uint64_t(bytes[offset + b]) << (8 * b);
  return static_cast<T>(v);
}

std::vector<std::byte> as_bytes(std::string_view s) {
  std::vector<std::byte> out(s.size());
  std::memcpy(out.data(), s.data(), s.size());
  return out;
}

bool same_bits(const ProbMatrix& a, const ProbMatrix& b) {
  return a.rows() == b.rows() && a.class_count() == b.class_count() &&
         std::memcmp(a.values().data(), b.values().data(), a.values().size() * sizeof(double)) == 0;
}

}  // namespace

TEST_SUITE("fnv1a64") {
  TEST_CASE("published vectors") {
    CHECK(fnv1a64(std::string_view{}) == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64(std::string_view{"a"}) == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64(std::string_view{"foobar"}) == 0x85944171f73967e8ULL);
    CHECK(digest_hex(0xcbf29ce484222325ULL) == "cbf29ce484222325");
    CHECK(digest_hex(1) == "0000000000000001");
  }
}

TEST_SUITE("pmat") {
  TEST_CASE("round trip is bitwise") {
    const auto m = experiments::make_random_matrix(37, 11, 2);
    CHECK(same_bits(decode_pmat(encode_pmat(m)), m));
    const auto path = tmp("round.pmat");
    save_matrix(path, m);
    CHECK(same_bits(load_matrix(path).matrix, m));
  }

  TEST_CASE("header layout") {
    const auto m = ProbMatrix::from_rows({{0.25, 0.75}, {1.0, 0.0}, {0.5, 0.5}});
    const auto bytes = encode_pmat(m);
    REQUIRE(bytes.size() == kPmatHeaderSize + 6 * sizeof(double));
    CHECK(std::memcmp(bytes.data(), "PMAT", 4) == 0);
    CHECK(read_le<std::uint16_t>(bytes, 4) == 1);
    CHECK(read_le<std::uint64_t>(bytes, 6) == 3);
    CHECK(read_le<std::uint32_t>(bytes, 14) == 2);
    CHECK(std::bit_cast<double>(read_le<std::uint64_t>(bytes, 18)) == 0.25);
    CHECK(std::bit_cast<double>(read_le<std::uint64_t>(bytes, 18 + 8)) == 0.75);
  }

  TEST_CASE("malformed images are rejected") {
    const auto good = encode_pmat(ProbMatrix::from_rows({{0.5, 0.5}}));
    auto bad = good;
    bad[0] = std::byte{'X'};
    CHECK_THROWS_AS(decode_pmat(bad), LoadError);
    bad = good;
    bad[4] = std::byte{9};
    CHECK_THROWS_AS(decode_pmat(bad), LoadError);
    bad = good;
    bad.pop_back();
    CHECK_THROWS_AS(decode_pmat(bad), LoadError);
    bad = good;
    bad.push_back(std::byte{0});
    CHECK_THROWS_AS(decode_pmat(bad), LoadError);
    CHECK_THROWS_AS(decode_pmat(std::span(good).first(10)), LoadError);
  }

  TEST_CASE("row-sum policy") {
    const auto raw = ProbMatrix(2, 2, {0.5, 0.5, 0.5, 0.4}, false);
    try {
      validate_rows(raw, 1e-6);
      FAIL("expected rejection");
    } catch (const LoadError& e) {
      CHECK(std::string(e.what()).find("row 1") != std::string::npos);
    }
    const auto near = ProbMatrix(2, 2, {0.5, 0.5, 0.5, 0.5 + 5e-7}, false);
    const auto fixed = validate_rows(near, 1e-6);
    CHECK(fixed.renormalized_rows == 1);
    CHECK(fixed.matrix.row(1)[0] + fixed.matrix.row(1)[1] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(validate_rows(near, 1e-9), LoadError);
    CHECK(validate_rows(ProbMatrix(1, 2, {0.5, 0.5 + 1e-12}, false), 1e-6).renormalized_rows == 0);
  }

  TEST_CASE("validation can be skipped on load") {
    const auto path = tmp("short.pmat");
    write_file(path, encode_pmat(ProbMatrix(1, 2, {0.45, 0.45}, false)));
    CHECK_THROWS_AS(load_matrix(path), LoadError);
    LoadOptions opts;
    opts.validate = false;
    const auto loaded = load_matrix(path, opts);
    CHECK(loaded.matrix.row(0)[0] == 0.45);
  }

  TEST_CASE("negative entries are rejected") {
    CHECK_THROWS_AS((validate_rows(ProbMatrix(1, 2, {1.5, -0.5}, false), 1e-6)), LoadError);
  }
}

TEST_SUITE("csv") {
  TEST_CASE("agrees with PMAT to 1e-15") {
    const auto m = experiments::make_random_matrix(64, 13, 6);
    const auto back = decode_csv(encode_csv(m));
    REQUIRE(back.rows() == m.rows());
    for (std::size_t i = 0; i < m.values().size(); ++i) CHECK(std::abs(back.values()[i] - m.values()[i]) <= 1e-15);
    CHECK(same_bits(back, m));
    CHECK(same_bits(decode_csv(encode_csv(m, false)), m));
  }

  TEST_CASE("errors cite the line") {
    try {
      decode_csv("class_0,class_1\n0.5,0.5\n0.5,abc\n");
      FAIL("expected failure");
    } catch (const LoadError& e) {
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    try {
      decode_csv("0.5,0.5\n1.0\n");
      FAIL("expected failure");
    } catch (const LoadError& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    CHECK_THROWS_AS(decode_csv(""), LoadError);
  }

  TEST_CASE("format_double round-trips") {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, 0.0, 5e-324, 0.9999999999999999}) {
      CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
    }
  }
}

TEST_SUITE("load_matrix") {
  TEST_CASE("format detection") {
    const auto m = ProbMatrix::from_rows({{0.2, 0.8}, {0.6, 0.4}});
    const auto pmat_as_txt = tmp("matrix.txt");
    write_file(pmat_as_txt, encode_pmat(m));
    CHECK(same_bits(load_matrix(pmat_as_txt).matrix, m));

    const auto csv = tmp("matrix.csv");
    save_matrix(csv, m);
    const auto text = read_file(csv);
    CHECK(std::string(reinterpret_cast<const char*>(text.data()), 8) == "class_0,");
    CHECK(same_bits(load_matrix(csv).matrix, m));

    LoadOptions as_pmat;
    as_pmat.format = MatrixFormat::pmat;
    CHECK_THROWS_AS(load_matrix(csv, as_pmat), LoadError);
    CHECK(parse_matrix_format("csv") == MatrixFormat::csv);
    CHECK_THROWS_AS(parse_matrix_format("npy"), InvalidInput);
  }

  TEST_CASE("missing file") {
    CHECK_THROWS_AS(load_matrix(tmp("does-not-exist.pmat")), LoadError);
  }
}

TEST_SUITE("models") {
  TEST_CASE("linear round trip") {
    const nn::Classifier model = nn::SoftmaxLinear::random(5, 3, 7, 1.0);
    const auto bytes = encode_model(model);
    CHECK(std::memcmp(bytes.data(), "SLMD", 4) == 0);
    CHECK(read_le<std::uint16_t>(bytes, 4) == 1);
    CHECK(static_cast<int>(bytes[6]) == 1);
    CHECK(static_cast<int>(bytes[7]) == 0);
    CHECK(read_le<std::uint32_t>(bytes, 8) == 5);
    CHECK(read_le<std::uint32_t>(bytes, 12) == 0);
    CHECK(read_le<std::uint32_t>(bytes, 16) == 3);
    CHECK(bytes.size() == 20 + (15 + 3) * 8);
    CHECK(std::get<nn::SoftmaxLinear>(decode_model(bytes)) == std::get<nn::SoftmaxLinear>(model));
  }

  TEST_CASE("mlp round trip through a file") {
    for (auto act : {nn::Activation::tanh, nn::Activation::rectifier}) {
      const nn::Classifier model = nn::MLPClassifier::random(4, 6, 3, act, 2);
      const auto path = tmp("model.slmd");
      save_model(path, model);
      const auto loaded = load_model(path);
      CHECK(std::get<nn::MLPClassifier>(loaded) == std::get<nn::MLPClassifier>(model));
      const auto bytes = read_file(path);
      CHECK(static_cast<int>(bytes[6]) == 2);
      CHECK(static_cast<int>(bytes[7]) == static_cast<int>(act));
    }
  }

  TEST_CASE("corrupt models are rejected") {
    auto bytes = encode_model(nn::SoftmaxLinear::random(2, 2, 1));
    auto bad = bytes;
    bad[6] = std::byte{7};
    CHECK_THROWS_AS(decode_model(bad), LoadError);
    bad = bytes;
    bad.resize(bad.size() - 3);
    CHECK_THROWS_AS(decode_model(bad), LoadError);
    CHECK_THROWS_AS(decode_model(as_bytes("PMAT")), LoadError);
  }
}

TEST_SUITE("datasets") {
  TEST_CASE("labeled CSV round trip") {
    const auto data = nn::make_blobs({3, 4, 5, 3.0, 1.0, 8});
    const auto back = decode_dataset_csv(encode_dataset_csv(data));
    CHECK(back.points == data.points);
    CHECK(back.labels == data.labels);
    CHECK(back.class_count == 3);
  }

  TEST_CASE("point CSV accepts a label column") {
    const auto data = nn::make_blobs({2, 3, 2, 3.0, 1.0, 8});
    std::size_t dim = 0;
    CHECK(decode_points_csv(encode_dataset_csv(data), dim) == data.points);
    CHECK(dim == 3);
    CHECK(decode_points_csv(encode_points_csv(data.points, 3), dim) == data.points);
  }

  TEST_CASE("bad labels cite the line") {
    try {
      decode_dataset_csv("label,x_0\n0,1.0\n-1,2.0\n");
      FAIL("expected failure");
    } catch (const LoadError& e) {
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
  }
}
