#include <doctest.h>

#include <cmath>
#include <numbers>

#include "scorelab/errors.hpp"
#include "scorelab/experiments.hpp"

using namespace scorelab;
using namespace scorelab::experiments;
using doctest::Approx;

TEST_SUITE("split_study") {
  TEST_CASE("one split has zero spread") {
    const auto m = make_random_matrix(400, 20, 3);
    const auto r = split_study(m, {1, 2, 4, 8});
    CHECK(r.at(1).std == 0.0);
    CHECK(r.at(1).mean == Approx(inception_score(m, {1}).mean).epsilon(1e-15));
    CHECK(r.rows.size() == 4);
    CHECK(r.n_rows == 400);
    CHECK(r.class_count == 20);
  }

  TEST_CASE("rows agree with inception_score") {
    const auto m = make_random_matrix(300, 7, 11);
    const auto r = split_study(m, {1, 3, 10});
    for (const auto& row : r.rows) {
      const auto direct = inception_score(m, {row.n_splits});
      CHECK(row.mean == direct.mean);
      CHECK(row.std == direct.std);
    }
  }

  TEST_CASE("deterministic with and without shuffling") {
    const auto m = make_random_matrix(200, 5, 1);
    const auto a = split_study(m, {1, 5, 20}, RemainderPolicy::reject, 9);
    const auto b = split_study(m, {1, 5, 20}, RemainderPolicy::reject, 9);
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
      CHECK(a.rows[i].mean == b.rows[i].mean);
      CHECK(a.rows[i].std == b.rows[i].std);
    }
  }

  TEST_CASE("more splits lower the mean on a heterogeneous matrix") {
    const auto m = make_heterogeneous_matrix({5000, 100, 0.7, 9.0, 1.0, 2});
    const auto r = split_study(m, {1, 10, 100});
    CHECK(r.at(1).mean > r.at(10).mean);
    CHECK(r.at(10).mean > r.at(100).mean);
  }

  TEST_CASE("pooled standard error") {
    SplitStudyResult r;
    r.rows = {{1, 10.0, 0.0}, {4, 9.0, 2.0}, {16, 8.0, 4.0}};
    CHECK(r.pooled_standard_error(1, 4) == Approx(1.0));
    CHECK(r.pooled_standard_error(4, 16) == Approx(std::sqrt(4.0 / 4.0 + 16.0 / 16.0)));
    CHECK(r.pooled_standard_error(16, 4) == r.pooled_standard_error(4, 16));
    CHECK_THROWS_AS(r.at(3), InvalidInput);
  }

  TEST_CASE("invalid grids") {
    const auto m = make_uniform_matrix(10, 3);
    CHECK_THROWS_AS(split_study(m, {}), InvalidInput);
    CHECK_THROWS_AS(split_study(m, {0}), InvalidInput);
    CHECK_THROWS_AS(split_study(m, {11}), InvalidInput);
    CHECK_THROWS_AS(split_study(m, {3}), InvalidInput);
    CHECK_NOTHROW(split_study(m, {3}, RemainderPolicy::last_split_absorbs));
  }
}

TEST_SUITE("entropy_study") {
  TEST_CASE("uniform rows over 1024 classes carry 10 bits") {
    const auto r = entropy_study(make_uniform_matrix(8, 1024));
    CHECK(r.mean_conditional_entropy_bits == Approx(10.0).epsilon(1e-12));
    CHECK(r.marginal_entropy_bits == Approx(10.0).epsilon(1e-12));
    CHECK(r.mutual_information_bits == Approx(0.0).epsilon(1e-12));
    CHECK(r.max_entropy_bits == 10.0);
    CHECK(r.histogram.back() == 8);
  }

  TEST_CASE("one-hot rows carry no conditional entropy") {
    const auto r = entropy_study(make_cycling_one_hot(1024, 1024), 4);
    CHECK(r.mean_conditional_entropy_bits == 0.0);
    CHECK(r.marginal_entropy_bits == Approx(10.0).epsilon(1e-12));
    CHECK(r.mutual_information_bits == Approx(10.0).epsilon(1e-12));
    CHECK(r.histogram == std::vector<std::size_t>{1024, 0, 0, 0});
  }

  TEST_CASE("bits are nats over ln 2") {
    const auto m = make_random_matrix(500, 30, 8);
    const auto nats = entropy_decomposition(m);
    const auto bits = entropy_study(m);
    CHECK(bits.mean_conditional_entropy_bits == Approx(nats.mean_conditional_entropy / std::numbers::ln2));
    CHECK(bits.marginal_entropy_bits == Approx(nats.marginal_entropy / std::numbers::ln2));
    CHECK(bits.mutual_information_bits == Approx(improved_score(m) / std::numbers::ln2).epsilon(1e-9));
    std::size_t total = 0;
    for (auto c : bits.histogram) total += c;
    CHECK(total == 500);
  }

  TEST_CASE("bucket count must be positive") {
    CHECK_THROWS_AS(entropy_study(make_uniform_matrix(2, 2), 0), InvalidInput);
  }
}

TEST_SUITE("top_classes") {
  TEST_CASE("ties break by ascending index") {
    const auto top = top_classes(make_uniform_matrix(3, 5), 3);
    REQUIRE(top.size() == 3);
    CHECK(top[0].first == 0);
    CHECK(top[1].first == 1);
    CHECK(top[2].first == 2);
  }

  TEST_CASE("dominant class comes first") {
    const auto m = ProbMatrix::from_rows({{0.1, 0.8, 0.1}, {0.2, 0.7, 0.1}, {0.6, 0.2, 0.2}});
    const auto top = top_classes(m, 2);
    CHECK(top[0].first == 1);
    CHECK(top[0].second == Approx(1.7 / 3.0));
    CHECK(top[1].first == 0);
  }

  TEST_CASE("non-increasing with total at most one") {
    const auto m = make_random_matrix(300, 50, 4);
    for (std::size_t k : {1, 5, 50}) {
      const auto top = top_classes(m, k);
      CHECK(top.size() == k);
      double total = 0.0;
      for (std::size_t i = 0; i < top.size(); ++i) {
        total += top[i].second;
        if (i > 0) CHECK(top[i - 1].second >= top[i].second);
      }
      CHECK(total <= 1.0 + 1e-12);
    }
    CHECK_THROWS_AS(top_classes(m, 51), InvalidInput);
    CHECK_THROWS_AS(top_classes(m, 0), InvalidInput);
  }
}

TEST_SUITE("synthetic matrices") {
  TEST_CASE("generators produce valid rows deterministically") {
    const auto a = make_random_matrix(50, 9, 5);
    const auto b = make_random_matrix(50, 9, 5);
    CHECK(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
    const auto h = make_heterogeneous_matrix({100, 20, 0.5, 9.0, 1.0, 5});
    for (std::size_t i = 0; i < h.rows(); ++i) {
      double s = 0.0;
      for (double v : h.row(i)) s += v;
      CHECK(s == Approx(1.0).epsilon(1e-12));
    }
  }

  TEST_CASE("cycling one-hot saturates the score") {
    CHECK(inception_score(make_cycling_one_hot(100, 10), {10}).mean == Approx(10.0).epsilon(1e-9));
  }
}
