// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "scorelab/classifier.hpp"
#include "scorelab/cli.hpp"
#include "scorelab/experiments.hpp"
#include "scorelab/gaussian_testbed.hpp"
#include "scorelab/io.hpp"
#include "scorelab/metric_core.hpp"
#include "scorelab/random.hpp"
#include "scorelab/score_attack.hpp"

using namespace scorelab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool ok = true;
  std::string detail;
};

int failures = 0;

void criterion(const char* name, double limit_seconds, const std::function<Verdict()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs < limit_seconds;
  const bool pass = v.ok && in_time;
  if (!pass) ++failures;
  std::printf("%s  %-24s %8.2fs (limit %.0fs)  %s%s\n", pass ? "PASS" : "FAIL", name, secs, limit_seconds,
              v.detail.c_str(), in_time ? "" : " [too slow]");
  std::fflush(stdout);
}

std::string tmp(const std::string& name) {
  const fs::path dir = fs::path(SCORELAB_TEST_TMP) / "acceptance";
  fs::create_directories(dir);
  return (dir / name).string();
}

json run_json(std::vector<std::string> args) {
  args.push_back("--json");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (code != 0) throw std::runtime_error(args[0] + " exited " + std::to_string(code) + ": " + err.str());
  return json::parse(out.str());
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

ProbMatrix seeded_matrix(Rng& rng) {
  std::uniform_int_distribution<std::size_t> rows(1, 1000), classes(2, 100);
  const std::size_t n = rows(rng), k = classes(rng);
  return experiments::make_random_matrix(n, k, rng());
}

}  // namespace

int main() {
  criterion("bound_saturation", 1.0, [] {
    const auto onehot = tmp("onehot.pmat");
    const auto uniform = tmp("uniform.pmat");
    io::save_matrix(onehot, experiments::make_cycling_one_hot(1000, 10));
    io::save_matrix(uniform, experiments::make_uniform_matrix(1000, 10));
    const double is_hot = run_json({"score", "-i", onehot, "--splits", "1"})["result"]["score"]["mean"];
    const double mi_hot = run_json({"improved-score", "-i", onehot})["result"]["improved_score_nats"];
    const double is_uni = run_json({"score", "-i", uniform, "--splits", "1"})["result"]["score"]["mean"];
    const double mi_uni = run_json({"improved-score", "-i", uniform})["result"]["improved_score_nats"];
    const bool ok = std::abs(is_hot - 10.0) <= 1e-9 && std::abs(mi_hot - std::log(10.0)) <= 1e-9 &&
                    std::abs(is_uni - 1.0) <= 1e-9 && std::abs(mi_uni) <= 1e-9;
    return Verdict{ok, fmt("one-hot IS=%.12f MI=%.12f", is_hot, mi_hot) +
                           fmt(", uniform IS=%.12f MI=%.3g", is_uni, mi_uni)};
  });

  criterion("identity_suite", 30.0, [] {
    Rng rng(mix_seed(kDefaultSeed, 101));
    double worst_exp = 0.0, worst_mi = 0.0;
    for (int t = 0; t < 1000; ++t) {
      const auto m = seeded_matrix(rng);
      const double s = improved_score(m);
      worst_exp = std::max(worst_exp, std::abs(std::exp(s) - inception_score(m, {1}).mean));
      worst_mi = std::max(worst_mi, std::abs(entropy_decomposition(m).mutual_information - s));
    }
    return Verdict{worst_exp <= 1e-9 && worst_mi <= 1e-9,
                   fmt("max |exp(MI)-IS_1|=%.3g, max |MI-improved|=%.3g over 1000 matrices", worst_exp, worst_mi)};
  });

  criterion("batching_invariance", 30.0, [] {
    Rng rng(mix_seed(kDefaultSeed, 102));
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
      const auto m = seeded_matrix(rng);
      const double reference = improved_score(m);
      for (int p = 0; p < 100; ++p) {
        const auto order = random_permutation(m.rows(), rng());
        const auto shuffled = m.permuted(order);
        // Random partition into contiguous batches, merged in order.
        ImprovedScoreAccumulator total(m.class_count());
        std::size_t first = 0;
        while (first < shuffled.rows()) {
          const std::size_t count = 1 + rng() % (shuffled.rows() - first);
          ImprovedScoreAccumulator part(m.class_count());
          part.add(shuffled.slice(first, count));
          total.merge(part);
          first += count;
        }
        worst = std::max(worst, std::abs(total.value() - reference));
        worst = std::max(worst, std::abs(improved_score(shuffled) - reference));
      }
    }
    return Verdict{worst <= 1e-12, fmt("max deviation %.3g over 100x100 permutations/partitions", worst)};
  });

  criterion("split_study_structure", 60.0, [] {
    const auto matrix = experiments::make_heterogeneous_matrix({});
    const auto r = experiments::split_study(matrix, experiments::kReferenceSplitGrid);
    const double shift = r.at(1).mean - r.at(200).mean;
    const double se = r.pooled_standard_error(1, 200);
    const bool ok = r.at(1).std == 0.0 && std::abs(shift) > 3.0 * se;
    return Verdict{ok, fmt("mean@1=%.4f mean@200=%.4f", r.at(1).mean, r.at(200).mean) +
                           fmt(" shift=%.4f pooled SE=%.4f std@1=%g", shift, se, r.at(1).std)};
  });

  criterion("testbed_ordering", 30.0, [] {
    const auto spec = testbed::MixtureSpec::reference();
    bool ok = true;
    std::string detail;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto samplers = testbed::reference_samplers(spec, seed);
      const auto two_point = testbed::score_of_sampler(samplers[0], spec, testbed::kDefaultSamples);
      const auto uniform = testbed::score_of_sampler(samplers[1], spec, testbed::kDefaultSamples);
      const auto truth = testbed::score_of_sampler(samplers[3], spec, testbed::kDefaultSamples);
      ok = ok && two_point.score_exp >= 1.99 && truth.score_exp < uniform.score_exp &&
           truth.score_exp < two_point.score_exp;
      if (seed == 1) {
        detail = fmt("seed 1: two_point=%.4f uniform=%.4f true_mixture=%.4f", two_point.score_exp,
                     uniform.score_exp, truth.score_exp);
      }
    }
    return Verdict{ok, detail + " (5 seeds)"};
  });

  criterion("gradient_oracle", 10.0, [] {
    Rng rng(mix_seed(kDefaultSeed, 104));
    std::normal_distribution<double> g(0.0, 1.0);
    double worst[3] = {0.0, 0.0, 0.0};
    for (int arch = 0; arch < 3; ++arch) {
      for (int t = 0; t < 100; ++t) {
        const std::size_t d = 1 + rng() % 32, k = 2 + rng() % 10;
        const nn::Classifier model =
            arch == 0 ? nn::Classifier(nn::SoftmaxLinear::random(d, k, rng(), 1.0))
                      : nn::Classifier(nn::MLPClassifier::random(
                            d, 1 + rng() % 64, k, arch == 1 ? nn::Activation::tanh : nn::Activation::rectifier,
                            rng()));
        std::vector<double> x(d);
        for (double& v : x) v = g(rng);
        const std::size_t j = rng() % k;
        const auto numeric = oracle::central_difference(
            [&](const std::vector<double>& p) { return nn::predict_proba(model, p)[j]; }, x, 1e-5);
        worst[arch] = std::max(worst[arch], oracle::relative_error(nn::grad_class_prob(model, x, j), numeric));
      }
    }
    const bool ok = worst[0] <= 1e-4 && worst[1] <= 1e-4 && worst[2] <= 1e-4;
    return Verdict{ok, fmt("max rel err linear=%.2g mlp-tanh=%.2g mlp-relu=%.2g", worst[0], worst[1], worst[2])};
  });

  const auto model = tmp("blob_classifier.slmd");
  criterion("attack_efficacy", 300.0, [&] {
    run_json({"train-classifier", "-o", model, "--classes", "10"});
    const auto doc = run_json({"attack", "--classifier", model, "--epsilon", "0.01", "--iters", "500", "--delta",
                               "1e-3", "--samples", "1000", "--init", "uniform"});
    const double attacked = doc["result"]["attacked"]["exp_score"];
    const double initial = doc["result"]["initial"]["exp_score"];
    const std::size_t converged = doc["result"]["converged"];
    return Verdict{attacked >= 9.5 && initial < 3.0,
                   fmt("attacked=%.4f initial=%.4f converged=%.0f/1000", attacked, initial, double(converged))};
  });

  criterion("replay_equivalence", 10.0, [&] {
    const auto classifier = io::load_model(model);
    const nn::BlobSpec spec{10, 16, 100, 3.0, 1.0, mix_seed(kDefaultSeed, 105)};
    const auto data = nn::make_blobs(spec, 0);
    attack::AttackConfig config;
    config.max_iters = 0;
    config.init = attack::EmpiricalInit{data.input_dim, data.points};
    const auto attacked = attack::generate_attacked_batch(classifier, config, data.size());
    const auto replayed = attack::replay_generator(classifier, data.points, data.size());
    const bool same = attacked.samples == data.points &&
                      std::equal(attacked.probs.values().begin(), attacked.probs.values().end(),
                                 replayed.values().begin(), replayed.values().end());
    const double score = improved_score(replayed);
    return Verdict{same && score <= std::log(10.0),
                   fmt("sample-for-sample equal=%.0f, replay score %.4f nats <= ln 10 = %.4f", same ? 1.0 : 0.0,
                       score, std::log(10.0))};
  });

  criterion("determinism", 120.0, [&] {
    const auto matrix = tmp("det.pmat");
    io::save_matrix(matrix, experiments::make_random_matrix(1000, 50, 7));
    const std::vector<std::vector<std::string>> commands{
        {"score", "-i", matrix, "--splits", "10"},
        {"score", "-i", matrix, "--splits", "10", "--shuffle-seed", "3"},
        {"improved-score", "-i", matrix},
        {"entropy-study", "-i", matrix},
        {"split-study", "-i", matrix},
        {"top-classes", "-i", matrix},
        {"gaussian-demo", "--samples", "20000", "--seed", "4"},
        {"attack", "--classifier", model, "--samples", "100", "--epsilon", "0.01", "--iters", "200", "--seed", "6"},
        {"train-classifier", "-o", tmp("det.slmd"), "--epochs", "5", "--seed", "8"},
        {"gen-synthetic", "--kind", "heterogeneous", "--rows", "2000", "--classes", "100", "-o", tmp("het.pmat")},
        {"gen-synthetic", "--kind", "blobs", "-o", tmp("blobs.csv")},
    };
    std::size_t identical = 0;
    for (const auto& args : commands) {
      const auto a = run_json(args)["result"].dump();
      const auto b = run_json(args)["result"].dump();
      if (a == b) ++identical;
    }
    return Verdict{identical == commands.size(),
                   fmt("%.0f/%.0f invocations byte-identical across reruns", double(identical),
                       double(commands.size()))};
  });

  std::printf("%s: %d criterion(s) failed\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
  return failures == 0 ? 0 : 1;
}
