#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cmath>
#include <sstream>

#include "scorelab/cli.hpp"
#include "scorelab/classifier.hpp"
#include "scorelab/errors.hpp"
#include "scorelab/experiments.hpp"
#include "scorelab/gaussian_testbed.hpp"
#include "scorelab/io.hpp"
#include "scorelab/metric_core.hpp"
#include "scorelab/score_attack.hpp"

namespace py = pybind11;
using namespace scorelab;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

ProbMatrix to_matrix(const Array& a) {
  if (a.ndim() != 2) throw InvalidInput("expected a 2-D probability matrix");
  const auto rows = static_cast<std::size_t>(a.shape(0));
  const auto cols = static_cast<std::size_t>(a.shape(1));
  return ProbMatrix(rows, cols, std::vector<double>(a.data(), a.data() + rows * cols));
}

Array to_array(const ProbMatrix& m) {
  Array out({m.rows(), m.class_count()});
  std::copy(m.values().begin(), m.values().end(), out.mutable_data());
  return out;
}

Array to_array(std::span<const double> v) {
  Array out(std::vector<py::ssize_t>{static_cast<py::ssize_t>(v.size())});
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

std::vector<double> to_vector(const Array& a) { return {a.data(), a.data() + a.size()}; }

// Holder so the variant is exposed as an opaque class rather than through
// the stl variant caster.
struct Model {
  nn::Classifier inner;
};

RemainderPolicy parse_remainder(const std::string& s) {
  if (s == "reject") return RemainderPolicy::reject;
  if (s == "absorb") return RemainderPolicy::last_split_absorbs;
  throw InvalidInput("remainder must be 'reject' or 'absorb'");
}

testbed::ScaleReading parse_reading(const std::string& s) {
  if (s == "variance") return testbed::ScaleReading::variance;
  if (s == "stddev") return testbed::ScaleReading::stddev;
  throw InvalidInput("reading must be 'variance' or 'stddev'");
}

py::dict score_dict(const ScoreReport& r) {
  py::dict d;
  d["per_split_scores"] = r.per_split_scores;
  d["mean"] = r.mean;
  d["std"] = r.std;
  d["n_splits"] = r.n_splits;
  d["rows"] = r.rows;
  d["class_count"] = r.class_count;
  d["within_bounds"] = bounds_check(r);
  return d;
}

}  // namespace

PYBIND11_MODULE(_scorelab, m) {
  m.doc() = "Inception Score diagnostics backed by the scorelab C++ core";

  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<LoadError>(m, "LoadError", PyExc_OSError);
  py::register_exception<TrainingFailure>(m, "TrainingFailure", PyExc_RuntimeError);
  py::register_exception<AttackFailure>(m, "AttackFailure", PyExc_RuntimeError);

  m.def("kl_divergence",
        [](const Array& p, const Array& q) { return kl_divergence(to_vector(p), to_vector(q)); },
        py::arg("p"), py::arg("q"));
  m.def("entropy", [](const Array& p) { return entropy(ClassDistribution(to_vector(p))); }, py::arg("p"));
  m.def("marginal", [](const Array& probs) { return to_array(marginal_of(to_matrix(probs)).probs()); },
        py::arg("probs"));

  m.def(
      "inception_score",
      [](const Array& probs, std::size_t n_splits, const std::string& remainder, std::optional<std::uint64_t> seed) {
        return score_dict(inception_score(to_matrix(probs), SplitSpec{n_splits, parse_remainder(remainder)}, seed));
      },
      py::arg("probs"), py::arg("n_splits") = 10, py::arg("remainder") = "reject", py::arg("seed") = py::none());

  m.def("improved_score", [](const Array& probs) { return improved_score(to_matrix(probs)); }, py::arg("probs"));

  m.def(
      "entropy_decomposition",
      [](const Array& probs) {
        const auto r = entropy_decomposition(to_matrix(probs));
        py::dict d;
        d["marginal_entropy"] = r.marginal_entropy;
        d["mean_conditional_entropy"] = r.mean_conditional_entropy;
        d["mutual_information"] = r.mutual_information;
        d["mutual_information_bits"] = r.mutual_information_bits();
        return d;
      },
      py::arg("probs"));

  m.def(
      "split_study",
      [](const Array& probs, std::vector<std::size_t> grid, const std::string& remainder) {
        const auto r = experiments::split_study(to_matrix(probs), grid, parse_remainder(remainder));
        std::vector<std::tuple<std::size_t, double, double>> rows;
        for (const auto& row : r.rows) rows.emplace_back(row.n_splits, row.mean, row.std);
        return rows;
      },
      py::arg("probs"), py::arg("grid") = experiments::kReferenceSplitGrid, py::arg("remainder") = "reject");

  m.def(
      "entropy_study",
      [](const Array& probs, std::size_t buckets) {
        const auto r = experiments::entropy_study(to_matrix(probs), buckets);
        py::dict d;
        d["mean_conditional_entropy_bits"] = r.mean_conditional_entropy_bits;
        d["marginal_entropy_bits"] = r.marginal_entropy_bits;
        d["mutual_information_bits"] = r.mutual_information_bits;
        d["max_entropy_bits"] = r.max_entropy_bits;
        d["histogram"] = r.histogram;
        return d;
      },
      py::arg("probs"), py::arg("buckets") = 10);

  m.def("top_classes", [](const Array& probs, std::size_t k) { return experiments::top_classes(to_matrix(probs), k); },
        py::arg("probs"), py::arg("k") = 10);

  m.def(
      "bayes_posterior",
      [](double x, const std::string& reading) {
        return to_array(testbed::bayes_posterior(x, testbed::MixtureSpec::reference(parse_reading(reading))).probs());
      },
      py::arg("x"), py::arg("reading") = "variance");

  m.def(
      "gaussian_demo",
      [](std::size_t samples, std::uint64_t seed, const std::string& reading) {
        const auto r = parse_reading(reading);
        py::list out;
        for (const auto& t : testbed::score_ordering_demo(testbed::MixtureSpec::reference(r), samples, seed, r)) {
          py::dict d;
          d["sampler"] = t.sampler;
          d["score_nats"] = t.score_nats;
          d["score_exp"] = t.score_exp;
          d["marginal_entropy"] = t.marginal_entropy;
          d["mean_conditional_entropy"] = t.mean_conditional_entropy;
          out.append(d);
        }
        return out;
      },
      py::arg("samples") = testbed::kDefaultSamples, py::arg("seed") = 0, py::arg("reading") = "variance");

  m.def("load_matrix",
        [](const std::filesystem::path& path, double tolerance) {
          io::LoadOptions opts;
          opts.row_sum_tolerance = tolerance;
          return to_array(io::load_matrix(path, opts).matrix);
        },
        py::arg("path"), py::arg("row_sum_tolerance") = 1e-6);
  m.def("save_matrix",
        [](const std::filesystem::path& path, const Array& probs) { io::save_matrix(path, to_matrix(probs)); },
        py::arg("path"), py::arg("probs"));

  py::class_<Model>(m, "Classifier")
      .def_static("load", [](const std::filesystem::path& p) { return Model{io::load_model(p)}; }, py::arg("path"))
      .def("save", [](const Model& c, const std::filesystem::path& p) { io::save_model(p, c.inner); })
      .def_property_readonly("input_dim", [](const Model& c) { return nn::input_dim(c.inner); })
      .def_property_readonly("class_count", [](const Model& c) { return nn::class_count(c.inner); })
      .def("predict_proba",
           [](const Model& c, const Array& x) { return to_array(nn::predict_proba(c.inner, to_vector(x)).probs()); })
      .def("grad_class_prob", [](const Model& c, const Array& x, std::size_t j) {
        return to_array(nn::grad_class_prob(c.inner, to_vector(x), j));
      });

  m.def(
      "train_blob_classifier",
      [](std::size_t classes, std::size_t dim, std::size_t hidden, std::size_t epochs, std::uint64_t seed) {
        const nn::BlobSpec spec{classes, dim, 200, 3.0, 1.0, seed};
        auto model = nn::Classifier(nn::MLPClassifier::random(dim, hidden, classes, nn::Activation::tanh, seed + 1));
        auto trained = nn::train(std::move(model), nn::make_blobs(spec, 0), nn::TrainConfig{0.1, epochs, 32, seed + 2});
        return std::make_pair(Model{trained.model}, nn::accuracy(trained.model, nn::make_blobs(spec, 1)));
      },
      py::arg("classes") = 10, py::arg("dim") = 16, py::arg("hidden") = 64, py::arg("epochs") = 30,
      py::arg("seed") = 0);

  m.def(
      "attack",
      [](const Model& wrapped, double epsilon, std::size_t iters, std::size_t samples, double delta,
         double box_lo, double box_hi, std::uint64_t seed) {
        const auto& model = wrapped.inner;
        attack::AttackConfig config;
        config.epsilon = epsilon;
        config.max_iters = iters;
        config.early_stop_delta = delta;
        config.init = attack::UniformBox{box_lo, box_hi, nn::input_dim(model)};
        config.seed = seed;
        const auto batch = attack::generate_attacked_batch(model, config, samples);
        Array points({samples, batch.dim});
        std::copy(batch.samples.begin(), batch.samples.end(), points.mutable_data());
        return std::make_pair(to_array(batch.probs), points);
      },
      py::arg("model"), py::arg("epsilon") = 0.001, py::arg("iters") = 100, py::arg("samples") = 1000,
      py::arg("delta") = 1e-3, py::arg("box_lo") = -1.0, py::arg("box_hi") = 1.0, py::arg("seed") = 0);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
