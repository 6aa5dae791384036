#include "scorelab/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "scorelab/classifier.hpp"
#include "scorelab/errors.hpp"
#include "scorelab/experiments.hpp"
#include "scorelab/gaussian_testbed.hpp"
#include "scorelab/io.hpp"
#include "scorelab/metric_core.hpp"
#include "scorelab/random.hpp"
#include "scorelab/report.hpp"
#include "scorelab/score_attack.hpp"

namespace scorelab::cli {

namespace {

using nlohmann::json;

std::uint64_t default_seed() {
  if (const char* env = std::getenv("SCORELAB_SEED")) {
    try {
      std::size_t pos = 0;
      const auto v = std::stoull(env, &pos);
      if (pos == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw InvalidInput("SCORELAB_SEED must be a non-negative integer");
  }
  return kDefaultSeed;
}

// Options shared by every subcommand that reads a probability matrix.
struct MatrixInput {
  std::string path;
  std::string format = "auto";
  bool no_validate = false;
  double row_sum_tolerance = 1e-6;

  void attach(CLI::App* app) {
    app->add_option("-i,--input", path, "Probability matrix (PMAT or CSV)")->required();
    app->add_option("--format", format, "Input format")
        ->check(CLI::IsMember({"auto", "pmat", "csv"}))
        ->capture_default_str();
    app->add_flag("--no-validate", no_validate, "Skip row validation on load");
    app->add_option("--row-sum-tol", row_sum_tolerance, "Row-sum tolerance on load")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  }

  ProbMatrix load(RunReport& report) const {
    io::LoadOptions opts;
    opts.format = io::parse_matrix_format(format);
    opts.validate = !no_validate;
    opts.row_sum_tolerance = row_sum_tolerance;
    auto loaded = io::load_matrix(path, opts);
    report.add_input(path);
    report.config["input_format"] = format;
    report.config["validate"] = !no_validate;
    report.config["row_sum_tolerance"] = row_sum_tolerance;
    report.result["renormalized_rows"] = loaded.renormalized_rows;
    report.result["rows"] = loaded.matrix.rows();
    report.result["class_count"] = loaded.matrix.class_count();
    return std::move(loaded.matrix);
  }
};

RemainderPolicy parse_remainder(const std::string& s) {
  return s == "absorb" ? RemainderPolicy::last_split_absorbs : RemainderPolicy::reject;
}

std::string fixed(double v, int digits = 6) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

std::vector<double> parse_point(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string field;
  while (std::getline(ss, field, ',')) {
    try {
      out.push_back(std::stod(field));
    } catch (const std::exception&) {
      throw InvalidInput("cannot parse coordinate '" + field + "'");
    }
  }
  return out;
}

json score_json(const ScoreReport& r) {
  return {{"per_split_scores", r.per_split_scores}, {"mean", r.mean}, {"std", r.std},
          {"n_splits", r.n_splits}, {"rows", r.rows}, {"class_count", r.class_count},
          {"log_base", r.log_base}, {"within_bounds", bounds_check(r)}};
}

json testbed_json(const testbed::TestbedReport& r) {
  return {{"sampler", r.sampler},
          {"score_nats", r.score_nats},
          {"score_exp", r.score_exp},
          {"marginal_entropy", r.marginal_entropy},
          {"mean_conditional_entropy", r.mean_conditional_entropy},
          {"n_samples", r.n_samples},
          {"seed", r.seed}};
}

// --- subcommands ---------------------------------------------------------

struct Common {
  std::string report_path;
  bool print_json = false;
};

struct ScoreCmd {
  MatrixInput input;
  std::size_t splits = 10;
  std::string remainder = "reject";
  std::optional<std::uint64_t> shuffle_seed;

  void attach(CLI::App* app) {
    input.attach(app);
    app->add_option("--splits", splits, "Number of contiguous splits")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_option("--remainder", remainder, "Policy when rows do not divide evenly")
        ->check(CLI::IsMember({"reject", "absorb"}))
        ->capture_default_str();
    app->add_option("--shuffle-seed", shuffle_seed, "Shuffle rows with this seed before splitting");
  }

  void run(RunReport& report, std::ostream& out) const {
    const auto matrix = input.load(report);
    report.config["splits"] = splits;
    report.config["remainder"] = remainder;
    report.config["shuffle"] = shuffle_seed.has_value();
    if (shuffle_seed) report.seeds["shuffle"] = *shuffle_seed;
    const auto r = inception_score(matrix, SplitSpec{splits, parse_remainder(remainder)}, shuffle_seed);
    report.result["score"] = score_json(r);
    out << "inception score over " << r.n_splits << " split(s): mean " << fixed(r.mean) << "  std "
        << fixed(r.std) << "  (N=" << r.rows << ", K=" << r.class_count << ")\n";
  }
};

struct ImprovedCmd {
  MatrixInput input;

  void attach(CLI::App* app) { input.attach(app); }

  void run(RunReport& report, std::ostream& out) const {
    const auto matrix = input.load(report);
    const double s = improved_score(matrix);
    const auto e = entropy_decomposition(matrix);
    report.result["improved_score_nats"] = s;
    report.result["improved_score_bits"] = nats_to_bits(s);
    report.result["exp_improved_score"] = std::exp(s);
    report.result["marginal_entropy_nats"] = e.marginal_entropy;
    report.result["mean_conditional_entropy_nats"] = e.mean_conditional_entropy;
    report.result["mutual_information_nats"] = e.mutual_information;
    out << "improved score: " << fixed(s, 9) << " nats (" << fixed(nats_to_bits(s), 6)
        << " bits, exp " << fixed(std::exp(s)) << ")\n";
  }
};

struct EntropyCmd {
  MatrixInput input;
  std::size_t buckets = 10;

  void attach(CLI::App* app) {
    input.attach(app);
    app->add_option("--buckets", buckets, "Histogram buckets over [0, log2 K]")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  }

  void run(RunReport& report, std::ostream& out) const {
    const auto matrix = input.load(report);
    report.config["buckets"] = buckets;
    const auto r = experiments::entropy_study(matrix, buckets);
    report.result["mean_conditional_entropy_bits"] = r.mean_conditional_entropy_bits;
    report.result["marginal_entropy_bits"] = r.marginal_entropy_bits;
    report.result["mutual_information_bits"] = r.mutual_information_bits;
    report.result["max_entropy_bits"] = r.max_entropy_bits;
    report.result["histogram"] = r.histogram;
    out << "mean conditional entropy  " << fixed(r.mean_conditional_entropy_bits, 4) << " bits\n"
        << "marginal entropy          " << fixed(r.marginal_entropy_bits, 4) << " bits\n"
        << "mutual information        " << fixed(r.mutual_information_bits, 4) << " bits\n"
        << "maximum (log2 K)          " << fixed(r.max_entropy_bits, 4) << " bits\n"
        << "per-row entropy histogram:\n";
    const double width = r.max_entropy_bits / static_cast<double>(buckets);
    for (std::size_t b = 0; b < r.histogram.size(); ++b) {
      out << "  [" << std::setw(8) << fixed(b * width, 3) << ", " << std::setw(8)
          << fixed((b + 1) * width, 3) << ")  " << r.histogram[b] << "\n";
    }
  }
};

struct SplitStudyCmd {
  MatrixInput input;
  std::vector<std::size_t> grid = experiments::kReferenceSplitGrid;
  std::string remainder = "reject";
  std::optional<std::uint64_t> shuffle_seed;

  void attach(CLI::App* app) {
    input.attach(app);
    app->add_option("--grid", grid, "Split counts to evaluate")->delimiter(',')->capture_default_str();
    app->add_option("--remainder", remainder, "Policy when rows do not divide evenly")
        ->check(CLI::IsMember({"reject", "absorb"}))
        ->capture_default_str();
    app->add_option("--shuffle-seed", shuffle_seed, "Shuffle rows with this seed before splitting");
  }

  void run(RunReport& report, std::ostream& out) const {
    const auto matrix = input.load(report);
    report.config["grid"] = grid;
    report.config["remainder"] = remainder;
    report.config["shuffle"] = shuffle_seed.has_value();
    if (shuffle_seed) report.seeds["shuffle"] = *shuffle_seed;
    const auto r = experiments::split_study(matrix, grid, parse_remainder(remainder), shuffle_seed);
    json rows = json::array();
    out << std::setw(10) << "n_splits" << std::setw(14) << "mean" << std::setw(14) << "std" << "\n";
    for (const auto& row : r.rows) {
      rows.push_back({{"n_splits", row.n_splits}, {"mean", row.mean}, {"std", row.std}});
      out << std::setw(10) << row.n_splits << std::setw(14) << fixed(row.mean, 4) << std::setw(14)
          << fixed(row.std, 5) << "\n";
    }
    report.result["rows"] = rows;
  }
};

struct TopClassesCmd {
  MatrixInput input;
  std::size_t k = 10;
  std::string labels_path;

  void attach(CLI::App* app) {
    input.attach(app);
    app->add_option("-k,--top", k, "Number of classes to list")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_option("--labels", labels_path, "Optional file with one class name per line")
        ->check(CLI::ExistingFile);
  }

  void run(RunReport& report, std::ostream& out) const {
    const auto matrix = input.load(report);
    report.config["k"] = k;
    std::vector<std::string> names;
    if (!labels_path.empty()) {
      std::ifstream in(labels_path);
      for (std::string line; std::getline(in, line);) names.push_back(line);
      report.add_input(labels_path);
    }
    const auto top = experiments::top_classes(matrix, k);
    json rows = json::array();
    for (std::size_t i = 0; i < top.size(); ++i) {
      const auto [cls, p] = top[i];
      json row = {{"rank", i + 1}, {"class", cls}, {"marginal", p}};
      const std::string name = cls < names.size() ? names[cls] : "";
      if (!name.empty()) row["name"] = name;
      rows.push_back(row);
      out << std::setw(4) << i + 1 << std::setw(8) << cls << "  " << fixed(p, 6)
          << (name.empty() ? "" : "  " + name) << "\n";
    }
    report.result["top_classes"] = rows;
  }
};

struct GaussianCmd {
  std::size_t samples = testbed::kDefaultSamples;
  std::optional<std::uint64_t> seed;
  std::string reading = "variance";

  void attach(CLI::App* app) {
    app->add_option("--samples", samples, "Monte Carlo samples per generator")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_option("--seed", seed, "Seed (default: SCORELAB_SEED or built-in)");
    app->add_option("--reading", reading, "Meaning of the second normal parameter")
        ->check(CLI::IsMember({"variance", "stddev"}))
        ->capture_default_str();
  }

  void run(RunReport& report, std::ostream& out) const {
    const std::uint64_t s = seed.value_or(default_seed());
    const auto r = reading == "stddev" ? testbed::ScaleReading::stddev : testbed::ScaleReading::variance;
    const auto spec = testbed::MixtureSpec::reference(r);
    report.config["samples"] = samples;
    report.config["reading"] = reading;
    report.config["class_means"] = spec.class_means;
    report.config["class_variances"] = spec.class_variances;
    report.seeds["seed"] = s;
    const auto reports = testbed::score_ordering_demo(spec, samples, s, r);
    json rows = json::array();
    out << std::left << std::setw(30) << "generator" << std::right << std::setw(12) << "score"
        << std::setw(12) << "nats" << std::setw(12) << "H(y)" << std::setw(12) << "H(y|x)" << "\n";
    for (const auto& t : reports) {
      rows.push_back(testbed_json(t));
      out << std::left << std::setw(30) << t.sampler << std::right << std::setw(12) << fixed(t.score_exp, 4)
          << std::setw(12) << fixed(t.score_nats, 4) << std::setw(12) << fixed(t.marginal_entropy, 4)
          << std::setw(12) << fixed(t.mean_conditional_entropy, 4) << "\n";
    }
    report.result["ranking"] = rows;
  }
};

struct TrainCmd {
  std::string data_path;
  std::string output;
  std::string arch = "mlp";
  std::size_t hidden = nn::MLPClassifier::kDefaultHidden;
  std::string activation = "tanh";
  std::size_t classes = 10;
  std::size_t dim = 16;
  std::size_t per_class = 200;
  std::size_t heldout_per_class = 100;
  double center_scale = 3.0;
  double spread = 1.0;
  double learning_rate = 0.1;
  std::size_t epochs = 30;
  std::size_t batch_size = 32;
  std::optional<std::uint64_t> seed;

  void attach(CLI::App* app) {
    app->add_option("--data", data_path, "Labeled dataset CSV (default: generate blobs)")
        ->check(CLI::ExistingFile);
    app->add_option("-o,--output", output, "Where to write the SLMD model")->required();
    app->add_option("--arch", arch, "Architecture")->check(CLI::IsMember({"mlp", "linear"}))->capture_default_str();
    app->add_option("--hidden", hidden, "MLP hidden width")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--activation", activation, "MLP activation")
        ->check(CLI::IsMember({"tanh", "relu"}))
        ->capture_default_str();
    app->add_option("--classes", classes, "Blob classes")->check(CLI::Range(2, 100000))->capture_default_str();
    app->add_option("--dim", dim, "Blob dimension")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--per-class", per_class, "Training points per class")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--heldout-per-class", heldout_per_class, "Held-out points per class")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_option("--center-scale", center_scale, "Stddev of blob centers")->capture_default_str();
    app->add_option("--spread", spread, "Stddev within each blob")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--lr", learning_rate, "Learning rate")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--epochs", epochs, "Training epochs")->capture_default_str();
    app->add_option("--batch-size", batch_size, "Minibatch size")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--seed", seed, "Seed (default: SCORELAB_SEED or built-in)");
  }

  void run(RunReport& report, std::ostream& out) const {
    const std::uint64_t s = seed.value_or(default_seed());
    report.seeds["seed"] = s;

    nn::SyntheticDataset train_data;
    std::optional<nn::SyntheticDataset> heldout;
    if (!data_path.empty()) {
      const auto bytes = io::read_file(data_path);
      train_data = io::decode_dataset_csv({reinterpret_cast<const char*>(bytes.data()), bytes.size()});
      report.add_input(data_path);
    } else {
      nn::BlobSpec blobs{classes, dim, per_class, center_scale, spread, mix_seed(s, 1)};
      train_data = nn::make_blobs(blobs, 0);
      blobs.per_class = heldout_per_class;
      heldout = nn::make_blobs(blobs, 1);
      report.config["blobs"] = {{"classes", classes}, {"dim", dim}, {"per_class", per_class},
                                {"heldout_per_class", heldout_per_class}, {"center_scale", center_scale},
                                {"spread", spread}};
    }

    const std::size_t d = train_data.input_dim;
    const std::size_t k = train_data.class_count;
    nn::Classifier model =
        arch == "linear"
            ? nn::Classifier(nn::SoftmaxLinear::random(d, k, mix_seed(s, 2)))
            : nn::Classifier(nn::MLPClassifier::random(
                  d, hidden, k, activation == "relu" ? nn::Activation::rectifier : nn::Activation::tanh,
                  mix_seed(s, 2)));
    report.config["arch"] = arch;
    if (arch == "mlp") {
      report.config["hidden"] = hidden;
      report.config["activation"] = activation;
    }
    report.config["learning_rate"] = learning_rate;
    report.config["epochs"] = epochs;
    report.config["batch_size"] = batch_size;

    auto trained = nn::train(std::move(model), train_data,
                             nn::TrainConfig{learning_rate, epochs, batch_size, mix_seed(s, 3)});
    io::save_model(output, trained.model);
    report.add_output(output);

    report.result["loss_trace"] = trained.loss_trace;
    report.result["train_accuracy"] = nn::accuracy(trained.model, train_data);
    report.result["model_fnv1a64"] = io::digest_hex(io::fnv1a64(io::encode_model(trained.model)));
    out << "trained " << arch << " classifier (d=" << d << ", K=" << k << ") for " << epochs << " epochs\n"
        << "loss " << fixed(trained.loss_trace.front(), 4) << " -> " << fixed(trained.loss_trace.back(), 4)
        << "\ntrain accuracy " << fixed(report.result["train_accuracy"].get<double>(), 4) << "\n";
    if (heldout) {
      const double acc = nn::accuracy(trained.model, *heldout);
      report.result["heldout_accuracy"] = acc;
      out << "held-out accuracy " << fixed(acc, 4) << "\n";
    }
    out << "model written to " << output << "\n";
  }
};

struct AttackCmd {
  std::string classifier;
  double epsilon = 0.001;
  std::size_t iters = 100;
  std::size_t samples = 1000;
  double delta = 1e-3;
  std::string init = "uniform";
  double box_lo = -1.0;
  double box_hi = 1.0;
  std::string init_data;
  std::string fixed_point;
  std::optional<double> clip_lo, clip_hi;
  std::optional<std::uint64_t> seed;
  std::string output;
  std::string samples_out;
  std::string traces_out;

  void attach(CLI::App* app) {
    app->add_option("--classifier", classifier, "SLMD model to attack")->required()->check(CLI::ExistingFile);
    app->add_option("--epsilon", epsilon, "Sign-gradient step size")->check(CLI::NonNegativeNumber)->capture_default_str();
    app->add_option("--iters", iters, "Maximum steps per sample")->capture_default_str();
    app->add_option("--samples", samples, "Samples to emit")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--delta", delta, "Stop once p(y=j|x) >= 1 - delta")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    app->add_option("--init", init, "Initial-sample distribution")
        ->check(CLI::IsMember({"uniform", "empirical", "fixed"}))
        ->capture_default_str();
    app->add_option("--box-lo", box_lo, "Uniform box lower bound")->capture_default_str();
    app->add_option("--box-hi", box_hi, "Uniform box upper bound")->capture_default_str();
    app->add_option("--init-data", init_data, "Point or dataset CSV for --init empirical")
        ->check(CLI::ExistingFile);
    app->add_option("--fixed-point", fixed_point, "Comma-separated point for --init fixed");
    app->add_option("--clip-lo", clip_lo, "Clamp samples from below after each step");
    app->add_option("--clip-hi", clip_hi, "Clamp samples from above after each step");
    app->add_option("--seed", seed, "Seed (default: SCORELAB_SEED or built-in)");
    app->add_option("-o,--output", output, "Write the attacked probability matrix here");
    app->add_option("--samples-out", samples_out, "Write the optimized samples as CSV");
    app->add_option("--traces-out", traces_out, "Write per-sample convergence traces as CSV");
  }

  void run(RunReport& report, std::ostream& out) const {
    const auto model = io::load_model(classifier);
    report.add_input(classifier);
    const std::size_t d = nn::input_dim(model);
    const std::uint64_t s = seed.value_or(default_seed());
    report.seeds["seed"] = s;

    attack::AttackConfig config;
    config.epsilon = epsilon;
    config.max_iters = iters;
    config.early_stop_delta = delta;
    config.seed = s;
    if (clip_lo.has_value() != clip_hi.has_value()) throw InvalidInput("--clip-lo and --clip-hi go together");
    if (clip_lo) config.clip = std::pair{*clip_lo, *clip_hi};
    if (init == "uniform") {
      config.init = attack::UniformBox{box_lo, box_hi, d};
      report.config["box"] = {box_lo, box_hi};
    } else if (init == "empirical") {
      if (init_data.empty()) throw InvalidInput("--init empirical requires --init-data");
      const auto bytes = io::read_file(init_data);
      std::size_t dim = 0;
      auto points = io::decode_points_csv({reinterpret_cast<const char*>(bytes.data()), bytes.size()}, dim);
      config.init = attack::EmpiricalInit{dim, std::move(points)};
      report.add_input(init_data);
    } else {
      if (fixed_point.empty()) throw InvalidInput("--init fixed requires --fixed-point");
      config.init = attack::FixedInit{parse_point(fixed_point)};
      report.config["fixed_point"] = std::get<attack::FixedInit>(config.init).point;
    }
    report.config["epsilon"] = epsilon;
    report.config["iters"] = iters;
    report.config["samples"] = samples;
    report.config["delta"] = delta;
    report.config["init"] = init;
    if (config.clip) report.config["clip"] = {config.clip->first, config.clip->second};

    const auto batch = attack::generate_attacked_batch(model, config, samples);
    const auto unattacked = [&] {
      std::vector<double> starts;
      starts.reserve(samples * d);
      for (std::size_t i = 0; i < samples; ++i) {
        auto x = attack::draw_initial(config, d, i);
        starts.insert(starts.end(), x.begin(), x.end());
      }
      return nn::predict_matrix(model, starts, samples);
    }();

    const double s_attacked = improved_score(batch.probs);
    const double s_initial = improved_score(unattacked);
    std::size_t converged = 0, total_iters = 0;
    for (const auto& t : batch.traces) {
      converged += t.converged ? 1 : 0;
      total_iters += t.iterations;
    }
    report.result["attacked"] = {{"improved_score_nats", s_attacked}, {"exp_score", std::exp(s_attacked)},
                                 {"inception_score_1split", inception_score(batch.probs, {1}).mean}};
    report.result["initial"] = {{"improved_score_nats", s_initial}, {"exp_score", std::exp(s_initial)}};
    report.result["converged"] = converged;
    report.result["mean_iterations"] = static_cast<double>(total_iters) / static_cast<double>(samples);
    report.result["matrix_fnv1a64"] = io::digest_hex(io::fnv1a64(io::encode_pmat(batch.probs)));

    if (!output.empty()) {
      io::save_matrix(output, batch.probs);
      report.add_output(output);
    }
    if (!samples_out.empty()) {
      const auto text = io::encode_points_csv(batch.samples, d);
      io::write_file(samples_out, std::as_bytes(std::span(text.data(), text.size())));
      report.add_output(samples_out);
    }
    if (!traces_out.empty()) {
      std::string text = "sample,target,iterations,converged,initial_prob,final_prob\n";
      for (std::size_t i = 0; i < batch.traces.size(); ++i) {
        const auto& t = batch.traces[i];
        const double last = t.target_prob.empty() ? t.initial_prob : t.target_prob.back();
        text += std::to_string(i) + "," + std::to_string(batch.targets[i]) + "," + std::to_string(t.iterations) +
                "," + (t.converged ? "1" : "0") + "," + io::format_double(t.initial_prob) + "," +
                io::format_double(last) + "\n";
      }
      io::write_file(traces_out, std::as_bytes(std::span(text.data(), text.size())));
      report.add_output(traces_out);
    }

    out << "attacked " << samples << " samples (epsilon " << epsilon << ", " << iters << " iterations max)\n"
        << "converged " << converged << "/" << samples << ", mean iterations "
        << fixed(report.result["mean_iterations"].get<double>(), 1) << "\n"
        << "score before attack " << fixed(std::exp(s_initial), 4) << "  after attack "
        << fixed(std::exp(s_attacked), 4) << "  (max " << nn::class_count(model) << ")\n";
  }
};

struct GenCmd {
  std::string kind = "random";
  std::string output;
  std::size_t rows = 1000;
  std::size_t classes = 10;
  std::size_t dim = 16;
  std::size_t per_class = 200;
  double center_scale = 3.0;
  double spread = 1.0;
  double sharp_fraction = 0.7;
  double sharp_boost = 9.0;
  std::optional<std::uint64_t> seed;

  void attach(CLI::App* app) {
    app->add_option("--kind", kind, "What to generate")
        ->check(CLI::IsMember({"random", "heterogeneous", "one-hot", "uniform", "blobs"}))
        ->capture_default_str();
    app->add_option("-o,--output", output, "Output path (.pmat/.csv for matrices, .csv for blobs)")->required();
    app->add_option("--rows", rows, "Matrix rows")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--classes", classes, "Class count")->check(CLI::Range(2, 1000000))->capture_default_str();
    app->add_option("--dim", dim, "Blob dimension")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--per-class", per_class, "Blob points per class")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--center-scale", center_scale, "Stddev of blob centers")->capture_default_str();
    app->add_option("--spread", spread, "Stddev within each blob")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--sharp-fraction", sharp_fraction, "Heterogeneous: share of confident rows")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    app->add_option("--sharp-boost", sharp_boost, "Heterogeneous: logit boost of confident rows")
        ->capture_default_str();
    app->add_option("--seed", seed, "Seed (default: SCORELAB_SEED or built-in)");
  }

  void run(RunReport& report, std::ostream& out) const {
    const std::uint64_t s = seed.value_or(default_seed());
    report.config["kind"] = kind;
    if (kind == "blobs") {
      // Same derivation as train-classifier, so both see the same blobs.
      const auto data = nn::make_blobs({classes, dim, per_class, center_scale, spread, mix_seed(s, 1)}, 0);
      const auto text = io::encode_dataset_csv(data);
      io::write_file(output, std::as_bytes(std::span(text.data(), text.size())));
      report.seeds["seed"] = s;
      report.config["blobs"] = {{"classes", classes}, {"dim", dim}, {"per_class", per_class},
                                {"center_scale", center_scale}, {"spread", spread}};
      report.result["points"] = data.size();
      report.result["fnv1a64"] = io::digest_hex(io::fnv1a64(text));
      report.add_output(output);
      out << "wrote " << data.size() << " labeled points to " << output << "\n";
      return;
    }
    const auto matrix = [&] {
      if (kind == "one-hot") return experiments::make_cycling_one_hot(rows, classes);
      if (kind == "uniform") return experiments::make_uniform_matrix(rows, classes);
      report.seeds["seed"] = s;
      if (kind == "heterogeneous") {
        report.config["sharp_fraction"] = sharp_fraction;
        report.config["sharp_boost"] = sharp_boost;
        return experiments::make_heterogeneous_matrix({rows, classes, sharp_fraction, sharp_boost, 1.0, s});
      }
      return experiments::make_random_matrix(rows, classes, s);
    }();
    report.config["rows"] = rows;
    report.config["classes"] = classes;
    io::save_matrix(output, matrix);
    report.result["fnv1a64"] = io::digest_hex(io::fnv1a64(io::encode_pmat(matrix)));
    report.add_output(output);
    out << "wrote " << rows << "x" << classes << " " << kind << " matrix to " << output << "\n";
  }
};

void emit(const RunReport& report, const Common& common, std::ostream& out) {
  const auto doc = report.to_json();
  if (!common.report_path.empty()) {
    std::ofstream f(common.report_path, std::ios::trunc);
    if (!f) throw LoadError("cannot write report to " + common.report_path);
    f << doc.dump(2) << "\n";
  }
  if (common.print_json) out << doc.dump(2) << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"scorelab: Inception Score diagnostics, decomposition, and stress tests"};
  app.require_subcommand(1);
  Common common;

  ScoreCmd score;
  ImprovedCmd improved;
  EntropyCmd entropy_cmd;
  SplitStudyCmd split;
  TopClassesCmd top;
  GaussianCmd gaussian;
  AttackCmd attack_cmd;
  TrainCmd train_cmd;
  GenCmd gen;

  struct Entry {
    CLI::App* app;
    std::function<void(RunReport&, std::ostream&)> run;
  };
  std::vector<Entry> entries;
  auto add = [&](const char* name, const char* help, auto& cmd) {
    CLI::App* sub = app.add_subcommand(name, help);
    cmd.attach(sub);
    sub->add_option("--report", common.report_path, "Write the JSON run report here");
    sub->add_flag("--json", common.print_json, "Print the JSON run report to stdout");
    entries.push_back({sub, [&cmd](RunReport& r, std::ostream& o) { cmd.run(r, o); }});
  };
  add("score", "Split-protocol Inception Score of a probability matrix", score);
  add("improved-score", "Mean KL to the global marginal (mutual information, nats)", improved);
  add("entropy-study", "Entropy diagnostics in bits", entropy_cmd);
  add("split-study", "Inception Score across a grid of split counts", split);
  add("top-classes", "Classes ranked by marginal probability", top);
  add("gaussian-demo", "One-dimensional two-class testbed ranking of generators", gaussian);
  add("attack", "Sign-gradient attack that maximizes the score of a classifier", attack_cmd);
  add("train-classifier", "Train a small classifier on Gaussian blobs or a dataset CSV", train_cmd);
  add("gen-synthetic", "Generate synthetic probability matrices or blob datasets", gen);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (app.exit(e, out, err) == 0) return kSuccess;
    err << "\n" << app.help();
    return kUsageError;
  }

  for (const auto& entry : entries) {
    if (!entry.app->parsed()) continue;
    RunReport report;
    report.subcommand = entry.app->get_name();
    try {
      entry.run(report, common.print_json ? err : out);
      emit(report, common, out);
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      return kDataError;
    }
    return kSuccess;
  }
  return kUsageError;
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace scorelab::cli
