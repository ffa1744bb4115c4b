// Command-line front end: fit a model from a JSON data file and write
// posterior-sample and diagnostics CSVs, or run one of the evaluation
// studies.  All randomness is seed-controlled and all output is
// deterministic, so identical invocations produce identical files.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "advi/evaluation.hpp"
#include "advi/optimizer.hpp"

namespace {

// One exit code per failure class, so scripts can tell them apart.
enum ExitCode : int {
  kOk = 0,
  kFailure = 1,          // unexpected error
  kUnknownModel = 2,
  kBadData = 3,          // unreadable file or schema mismatch
  kUnwritablePath = 4,
  kBadConfig = 5,        // inconsistent run configuration
  kDiverged = 6,
};

struct FitFlags {
  std::string model;
  std::string data_path;
  std::string family = "meanfield";
  std::size_t grad_samples = 1;
  std::string eta = "auto";
  std::uint64_t seed = 0;
  std::size_t minibatch = 0;
  std::size_t max_iters = 10000;
  double tol = 1e-3;
  std::string positive = "log";
  unsigned threads = 1;
  std::string output_path = "output_advi.csv";
  std::string diagnostic_path = "elbo_advi.csv";
  std::string params_path;  // optional fitted-parameter JSON
  std::size_t samples = 1000;
};

void add_fit_flags(CLI::App& cmd, FitFlags& flags, bool fitting) {
  cmd.add_option("model", flags.model, "Model name from the registry")
      ->required();
  cmd.add_option("--data", flags.data_path, "JSON data file")->required();
  cmd.add_option("--family", flags.family, "Variational family")
      ->check(CLI::IsMember({"meanfield", "fullrank"}))
      ->capture_default_str();
  cmd.add_option("--grad-samples", flags.grad_samples,
                 "Monte Carlo samples per gradient")
      ->capture_default_str();
  cmd.add_option("--eta", flags.eta,
                 "Step-size scale: 'auto' or a positive number")
      ->capture_default_str();
  cmd.add_option("--seed", flags.seed, "Random seed")->capture_default_str();
  cmd.add_option("--minibatch", flags.minibatch,
                 "Likelihood terms per step (0 = full data)")
      ->capture_default_str();
  cmd.add_option("--max-iters", flags.max_iters, "Iteration budget")
      ->capture_default_str();
  cmd.add_option("--tol", flags.tol,
                 "Relative ELBO change declaring convergence")
      ->capture_default_str();
  cmd.add_option("--positive-transform", flags.positive,
                 "Map for lower-bounded parameters")
      ->check(CLI::IsMember({"log", "softplus"}))
      ->capture_default_str();
  cmd.add_option("--threads", flags.threads, "Worker threads")
      ->envname("ADVI_THREADS")
      ->capture_default_str();
  if (fitting) {
    cmd.add_option("--output", flags.output_path, "Posterior samples CSV")
        ->capture_default_str();
    cmd.add_option("--diagnostic", flags.diagnostic_path,
                   "Per-iteration diagnostics CSV")
        ->capture_default_str();
    cmd.add_option("--samples", flags.samples,
                   "Posterior draws written to the output CSV")
        ->capture_default_str();
    cmd.add_option("--save-params", flags.params_path,
                   "Also write fitted variational parameters as JSON");
  }
}

advi::FitConfig to_config(const FitFlags& flags) {
  advi::FitConfig config;
  config.family = flags.family == "fullrank" ? advi::Family::fullrank
                                             : advi::Family::meanfield;
  config.grad_samples = flags.grad_samples;
  if (flags.eta == "auto") {
    config.eta_scale = 0.0;
  } else {
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(flags.eta, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != flags.eta.size() || !(value > 0.0)) {
      throw std::invalid_argument("--eta must be 'auto' or a positive number");
    }
    config.eta_scale = value;
  }
  config.seed = flags.seed;
  config.minibatch = flags.minibatch;
  config.max_iters = flags.max_iters;
  config.tol_rel = flags.tol;
  config.positive = flags.positive == "softplus"
                        ? advi::PositiveTransform::softplus
                        : advi::PositiveTransform::log;
  config.threads = flags.threads;
  return config;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/** Opens for writing (truncating); exits with kUnwritablePath on failure. */
std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw std::system_error(errno, std::generic_category(),
                            "cannot write '" + path + "'");
  }
  return out;
}

void write_csv_row(std::ofstream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) out << ',';
    out << cells[i];
  }
  out << '\n';
}

const advi::Model& find_model_or_exit(const std::string& name) {
  const advi::Model* model = advi::find_model(name);
  if (model == nullptr) {
    std::ostringstream known;
    for (const advi::Model* m : advi::model_registry()) {
      known << ' ' << m->name();
    }
    std::cerr << "unknown model '" << name << "'; available:" << known.str()
              << "\n";
    std::exit(kUnknownModel);
  }
  return *model;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& arr) {
  Eigen::VectorXd v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) v[i] = arr[i].get<double>();
  return v;
}

void save_params(const std::string& path, const std::string& model,
                 const FitFlags& flags, const advi::FitResult& result) {
  nlohmann::json j;
  j["model"] = model;
  j["positive_transform"] = flags.positive;
  j["eta_scale"] = result.eta_scale;
  j["iterations"] = result.iterations;
  j["termination"] = advi::termination_name(result.termination);
  if (const auto* mf = std::get_if<advi::MeanFieldGaussian>(&result.q)) {
    j["family"] = "meanfield";
    j["mu"] = vector_to_json(mf->mu);
    j["omega"] = vector_to_json(mf->omega);
  } else {
    const auto& fr = std::get<advi::FullRankGaussian>(result.q);
    j["family"] = "fullrank";
    j["packed"] = vector_to_json(fr.pack());
  }
  std::ofstream out = open_output(path);
  out << j.dump(2) << '\n';
}

advi::Approximation load_params(const std::string& path,
                                const std::string& expected_model,
                                std::string* positive) {
  std::ifstream in(path);
  if (!in) {
    throw advi::data_error("cannot read parameter file '" + path + "'");
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw advi::data_error("parameter file '" + path + "': " + e.what());
  }
  if (j.value("model", "") != expected_model) {
    throw advi::data_error("parameter file '" + path + "' was fitted for '" +
                           j.value("model", "") + "', not '" + expected_model +
                           "'");
  }
  *positive = j.value("positive_transform", "log");
  if (j.value("family", "") == "meanfield") {
    advi::MeanFieldGaussian q;
    q.mu = vector_from_json(j.at("mu"));
    q.omega = vector_from_json(j.at("omega"));
    return q;
  }
  advi::FullRankGaussian q;
  q.set_packed(vector_from_json(j.at("packed")));
  return q;
}

void write_samples_csv(const std::string& path,
                       const advi::PosteriorSampleSet& samples) {
  std::ofstream out = open_output(path);
  write_csv_row(out, samples.names);
  for (Eigen::Index i = 0; i < samples.samples.rows(); ++i) {
    std::vector<std::string> row;
    row.reserve(samples.samples.cols());
    for (Eigen::Index c = 0; c < samples.samples.cols(); ++c) {
      row.push_back(format_double(samples.samples(i, c)));
    }
    write_csv_row(out, row);
  }
}

void write_diagnostics_csv(const std::string& path,
                           const std::vector<advi::TracePoint>& trace) {
  std::ofstream out = open_output(path);
  write_csv_row(out, {"iter", "elapsed_seconds", "elbo"});
  for (const advi::TracePoint& p : trace) {
    write_csv_row(out, {std::to_string(p.iteration),
                        format_double(p.seconds), format_double(p.elbo)});
  }
}

int run_fit(const FitFlags& flags) {
  const advi::Model& model = find_model_or_exit(flags.model);
  const advi::FitConfig config = to_config(flags);
  if (flags.samples < 1) {
    throw std::invalid_argument("--samples must be at least 1");
  }
  const advi::Dataset data = advi::Dataset::from_json_file(flags.data_path);

  const advi::FitResult result = advi::fit(model, data, config);
  write_diagnostics_csv(flags.diagnostic_path, result.trace);
  if (!flags.params_path.empty()) {
    save_params(flags.params_path, flags.model, flags, result);
  }
  if (result.termination == advi::Termination::diverged) {
    std::cerr << "fit diverged: " << result.message << "\n";
    return kDiverged;
  }

  const advi::PosteriorSampleSet samples =
      advi::draw_posterior(model, data, result.q, result.transforms,
                           flags.samples, advi::mix_seed(flags.seed, 0x5a3fu));
  write_samples_csv(flags.output_path, samples);

  std::cerr << "fit " << flags.model << ": "
            << advi::termination_name(result.termination) << " after "
            << result.iterations << " iterations (eta_scale "
            << result.eta_scale << ")\n";
  return kOk;
}

/** Fits inline unless --params was given. */
advi::Approximation fit_or_load(const advi::Model& model,
                                const advi::Dataset& data, FitFlags& flags) {
  if (!flags.params_path.empty()) {
    std::string positive;
    advi::Approximation q =
        load_params(flags.params_path, flags.model, &positive);
    flags.positive = positive;
    const advi::TransformSet transforms = advi::transform_set(
        model, data,
        positive == "softplus" ? advi::PositiveTransform::softplus
                               : advi::PositiveTransform::log);
    if (advi::approximation_dim(q) != transforms.unconstrained_dim()) {
      throw advi::data_error(
          "parameter file dimension does not match the dataset");
    }
    return q;
  }
  const advi::FitResult result = advi::fit(model, data, to_config(flags));
  if (result.termination == advi::Termination::diverged) {
    throw advi::diverged_error(result.message);
  }
  return result.q;
}

int run_eval_predictive(FitFlags& flags, const std::string& held_out_path,
                        const std::string& output_path) {
  const advi::Model& model = find_model_or_exit(flags.model);
  const advi::Dataset data = advi::Dataset::from_json_file(flags.data_path);
  const advi::Dataset held_out =
      advi::Dataset::from_json_file(held_out_path);
  const advi::Approximation q = fit_or_load(model, data, flags);
  const advi::TransformSet transforms = advi::transform_set(
      model, data,
      flags.positive == "softplus" ? advi::PositiveTransform::softplus
                                   : advi::PositiveTransform::log);

  const advi::PosteriorSampleSet samples =
      advi::draw_posterior(model, data, q, transforms, flags.samples,
                           advi::mix_seed(flags.seed, 0x5a3fu));
  const double avg =
      advi::predictive_log_likelihood(model, data, held_out, samples);

  std::ofstream out = open_output(output_path);
  write_csv_row(out, {"held_out_points", "samples", "avg_log_predictive"});
  write_csv_row(out, {std::to_string(model.observation_count(held_out)),
                      std::to_string(flags.samples), format_double(avg)});
  return kOk;
}

int run_eval_covariance(FitFlags& flags, const std::string& block,
                        const std::string& output_path) {
  const advi::Model& model = find_model_or_exit(flags.model);
  const advi::Dataset data = advi::Dataset::from_json_file(flags.data_path);
  const advi::Approximation q = fit_or_load(model, data, flags);
  const advi::TransformSet transforms = advi::transform_set(
      model, data,
      flags.positive == "softplus" ? advi::PositiveTransform::softplus
                                   : advi::PositiveTransform::log);

  const advi::PosteriorSampleSet samples =
      advi::draw_posterior(model, data, q, transforms, flags.samples,
                           advi::mix_seed(flags.seed, 0x5a3fu));

  std::size_t offset = 0;
  std::size_t length = samples.samples.cols();
  if (!block.empty()) {
    const auto range = advi::block_range(model.blocks(data), block);
    offset = range.first;
    length = range.second;
  }
  std::vector<std::size_t> coords(length);
  for (std::size_t i = 0; i < length; ++i) coords[i] = offset + i;
  const Eigen::MatrixXd cov = advi::empirical_covariance(samples, coords);

  std::ofstream out = open_output(output_path);
  std::vector<std::string> header(length);
  for (std::size_t i = 0; i < length; ++i) {
    header[i] = samples.names[offset + i];
  }
  write_csv_row(out, header);
  for (Eigen::Index r = 0; r < cov.rows(); ++r) {
    std::vector<std::string> row;
    row.reserve(length);
    for (Eigen::Index c = 0; c < cov.cols(); ++c) {
      row.push_back(format_double(cov(r, c)));
    }
    write_csv_row(out, row);
  }
  return kOk;
}

int run_eval_kl_study(std::uint64_t seed, unsigned threads,
                      const std::string& output_path) {
  const std::vector<advi::KlStudyRow> rows =
      advi::kl_transform_study(seed, threads);
  std::ofstream out = open_output(output_path);
  write_csv_row(out, {"transform", "shape", "rate", "kl", "error"});
  for (const advi::KlStudyRow& row : rows) {
    write_csv_row(
        out,
        {row.transform == advi::PositiveTransform::log ? "log" : "softplus",
         format_double(row.shape), format_double(row.rate),
         format_double(row.kl), format_double(row.error)});
  }
  return kOk;
}

int run_eval_variance_study(const std::string& fixture, std::size_t reps,
                            std::uint64_t seed, unsigned threads,
                            const std::string& output_path) {
  const advi::VarianceFixture fx =
      fixture == "tanh_regression" ? advi::VarianceFixture::tanh_regression
                                   : advi::VarianceFixture::gamma_10_10;
  const std::vector<std::size_t> ms = {1, 10, 100};
  const std::vector<advi::VarianceReport> reports =
      advi::gradient_variance_study(fx, ms, reps, seed, threads);

  const std::size_t dim = reports.front().variance.size() / 2;
  std::ofstream out = open_output(output_path);
  write_csv_row(out, {"fixture", "estimator", "m", "coordinate", "variance"});
  for (const advi::VarianceReport& report : reports) {
    for (Eigen::Index c = 0; c < report.variance.size(); ++c) {
      const std::size_t k = static_cast<std::size_t>(c);
      const std::string coordinate =
          (k < dim ? "mu." : "omega.") + std::to_string(k % dim + 1);
      write_csv_row(out, {fixture, report.estimator, std::to_string(report.m),
                          coordinate, format_double(report.variance[c])});
    }
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Automatic differentiation variational inference"};
  app.require_subcommand(1);

  FitFlags fit_flags;
  CLI::App* fit_cmd =
      app.add_subcommand("fit", "Fit a model and write posterior CSVs");
  add_fit_flags(*fit_cmd, fit_flags, true);

  CLI::App* eval_cmd = app.add_subcommand("eval", "Post-fit studies");
  eval_cmd->require_subcommand(1);

  FitFlags pred_flags;
  std::string held_out_path;
  std::string eval_output = "eval_advi.csv";
  CLI::App* pred_cmd = eval_cmd->add_subcommand(
      "predictive", "Average held-out log predictive density");
  add_fit_flags(*pred_cmd, pred_flags, false);
  pred_cmd->add_option("--held-out", held_out_path, "Held-out JSON data file")
      ->required();
  pred_cmd->add_option("--params", pred_flags.params_path,
                       "Fitted parameter JSON (otherwise fits inline)");
  pred_cmd->add_option("--samples", pred_flags.samples, "Posterior draws")
      ->capture_default_str();
  pred_cmd->add_option("--output", eval_output, "Report CSV")
      ->capture_default_str();

  FitFlags cov_flags;
  std::string cov_block;
  std::string cov_output = "eval_advi.csv";
  CLI::App* cov_cmd = eval_cmd->add_subcommand(
      "covariance", "Empirical posterior covariance of one parameter block");
  add_fit_flags(*cov_cmd, cov_flags, false);
  cov_cmd->add_option("--params", cov_flags.params_path,
                      "Fitted parameter JSON (otherwise fits inline)");
  cov_cmd->add_option("--block", cov_block,
                      "Parameter block name (default: all coordinates)");
  cov_cmd->add_option("--samples", cov_flags.samples, "Posterior draws")
      ->capture_default_str();
  cov_cmd->add_option("--output", cov_output, "Report CSV")
      ->capture_default_str();

  std::uint64_t kl_seed = 0;
  unsigned kl_threads = 1;
  std::string kl_output = "kl_study.csv";
  CLI::App* kl_cmd = eval_cmd->add_subcommand(
      "kl_study", "KL to Gamma targets under both positive transforms");
  kl_cmd->add_option("--seed", kl_seed, "Random seed")->capture_default_str();
  kl_cmd->add_option("--threads", kl_threads, "Worker threads")
      ->envname("ADVI_THREADS")
      ->capture_default_str();
  kl_cmd->add_option("--output", kl_output, "Report CSV")
      ->capture_default_str();

  std::string var_fixture = "gamma_10_10";
  std::size_t var_reps = 10000;
  std::uint64_t var_seed = 0;
  unsigned var_threads = 1;
  std::string var_output = "variance_study.csv";
  CLI::App* var_cmd = eval_cmd->add_subcommand(
      "variance_study", "Gradient estimator variance at a reference point");
  var_cmd->add_option("--fixture", var_fixture, "Problem to measure on")
      ->check(CLI::IsMember({"gamma_10_10", "tanh_regression"}))
      ->capture_default_str();
  var_cmd->add_option("--replications", var_reps, "Estimates per (estimator, M)")
      ->capture_default_str();
  var_cmd->add_option("--seed", var_seed, "Random seed")->capture_default_str();
  var_cmd->add_option("--threads", var_threads, "Worker threads")
      ->envname("ADVI_THREADS")
      ->capture_default_str();
  var_cmd->add_option("--output", var_output, "Report CSV")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (fit_cmd->parsed()) return run_fit(fit_flags);
    if (pred_cmd->parsed()) {
      return run_eval_predictive(pred_flags, held_out_path, eval_output);
    }
    if (cov_cmd->parsed()) {
      return run_eval_covariance(cov_flags, cov_block, cov_output);
    }
    if (kl_cmd->parsed()) {
      return run_eval_kl_study(kl_seed, kl_threads, kl_output);
    }
    if (var_cmd->parsed()) {
      return run_eval_variance_study(var_fixture, var_reps, var_seed,
                                     var_threads, var_output);
    }
  } catch (const advi::data_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kBadData;
  } catch (const advi::diverged_error& e) {
    std::cerr << "fit diverged: " << e.what() << "\n";
    return kDiverged;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return kBadConfig;
  } catch (const std::system_error& e) {
    std::cerr << e.what() << "\n";
    return kUnwritablePath;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}
