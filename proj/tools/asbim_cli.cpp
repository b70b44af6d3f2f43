// asbim: synthetic data, gradient check, training, cross-validation and descriptives.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "asbim/asbim.hpp"

namespace fs = std::filesystem;
using namespace asbim;

namespace {

enum ExitCode : int {
  kOk = 0,
  kUnexpected = 1,
  kIngestion = 2,
  kConfiguration = 3,
  kNumerical = 4,
  kAcceptance = 5,
};

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
};

struct DataOptions {
  std::string sequences;
  std::string dyads;
};

config::KeyValues load_config(const std::string& path) {
  return path.empty() ? config::KeyValues{} : config::KeyValues::load(path);
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  localtime_r(&now, &tm);
  std::ostringstream ss;
  ss << std::put_time(&tm, "%Y%m%d-%H%M%S");
  return ss.str();
}

fs::path run_dir(const CommonOptions& common, std::uint64_t seed) {
  fs::path dir = common.out_dir.empty() ? fs::path("runs") / (timestamp() + "_seed" + std::to_string(seed))
                                        : fs::path(common.out_dir);
  fs::create_directories(dir);
  return dir;
}

/// Config-file values, then explicit flags, over defaults. Rejects keys no struct knows.
struct Effective {
  train::TrainConfig train;
  eval::CvOptions cv;
  data::SyntheticConfig synth;
};

Effective resolve(const CommonOptions& common) {
  auto kv = load_config(common.config_path);
  Effective e;
  config::apply(kv, e.train);
  config::apply(kv, e.cv);
  config::apply(kv, e.synth);
  kv.reject_unused();
  if (!kv.contains("seed")) e.cv.seed = e.train.seed;
  if (common.seed) {
    e.train.seed = *common.seed;
    e.cv.seed = *common.seed;
    e.synth.rng_seed = *common.seed;
  }
  return e;
}

std::string train_echo(const Effective& e) { return "[train]\n" + config::echo(e.train); }

int cmd_synth(const CommonOptions& common, std::optional<int> n_dyads) {
  auto e = resolve(common);
  if (n_dyads) e.synth.n_dyads = *n_dyads;
  const auto dataset = data::generate_synthetic(e.synth);
  const auto dir = run_dir(common, e.synth.rng_seed);
  data::write_dataset(dataset, {(dir / "sequences.csv").string(), (dir / "dyads.csv").string()});
  io::write_file((dir / "config.txt").string(), "[synthetic]\n" + config::echo(e.synth));
  std::cout << "wrote " << dataset.size() << " dyads to " << dir.string() << "\n";
  return kOk;
}

int cmd_gradcheck(std::uint64_t seed, int n_seeds, int q, int h, const std::string& variant, bool corrupt) {
  std::vector<model::Variant> variants;
  if (variant == "both") {
    variants = {model::Variant::Base, model::Variant::PlusInhibitoryControl};
  } else {
    variants = {model::parse_variant(variant)};
  }
  std::map<std::string, double> worst_by_group;
  double worst = 0.0;
  const auto start = std::chrono::steady_clock::now();
  for (auto v : variants) {
    for (int s = 0; s < n_seeds; ++s) {
      const auto report = model::check_gradients(seed + static_cast<std::uint64_t>(s), q, h, v, corrupt);
      worst = std::max(worst, report.max_relative_error);
      for (const auto& g : report.groups) {
        auto& w = worst_by_group[g.name];
        w = std::max(w, g.max_relative_error);
      }
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  for (const auto& [name, err] : worst_by_group) {
    std::cout << std::left << std::setw(28) << name << std::scientific << std::setprecision(3) << err << "\n";
  }
  const bool pass = worst < model::kGradCheckThreshold;
  std::cout << "max relative error " << std::scientific << std::setprecision(3) << worst << " (threshold "
            << model::kGradCheckThreshold << ", " << n_seeds << " seed(s), q=" << q << ", h=" << h << ", "
            << std::fixed << std::setprecision(2) << secs << " s): " << (pass ? "PASS" : "FAIL") << "\n";
  return pass ? kOk : kAcceptance;
}

data::RawDataset load(const DataOptions& d) {
  if (d.sequences.empty() || d.dyads.empty()) throw ConfigError("--sequences and --dyads are required");
  return data::load_dataset({d.sequences, d.dyads});
}

void require_variant_data(const data::RawDataset& raw, model::Variant v) {
  if (v != model::Variant::PlusInhibitoryControl) return;
  for (const auto& d : raw) {
    if (!d.inhibitory_control) {
      throw ConfigError("variant plus_d needs inhibitory_control for every dyad; '" + d.dyad_id + "' has none");
    }
  }
}

int cmd_train(const CommonOptions& common, const DataOptions& data_opts, const std::optional<int>& epochs,
              const std::optional<std::string>& variant) {
  auto e = resolve(common);
  if (epochs) e.train.epochs = *epochs;
  if (variant) e.train.variant = model::parse_variant(*variant);
  train::validate(e.train);
  const auto raw = load(data_opts);
  require_variant_data(raw, e.train.variant);
  const auto max_len = static_cast<std::size_t>(e.train.max_len);
  const auto imputed = data::impute_outcomes(raw, {1, max_len, 1.0}, rng::derive_seed(e.train.seed, "imputation"));
  const auto dataset = data::preprocess(imputed.front(), max_len);
  const auto result = train::train(dataset, e.train);

  const auto dir = run_dir(common, e.train.seed);
  const auto echo = train_echo(e);
  model::save_checkpoint((dir / "checkpoint.txt").string(), result.params, echo);
  io::write_file((dir / "history.csv").string(), train::history_csv(result.history));
  io::write_file((dir / "attention.csv").string(),
                 eval::attention_csv(eval::export_attention(dataset, result.params,
                                                            eval::method_name(e.train.variant))));
  io::write_file((dir / "config.txt").string(), echo);
  std::cout << "trained " << e.train.epochs << " epochs on " << dataset.size() << " dyads: loss "
            << result.history.loss.front() << " -> " << result.final_loss << ", gamma " << result.params.gamma()
            << "\nwrote " << dir.string() << "\n";
  return kOk;
}

int cmd_cv(const CommonOptions& common, const DataOptions& data_opts, const std::string& variant, bool baselines_only,
           bool no_baselines, std::optional<int> k, std::optional<int> m, std::optional<int> jobs,
           std::optional<int> epochs) {
  auto e = resolve(common);
  if (k) e.cv.k = *k;
  if (m) e.cv.m_imputations = *m;
  if (jobs) e.cv.jobs = *jobs;
  if (epochs) e.train.epochs = *epochs;
  e.cv.max_len = e.train.max_len;
  train::validate(e.train);
  const auto raw = load(data_opts);

  std::vector<eval::Method> methods;
  if (!baselines_only) {
    std::vector<model::Variant> variants;
    if (variant == "both") {
      variants = {model::Variant::Base, model::Variant::PlusInhibitoryControl};
    } else {
      variants = {model::parse_variant(variant)};
    }
    for (auto v : variants) {
      require_variant_data(raw, v);
      auto cfg = e.train;
      cfg.variant = v;
      methods.push_back(eval::asbim_method(cfg));
    }
  }
  if (!no_baselines || baselines_only) {
    methods.push_back(eval::t1_carry_method());
    methods.push_back(eval::two_stage_method());
  }
  if (methods.empty()) throw ConfigError("nothing to evaluate");

  auto report = eval::cross_validate(raw, methods, e.cv);
  report.config_echo = train_echo(e) + "[cv]\n" + config::echo(e.cv) + "variant_arg=" + variant +
                       "\nbaselines_only=" + (baselines_only ? "true" : "false") + "\n";
  const auto dir = run_dir(common, e.cv.seed);
  eval::write_report(report, dir);
  std::cout << std::left << std::setw(14) << "model" << std::setw(12) << "mean_mse" << std::setw(12) << "min_mse"
            << std::setw(12) << "max_mse" << std::setw(10) << "mean_r" << "gamma\n";
  for (const auto& a : report.aggregates) {
    std::cout << std::left << std::setw(14) << a.method << std::fixed << std::setprecision(4) << std::setw(12)
              << a.mean_mse << std::setw(12) << a.min_mse << std::setw(12) << a.max_mse << std::setw(10)
              << (a.mean_r ? io::format_double(std::round(*a.mean_r * 1e4) / 1e4) : "NA")
              << (a.mean_gamma ? io::format_double(std::round(*a.mean_gamma * 1e4) / 1e4) : "-") << "\n";
  }
  std::cout << "wrote " << dir.string() << "\n";
  return kOk;
}

int cmd_report(const CommonOptions& common, const DataOptions& data_opts) {
  const auto raw = load(data_opts);
  const auto desc = data::descriptives(raw);
  const auto e = resolve(common);
  const auto dir = run_dir(common, e.train.seed);

  std::string csv = "variable,n,mean,sd,min,max";
  for (const auto* name : data::Descriptives::kNames) csv += std::string(",r_") + name;
  csv += "\n";
  std::cout << std::left << std::setw(20) << "variable" << std::setw(6) << "n" << std::setw(18) << "mean (sd)"
            << "range\n";
  for (std::size_t i = 0; i < desc.variables.size(); ++i) {
    const auto& v = desc.variables[i];
    csv += v.name + ',' + std::to_string(v.n) + ',' + io::format_double(v.mean) + ',' + io::format_double(v.sd) + ',' +
           io::format_double(v.min) + ',' + io::format_double(v.max);
    for (const auto& r : desc.correlation[i]) csv += ',' + io::format_optional(r);
    csv += '\n';
    std::ostringstream ms;
    ms << std::fixed << std::setprecision(2) << v.mean << " (" << v.sd << ")";
    std::cout << std::left << std::setw(20) << v.name << std::setw(6) << v.n << std::setw(18) << ms.str()
              << std::fixed << std::setprecision(2) << v.min << "-" << v.max << "\n";
  }
  io::write_file((dir / "descriptives.csv").string(), csv);
  std::cout << "wrote " << dir.string() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Attention-based sequential behavior interaction model: data, training and evaluation"};
  app.footer(
      "Precedence: command-line flags override config-file values, which override built-in defaults.\n"
      "Exit codes: 0 ok, 2 ingestion error, 3 configuration error, 4 numerical error, 5 acceptance failure.");
  app.require_subcommand(1);

  CommonOptions common;
  DataOptions data_opts;
  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("-c,--config", common.config_path, "key=value config file");
    cmd->add_option("-o,--out", common.out_dir, "output directory (default runs/<timestamp>_seed<seed>)");
    cmd->add_option("--seed", common.seed, "seed for every random stream");
  };
  const auto add_data = [&](CLI::App* cmd) {
    cmd->add_option("--sequences", data_opts.sequences, "per-interval CSV (dyad_id,t,maut,cdef)")->required();
    cmd->add_option("--dyads", data_opts.dyads, "per-dyad CSV (dyad_id,gender,ext_t1,ext_t2,inhibitory_control)")
        ->required();
  };

  auto* synth = app.add_subcommand("synth", "generate a synthetic dyad dataset");
  add_common(synth);
  std::optional<int> n_dyads;
  synth->add_option("--n-dyads", n_dyads, "number of dyads");

  auto* grad = app.add_subcommand("gradcheck", "compare analytic gradients with central differences");
  grad->set_help_flag("--help", "print this help message and exit");  // -h would clash with --h
  std::uint64_t grad_seed = 1;
  int grad_seeds = 20, grad_q = 8, grad_h = 8;
  std::string grad_variant = "both";
  bool corrupt = false;
  grad->add_option("--seed", grad_seed, "first seed")->capture_default_str();
  grad->add_option("--seeds", grad_seeds, "number of consecutive seeds")->capture_default_str()->check(
      CLI::PositiveNumber);
  grad->add_option("--q", grad_q, "embedding dim")->capture_default_str()->check(CLI::PositiveNumber);
  grad->add_option("--h", grad_h, "attention projection dim")->capture_default_str()->check(CLI::PositiveNumber);
  grad->add_option("--variant", grad_variant, "base, plus_d or both")->capture_default_str();
  grad->add_flag("--corrupt-gradient", corrupt, "perturb one analytic partial (negative control)");

  auto* trn = app.add_subcommand("train", "train on the full dataset and write a checkpoint");
  add_common(trn);
  add_data(trn);
  std::optional<int> epochs;
  std::optional<std::string> variant;
  trn->add_option("--epochs", epochs, "full-batch Adam steps");
  trn->add_option("--variant", variant, "base or plus_d");

  auto* cv = app.add_subcommand("cv", "k-fold cross-validation over multiply imputed datasets");
  add_common(cv);
  add_data(cv);
  std::string cv_variant = "base";
  bool baselines_only = false, no_baselines = false;
  std::optional<int> k, m, jobs, cv_epochs;
  cv->add_option("--variant", cv_variant, "base, plus_d or both")->capture_default_str();
  cv->add_flag("--baselines-only", baselines_only, "evaluate only the T1-carry and two-stage baselines");
  cv->add_flag("--no-baselines", no_baselines, "skip the baselines");
  cv->add_option("--k", k, "number of folds");
  cv->add_option("--m", m, "number of imputed datasets");
  cv->add_option("--jobs", jobs, "worker threads");
  cv->add_option("--epochs", cv_epochs, "full-batch Adam steps per fold");

  auto* rep = app.add_subcommand("report", "descriptive statistics and between-person correlations");
  add_common(rep);
  add_data(rep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfiguration;
  }

  try {
    if (*synth) return cmd_synth(common, n_dyads);
    if (*grad) return cmd_gradcheck(grad_seed, grad_seeds, grad_q, grad_h, grad_variant, corrupt);
    if (*trn) return cmd_train(common, data_opts, epochs, variant);
    if (*cv) return cmd_cv(common, data_opts, cv_variant, baselines_only, no_baselines, k, m, jobs, cv_epochs);
    if (*rep) return cmd_report(common, data_opts);
  } catch (const IngestionError& e) {
    std::cerr << "ingestion error: " << e.what() << "\n";
    return kIngestion;
  } catch (const DegenerateInputError& e) {
    std::cerr << "ingestion error: " << e.what() << "\n";
    return kIngestion;
  } catch (const ImputationError& e) {
    std::cerr << "ingestion error: " << e.what() << "\n";
    return kIngestion;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfiguration;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const EmptySequenceError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUnexpected;
  }
  return kUnexpected;
}
