#include "theftbench/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "theftbench/dataio.hpp"
#include "theftbench/error.hpp"
#include "theftbench/experiment.hpp"
#include "theftbench/nn/presets.hpp"
#include "theftbench/nn/serialize.hpp"
#include "theftbench/nn/train.hpp"
#include "theftbench/numfmt.hpp"
#include "theftbench/theftgen.hpp"

namespace theftbench::cli {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr const char* kSeedEnv = "THEFTBENCH_SEED";

struct IngestArgs {
  std::string format;
  fs::path in;
  fs::path out;
  std::size_t sample = 0;
  std::uint64_t seed = 0;
};

struct SynthArgs {
  std::size_t count = 0;
  std::uint64_t seed = 0;
  fs::path out;
  std::string role = "defender";
};

struct PolluteArgs {
  fs::path in;
  std::uint64_t seed = 0;
  fs::path out;
  std::string role = "defender";
};

struct TrainArgs {
  std::string arch;
  fs::path data;
  std::uint64_t seed = 0;
  fs::path out;
  nn::TrainConfig cfg;
};

struct EvalArgs {
  fs::path model;
  fs::path data;
  fs::path out;
};

struct AttackArgs {
  fs::path defender;
  fs::path attacker;
  std::string algo = "sff";
  std::size_t step = 14;
  double size = 0.01;
  double lambda = 10.0;
  double sigma = 0.1;
  double alpha = 0.5;
  double u = 1.0;
  fs::path normals;
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  fs::path out;
  std::size_t jobs = 1;
};

struct SweepArgs {
  fs::path plan;
  fs::path out;
  std::string format = "csv";
  fs::path json_out;
  std::size_t jobs = 1;
};

struct ReportArgs {
  fs::path in;
  std::string format = "csv";
  fs::path out;
};

void log_config(std::ostream& err, const std::string& command, json cfg) {
  json j;
  j["command"] = command;
  j["config"] = std::move(cfg);
  err << "config " << j.dump() << '\n';
}

void add_seed(CLI::App* sub, std::uint64_t& seed, const std::string& what) {
  sub->add_option("--seed", seed, what + " (default from " + kSeedEnv + ", else 0)")
      ->envname(kSeedEnv)
      ->capture_default_str();
}

void check_jobs(std::size_t jobs) {
  if (jobs == 0) throw ValidationError("--jobs must be at least 1");
}

std::vector<DailyLoadVector> vectors_of(const LabeledDataset& ds, bool normals_only) {
  std::vector<DailyLoadVector> out;
  out.reserve(ds.samples.size());
  for (const auto& s : ds.samples) {
    if (!normals_only || s.label == Label::Normal) out.push_back(s.vector);
  }
  return out;
}

int cmd_ingest(const IngestArgs& a, std::ostream& err) {
  log_config(err, "ingest", {{"format", a.format},
                             {"in", a.in.string()},
                             {"out", a.out.string()},
                             {"sample", a.sample},
                             {"seed", a.seed}});
  const auto parsed = dataio::parse_meter_csv(a.in, dataio::meter_format_from_string(a.format));
  auto regulated = dataio::regulate_daily(parsed.records);
  err << "parsed " << parsed.records.size() << " records from " << parsed.lines << " lines ("
      << parsed.malformed << " malformed); " << regulated.daily.size() << " complete days, "
      << regulated.dropped_groups << " incomplete days dropped\n";
  std::vector<DailyLoadVector> daily = std::move(regulated.daily);
  if (a.sample > 0) daily = dataio::sample_records(daily, a.sample, a.seed);
  dataio::save_dataset(dataio::as_normal_dataset(daily, a.seed), a.out);
  err << "wrote " << daily.size() << " daily vectors to " << a.out.string() << '\n';
  return 0;
}

int cmd_synth(const SynthArgs& a, std::ostream& err) {
  const dataio::SyntheticProfileConfig profile;
  log_config(err, "synth", {{"count", a.count},
                            {"seed", a.seed},
                            {"out", a.out.string()},
                            {"role", a.role},
                            {"target_mean_daily_kwh", profile.target_mean_daily_kwh},
                            {"days_per_household", profile.days_per_household},
                            {"vacant_fraction", profile.vacant_fraction}});
  const DatasetRole role = dataset_role_from_string(a.role);
  const auto normals = dataio::generate_synthetic_normals(a.count, a.seed, profile);
  auto ds = dataio::as_normal_dataset(normals, a.seed);
  ds.role = role;
  dataio::save_dataset(ds, a.out);
  err << "wrote " << normals.size() << " synthetic normal vectors (mean L1 "
      << format_double(mean_l1(normals)) << " kWh) to " << a.out.string() << '\n';
  return 0;
}

int cmd_pollute(const PolluteArgs& a, std::ostream& err) {
  log_config(err, "pollute",
             {{"in", a.in.string()}, {"seed", a.seed}, {"out", a.out.string()}, {"role", a.role}});
  const DatasetRole role = dataset_role_from_string(a.role);
  const auto in = dataio::load_dataset(a.in);
  if (in.count(Label::Theft) > 0) {
    throw ValidationError("pollute expects a dataset of normal vectors only");
  }
  const auto ds = theftgen::pollute_dataset(vectors_of(in, false), a.seed, role);
  dataio::save_dataset(ds, a.out);
  err << "wrote " << ds.size() << " samples (" << ds.count(Label::Theft) << " theft) to "
      << a.out.string() << '\n';
  return 0;
}

int cmd_train(TrainArgs a, std::ostream& err) {
  a.cfg.seed = a.seed;
  log_config(err, "train", {{"arch", a.arch},
                            {"data", a.data.string()},
                            {"seed", a.seed},
                            {"out", a.out.string()},
                            {"epochs", a.cfg.epochs},
                            {"batch_size", a.cfg.batch_size},
                            {"learning_rate", a.cfg.learning_rate},
                            {"beta1", a.cfg.beta1},
                            {"beta2", a.cfg.beta2},
                            {"epsilon", a.cfg.epsilon},
                            {"validation_fraction", a.cfg.validation_fraction},
                            {"patience", a.cfg.patience}});
  a.cfg.validate();
  const auto arch = nn::preset(a.arch);
  const auto ds = dataio::load_dataset(a.data);
  const auto model = nn::train_model(arch, ds, a.cfg, [&](const nn::EpochLog& e) {
    err << "epoch " << e.epoch << "/" << a.cfg.epochs << " train_loss=" << e.train_loss
        << " train_acc=" << e.train_accuracy << " val_loss=" << e.val_loss
        << " val_acc=" << e.val_accuracy << " val_fpr=" << e.val_fpr << " (" << e.seconds
        << " s)\n";
  });
  nn::save_model(model, a.out);
  err << "kept epoch " << model.meta().epochs << " (val_acc=" << model.meta().val_accuracy
      << ", val_fpr=" << model.meta().val_fpr << "); wrote " << a.out.string() << '\n';
  return 0;
}

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  log_config(err, "eval",
             {{"model", a.model.string()}, {"data", a.data.string()}, {"out", a.out.string()}});
  const auto model = nn::load_model(a.model);
  const auto ds = dataio::load_dataset(a.data);
  const auto e = nn::evaluate_model(model, ds);
  json j;
  j["model"] = model.arch().name;
  j["samples"] = e.total();
  j["accuracy"] = e.accuracy;
  j["fpr"] = e.fpr;
  j["true_positive"] = e.true_positive;
  j["true_negative"] = e.true_negative;
  j["false_positive"] = e.false_positive;
  j["false_negative"] = e.false_negative;
  const std::string text = j.dump(2) + '\n';
  if (a.out.empty()) {
    out << text;
  } else {
    std::ofstream f(a.out, std::ios::binary);
    if (!f || !(f << text)) throw IoError("cannot write " + a.out.string());
  }
  return 0;
}

int cmd_attack(const AttackArgs& a, std::ostream& err) {
  check_jobs(a.jobs);
  experiment::ExperimentPlan plan;
  plan.defender = a.defender;
  plan.attacker = a.attacker;
  plan.algo = experiment::algo_from_string(a.algo);
  plan.search = {{a.step}, {a.size}, {a.lambda}, {a.sigma}};
  plan.alpha = {a.alpha};
  plan.u = {a.u};
  plan.n_vectors = a.n;
  plan.base_seed = a.seed;
  plan.normals = a.normals;
  json cfg = experiment::plan_to_json(plan);
  cfg["out"] = a.out.string();
  cfg["jobs"] = a.jobs;
  log_config(err, "attack", std::move(cfg));
  plan.validate();

  experiment::SweepOptions opts;
  opts.jobs = a.jobs;
  opts.keep_details = true;
  opts.log = [&err](const std::string& m) { err << m << '\n'; };
  const auto report = experiment::run_sweep(plan, opts);
  experiment::emit_report(report, a.out, experiment::ReportFormat::Json);
  err << "wrote " << a.out.string() << '\n';
  return 0;
}

int cmd_sweep(const SweepArgs& a, std::ostream& err) {
  check_jobs(a.jobs);
  const auto format = experiment::report_format_from_string(a.format);
  const auto plan = experiment::load_plan(a.plan);
  json cfg = experiment::plan_to_json(plan);
  cfg["out"] = a.out.string();
  cfg["format"] = a.format;
  if (!a.json_out.empty()) cfg["json"] = a.json_out.string();
  cfg["jobs"] = a.jobs;
  log_config(err, "sweep", std::move(cfg));

  experiment::SweepOptions opts;
  opts.jobs = a.jobs;
  opts.log = [&err](const std::string& m) { err << m << '\n'; };
  const auto report = experiment::run_sweep(plan, opts);
  experiment::emit_report(report, a.out, format);
  if (!a.json_out.empty()) {
    experiment::emit_report(report, a.json_out, experiment::ReportFormat::Json);
  }
  err << "wrote " << report.cells.size() << " cells to " << a.out.string() << '\n';
  return 0;
}

int cmd_report(const ReportArgs& a, std::ostream& out, std::ostream& err) {
  log_config(err, "report",
             {{"in", a.in.string()}, {"format", a.format}, {"out", a.out.string()}});
  const auto format = experiment::report_format_from_string(a.format);
  const auto report = experiment::load_report(a.in);
  if (!a.out.empty()) {
    experiment::emit_report(report, a.out, format);
    return 0;
  }
  if (format == experiment::ReportFormat::Csv) {
    experiment::write_report_csv(report, out);
  } else {
    out << experiment::report_to_json(report).dump(2) << '\n';
  }
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"theftbench: energy-theft detectors and adversarial measurement attacks"};
  app.name("theftbench");
  app.require_subcommand(1, 1);

  IngestArgs ingest;
  auto* s_ingest = app.add_subcommand("ingest", "Parse raw meter data into daily 48-slot vectors");
  s_ingest->add_option("--format", ingest.format, "Input layout: issda or canonical")
      ->required()
      ->check(CLI::IsMember({"issda", "canonical"}));
  s_ingest->add_option("--in", ingest.in, "Raw meter file (readings in kWh)")->required();
  s_ingest->add_option("--out", ingest.out, "Output dataset CSV (label 0, readings in kWh)")
      ->required();
  s_ingest->add_option("--sample", ingest.sample,
                       "Keep a uniform sample of this many days (0 keeps all)")
      ->capture_default_str();
  add_seed(s_ingest, ingest.seed, "Sampling seed");

  SynthArgs synth;
  auto* s_synth = app.add_subcommand("synth", "Generate synthetic normal daily load vectors");
  s_synth->add_option("--count", synth.count, "Number of daily vectors")->required();
  add_seed(s_synth, synth.seed, "Generator seed");
  s_synth->add_option("--out", synth.out, "Output dataset CSV (label 0, readings in kWh)")
      ->required();
  s_synth->add_option("--role", synth.role, "Dataset role tag: defender or attacker")
      ->check(CLI::IsMember({"defender", "attacker"}))
      ->capture_default_str();

  PolluteArgs pollute;
  auto* s_pollute =
      app.add_subcommand("pollute", "Replace half of a normal dataset with h1-h6 thefts");
  s_pollute->add_option("--in", pollute.in, "Normal dataset CSV (kWh)")->required();
  add_seed(s_pollute, pollute.seed, "Pollution seed");
  s_pollute->add_option("--out", pollute.out, "Labelled dataset CSV (kWh)")->required();
  s_pollute->add_option("--role", pollute.role, "Dataset role tag: defender or attacker")
      ->check(CLI::IsMember({"defender", "attacker"}))
      ->capture_default_str();

  TrainArgs train;
  auto* s_train = app.add_subcommand("train", "Train a detector preset on a labelled dataset");
  s_train->add_option("--arch", train.arch, "Preset: f_fnn, f_rnn, f_cnn, fp_fnn, fp_rnn, fp_cnn")
      ->required()
      ->check(CLI::IsMember(nn::preset_names()));
  s_train->add_option("--data", train.data, "Labelled dataset CSV (kWh)")->required();
  add_seed(s_train, train.seed, "Training seed (init, split, shuffles, dropout)");
  s_train->add_option("--out", train.out, "Model JSON")->required();
  s_train->add_option("--epochs", train.cfg.epochs, "Maximum epochs")->capture_default_str();
  s_train->add_option("--batch-size", train.cfg.batch_size, "Mini-batch size")
      ->capture_default_str();
  s_train->add_option("--lr", train.cfg.learning_rate, "Adam learning rate")
      ->capture_default_str();
  s_train->add_option("--patience", train.cfg.patience,
                      "Early-stop patience in epochs (0 disables)")
      ->capture_default_str();
  s_train->add_option("--val-fraction", train.cfg.validation_fraction,
                      "Held-out validation fraction in (0, 1)")
      ->capture_default_str();

  EvalArgs eval;
  auto* s_eval = app.add_subcommand("eval", "Accuracy, FPR and confusion counts of a model");
  s_eval->add_option("--model", eval.model, "Model JSON")->required();
  s_eval->add_option("--data", eval.data, "Labelled dataset CSV (kWh)")->required();
  s_eval->add_option("--out", eval.out, "Write the metrics JSON here instead of stdout");

  AttackArgs atk;
  auto* s_attack = app.add_subcommand("attack", "Generate and score one batch of attack vectors");
  s_attack->add_option("--defender", atk.defender, "Defender model JSON (scores every vector)")
      ->required();
  s_attack->add_option("--attacker", atk.attacker,
                       "Attacker model JSON for black-box runs (default: white-box)");
  s_attack->add_option("--algo", atk.algo, "sff (SearchFromFree), va1 (scaling) or va2 (uniform)")
      ->check(CLI::IsMember({"sff", "va1", "va2"}))
      ->capture_default_str();
  s_attack->add_option("--step", atk.step, "sff: maximum iterations")->capture_default_str();
  s_attack->add_option("--size", atk.size, "sff: largest per-slot change per iteration (kWh)")
      ->capture_default_str();
  s_attack->add_option("--lambda", atk.lambda, "sff: weight of the L1 bill term (1/kWh)")
      ->capture_default_str();
  s_attack->add_option("--sigma", atk.sigma, "sff: std-dev of the Gaussian start (kWh)")
      ->capture_default_str();
  s_attack->add_option("--alpha", atk.alpha, "va1: scale factor in (0, 1]")->capture_default_str();
  s_attack->add_option("--u", atk.u, "va2: upper bound of the uniform readings (kWh)")
      ->capture_default_str();
  s_attack->add_option("--normals", atk.normals,
                       "Dataset CSV whose normal vectors feed va1 and the mean-L1 context (kWh)");
  s_attack->add_option("--n", atk.n, "Number of vectors (seeds seed..seed+n-1)")
      ->capture_default_str();
  add_seed(s_attack, atk.seed, "Base seed");
  s_attack->add_option("--out", atk.out, "Report JSON with per-vector details")->required();
  s_attack->add_option("--jobs", atk.jobs, "Worker threads")->capture_default_str();

  SweepArgs sweep;
  auto* s_sweep = app.add_subcommand("sweep", "Run every cell of an experiment plan");
  s_sweep->add_option("--plan", sweep.plan, "Plan JSON (theftbench-plan/1)")->required();
  s_sweep->add_option("--out", sweep.out, "Report file (avg_l1 in kWh)")->required();
  s_sweep->add_option("--format", sweep.format, "Report format: csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  s_sweep->add_option("--json", sweep.json_out, "Also write the JSON report here");
  s_sweep->add_option("--jobs", sweep.jobs, "Worker threads")->capture_default_str();

  ReportArgs rep;
  auto* s_report = app.add_subcommand("report", "Convert a JSON report");
  s_report->add_option("--in", rep.in, "Report JSON")->required();
  s_report->add_option("--format", rep.format, "Output format: csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  s_report->add_option("--out", rep.out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 3;
  }

  try {
    if (s_ingest->parsed()) return cmd_ingest(ingest, err);
    if (s_synth->parsed()) return cmd_synth(synth, err);
    if (s_pollute->parsed()) return cmd_pollute(pollute, err);
    if (s_train->parsed()) return cmd_train(train, err);
    if (s_eval->parsed()) return cmd_eval(eval, out, err);
    if (s_attack->parsed()) return cmd_attack(atk, err);
    if (s_sweep->parsed()) return cmd_sweep(sweep, err);
    if (s_report->parsed()) return cmd_report(rep, out, err);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace theftbench::cli
