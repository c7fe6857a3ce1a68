// End-to-end acceptance run on the synthetic pipeline. Prints one PASS/FAIL
// line per criterion and writes every report under --out.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "theftbench/attack.hpp"
#include "theftbench/dataio.hpp"
#include "theftbench/error.hpp"
#include "theftbench/experiment.hpp"
#include "theftbench/nn/gradcheck.hpp"
#include "theftbench/nn/presets.hpp"
#include "theftbench/nn/serialize.hpp"
#include "theftbench/nn/train.hpp"
#include "theftbench/numfmt.hpp"
#include "theftbench/theftgen.hpp"

namespace fs = std::filesystem;
using namespace theftbench;
using experiment::AttackAlgo;
using experiment::EvaluationReport;
using experiment::ExperimentPlan;

namespace {

// Seeds of the documented default run.
constexpr std::uint64_t kDefenderNormalsSeed = 100;
constexpr std::uint64_t kDefenderPolluteSeed = 101;
constexpr std::uint64_t kTestNormalsSeed = 200;
constexpr std::uint64_t kTestPolluteSeed = 201;
constexpr std::uint64_t kAttackerNormalsSeed = 300;
constexpr std::uint64_t kAttackerPolluteSeed = 301;
constexpr std::uint64_t kAttackBaseSeed = 5000;
constexpr std::size_t kTrainSamples = 20000;
constexpr std::size_t kTestSamples = 4000;
constexpr std::size_t kAttackVectors = 1000;
constexpr std::size_t kRnnEpochCap = 6;

const std::vector<std::string> kDefenders{"f_fnn", "f_rnn", "f_cnn"};

std::map<std::string, std::uint64_t> train_seeds() {
  return {{"f_fnn", 11}, {"f_rnn", 12}, {"f_cnn", 13},
          {"fp_fnn", 21}, {"fp_rnn", 22}, {"fp_cnn", 23}};
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void log(const std::string& msg) { std::cerr << "[acceptance] " << msg << std::endl; }

std::string pct(double x) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(1) << 100.0 * x << "%";
  return s.str();
}

std::string num(double x, int digits = 3) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << x;
  return s.str();
}

struct Verdict {
  int id = 0;
  std::string title;
  bool pass = false;
  std::vector<std::string> details;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<DailyLoadVector> vectors_with(const LabeledDataset& ds, Label label) {
  std::vector<DailyLoadVector> out;
  for (const auto& s : ds.samples) {
    if (s.label == label) out.push_back(s.vector);
  }
  return out;
}

struct Context {
  fs::path out;
  std::size_t jobs = 1;
  bool reuse_models = false;
  LabeledDataset defender_data;
  LabeledDataset attacker_data;
  LabeledDataset test_data;
  std::map<std::string, nn::TrainedModel> models;
  std::map<std::string, double> train_seconds;
};

LabeledDataset make_dataset(std::size_t n, std::uint64_t normals_seed, std::uint64_t pollute_seed,
                            DatasetRole role) {
  const auto normals = dataio::generate_synthetic_normals(n, normals_seed);
  return theftgen::pollute_dataset(normals, pollute_seed, role);
}

nn::TrainConfig train_config(const std::string& name) {
  nn::TrainConfig cfg;
  cfg.seed = train_seeds().at(name);
  if (name.find("rnn") != std::string::npos) cfg.epochs = kRnnEpochCap;
  return cfg;
}

const nn::TrainedModel& model_for(Context& ctx, const std::string& name) {
  if (auto it = ctx.models.find(name); it != ctx.models.end()) return it->second;
  const fs::path file = ctx.out / "models" / (name + ".json");
  if (ctx.reuse_models && fs::exists(file)) {
    log("reusing " + file.string());
    return ctx.models.emplace(name, nn::load_model(file)).first->second;
  }
  const bool attacker = name.rfind("fp_", 0) == 0;
  const auto& data = attacker ? ctx.attacker_data : ctx.defender_data;
  const auto t0 = Clock::now();
  auto model = nn::train_model(nn::preset(name), data, train_config(name), [&](const nn::EpochLog& e) {
    log(name + " epoch " + std::to_string(e.epoch) + " train_loss=" + num(e.train_loss, 4) +
        " val_loss=" + num(e.val_loss, 4) + " val_acc=" + pct(e.val_accuracy) + " (" +
        num(e.seconds, 1) + " s)");
  });
  ctx.train_seconds[name] = seconds_since(t0);
  fs::create_directories(file.parent_path());
  nn::save_model(model, file);
  return ctx.models.emplace(name, std::move(model)).first->second;
}

EvaluationReport sweep(Context& ctx, const std::string& tag, ExperimentPlan plan,
                       const nn::TrainedModel& defender, const nn::TrainedModel* attacker,
                       std::span<const DailyLoadVector> normals, bool details = false,
                       std::size_t jobs = 0) {
  experiment::SweepOptions opts;
  opts.jobs = jobs == 0 ? ctx.jobs : jobs;
  opts.keep_details = details;
  opts.log = [&](const std::string& m) { log(tag + ": " + m); };
  auto report = experiment::run_sweep(plan, defender, attacker, normals, opts);
  experiment::emit_report(report, ctx.out / "reports" / (tag + ".csv"), experiment::ReportFormat::Csv);
  experiment::emit_report(report, ctx.out / "reports" / (tag + ".json"),
                          experiment::ReportFormat::Json);
  return report;
}

ExperimentPlan base_plan(const std::string& defender) {
  ExperimentPlan plan;
  plan.defender = defender + ".json";
  plan.n_vectors = kAttackVectors;
  plan.base_seed = kAttackBaseSeed;
  return plan;
}

// 1 -----------------------------------------------------------------------

Verdict gradient_correctness() {
  Verdict v{1, "gradient correctness"};
  const auto t0 = Clock::now();
  bool ok = true;
  Rng rng(derive_seed(7, 1));
  std::uniform_real_distribution<double> reading(0.0, 2.0);
  for (const auto& name : nn::preset_names()) {
    const auto arch = nn::preset(name);
    nn::Network net(arch);
    const nn::TrainedModel model(arch, net.init_params(derive_seed(7, 2)));
    double worst = 0.0;
    std::size_t checked = 0;
    std::size_t kinks = 0;
    for (int i = 0; i < 20; ++i) {
      Readings r;
      for (auto& x : r) x = reading(rng);
      const Label y = i % 2 == 0 ? Label::Normal : Label::Theft;
      const auto res = nn::finite_difference_check(model, DailyLoadVector(r), y, 1e-4);
      worst = std::max(worst, res.max_relative_error);
      checked += res.checked;
      kinks += res.kinks;
    }
    const bool pass = worst < 1e-4 && checked > 0;
    ok = ok && pass;
    v.details.push_back(nn::display_name(name) + ": max rel err " + format_double(worst) + " over " +
                        std::to_string(checked) + " coords (" + std::to_string(kinks) +
                        " kink coords skipped)");
  }
  const double secs = seconds_since(t0);
  v.details.push_back("runtime " + num(secs, 1) + " s (limit 120 s)");
  v.pass = ok && secs < 120.0;
  return v;
}

// 2 -----------------------------------------------------------------------

Verdict theft_generator() {
  Verdict v{2, "theft-generator suite"};
  const auto t0 = Clock::now();
  Rng rng(derive_seed(7, 3));
  std::uniform_real_distribution<double> reading(0.0, 3.0);
  std::map<std::string, std::size_t> failures;
  for (int i = 0; i < 1000; ++i) {
    Readings r;
    for (auto& x : r) x = reading(rng);
    const DailyLoadVector m(r);
    const double mean = m.mean();
    const auto seed = static_cast<std::uint64_t>(i);
    auto nonneg = [](const DailyLoadVector& o) {
      return std::all_of(o.readings().begin(), o.readings().end(), [](double x) { return x >= 0.0; });
    };

    const auto s1 = theftgen::draw_scenario(theftgen::ScenarioKind::H1, seed);
    const auto h1 = theftgen::apply_scenario(s1, m, seed);
    const auto h2 = theftgen::apply_scenario({theftgen::ScenarioKind::H2}, m, seed);
    const auto s3 = theftgen::draw_scenario(theftgen::ScenarioKind::H3, seed);
    const auto h3 = theftgen::apply_scenario(s3, m, seed);
    const auto h4 = theftgen::apply_scenario({theftgen::ScenarioKind::H4}, m, seed);
    const auto h5 = theftgen::apply_scenario({theftgen::ScenarioKind::H5}, m, seed);
    const auto h6 = theftgen::apply_scenario({theftgen::ScenarioKind::H6}, m, seed);
    const auto h6h6 = theftgen::apply_scenario({theftgen::ScenarioKind::H6}, h6, seed);

    for (std::size_t t = 0; t < kSlotsPerDay; ++t) {
      if (h1[t] != s1.alpha * m[t]) ++failures["h1"];
      if (h2[t] < 0.1 * m[t] || h2[t] > 0.8 * m[t]) ++failures["h2"];
      const bool inside = t >= s3.t_start && t <= s3.t_end;
      if (h3[t] != (inside ? 0.0 : m[t])) ++failures["h3"];
      if (std::abs(h4[t] - mean) > 1e-12 * std::max(1.0, mean)) ++failures["h4"];
      if (h5[t] < 0.1 * mean || h5[t] > 0.8 * mean) ++failures["h5"];
    }
    if (!(h6h6 == m)) ++failures["h6"];
    for (const auto* o : {&h1, &h2, &h3, &h4, &h5, &h6}) {
      if (!nonneg(*o)) ++failures["nonneg"];
    }
  }
  const double secs = seconds_since(t0);
  std::size_t total = 0;
  for (const auto& [k, n] : failures) {
    total += n;
    v.details.push_back(k + ": " + std::to_string(n) + " violations");
  }
  v.details.push_back("1000 vectors x 6 scenarios, " + std::to_string(total) + " violations");
  v.details.push_back("runtime " + num(secs, 2) + " s (limit 10 s)");
  v.pass = total == 0 && secs < 10.0;
  return v;
}

// 3 -----------------------------------------------------------------------

Verdict defender_training(Context& ctx, std::map<std::string, nn::Evaluation>& held_out) {
  Verdict v{3, "defender training"};
  bool ok = true;
  double total = 0.0;
  bool timed = true;
  for (const auto& name : kDefenders) {
    const auto& model = model_for(ctx, name);
    const auto ev = nn::evaluate_model(model, ctx.test_data);
    held_out[name] = ev;
    const bool pass = ev.accuracy >= 0.8 && ev.fpr <= 0.2;
    ok = ok && pass;
    std::string line = nn::display_name(name) + ": held-out accuracy " + pct(ev.accuracy) +
                       ", FPR " + pct(ev.fpr) + ", epochs kept " +
                       std::to_string(model.meta().epochs);
    if (auto it = ctx.train_seconds.find(name); it != ctx.train_seconds.end()) {
      total += it->second;
      line += ", trained in " + num(it->second, 1) + " s";
    } else {
      timed = false;
    }
    v.details.push_back(line);
  }
  v.details.push_back(std::to_string(ctx.defender_data.size()) + " training samples, " +
                      std::to_string(ctx.test_data.size()) + " held-out samples");
  if (timed) {
    v.details.push_back("training runtime " + num(total, 1) + " s (limit 1200 s)");
  } else {
    v.details.push_back("training runtime not measured (models reused)");
  }
  v.pass = ok && (!timed || total < 1200.0);
  return v;
}

// 4 and 8 ---------------------------------------------------------------

struct LambdaSweep {
  EvaluationReport report;
  double seconds_at_lambda10 = 0.0;
};

Verdict white_box(Context& ctx, std::map<std::string, LambdaSweep>& sweeps, double& normal_l1) {
  Verdict v{4, "white-box SearchFromFree"};
  normal_l1 = mean_l1(ctx.defender_data, Label::Normal);
  bool ok = true;
  double runtime = 0.0;
  for (const auto& name : kDefenders) {
    const auto& model = model_for(ctx, name);
    auto plan = base_plan(name);
    plan.search.lambda = {0.1, 1.0, 10.0};
    auto report = sweep(ctx, "whitebox_" + name, plan, model, nullptr, {}, true);
    const auto& cell = report.cells.back();
    runtime += cell.runtime_seconds;
    const bool pass = cell.detection_accuracy <= 0.2 && cell.avg_l1 <= 0.1 * normal_l1;
    ok = ok && pass;
    v.details.push_back(nn::display_name(name) + ": detection " + pct(cell.detection_accuracy) +
                        ", mean L1 " + num(cell.avg_l1) + " kWh (" +
                        pct(cell.avg_l1 / normal_l1) + " of normal), local success " +
                        pct(cell.success_local_rate.value_or(0.0)));
    sweeps[name] = {std::move(report), cell.runtime_seconds};
  }
  v.details.push_back("mean normal L1 " + num(normal_l1, 2) + " kWh; step=14 size=0.01 lambda=10 sigma=0.1 n=1000");
  v.details.push_back("attack runtime " + num(runtime, 1) + " s (limit 600 s)");
  v.pass = ok && runtime < 600.0;
  return v;
}

Verdict lambda_trend(const std::map<std::string, LambdaSweep>& sweeps) {
  Verdict v{8, "lambda-profit trend"};
  bool ok = true;
  for (const auto& name : kDefenders) {
    const auto& cells = sweeps.at(name).report.cells;
    std::string line = nn::display_name(name) + ": mean L1";
    for (const auto& c : cells) line += " " + num(c.avg_l1) ;
    line += " kWh at lambda 0.1/1/10";
    bool pass = true;
    for (std::size_t k = 1; k < cells.size(); ++k) {
      const auto& a = cells[k - 1].details;
      const auto& b = cells[k].details;
      const double n = static_cast<double>(a.size());
      double mean = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) mean += b[i].l1 - a[i].l1;
      mean /= n;
      double var = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) var += std::pow(b[i].l1 - a[i].l1 - mean, 2);
      const double se = std::sqrt(var / (n - 1.0) / n);
      // Paired over shared seeds.
      pass = pass && mean <= 2.0 * se;
      line += "; step " + std::to_string(k) + " diff " + num(mean, 4) + " (2se " + num(2.0 * se, 4) + ")";
    }
    ok = ok && pass;
    v.details.push_back(line);
  }
  v.details.push_back(std::to_string(kAttackVectors) + " shared seeds per point");
  v.pass = ok;
  return v;
}

// 5 -----------------------------------------------------------------------

Verdict black_box(Context& ctx, const std::map<std::string, nn::Evaluation>& held_out) {
  Verdict v{5, "black-box transferability"};
  bool ok = true;
  for (const auto& name : kDefenders) {
    const std::string attacker_name = "fp_" + name.substr(2);
    const auto& attacker = model_for(ctx, attacker_name);
    const auto& defender = model_for(ctx, name);
    auto plan = base_plan(name);
    plan.attacker = attacker_name + ".json";
    if (name == "f_cnn") {
      plan.search.size = {0.1};
      plan.search.lambda = {0.0};
      plan.search.step = {18};
    }
    const auto report = sweep(ctx, "blackbox_" + name, plan, defender, &attacker, {});
    const auto& cell = report.cells.front();
    const auto& ev = held_out.at(name);
    const double vanilla = static_cast<double>(ev.true_positive) /
                           static_cast<double>(ev.true_positive + ev.false_negative);
    const bool pass = cell.detection_accuracy <= 0.6 && cell.detection_accuracy <= vanilla - 0.3;
    ok = ok && pass;
    const auto& atk_ev = nn::evaluate_model(attacker, ctx.test_data);
    v.details.push_back(nn::display_name(attacker_name) + " -> " + nn::display_name(name) +
                        ": detection " + pct(cell.detection_accuracy) + " vs vanilla theft " +
                        pct(vanilla) + ", mean L1 " + num(cell.avg_l1) + " kWh, local success " +
                        pct(cell.success_local_rate.value_or(0.0)) + ", attacker held-out acc " +
                        pct(atk_ev.accuracy));
  }
  v.details.push_back("attacker data seeds " + std::to_string(kAttackerNormalsSeed) + "/" +
                      std::to_string(kAttackerPolluteSeed) + "; CNN cell size=0.1 lambda=0 step=18");
  v.pass = ok;
  return v;
}

// 6 and 7 ---------------------------------------------------------------

Verdict va1_trend(Context& ctx) {
  Verdict v{6, "VA1 trend"};
  const auto normals = vectors_with(ctx.test_data, Label::Normal);
  bool ok = true;
  for (const auto& name : kDefenders) {
    auto plan = base_plan(name);
    plan.algo = AttackAlgo::ScaleNormal;
    plan.normals = "heldout_normals.csv";
    const auto report = sweep(ctx, "va1_" + name, plan, model_for(ctx, name), nullptr, normals);
    std::string line = nn::display_name(name) + ": detection";
    bool pass = true;
    for (std::size_t i = 0; i < report.cells.size(); ++i) {
      line += " " + pct(report.cells[i].detection_accuracy);
      for (std::size_t j = i + 1; j < report.cells.size(); ++j) {
        pass = pass && report.cells[j].detection_accuracy <= report.cells[i].detection_accuracy + 0.05;
      }
    }
    ok = ok && pass;
    v.details.push_back(line + " at alpha 0.1..0.9");
  }
  v.pass = ok;
  return v;
}

Verdict va2_trend(Context& ctx) {
  Verdict v{7, "VA2 trend"};
  bool ok = true;
  for (const auto& name : kDefenders) {
    auto plan = base_plan(name);
    plan.algo = AttackAlgo::Uniform;
    const auto report = sweep(ctx, "va2_" + name, plan, model_for(ctx, name), nullptr, {});
    std::string line = nn::display_name(name) + ": detection";
    double lo = 1.0;
    double hi = 0.0;
    for (const auto& c : report.cells) {
      line += " " + pct(c.detection_accuracy);
      lo = std::min(lo, c.detection_accuracy);
      hi = std::max(hi, c.detection_accuracy);
    }
    line += " at u 0.25/0.5/1/2/4 kWh";
    bool pass;
    if (name == "f_fnn") {
      pass = hi - lo >= 0.2;
      line += " (needs a drop of >= 20 points, got " + num(100.0 * (hi - lo), 1) + ")";
    } else {
      pass = lo >= 0.8;
      line += " (needs >= 80% everywhere)";
    }
    ok = ok && pass;
    v.details.push_back(line);
  }
  v.pass = ok;
  return v;
}

// 9 -----------------------------------------------------------------------

Verdict determinism(Context& ctx) {
  Verdict v{9, "determinism"};
  bool ok = true;

  std::ostringstream a, b;
  dataio::write_dataset(make_dataset(2000, kDefenderNormalsSeed, kDefenderPolluteSeed,
                                     DatasetRole::Defender), a);
  dataio::write_dataset(make_dataset(2000, kDefenderNormalsSeed, kDefenderPolluteSeed,
                                     DatasetRole::Defender), b);
  const bool data_same = a.str() == b.str();
  ok = ok && data_same;
  v.details.push_back(std::string("regenerated polluted dataset ") + (data_same ? "identical" : "DIFFERS"));

  const auto retrained = nn::train_model(nn::preset("f_fnn"), ctx.defender_data, train_config("f_fnn"));
  const bool model_same =
      nn::model_to_json(retrained).dump() == nn::model_to_json(model_for(ctx, "f_fnn")).dump();
  ok = ok && model_same;
  v.details.push_back(std::string("retrained f_FNN ") + (model_same ? "identical" : "DIFFERS"));

  const std::size_t other_jobs = ctx.jobs == 1 ? 4 : 1;
  for (const auto& name : kDefenders) {
    auto plan = base_plan(name);
    plan.search.lambda = {0.1, 1.0, 10.0};
    sweep(ctx, "repeat_whitebox_" + name, plan, model_for(ctx, name), nullptr, {}, true, other_jobs);
    bool same = true;
    for (const char* ext : {".csv", ".json"}) {
      same = same && slurp(ctx.out / "reports" / ("whitebox_" + name + ext)) ==
                         slurp(ctx.out / "reports" / ("repeat_whitebox_" + name + ext));
    }
    ok = ok && same;
    v.details.push_back("white-box " + nn::display_name(name) + " report rerun with jobs=" +
                        std::to_string(other_jobs) + ": " + (same ? "byte-identical" : "DIFFERS"));
  }
  const auto normals = vectors_with(ctx.test_data, Label::Normal);
  auto plan = base_plan("f_cnn");
  plan.algo = AttackAlgo::ScaleNormal;
  plan.normals = "heldout_normals.csv";
  sweep(ctx, "repeat_va1_f_cnn", plan, model_for(ctx, "f_cnn"), nullptr, normals);
  const bool va1_same = slurp(ctx.out / "reports" / "va1_f_cnn.csv") ==
                        slurp(ctx.out / "reports" / "repeat_va1_f_cnn.csv");
  ok = ok && va1_same;
  v.details.push_back(std::string("VA1 f_CNN report rerun: ") + (va1_same ? "byte-identical" : "DIFFERS"));
  v.pass = ok;
  return v;
}

// 10 ----------------------------------------------------------------------

Verdict degenerate_cases() {
  Verdict v{10, "degenerate cases"};
  bool ok = true;
  auto check = [&](bool cond, const std::string& what) {
    ok = ok && cond;
    v.details.push_back(what + ": " + (cond ? "ok" : "FAILED"));
  };

  const nn::ModelArchitecture linear{"linear", {48}, {nn::DenseSpec{2, nn::Activation::Softmax}}};
  auto constant = [&](double normal, double theft) {
    nn::Params p{{nn::Tensor({2, 48}), nn::Tensor({2}, {normal, theft})}};
    return nn::TrainedModel(linear, p);
  };

  const auto f = nn::preset("f_rnn");
  nn::Network net(f);
  const nn::TrainedModel rnn(f, net.init_params(1));
  bool step0 = true;
  for (std::uint64_t s = 0; s < 20; ++s) {
    attack::AttackConfig cfg;
    cfg.step = 0;
    cfg.seed = s;
    const auto r = attack::search_from_free(rnn, cfg);
    step0 = step0 && r.iterations_used == 0 && r.adversarial == attack::initial_point(cfg.sigma, s);
  }
  check(step0, "step=0 returns the projected initial point (20 seeds)");

  bool normal_model = true;
  bool stationary = true;
  for (std::uint64_t s = 0; s < 20; ++s) {
    attack::AttackConfig cfg;
    cfg.seed = s;
    const auto r = attack::search_from_free(constant(5.0, -5.0), cfg);
    normal_model = normal_model && r.success_local && r.iterations_used == 0 &&
                   r.adversarial == attack::initial_point(cfg.sigma, s);
    cfg.lambda = 0.0;
    const auto z = attack::search_from_free(constant(-5.0, 5.0), cfg);
    stationary = stationary && !z.success_local && z.iterations_used == 0 &&
                 z.adversarial == attack::initial_point(cfg.sigma, s);
  }
  check(normal_model, "constant-Normal classifier returns the start with success");
  check(stationary, "zero gradient terminates at the start without success");

  Rng rng(derive_seed(7, 4));
  std::normal_distribution<double> d(0.0, 1.0);
  bool idempotent = true;
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> x(kSlotsPerDay);
    for (auto& e : x) e = d(rng);
    const auto once = attack::project_nonnegative(x);
    idempotent = idempotent && attack::project_nonnegative(once.readings()) == once;
  }
  check(idempotent, "projection is idempotent (1000 vectors)");
  v.pass = ok;
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"theftbench acceptance run"};
  fs::path out = "acceptance_out";
  std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
  bool reuse = false;
  bool strict = false;
  app.add_option("--out", out, "Directory for models and reports")->capture_default_str();
  app.add_option("--jobs", jobs, "Worker threads for attacks")->capture_default_str();
  app.add_flag("--reuse-models", reuse, "Load models saved by an earlier run instead of training");
  app.add_flag("--strict", strict, "Exit 1 when any criterion fails");
  CLI11_PARSE(app, argc, argv);

  try {
    const auto t0 = Clock::now();
    Context ctx;
    ctx.out = out;
    ctx.jobs = jobs;
    ctx.reuse_models = reuse;
    fs::create_directories(out / "reports");

    std::vector<Verdict> verdicts;
    verdicts.push_back(gradient_correctness());
    verdicts.push_back(theft_generator());

    log("generating datasets");
    ctx.defender_data =
        make_dataset(kTrainSamples, kDefenderNormalsSeed, kDefenderPolluteSeed, DatasetRole::Defender);
    ctx.attacker_data =
        make_dataset(kTrainSamples, kAttackerNormalsSeed, kAttackerPolluteSeed, DatasetRole::Attacker);
    ctx.test_data = make_dataset(kTestSamples, kTestNormalsSeed, kTestPolluteSeed, DatasetRole::Defender);

    std::map<std::string, nn::Evaluation> held_out;
    verdicts.push_back(defender_training(ctx, held_out));
    std::map<std::string, LambdaSweep> sweeps;
    double normal_l1 = 0.0;
    verdicts.push_back(white_box(ctx, sweeps, normal_l1));
    verdicts.push_back(black_box(ctx, held_out));
    verdicts.push_back(va1_trend(ctx));
    verdicts.push_back(va2_trend(ctx));
    verdicts.push_back(lambda_trend(sweeps));
    verdicts.push_back(determinism(ctx));
    verdicts.push_back(degenerate_cases());

    std::sort(verdicts.begin(), verdicts.end(), [](const Verdict& a, const Verdict& b) { return a.id < b.id; });
    std::size_t passed = 0;
    std::ostringstream summary;
    for (const auto& v : verdicts) {
      passed += v.pass;
      summary << (v.pass ? "PASS" : "FAIL") << "  criterion " << v.id << ": " << v.title << "\n";
      for (const auto& d : v.details) summary << "        " << d << "\n";
    }
    summary << passed << "/" << verdicts.size() << " criteria passed in " << num(seconds_since(t0), 0)
            << " s\n";
    std::cout << summary.str() << std::flush;
    std::ofstream(out / "summary.txt") << summary.str();
    return strict && passed != verdicts.size() ? 1 : 0;
  } catch (const std::exception& e) {
    std::cerr << "acceptance run aborted: " << e.what() << std::endl;
    return 2;
  }
}
