#include "theftbench/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "theftbench/dataio.hpp"
#include "theftbench/error.hpp"
#include "theftbench/nn/serialize.hpp"
#include "theftbench/numfmt.hpp"

namespace theftbench::experiment {

using json = nlohmann::ordered_json;

namespace {

template <typename T>
void require_non_empty(const std::vector<T>& grid, const char* name) {
  if (grid.empty()) throw ValidationError(std::string("plan grid '") + name + "' is empty");
}

void validate_grids(const ExperimentPlan& plan) {
  if (plan.n_vectors == 0) throw ValidationError("plan n_vectors must be at least 1");
  switch (plan.algo) {
    case AttackAlgo::SearchFromFree:
      require_non_empty(plan.search.step, "step");
      require_non_empty(plan.search.size, "size");
      require_non_empty(plan.search.lambda, "lambda");
      require_non_empty(plan.search.sigma, "sigma");
      for (double v : plan.search.size) attack::AttackConfig{.size = v}.validate();
      for (double v : plan.search.lambda) attack::AttackConfig{.lambda = v}.validate();
      for (double v : plan.search.sigma) attack::AttackConfig{.sigma = v}.validate();
      break;
    case AttackAlgo::ScaleNormal:
      require_non_empty(plan.alpha, "alpha");
      for (double a : plan.alpha) {
        if (!(a > 0.0 && a <= 1.0)) throw DomainError("VA1 alpha must lie in (0, 1]");
      }
      break;
    case AttackAlgo::Uniform:
      require_non_empty(plan.u, "u");
      for (double u : plan.u) {
        if (!(u > 0.0 && std::isfinite(u))) throw DomainError("VA2 bound u must be positive");
      }
      break;
  }
}

std::string params_string(const std::vector<CellParam>& params) {
  std::string s;
  for (const auto& p : params) {
    if (!s.empty()) s += ';';
    s += p.name + '=' + format_double(p.value);
  }
  return s;
}

double param(const Cell& cell, const std::string& name) {
  for (const auto& p : cell.params) {
    if (p.name == name) return p.value;
  }
  throw ValidationError("cell " + std::to_string(cell.id) + " has no parameter '" + name + "'");
}

template <typename T>
std::vector<T> grid_field(const json& attack, const char* key, const std::vector<T>& fallback) {
  if (!attack.contains(key)) return fallback;
  const auto& v = attack.at(key);
  if (!v.is_array()) throw SchemaError(std::string("plan attack.") + key + " must be an array");
  std::vector<T> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw SchemaError(std::string("plan attack.") + key + " must hold numbers");
    if constexpr (std::is_integral_v<T>) {
      if (!x.is_number_unsigned()) {
        throw SchemaError(std::string("plan attack.") + key + " must hold non-negative integers");
      }
    }
    out.push_back(x.get<T>());
  }
  return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return {};
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

json params_to_json(const std::vector<CellParam>& params) {
  json j = json::object();
  for (const auto& p : params) j[p.name] = p.value;
  return j;
}

json detail_to_json(const VectorDetail& d) {
  json j;
  j["seed"] = d.seed;
  j["defender_label"] = static_cast<int>(d.defender_label);
  j["l1"] = d.l1;
  j["success_local"] = d.success_local ? json(*d.success_local) : json(nullptr);
  j["iterations_used"] = d.iterations_used ? json(*d.iterations_used) : json(nullptr);
  j["readings"] = d.readings;
  return j;
}

VectorDetail detail_from_json(const json& j) {
  VectorDetail d;
  d.seed = j.at("seed").get<std::uint64_t>();
  const int label = j.at("defender_label").get<int>();
  if (label != 0 && label != 1) throw SchemaError("defender_label must be 0 or 1");
  d.defender_label = static_cast<Label>(label);
  d.l1 = j.at("l1").get<double>();
  if (!j.at("success_local").is_null()) d.success_local = j.at("success_local").get<bool>();
  if (!j.at("iterations_used").is_null()) {
    d.iterations_used = j.at("iterations_used").get<std::size_t>();
  }
  const auto& r = j.at("readings");
  if (!r.is_array() || r.size() != kSlotsPerDay) throw SchemaError("readings must hold 48 values");
  for (std::size_t i = 0; i < kSlotsPerDay; ++i) d.readings[i] = r[i].get<double>();
  return d;
}

json cell_to_json(const CellRecord& c) {
  json j;
  j["cell_id"] = c.cell_id;
  j["attack"] = to_string(c.algo);
  j["params"] = params_to_json(c.params);
  j["detection_accuracy"] = c.detection_accuracy;
  j["avg_l1"] = c.avg_l1;
  j["success_local_rate"] = c.success_local_rate ? json(*c.success_local_rate) : json(nullptr);
  j["n"] = c.n;
  if (!c.details.empty()) {
    json vs = json::array();
    for (const auto& d : c.details) vs.push_back(detail_to_json(d));
    j["vectors"] = std::move(vs);
  }
  return j;
}

CellRecord cell_from_json(const json& j) {
  CellRecord c;
  c.cell_id = j.at("cell_id").get<std::size_t>();
  c.algo = algo_from_string(j.at("attack").get<std::string>());
  for (const auto& [name, value] : j.at("params").items()) {
    c.params.push_back({name, value.get<double>()});
  }
  c.detection_accuracy = j.at("detection_accuracy").get<double>();
  c.avg_l1 = j.at("avg_l1").get<double>();
  if (!j.at("success_local_rate").is_null()) {
    c.success_local_rate = j.at("success_local_rate").get<double>();
  }
  c.n = j.at("n").get<std::size_t>();
  if (j.contains("vectors")) {
    for (const auto& d : j.at("vectors")) c.details.push_back(detail_from_json(d));
  }
  return c;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t hash_vectors(std::span<const DailyLoadVector> vs, std::uint64_t h) {
  for (const auto& v : vs) {
    for (double x : v.readings()) h = fnv1a(format_double(x) + ',', h);
  }
  return h;
}

std::vector<DailyLoadVector> normal_vectors(const LabeledDataset& ds) {
  std::vector<DailyLoadVector> out;
  for (const auto& s : ds.samples) {
    if (s.label == Label::Normal) out.push_back(s.vector);
  }
  return out;
}

std::optional<CellRecord> read_cache(const std::filesystem::path& file, bool need_details) {
  std::ifstream in(file, std::ios::binary);
  if (!in) return std::nullopt;
  try {
    CellRecord c = cell_from_json(json::parse(in));
    if (need_details && c.details.empty()) return std::nullopt;
    return c;
  } catch (const std::exception&) {
    // Corrupt or foreign cache entries are recomputed.
    return std::nullopt;
  }
}

void write_cache(const std::filesystem::path& file, const CellRecord& c) {
  const auto tmp = file.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write cache entry " + tmp);
    out << cell_to_json(c).dump() << '\n';
    if (!out) throw IoError("write failed for cache entry " + tmp);
  }
  std::filesystem::rename(tmp, file);
}

}  // namespace

std::string to_string(AttackAlgo a) {
  switch (a) {
    case AttackAlgo::SearchFromFree: return "sff";
    case AttackAlgo::ScaleNormal: return "va1";
    case AttackAlgo::Uniform: return "va2";
  }
  return "?";
}

AttackAlgo algo_from_string(const std::string& s) {
  if (s == "sff") return AttackAlgo::SearchFromFree;
  if (s == "va1") return AttackAlgo::ScaleNormal;
  if (s == "va2") return AttackAlgo::Uniform;
  throw ValidationError("unknown attack '" + s + "' (expected sff, va1 or va2)");
}

void ExperimentPlan::validate() const {
  if (defender.empty()) throw ValidationError("plan needs a defender model");
  if (algo == AttackAlgo::ScaleNormal && normals.empty()) {
    throw ValidationError("VA1 plans need a normals dataset");
  }
  validate_grids(*this);
}

json plan_to_json(const ExperimentPlan& plan) {
  json j;
  j["version"] = kPlanFormatVersion;
  j["defender"] = plan.defender.generic_string();
  if (!plan.white_box()) j["attacker"] = plan.attacker.generic_string();
  json a;
  a["algo"] = to_string(plan.algo);
  switch (plan.algo) {
    case AttackAlgo::SearchFromFree:
      a["step"] = plan.search.step;
      a["size"] = plan.search.size;
      a["lambda"] = plan.search.lambda;
      a["sigma"] = plan.search.sigma;
      break;
    case AttackAlgo::ScaleNormal: a["alpha"] = plan.alpha; break;
    case AttackAlgo::Uniform: a["u"] = plan.u; break;
  }
  j["attack"] = std::move(a);
  j["n_vectors"] = plan.n_vectors;
  j["base_seed"] = plan.base_seed;
  if (!plan.normals.empty()) j["normals"] = plan.normals.generic_string();
  if (!plan.cache_dir.empty()) j["cache_dir"] = plan.cache_dir.generic_string();
  return j;
}

ExperimentPlan plan_from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw SchemaError("plan must be a JSON object");
  if (j.value("version", std::string{}) != kPlanFormatVersion) {
    throw SchemaError(std::string("plan version must be '") + kPlanFormatVersion + "'");
  }
  static const std::vector<std::string> known = {"version",  "defender",  "attacker",
                                                 "attack",   "n_vectors", "base_seed",
                                                 "normals",  "cache_dir"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw SchemaError("unknown plan field '" + key + "'");
    }
  }
  ExperimentPlan plan;
  try {
    plan.defender = resolve(base_dir, j.at("defender").get<std::string>());
    plan.attacker = resolve(base_dir, j.value("attacker", std::string{}));
    plan.normals = resolve(base_dir, j.value("normals", std::string{}));
    plan.cache_dir = resolve(base_dir, j.value("cache_dir", std::string{}));
    if (j.contains("n_vectors")) {
      if (!j.at("n_vectors").is_number_unsigned()) {
        throw SchemaError("plan n_vectors must be a non-negative integer");
      }
      plan.n_vectors = j.at("n_vectors").get<std::size_t>();
    }
    if (j.contains("base_seed")) {
      if (!j.at("base_seed").is_number_unsigned()) {
        throw SchemaError("plan base_seed must be a non-negative integer");
      }
      plan.base_seed = j.at("base_seed").get<std::uint64_t>();
    }
    const json& a = j.at("attack");
    plan.algo = algo_from_string(a.at("algo").get<std::string>());
    plan.search.step = grid_field(a, "step", plan.search.step);
    plan.search.size = grid_field(a, "size", plan.search.size);
    plan.search.lambda = grid_field(a, "lambda", plan.search.lambda);
    plan.search.sigma = grid_field(a, "sigma", plan.search.sigma);
    plan.alpha = grid_field(a, "alpha", plan.alpha);
    plan.u = grid_field(a, "u", plan.u);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed plan: ") + e.what());
  }
  plan.validate();
  return plan;
}

ExperimentPlan load_plan(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read plan " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("plan " + path.string() + " is not valid JSON: " + e.what());
  }
  return plan_from_json(j, path.parent_path());
}

std::vector<Cell> expand_cells(const ExperimentPlan& plan) {
  validate_grids(plan);
  std::vector<Cell> cells;
  auto add = [&](std::vector<CellParam> params) {
    cells.push_back({cells.size(), plan.algo, std::move(params)});
  };
  switch (plan.algo) {
    case AttackAlgo::SearchFromFree:
      for (std::size_t step : plan.search.step) {
        for (double size : plan.search.size) {
          for (double lambda : plan.search.lambda) {
            for (double sigma : plan.search.sigma) {
              add({{"step", static_cast<double>(step)},
                   {"size", size},
                   {"lambda", lambda},
                   {"sigma", sigma}});
            }
          }
        }
      }
      break;
    case AttackAlgo::ScaleNormal:
      for (double a : plan.alpha) add({{"alpha", a}});
      break;
    case AttackAlgo::Uniform:
      for (double u : plan.u) add({{"u", u}});
      break;
  }
  return cells;
}

Metrics compute_metrics(std::span<const Label> predictions,
                        std::span<const DailyLoadVector> vectors) {
  if (predictions.empty()) throw SizeError("metrics need at least one vector");
  if (predictions.size() != vectors.size()) {
    throw SizeError("one prediction per vector required");
  }
  std::size_t theft = 0;
  double l1 = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    theft += predictions[i] == Label::Theft ? 1 : 0;
    l1 += vectors[i].l1();
  }
  const auto n = static_cast<double>(predictions.size());
  return {static_cast<double>(theft) / n, l1 / n};
}

AttackGenerator search_generator(const nn::TrainedModel& attacker, attack::AttackConfig cfg,
                                 std::size_t jobs) {
  cfg.validate();
  return [&attacker, cfg, jobs](std::span<const std::uint64_t> seeds) {
    auto results = attack::search_from_free_batch(attacker, cfg, seeds, jobs);
    GeneratedBatch b;
    b.vectors.reserve(results.size());
    for (auto& r : results) {
      b.success_local.push_back(r.success_local);
      b.iterations_used.push_back(r.iterations_used);
      b.vectors.push_back(std::move(r.adversarial));
    }
    return b;
  };
}

AttackGenerator scale_generator(std::vector<DailyLoadVector> sources, double alpha) {
  if (sources.empty()) throw SizeError("VA1 needs at least one source vector");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("VA1 alpha must lie in (0, 1]");
  return [sources = std::move(sources), alpha](std::span<const std::uint64_t> seeds) {
    GeneratedBatch b;
    b.vectors.reserve(seeds.size());
    for (std::uint64_t s : seeds) {
      b.vectors.push_back(attack::vanilla_scale(sources[s % sources.size()], alpha));
    }
    return b;
  };
}

AttackGenerator uniform_generator(double u) {
  if (!(u > 0.0 && std::isfinite(u))) throw DomainError("VA2 bound u must be positive");
  return [u](std::span<const std::uint64_t> seeds) {
    GeneratedBatch b;
    b.vectors.reserve(seeds.size());
    for (std::uint64_t s : seeds) b.vectors.push_back(attack::vanilla_uniform(u, s));
    return b;
  };
}

CellRecord run_attack_batch(const nn::TrainedModel& defender, const AttackGenerator& generator,
                            std::size_t n, std::uint64_t base_seed, bool keep_details) {
  if (n == 0) throw SizeError("attack batch needs n >= 1");
  const auto start = std::chrono::steady_clock::now();
  std::vector<std::uint64_t> seeds(n);
  for (std::size_t i = 0; i < n; ++i) seeds[i] = base_seed + i;
  const GeneratedBatch batch = generator(seeds);
  if (batch.vectors.size() != n) {
    throw SizeError("generator returned " + std::to_string(batch.vectors.size()) +
                    " vectors for " + std::to_string(n) + " seeds");
  }
  const bool searched = !batch.success_local.empty();
  if (searched && (batch.success_local.size() != n || batch.iterations_used.size() != n)) {
    throw SizeError("generator success flags do not match its vectors");
  }
  const auto predictions = defender.classify(batch.vectors);
  const Metrics m = compute_metrics(predictions, batch.vectors);

  CellRecord rec;
  rec.detection_accuracy = m.detection_accuracy;
  rec.avg_l1 = m.avg_l1;
  rec.n = n;
  if (searched) {
    std::size_t ok = 0;
    for (bool s : batch.success_local) ok += s ? 1 : 0;
    rec.success_local_rate = static_cast<double>(ok) / static_cast<double>(n);
  }
  if (keep_details) {
    rec.details.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      VectorDetail d;
      d.seed = seeds[i];
      d.defender_label = predictions[i];
      d.l1 = batch.vectors[i].l1();
      if (searched) {
        d.success_local = batch.success_local[i];
        d.iterations_used = batch.iterations_used[i];
      }
      d.readings = batch.vectors[i].readings();
      rec.details.push_back(d);
    }
  }
  rec.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

EvaluationReport run_sweep(const ExperimentPlan& plan, const SweepOptions& options) {
  plan.validate();
  const nn::TrainedModel defender = nn::load_model(plan.defender);
  std::optional<nn::TrainedModel> attacker;
  if (!plan.white_box()) attacker = nn::load_model(plan.attacker);
  std::vector<DailyLoadVector> normals;
  if (!plan.normals.empty()) normals = normal_vectors(dataio::load_dataset(plan.normals));
  return run_sweep(plan, defender, attacker ? &*attacker : nullptr, normals, options);
}

EvaluationReport run_sweep(const ExperimentPlan& plan, const nn::TrainedModel& defender,
                           const nn::TrainedModel* attacker,
                           std::span<const DailyLoadVector> normals,
                           const SweepOptions& options) {
  validate_grids(plan);
  if (plan.algo == AttackAlgo::ScaleNormal && normals.empty()) {
    throw ValidationError("VA1 needs at least one normal source vector");
  }
  const nn::TrainedModel& local = attacker != nullptr ? *attacker : defender;
  auto log = [&](const std::string& msg) {
    if (options.log) options.log(msg);
  };

  EvaluationReport report;
  report.config = plan_to_json(plan);
  report.config.erase("cache_dir");
  report.config["mode"] = attacker != nullptr ? "black-box" : "white-box";
  if (!normals.empty()) {
    double total = 0.0;
    for (const auto& v : normals) total += v.l1();
    report.normal_avg_l1 = total / static_cast<double>(normals.size());
  }

  std::uint64_t context = 0;
  if (!plan.cache_dir.empty()) {
    std::filesystem::create_directories(plan.cache_dir);
    std::string key = to_string(plan.algo) + '|' + std::to_string(plan.n_vectors) + '|' +
                      std::to_string(plan.base_seed) + '|';
    context = fnv1a(key);
    context = fnv1a(nn::model_to_json(defender).dump(), context);
    if (attacker != nullptr) context = fnv1a(nn::model_to_json(*attacker).dump(), context);
    if (plan.algo == AttackAlgo::ScaleNormal) context = hash_vectors(normals, context);
  }

  const auto cells = expand_cells(plan);
  for (const auto& cell : cells) {
    const std::string label = to_string(cell.algo) + ' ' + params_string(cell.params);
    std::filesystem::path cache_file;
    if (!plan.cache_dir.empty()) {
      cache_file = plan.cache_dir / ("cell-" + hex64(fnv1a(label, context)) + ".json");
      if (auto hit = read_cache(cache_file, options.keep_details)) {
        hit->cell_id = cell.id;
        if (!options.keep_details) hit->details.clear();
        log("cell " + std::to_string(cell.id + 1) + "/" + std::to_string(cells.size()) + " " +
            label + " cached");
        report.cells.push_back(std::move(*hit));
        continue;
      }
    }

    AttackGenerator gen;
    switch (cell.algo) {
      case AttackAlgo::SearchFromFree: {
        attack::AttackConfig cfg;
        cfg.step = static_cast<std::size_t>(param(cell, "step"));
        cfg.size = param(cell, "size");
        cfg.lambda = param(cell, "lambda");
        cfg.sigma = param(cell, "sigma");
        gen = search_generator(local, cfg, options.jobs);
        break;
      }
      case AttackAlgo::ScaleNormal:
        gen = scale_generator({normals.begin(), normals.end()}, param(cell, "alpha"));
        break;
      case AttackAlgo::Uniform:
        gen = uniform_generator(param(cell, "u"));
        break;
    }
    CellRecord rec = run_attack_batch(defender, gen, plan.n_vectors, plan.base_seed,
                                      options.keep_details);
    rec.cell_id = cell.id;
    rec.algo = cell.algo;
    rec.params = cell.params;
    std::ostringstream msg;
    msg << "cell " << cell.id + 1 << "/" << cells.size() << " " << label
        << " detection_accuracy=" << format_double(rec.detection_accuracy)
        << " avg_l1=" << format_double(rec.avg_l1) << " kWh";
    if (rec.success_local_rate) msg << " success_local_rate=" << format_double(*rec.success_local_rate);
    msg << " (" << rec.runtime_seconds << " s)";
    log(msg.str());
    if (!cache_file.empty()) write_cache(cache_file, rec);
    report.cells.push_back(std::move(rec));
  }
  return report;
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

ReportFormat report_format_from_string(const std::string& s) {
  if (s == "csv") return ReportFormat::Csv;
  if (s == "json") return ReportFormat::Json;
  throw ValidationError("unknown report format '" + s + "' (expected csv or json)");
}

void write_report_csv(const EvaluationReport& report, std::ostream& out) {
  out << "cell_id,attack,params,detection_accuracy,avg_l1,success_local_rate,n\n";
  for (const auto& c : report.cells) {
    out << c.cell_id << ',' << to_string(c.algo) << ',' << params_string(c.params) << ','
        << format_double(c.detection_accuracy) << ',' << format_double(c.avg_l1) << ','
        << (c.success_local_rate ? format_double(*c.success_local_rate) : std::string{}) << ','
        << c.n << '\n';
  }
}

json report_to_json(const EvaluationReport& report) {
  json j;
  j["version"] = kReportFormatVersion;
  j["config"] = report.config;
  j["context"] = {{"normal_avg_l1",
                   report.normal_avg_l1 ? json(*report.normal_avg_l1) : json(nullptr)}};
  json cells = json::array();
  for (const auto& c : report.cells) cells.push_back(cell_to_json(c));
  j["cells"] = std::move(cells);
  return j;
}

EvaluationReport report_from_json(const json& j) {
  if (!j.is_object() || j.value("version", std::string{}) != kReportFormatVersion) {
    throw SchemaError(std::string("report version must be '") + kReportFormatVersion + "'");
  }
  EvaluationReport r;
  try {
    r.config = j.at("config");
    const auto& nl = j.at("context").at("normal_avg_l1");
    if (!nl.is_null()) r.normal_avg_l1 = nl.get<double>();
    for (const auto& c : j.at("cells")) r.cells.push_back(cell_from_json(c));
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed report: ") + e.what());
  }
  return r;
}

void emit_report(const EvaluationReport& report, const std::filesystem::path& path,
                 ReportFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  if (format == ReportFormat::Csv) {
    write_report_csv(report, out);
  } else {
    out << report_to_json(report).dump(2) << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

EvaluationReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("report " + path.string() + " is not valid JSON: " + e.what());
  }
  return report_from_json(j);
}

}  // namespace theftbench::experiment
