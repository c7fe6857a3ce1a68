#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "theftbench/attack.hpp"
#include "theftbench/load_vector.hpp"
#include "theftbench/nn/model.hpp"

namespace theftbench::experiment {

inline constexpr const char* kPlanFormatVersion = "theftbench-plan/1";
inline constexpr const char* kReportFormatVersion = "theftbench-report/1";

enum class AttackAlgo { SearchFromFree, ScaleNormal, Uniform };

// "sff", "va1", "va2".
std::string to_string(AttackAlgo a);
// Throws ValidationError on unknown names.
AttackAlgo algo_from_string(const std::string& s);

struct SearchGrid {
  std::vector<std::size_t> step{14};
  std::vector<double> size{0.01};    // kWh
  std::vector<double> lambda{10.0};
  std::vector<double> sigma{0.1};   // kWh
};

// Model and dataset paths are used as given; plans read from a file resolve
// relative paths against the plan's directory.
struct ExperimentPlan {
  std::filesystem::path defender;
  // Empty: white-box, the defender's own model drives the attack.
  std::filesystem::path attacker;
  AttackAlgo algo = AttackAlgo::SearchFromFree;
  SearchGrid search;
  std::vector<double> alpha{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::vector<double> u{0.25, 0.5, 1.0, 2.0, 4.0};  // kWh
  std::size_t n_vectors = 1000;
  std::uint64_t base_seed = 0;
  // Dataset whose Normal samples feed VA1 and the normal_avg_l1 context.
  // Required for VA1.
  std::filesystem::path normals;
  // Completed cells are stored here and reused on later runs. Empty: off.
  std::filesystem::path cache_dir;

  bool white_box() const { return attacker.empty(); }
  // Throws ValidationError: empty grids, n_vectors == 0, out-of-domain
  // parameters, missing defender, VA1 without normals.
  void validate() const;
};

nlohmann::ordered_json plan_to_json(const ExperimentPlan& plan);
// base_dir resolves relative paths. Throws SchemaError on malformed plans.
ExperimentPlan plan_from_json(const nlohmann::ordered_json& j,
                              const std::filesystem::path& base_dir = {});
ExperimentPlan load_plan(const std::filesystem::path& path);

struct CellParam {
  std::string name;
  double value = 0.0;
  bool operator==(const CellParam&) const = default;
};

struct Cell {
  std::size_t id = 0;
  AttackAlgo algo = AttackAlgo::SearchFromFree;
  std::vector<CellParam> params;
};

// Cartesian product of the grid of plan.algo. Search cells vary sigma
// fastest, then lambda, size, step.
std::vector<Cell> expand_cells(const ExperimentPlan& plan);

// Per-vector outcome, kept only when details are requested.
struct VectorDetail {
  std::uint64_t seed = 0;
  Label defender_label = Label::Theft;
  double l1 = 0.0;
  std::optional<bool> success_local;
  std::optional<std::size_t> iterations_used;
  Readings readings{};
  bool operator==(const VectorDetail&) const = default;
};

struct CellRecord {
  std::size_t cell_id = 0;
  AttackAlgo algo = AttackAlgo::SearchFromFree;
  std::vector<CellParam> params;
  double detection_accuracy = 0.0;
  double avg_l1 = 0.0;
  // Search cells only.
  std::optional<double> success_local_rate;
  std::size_t n = 0;
  // Wall-clock seconds; logged, never written to report files.
  double runtime_seconds = 0.0;
  std::vector<VectorDetail> details;

  bool operator==(const CellRecord& o) const {
    return cell_id == o.cell_id && algo == o.algo && params == o.params &&
           detection_accuracy == o.detection_accuracy && avg_l1 == o.avg_l1 &&
           success_local_rate == o.success_local_rate && n == o.n && details == o.details;
  }
};

struct EvaluationReport {
  nlohmann::ordered_json config;
  std::optional<double> normal_avg_l1;
  std::vector<CellRecord> cells;

  bool operator==(const EvaluationReport&) const = default;
};

struct Metrics {
  double detection_accuracy = 0.0;
  double avg_l1 = 0.0;
};

// detection_accuracy = #Theft / n, avg_l1 = mean L1. Throws SizeError on
// empty or mismatched inputs.
Metrics compute_metrics(std::span<const Label> predictions,
                        std::span<const DailyLoadVector> vectors);

struct GeneratedBatch {
  std::vector<DailyLoadVector> vectors;
  // Empty for generators without a local success notion.
  std::vector<bool> success_local;
  std::vector<std::size_t> iterations_used;
};

// Produces one vector per seed, in seed order.
using AttackGenerator = std::function<GeneratedBatch(std::span<const std::uint64_t> seeds)>;

AttackGenerator search_generator(const nn::TrainedModel& attacker, attack::AttackConfig cfg,
                                 std::size_t jobs = 1);
// Vector for seed s scales sources[s % sources.size()].
AttackGenerator scale_generator(std::vector<DailyLoadVector> sources, double alpha);
AttackGenerator uniform_generator(double u);

// Seeds base_seed + i for i < n; every vector is scored by the defender.
// Throws SizeError when n == 0 or the generator returns the wrong count.
CellRecord run_attack_batch(const nn::TrainedModel& defender, const AttackGenerator& generator,
                            std::size_t n, std::uint64_t base_seed, bool keep_details = false);

using LogFn = std::function<void(const std::string&)>;

struct SweepOptions {
  std::size_t jobs = 1;
  bool keep_details = false;
  LogFn log;
};

// Runs every cell of the plan in expand_cells order. Models and datasets are
// loaded from the plan paths; loading errors propagate.
EvaluationReport run_sweep(const ExperimentPlan& plan, const SweepOptions& options = {});

// Same with models already in memory (attacker null for white-box).
EvaluationReport run_sweep(const ExperimentPlan& plan, const nn::TrainedModel& defender,
                           const nn::TrainedModel* attacker,
                           std::span<const DailyLoadVector> normals,
                           const SweepOptions& options = {});

// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL);

enum class ReportFormat { Csv, Json };
ReportFormat report_format_from_string(const std::string& s);

// CSV header: cell_id,attack,params,detection_accuracy,avg_l1,success_local_rate,n
// with params as name=value pairs joined by ';'.
void write_report_csv(const EvaluationReport& report, std::ostream& out);
nlohmann::ordered_json report_to_json(const EvaluationReport& report);
EvaluationReport report_from_json(const nlohmann::ordered_json& j);
void emit_report(const EvaluationReport& report, const std::filesystem::path& path,
                 ReportFormat format);
EvaluationReport load_report(const std::filesystem::path& path);

}  // namespace theftbench::experiment
