#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "theftbench/load_vector.hpp"

namespace theftbench::theftgen {

// False-measurement scenarios h1..h6.
enum class ScenarioKind { H1, H2, H3, H4, H5, H6 };

inline constexpr std::size_t kScenarioCount = 6;

std::string to_string(ScenarioKind kind);
ScenarioKind scenario_from_string(const std::string& s);

inline constexpr double kScaleLow = 0.1;
inline constexpr double kScaleHigh = 0.8;

struct TheftScenario {
  ScenarioKind kind = ScenarioKind::H1;
  double alpha = 0.5;  // H1 daily scaling, in [0.1, 0.8]
  // H3 zeroed interval, inclusive, 0 <= t_start < t_end <= 47.
  std::size_t t_start = 0;
  std::size_t t_end = 47;

  // Throws DomainError on out-of-range parameters.
  void validate() const;
};

// Draws fresh per-record parameters for `kind`: alpha ~ U(0.1, 0.8);
// H3 start ~ U{0..43}, duration ~ U{4..44}, end clamped to slot 47.
TheftScenario draw_scenario(ScenarioKind kind, std::uint64_t seed);

// Applies h_k to m. H2/H5 draw per-slot factors from U(0.1, 0.8) using
// rng_seed; H6 reverses the full day (slot t <- slot 47 - t).
DailyLoadVector apply_scenario(const TheftScenario& s, const DailyLoadVector& m,
                               std::uint64_t rng_seed);

struct PollutedDataset {
  LabeledDataset dataset;
  // Scenario used for each sample, empty for Normal samples.
  std::vector<std::optional<ScenarioKind>> scenarios;
};

// Keeps a random half of `normals` as Normal and replaces the other half by
// h_k(m) with k uniform over the six scenarios, then shuffles. An odd
// trailing record is dropped. Throws SizeError on fewer than two records.
PollutedDataset pollute_dataset_detailed(std::span<const DailyLoadVector> normals,
                                         std::uint64_t seed,
                                         DatasetRole role = DatasetRole::Defender);

LabeledDataset pollute_dataset(std::span<const DailyLoadVector> normals, std::uint64_t seed,
                               DatasetRole role = DatasetRole::Defender);

}  // namespace theftbench::theftgen
