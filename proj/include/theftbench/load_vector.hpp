#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace theftbench {

inline constexpr std::size_t kSlotsPerDay = 48;

using Readings = std::array<double, kSlotsPerDay>;

struct RealMeterOrigin {
  std::string meter_id;
  std::int64_t day_index = 0;
  bool operator==(const RealMeterOrigin&) const = default;
};

struct SyntheticOrigin {
  std::uint64_t seed = 0;
  bool operator==(const SyntheticOrigin&) const = default;
};

// monostate: provenance unknown (loaded from a dataset file, or produced by
// an attack generator).
using Origin = std::variant<std::monostate, RealMeterOrigin, SyntheticOrigin>;

// One day of half-hourly consumption in kWh. Construction validates length,
// finiteness and non-negativity; the readings are immutable afterwards.
class DailyLoadVector {
 public:
  explicit DailyLoadVector(const Readings& readings, Origin origin = {});
  // Throws SizeError unless values.size() == 48.
  static DailyLoadVector from_span(std::span<const double> values, Origin origin = {});

  const Readings& readings() const { return readings_; }
  double operator[](std::size_t slot) const { return readings_[slot]; }
  const Origin& origin() const { return origin_; }

  // Sum of readings (kWh); equals the L1 norm since entries are non-negative.
  double l1() const;
  double mean() const { return l1() / static_cast<double>(kSlotsPerDay); }

  bool operator==(const DailyLoadVector& other) const { return readings_ == other.readings_; }

 private:
  Readings readings_;
  Origin origin_;
};

enum class Label : int { Normal = 0, Theft = 1 };

enum class DatasetRole { Defender, Attacker };

std::string to_string(DatasetRole role);
DatasetRole dataset_role_from_string(const std::string& s);

struct LabeledSample {
  DailyLoadVector vector;
  Label label;
};

struct LabeledDataset {
  std::vector<LabeledSample> samples;
  DatasetRole role = DatasetRole::Defender;
  std::uint64_t seed = 0;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  std::size_t count(Label label) const;
};

// Mean L1 of the samples carrying `label` (0 when there are none).
double mean_l1(const LabeledDataset& ds, Label label);
double mean_l1(std::span<const DailyLoadVector> vectors);

}  // namespace theftbench
