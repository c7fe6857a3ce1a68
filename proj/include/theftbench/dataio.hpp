#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "theftbench/load_vector.hpp"

namespace theftbench::dataio {

struct MeterReadingRecord {
  std::string meter_id;
  std::int64_t day_index = 0;
  int slot = 0;  // 0..47
  double kwh = 0.0;
  bool operator==(const MeterReadingRecord&) const = default;
};

enum class MeterFormat {
  // Whitespace separated `meter_id code kwh`; code = DDDHH with HH in 1..48.
  Issda,
  // CSV with header `meter_id,day_index,slot,kwh`, slot in 0..47.
  Canonical,
};

MeterFormat meter_format_from_string(const std::string& s);

struct ParseResult {
  std::vector<MeterReadingRecord> records;
  std::size_t lines = 0;  // non-empty data lines seen (header excluded)
  std::size_t malformed = 0;
};

// Parses a single data line; returns false when the line is malformed.
bool parse_issda_line(const std::string& line, MeterReadingRecord& out);
bool parse_canonical_line(const std::string& line, MeterReadingRecord& out);

// Malformed lines are skipped and counted. Throws IoError when the file
// cannot be read, FormatError when more than half of the lines are malformed.
ParseResult parse_meter_csv(const std::filesystem::path& path, MeterFormat format);
ParseResult parse_meter_stream(std::istream& in, MeterFormat format);

struct RegulateResult {
  std::vector<DailyLoadVector> daily;  // ordered by (meter_id, day_index)
  std::size_t dropped_groups = 0;      // incomplete or duplicated days
};

// Groups records by (meter, day); only days with exactly one valid reading
// for each of the 48 slots survive.
RegulateResult regulate_daily(std::span<const MeterReadingRecord> records);

// Uniform sample of n vectors without replacement; deterministic in seed.
// Throws SizeError when n > daily.size().
std::vector<DailyLoadVector> sample_records(std::span<const DailyLoadVector> daily, std::size_t n,
                                            std::uint64_t seed);

// Two-peak diurnal household model. Every simulated household draws a
// template once; its days are the template times per-slot mean-one
// log-normal noise. A fraction of premises is vacant: their days are zero
// except for sparse standby events (timers, alarms, frost protection).
// Scales are normalised so that the expected daily total equals
// target_mean_daily_kwh.
struct SyntheticProfileConfig {
  double target_mean_daily_kwh = 32.05;
  std::size_t days_per_household = 8;
  // Log-normal spread of the household consumption scale.
  double household_scale_sigma = 0.45;
  // Per-slot log-normal noise; 0 reproduces the template exactly.
  double noise_sigma = 0.3;
  double vacant_fraction = 0.1;
  // Per-household probability that a slot carries a standby event.
  double vacant_event_rate_min = 0.03;
  double vacant_event_rate_max = 0.25;
  // Per-household mean event size (kWh); sizes are exponential.
  double vacant_event_kwh_min = 0.01;
  double vacant_event_kwh_max = 0.08;
  // Peak centres in slots (0 = 00:00-00:30).
  double morning_peak_slot = 15.0;
  double evening_peak_slot = 37.0;

  // Throws DomainError on fractions outside [0, 1) or inverted ranges.
  void validate() const;
};

// Deterministic template (before noise) of household `household_index`;
// for a vacant household, the expected reading per slot.
Readings synthetic_household_template(std::uint64_t seed, std::uint64_t household_index,
                                      const SyntheticProfileConfig& profile);

// count >= 1; throws SizeError otherwise.
std::vector<DailyLoadVector> generate_synthetic_normals(std::size_t count, std::uint64_t seed,
                                                        const SyntheticProfileConfig& profile = {});

// Dataset CSV: optional `# theftbench-dataset role=<r> seed=<s>` line, then
// header `label,r0,...,r47`, then one row per sample. Readings are written in
// shortest round-trip decimal form.
void save_dataset(const LabeledDataset& ds, const std::filesystem::path& path);
void write_dataset(const LabeledDataset& ds, std::ostream& out);
LabeledDataset load_dataset(const std::filesystem::path& path);
LabeledDataset read_dataset(std::istream& in);

// Convenience wrapper: stores unlabelled daily vectors as Normal samples.
LabeledDataset as_normal_dataset(std::span<const DailyLoadVector> daily, std::uint64_t seed = 0);

}  // namespace theftbench::dataio
