#include "theftbench/load_vector.hpp"

#include <cmath>
#include <numeric>

#include "theftbench/error.hpp"

namespace theftbench {

DailyLoadVector::DailyLoadVector(const Readings& readings, Origin origin)
    : readings_(readings), origin_(std::move(origin)) {
  for (std::size_t i = 0; i < kSlotsPerDay; ++i) {
    const double v = readings_[i];
    if (!std::isfinite(v)) {
      throw NumericError("reading " + std::to_string(i) + " is not finite");
    }
    if (v < 0.0) {
      throw DomainError("reading " + std::to_string(i) + " is negative");
    }
  }
}

DailyLoadVector DailyLoadVector::from_span(std::span<const double> values, Origin origin) {
  if (values.size() != kSlotsPerDay) {
    throw SizeError("daily load vector needs 48 readings, got " + std::to_string(values.size()));
  }
  Readings r;
  std::copy(values.begin(), values.end(), r.begin());
  return DailyLoadVector(r, std::move(origin));
}

double DailyLoadVector::l1() const {
  return std::accumulate(readings_.begin(), readings_.end(), 0.0);
}

std::string to_string(DatasetRole role) {
  return role == DatasetRole::Defender ? "defender" : "attacker";
}

DatasetRole dataset_role_from_string(const std::string& s) {
  if (s == "defender") return DatasetRole::Defender;
  if (s == "attacker") return DatasetRole::Attacker;
  throw SchemaError("unknown dataset role '" + s + "'");
}

std::size_t LabeledDataset::count(Label label) const {
  std::size_t n = 0;
  for (const auto& s : samples) n += s.label == label ? 1 : 0;
  return n;
}

double mean_l1(const LabeledDataset& ds, Label label) {
  double total = 0.0;
  std::size_t n = 0;
  for (const auto& s : ds.samples) {
    if (s.label != label) continue;
    total += s.vector.l1();
    ++n;
  }
  return n == 0 ? 0.0 : total / static_cast<double>(n);
}

double mean_l1(std::span<const DailyLoadVector> vectors) {
  if (vectors.empty()) return 0.0;
  double total = 0.0;
  for (const auto& v : vectors) total += v.l1();
  return total / static_cast<double>(vectors.size());
}

}  // namespace theftbench
