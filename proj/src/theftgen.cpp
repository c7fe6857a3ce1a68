#include "theftbench/theftgen.hpp"

#include <algorithm>
#include <numeric>

#include "theftbench/error.hpp"
#include "theftbench/rng.hpp"

namespace theftbench::theftgen {

namespace {

constexpr std::size_t kLastSlot = kSlotsPerDay - 1;

}  // namespace

std::string to_string(ScenarioKind kind) {
  return "h" + std::to_string(static_cast<int>(kind) + 1);
}

ScenarioKind scenario_from_string(const std::string& s) {
  if (s.size() == 2 && (s[0] == 'h' || s[0] == 'H') && s[1] >= '1' && s[1] <= '6') {
    return static_cast<ScenarioKind>(s[1] - '1');
  }
  throw DomainError("unknown theft scenario '" + s + "'");
}

void TheftScenario::validate() const {
  if (kind == ScenarioKind::H1 && !(alpha >= kScaleLow && alpha <= kScaleHigh)) {
    throw DomainError("h1 alpha must lie in [0.1, 0.8]");
  }
  if (kind == ScenarioKind::H3 && !(t_start < t_end && t_end <= kLastSlot)) {
    throw DomainError("h3 interval must satisfy 0 <= t_start < t_end <= 47");
  }
}

TheftScenario draw_scenario(ScenarioKind kind, std::uint64_t seed) {
  auto rng = make_rng(seed);
  TheftScenario s;
  s.kind = kind;
  s.alpha = std::uniform_real_distribution<double>(kScaleLow, kScaleHigh)(rng);
  const std::size_t start = std::uniform_int_distribution<std::size_t>(0, 43)(rng);
  const std::size_t duration = std::uniform_int_distribution<std::size_t>(4, 44)(rng);
  s.t_start = start;
  s.t_end = std::min(start + duration, kLastSlot);
  return s;
}

DailyLoadVector apply_scenario(const TheftScenario& s, const DailyLoadVector& m,
                               std::uint64_t rng_seed) {
  s.validate();
  const Readings& in = m.readings();
  Readings out{};
  auto rng = make_rng(rng_seed);
  std::uniform_real_distribution<double> beta(kScaleLow, kScaleHigh);
  switch (s.kind) {
    case ScenarioKind::H1:
      for (std::size_t t = 0; t < kSlotsPerDay; ++t) out[t] = s.alpha * in[t];
      break;
    case ScenarioKind::H2:
      for (std::size_t t = 0; t < kSlotsPerDay; ++t) out[t] = beta(rng) * in[t];
      break;
    case ScenarioKind::H3:
      for (std::size_t t = 0; t < kSlotsPerDay; ++t) {
        out[t] = (t >= s.t_start && t <= s.t_end) ? 0.0 : in[t];
      }
      break;
    case ScenarioKind::H4:
      out.fill(m.mean());
      break;
    case ScenarioKind::H5: {
      const double mean = m.mean();
      for (std::size_t t = 0; t < kSlotsPerDay; ++t) out[t] = beta(rng) * mean;
      break;
    }
    case ScenarioKind::H6:
      for (std::size_t t = 0; t < kSlotsPerDay; ++t) out[t] = in[kLastSlot - t];
      break;
  }
  return DailyLoadVector(out);
}

PollutedDataset pollute_dataset_detailed(std::span<const DailyLoadVector> normals,
                                         std::uint64_t seed, DatasetRole role) {
  const std::size_t n = normals.size() - normals.size() % 2;
  if (n == 0) throw SizeError("pollution needs at least two normal records");

  auto rng = make_rng(seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);

  struct Entry {
    LabeledSample sample;
    std::optional<ScenarioKind> scenario;
  };
  std::vector<Entry> entries;
  entries.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const DailyLoadVector& m = normals[order[i]];
    if (i < n / 2) {
      entries.push_back({{m, Label::Normal}, std::nullopt});
      continue;
    }
    // Per-record substream: scenario choice, parameters, per-slot factors.
    auto record_rng = make_rng(seed, i);
    const auto kind = static_cast<ScenarioKind>(
        std::uniform_int_distribution<int>(0, static_cast<int>(kScenarioCount) - 1)(record_rng));
    const TheftScenario s = draw_scenario(kind, record_rng());
    entries.push_back({{apply_scenario(s, m, record_rng()), Label::Theft}, kind});
  }
  std::shuffle(entries.begin(), entries.end(), rng);

  PollutedDataset out;
  out.dataset.role = role;
  out.dataset.seed = seed;
  out.dataset.samples.reserve(n);
  out.scenarios.reserve(n);
  for (auto& e : entries) {
    out.dataset.samples.push_back(std::move(e.sample));
    out.scenarios.push_back(e.scenario);
  }
  return out;
}

LabeledDataset pollute_dataset(std::span<const DailyLoadVector> normals, std::uint64_t seed,
                               DatasetRole role) {
  return pollute_dataset_detailed(normals, seed, role).dataset;
}

}  // namespace theftbench::theftgen
