#include "theftbench/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <tuple>

#include "theftbench/error.hpp"
#include "theftbench/numfmt.hpp"
#include "theftbench/rng.hpp"

namespace theftbench::dataio {

namespace {

constexpr std::string_view kCanonicalHeader = "meter_id,day_index,slot,kwh";
constexpr std::string_view kDatasetMagic = "# theftbench-dataset";

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    const std::size_t b = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > b) out.push_back(s.substr(b, i - b));
  }
  return out;
}

bool valid_kwh(std::optional<double> v) { return v && std::isfinite(*v) && *v >= 0.0; }

std::string header_line() {
  std::string h = "label";
  for (std::size_t i = 0; i < kSlotsPerDay; ++i) h += ",r" + std::to_string(i);
  return h;
}

}  // namespace

MeterFormat meter_format_from_string(const std::string& s) {
  if (s == "issda" || s == "ISSDA") return MeterFormat::Issda;
  if (s == "canonical" || s == "Canonical") return MeterFormat::Canonical;
  throw ValidationError("unknown meter format '" + s + "' (expected issda or canonical)");
}

bool parse_issda_line(const std::string& line, MeterReadingRecord& out) {
  const auto fields = split_ws(line);
  if (fields.size() != 3) return false;
  const auto code_str = fields[1];
  if (code_str.size() != 5 ||
      !std::all_of(code_str.begin(), code_str.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    return false;
  }
  const auto code = parse_int(code_str);
  const auto kwh = parse_double(fields[2]);
  if (!code || !valid_kwh(kwh)) return false;
  const int half_hour = static_cast<int>(*code % 100);
  if (half_hour < 1 || half_hour > static_cast<int>(kSlotsPerDay)) return false;
  out.meter_id = std::string(fields[0]);
  out.day_index = *code / 100;
  out.slot = half_hour - 1;
  out.kwh = *kwh;
  return true;
}

bool parse_canonical_line(const std::string& line, MeterReadingRecord& out) {
  const auto fields = split(line, ',');
  if (fields.size() != 4) return false;
  const auto id = trim(fields[0]);
  const auto day = parse_int(fields[1]);
  const auto slot = parse_int(fields[2]);
  const auto kwh = parse_double(fields[3]);
  if (id.empty() || !day || !slot || !valid_kwh(kwh)) return false;
  if (*slot < 0 || *slot >= static_cast<long long>(kSlotsPerDay)) return false;
  out.meter_id = std::string(id);
  out.day_index = *day;
  out.slot = static_cast<int>(*slot);
  out.kwh = *kwh;
  return true;
}

ParseResult parse_meter_stream(std::istream& in, MeterFormat format) {
  ParseResult result;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    if (first) {
      first = false;
      if (format == MeterFormat::Canonical && trim(line) == kCanonicalHeader) continue;
    }
    ++result.lines;
    MeterReadingRecord rec;
    const bool ok = format == MeterFormat::Issda ? parse_issda_line(line, rec)
                                                 : parse_canonical_line(line, rec);
    if (ok) {
      result.records.push_back(std::move(rec));
    } else {
      ++result.malformed;
    }
  }
  if (result.lines > 0 && 2 * result.malformed > result.lines) {
    throw FormatError(std::to_string(result.malformed) + " of " + std::to_string(result.lines) +
                      " lines are malformed; wrong format flag?");
  }
  return result;
}

ParseResult parse_meter_csv(const std::filesystem::path& path, MeterFormat format) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  return parse_meter_stream(in, format);
}

RegulateResult regulate_daily(std::span<const MeterReadingRecord> records) {
  struct Day {
    Readings readings{};
    std::array<int, kSlotsPerDay> hits{};
  };
  std::map<std::pair<std::string, std::int64_t>, Day> groups;
  for (const auto& r : records) {
    auto& day = groups[{r.meter_id, r.day_index}];
    if (r.slot < 0 || r.slot >= static_cast<int>(kSlotsPerDay) || !valid_kwh(r.kwh)) {
      // Invalid records poison their day.
      day.hits[0] = 2;
      continue;
    }
    day.readings[static_cast<std::size_t>(r.slot)] = r.kwh;
    ++day.hits[static_cast<std::size_t>(r.slot)];
  }
  RegulateResult result;
  for (const auto& [key, day] : groups) {
    const bool complete = std::all_of(day.hits.begin(), day.hits.end(), [](int h) { return h == 1; });
    if (!complete) {
      ++result.dropped_groups;
      continue;
    }
    result.daily.emplace_back(day.readings, RealMeterOrigin{key.first, key.second});
  }
  return result;
}

std::vector<DailyLoadVector> sample_records(std::span<const DailyLoadVector> daily, std::size_t n,
                                            std::uint64_t seed) {
  if (n > daily.size()) {
    throw SizeError("cannot sample " + std::to_string(n) + " records from " +
                    std::to_string(daily.size()));
  }
  std::vector<std::size_t> idx(daily.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  auto rng = make_rng(seed);
  // Partial Fisher-Yates: the first n positions are the sample.
  for (std::size_t i = 0; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  std::vector<DailyLoadVector> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(daily[idx[i]]);
  return out;
}

namespace {

struct HouseholdDraw {
  bool vacant = false;
  Readings shape{};  // sums to 1
  double scale = 1.0;
  double event_rate = 0.0;
  double event_kwh = 0.0;
};

double vacant_mean_daily(const SyntheticProfileConfig& p) {
  const double rate = 0.5 * (p.vacant_event_rate_min + p.vacant_event_rate_max);
  const double kwh = 0.5 * (p.vacant_event_kwh_min + p.vacant_event_kwh_max);
  return static_cast<double>(kSlotsPerDay) * rate * kwh;
}

// Mean scale of the occupied population that makes the overall expected
// daily total equal the target.
double occupied_scale_mean(const SyntheticProfileConfig& p) {
  const double vacant_share = p.vacant_fraction * vacant_mean_daily(p) / p.target_mean_daily_kwh;
  return (1.0 - vacant_share) / (1.0 - p.vacant_fraction);
}

HouseholdDraw draw_household(Rng& rng, const SyntheticProfileConfig& p) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  HouseholdDraw h;
  if (unit(rng) < p.vacant_fraction) {
    h.vacant = true;
    h.event_rate = p.vacant_event_rate_min + (p.vacant_event_rate_max - p.vacant_event_rate_min) * unit(rng);
    h.event_kwh = p.vacant_event_kwh_min + (p.vacant_event_kwh_max - p.vacant_event_kwh_min) * unit(rng);
    return h;
  }

  const double base = 0.3 + 0.3 * unit(rng);
  const double night_factor = 0.5 + 0.3 * unit(rng);
  const double morning_amp = 0.5 + 1.0 * unit(rng);
  const double morning_centre = p.morning_peak_slot + 1.5 * normal(rng);
  const double morning_width = 1.5 + 1.5 * unit(rng);
  const double evening_amp = 1.0 + 1.5 * unit(rng);
  const double evening_centre = p.evening_peak_slot + 2.0 * normal(rng);
  const double evening_width = 2.5 + 2.5 * unit(rng);

  double total = 0.0;
  for (std::size_t t = 0; t < kSlotsPerDay; ++t) {
    const double x = static_cast<double>(t);
    const double dm = (x - morning_centre) / morning_width;
    const double de = (x - evening_centre) / evening_width;
    const double floor = t < 12 ? base * night_factor : base;
    const double v = floor + morning_amp * std::exp(-0.5 * dm * dm) +
                     evening_amp * std::exp(-0.5 * de * de);
    h.shape[t] = v;
    total += v;
  }
  for (auto& v : h.shape) v /= total;

  const double s = p.household_scale_sigma;
  std::lognormal_distribution<double> spread(-0.5 * s * s, s);
  h.scale = occupied_scale_mean(p) * spread(rng);
  return h;
}

Readings household_template(const HouseholdDraw& h, const SyntheticProfileConfig& p) {
  Readings r;
  for (std::size_t t = 0; t < kSlotsPerDay; ++t) {
    r[t] = h.vacant ? h.event_rate * h.event_kwh : p.target_mean_daily_kwh * h.scale * h.shape[t];
  }
  return r;
}

Readings draw_day(const HouseholdDraw& h, const Readings& tmpl, const SyntheticProfileConfig& p,
                  Rng& rng) {
  Readings r{};
  if (h.vacant) {
    std::bernoulli_distribution event(h.event_rate);
    std::exponential_distribution<double> size(1.0 / h.event_kwh);
    for (auto& v : r) {
      if (event(rng)) v = size(rng);
    }
    return r;
  }
  const double sigma = p.noise_sigma;
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t t = 0; t < kSlotsPerDay; ++t) {
    r[t] = sigma > 0.0 ? tmpl[t] * std::exp(sigma * normal(rng) - 0.5 * sigma * sigma) : tmpl[t];
  }
  return r;
}

}  // namespace

void SyntheticProfileConfig::validate() const {
  if (!(target_mean_daily_kwh > 0.0)) throw DomainError("target_mean_daily_kwh must be positive");
  if (days_per_household == 0) throw DomainError("days_per_household must be positive");
  if (!(household_scale_sigma >= 0.0 && noise_sigma >= 0.0)) {
    throw DomainError("noise parameters must be non-negative");
  }
  if (!(vacant_fraction >= 0.0 && vacant_fraction < 1.0)) {
    throw DomainError("vacant_fraction must lie in [0, 1)");
  }
  if (!(vacant_event_rate_min > 0.0 && vacant_event_rate_min <= vacant_event_rate_max &&
        vacant_event_rate_max <= 1.0)) {
    throw DomainError("vacant event rates must satisfy 0 < min <= max <= 1");
  }
  if (!(vacant_event_kwh_min > 0.0 && vacant_event_kwh_min <= vacant_event_kwh_max)) {
    throw DomainError("vacant event sizes must satisfy 0 < min <= max");
  }
  if (vacant_fraction * vacant_mean_daily(*this) >= target_mean_daily_kwh) {
    throw DomainError("vacant premises alone exceed the target daily mean");
  }
}

Readings synthetic_household_template(std::uint64_t seed, std::uint64_t household_index,
                                      const SyntheticProfileConfig& profile) {
  profile.validate();
  auto rng = make_rng(seed, household_index);
  return household_template(draw_household(rng, profile), profile);
}

std::vector<DailyLoadVector> generate_synthetic_normals(std::size_t count, std::uint64_t seed,
                                                        const SyntheticProfileConfig& profile) {
  if (count == 0) throw SizeError("synthetic normal count must be at least 1");
  profile.validate();
  std::vector<DailyLoadVector> out;
  out.reserve(count);
  for (std::uint64_t h = 0; out.size() < count; ++h) {
    const std::uint64_t house_seed = derive_seed(seed, h);
    Rng rng{house_seed};
    const HouseholdDraw draw = draw_household(rng, profile);
    const Readings tmpl = household_template(draw, profile);
    for (std::size_t d = 0; d < profile.days_per_household && out.size() < count; ++d) {
      out.emplace_back(draw_day(draw, tmpl, profile, rng), SyntheticOrigin{house_seed});
    }
  }
  return out;
}

void write_dataset(const LabeledDataset& ds, std::ostream& out) {
  out << kDatasetMagic << " role=" << to_string(ds.role) << " seed=" << ds.seed << '\n';
  out << header_line() << '\n';
  std::string row;
  for (const auto& s : ds.samples) {
    row.clear();
    row += s.label == Label::Theft ? '1' : '0';
    for (double v : s.vector.readings()) {
      row += ',';
      row += format_double(v);
    }
    row += '\n';
    out << row;
  }
}

void save_dataset(const LabeledDataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_dataset(ds, out);
  if (!out) throw IoError("write failed for " + path.string());
}

LabeledDataset read_dataset(std::istream& in) {
  LabeledDataset ds;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  const std::string header = header_line();
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      if (t.starts_with(kDatasetMagic)) {
        std::istringstream meta{std::string(t.substr(kDatasetMagic.size()))};
        std::string kv;
        while (meta >> kv) {
          const auto eq = kv.find('=');
          if (eq == std::string::npos) continue;
          const auto key = kv.substr(0, eq);
          const auto value = kv.substr(eq + 1);
          if (key == "role") ds.role = dataset_role_from_string(value);
          if (key == "seed") {
            const auto s = parse_int(value);
            if (!s) throw SchemaError("bad dataset seed '" + value + "'");
            ds.seed = static_cast<std::uint64_t>(*s);
          }
        }
      }
      continue;
    }
    if (!header_seen) {
      if (t != header) {
        throw SchemaError("line " + std::to_string(line_no) + ": expected header label,r0,...,r47");
      }
      header_seen = true;
      continue;
    }
    const auto fields = split(t, ',');
    if (fields.size() != kSlotsPerDay + 1) {
      throw SchemaError("line " + std::to_string(line_no) + ": expected 49 columns, got " +
                        std::to_string(fields.size()));
    }
    const auto label = parse_int(fields[0]);
    if (!label || (*label != 0 && *label != 1)) {
      throw SchemaError("line " + std::to_string(line_no) + ": label must be 0 or 1");
    }
    Readings r;
    for (std::size_t i = 0; i < kSlotsPerDay; ++i) {
      const auto v = parse_double(fields[i + 1]);
      if (!valid_kwh(v)) {
        throw SchemaError("line " + std::to_string(line_no) + ": bad reading r" + std::to_string(i));
      }
      r[i] = *v;
    }
    ds.samples.push_back({DailyLoadVector(r), static_cast<Label>(*label)});
  }
  if (!header_seen) throw SchemaError("dataset file has no header");
  return ds;
}

LabeledDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  return read_dataset(in);
}

LabeledDataset as_normal_dataset(std::span<const DailyLoadVector> daily, std::uint64_t seed) {
  LabeledDataset ds;
  ds.seed = seed;
  ds.samples.reserve(daily.size());
  for (const auto& v : daily) ds.samples.push_back({v, Label::Normal});
  return ds;
}

}  // namespace theftbench::dataio
