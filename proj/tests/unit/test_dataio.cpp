#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "test_support.hpp"
#include "theftbench/dataio.hpp"
#include "theftbench/error.hpp"

using namespace theftbench;
using namespace theftbench::dataio;

namespace {

std::vector<MeterReadingRecord> full_day(const std::string& meter, std::int64_t day, double base) {
  std::vector<MeterReadingRecord> out;
  for (int s = 0; s < 48; ++s) out.push_back({meter, day, s, base + 0.01 * s});
  return out;
}

// Vectors whose first reading is their index, so samples can be identified.
std::vector<DailyLoadVector> indexed_pool(std::size_t n) {
  std::vector<DailyLoadVector> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Readings r{};
    r[0] = static_cast<double>(i);
    out.emplace_back(r);
  }
  return out;
}

}  // namespace

TEST_CASE("ISSDA line: day code and 1-based half hour") {
  MeterReadingRecord r;
  REQUIRE(parse_issda_line("1392 19503 0.14", r));
  CHECK(r.meter_id == "1392");
  CHECK(r.day_index == 195);
  CHECK(r.slot == 2);
  CHECK(r.kwh == 0.14);

  REQUIRE(parse_issda_line("1000\t36548\t1.25", r));
  CHECK(r.day_index == 365);
  CHECK(r.slot == 47);
  REQUIRE(parse_issda_line("1000 00101 0", r));
  CHECK(r.slot == 0);
}

TEST_CASE("ISSDA line: malformed inputs") {
  MeterReadingRecord r;
  CHECK_FALSE(parse_issda_line("1392 19503 -0.5", r));
  CHECK_FALSE(parse_issda_line("1392 19500 0.1", r));   // half hour 0
  CHECK_FALSE(parse_issda_line("1392 19549 0.1", r));   // half hour 49
  CHECK_FALSE(parse_issda_line("1392 1950 0.1", r));    // 4-digit code
  CHECK_FALSE(parse_issda_line("1392 19503", r));
  CHECK_FALSE(parse_issda_line("1392 19503 0.1 7", r));
  CHECK_FALSE(parse_issda_line("1392 19503 nan", r));
  CHECK_FALSE(parse_issda_line("1392 19503 abc", r));
}

TEST_CASE("canonical line parses as identity") {
  MeterReadingRecord r;
  REQUIRE(parse_canonical_line("m1,0,0,0.0", r));
  CHECK(r == MeterReadingRecord{"m1", 0, 0, 0.0});
  CHECK_FALSE(parse_canonical_line("m1,0,48,0.1", r));
  CHECK_FALSE(parse_canonical_line("m1,0,3,-0.5", r));
  CHECK_FALSE(parse_canonical_line("m1,0,3", r));
}

TEST_CASE("stream parsing counts malformed lines and rejects mostly-garbage input") {
  std::istringstream ok("meter_id,day_index,slot,kwh\nm1,0,0,0.5\nm1,0,1,-0.5\nm1,0,2,0.25\n");
  const auto res = parse_meter_stream(ok, MeterFormat::Canonical);
  CHECK(res.records.size() == 2);
  CHECK(res.lines == 3);
  CHECK(res.malformed == 1);

  std::istringstream issda_as_canonical("1392 19503 0.14\n1392 19504 0.2\n1392 19505 0.3\n");
  CHECK_THROWS_AS(parse_meter_stream(issda_as_canonical, MeterFormat::Canonical), FormatError);

  std::istringstream half("1392 19503 0.14\nbad line\n");
  CHECK(parse_meter_stream(half, MeterFormat::Issda).records.size() == 1);
}

TEST_CASE("unreadable meter file is an I/O error") {
  CHECK_THROWS_AS(parse_meter_csv("/nonexistent/theftbench/meter.txt", MeterFormat::Issda),
                  IoError);
  CHECK(meter_format_from_string("issda") == MeterFormat::Issda);
  CHECK(meter_format_from_string("canonical") == MeterFormat::Canonical);
  CHECK_THROWS_AS(meter_format_from_string("xlsx"), ValidationError);
}

TEST_CASE("ISSDA file round trip through parse and regulate") {
  tb_test::TempDir dir("issda");
  std::ofstream f(dir / "m.txt");
  for (int hh = 48; hh >= 1; --hh) {
    char code[8];
    std::snprintf(code, sizeof code, "%03d%02d", 195, hh);
    f << "1392 " << code << ' ' << 0.01 * hh << '\n';
  }
  f << "1392 19601 0.5\n";
  f.close();
  const auto parsed = parse_meter_csv(dir / "m.txt", MeterFormat::Issda);
  CHECK(parsed.records.size() == 49);
  const auto reg = regulate_daily(parsed.records);
  REQUIRE(reg.daily.size() == 1);
  CHECK(reg.dropped_groups == 1);
  for (std::size_t s = 0; s < 48; ++s) {
    CHECK(reg.daily[0][s] == doctest::Approx(0.01 * static_cast<double>(s + 1)));
  }
  const auto& origin = std::get<RealMeterOrigin>(reg.daily[0].origin());
  CHECK(origin.meter_id == "1392");
  CHECK(origin.day_index == 195);
}

TEST_CASE("regulate_daily keeps complete days in slot order") {
  auto recs = full_day("m1", 5, 0.1);
  std::reverse(recs.begin(), recs.end());
  const auto res = regulate_daily(recs);
  REQUIRE(res.daily.size() == 1);
  CHECK(res.dropped_groups == 0);
  for (std::size_t s = 0; s < 48; ++s) {
    CHECK(res.daily[0][s] == doctest::Approx(0.1 + 0.01 * static_cast<double>(s)));
  }
}

TEST_CASE("regulate_daily drops incomplete and duplicated days") {
  auto recs = full_day("m1", 5, 0.1);
  auto missing = full_day("m2", 5, 0.2);
  missing.pop_back();
  auto dup = full_day("m3", 5, 0.3);
  dup.push_back({"m3", 5, 10, 0.9});
  recs.insert(recs.end(), missing.begin(), missing.end());
  recs.insert(recs.end(), dup.begin(), dup.end());
  const auto res = regulate_daily(recs);
  CHECK(res.daily.size() == 1);
  CHECK(res.dropped_groups == 2);
  CHECK(regulate_daily({}).daily.empty());
}

TEST_CASE("regulate_daily: kept + dropped equals the number of groups") {
  Rng rng(3);
  std::vector<MeterReadingRecord> recs;
  std::set<std::pair<std::string, std::int64_t>> groups;
  for (int m = 0; m < 12; ++m) {
    for (int d = 0; d < 6; ++d) {
      auto day = full_day("m" + std::to_string(m), d, 0.1);
      const auto action = rng() % 3;
      if (action == 1) day.erase(day.begin() + static_cast<long>(rng() % 48));
      if (action == 2) day.push_back(day[rng() % 48]);
      groups.insert({"m" + std::to_string(m), d});
      recs.insert(recs.end(), day.begin(), day.end());
    }
  }
  const auto res = regulate_daily(recs);
  CHECK(res.daily.size() + res.dropped_groups == groups.size());
}

TEST_CASE("sample_records: exhaustive sample is a permutation, seeded and checked") {
  const auto pool = indexed_pool(200);
  auto all = sample_records(pool, 200, 9);
  std::vector<double> ids;
  for (const auto& v : all) ids.push_back(v[0]);
  std::sort(ids.begin(), ids.end());
  for (std::size_t i = 0; i < 200; ++i) CHECK(ids[i] == static_cast<double>(i));

  CHECK(sample_records(pool, 50, 4) == sample_records(pool, 50, 4));
  CHECK_THROWS_AS(sample_records(pool, 201, 4), SizeError);
}

TEST_CASE("sample_records: overlap of two seeds follows the hypergeometric law") {
  const std::size_t pool_size = 50000;
  const std::size_t n = 3000;
  const auto pool = indexed_pool(pool_size);
  const auto a = sample_records(pool, n, 1);
  const auto b = sample_records(pool, n, 2);
  std::set<double> ids_a;
  for (const auto& v : a) ids_a.insert(v[0]);
  CHECK(ids_a.size() == n);
  std::size_t overlap = 0;
  for (const auto& v : b) overlap += ids_a.count(v[0]);
  const double N = static_cast<double>(pool_size);
  const double k = static_cast<double>(n);
  const double mean = k * k / N;
  const double var = k * (k / N) * ((N - k) / N) * ((N - k) / (N - 1.0));
  CHECK(overlap < n);
  CHECK(std::abs(static_cast<double>(overlap) - mean) <= 3.0 * std::sqrt(var));
}

TEST_CASE("synthetic normals: calibrated mean, non-negative, reproducible") {
  const auto v = generate_synthetic_normals(10000, 2024);
  REQUIRE(v.size() == 10000);
  double total = 0.0;
  for (const auto& x : v) {
    total += x.l1();
    for (double r : x.readings()) CHECK_MESSAGE(r >= 0.0, "negative reading");
  }
  const double mean = total / 10000.0;
  CHECK(mean >= 0.85 * 32.05);
  CHECK(mean <= 1.15 * 32.05);
  CHECK(generate_synthetic_normals(300, 7) == generate_synthetic_normals(300, 7));
  CHECK_FALSE(generate_synthetic_normals(300, 7) == generate_synthetic_normals(300, 8));
  CHECK_THROWS_AS(generate_synthetic_normals(0, 1), SizeError);
}

TEST_CASE("synthetic normals: zero noise reproduces occupied household templates") {
  SyntheticProfileConfig p;
  p.noise_sigma = 0.0;
  p.vacant_fraction = 0.0;
  p.days_per_household = 3;
  const auto v = generate_synthetic_normals(12, 5, p);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto tmpl = synthetic_household_template(5, i / 3, p);
    CHECK(v[i].readings() == tmpl);
  }
}

TEST_CASE("synthetic normals: vacant premises are sparse and small") {
  SyntheticProfileConfig p;
  p.vacant_fraction = 0.999;
  const auto v = generate_synthetic_normals(400, 3, p);
  std::size_t zeros = 0;
  double total = 0.0;
  for (const auto& x : v) {
    total += x.l1();
    for (double r : x.readings()) zeros += r == 0.0 ? 1 : 0;
  }
  CHECK(static_cast<double>(zeros) / (400.0 * 48.0) > 0.6);
  CHECK(total / 400.0 < 2.0);

  p.vacant_fraction = 1.0;
  CHECK_THROWS_AS(generate_synthetic_normals(4, 3, p), DomainError);
}

TEST_CASE("dataset CSV round trip is bit exact") {
  Rng rng(17);
  LabeledDataset ds;
  ds.role = DatasetRole::Attacker;
  ds.seed = 99;
  for (int i = 0; i < 20; ++i) {
    ds.samples.push_back({tb_test::random_vector(rng, 3.0), i % 3 == 0 ? Label::Theft : Label::Normal});
  }
  tb_test::TempDir dir("dataset");
  save_dataset(ds, dir / "d.csv");
  const auto back = load_dataset(dir / "d.csv");
  CHECK(back.role == DatasetRole::Attacker);
  CHECK(back.seed == 99);
  REQUIRE(back.size() == ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(back.samples[i].vector == ds.samples[i].vector);
    CHECK(back.samples[i].label == ds.samples[i].label);
  }
}

TEST_CASE("dataset CSV schema errors") {
  std::string header = "label";
  for (int i = 0; i < 48; ++i) header += ",r" + std::to_string(i);
  std::string row = "0";
  for (int i = 0; i < 48; ++i) row += ",0.5";

  std::string short_header = "label";
  for (int i = 0; i < 47; ++i) short_header += ",r" + std::to_string(i);
  std::string short_row = "0";
  for (int i = 0; i < 47; ++i) short_row += ",0.5";
  std::istringstream narrow(short_header + "\n" + short_row + "\n");
  CHECK_THROWS_AS(read_dataset(narrow), SchemaError);

  std::istringstream narrow_row(header + "\n" + short_row + "\n");
  CHECK_THROWS_AS(read_dataset(narrow_row), SchemaError);

  std::istringstream label2(header + "\n2" + row.substr(1) + "\n");
  CHECK_THROWS_AS(read_dataset(label2), SchemaError);

  std::istringstream negative(header + "\n0,-1" + row.substr(5) + "\n");
  CHECK_THROWS_AS(read_dataset(negative), SchemaError);

  std::istringstream ok(header + "\n" + row + "\n");
  CHECK(read_dataset(ok).size() == 1);

  CHECK_THROWS_AS(load_dataset("/nonexistent/theftbench/d.csv"), IoError);
}
