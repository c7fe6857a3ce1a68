#include <doctest.h>

#include <array>
#include <cmath>

#include "test_support.hpp"
#include "theftbench/dataio.hpp"
#include "theftbench/error.hpp"
#include "theftbench/theftgen.hpp"

using namespace theftbench;
using namespace theftbench::theftgen;

TEST_CASE("h1 halves a constant day") {
  TheftScenario s{ScenarioKind::H1, 0.5};
  const auto out = apply_scenario(s, tb_test::constant_vector(2.0), 1);
  CHECK(out == tb_test::constant_vector(1.0));
}

TEST_CASE("h3 over the whole day zeroes everything") {
  TheftScenario s{ScenarioKind::H3};
  s.t_start = 0;
  s.t_end = 47;
  Rng rng(2);
  CHECK(apply_scenario(s, tb_test::random_vector(rng), 3) == tb_test::constant_vector(0.0));
}

TEST_CASE("h4 flattens to the mean") {
  Readings r{};
  for (std::size_t t = 0; t < 48; ++t) r[t] = t % 2 == 0 ? 0.2 : 1.0;
  const auto out = apply_scenario({ScenarioKind::H4}, DailyLoadVector(r), 0);
  for (double v : out.readings()) CHECK(v == doctest::Approx(0.6).epsilon(1e-15));
}

TEST_CASE("h6 reverses the day and is an involution") {
  Rng rng(4);
  const auto m = tb_test::random_vector(rng);
  const TheftScenario s{ScenarioKind::H6};
  const auto once = apply_scenario(s, m, 0);
  for (std::size_t t = 0; t < 48; ++t) CHECK(once[t] == m[47 - t]);
  CHECK(apply_scenario(s, once, 0) == m);
}

TEST_CASE("scenario parameters are validated") {
  CHECK_THROWS_AS(apply_scenario({ScenarioKind::H1, 0.05}, tb_test::constant_vector(1.0), 0),
                  DomainError);
  TheftScenario h3{ScenarioKind::H3};
  h3.t_start = 10;
  h3.t_end = 10;
  CHECK_THROWS_AS(apply_scenario(h3, tb_test::constant_vector(1.0), 0), DomainError);
  CHECK(scenario_from_string("h5") == ScenarioKind::H5);
  CHECK(to_string(ScenarioKind::H2) == "h2");
  CHECK_THROWS_AS(scenario_from_string("h7"), DomainError);
}

TEST_CASE("drawn parameters stay in range") {
  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    const auto s = draw_scenario(ScenarioKind::H3, seed);
    CHECK(s.alpha >= 0.1);
    CHECK(s.alpha <= 0.8);
    CHECK(s.t_start <= 43);
    CHECK(s.t_end <= 47);
    CHECK(s.t_end >= s.t_start + 4);
  }
}

TEST_CASE("scenario properties over random days") {
  Rng rng(8);
  for (int i = 0; i < 1000; ++i) {
    const auto m = tb_test::random_vector(rng, 3.0);
    const auto seed = static_cast<std::uint64_t>(i);
    const double mean = m.mean();

    const auto s1 = draw_scenario(ScenarioKind::H1, seed);
    const auto h1 = apply_scenario(s1, m, seed);
    for (std::size_t t = 0; t < 48; ++t) REQUIRE(h1[t] == s1.alpha * m[t]);

    const auto h2 = apply_scenario({ScenarioKind::H2}, m, seed);
    const auto h5 = apply_scenario({ScenarioKind::H5}, m, seed);
    for (std::size_t t = 0; t < 48; ++t) {
      REQUIRE(h2[t] >= 0.1 * m[t]);
      REQUIRE(h2[t] <= 0.8 * m[t]);
      REQUIRE(h5[t] >= 0.1 * mean);
      REQUIRE(h5[t] <= 0.8 * mean);
    }

    const auto s3 = draw_scenario(ScenarioKind::H3, seed);
    const auto h3 = apply_scenario(s3, m, seed);
    for (std::size_t t = 0; t < 48; ++t) {
      const bool inside = t >= s3.t_start && t <= s3.t_end;
      REQUIRE(h3[t] == (inside ? 0.0 : m[t]));
    }

    const auto h4 = apply_scenario({ScenarioKind::H4}, m, seed);
    const auto h6 = apply_scenario({ScenarioKind::H6}, m, seed);
    CHECK(h4.l1() == doctest::Approx(m.l1()).epsilon(1e-12));
    CHECK(h6.l1() == doctest::Approx(m.l1()).epsilon(1e-12));
    CHECK(h1.l1() <= m.l1());
    CHECK(h2.l1() <= m.l1());
    CHECK(h3.l1() <= m.l1());
    CHECK(apply_scenario({ScenarioKind::H6}, h6, seed) == m);
  }
}

TEST_CASE("pollution: minimal pair") {
  const auto m = tb_test::constant_vector(1.0);
  const std::vector<DailyLoadVector> normals{m, m};
  const auto p = pollute_dataset_detailed(normals, 3);
  REQUIRE(p.dataset.size() == 2);
  CHECK(p.dataset.count(Label::Normal) == 1);
  CHECK(p.dataset.count(Label::Theft) == 1);
  for (std::size_t i = 0; i < 2; ++i) {
    if (p.dataset.samples[i].label == Label::Normal) {
      CHECK(p.dataset.samples[i].vector == m);
      CHECK_FALSE(p.scenarios[i].has_value());
    } else {
      CHECK(p.scenarios[i].has_value());
    }
  }
}

TEST_CASE("pollution: balanced labels, odd input, errors, determinism") {
  const auto normals = dataio::generate_synthetic_normals(1001, 4);
  const auto ds = pollute_dataset(normals, 5, DatasetRole::Attacker);
  CHECK(ds.size() == 1000);
  CHECK(ds.count(Label::Theft) == 500);
  CHECK(ds.role == DatasetRole::Attacker);
  CHECK(ds.seed == 5);

  const auto again = pollute_dataset(normals, 5, DatasetRole::Attacker);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(ds.samples[i].vector == again.samples[i].vector);
    CHECK(ds.samples[i].label == again.samples[i].label);
  }
  CHECK_THROWS_AS(pollute_dataset(std::span<const DailyLoadVector>{}, 1), SizeError);
  CHECK_THROWS_AS(pollute_dataset(std::vector<DailyLoadVector>{tb_test::constant_vector(1.0)}, 1),
                  SizeError);
}

TEST_CASE("pollution: scenario histogram within multinomial bounds") {
  const auto normals = dataio::generate_synthetic_normals(120000, 6);
  const auto p = pollute_dataset_detailed(normals, 7);
  std::array<std::size_t, 6> counts{};
  std::size_t thefts = 0;
  for (const auto& s : p.scenarios) {
    if (!s) continue;
    ++counts[static_cast<std::size_t>(*s)];
    ++thefts;
  }
  REQUIRE(thefts == 60000);
  const double expected = 10000.0;
  const double sd = std::sqrt(60000.0 * (1.0 / 6.0) * (5.0 / 6.0));
  for (std::size_t k = 0; k < 6; ++k) {
    CHECK(std::abs(static_cast<double>(counts[k]) - expected) <= 3.0 * sd);
  }
}
