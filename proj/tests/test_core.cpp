#include "tracematch/core.hpp"

#include <random>

#include "doctest.h"
#include "tracematch/rng.hpp"

using namespace tracematch;

namespace {

DiscretizationConfig make_cfg(double delta_xy, std::int64_t delta_t) {
  DiscretizationConfig cfg;
  cfg.delta_xy = delta_xy;
  cfg.delta_t = delta_t;
  cfg.day_start = 0;
  return cfg;
}

}  // namespace

TEST_CASE("projection maps the origin to zero") {
  const auto p = project(46.5, 7.25, 46.5, 7.25);
  CHECK(p.x == doctest::Approx(0.0));
  CHECK(p.y == doctest::Approx(0.0));
}

TEST_CASE("one degree of latitude is R*pi/180 meters north") {
  // 6371000 * pi / 180
  const double expected = 111194.92664455873;
  const auto p = project(47.0, 8.0, 46.0, 8.0);
  CHECK(p.y == doctest::Approx(expected).epsilon(1e-12));
  CHECK(p.x == doctest::Approx(0.0));
}

TEST_CASE("projection is antisymmetric about the origin") {
  const auto p = project(46.7, 8.3, 46.0, 8.0);
  const auto q = project(45.3, 7.7, 46.0, 8.0);
  CHECK(p.x == doctest::Approx(-q.x));
  CHECK(p.y == doctest::Approx(-q.y));
}

TEST_CASE("projection rejects out-of-range coordinates") {
  CHECK_THROWS_AS(project(91.0, 0.0, 0.0, 0.0), DataError);
  CHECK_THROWS_AS(project(0.0, 181.0, 0.0, 0.0), DataError);
}

TEST_CASE("unproject inverts project within a country-scale region") {
  double lat, lon;
  const auto p = project(46.9, 8.7, 46.0, 8.0);
  unproject(p, 46.0, 8.0, &lat, &lon);
  CHECK(lat == doctest::Approx(46.9).epsilon(1e-12));
  CHECK(lon == doctest::Approx(8.7).epsilon(1e-12));
}

TEST_CASE("discretize_space floors into cells") {
  const auto cfg = make_cfg(100.0, 3600);
  CHECK(discretize_space({250.0, 1030.0}, cfg) == GridCell{2, 10});
  CHECK(discretize_space({0.0, 0.0}, cfg) == GridCell{0, 0});
  CHECK(discretize_space({-1.0, 0.0}, cfg) == GridCell{-1, 0});
}

TEST_CASE("discretize_time spans the expected number of bins") {
  const auto cfg = make_cfg(100.0, 3600);
  CHECK(cfg.num_time_bins() == 24);
  CHECK(discretize_time(0, cfg).index == 0);
  CHECK(discretize_time(86399, cfg).index == 23);
  CHECK_THROWS_AS(discretize_time(86400, cfg), DataError);
  CHECK_THROWS_AS(discretize_time(-1, cfg), DataError);

  const auto fine = make_cfg(100.0, 300);
  CHECK(discretize_time(301, fine).index == 1);
}

TEST_CASE("every in-window timestamp maps to a valid bin") {
  const auto cfg = make_cfg(100.0, 900);
  Rng rng(7);
  for (int i = 0; i < 1000; ++i) {
    const auto ts = static_cast<std::int64_t>(rng.uniform_below(86400));
    const auto bin = discretize_time(ts, cfg);
    CHECK(bin.index >= 0);
    CHECK(bin.index < cfg.num_time_bins());
  }
}

TEST_CASE("config validation") {
  auto cfg = make_cfg(100.0, 3600);
  CHECK_NOTHROW(cfg.validate());
  cfg.delta_t = 7000;  // 86400 % 7000 != 0
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = make_cfg(-5.0, 3600);
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("coarsening divides indexes by the ratio") {
  const auto fine = make_cfg(200.0, 300);
  auto coarse = make_cfg(1000.0, 900);
  const auto ratio = coarsening_ratio(fine, coarse);
  CHECK(ratio.spatial == 5);
  CHECK(ratio.temporal == 3);

  const SpatioTemporalTuple t{GridCell{7, 3}, 13};
  const auto c = coarsen(t, fine, coarse);
  CHECK(c.cell == GridCell{1, 0});
  CHECK(c.bin == 4);

  // ratio 1 in both dimensions is the identity
  const auto same = coarsen(t, fine, fine);
  CHECK(same == t);
}

TEST_CASE("coarsening rejects non-multiple granularities") {
  const auto fine = make_cfg(200.0, 300);
  CHECK_THROWS_AS(coarsening_ratio(fine, make_cfg(500.0, 300)), ConfigError);
  CHECK_THROWS_AS(coarsening_ratio(fine, make_cfg(400.0, 450)), ConfigError);
  auto shifted = make_cfg(400.0, 600);
  shifted.grid_origin = {1.0, 0.0};
  CHECK_THROWS_AS(coarsening_ratio(fine, shifted), ConfigError);
}

TEST_CASE("coarsening composes and preserves membership") {
  const auto a = make_cfg(200.0, 300);
  const auto b = make_cfg(1000.0, 900);
  const auto c = make_cfg(5000.0, 1800);
  Rng rng(11);
  std::vector<SpatioTemporalTuple> trace;
  for (int i = 0; i < 500; ++i) {
    const SpatioTemporalTuple t{
        GridCell{static_cast<std::int32_t>(rng.uniform_below(4000)) - 2000,
                 static_cast<std::int32_t>(rng.uniform_below(4000)) - 2000},
        static_cast<std::int32_t>(rng.uniform_below(288))};
    trace.push_back(t);
    CHECK(coarsen(coarsen(t, a, b), b, c) == coarsen(t, a, c));
  }
  normalize_tuples(trace);
  const auto coarse = coarsen_tuples(trace, coarsening_ratio(a, b));
  for (const auto& t : trace) {
    const auto ct = coarsen(t, a, b);
    CHECK(std::binary_search(coarse.begin(), coarse.end(), ct));
  }
}

TEST_CASE("cell round-trip through its center") {
  const auto cfg = make_cfg(250.0, 3600);
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const GridCell c{static_cast<std::int32_t>(rng.uniform_below(2000)) - 1000,
                     static_cast<std::int32_t>(rng.uniform_below(2000)) - 1000};
    CHECK(discretize_space(cell_center(c, cfg), cfg) == c);
  }
}

TEST_CASE("trace construction deduplicates and rejects empty") {
  std::vector<SpatioTemporalTuple> tuples{{GridCell{1, 2}, 3},
                                          {GridCell{1, 2}, 3},
                                          {GridCell{0, 0}, 1}};
  const auto trace = MobilityTrace::from_tuples("u1", tuples);
  CHECK(trace.tuples.size() == 2);
  CHECK(std::is_sorted(trace.tuples.begin(), trace.tuples.end()));
  CHECK_THROWS_AS(MobilityTrace::from_tuples("u2", {}), DataError);
}
