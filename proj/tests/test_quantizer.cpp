#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "qgamp/quantizer.hpp"
#include "quad_oracle.hpp"

using namespace qgamp;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRoot2OverPi = 0.7978845608028653558798921;  // sqrt(2/pi)
}

TEST_CASE("encode brackets thresholds") {
  const auto q = ScalarQuantizer::regular({-1.0, 0.0, 1.0});
  CHECK(q.num_labels() == 4);
  CHECK(q.encode(0.5) == 3);
  CHECK(q.encode(-5.0) == 1);
  CHECK(q.encode(5.0) == 4);
  // Half-open cells: a threshold point belongs to the upper cell.
  const auto q2 = ScalarQuantizer::regular({0.0});
  CHECK(q2.encode(0.0) == 2);
  CHECK(q2.encode(-1e-300) == 1);
}

TEST_CASE("encode modulo") {
  const auto q = ScalarQuantizer::modulo(1.0, 4);
  CHECK(q.encode(5.3) == 2);  // floor(5.3) mod 4 = 1
  CHECK(q.encode(0.0) == 1);
  CHECK(q.encode(-0.5) == 4);  // floor(-0.5) = -1 -> 3
  CHECK(q.encode(3.9) == 4);
}

TEST_CASE("encode rejects non-finite input") {
  const auto q = ScalarQuantizer::regular({0.0});
  CHECK_THROWS_AS(q.encode(std::numeric_limits<double>::quiet_NaN()), std::invalid_argument);
  CHECK_THROWS_AS(q.encode(kInf), std::invalid_argument);
}

TEST_CASE("cell_set regular") {
  const auto q = ScalarQuantizer::regular({-1.0, 0.0, 1.0});
  const auto cs = q.cell_set(2);
  REQUIRE(cs.intervals().size() == 1);
  CHECK(cs.intervals()[0].lo == -1.0);
  CHECK(cs.intervals()[0].hi == 0.0);
  CHECK_THROWS_AS(q.cell_set(0), std::invalid_argument);
  CHECK_THROWS_AS(q.cell_set(5), std::invalid_argument);
}

TEST_CASE("cell_set binned unions") {
  const auto q = ScalarQuantizer::binned({-1.0, 0.0, 1.0}, {1, 2, 1, 2});
  CHECK(q.kind() == ScalarQuantizer::Kind::Binned);
  CHECK(q.num_labels() == 2);
  const auto cs = q.cell_set(1);
  REQUIRE(cs.intervals().size() == 2);
  CHECK(cs.intervals()[0].lo == -kInf);
  CHECK(cs.intervals()[0].hi == -1.0);
  CHECK(cs.intervals()[1].lo == 0.0);
  CHECK(cs.intervals()[1].hi == 1.0);
}

TEST_CASE("cell_set modulo truncated window") {
  const auto q = ScalarQuantizer::modulo(1.0, 2);
  // Window [-4, 4): mean 0, variance chosen so 8 stddev = 4.
  const GaussianSource ctx{0.0, 0.25};
  const auto cs = q.cell_set(1, ctx);
  REQUIRE(cs.intervals().size() == 4);
  const double lows[] = {-4.0, -2.0, 0.0, 2.0};
  for (int i = 0; i < 4; ++i) {
    CHECK(cs.intervals()[i].lo == doctest::Approx(lows[i]));
    CHECK(cs.intervals()[i].width() == doctest::Approx(1.0));
  }
}

TEST_CASE("partition and cover properties") {
  std::mt19937_64 eng(7);
  std::uniform_real_distribution<double> unif(-4.0, 4.0);
  const auto binned = ScalarQuantizer::binned({-2.0, -1.0, 0.5, 2.0}, {2, 1, 3, 1, 2});
  const auto regular = ScalarQuantizer::regular({-1.5, -0.25, 0.0, 1.0});
  const auto mod = ScalarQuantizer::modulo(0.7, 3);
  const GaussianSource ctx{0.0, 1.0};
  for (int rep = 0; rep < 500; ++rep) {
    const double s = unif(eng);
    for (const auto& q : {binned, regular, mod}) {
      const int label = q.encode(s);
      CHECK(q.cell_set(label, ctx).contains(s));
      for (int other = 1; other <= q.num_labels(); ++other) {
        if (other == label) continue;
        CHECK_FALSE(q.cell_set(other, ctx).contains(s));
      }
    }
  }
}

TEST_CASE("regular encode is monotone") {
  const auto q = ScalarQuantizer::regular({-1.0, 0.3, 2.0});
  std::mt19937_64 eng(3);
  std::uniform_real_distribution<double> unif(-5.0, 5.0);
  for (int rep = 0; rep < 200; ++rep) {
    double s1 = unif(eng), s2 = unif(eng);
    if (s1 > s2) std::swap(s1, s2);
    CHECK(q.encode(s1) <= q.encode(s2));
  }
}

TEST_CASE("binning produces multi-interval cells") {
  const auto q = ScalarQuantizer::binned({-1.0, 0.0, 1.0}, {1, 2, 1, 2});
  bool any_multi = false;
  for (int label = 1; label <= q.num_labels(); ++label)
    any_multi |= q.cell_set(label).intervals().size() >= 2;
  CHECK(any_multi);
}

TEST_CASE("construction rejects bad inputs") {
  CHECK_THROWS_AS(ScalarQuantizer::regular({1.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(ScalarQuantizer::regular({0.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(ScalarQuantizer::binned({0.0}, {1, 3}), std::invalid_argument);  // not onto
  CHECK_THROWS_AS(ScalarQuantizer::binned({0.0}, {1}), std::invalid_argument);     // size
  CHECK_THROWS_AS(ScalarQuantizer::modulo(0.0, 4), std::invalid_argument);
}

TEST_CASE("measurement_distortion constant quantizer") {
  const auto q = ScalarQuantizer::regular({}, std::vector<double>{0.5});
  CHECK(q.measurement_distortion({0.5, 2.0}) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("measurement_distortion two-level optimum") {
  const auto q =
      ScalarQuantizer::regular({0.0}, std::vector<double>{-kRoot2OverPi, kRoot2OverPi});
  const double expected = 1.0 - 2.0 / std::numbers::pi;
  CHECK(q.measurement_distortion({0.0, 1.0}) == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("measurement_distortion matches quadrature oracle") {
  const auto q = ScalarQuantizer::uniform_regular(16, 3.0);
  double expected = 0.0;
  for (int i = 1; i <= 16; ++i) {
    const auto cell = q.cell_set(i);
    const auto m = testoracle::trunc_moments(cell, 0.0, 1.0);
    const double bias = m.mean - q.decode(i);
    expected += m.mass * (m.variance + bias * bias);
  }
  CHECK(q.measurement_distortion({0.0, 1.0}) == doctest::Approx(expected).epsilon(1e-8));
}

TEST_CASE("uniform_regular layout") {
  const auto q = ScalarQuantizer::uniform_regular(4, 3.0);
  REQUIRE(q.thresholds().size() == 3);
  CHECK(q.thresholds()[0] == doctest::Approx(-1.5));
  CHECK(q.thresholds()[1] == doctest::Approx(0.0));
  CHECK(q.thresholds()[2] == doctest::Approx(1.5));
  CHECK(q.decode(2) == doctest::Approx(-0.75));
  CHECK(q.decode(1) == doctest::Approx(-3.75));  // edge cell representative
  CHECK(q.decode(4) == doctest::Approx(3.75));
}

TEST_CASE("kv round trip") {
  std::mt19937_64 eng(11);
  std::uniform_real_distribution<double> unif(-3.0, 3.0);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> thr;
    const int k = 1 + static_cast<int>(eng() % 6);
    double t = unif(eng);
    for (int i = 0; i < k; ++i) {
      thr.push_back(t);
      t += 0.1 + std::abs(unif(eng));
    }
    std::vector<int> binning(thr.size() + 1);
    const int coarse = 2 + static_cast<int>(eng() % static_cast<unsigned>(binning.size() - 1));
    for (std::size_t i = 0; i < binning.size(); ++i)
      binning[i] = 1 + static_cast<int>(i % static_cast<unsigned>(coarse));
    // Force the map onto 1..coarse so construction succeeds.
    for (int c = 1; c <= coarse && c <= static_cast<int>(binning.size()); ++c)
      binning[c - 1] = c;
    const auto q = ScalarQuantizer::binned(thr, binning);
    CHECK(ScalarQuantizer::from_kv(q.to_kv()) == q);
  }
  const auto mod = ScalarQuantizer::modulo(0.37, 8);
  CHECK(ScalarQuantizer::from_kv(mod.to_kv()) == mod);
  const auto uni = ScalarQuantizer::uniform_regular(16, 2.5);
  CHECK(ScalarQuantizer::from_kv(uni.to_kv()) == uni);
}
