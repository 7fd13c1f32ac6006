#include <doctest.h>

#include <cmath>
#include <sstream>

#include "dac/adaptive.hpp"
#include "dac/error.hpp"
#include "dac/oracles.hpp"

using namespace dac;

namespace {

double dist(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

std::vector<double> random_input(Rng& rng, std::size_t dim) {
  std::vector<double> x(dim);
  for (auto& v : x) v = rng.uniform();
  return x;
}

}  // namespace

TEST_CASE("quantize") {
  SUBCASE("empty map creates prototype 0") {
    PrototypeMap m;
    const std::vector<double> x{0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
    const Assignment a = m.quantize(x);
    CHECK(a.id == 0);
    CHECK(a.created);
    CHECK(m.size() == 1);
    CHECK(dist(m.centroid(0), x) == 0.0);
  }
  SUBCASE("input at a centroid leaves it fixed") {
    PrototypeMap m;
    const std::vector<double> x{0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
    m.quantize(x);
    const Assignment a = m.quantize(x);
    CHECK(a.id == 0);
    CHECK_FALSE(a.created);
    CHECK(dist(m.centroid(0), x) == 0.0);
    CHECK(m.visits(0) == 2);
  }
  SUBCASE("dimension mismatch") {
    PrototypeMap m;
    const std::vector<double> x{0.1, 0.2};
    CHECK_THROWS_AS(m.quantize(x), Error);
  }
  SUBCASE("replay check: every assignment was within vigilance or a creation") {
    PrototypeMap m(kPerceptDim, {0.3, 0.05, 100000});
    Rng rng(4);
    for (int i = 0; i < 1000; ++i) {
      const auto x = random_input(rng, kPerceptDim);
      std::vector<std::vector<double>> before;
      for (std::size_t p = 0; p < m.size(); ++p) before.emplace_back(m.centroid(p).begin(), m.centroid(p).end());
      const Assignment a = m.quantize(x);
      double best = 1e300;
      for (const auto& c : before) best = std::min(best, dist(c, x));
      if (a.created) {
        CHECK((before.empty() || best > 0.3));
      } else {
        REQUIRE(a.distance <= 0.3);
        CHECK(std::abs(dist(before[a.id], x) - best) < 1e-12);
      }
    }
  }
  SUBCASE("capacity stops growth") {
    PrototypeMap m(2, {0.01, 0.05, 3});
    Rng rng(1);
    for (int i = 0; i < 100; ++i) m.quantize(random_input(rng, 2));
    CHECK(m.size() == 3);
  }
  SUBCASE("snapshot round trip") {
    PrototypeMap m;
    Rng rng(2);
    for (int i = 0; i < 50; ++i) m.quantize(random_input(rng, kPerceptDim));
    std::stringstream ss;
    m.write(ss);
    CHECK(PrototypeMap::read(ss) == m);
  }
}

TEST_CASE("td_update") {
  ValueTable t;
  t.add_row();
  t.add_row();
  td_update(t, Drive::energy, 0, 1, 0.0, 1);
  for (std::size_t a = 0; a < kActionCount; ++a) CHECK(t.q(Drive::energy, 0, a) == 0.0);
  td_update(t, Drive::energy, 0, 1, 1.0, 1);
  CHECK(t.q(Drive::energy, 0, 1) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(t.q(Drive::safety, 0, 1) == 0.0);
  CHECK_THROWS_AS(td_update(t, Drive::energy, 5, 1, 1.0, 1), Error);
  CHECK_THROWS_AS(td_update(t, Drive::energy, 0, 9, 1.0, 1), Error);
  CHECK_THROWS_AS(td_update(t, Drive::energy, 0, 1, 1.0, 7), Error);

  SUBCASE("terminal transitions do not bootstrap") {
    ValueTable u;
    u.add_row();
    u.add_row();
    u.set(Drive::energy, 1, 0, 10.0);
    td_update(u, Drive::energy, 0, 0, 1.0, std::nullopt);
    CHECK(u.q(Drive::energy, 0, 0) == doctest::Approx(0.1));
  }
  SUBCASE("every drive has one row per prototype") {
    ValueTable u;
    for (int i = 0; i < 5; ++i) u.add_row();
    CHECK(u.rows() == 5);
    for (Drive d : kDrives) CHECK_NOTHROW(u.row(d, 4));
  }
}

TEST_CASE("small MDP converges to value iteration") {
  const auto mdp = oracle::builtin_mdp();
  const auto vi = oracle::value_iteration(mdp, 0.95);
  const auto td = oracle::td_fixed_point(mdp, 0.1, 0.95, 5000);
  for (std::size_t s = 0; s < 3; ++s)
    for (std::size_t a = 0; a < 2; ++a) CHECK(std::abs(td[s][a] - vi[s][a]) < 1e-6);

  SUBCASE("greedy policy is invariant to positive reward scaling") {
    for (double c : {0.1, 3.0, 17.0}) {
      auto scaled = mdp;
      for (auto& row : scaled.reward)
        for (auto& r : row) r *= c;
      const auto q = oracle::value_iteration(scaled, 0.95);
      for (std::size_t s = 0; s < 3; ++s) CHECK((q[s][0] > q[s][1]) == (vi[s][0] > vi[s][1]));
    }
  }
}

TEST_CASE("Q stays bounded under bounded rewards") {
  ValueTable t;
  for (int i = 0; i < 10; ++i) t.add_row();
  Rng rng(8);
  const double bound = 1.0 / (1.0 - t.params().gamma);
  for (int i = 0; i < 200000; ++i) {
    const std::size_t p = rng.below(10), a = rng.below(kActionCount), n = rng.below(10);
    td_update(t, Drive::energy, p, a, rng.uniform(-1, 1), n);
  }
  for (std::size_t p = 0; p < 10; ++p)
    for (double q : t.row(Drive::energy, p)) REQUIRE(std::abs(q) <= bound);
}

TEST_CASE("select_action") {
  ValueTable t;
  t.add_row();
  t.set(Drive::energy, 0, 3, 1.0);
  t.set(Drive::safety, 0, 4, 1.0);
  Rng rng(1);
  for (int i = 0; i < 20; ++i) CHECK(select_action(t, Drive::energy, 0, 0.0, rng) == 3);
  CHECK(select_action(t, Drive::safety, 0, 0.0, rng) == 4);

  SUBCASE("shared maximizer gives the same action for both drives") {
    ValueTable u;
    u.add_row();
    u.set(Drive::energy, 0, 2, 1.0);
    u.set(Drive::safety, 0, 2, 0.5);
    CHECK(select_action(u, Drive::energy, 0, 0.0, rng) == select_action(u, Drive::safety, 0, 0.0, rng));
  }
  SUBCASE("epsilon 1 is uniform within 3 sigma") {
    std::array<int, kActionCount> counts{};
    const int n = 10000;
    for (int i = 0; i < n; ++i) ++counts[select_action(t, Drive::energy, 0, 1.0, rng)];
    const double p = 1.0 / kActionCount, sd = std::sqrt(n * p * (1 - p));
    for (int c : counts) CHECK(std::abs(c - n * p) <= 3 * sd);
  }
  SUBCASE("greedy ties broken among maximizers only") {
    ValueTable u;
    u.add_row();
    u.set(Drive::energy, 0, 1, 1.0);
    u.set(Drive::energy, 0, 5, 1.0);
    std::array<int, kActionCount> counts{};
    for (int i = 0; i < 2000; ++i) ++counts[select_action(u, Drive::energy, 0, 0.0, rng)];
    CHECK(counts[1] + counts[5] == 2000);
    CHECK(counts[1] > 800);
    CHECK(counts[5] > 800);
  }
}

TEST_CASE("epsilon schedule") {
  const EpsilonSchedule e;
  CHECK(e.at(0) == doctest::Approx(0.3));
  CHECK(e.at(1000) == doctest::Approx(0.3 * std::pow(0.9995, 1000)));
  CHECK(e.at(100000) == 0.02);
}

TEST_CASE("confidence") {
  PrototypeMap m(1, {0.1, 0.05, 256});
  const std::vector<double> x{0.5};
  m.quantize(x);
  CHECK(confidence(m, 0, 10) == doctest::Approx(1.0 / 11.0));
  for (int i = 0; i < 9; ++i) m.quantize(x);
  CHECK(confidence(m, 0, 10) == 0.5);
  Rng rng(3);
  for (int i = 0; i < 30; ++i) {
    m.quantize(x);
    const double n = static_cast<double>(m.visits(0));
    const double k = rng.uniform(0.5, 20);
    CHECK(confidence(m, 0, k) == n / (n + k));
  }
}

TEST_CASE("features") {
  const WorldParams wp;
  Percept p;
  p[Odor::food] = {0.3, 0.2};
  const FeatureVector raw = percept_features(p, FeatureMode::raw, wp, 0.01);
  CHECK(raw[0] == 0.3);
  CHECK(raw[1] == 0.2);
  const FeatureVector b = percept_features(p, FeatureMode::bearing, wp, 0.01);
  CHECK(b[0] == doctest::Approx(0.25));
  CHECK(b[1] > 0);  // source to the left
  CHECK(std::abs(b[1]) <= 1.0);
  CHECK(b[2] == 0.0);
  CHECK(b[3] == 0.0);
  CHECK(parse_feature_mode("bearing") == FeatureMode::bearing);
  CHECK_FALSE(parse_feature_mode("pixels").has_value());
}
