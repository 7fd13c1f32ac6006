#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "dac/reactive.hpp"
#include "dac/rng.hpp"
#include "dac/soma.hpp"

using namespace dac;

namespace {

double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

// Independent fold of the body update.
InternalState fold(InternalState s, double ate, double damage, double speed, const SomaParams& p) {
  if (s.energy <= 0 || s.integrity <= 0) return s;
  s.energy = clamp01(s.energy - p.base_cost - p.move_cost * speed + ate);
  s.integrity = clamp01(s.integrity - damage + p.heal_rate);
  if (s.energy <= 0 || s.integrity <= 0) s = {0, 0};
  return s;
}

}  // namespace

TEST_CASE("update_internal formula") {
  const SomaParams p;
  SUBCASE("no events, no motion") {
    const InternalState s = update_internal({0.5, 0.5}, {}, 0, {0, 0}, p);
    CHECK(s.energy == doctest::Approx(0.5 - p.base_cost).epsilon(1e-15));
    CHECK(s.integrity == doctest::Approx(0.5 + p.heal_rate).epsilon(1e-15));
    CHECK(update_internal({1, 1}, {}, 0, {0, 0}, p).integrity == 1.0);
  }
  SUBCASE("eat clamps at one") {
    const Event eat{EventType::eat, 0, 10, 0.3};
    CHECK(update_internal({0.9, 1}, std::span(&eat, 1), 0, {0, 0}, p).energy == 1.0);
  }
  SUBCASE("events for other agents are ignored") {
    const Event hit{EventType::damage, 1, 5, 0.25};
    CHECK(update_internal({0.5, 0.5}, std::span(&hit, 1), 0, {0, 0}, p).integrity ==
          doctest::Approx(0.5 + p.heal_rate));
  }
  SUBCASE("random sequences match an independent fold") {
    Rng rng(1);
    for (int seq = 0; seq < 100; ++seq) {
      InternalState s, ref;
      for (int t = 0; t < 200; ++t) {
        EventList ev;
        double ate = 0, dmg = 0;
        if (rng.bernoulli(0.05)) {
          ev.push_back({EventType::eat, 0, 9, 0.3});
          ate = 0.3;
        }
        if (rng.bernoulli(0.03)) {
          ev.push_back({EventType::damage, 0, 4, 0.25});
          dmg = 0.25;
        }
        const double v = rng.uniform(0, 1);
        s = update_internal(s, ev, 0, {v, 0}, p);
        ref = fold(ref, ate, dmg, v, p);
        REQUIRE(std::abs(s.energy - ref.energy) < 1e-12);
        REQUIRE(std::abs(s.integrity - ref.integrity) < 1e-12);
      }
    }
  }
  SUBCASE("death is absorbing") {
    const Event hit{EventType::damage, 0, 5, 1.0};
    const InternalState dead = update_internal({0.5, 0.5}, std::span(&hit, 1), 0, {0, 0}, p);
    CHECK(dead.dead());
    CHECK(update_internal(dead, {}, 0, {0, 0}, p) == dead);
  }
}

TEST_CASE("drive errors and reward") {
  CHECK(drive_errors({1, 1})[Drive::energy] == 0.0);
  CHECK(drive_errors({1, 1})[Drive::safety] == 0.0);
  CHECK(drive_errors({0.4, 1})[Drive::energy] == doctest::Approx(0.6));
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    const InternalState s{rng.uniform(), rng.uniform()};
    const DriveError e = drive_errors(s);
    CHECK(std::abs(e[Drive::energy] - (1 - s.energy)) <= 1e-15);
    CHECK(std::abs(e[Drive::safety] - (1 - s.integrity)) <= 1e-15);
  }
  const DriveError before = drive_errors({0.5, 0.8}), after = drive_errors({0.7, 0.8});
  const RewardVector r = reward(before, after, {1.0, 2.0});
  CHECK(r[Drive::energy] == doctest::Approx(0.4));
  CHECK(r[Drive::safety] == 0.0);
  const RewardVector worse = reward(after, before);
  CHECK(worse[Drive::energy] < 0);
}

TEST_CASE("dominant drive") {
  DriveError e;
  e.value = {0.2, 0.5};
  CHECK(dominant_drive(e) == Drive::energy);
  CHECK(dominant_drive(e, {3.0, 1.0}) == Drive::safety);
  e.value = {0.3, 0.3};
  CHECK(dominant_drive(e) == Drive::safety);  // tie goes to kDrives order
}

TEST_CASE("reflex taxis") {
  const MotionLimits lim;
  const ReflexParams params;
  const ReflexSet prey = default_reflexes(EntityKind::prey, params);
  const ReflexSpec& eat = prey[index_of(Drive::energy)];
  const ReflexSpec& flee = prey[index_of(Drive::safety)];
  Rng rng(1);

  Percept p;
  p[Odor::food] = {0.6, 0.4};
  const ActionCommand toward = reflex_action(p, eat, lim, params, rng);
  CHECK(toward.turn_rate > 0);  // stronger on the left, turn left
  CHECK(within_limits(toward, lim));

  Percept threat;
  threat[Odor::predator] = {0.6, 0.4};
  const ActionCommand away = reflex_action(threat, flee, lim, params, rng);
  CHECK(away.turn_rate < 0);

  Percept even;
  even[Odor::food] = {0.5, 0.5};
  const ActionCommand straight = reflex_action(even, eat, lim, params, rng);
  CHECK(straight.turn_rate == 0.0);
  CHECK(straight.forward_speed == lim.max_speed);

  SUBCASE("rng untouched while a signal is present") {
    Rng a(7), b(7);
    for (int i = 0; i < 50; ++i) reflex_action(p, eat, lim, params, a);
    CHECK(a == b);
  }
  SUBCASE("random walk below the noise floor stays in bounds") {
    Percept faint;
    faint[Odor::food] = {0.001, 0.002};
    Rng a(7);
    for (int i = 0; i < 1000; ++i) REQUIRE(within_limits(reflex_action(faint, eat, lim, params, a), lim));
    CHECK_FALSE(a == Rng(7));
  }
  SUBCASE("predator reflexes chase prey") {
    const ReflexSet pred = default_reflexes(EntityKind::predator, params);
    Percept q;
    q[Odor::prey] = {0.2, 0.5};
    CHECK(reflex_action(q, pred[index_of(Drive::energy)], lim, params, rng).turn_rate < 0);
  }
}
