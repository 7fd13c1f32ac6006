#include <doctest.h>

#include <cmath>
#include <sstream>

#include "dac/contextual.hpp"
#include "dac/error.hpp"
#include "dac/oracles.hpp"

using namespace dac;

TEST_CASE("transition graph counts") {
  TransitionGraph g(3);
  g.record(0, 1, 2);
  CHECK(g.probability(0, 1, 2) == 1.0);
  g.record(0, 1, 0);
  CHECK(g.probability(0, 1, 2) == 0.5);
  CHECK(g.probability(0, 1, 0) == 0.5);
  CHECK(g.probability(2, 0, 0) == 0.0);
  CHECK_THROWS_AS(g.record(3, 0, 0), Error);
  CHECK_THROWS_AS(g.record(0, kActionCount, 0), Error);

  SUBCASE("count replay and exact normalization") {
    TransitionGraph h(12);
    std::map<std::tuple<std::size_t, std::size_t, std::size_t>, std::uint64_t> ref;
    Rng rng(6);
    for (int i = 0; i < 10000; ++i) {
      const std::size_t p = rng.below(12), a = rng.below(kActionCount), n = rng.below(12);
      h.record(p, a, n);
      ++ref[{p, a, n}];
    }
    for (std::size_t p = 0; p < 12; ++p)
      for (std::size_t a = 0; a < kActionCount; ++a) {
        std::uint64_t total = 0;
        for (std::size_t n = 0; n < 12; ++n) total += ref[{p, a, n}];
        REQUIRE(h.total(p, a) == total);
        std::uint64_t sum = 0;
        for (const auto& [n, c] : h.successors(p, a)) {
          CHECK(c == ref[{p, a, n}]);
          CHECK(h.probability(p, a, n) == static_cast<double>(c) / static_cast<double>(total));
          sum += c;
        }
        CHECK(sum == total);
      }
  }
  SUBCASE("cached arcs follow the counts") {
    TransitionGraph h(5);
    Rng rng(9);
    auto expected = [&](std::size_t p) {
      std::vector<TransitionGraph::Arc> want;
      for (std::size_t a = 0; a < kActionCount; ++a)
        for (const auto& [n, c] : h.successors(p, a))
          want.push_back({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(n), -std::log(h.probability(p, a, n))});
      return want;
    };
    auto same = [](const std::vector<TransitionGraph::Arc>& x, const std::vector<TransitionGraph::Arc>& y) {
      if (x.size() != y.size()) return false;
      for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i].action != y[i].action || x[i].next != y[i].next || x[i].neg_log != y[i].neg_log) return false;
      return true;
    };
    for (int i = 0; i < 2000; ++i) {
      h.record(rng.below(5), rng.below(kActionCount), rng.below(5));
      const std::size_t p = rng.below(5);
      REQUIRE(same(h.arcs(p), expected(p)));
    }
    std::stringstream ss;
    h.write_edges(ss);
    const TransitionGraph back = TransitionGraph::read_edges(ss);
    CHECK(back == h);
    for (std::size_t p = 0; p < 5; ++p) CHECK(same(back.arcs(p), h.arcs(p)));
  }
  SUBCASE("edge list round trip") {
    std::stringstream ss;
    g.write_edges(ss);
    CHECK(TransitionGraph::read_edges(ss) == g);
    std::stringstream bad("# nodes 2\n0 0 5 1\n");
    CHECK_THROWS_AS(TransitionGraph::read_edges(bad), Error);
  }
}

TEST_CASE("learning progress") {
  std::deque<bool> all_good(20, true);
  CHECK(learning_progress(all_good, 10) == 0.0);
  std::deque<bool> ramp;
  for (int i = 0; i < 5; ++i) ramp.push_back(false);
  for (int i = 0; i < 5; ++i) ramp.push_back(true);
  CHECK(learning_progress(ramp, 5) == 1.0);
  std::deque<bool> short_history(19, true);
  CHECK(learning_progress(short_history, 10) == 0.0);

  SUBCASE("GoalBook matches a sliding-window fold") {
    GoalBook book(10);
    std::vector<bool> history;
    Rng rng(12);
    for (int i = 0; i < 2000; ++i) {
      const bool ok = rng.bernoulli(0.3 + 0.4 * std::sin(i / 50.0));
      book.update(7, ok);
      history.push_back(ok);
      REQUIRE(book.progress(7) == oracle::learning_progress_fold(history, 10));
      REQUIRE(book.find(7)->outcomes.size() <= 20);
    }
    CHECK(book.find(7)->attempts == 2000);
    CHECK(book.progress(99) == 0.0);
  }
  SUBCASE("stationary streams stay near zero") {
    Rng rng(21);
    GoalBook book(10);
    double sum = 0;
    for (int w = 0; w < 200; ++w) {
      for (int i = 0; i < 10; ++i) book.update(0, rng.bernoulli(0.4));
      if (w > 0) sum += book.progress(0);
      REQUIRE(std::abs(book.progress(0)) <= 1.0);
    }
    CHECK(std::abs(sum / 199.0) < 0.15);
  }
  SUBCASE("round trip") {
    GoalBook book(4);
    book.update(1, true);
    book.update(3, false);
    std::stringstream ss;
    book.write(ss);
    CHECK(GoalBook::read(ss) == book);
  }
}

TEST_CASE("select_goal") {
  ValueTable v;
  GoalBook goals;
  Rng rng(1);
  CHECK_THROWS_AS(select_goal(v, Drive::energy, goals, {}, rng), Error);
  v.add_row();
  CHECK(select_goal(v, Drive::energy, goals, {}, rng) == 0);
  v.add_row();
  v.add_row();
  v.set(Drive::energy, 1, 0, 0.7);
  v.set(Drive::energy, 2, 0, 0.3);
  for (int i = 0; i < 10; ++i) CHECK(select_goal(v, Drive::energy, goals, {0.0, 0.0}, rng) == 1);
  CHECK(select_goal(v, Drive::energy, goals, {0.0, 0.0}, rng, 1) == 2);

  SUBCASE("learning progress bonus lifts a lower-value goal") {
    for (int i = 0; i < 10; ++i) goals.update(2, false);
    for (int i = 0; i < 10; ++i) goals.update(2, true);
    CHECK(select_goal(v, Drive::energy, goals, {0.5, 0.0}, rng) == 2);
  }
}

TEST_CASE("plan") {
  const PlanParams params;
  TransitionGraph g(4);
  g.record(0, 1, 1);
  g.record(1, 2, 2);
  const auto self = plan(g, 1, 1, params);
  REQUIRE(self.has_value());
  CHECK(self->steps.empty());
  CHECK(self->complete());
  CHECK_FALSE(plan(g, 0, 3, params).has_value());
  CHECK_FALSE(plan(g, 0, 99, params).has_value());
  const auto p = plan(g, 0, 2, params);
  REQUIRE(p.has_value());
  REQUIRE(p->steps.size() == 2);
  CHECK(p->steps[0] == PlanStep{1, 1});
  CHECK(p->steps[1] == PlanStep{2, 2});
  CHECK(p->cost == doctest::Approx(0.02));

  SUBCASE("likely path beats short unlikely path") {
    TransitionGraph h(3);
    for (int i = 0; i < 9; ++i) h.record(0, 0, 1);
    h.record(0, 0, 2);  // p = 0.1 direct
    for (int i = 0; i < 5; ++i) h.record(1, 0, 2);
    const auto q = plan(h, 0, 2, params);
    REQUIRE(q.has_value());
    CHECK(q->steps.size() == 2);
  }
  SUBCASE("random graphs agree with reference shortest paths") {
    for (std::uint64_t s = 0; s < 100; ++s) {
      const auto h = oracle::random_graph(5 + s % 26, 0.08, s);
      for (std::size_t to = 0; to < h.nodes(); to += 3) {
        const auto got = plan(h, 0, to, params);
        const auto want = oracle::reference_cost(h, 0, to, params.step_cost);
        REQUIRE(got.has_value() == want.has_value());
        if (got) REQUIRE(std::abs(got->cost - *want) < 1e-9);
      }
    }
  }
  SUBCASE("never worse than exhaustive enumeration on small graphs") {
    for (std::uint64_t s = 0; s < 60; ++s) {
      const auto h = oracle::random_graph(3 + s % 6, 0.2, 1000 + s);
      for (std::size_t to = 1; to < h.nodes(); ++to) {
        const auto got = plan(h, 0, to, params);
        const auto best = oracle::exhaustive_cost(h, 0, to, params.step_cost);
        REQUIRE(got.has_value() == best.has_value());
        if (got) REQUIRE(got->cost <= *best + 1e-12);
      }
    }
  }
}

namespace {

// Reference state machine for plan execution.
struct RefPlan {
  std::vector<PlanStep> steps;
  std::size_t origin, cursor = 0, miss = 0;
  PlanDecision feed(std::size_t obs, std::size_t m_max) {
    const std::size_t here = cursor == 0 ? origin : steps[cursor - 1].expected;
    if (cursor < steps.size() && obs == steps[cursor].expected) {
      ++cursor;
      miss = 0;
      if (cursor == steps.size()) return {PlanDecision::Kind::complete, 0};
      return {PlanDecision::Kind::act, steps[cursor].action};
    }
    if (cursor >= steps.size()) return {PlanDecision::Kind::complete, 0};
    if (obs == here) {
      miss = 0;
      return {PlanDecision::Kind::act, steps[cursor].action};
    }
    if (++miss > m_max) return {PlanDecision::Kind::abort, 0};
    return {PlanDecision::Kind::act, steps[cursor].action};
  }
};

}  // namespace

TEST_CASE("plan_step") {
  Plan p{0, 3, {{1, 1}, {2, 2}, {4, 3}}, 0.0, 0, 0};
  auto d = plan_step(p, 1, 2);
  CHECK(d.kind == PlanDecision::Kind::act);
  CHECK(d.action == 2);
  CHECK(p.remaining() == 2);

  Plan q{0, 3, {{1, 1}, {2, 2}}, 0.0, 0, 0};
  CHECK(plan_step(q, 7, 2).kind == PlanDecision::Kind::act);
  CHECK(plan_step(q, 7, 2).kind == PlanDecision::Kind::act);
  CHECK(plan_step(q, 7, 2).kind == PlanDecision::Kind::abort);

  SUBCASE("scripted observations follow the reference machine") {
    Rng rng(5);
    for (int trial = 0; trial < 500; ++trial) {
      Plan live;
      live.origin = rng.below(4);
      const std::size_t len = 1 + rng.below(5);
      for (std::size_t i = 0; i < len; ++i) live.steps.push_back({rng.below(kActionCount), rng.below(4)});
      RefPlan ref{live.steps, live.origin};
      for (int t = 0; t < 20; ++t) {
        const std::size_t obs = rng.below(4);
        const auto got = plan_step(live, obs, 2);
        const auto want = ref.feed(obs, 2);
        REQUIRE(got.kind == want.kind);
        if (got.kind != PlanDecision::Kind::act) break;
        REQUIRE(got.action == want.action);
      }
    }
  }
}

TEST_CASE("episode store") {
  EpisodeStore s;
  CHECK(s.lookup(0, 10).empty());
  s.append({1, 4, 2, {}, std::nullopt});
  REQUIRE(s.lookup(4, 10).size() == 1);
  CHECK(s.lookup(4, 10)[0].step == 1);
  CHECK_THROWS_AS(s.append({0, 4, 2, {}, std::nullopt}), Error);

  SUBCASE("linear-scan oracle") {
    EpisodeStore big(3000);
    std::vector<Episode> log;
    Rng rng(3);
    for (std::uint64_t t = 0; t < 10000; ++t) {
      Episode e{t, rng.below(40), rng.below(kActionCount), {}, std::nullopt};
      e.reward.value = {rng.uniform(), rng.uniform()};
      if (rng.bernoulli(0.3)) e.goal = rng.below(40);
      big.append(e);
      log.push_back(e);
      if (log.size() > 3000) log.erase(log.begin());
      if (t % 97 == 0) {
        const std::size_t proto = rng.below(40), limit = 1 + rng.below(30);
        std::vector<Episode> want;
        for (auto it = log.rbegin(); it != log.rend() && want.size() < limit; ++it)
          if (it->prototype == proto) want.push_back(*it);
        REQUIRE(big.lookup(proto, limit) == want);
      }
    }
    CHECK(big.size() == 3000);
    CHECK(big.evicted() == 7000);
    std::stringstream ss;
    big.write(ss);
    CHECK(EpisodeStore::read(ss) == big);
  }
}
