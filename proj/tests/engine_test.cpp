#include <doctest.h>

#include "support.hpp"

using namespace rs_test;

namespace {

const RegulatoryParams kParams;

SystemState step1_state() {
  SystemState s = two_bank_initial_state(kParams);
  const std::vector<std::string> loans{"L0"};
  const std::vector<TrancheSpec> whole{{"whole", std::nullopt, std::nullopt}};
  securitize(s, "A", "MBS1", loans, whole);
  sell_security(s, "MBS1", "whole", "B.dep", U(900));
  return s;
}

Event lend(Money amount, bool override_regulation = false) {
  return Event{OriginateOp{"A", LoanKind::Mortgage, amount, "B.dep", std::nullopt}, "lend", override_regulation};
}

} // namespace

TEST_CASE("apply_event: lending from step 1 gives the step-2 snapshot") {
  auto out = apply_event(step1_state(), kParams, lend(U(900)), 1);
  CHECK(compare_table(out.snapshot, {"Step 2", {{"A", 1000, 900, 100, 100}, {"B", 1000, 0, 1000, 100}}, 2000, 1800})
            .empty());
  CHECK_FALSE(out.breach.has_value());
  CHECK(out.snapshot.step == 1);
  CHECK(out.snapshot.event == "originate");
}

TEST_CASE("apply_event: no-op keeps the state") {
  const SystemState s = step1_state();
  auto out = apply_event(s, kParams, Event{NoOp{}, "", false}, 7);
  CHECK(take_snapshot(out.state, kParams, 7).banks == take_snapshot(s, kParams, 7).banks);
}

TEST_CASE("apply_event: breach without override leaves the state and records it") {
  const SystemState s = step1_state();
  auto out = apply_event(s, kParams, lend(U(901)), 3);
  REQUIRE(out.breach.has_value());
  CHECK(out.breach->step == 3);
  CHECK(out.breach->breach.requested == U(901));
  CHECK(out.breach->breach.headroom == U(900));
  CHECK_FALSE(out.breach->breach.overridden);
  CHECK(out.state.loans.size() == s.loans.size());
  CHECK(out.snapshot.money_supply == U(1100));

  auto forced = apply_event(s, kParams, lend(U(901), true), 3);
  REQUIRE(forced.breach.has_value());
  CHECK(forced.breach->breach.overridden);
  CHECK(forced.snapshot.money_supply == U(2001));
}

TEST_CASE("apply_event: headroom amounts resolve at apply time") {
  auto out = apply_event(step1_state(), kParams, Event{OriginateOp{"A", LoanKind::Mortgage, HeadroomAmount{}, "B.dep", {}}, "", false}, 1);
  CHECK(out.snapshot.bank("A")->loans == U(900));
  SystemState drained = out.state;
  auto again = apply_event(drained, kParams, Event{OriginateOp{"A", LoanKind::Mortgage, HeadroomAmount{}, "B.dep", {}}, "", false}, 2);
  CHECK(again.state.loans.size() == drained.loans.size());
}

TEST_CASE("apply_event: operation errors propagate") {
  CHECK_THROWS_AS(apply_event(step1_state(), kParams, Event{TransferOp{"B.dep", "A.dep", U(5000)}, "", false}, 1),
                  LedgerError);
}

TEST_CASE("run_events stops on an operation error with a failure marker") {
  std::vector<Event> events{lend(U(100)), Event{TransferOp{"B.dep", "nowhere", U(1)}, "", false}, lend(U(100))};
  auto run = run_events(step1_state(), kParams, events);
  CHECK(run.status == RunStatus::OperationError);
  REQUIRE(run.series.failure.has_value());
  CHECK(run.series.snapshots.size() == 2);
}

TEST_CASE("textbook expansion matches the cumulative-floor recursion") {
  auto series = textbook_expansion(U(1000), Ratio{1, 10}, 120);
  const auto oracle = textbook_oracle(100000, 1, 10, 120);
  REQUIRE(series.snapshots.size() == oracle.size());
  for (std::size_t k = 0; k < oracle.size(); ++k) {
    CHECK(series.snapshots[k].money_supply == C(oracle[k]));
    CHECK(series.snapshots[k].bank_held_loans == C(oracle[k] - 100000));
  }
  CHECK(series.snapshots[3].money_supply == U(3439));
  CHECK(series.snapshots[3].bank_held_loans == U(2439));
  CHECK(series.snapshots.back().money_supply == C(999991));
}

TEST_CASE("textbook expansion: geometric series check for round 3") {
  // 1000 * sum_{k=0..3} (9/10)^k = 1000 * (1000 + 900 + 810 + 729) / 1000
  std::int64_t num = 0, term = 1000;
  for (int k = 0; k <= 3; ++k, term = term * 9 / 10) num += term;
  auto series = textbook_expansion(U(1000), Ratio{1, 10}, 3);
  CHECK(series.snapshots.back().money_supply == U(num));
}

TEST_CASE("textbook expansion: full reserve, zero rounds, bad ratio") {
  auto full = textbook_expansion(U(1000), Ratio::one(), 5);
  for (const auto& s : full.snapshots) {
    CHECK(s.money_supply == U(1000));
    CHECK(s.bank_held_loans == Money{});
  }
  CHECK(textbook_expansion(U(1000), Ratio{1, 10}, 0).snapshots.size() == 1);
  CHECK_THROWS(textbook_expansion(U(1000), Ratio::zero(), 3));
  CHECK_THROWS(textbook_expansion(U(1000), Ratio{1, 10}, -1));
}

TEST_CASE("loophole 1 reproduces the five tables") {
  auto run = run_loophole1(two_bank_initial_state(kParams), kParams, 2);
  REQUIRE(run.status == RunStatus::Completed);
  CHECK(compare_table(run.series.snapshots.front(), loophole1_tables().front()).empty());
  for (std::size_t i = 1; i < loophole1_tables().size(); ++i) {
    const auto& t = loophole1_tables()[i];
    const auto* snap = find_label(run.series, t.label);
    REQUIRE(snap != nullptr);
    CHECK_MESSAGE(compare_table(*snap, t).empty(), compare_table(*snap, t));
  }
}

TEST_CASE("loophole 1: zero cycles, and the closed form at 100") {
  auto zero = run_loophole1(two_bank_initial_state(kParams), kParams, 0);
  CHECK(zero.series.snapshots.size() == 1);
  auto run = run_loophole1(two_bank_initial_state(kParams), kParams, 100);
  CHECK(run.series.snapshots.back().total_debt() == U(900 * 101));
  for (const auto& s : run.series.snapshots) {
    CHECK((s.money_supply == U(1100) || s.money_supply == U(2000)));
    CHECK(s.system_cash() == U(1300));
  }
}

TEST_CASE("loophole 1: debt-to-money never falls across cycles and passes 10 by cycle 25") {
  auto run = run_loophole1(two_bank_initial_state(kParams), kParams, 25);
  std::optional<Ratio> prev;
  int first_above_10 = -1;
  int cycle = 0;
  for (const auto& s : run.series.snapshots) {
    if (s.label.rfind("Step ", 0) != 0) continue;
    const int step = std::stoi(s.label.substr(5));
    if (step % 2 != 0) continue; // cycle boundary: after the re-lend
    cycle = step / 2;
    auto r = s.debt_to_money();
    REQUIRE(r.has_value());
    if (prev) CHECK(*prev <= *r);
    prev = r;
    if (first_above_10 < 0 && *r > Ratio{10, 1}) first_above_10 = cycle;
  }
  CHECK(cycle == 25);
  // after the re-lend money is 2000, debt 900(c+1): above 10 once c >= 22
  CHECK(first_above_10 == 22);
}

TEST_CASE("loophole 2: cycle 1 reproduces steps 1-3") {
  auto run = run_loophole2(two_bank_initial_state(kParams), kParams, 1);
  REQUIRE(run.status == RunStatus::Completed);
  for (std::size_t i = 1; i < loophole2_tables().size(); ++i) {
    const auto& t = loophole2_tables()[i];
    const auto* snap = find_label(run.series, t.label);
    REQUIRE(snap != nullptr);
    CHECK_MESSAGE(compare_table(*snap, t).empty(), compare_table(*snap, t));
  }
  const auto* step3 = find_label(run.series, "Step 3");
  CHECK(step3->bank("A")->equity_capital == U(115));
  CHECK(step3->bank("A")->equity_mbs_face == U(50));
}

TEST_CASE("loophole 2: the library agrees with the hand ledger, which agrees with the frozen fixture") {
  const auto oracle = loophole2_oracle(6);
  const auto& fixture = loophole2_fixture();
  REQUIRE(oracle.size() == fixture.size());
  for (std::size_t i = 0; i < fixture.size(); ++i) {
    CHECK(oracle[i].loan == fixture[i].loan);
    CHECK(oracle[i].money == fixture[i].money);
    CHECK(oracle[i].book_equity == fixture[i].book_equity);
    CHECK(oracle[i].regulatory_equity == fixture[i].regulatory_equity);
  }

  auto run = run_loophole2(two_bank_initial_state(kParams), kParams, 6);
  std::vector<const MetricsSnapshot*> ends;
  for (const auto& s : run.series.snapshots)
    if (s.label.size() >= 6 && s.label.compare(s.label.size() - 6, 6, "Step 3") == 0) ends.push_back(&s);
  REQUIRE(ends.size() == fixture.size());
  for (std::size_t i = 0; i < fixture.size(); ++i) {
    const auto* a = ends[i]->bank("A");
    CHECK(ends[i]->money_supply == C(fixture[i].money));
    CHECK(a->equity_book() == C(fixture[i].book_equity));
    CHECK(a->equity_capital == C(fixture[i].regulatory_equity));
  }
  CHECK(run.series.snapshots.back().bank("A")->loans == C(fixture.back().loan));
}

TEST_CASE("loophole 2: zero cycles is the initial state") {
  auto run = run_loophole2(two_bank_initial_state(kParams), kParams, 0);
  CHECK(run.series.snapshots.size() == 1);
  CHECK(compare_table(run.series.snapshots[0], loophole2_tables()[0]).empty());
}

TEST_CASE("replay is deterministic") {
  auto a = run_loophole2(two_bank_initial_state(kParams), kParams, 4);
  auto b = run_loophole2(two_bank_initial_state(kParams), kParams, 4);
  CHECK(a.series == b.series);
}

TEST_CASE("scripts: generator expansion and initial state") {
  ScenarioScript script;
  script.generator = GeneratorSpec{GeneratorKind::Loophole1, 2, true, {}, U(1000)};
  auto events = expand_script(script);
  CHECK(events.size() == 1 + 2 * 3);
  CHECK(events.front().label == "Initial State");
  auto s = initial_state(script);
  CHECK(s.banks.size() == 2);
  auto run = run_script(script);
  CHECK(find_label(run.series, "Step 4") != nullptr);

  ScenarioScript textbook;
  textbook.generator = GeneratorSpec{GeneratorKind::Textbook, 3, true, {}, U(1000)};
  CHECK(effective_params(textbook).risk_weight_mortgage.is_zero());
  CHECK(run_script(textbook).series.snapshots.back().money_supply == U(3439));

  ScenarioScript empty;
  CHECK(run_script(empty).series.snapshots.size() == 1);
}
