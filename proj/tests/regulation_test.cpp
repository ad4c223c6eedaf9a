#include <doctest.h>

#include "support.hpp"

using namespace rs_test;

namespace {

// Bank A with loans booked straight into its own deposits.
SystemState bank_with(Money deposits, Money equity, std::vector<std::pair<LoanKind, Money>> loans = {}) {
  SystemState s;
  create_bank(s, "A", deposits, equity);
  for (auto [kind, amount] : loans) originate_loan(s, RegulatoryParams{}, "A", kind, amount, "A.dep", std::nullopt, true);
  return s;
}

} // namespace

TEST_CASE("required reserves round up on net-transaction deposits") {
  RegulatoryParams p;
  CHECK(required_reserves(bank_with(U(1000), U(0)).bank("A"), p) == U(100));
  CHECK(required_reserves(bank_with(U(1010), U(0)).bank("A"), p) == U(101));
  CHECK(required_reserves(bank_with(Money{}, U(0)).bank("A"), p) == Money{});
  CHECK(required_reserves(bank_with(C(1001), U(0)).bank("A"), p) == C(101));

  auto s = bank_with(U(1000), U(0));
  open_account(s, "A", "A.time", AccountKind::Other);
  transfer(s, "A.dep", "A.time", U(400));
  CHECK(required_reserves(s.bank("A"), p) == U(60));
}

TEST_CASE("risk-weighted assets by loan kind") {
  RegulatoryParams p;
  auto m = bank_with(U(1000), U(100), {{LoanKind::Mortgage, U(900)}});
  CHECK(risk_weighted_assets(m, m.bank("A"), p) == U(450));
  auto o = bank_with(U(1000), U(100), {{LoanKind::Other, U(900)}});
  CHECK(risk_weighted_assets(o, o.bank("A"), p) == U(900));
  auto e = bank_with(U(1000), U(100));
  CHECK(risk_weighted_assets(e, e.bank("A"), p) == Money{});
  auto odd = bank_with(U(1000), U(100), {{LoanKind::Mortgage, C(1)}});
  CHECK(risk_weighted_assets(odd, odd.bank("A"), p) == C(1));
}

TEST_CASE("equity capital: book value, then the tier-2 cap") {
  RegulatoryParams p;
  // equity cash 90 plus a 50 tranche at half value
  SystemState s;
  create_bank(s, "A", U(1000), U(90));
  create_bank(s, "B", U(1000), U(0));
  originate_loan(s, p, "A", LoanKind::Mortgage, U(50), "B.dep");
  const std::vector<std::string> loans = held_performing_loans(s, "A");
  const std::vector<TrancheSpec> whole{{"whole", std::nullopt, std::nullopt}};
  securitize(s, "A", "S", loans, whole);
  book_security_to_equity(s, p, "A", "S", "whole");
  // booking bought the tranche out of equity cash: 90 - 50 + 25
  CHECK(equity_capital_book(s, s.bank("A")) == U(65));

  SystemState plain = bank_with(U(1000), U(100));
  CHECK(equity_capital_total(plain, plain.bank("A"), p) == U(100));

  // instruments only, no risk-weighted assets: the cap is zero
  SystemState t = s;
  t.bank("A").equity_cash = Money{};
  CHECK(risk_weighted_assets(t, t.bank("A"), p) == Money{});
  CHECK(equity_instrument_value(t, t.bank("A")) == U(25));
  CHECK(equity_capital_total(t, t.bank("A"), p) == Money{});
  CHECK(tier2_cap(Money{}, p) == Money{});
  CHECK(tier2_cap(U(450), p) == U(225));
  RegulatoryParams nocap = p;
  nocap.adequate_ratio = Ratio::zero();
  CHECK_FALSE(tier2_cap(U(450), nocap).has_value());
}

TEST_CASE("capitalization classes") {
  RegulatoryParams p;
  CHECK(classify_capitalization(U(100), U(450), p) == Capitalization::Well);
  CHECK(classify_capitalization(U(100), Money{}, p) == Capitalization::Well);
  CHECK(classify_capitalization(U(7), U(100), p) == Capitalization::Under);
  CHECK(classify_capitalization(U(9), U(100), p) == Capitalization::Adequate);
  CHECK(classify_capitalization(U(8), U(100), p) == Capitalization::Adequate);
  CHECK(classify_capitalization(U(10), U(100), p) == Capitalization::Well);
}

TEST_CASE("lending headroom: reserve bound on the loophole-1 step-1 state") {
  RegulatoryParams p;
  SystemState s;
  create_bank(s, "A", U(1000), U(100));
  auto b = lending_headroom_breakdown(s, s.bank("A"), p, LoanKind::Mortgage);
  CHECK(b.reserve == U(900));
  REQUIRE(b.capital.has_value());
  CHECK(*b.capital == U(2000));
  CHECK(b.headroom() == U(900));
}

TEST_CASE("lending headroom: zero equity lends nothing") {
  SystemState s;
  create_bank(s, "A", U(1000), Money{});
  CHECK(lending_headroom(s, s.bank("A"), RegulatoryParams{}, LoanKind::Mortgage) == Money{});
}

TEST_CASE("lending headroom with unit weights and no tier-2 is ten times equity") {
  RegulatoryParams p;
  p.risk_weight_mortgage = Ratio::one();
  p.tier2_cap_share = Ratio::zero();
  p.reserve_ratio = Ratio::zero();
  SystemState s;
  create_bank(s, "A", U(100000), U(100));
  CHECK(lending_headroom(s, s.bank("A"), p, LoanKind::Mortgage) == U(1000));
}

TEST_CASE("headroom is monotone in equity and cash, antitone in loans") {
  RegulatoryParams p;
  for (int eq = 0; eq <= 200; eq += 20) {
    SystemState lo = bank_with(U(1000), U(eq));
    SystemState hi = bank_with(U(1000), U(eq + 20));
    CHECK(lending_headroom(lo, lo.bank("A"), p, LoanKind::Other) <=
          lending_headroom(hi, hi.bank("A"), p, LoanKind::Other));
  }
  SystemState less = bank_with(U(900), U(50));
  SystemState more = bank_with(U(1000), U(50));
  CHECK(lending_headroom(less, less.bank("A"), p, LoanKind::Mortgage) <=
        lending_headroom(more, more.bank("A"), p, LoanKind::Mortgage));
  SystemState none = bank_with(U(1000), U(50));
  SystemState some = bank_with(U(1000), U(50), {{LoanKind::Other, U(100)}});
  CHECK(lending_headroom(some, some.bank("A"), p, LoanKind::Other) <=
        lending_headroom(none, none.bank("A"), p, LoanKind::Other));
}

TEST_CASE("params: names, validation, defaults") {
  RegulatoryParams p;
  CHECK(p.reserve_ratio == Ratio{1, 10});
  CHECK(p.adequate_ratio == Ratio{8, 100});
  CHECK(p.tier2_cap_share == Ratio{4, 100});
  CHECK(p.risk_weight_other == Ratio::one());
  for (const auto& name : RegulatoryParams::field_names()) CHECK_NOTHROW(p.get(name));
  p.set("reserve_ratio", Ratio::zero());
  CHECK(p.reserve_ratio.is_zero());
  CHECK_NOTHROW(p.validate());
  CHECK_THROWS(p.set("leverage", Ratio::one()));
  p.set("adequate_ratio", Ratio{3, 2});
  CHECK_THROWS(p.validate());
}
