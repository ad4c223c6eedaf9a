#include "support.hpp"

#include <algorithm>
#include <sstream>

namespace rs_test {

const std::vector<Table>& loophole1_tables() {
  static const std::vector<Table> tables = {
      {"Initial State", {{"A", 1000, 900, 100, 100}, {"B", 1000, 0, 1000, 100}}, 2000, 900},
      {"Step 1", {{"A", 1000, 0, 1000, 100}, {"B", 100, 0, 100, 100}}, 1100, 900},
      {"Step 2", {{"A", 1000, 900, 100, 100}, {"B", 1000, 0, 1000, 100}}, 2000, 1800},
      {"Step 3", {{"A", 1000, 0, 1000, 100}, {"B", 100, 0, 100, 100}}, 1100, 1800},
      {"Step 4", {{"A", 1000, 900, 100, 100}, {"B", 1000, 0, 1000, 100}}, 2000, 2700},
  };
  return tables;
}

const std::vector<Table>& loophole2_tables() {
  static const std::vector<Table> tables = {
      {"Initial State", {{"A", 1000, 900, 100, 100}, {"B", 1000, 0, 1000, 100}}, 2000, 900},
      {"Step 1", {{"A", 1000, 0, 1000, 100}, {"B", 100, 0, 100, 100}}, 1100, 900},
      {"Step 2", {{"A", 1010, 0, 1010, 115}, {"B", 100, 0, 100, 100}}, 1110, 900},
      {"Step 3", {{"A", 1010, 909, 101, 115}, {"B", 1009, 0, 1009, 100}}, 2019, 1809},
  };
  return tables;
}

const MetricsSnapshot* find_label(const MetricsSeries& series, std::string_view label) {
  for (const auto& s : series.snapshots)
    if (s.label == label) return &s;
  return nullptr;
}

std::string compare_table(const MetricsSnapshot& snap, const Table& table) {
  std::ostringstream err;
  auto check = [&](std::string_view what, Money got, std::int64_t want) {
    if (got != U(want)) err << table.label << " " << what << ": got " << got.to_string() << " want " << want << "; ";
  };
  if (snap.banks.size() != table.rows.size()) err << table.label << ": bank count differs; ";
  for (const auto& row : table.rows) {
    const auto* b = snap.bank(row.bank);
    if (!b) {
      err << table.label << ": no bank " << row.bank << "; ";
      continue;
    }
    check(row.bank + ".deposits", b->deposits, row.deposits);
    check(row.bank + ".loans", b->loans, row.loans);
    check(row.bank + ".cash", b->cash, row.cash);
    check(row.bank + ".equity", b->equity_book(), row.equity);
  }
  check("sum deposits", snap.money_supply, table.money);
  check("sum loans+mbs", snap.total_debt(), table.debt);
  return err.str();
}

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) { return a / b - ((a % b != 0) && ((a < 0) != (b < 0))); }
std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return -floor_div(-a, b); }

} // namespace

std::vector<Loophole2Checkpoint> loophole2_oracle(int cycles) {
  // Bank A after the setup loan; B is only a depositor/buyer.
  std::int64_t a_dep = 100000, a_loans = 90000, a_cash = 10000, a_eq = 10000;
  std::int64_t b_dep = 100000;
  std::vector<std::int64_t> equity_faces; // booked retained tranches, valued at 1/2
  std::vector<Loophole2Checkpoint> out;

  for (int c = 0; c < cycles; ++c) {
    const std::int64_t book = a_loans;
    const std::int64_t senior = book * 850 / 900;
    const std::int64_t retained = book - senior;
    // sale of the senior tranche at the full book: the premium carries the
    // retained tranche off the deposit books
    b_dep -= book;
    a_cash += book;
    a_loans = 0;
    equity_faces.push_back(retained);
    const std::int64_t bonus = retained / 5;
    a_eq -= bonus;
    a_dep += bonus;
    a_cash += bonus;

    std::int64_t instruments = 0;
    for (auto f : equity_faces) instruments += f / 2;
    // capital counts instruments only up to half the (zero) risk-weighted book
    const std::int64_t capital = a_eq + std::min<std::int64_t>(instruments, 0);
    const std::int64_t reserve_bound = a_cash - ceil_div(a_dep, 10);
    const std::int64_t capital_bound = capital * 10 * 2;
    const std::int64_t lend = std::max<std::int64_t>(0, std::min(reserve_bound, capital_bound));
    a_loans += lend;
    a_cash -= lend;
    b_dep += lend;

    const std::int64_t rwa = ceil_div(a_loans, 2);
    out.push_back({lend, a_dep + b_dep, a_eq + instruments, a_eq + std::min(instruments, floor_div(rwa, 2))});
  }
  return out;
}

const std::vector<Loophole2Checkpoint>& loophole2_fixture() {
  static const std::vector<Loophole2Checkpoint> fixture = {
      {90900, 201900, 11500, 11500}, {91809, 203819, 13015, 13015}, {92727, 205757, 14545, 14545},
      {93654, 207714, 16091, 16091}, {94590, 209690, 17652, 17652}, {76980, 193131, 19228, 19228},
  };
  return fixture;
}

std::vector<std::int64_t> textbook_oracle(std::int64_t m0, std::int64_t r_num, std::int64_t r_den, int rounds) {
  std::vector<std::int64_t> money{m0};
  for (int k = 0; k < rounds; ++k) money.push_back(m0 + floor_div(money.back() * (r_den - r_num), r_den));
  return money;
}

// ---- randomized states --------------------------------------------------------------

namespace {

std::int64_t pick(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
  if (hi < lo) return lo;
  return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
}

std::vector<std::string> all_accounts(const SystemState& s) {
  std::vector<std::string> out;
  for (const auto& [id, bank] : s.account_bank) out.push_back(id);
  return out;
}

// Largest amount `payer` can move out of its bank to anywhere.
Money payable(const SystemState& s, const std::string& payer) {
  const auto& acct = s.account(payer);
  return min(acct.balance, s.bank(acct.bank).cash);
}

std::string check_books(const SystemState& s) {
  try {
    verify_invariants(s);
  } catch (const InvariantViolation& e) {
    return e.what();
  }
  for (const auto& [id, b] : s.banks)
    if (!check_balance_identity(s, b)) return "balance identity broken at " + id;
  return {};
}

struct RandomWorld {
  SystemState state;
  RegulatoryParams params;
  std::string lender;
};

RandomWorld random_world(std::mt19937_64& rng) {
  RandomWorld w;
  const int banks = static_cast<int>(pick(rng, 2, 3));
  for (int i = 0; i < banks; ++i) {
    std::string id(1, static_cast<char>('A' + i));
    create_bank(w.state, id, C(pick(rng, 10000, 1000000)), C(pick(rng, 0, 100000)));
  }
  const std::string inv_bank(1, static_cast<char>('A' + pick(rng, 0, banks - 1)));
  open_account(w.state, inv_bank, "investor", AccountKind::Other);
  w.lender = std::string(1, static_cast<char>('A' + pick(rng, 0, banks - 1)));
  return w;
}

} // namespace

std::string repayment_asymmetry_case(std::mt19937_64& rng, bool& skipped) {
  skipped = false;
  RandomWorld w = random_world(rng);
  auto& s = w.state;
  const auto accounts = all_accounts(s);
  const LoanKind kind = pick(rng, 0, 1) ? LoanKind::Mortgage : LoanKind::Other;
  std::string held, sold;

  try {
    Money h = lending_headroom(s, s.bank(w.lender), w.params, kind);
    if (h < C(2)) {
      skipped = true;
      return {};
    }
    held = originate_loan(s, w.params, w.lender, kind, C(pick(rng, 1, h.minor_units() / 2)),
                                     accounts[pick(rng, 0, accounts.size() - 1)])
                          .loan_id;
    h = lending_headroom(s, s.bank(w.lender), w.params, kind);
    if (!h.is_positive()) {
      skipped = true;
      return {};
    }
    sold = originate_loan(s, w.params, w.lender, kind, C(pick(rng, 1, h.minor_units())),
                                     accounts[pick(rng, 0, accounts.size() - 1)])
                          .loan_id;

    std::vector<TrancheSpec> specs;
    const int n = static_cast<int>(pick(rng, 1, 3));
    for (int i = 1; i < n; ++i) specs.push_back({"t" + std::to_string(i), std::nullopt, Ratio{pick(rng, 1, 30), 100}});
    specs.push_back({"rest", std::nullopt, std::nullopt});
    const std::vector<std::string> ids{sold};
    securitize(s, w.lender, "S", ids, specs);

    for (const auto& t : std::vector<Tranche>(s.security("S").tranches)) {
      std::vector<std::string> buyers;
      for (const auto& a : accounts)
        if (s.account(a).balance >= t.face) buyers.push_back(a);
      if (buyers.empty()) {
        skipped = true;
        return {};
      }
      const auto& buyer = buyers[pick(rng, 0, buyers.size() - 1)];
      const Money premium = C(pick(rng, 0, std::min<std::int64_t>(500, (s.account(buyer).balance - t.face).minor_units())));
      sell_security(s, "S", t.label, buyer, t.face + premium);
    }

    for (int i = 0, moves = static_cast<int>(pick(rng, 0, 3)); i < moves; ++i) {
      const auto& from = accounts[pick(rng, 0, accounts.size() - 1)];
      const auto& to = accounts[pick(rng, 0, accounts.size() - 1)];
      transfer(s, from, to, C(pick(rng, 0, payable(s, from).minor_units())));
    }
  } catch (const LedgerError&) {
    skipped = true;
    return {};
  }

  const Money money0 = money_supply(s);
  const Money cash0 = total_system_cash(s);
  bool ran = false;

  auto repay_case = [&](const std::string& loan, bool securitized) -> std::string {
    std::vector<std::string> payers;
    for (const auto& a : accounts)
      if (payable(s, a).is_positive()) payers.push_back(a);
    if (payers.empty()) return {};
    const auto& payer = payers[pick(rng, 0, payers.size() - 1)];
    const Money cap = min(payable(s, payer), s.loan(loan).outstanding);
    if (!cap.is_positive()) return {};
    const Money x = C(pick(rng, 1, cap.minor_units()));

    SystemState t = s;
    try {
      repay_loan(t, loan, x, payer);
    } catch (const LedgerError& e) {
      return std::string("repayment refused: ") + e.what();
    }
    ran = true;
    const Money expected = securitized ? money0 : money0 - x;
    std::ostringstream err;
    if (money_supply(t) != expected) {
      err << (securitized ? "securitized" : "bank-held") << " repay " << x.to_string() << ": money "
          << money0.to_string() << " -> " << money_supply(t).to_string();
      return err.str();
    }
    if (total_system_cash(t) != cash0) return "system cash changed on repayment";
    return check_books(t);
  };

  if (auto e = repay_case(sold, true); !e.empty()) return e;
  if (auto e = repay_case(held, false); !e.empty()) return e;
  if (!ran) skipped = true;
  return {};
}

std::string regulatory_gate_case(std::mt19937_64& rng, bool& skipped) {
  skipped = false;
  RandomWorld w = random_world(rng);
  auto& s = w.state;
  auto& p = w.params;
  p.reserve_ratio = Ratio{pick(rng, 0, 20), 100};
  p.adequate_ratio = Ratio{pick(rng, 1, 10), 100};
  p.well_capitalized_ratio = Ratio{p.adequate_ratio.num() + pick(rng, 0, 10), 100};
  p.risk_weight_mortgage = Ratio{pick(rng, 0, 100), 100};
  p.risk_weight_other = Ratio{pick(rng, 50, 100), 100};
  p.tier2_cap_share = Ratio{pick(rng, 0, 8), 100};
  p.mbs_equity_valuation_weight = Ratio{pick(rng, 0, 100), 100};
  const auto accounts = all_accounts(s);
  const std::string proceeds = accounts[pick(rng, 0, accounts.size() - 1)];

  try {
    // Existing book, some of it past the regulatory limits.
    for (int i = 0, n = static_cast<int>(pick(rng, 0, 3)); i < n; ++i) {
      const Money room = s.bank(w.lender).cash;
      if (!room.is_positive()) break;
      originate_loan(s, p, w.lender, pick(rng, 0, 1) ? LoanKind::Mortgage : LoanKind::Other,
                     C(pick(rng, 1, room.minor_units())), accounts[pick(rng, 0, accounts.size() - 1)], std::nullopt,
                     true);
    }
    if (pick(rng, 0, 2) == 0) {
      auto held = held_performing_loans(s, w.lender);
      if (!held.empty()) {
        std::vector<TrancheSpec> specs{{"senior", std::nullopt, Ratio{pick(rng, 50, 99), 100}},
                                       {"retained", std::nullopt, std::nullopt}};
        securitize(s, w.lender, "S", held, specs);
        const Money face = s.security("S").find_tranche("senior")->face;
        std::vector<std::string> buyers;
        for (const auto& a : accounts)
          if (s.account(a).balance >= face) buyers.push_back(a);
        if (!buyers.empty()) sell_security(s, "S", "senior", buyers[pick(rng, 0, buyers.size() - 1)], face);
        book_security_to_equity(s, p, w.lender, "S", "retained");
      }
    }
  } catch (const LedgerError&) {
    skipped = true;
    return {};
  }

  const LoanKind kind = pick(rng, 0, 1) ? LoanKind::Mortgage : LoanKind::Other;
  const Money h = lending_headroom(s, s.bank(w.lender), p, kind);
  const Money over = h + C(1);
  {
    SystemState t = s;
    try {
      originate_loan(t, p, w.lender, kind, over, proceeds);
      return "headroom+1 accepted: headroom " + h.to_string();
    } catch (const RegulatoryBreach&) {
    } catch (const LedgerError& e) {
      return std::string("headroom+1 refused for the wrong reason: ") + e.what();
    }
    if (t.bank(w.lender).held_loans != s.bank(w.lender).held_loans) return "refused origination changed the state";
  }
  if (!h.is_positive()) return {};

  SystemState t = s;
  try {
    originate_loan(t, p, w.lender, kind, h, proceeds);
  } catch (const std::exception& e) {
    return "lending exactly headroom " + h.to_string() + " failed: " + e.what();
  }
  if (classify_capitalization(t, t.bank(w.lender), p) == Capitalization::Under) {
    return "under-capitalized after lending headroom " + h.to_string();
  }
  if (t.bank(w.lender).cash < required_reserves(t.bank(w.lender), p)) return "reserves short after lending headroom";
  return check_books(t);
}

PropertyTally run_property(std::string (*one_case)(std::mt19937_64&, bool&), int cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  PropertyTally tally;
  int attempts = 0;
  while (tally.checked < cases && attempts < cases * 20) {
    ++attempts;
    bool skipped = false;
    std::string err = one_case(rng, skipped);
    if (skipped) continue;
    ++tally.checked;
    if (!err.empty()) {
      if (tally.violations++ == 0) tally.first_violation = err;
    }
  }
  return tally;
}

} // namespace rs_test
