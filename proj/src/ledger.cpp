#include "reservesim/ledger.hpp"

#include <set>

namespace reservesim {

std::string_view to_string(AccountKind k) {
  return k == AccountKind::NetTransaction ? "net-transaction" : "other";
}

std::string_view to_string(LoanKind k) { return k == LoanKind::Mortgage ? "mortgage" : "other"; }

std::string_view to_string(LoanStatus s) {
  switch (s) {
  case LoanStatus::Performing: return "performing";
  case LoanStatus::Defaulted: return "defaulted";
  case LoanStatus::Repaid: return "repaid";
  }
  return "?";
}

std::string_view to_string(Placement p) {
  switch (p) {
  case Placement::OnBook: return "on-book";
  case Placement::Retained: return "retained";
  case Placement::Equity: return "equity";
  }
  return "?";
}

AccountKind parse_account_kind(std::string_view s) {
  if (s == "net-transaction") return AccountKind::NetTransaction;
  if (s == "other") return AccountKind::Other;
  throw std::invalid_argument("unknown account kind '" + std::string(s) + "'");
}

LoanKind parse_loan_kind(std::string_view s) {
  if (s == "mortgage") return LoanKind::Mortgage;
  if (s == "other") return LoanKind::Other;
  throw std::invalid_argument("unknown loan kind '" + std::string(s) + "'");
}

Money EquityHolding::book_value(Money tranche_outstanding) const {
  return max(Money{}, tranche_outstanding.mul_floor(valuation_weight) - written_down);
}

Money BankState::deposits() const {
  Money total;
  for (const auto& a : accounts) total += a.balance;
  return total;
}

Money BankState::net_transaction_deposits() const {
  Money total;
  for (const auto& a : accounts)
    if (a.kind == AccountKind::NetTransaction) total += a.balance;
  return total;
}

const DepositAccount* BankState::find_account(std::string_view account_id) const {
  for (const auto& a : accounts)
    if (a.id == account_id) return &a;
  return nullptr;
}

DepositAccount* BankState::find_account(std::string_view account_id) {
  for (auto& a : accounts)
    if (a.id == account_id) return &a;
  return nullptr;
}

const Tranche* Security::find_tranche(std::string_view label) const {
  for (const auto& t : tranches)
    if (t.label == label) return &t;
  return nullptr;
}

Tranche* Security::find_tranche(std::string_view label) {
  for (auto& t : tranches)
    if (t.label == label) return &t;
  return nullptr;
}

Money Security::outstanding() const {
  Money total;
  for (const auto& t : tranches) total += t.outstanding;
  return total;
}

namespace {
template <class Map>
auto& lookup(Map& m, std::string_view id, const char* what) {
  auto it = m.find(std::string(id));
  if (it == m.end()) throw LedgerError(std::string("unknown ") + what + " '" + std::string(id) + "'");
  return it->second;
}
} // namespace

const BankState& SystemState::bank(std::string_view id) const { return lookup(banks, id, "bank"); }
BankState& SystemState::bank(std::string_view id) { return lookup(banks, id, "bank"); }
const LoanRecord& SystemState::loan(std::string_view id) const { return lookup(loans, id, "loan"); }
LoanRecord& SystemState::loan(std::string_view id) { return lookup(loans, id, "loan"); }
const Security& SystemState::security(std::string_view id) const { return lookup(securities, id, "security"); }
Security& SystemState::security(std::string_view id) { return lookup(securities, id, "security"); }
const std::string& SystemState::bank_of_account(std::string_view account_id) const {
  return lookup(account_bank, account_id, "account");
}

const DepositAccount& SystemState::account(std::string_view id) const {
  return *bank(bank_of_account(id)).find_account(id);
}

DepositAccount& SystemState::account(std::string_view id) {
  return *bank(bank_of_account(id)).find_account(id);
}

std::string main_account_id(std::string_view bank_id) { return std::string(bank_id) + ".dep"; }

namespace ledger_detail {

void require_non_negative(Money amount, std::string_view what) {
  if (amount.is_negative()) throw LedgerError(std::string(what) + " must not be negative");
}

void debit_account(SystemState& state, std::string_view account_id, Money amount) {
  auto& acct = state.account(account_id);
  if (acct.balance < amount) {
    throw LedgerError("insufficient balance in account '" + acct.id + "': has " + acct.balance.to_string() +
                      ", needs " + amount.to_string());
  }
  acct.balance -= amount;
}

void credit_account(SystemState& state, std::string_view account_id, Money amount) {
  state.account(account_id).balance += amount;
}

void debit_cash(BankState& bank, Money amount) {
  if (bank.cash < amount) {
    throw LedgerError("insufficient cash at bank '" + bank.id + "' to settle " + amount.to_string());
  }
  bank.cash -= amount;
}

void debit_equity_cash(BankState& bank, Money amount) {
  if (bank.equity_cash < amount) {
    throw LedgerError("insufficient equity cash at bank '" + bank.id + "': has " + bank.equity_cash.to_string() +
                      ", needs " + amount.to_string());
  }
  bank.equity_cash -= amount;
}

} // namespace ledger_detail

void create_bank(SystemState& state, std::string_view id, Money initial_deposits, Money initial_equity_cash) {
  ledger_detail::require_non_negative(initial_deposits, "initial deposits");
  ledger_detail::require_non_negative(initial_equity_cash, "initial equity cash");
  if (id.empty()) throw LedgerError("bank id must not be empty");
  if (state.banks.contains(std::string(id))) throw LedgerError("duplicate bank id '" + std::string(id) + "'");
  std::string acct = main_account_id(id);
  if (state.account_bank.contains(acct)) throw LedgerError("duplicate account id '" + acct + "'");

  BankState bank;
  bank.id = std::string(id);
  bank.accounts.push_back(DepositAccount{acct, bank.id, initial_deposits, AccountKind::NetTransaction});
  bank.cash = initial_deposits;
  bank.equity_cash = initial_equity_cash;
  state.account_bank.emplace(acct, bank.id);
  state.banks.emplace(bank.id, std::move(bank));
}

void open_account(SystemState& state, std::string_view bank_id, std::string_view account_id, AccountKind kind) {
  auto& bank = state.bank(bank_id);
  if (account_id.empty()) throw LedgerError("account id must not be empty");
  if (state.account_bank.contains(std::string(account_id))) {
    throw LedgerError("duplicate account id '" + std::string(account_id) + "'");
  }
  bank.accounts.push_back(DepositAccount{std::string(account_id), bank.id, Money{}, kind});
  state.account_bank.emplace(std::string(account_id), bank.id);
}

void transfer(SystemState& state, std::string_view from_account, std::string_view to_account, Money amount) {
  ledger_detail::require_non_negative(amount, "transfer amount");
  const std::string from_bank = state.bank_of_account(from_account);
  const std::string to_bank = state.bank_of_account(to_account);
  const auto& from = state.account(from_account);
  if (from.balance < amount) {
    throw LedgerError("insufficient balance in account '" + from.id + "': has " + from.balance.to_string() +
                      ", needs " + amount.to_string());
  }
  if (from_bank != to_bank && state.bank(from_bank).cash < amount) {
    throw LedgerError("insufficient cash at bank '" + from_bank + "' to settle " + amount.to_string());
  }
  ledger_detail::debit_account(state, from_account, amount);
  ledger_detail::credit_account(state, to_account, amount);
  if (from_bank != to_bank) {
    state.bank(from_bank).cash -= amount;
    state.bank(to_bank).cash += amount;
  }
}

Money bank_loans(const SystemState& state, const BankState& bank) {
  Money total;
  for (const auto& id : bank.held_loans) total += state.loan(id).outstanding;
  for (const auto& [sid, sec] : state.securities) {
    for (const auto& t : sec.tranches) {
      if (const auto* owner = std::get_if<BankOwner>(&t.owner); owner && owner->bank == bank.id) total += t.on_book;
    }
  }
  return total;
}

bool check_balance_identity(const SystemState& state, const BankState& bank) {
  return bank.deposits() == bank_loans(state, bank) + bank.cash + bank.impaired;
}

Money total_system_cash(const SystemState& state) {
  Money total;
  for (const auto& [id, b] : state.banks) total += b.cash + b.equity_cash;
  return total;
}

void verify_invariants(const SystemState& state) {
  auto fail = [](const std::string& msg) { throw InvariantViolation(msg); };

  std::map<std::string, int> loan_seen;
  for (const auto& [id, bank] : state.banks) {
    if (bank.cash.is_negative()) fail("bank " + id + " has negative cash");
    if (bank.equity_cash.is_negative()) fail("bank " + id + " has negative equity cash");
    if (bank.impaired.is_negative()) fail("bank " + id + " has negative impairment");
    for (const auto& a : bank.accounts) {
      if (a.balance.is_negative()) fail("account " + a.id + " has negative balance");
      auto it = state.account_bank.find(a.id);
      if (it == state.account_bank.end() || it->second != id) fail("account index out of sync for " + a.id);
    }
    if (!check_balance_identity(state, bank)) {
      fail("balance identity broken at bank " + id + ": deposits " + bank.deposits().to_string() + " != loans " +
           bank_loans(state, bank).to_string() + " + cash " + bank.cash.to_string() +
           (bank.impaired.is_zero() ? "" : " + impaired " + bank.impaired.to_string()));
    }
    for (const auto& lid : bank.held_loans) {
      ++loan_seen[lid];
      const auto& loan = state.loan(lid);
      const auto* h = std::get_if<BankHolder>(&loan.holder);
      if (!h || h->bank != id) fail("loan " + lid + " listed at bank " + id + " but held elsewhere");
    }
    for (const auto& eq : bank.equity_instruments) {
      auto sit = state.securities.find(eq.security);
      if (sit == state.securities.end()) fail("equity holding references unknown security " + eq.security);
      const auto* t = sit->second.find_tranche(eq.tranche);
      if (!t) fail("equity holding references unknown tranche " + eq.security + "/" + eq.tranche);
      const auto* o = std::get_if<BankOwner>(&t->owner);
      if (!o || o->bank != id || o->placement != Placement::Equity) {
        fail("equity holding " + eq.security + "/" + eq.tranche + " not owned as equity by " + id);
      }
    }
  }

  std::size_t accounts_total = 0;
  for (const auto& [id, bank] : state.banks) accounts_total += bank.accounts.size();
  if (accounts_total != state.account_bank.size()) fail("account index has stale entries");

  for (const auto& [sid, sec] : state.securities) {
    Money backing;
    for (const auto& lid : sec.backing_loans) {
      ++loan_seen[lid];
      const auto& loan = state.loan(lid);
      const auto* h = std::get_if<SecuritizedHolder>(&loan.holder);
      if (!h || h->security != sid) fail("loan " + lid + " backs security " + sid + " but is held elsewhere");
      backing += loan.outstanding;
    }
    if (backing != sec.outstanding()) {
      fail("security " + sid + " tranche balances " + sec.outstanding().to_string() + " != backing principal " +
           backing.to_string());
    }
    Money face;
    for (const auto& t : sec.tranches) {
      face += t.face;
      if (t.outstanding.is_negative() || t.on_book.is_negative() || t.on_book > t.outstanding) {
        fail("tranche " + sid + "/" + t.label + " has inconsistent balances");
      }
      if (const auto* o = std::get_if<BankOwner>(&t.owner)) {
        if (!state.banks.contains(o->bank)) fail("tranche owned by unknown bank " + o->bank);
        if (o->placement != Placement::OnBook && t.on_book.is_positive()) {
          fail("tranche " + sid + "/" + t.label + " is off-book but carries an on-book balance");
        }
        if (o->placement == Placement::Equity) {
          int count = 0;
          for (const auto& eq : state.bank(o->bank).equity_instruments)
            if (eq.security == sid && eq.tranche == t.label) ++count;
          if (count != 1) fail("equity tranche " + sid + "/" + t.label + " booked " + std::to_string(count) + " times");
        }
      } else {
        const auto& ext = std::get<ExternalOwner>(t.owner);
        if (!state.account_bank.contains(ext.account)) fail("tranche owned by unknown account " + ext.account);
        if (t.on_book.is_positive()) fail("externally owned tranche carries an on-book balance");
      }
    }
    if (face != sec.face_value) fail("security " + sid + " tranche faces do not sum to face value");
  }

  for (const auto& [lid, loan] : state.loans) {
    if (loan_seen[lid] != 1) {
      fail("loan " + lid + " appears in " + std::to_string(loan_seen[lid]) + " places, expected exactly one");
    }
    if (loan.outstanding.is_negative()) fail("loan " + lid + " has negative principal");
    if (loan.status == LoanStatus::Repaid && !loan.outstanding.is_zero()) fail("repaid loan " + lid + " has principal");
    if (loan.status == LoanStatus::Performing && loan.outstanding.is_zero()) fail("performing loan " + lid + " has zero principal");
  }
  if (loan_seen.size() != state.loans.size()) fail("reference to an unregistered loan");
}

bool check_balance_identity(Money deposits, Money loans, Money cash) {
  return deposits == loans + cash;
}

} // namespace reservesim
