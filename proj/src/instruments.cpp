#include "reservesim/instruments.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace reservesim {

using ledger_detail::credit_account;
using ledger_detail::debit_account;
using ledger_detail::debit_cash;
using ledger_detail::debit_equity_cash;
using ledger_detail::require_non_negative;

RegulatoryBreach::RegulatoryBreach(std::string bank, Money requested, Money headroom)
    : std::runtime_error("regulatory breach at bank '" + bank + "': requested " + requested.to_string() +
                         " exceeds lending headroom " + headroom.to_string()),
      bank_(std::move(bank)), requested_(requested), headroom_(headroom) {}

std::vector<Money> allocate_pro_rata(Money total, std::span<const Money> weights) {
  std::vector<Money> out(weights.size());
  __int128 sum = 0;
  for (Money w : weights) sum += w.minor_units();
  if (total.is_negative() || static_cast<__int128>(total.minor_units()) > sum) {
    throw LedgerError("cannot allocate " + total.to_string() + " across a smaller total");
  }
  if (sum == 0) return out;
  Money given;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    out[i] = Money::minor(static_cast<std::int64_t>(static_cast<__int128>(total.minor_units()) *
                                                    weights[i].minor_units() / sum));
    given += out[i];
  }
  Money left = total - given;
  for (std::size_t i = 0; i < weights.size() && left.is_positive(); ++i) {
    Money room = weights[i] - out[i];
    Money add = min(room, left);
    out[i] += add;
    left -= add;
  }
  return out;
}

namespace {

// Moves value that leaves one bank's deposit book and lands in another's cash.
void settle_cash(SystemState& s, const std::string& from_bank, const std::string& to_bank, Money amount) {
  if (from_bank == to_bank || amount.is_zero()) return;
  debit_cash(s.bank(from_bank), amount);
  s.bank(to_bank).cash += amount;
}

// Payer deposit money paid into a bank's equity (profit, discount recovery).
void pay_into_equity(SystemState& s, std::string_view payer_account, const std::string& bank, Money amount) {
  if (amount.is_zero()) return;
  const std::string payer_bank = s.bank_of_account(payer_account);
  debit_account(s, payer_account, amount);
  debit_cash(s.bank(payer_bank), amount);
  s.bank(bank).equity_cash += amount;
}

void remove_held(BankState& bank, const std::string& loan_id) {
  auto it = std::find(bank.held_loans.begin(), bank.held_loans.end(), loan_id);
  if (it != bank.held_loans.end()) bank.held_loans.erase(it);
}

// Loan-column loss at one bank; the loan-side reduction has already happened.
void absorb_bank_loss(SystemState& s, const std::string& bank_id, Money loss, DefaultReport& report) {
  auto& bank = s.bank(bank_id);
  Money from_cash = min(loss, bank.equity_cash);
  bank.equity_cash -= from_cash;
  bank.cash += from_cash;
  report.absorbed_by_equity_cash += from_cash;

  Money rest = loss - from_cash;
  if (rest.is_zero()) return;

  std::vector<Money> books;
  Money book_total;
  for (const auto& eq : bank.equity_instruments) {
    books.push_back(eq.book_value(s.security(eq.security).find_tranche(eq.tranche)->outstanding));
    book_total += books.back();
  }
  Money from_instruments = min(rest, book_total);
  auto shares = allocate_pro_rata(from_instruments, books);
  for (std::size_t i = 0; i < shares.size(); ++i) bank.equity_instruments[i].written_down += shares[i];
  bank.impaired += from_instruments;
  report.absorbed_by_instruments += from_instruments;

  Money shortfall = rest - from_instruments;
  if (shortfall.is_zero()) return;

  std::vector<Money> balances;
  for (const auto& a : bank.accounts) balances.push_back(a.balance);
  auto haircut = allocate_pro_rata(shortfall, balances);
  for (std::size_t i = 0; i < haircut.size(); ++i) bank.accounts[i].balance -= haircut[i];
  bank.failed = true;
  report.depositor_shortfall += shortfall;
  if (std::find(report.failed_banks.begin(), report.failed_banks.end(), bank_id) == report.failed_banks.end()) {
    report.failed_banks.push_back(bank_id);
  }
}

std::vector<Money> tranche_outstandings(const Security& sec) {
  std::vector<Money> w;
  for (const auto& t : sec.tranches) w.push_back(t.outstanding);
  return w;
}

const LoanRecord& performing_loan(const SystemState& s, std::string_view loan_id) {
  const auto& loan = s.loan(loan_id);
  if (loan.status != LoanStatus::Performing) {
    throw LedgerError("loan '" + loan.id + "' is " + std::string(to_string(loan.status)));
  }
  return loan;
}

} // namespace

OriginationResult originate_loan(SystemState& state, const RegulatoryParams& params, std::string_view bank_id,
                                 LoanKind kind, Money amount, std::string_view proceeds_account,
                                 std::optional<std::string> loan_id, bool override_regulation) {
  if (!amount.is_positive()) throw LedgerError("loan amount must be positive");
  SystemState s = state;
  auto& bank = s.bank(bank_id);
  const std::string proceeds_bank = s.bank_of_account(proceeds_account);

  OriginationResult result;
  Money headroom = lending_headroom(s, bank, params, kind);
  if (amount > headroom) {
    if (!override_regulation) throw RegulatoryBreach(bank.id, amount, headroom);
    result.breach = BreachRecord{bank.id, amount, headroom, true};
  }

  std::string id = loan_id ? *loan_id : "L" + std::to_string(s.next_loan_seq);
  if (id.empty() || s.loans.contains(id)) throw LedgerError("duplicate or empty loan id '" + id + "'");
  ++s.next_loan_seq;

  settle_cash(s, bank.id, proceeds_bank, amount);
  credit_account(s, proceeds_account, amount);
  LoanRecord loan{id, amount, amount, kind, bank.id, BankHolder{bank.id}, LoanStatus::Performing};
  s.loans.emplace(id, loan);
  s.bank(bank_id).held_loans.push_back(id);

  result.loan_id = id;
  state = std::move(s);
  return result;
}

std::vector<std::string> held_performing_loans(const SystemState& state, std::string_view bank) {
  std::vector<std::string> out;
  for (const auto& id : state.bank(bank).held_loans)
    if (state.loan(id).status == LoanStatus::Performing) out.push_back(id);
  std::sort(out.begin(), out.end());
  return out;
}

const Security& securitize(SystemState& state, std::string_view bank_id, std::string_view security_id,
                           std::span<const std::string> loan_ids, std::span<const TrancheSpec> specs) {
  if (loan_ids.empty()) throw LedgerError("cannot securitize an empty loan set");
  if (specs.empty()) throw LedgerError("security needs at least one tranche");
  if (security_id.empty() || state.securities.contains(std::string(security_id))) {
    throw LedgerError("duplicate or empty security id '" + std::string(security_id) + "'");
  }
  SystemState s = state;
  auto& bank = s.bank(bank_id);

  Money face;
  std::set<std::string> seen;
  for (const auto& lid : loan_ids) {
    if (!seen.insert(lid).second) throw LedgerError("loan '" + lid + "' listed twice");
    const auto& loan = s.loan(lid);
    const auto* h = std::get_if<BankHolder>(&loan.holder);
    if (!h || h->bank != bank.id) throw LedgerError("loan '" + lid + "' is not held by bank '" + bank.id + "'");
    if (loan.status != LoanStatus::Performing) {
      throw LedgerError("loan '" + lid + "' is " + std::string(to_string(loan.status)));
    }
    face += loan.outstanding;
  }

  Security sec;
  sec.id = std::string(security_id);
  sec.originator = bank.id;
  sec.backing_loans.assign(loan_ids.begin(), loan_ids.end());
  sec.face_value = face;

  std::set<std::string> labels;
  int remainder_slot = -1;
  Money assigned;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& spec = specs[i];
    if (spec.label.empty() || !labels.insert(spec.label).second) {
      throw LedgerError("tranche labels must be unique and non-empty");
    }
    Money size;
    if (spec.amount && spec.share) throw LedgerError("tranche '" + spec.label + "' has both amount and share");
    if (spec.amount) {
      size = *spec.amount;
    } else if (spec.share) {
      size = face.mul_floor(*spec.share);
    } else {
      if (remainder_slot >= 0) throw LedgerError("only one tranche may take the remainder");
      remainder_slot = static_cast<int>(i);
    }
    require_non_negative(size, "tranche size");
    assigned += size;
    sec.tranches.push_back(Tranche{spec.label, size, size, size, BankOwner{bank.id, Placement::OnBook}});
  }
  if (remainder_slot >= 0) {
    Money rest = face - assigned;
    require_non_negative(rest, "remainder tranche");
    auto& t = sec.tranches[static_cast<std::size_t>(remainder_slot)];
    t.face = t.outstanding = t.on_book = rest;
  } else if (assigned != face) {
    throw LedgerError("tranche sizes sum to " + assigned.to_string() + ", security face is " + face.to_string());
  }

  for (const auto& lid : loan_ids) {
    s.loan(lid).holder = SecuritizedHolder{sec.id};
    remove_held(bank, lid);
  }
  s.securities.emplace(sec.id, std::move(sec));
  state = std::move(s);
  return state.security(security_id);
}

void sell_security(SystemState& state, std::string_view security_id, std::string_view tranche_label,
                   std::string_view buyer_account, Money price) {
  require_non_negative(price, "price");
  SystemState s = state;
  auto& sec = s.security(security_id);
  auto* tranche = sec.find_tranche(tranche_label);
  if (!tranche) throw LedgerError("security '" + sec.id + "' has no tranche '" + std::string(tranche_label) + "'");
  const auto* owner = std::get_if<BankOwner>(&tranche->owner);
  if (!owner) throw LedgerError("tranche " + sec.id + "/" + tranche->label + " is not owned by a bank");
  const std::string seller = owner->bank;
  const Placement placement = owner->placement;
  const std::string buyer_bank = s.bank_of_account(buyer_account);

  // Buyer pays with deposit money; the cash leaves the buyer's bank.
  debit_account(s, buyer_account, price);
  debit_cash(s.bank(buyer_bank), price);
  auto& bank = s.bank(seller);

  if (placement == Placement::OnBook) {
    Money sold_on_book = tranche->on_book;
    tranche->on_book = Money{};
    Money funded;
    if (price > sold_on_book) {
      Money premium = price - sold_on_book;
      for (auto& other : sec.tranches) {
        if (premium.is_zero()) break;
        auto* o = std::get_if<BankOwner>(&other.owner);
        if (&other == tranche || !o || o->bank != seller || o->placement != Placement::OnBook) continue;
        Money take = min(premium, other.on_book);
        other.on_book -= take;
        if (other.on_book.is_zero()) o->placement = Placement::Retained;
        premium -= take;
        funded += take;
      }
      bank.cash += sold_on_book + funded;
      bank.equity_cash += premium;
    } else {
      // Discount below the on-book balance is made good from equity.
      debit_equity_cash(bank, sold_on_book - price);
      bank.cash += sold_on_book;
    }
  } else {
    if (placement == Placement::Equity) {
      auto& eqs = bank.equity_instruments;
      eqs.erase(std::remove_if(eqs.begin(), eqs.end(),
                               [&](const EquityHolding& e) { return e.security == sec.id && e.tranche == tranche->label; }),
                eqs.end());
    }
    bank.equity_cash += price;
  }
  tranche->owner = ExternalOwner{std::string(buyer_account)};
  state = std::move(s);
}

void book_security_to_equity(SystemState& state, const RegulatoryParams& params, std::string_view bank_id,
                             std::string_view security_id, std::string_view tranche_label) {
  SystemState s = state;
  auto& sec = s.security(security_id);
  auto* tranche = sec.find_tranche(tranche_label);
  if (!tranche) throw LedgerError("security '" + sec.id + "' has no tranche '" + std::string(tranche_label) + "'");
  auto* owner = std::get_if<BankOwner>(&tranche->owner);
  if (!owner || owner->bank != bank_id) {
    throw LedgerError("tranche " + sec.id + "/" + tranche->label + " is not owned by bank '" + std::string(bank_id) + "'");
  }
  if (owner->placement == Placement::Equity) throw LedgerError("tranche already booked to equity");
  auto& bank = s.bank(bank_id);
  if (tranche->on_book.is_positive()) {
    debit_equity_cash(bank, tranche->on_book);
    bank.cash += tranche->on_book;
    tranche->on_book = Money{};
  }
  owner->placement = Placement::Equity;
  bank.equity_instruments.push_back(EquityHolding{sec.id, tranche->label, params.mbs_equity_valuation_weight, Money{}});
  state = std::move(s);
}

void pay_bonus(SystemState& state, std::string_view bank_id, Money amount, std::string_view to_account) {
  require_non_negative(amount, "bonus");
  auto& bank = state.bank(bank_id);
  const std::string to_bank = state.bank_of_account(to_account);
  if (amount.is_zero()) return;
  debit_equity_cash(bank, amount);
  credit_account(state, to_account, amount);
  state.bank(to_bank).cash += amount;
}

void repay_loan(SystemState& state, std::string_view loan_id, Money amount, std::string_view payer_account) {
  require_non_negative(amount, "repayment");
  const auto& current = performing_loan(state, loan_id);
  if (amount > current.outstanding) {
    throw LedgerError("repayment " + amount.to_string() + " exceeds outstanding " + current.outstanding.to_string());
  }
  if (amount.is_zero()) return;

  SystemState s = state;
  auto& loan = s.loan(loan_id);
  const std::string payer_bank = s.bank_of_account(payer_account);

  if (const auto* h = std::get_if<BankHolder>(&loan.holder)) {
    debit_account(s, payer_account, amount);
    settle_cash(s, payer_bank, h->bank, amount);
  } else {
    auto& sec = s.security(std::get<SecuritizedHolder>(loan.holder).security);
    auto shares = allocate_pro_rata(amount, tranche_outstandings(sec));
    for (std::size_t i = 0; i < shares.size(); ++i) {
      auto& t = sec.tranches[i];
      Money share = shares[i];
      if (share.is_zero()) continue;
      t.outstanding -= share;
      if (const auto* ext = std::get_if<ExternalOwner>(&t.owner)) {
        transfer(s, payer_account, ext->account, share);
        continue;
      }
      const auto& owner = std::get<BankOwner>(t.owner);
      Money on = min(share, t.on_book);
      t.on_book -= on;
      debit_account(s, payer_account, on);
      settle_cash(s, payer_bank, owner.bank, on);
      pay_into_equity(s, payer_account, owner.bank, share - on);
    }
  }
  loan.outstanding -= amount;
  if (loan.outstanding.is_zero()) loan.status = LoanStatus::Repaid;
  state = std::move(s);
}

void pay_interest(SystemState& state, std::string_view loan_id, Money amount, std::string_view payer_account) {
  require_non_negative(amount, "interest");
  const auto& current = performing_loan(state, loan_id);
  if (amount.is_zero()) return;

  SystemState s = state;
  if (const auto* h = std::get_if<BankHolder>(&current.holder)) {
    pay_into_equity(s, payer_account, h->bank, amount);
  } else {
    const auto& sec = s.security(std::get<SecuritizedHolder>(current.holder).security);
    auto shares = allocate_pro_rata(amount, tranche_outstandings(sec));
    for (std::size_t i = 0; i < shares.size(); ++i) {
      const auto& t = sec.tranches[i];
      if (const auto* ext = std::get_if<ExternalOwner>(&t.owner)) {
        transfer(s, payer_account, ext->account, shares[i]);
      } else {
        pay_into_equity(s, payer_account, std::get<BankOwner>(t.owner).bank, shares[i]);
      }
    }
  }
  state = std::move(s);
}

DefaultReport default_loan(SystemState& state, std::string_view loan_id, Money loss) {
  require_non_negative(loss, "loss");
  const auto& current = performing_loan(state, loan_id);
  if (loss > current.outstanding) {
    throw LedgerError("loss " + loss.to_string() + " exceeds outstanding " + current.outstanding.to_string());
  }
  DefaultReport report;
  if (loss.is_zero()) return report;

  SystemState s = state;
  auto& loan = s.loan(loan_id);
  loan.outstanding -= loss;
  loan.status = LoanStatus::Defaulted;

  if (const auto* h = std::get_if<BankHolder>(&loan.holder)) {
    absorb_bank_loss(s, h->bank, loss, report);
  } else {
    auto& sec = s.security(std::get<SecuritizedHolder>(loan.holder).security);
    auto shares = allocate_pro_rata(loss, tranche_outstandings(sec));
    for (std::size_t i = 0; i < shares.size(); ++i) {
      auto& t = sec.tranches[i];
      t.outstanding -= shares[i];
      if (const auto* o = std::get_if<BankOwner>(&t.owner)) {
        Money on = min(shares[i], t.on_book);
        t.on_book -= on;
        if (on.is_positive()) absorb_bank_loss(s, o->bank, on, report);
      }
    }
  }
  state = std::move(s);
  return report;
}

} // namespace reservesim
