#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "reservesim/money.hpp"

namespace reservesim {

/// Operation refused: bad arguments, unknown ids, insufficient funds. The
/// state the operation was given is left untouched.
class LedgerError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A post-mutation consistency check failed. Always a bug, never data.
class InvariantViolation : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

enum class AccountKind { NetTransaction, Other };
enum class LoanKind { Mortgage, Other };
enum class LoanStatus { Performing, Defaulted, Repaid };

std::string_view to_string(AccountKind k);
std::string_view to_string(LoanKind k);
std::string_view to_string(LoanStatus s);
AccountKind parse_account_kind(std::string_view s);
LoanKind parse_loan_kind(std::string_view s);

struct DepositAccount {
  std::string id;
  std::string bank;
  Money balance;
  AccountKind kind = AccountKind::NetTransaction;
};

/// A tranche held inside a bank's equity capital.
struct EquityHolding {
  std::string security;
  std::string tranche;
  Ratio valuation_weight; // fixed at booking
  Money written_down;     // losses absorbed by this holding

  /// floor(weight * tranche outstanding) - written_down, floored at zero.
  Money book_value(Money tranche_outstanding) const;
};

struct BankState {
  std::string id;
  std::vector<DepositAccount> accounts;
  std::vector<std::string> held_loans; // loans held directly, not securitized
  Money cash;                          // deposit-backing cash
  Money equity_cash;
  std::vector<EquityHolding> equity_instruments;
  /// Deposit-side shortfall carried after equity instruments absorbed a loss.
  /// Zero unless a default has reached past equity cash.
  Money impaired;
  bool failed = false;

  Money deposits() const;
  Money net_transaction_deposits() const;
  const DepositAccount* find_account(std::string_view account_id) const;
  DepositAccount* find_account(std::string_view account_id);
};

struct BankHolder {
  std::string bank;
};
struct SecuritizedHolder {
  std::string security;
};

struct LoanRecord {
  std::string id;
  Money principal; // at origination
  Money outstanding;
  LoanKind kind = LoanKind::Mortgage;
  std::string originator;
  std::variant<BankHolder, SecuritizedHolder> holder;
  LoanStatus status = LoanStatus::Performing;
};

enum class Placement {
  OnBook,   // still backing the owner's deposits (counted in its loan column)
  Retained, // owned by the bank but off its deposit books
  Equity,   // booked into equity capital
};
std::string_view to_string(Placement p);

struct BankOwner {
  std::string bank;
  Placement placement = Placement::OnBook;
};
struct ExternalOwner {
  std::string account;
};

struct Tranche {
  std::string label;
  Money face;        // at creation
  Money outstanding; // after repayments and losses
  /// Portion of `outstanding` still in the owning bank's loan column. Only
  /// non-zero while the owner is a bank with placement OnBook.
  Money on_book;
  std::variant<BankOwner, ExternalOwner> owner;
};

struct Security {
  std::string id;
  std::string originator;
  std::vector<std::string> backing_loans;
  Money face_value;
  std::vector<Tranche> tranches;

  const Tranche* find_tranche(std::string_view label) const;
  Tranche* find_tranche(std::string_view label);
  Money outstanding() const;
};

struct SystemState {
  std::map<std::string, BankState> banks;
  std::map<std::string, LoanRecord> loans;
  std::map<std::string, Security> securities;
  std::map<std::string, std::string> account_bank; // account id -> bank id
  std::uint64_t clock = 0;
  std::uint64_t next_loan_seq = 1;

  const BankState& bank(std::string_view id) const;
  BankState& bank(std::string_view id);
  const DepositAccount& account(std::string_view id) const;
  DepositAccount& account(std::string_view id);
  const LoanRecord& loan(std::string_view id) const;
  LoanRecord& loan(std::string_view id);
  const Security& security(std::string_view id) const;
  Security& security(std::string_view id);
  const std::string& bank_of_account(std::string_view account_id) const;
};

/// Default aggregate depositor account id for a bank.
std::string main_account_id(std::string_view bank_id);

// ---- core ledger operations -------------------------------------------------

/// Adds a bank with one aggregate net-transaction account holding
/// `initial_deposits`, matched by the same amount of cash.
void create_bank(SystemState& state, std::string_view id, Money initial_deposits, Money initial_equity_cash);

/// Opens an empty account at an existing bank.
void open_account(SystemState& state, std::string_view bank, std::string_view account_id, AccountKind kind);

/// Moves deposit money between accounts. Across banks, cash settles with the
/// payment.
void transfer(SystemState& state, std::string_view from_account, std::string_view to_account, Money amount);

/// Loan column of a bank: direct loans plus on-book tranche balances.
Money bank_loans(const SystemState& state, const BankState& bank);

/// deposits == loans + cash (+ impaired), exactly.
bool check_balance_identity(const SystemState& state, const BankState& bank);

/// Table-level form, for a bank described only by its three columns.
bool check_balance_identity(Money deposits, Money loans, Money cash);

/// Sum over banks of cash + equity cash.
Money total_system_cash(const SystemState& state);

/// Re-checks every structural invariant; throws InvariantViolation on the
/// first failure.
void verify_invariants(const SystemState& state);

// Balance moves shared by the operation modules. They enforce non-negativity
// and throw LedgerError before mutating anything.
namespace ledger_detail {
void debit_account(SystemState& state, std::string_view account_id, Money amount);
void credit_account(SystemState& state, std::string_view account_id, Money amount);
void debit_cash(BankState& bank, Money amount);
void debit_equity_cash(BankState& bank, Money amount);
void require_non_negative(Money amount, std::string_view what);
} // namespace ledger_detail

} // namespace reservesim
