#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "reservesim/instruments.hpp"
#include "reservesim/ledger.hpp"
#include "reservesim/metrics.hpp"
#include "reservesim/regulation.hpp"

namespace reservesim {

// ---- amounts resolved at apply time ------------------------------------------

/// Whatever the originating bank's lending headroom allows (possibly nothing).
struct HeadroomAmount {
  friend bool operator==(const HeadroomAmount&, const HeadroomAmount&) = default;
};
struct ShareOfSecurityFace {
  Ratio share;
  std::string security;
  friend bool operator==(const ShareOfSecurityFace&, const ShareOfSecurityFace&) = default;
};
struct ShareOfTrancheFace {
  Ratio share;
  std::string security;
  std::string tranche;
  friend bool operator==(const ShareOfTrancheFace&, const ShareOfTrancheFace&) = default;
};
/// Share of the event's loan outstanding principal.
struct ShareOfOutstanding {
  Ratio share;
  friend bool operator==(const ShareOfOutstanding&, const ShareOfOutstanding&) = default;
};

using AmountSpec = std::variant<Money, HeadroomAmount, ShareOfSecurityFace, ShareOfTrancheFace, ShareOfOutstanding>;

// ---- operations ---------------------------------------------------------------

struct NoOp {};
struct OpenAccountOp {
  std::string bank;
  std::string account;
  AccountKind kind = AccountKind::NetTransaction;
};
struct TransferOp {
  std::string from;
  std::string to;
  AmountSpec amount;
};
struct OriginateOp {
  std::string bank;
  LoanKind kind = LoanKind::Mortgage;
  AmountSpec amount;
  std::string proceeds_account;
  std::optional<std::string> loan_id;
};
struct SecuritizeOp {
  std::string bank;
  std::string security;
  std::optional<std::vector<std::string>> loans; // empty: every performing loan the bank holds
  std::vector<TrancheSpec> tranches;
};
struct SellOp {
  std::string security;
  std::string tranche;
  std::string buyer_account;
  AmountSpec price;
};
struct BookToEquityOp {
  std::string bank;
  std::string security;
  std::string tranche;
};
struct BonusOp {
  std::string bank;
  AmountSpec amount;
  std::string to_account;
};
struct RepayOp {
  std::string loan;
  AmountSpec amount;
  std::string payer_account;
};
struct InterestOp {
  std::string loan;
  AmountSpec amount;
  std::string payer_account;
};
struct DefaultOp {
  std::string loan;
  AmountSpec loss;
};

using Operation = std::variant<NoOp, OpenAccountOp, TransferOp, OriginateOp, SecuritizeOp, SellOp,
                               BookToEquityOp, BonusOp, RepayOp, InterestOp, DefaultOp>;

std::string_view op_name(const Operation& op);

struct Event {
  Operation op;
  std::string label;                // shown in table mode when set
  bool override_regulation = false; // audited in the breach log
};

// ---- applying events ------------------------------------------------------------

struct AuditedBreach {
  std::uint64_t step = 0;
  BreachRecord breach;
};

struct ShortfallRecord {
  std::uint64_t step = 0;
  std::string loan;
  DefaultReport report;
};

struct EventOutcome {
  SystemState state;
  MetricsSnapshot snapshot;
  std::optional<AuditedBreach> breach;
  std::optional<ShortfallRecord> shortfall;
};

/// Applies one event to a copy of `state`, re-verifies every invariant and
/// that total system cash is unchanged, and snapshots the result. A breach
/// without override leaves the state unchanged and is reported in `breach`.
/// Operation errors propagate as LedgerError; invariant failures as
/// InvariantViolation.
EventOutcome apply_event(const SystemState& state, const RegulatoryParams& params, const Event& event,
                         std::uint64_t step);

/// Resolves an amount against the current state. `bank` and `loan` give the
/// context for headroom and outstanding-share amounts.
Money resolve_amount(const SystemState& state, const RegulatoryParams& params, const AmountSpec& spec,
                     std::string_view bank = {}, LoanKind kind = LoanKind::Mortgage, std::string_view loan = {});

enum class RunStatus { Completed, InvariantViolation, OperationError };
std::string_view to_string(RunStatus s);

struct RunResult {
  MetricsSeries series;
  std::vector<AuditedBreach> breaches;
  std::vector<ShortfallRecord> shortfalls;
  RunStatus status = RunStatus::Completed;
  SystemState final_state;

  bool refused_breach() const;
};

/// Runs events in order from `initial`. Snapshot 0 is the initial state. A
/// failing event stops the run; the series then carries a failure marker.
RunResult run_events(SystemState initial, const RegulatoryParams& params, const std::vector<Event>& events);

// ---- canned processes ---------------------------------------------------------------

struct LoopholeOptions {
  std::string lender = "A";
  std::string counterparty = "B";
  Money setup_loan = Money::units(900); // loan behind the initial state; zero to skip
  Money cycle_loan = Money::units(900); // fixed re-lending amount, loophole 1
  LoanKind kind = LoanKind::Mortgage;
  Ratio senior_share{850, 900}; // loophole 2: sold tranche / securitized book
  Ratio price_share{900, 900};  // loophole 2: sale price / securitized book
  Ratio bonus_share{10, 50};    // loophole 2: bonus / retained tranche face
};

/// Two banks in the worked-example starting position: the lender with
/// deposits 1000 and loan 900 against cash 100, the counterparty holding the
/// loan proceeds, both with 100 equity cash.
SystemState two_bank_initial_state(const RegulatoryParams& params, const LoopholeOptions& opts = {});

/// Banks for two_bank_initial_state before the setup loan.
void add_two_bank_roster(SystemState& state, const LoopholeOptions& opts);
Event setup_loan_event(const LoopholeOptions& opts);

/// Securitize the lender's book and sell it at face to the counterparty's
/// depositor, then re-lend `cycle_loan` to that depositor. One cycle = one
/// sale plus one loan.
std::vector<Event> expand_loophole1(int cycles, const LoopholeOptions& opts = {});

/// Securitize into senior and retained tranches, sell the senior tranche for
/// price_share of the book, book the retained tranche to equity, pay a bonus
/// out of equity cash to the lender's depositor, lend the full headroom.
std::vector<Event> expand_loophole2(int cycles, const LoopholeOptions& opts = {});

/// `rounds` of one bank lending its full reserve headroom back into its own
/// deposits.
std::vector<Event> expand_textbook(int rounds, std::string_view bank = "system");

/// Params for the textbook process: only the reserve ratio binds.
RegulatoryParams textbook_params(const Ratio& reserve_ratio);

MetricsSeries textbook_expansion(Money initial_deposit, const Ratio& reserve_ratio, int rounds);
RunResult run_loophole1(const SystemState& initial, const RegulatoryParams& params, int cycles,
                        const LoopholeOptions& opts = {});
RunResult run_loophole2(const SystemState& initial, const RegulatoryParams& params, int cycles,
                        const LoopholeOptions& opts = {});

// ---- scenario scripts ----------------------------------------------------------------

struct BankInit {
  std::string id;
  Money deposits;
  Money equity_cash;
  std::vector<std::pair<std::string, AccountKind>> extra_accounts;
};

enum class GeneratorKind { Textbook, Loophole1, Loophole2 };
std::string_view to_string(GeneratorKind g);

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::Loophole1;
  int count = 0; // cycles, or rounds for the textbook process
  bool setup = true;
  LoopholeOptions loophole;
  Money initial_deposit = Money::units(1000); // textbook only
};

struct ScenarioScript {
  RegulatoryParams params;
  std::vector<BankInit> banks;
  std::vector<Event> events; // run before the generator's events
  std::optional<GeneratorSpec> generator;
};

/// Explicit event list for a script: its own events followed by the
/// generator's expansion.
std::vector<Event> expand_script(const ScenarioScript& script);
SystemState initial_state(const ScenarioScript& script);
/// Params the script actually runs with (the textbook generator lifts the
/// capital constraint).
RegulatoryParams effective_params(const ScenarioScript& script);
RunResult run_script(const ScenarioScript& script);

} // namespace reservesim
