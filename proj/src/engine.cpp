#include "reservesim/engine.hpp"

#include <type_traits>

namespace reservesim {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string step_label(int n) { return "Step " + std::to_string(n); }

} // namespace

std::string_view op_name(const Operation& op) {
  return std::visit(overloaded{
                        [](const NoOp&) { return "noop"; },
                        [](const OpenAccountOp&) { return "open_account"; },
                        [](const TransferOp&) { return "transfer"; },
                        [](const OriginateOp&) { return "originate"; },
                        [](const SecuritizeOp&) { return "securitize"; },
                        [](const SellOp&) { return "sell"; },
                        [](const BookToEquityOp&) { return "book_to_equity"; },
                        [](const BonusOp&) { return "bonus"; },
                        [](const RepayOp&) { return "repay"; },
                        [](const InterestOp&) { return "interest"; },
                        [](const DefaultOp&) { return "default"; },
                    },
                    op);
}

std::string_view to_string(RunStatus s) {
  switch (s) {
  case RunStatus::Completed: return "completed";
  case RunStatus::InvariantViolation: return "invariant-violation";
  case RunStatus::OperationError: return "operation-error";
  }
  return "?";
}

std::string_view to_string(GeneratorKind g) {
  switch (g) {
  case GeneratorKind::Textbook: return "textbook";
  case GeneratorKind::Loophole1: return "loophole1";
  case GeneratorKind::Loophole2: return "loophole2";
  }
  return "?";
}

Money resolve_amount(const SystemState& state, const RegulatoryParams& params, const AmountSpec& spec,
                     std::string_view bank, LoanKind kind, std::string_view loan) {
  return std::visit(overloaded{
                        [](Money m) { return m; },
                        [&](const HeadroomAmount&) {
                          if (bank.empty()) throw LedgerError("headroom amount needs a lending bank");
                          return lending_headroom(state, state.bank(bank), params, kind);
                        },
                        [&](const ShareOfSecurityFace& s) {
                          return state.security(s.security).face_value.mul_floor(s.share);
                        },
                        [&](const ShareOfTrancheFace& s) {
                          const auto* t = state.security(s.security).find_tranche(s.tranche);
                          if (!t) throw LedgerError("security '" + s.security + "' has no tranche '" + s.tranche + "'");
                          return t->face.mul_floor(s.share);
                        },
                        [&](const ShareOfOutstanding& s) {
                          if (loan.empty()) throw LedgerError("outstanding share needs a loan");
                          return state.loan(loan).outstanding.mul_floor(s.share);
                        },
                    },
                    spec);
}

EventOutcome apply_event(const SystemState& state, const RegulatoryParams& params, const Event& event,
                         std::uint64_t step) {
  EventOutcome out;
  out.state = state;
  SystemState& s = out.state;
  const Money cash_before = total_system_cash(state);

  try {
    std::visit(overloaded{
                   [](const NoOp&) {},
                   [&](const OpenAccountOp& op) { open_account(s, op.bank, op.account, op.kind); },
                   [&](const TransferOp& op) {
                     transfer(s, op.from, op.to, resolve_amount(s, params, op.amount));
                   },
                   [&](const OriginateOp& op) {
                     Money amount = resolve_amount(s, params, op.amount, op.bank, op.kind);
                     // A headroom request with nothing available lends nothing.
                     if (std::holds_alternative<HeadroomAmount>(op.amount) && amount.is_zero()) return;
                     auto r = originate_loan(s, params, op.bank, op.kind, amount, op.proceeds_account, op.loan_id,
                                             event.override_regulation);
                     if (r.breach) out.breach = AuditedBreach{step, *r.breach};
                   },
                   [&](const SecuritizeOp& op) {
                     std::vector<std::string> loans = op.loans ? *op.loans : held_performing_loans(s, op.bank);
                     securitize(s, op.bank, op.security, loans, op.tranches);
                   },
                   [&](const SellOp& op) {
                     sell_security(s, op.security, op.tranche, op.buyer_account, resolve_amount(s, params, op.price));
                   },
                   [&](const BookToEquityOp& op) { book_security_to_equity(s, params, op.bank, op.security, op.tranche); },
                   [&](const BonusOp& op) {
                     pay_bonus(s, op.bank, resolve_amount(s, params, op.amount, op.bank), op.to_account);
                   },
                   [&](const RepayOp& op) {
                     Money amount = resolve_amount(s, params, op.amount, {}, LoanKind::Mortgage, op.loan);
                     repay_loan(s, op.loan, amount, op.payer_account);
                   },
                   [&](const InterestOp& op) {
                     Money amount = resolve_amount(s, params, op.amount, {}, LoanKind::Mortgage, op.loan);
                     pay_interest(s, op.loan, amount, op.payer_account);
                   },
                   [&](const DefaultOp& op) {
                     Money loss = resolve_amount(s, params, op.loss, {}, LoanKind::Mortgage, op.loan);
                     auto report = default_loan(s, op.loan, loss);
                     if (report.depositor_shortfall.is_positive()) out.shortfall = ShortfallRecord{step, op.loan, report};
                   },
               },
               event.op);
  } catch (const RegulatoryBreach& b) {
    s = state;
    out.breach = AuditedBreach{step, BreachRecord{b.bank(), b.requested(), b.headroom(), false}};
  }

  s.clock = step;
  verify_invariants(s);
  if (Money after = total_system_cash(s); after != cash_before) {
    throw InvariantViolation("total system cash changed from " + cash_before.to_string() + " to " + after.to_string() +
                             " during " + std::string(op_name(event.op)));
  }
  out.snapshot = take_snapshot(s, params, step, event.label, std::string(op_name(event.op)));
  return out;
}

bool RunResult::refused_breach() const {
  for (const auto& b : breaches)
    if (!b.breach.overridden) return true;
  return false;
}

RunResult run_events(SystemState initial, const RegulatoryParams& params, const std::vector<Event>& events) {
  params.validate();
  RunResult result;
  verify_invariants(initial);
  result.series.snapshots.push_back(take_snapshot(initial, params, 0, {}, "initial"));
  result.final_state = std::move(initial);

  std::uint64_t step = 0;
  for (const auto& event : events) {
    ++step;
    try {
      auto outcome = apply_event(result.final_state, params, event, step);
      result.final_state = std::move(outcome.state);
      result.series.snapshots.push_back(std::move(outcome.snapshot));
      if (outcome.breach) result.breaches.push_back(std::move(*outcome.breach));
      if (outcome.shortfall) result.shortfalls.push_back(std::move(*outcome.shortfall));
    } catch (const InvariantViolation& e) {
      result.status = RunStatus::InvariantViolation;
      result.series.failure = "step " + std::to_string(step) + ": invariant violation: " + e.what();
      break;
    } catch (const std::exception& e) {
      result.status = RunStatus::OperationError;
      result.series.failure = "step " + std::to_string(step) + " (" + std::string(op_name(event.op)) + "): " + e.what();
      break;
    }
  }
  return result;
}

// ---- canned processes -------------------------------------------------------------

void add_two_bank_roster(SystemState& state, const LoopholeOptions& opts) {
  const Money deposits = Money::units(1000);
  const Money equity = Money::units(100);
  create_bank(state, opts.lender, deposits, equity);
  create_bank(state, opts.counterparty, deposits - opts.setup_loan, equity);
}

Event setup_loan_event(const LoopholeOptions& opts) {
  return Event{OriginateOp{opts.lender, opts.kind, opts.setup_loan, main_account_id(opts.counterparty), "L0"},
               "Initial State"};
}

SystemState two_bank_initial_state(const RegulatoryParams& params, const LoopholeOptions& opts) {
  SystemState s;
  add_two_bank_roster(s, opts);
  if (opts.setup_loan.is_positive()) {
    s = apply_event(s, params, setup_loan_event(opts), 0).state;
  }
  s.clock = 0;
  return s;
}

std::vector<Event> expand_loophole1(int cycles, const LoopholeOptions& opts) {
  std::vector<Event> events;
  const std::string buyer = main_account_id(opts.counterparty);
  int step = 0;
  for (int c = 1; c <= cycles; ++c) {
    const std::string sec = "MBS" + std::to_string(c);
    events.push_back(Event{SecuritizeOp{opts.lender, sec, std::nullopt, {TrancheSpec{"whole", std::nullopt, std::nullopt}}}, {}});
    events.push_back(Event{SellOp{sec, "whole", buyer, ShareOfSecurityFace{Ratio::one(), sec}}, step_label(++step)});
    events.push_back(Event{OriginateOp{opts.lender, opts.kind, opts.cycle_loan, buyer, "L" + std::to_string(c)},
                           step_label(++step)});
  }
  return events;
}

std::vector<Event> expand_loophole2(int cycles, const LoopholeOptions& opts) {
  std::vector<Event> events;
  const std::string buyer = main_account_id(opts.counterparty);
  const std::string employee = main_account_id(opts.lender);
  for (int c = 1; c <= cycles; ++c) {
    const std::string sec = "MBS" + std::to_string(c);
    auto label = [&](int k) { return c == 1 ? step_label(k) : "Cycle " + std::to_string(c) + " " + step_label(k); };
    events.push_back(Event{SecuritizeOp{opts.lender, sec, std::nullopt,
                                        {TrancheSpec{"senior", std::nullopt, opts.senior_share},
                                         TrancheSpec{"retained", std::nullopt, std::nullopt}}}, {}});
    events.push_back(Event{SellOp{sec, "senior", buyer, ShareOfSecurityFace{opts.price_share, sec}}, label(1)});
    events.push_back(Event{BookToEquityOp{opts.lender, sec, "retained"}, {}});
    events.push_back(Event{BonusOp{opts.lender, ShareOfTrancheFace{opts.bonus_share, sec, "retained"}, employee}, label(2)});
    events.push_back(Event{OriginateOp{opts.lender, opts.kind, HeadroomAmount{}, buyer, "L" + std::to_string(c)}, label(3)});
  }
  return events;
}

std::vector<Event> expand_textbook(int rounds, std::string_view bank) {
  std::vector<Event> events;
  const std::string acct = main_account_id(bank);
  for (int r = 1; r <= rounds; ++r) {
    events.push_back(Event{OriginateOp{std::string(bank), LoanKind::Other, HeadroomAmount{}, acct, std::nullopt},
                           "Round " + std::to_string(r)});
  }
  return events;
}

RegulatoryParams textbook_params(const Ratio& reserve_ratio) {
  RegulatoryParams p;
  p.reserve_ratio = reserve_ratio;
  p.risk_weight_mortgage = Ratio::zero();
  p.risk_weight_other = Ratio::zero();
  return p;
}

MetricsSeries textbook_expansion(Money initial_deposit, const Ratio& reserve_ratio, int rounds) {
  if (reserve_ratio.is_zero() || !reserve_ratio.in_unit_interval()) {
    throw std::invalid_argument("reserve ratio must lie in (0, 1]");
  }
  if (rounds < 0) throw std::invalid_argument("rounds must not be negative");
  SystemState s;
  create_bank(s, "system", initial_deposit, Money{});
  auto result = run_events(std::move(s), textbook_params(reserve_ratio), expand_textbook(rounds));
  return std::move(result.series);
}

RunResult run_loophole1(const SystemState& initial, const RegulatoryParams& params, int cycles,
                        const LoopholeOptions& opts) {
  if (cycles < 0) throw std::invalid_argument("cycles must not be negative");
  return run_events(initial, params, expand_loophole1(cycles, opts));
}

RunResult run_loophole2(const SystemState& initial, const RegulatoryParams& params, int cycles,
                        const LoopholeOptions& opts) {
  if (cycles < 0) throw std::invalid_argument("cycles must not be negative");
  return run_events(initial, params, expand_loophole2(cycles, opts));
}

// ---- scenario scripts -------------------------------------------------------------------

std::vector<Event> expand_script(const ScenarioScript& script) {
  std::vector<Event> events = script.events;
  if (!script.generator) return events;
  const auto& g = *script.generator;
  if (g.count < 0) throw std::invalid_argument("generator count must not be negative");
  std::vector<Event> generated;
  switch (g.kind) {
  case GeneratorKind::Textbook: generated = expand_textbook(g.count); break;
  case GeneratorKind::Loophole1: generated = expand_loophole1(g.count, g.loophole); break;
  case GeneratorKind::Loophole2: generated = expand_loophole2(g.count, g.loophole); break;
  }
  if (g.setup && g.kind != GeneratorKind::Textbook && g.loophole.setup_loan.is_positive()) {
    events.push_back(setup_loan_event(g.loophole));
  }
  events.insert(events.end(), generated.begin(), generated.end());
  return events;
}

SystemState initial_state(const ScenarioScript& script) {
  SystemState s;
  for (const auto& b : script.banks) {
    create_bank(s, b.id, b.deposits, b.equity_cash);
    for (const auto& [acct, kind] : b.extra_accounts) open_account(s, b.id, acct, kind);
  }
  if (script.generator && script.generator->kind == GeneratorKind::Textbook && !s.banks.contains("system")) {
    create_bank(s, "system", script.generator->initial_deposit, Money{});
  }
  if (script.banks.empty() && script.generator && script.generator->kind != GeneratorKind::Textbook) {
    add_two_bank_roster(s, script.generator->loophole);
  }
  return s;
}

RegulatoryParams effective_params(const ScenarioScript& script) {
  RegulatoryParams p = script.params;
  if (script.generator && script.generator->kind == GeneratorKind::Textbook) {
    p.risk_weight_mortgage = Ratio::zero();
    p.risk_weight_other = Ratio::zero();
  }
  return p;
}

RunResult run_script(const ScenarioScript& script) {
  return run_events(initial_state(script), effective_params(script), expand_script(script));
}

} // namespace reservesim
