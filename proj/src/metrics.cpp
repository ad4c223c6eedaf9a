#include "reservesim/metrics.hpp"

namespace reservesim {

std::optional<Ratio> MetricsSnapshot::debt_to_money() const {
  if (money_supply.is_zero()) return std::nullopt;
  return Ratio{total_debt().minor_units(), money_supply.minor_units()};
}

const BankSnapshot* MetricsSnapshot::bank(std::string_view id) const {
  for (const auto& b : banks)
    if (b.id == id) return &b;
  return nullptr;
}

Money money_supply(const SystemState& state) {
  Money total;
  for (const auto& [id, b] : state.banks) total += b.deposits();
  return total;
}

Money bank_held_loans(const SystemState& state) {
  Money total;
  for (const auto& [id, b] : state.banks) total += bank_loans(state, b);
  return total;
}

Money total_bank_originated_debt(const SystemState& state) {
  Money total;
  for (const auto& [id, b] : state.banks)
    for (const auto& lid : b.held_loans) total += state.loan(lid).outstanding;
  for (const auto& [sid, sec] : state.securities) total += sec.outstanding();
  return total;
}

MetricsSnapshot take_snapshot(const SystemState& state, const RegulatoryParams& params, std::uint64_t step,
                              std::string label, std::string event) {
  MetricsSnapshot snap;
  snap.step = step;
  snap.label = std::move(label);
  snap.event = std::move(event);

  for (const auto& [id, b] : state.banks) {
    BankSnapshot bs;
    bs.id = id;
    bs.deposits = b.deposits();
    bs.loans = bank_loans(state, b);
    bs.cash = b.cash;
    bs.equity_cash = b.equity_cash;
    bs.equity_instruments = equity_instrument_value(state, b);
    bs.rwa = risk_weighted_assets(state, b, params);
    bs.equity_capital = equity_capital_total(state, b, params);
    bs.capitalization = classify_capitalization(bs.equity_capital, bs.rwa, params);
    bs.failed = b.failed;

    snap.money_supply += bs.deposits;
    snap.bank_held_loans += bs.loans;
    snap.deposit_cash += bs.cash;
    snap.equity_cash += bs.equity_cash;
    snap.banks.push_back(std::move(bs));
  }

  for (const auto& [sid, sec] : state.securities) {
    for (const auto& t : sec.tranches) {
      if (std::holds_alternative<ExternalOwner>(t.owner)) {
        snap.external_mbs += t.outstanding;
        continue;
      }
      const auto& owner = std::get<BankOwner>(t.owner);
      if (owner.placement == Placement::Equity) {
        snap.equity_mbs += t.outstanding;
        for (auto& bs : snap.banks)
          if (bs.id == owner.bank) bs.equity_mbs_face += t.outstanding;
      } else {
        snap.retained_mbs += t.outstanding - t.on_book;
      }
    }
  }
  return snap;
}

std::string_view to_string(RepaymentCapacity r) {
  return r == RepaymentCapacity::Feasible ? "feasible" : "infeasible";
}

RepaymentCapacity repayment_capacity(Money supply, Money scheduled_repayments) {
  if (scheduled_repayments.is_negative()) throw std::invalid_argument("scheduled repayments must not be negative");
  return scheduled_repayments > supply ? RepaymentCapacity::Infeasible : RepaymentCapacity::Feasible;
}

RepaymentCapacity repayment_capacity(const SystemState& state, Money scheduled_repayments) {
  return repayment_capacity(money_supply(state), scheduled_repayments);
}

std::string_view to_string(PriceDirection d) {
  switch (d) {
  case PriceDirection::Inflation: return "inflation";
  case PriceDirection::Deflation: return "deflation";
  case PriceDirection::Indeterminate: return "indeterminate";
  }
  return "?";
}

PriceDirection price_level_direction(Sign money_change, Sign product_supply_change) {
  if (product_supply_change == Sign::Zero) {
    if (money_change == Sign::Positive) return PriceDirection::Inflation;
    if (money_change == Sign::Negative) return PriceDirection::Deflation;
    return PriceDirection::Indeterminate;
  }
  if (money_change == Sign::Zero) {
    return product_supply_change == Sign::Positive ? PriceDirection::Deflation : PriceDirection::Inflation;
  }
  // Both moving: the table gives no answer.
  return PriceDirection::Indeterminate;
}

} // namespace reservesim
