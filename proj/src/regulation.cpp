#include "reservesim/regulation.hpp"

#include <numeric>
#include <stdexcept>

namespace reservesim {

namespace {

struct FieldRef {
  const char* name;
  Ratio RegulatoryParams::*member;
};

constexpr FieldRef kFields[] = {
    {"reserve_ratio", &RegulatoryParams::reserve_ratio},
    {"well_capitalized_ratio", &RegulatoryParams::well_capitalized_ratio},
    {"adequate_ratio", &RegulatoryParams::adequate_ratio},
    {"risk_weight_mortgage", &RegulatoryParams::risk_weight_mortgage},
    {"risk_weight_other", &RegulatoryParams::risk_weight_other},
    {"tier2_cap_share", &RegulatoryParams::tier2_cap_share},
    {"mbs_equity_valuation_weight", &RegulatoryParams::mbs_equity_valuation_weight},
};

// A security counts as a mortgage exposure only if every backing loan is one.
LoanKind security_kind(const SystemState& state, const Security& sec) {
  for (const auto& lid : sec.backing_loans)
    if (state.loan(lid).kind != LoanKind::Mortgage) return LoanKind::Other;
  return LoanKind::Mortgage;
}

} // namespace

void RegulatoryParams::validate() const {
  for (const auto& f : kFields) {
    if (!(this->*f.member).in_unit_interval()) {
      throw std::invalid_argument(std::string(f.name) + " must lie in [0, 1], got " + (this->*f.member).to_string());
    }
  }
}

void RegulatoryParams::set(std::string_view name, const Ratio& value) {
  for (const auto& f : kFields) {
    if (name == f.name) {
      this->*f.member = value;
      return;
    }
  }
  throw std::invalid_argument("unknown regulatory parameter '" + std::string(name) + "'");
}

Ratio RegulatoryParams::get(std::string_view name) const {
  for (const auto& f : kFields)
    if (name == f.name) return this->*f.member;
  throw std::invalid_argument("unknown regulatory parameter '" + std::string(name) + "'");
}

const std::vector<std::string>& RegulatoryParams::field_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& f : kFields) v.emplace_back(f.name);
    return v;
  }();
  return names;
}

std::string_view to_string(Capitalization c) {
  switch (c) {
  case Capitalization::Well: return "well";
  case Capitalization::Adequate: return "adequate";
  case Capitalization::Under: return "under";
  }
  return "?";
}

Money required_reserves(const BankState& bank, const RegulatoryParams& params) {
  return bank.net_transaction_deposits().mul_ceil(params.reserve_ratio);
}

RiskExposure risk_exposure(const SystemState& state, const BankState& bank, const RegulatoryParams& params) {
  __int128 mortgage = 0;
  __int128 other = 0;
  for (const auto& lid : bank.held_loans) {
    const auto& loan = state.loan(lid);
    (loan.kind == LoanKind::Mortgage ? mortgage : other) += loan.outstanding.minor_units();
  }
  for (const auto& [sid, sec] : state.securities) {
    for (const auto& t : sec.tranches) {
      const auto* owner = std::get_if<BankOwner>(&t.owner);
      if (!owner || owner->bank != bank.id || t.on_book.is_zero()) continue;
      (security_kind(state, sec) == LoanKind::Mortgage ? mortgage : other) += t.on_book.minor_units();
    }
  }
  const Ratio& wm = params.risk_weight_mortgage;
  const Ratio& wo = params.risk_weight_other;
  RiskExposure e;
  e.num = mortgage * wm.num() * wo.den() + other * wo.num() * wm.den();
  e.den = static_cast<__int128>(wm.den()) * wo.den();
  return e;
}

Money risk_weighted_assets(const SystemState& state, const BankState& bank, const RegulatoryParams& params) {
  auto e = risk_exposure(state, bank, params);
  return Money::minor(detail::narrow_checked(detail::ceil_div(e.num, e.den)));
}

Money equity_instrument_value(const SystemState& state, const BankState& bank) {
  Money total;
  for (const auto& eq : bank.equity_instruments) {
    const auto* t = state.security(eq.security).find_tranche(eq.tranche);
    total += eq.book_value(t->outstanding);
  }
  return total;
}

Money equity_capital_book(const SystemState& state, const BankState& bank) {
  return bank.equity_cash + equity_instrument_value(state, bank);
}

std::optional<Money> tier2_cap(Money rwa, const RegulatoryParams& params) {
  if (params.adequate_ratio.is_zero()) return std::nullopt;
  const Ratio& s = params.tier2_cap_share;
  const Ratio& a = params.adequate_ratio;
  // s / a = (s.num * a.den) / (s.den * a.num)
  __int128 num = static_cast<__int128>(rwa.minor_units()) * s.num() * a.den();
  __int128 den = static_cast<__int128>(s.den()) * a.num();
  return Money::minor(detail::narrow_checked(detail::floor_div(num, den)));
}

Money equity_capital_total(const SystemState& state, const BankState& bank, const RegulatoryParams& params) {
  Money instruments = equity_instrument_value(state, bank);
  if (auto cap = tier2_cap(risk_weighted_assets(state, bank, params), params)) instruments = min(instruments, *cap);
  return bank.equity_cash + instruments;
}

Capitalization classify_capitalization(Money equity, Money rwa, const RegulatoryParams& params) {
  if (rwa.is_zero()) return Capitalization::Well;
  auto meets = [&](const Ratio& r) {
    return static_cast<__int128>(equity.minor_units()) * r.den() >= static_cast<__int128>(rwa.minor_units()) * r.num();
  };
  if (meets(params.well_capitalized_ratio)) return Capitalization::Well;
  if (meets(params.adequate_ratio)) return Capitalization::Adequate;
  return Capitalization::Under;
}

Capitalization classify_capitalization(const SystemState& state, const BankState& bank, const RegulatoryParams& params) {
  return classify_capitalization(equity_capital_total(state, bank, params), risk_weighted_assets(state, bank, params),
                                 params);
}

HeadroomBreakdown lending_headroom_breakdown(const SystemState& state, const BankState& bank,
                                             const RegulatoryParams& params, LoanKind new_loan_kind) {
  HeadroomBreakdown out;
  out.reserve = max(Money{}, bank.cash - required_reserves(bank, params));

  const Ratio& well = params.well_capitalized_ratio;
  if (well.is_zero()) return out;

  // Post-loan RWA is ceil(exposure + w*P); it must not exceed
  // C = floor(equity / well). With C an integer that is exposure + w*P <= C.
  const Money equity = equity_capital_total(state, bank, params);
  const __int128 limit = detail::floor_div(static_cast<__int128>(equity.minor_units()) * well.den(), well.num());
  const RiskExposure e = risk_exposure(state, bank, params);
  const __int128 slack_num = limit * e.den - e.num; // (C - exposure) * e.den
  const Ratio w = params.risk_weight(new_loan_kind);

  if (w.is_zero()) {
    if (slack_num >= 0) return out; // unbounded by capital
    out.capital = Money{};
    return out;
  }
  if (slack_num <= 0) {
    out.capital = Money{};
    return out;
  }
  // P <= slack / w = slack_num * w.den / (e.den * w.num)
  __int128 p = detail::floor_div(slack_num * w.den(), e.den * w.num());
  constexpr __int128 kMax = static_cast<__int128>(INT64_MAX);
  out.capital = Money::minor(static_cast<std::int64_t>(p > kMax ? kMax : p));
  return out;
}

Money lending_headroom(const SystemState& state, const BankState& bank, const RegulatoryParams& params,
                       LoanKind new_loan_kind) {
  return lending_headroom_breakdown(state, bank, params, new_loan_kind).headroom();
}

} // namespace reservesim
