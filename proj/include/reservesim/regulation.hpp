#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "reservesim/ledger.hpp"
#include "reservesim/money.hpp"

namespace reservesim {

struct RegulatoryParams {
  Ratio reserve_ratio{1, 10};          // on net-transaction deposits
  Ratio well_capitalized_ratio{1, 10}; // capital / RWA
  Ratio adequate_ratio{8, 100};
  Ratio risk_weight_mortgage{1, 2};
  Ratio risk_weight_other{1, 1};
  Ratio tier2_cap_share{4, 100};
  Ratio mbs_equity_valuation_weight{1, 2};

  Ratio risk_weight(LoanKind kind) const {
    return kind == LoanKind::Mortgage ? risk_weight_mortgage : risk_weight_other;
  }

  /// Throws std::invalid_argument unless every ratio lies in [0, 1].
  void validate() const;

  /// Sets one field by its scenario-file name ("reserve_ratio", ...).
  /// Unknown names throw std::invalid_argument.
  void set(std::string_view name, const Ratio& value);
  static const std::vector<std::string>& field_names();
  Ratio get(std::string_view name) const;
};

enum class Capitalization { Well, Adequate, Under };
std::string_view to_string(Capitalization c);

/// ceil(reserve_ratio * net-transaction deposits).
Money required_reserves(const BankState& bank, const RegulatoryParams& params);

/// Exact (unrounded) risk-weighted exposure, as numerator / denominator.
struct RiskExposure {
  __int128 num = 0;
  __int128 den = 1;
};
RiskExposure risk_exposure(const SystemState& state, const BankState& bank, const RegulatoryParams& params);

/// Loan book weighted by kind, rounded up to the minor unit.
Money risk_weighted_assets(const SystemState& state, const BankState& bank, const RegulatoryParams& params);

/// Equity cash plus instrument book values, no Tier-2 cap.
Money equity_capital_book(const SystemState& state, const BankState& bank);

/// Sum of instrument book values only.
Money equity_instrument_value(const SystemState& state, const BankState& bank);

/// Largest amount of instrument book value that may count toward capital:
/// floor(tier2_cap_share / adequate_ratio * RWA). Absent when adequate_ratio
/// is zero (no cap).
std::optional<Money> tier2_cap(Money rwa, const RegulatoryParams& params);

/// Regulatory capital: equity cash plus instrument book value, the latter
/// capped by tier2_cap.
Money equity_capital_total(const SystemState& state, const BankState& bank, const RegulatoryParams& params);

/// Pure-number forms, used by the bank-level overloads.
Capitalization classify_capitalization(Money equity, Money rwa, const RegulatoryParams& params);
Capitalization classify_capitalization(const SystemState& state, const BankState& bank, const RegulatoryParams& params);

/// Bounds that make up the lending headroom. `capital` is empty when the
/// capital constraint cannot bind (zero risk weight or zero ratio).
struct HeadroomBreakdown {
  Money reserve;
  std::optional<Money> capital;
  Money headroom() const { return capital ? min(reserve, *capital) : reserve; }
};

HeadroomBreakdown lending_headroom_breakdown(const SystemState& state, const BankState& bank,
                                             const RegulatoryParams& params, LoanKind new_loan_kind);

/// Largest additional principal the bank may originate without breaching its
/// reserve requirement or the well-capitalized ratio.
Money lending_headroom(const SystemState& state, const BankState& bank, const RegulatoryParams& params,
                       LoanKind new_loan_kind);

} // namespace reservesim
