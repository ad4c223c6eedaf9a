#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "reservesim/ledger.hpp"
#include "reservesim/regulation.hpp"

namespace reservesim {

struct BankSnapshot {
  std::string id;
  Money deposits;
  Money loans;
  Money cash;
  Money equity_cash;
  Money equity_instruments; // book value, uncapped
  Money equity_mbs_face;    // outstanding face of tranches booked to equity
  Money equity_capital;     // regulatory, Tier-2 capped
  Money rwa;
  Capitalization capitalization = Capitalization::Well;
  bool failed = false;

  /// Equity cash plus instrument book value: the "Equity Capital" column.
  Money equity_book() const { return equity_cash + equity_instruments; }

  friend bool operator==(const BankSnapshot&, const BankSnapshot&) = default;
};

struct MetricsSnapshot {
  std::uint64_t step = 0;
  std::string label;
  std::string event;
  Money money_supply;    // sum of deposits, equity cash excluded
  Money bank_held_loans; // banks' loan columns
  Money external_mbs;    // tranches owned outside the banks
  Money retained_mbs;    // bank-owned tranches off the deposit books
  Money equity_mbs;      // tranches booked to equity, at outstanding face
  Money deposit_cash;
  Money equity_cash;
  std::vector<BankSnapshot> banks;

  Money total_debt() const { return bank_held_loans + external_mbs + retained_mbs + equity_mbs; }
  Money system_cash() const { return deposit_cash + equity_cash; }
  /// total_debt / money_supply; empty when money supply is zero.
  std::optional<Ratio> debt_to_money() const;
  const BankSnapshot* bank(std::string_view id) const;

  friend bool operator==(const MetricsSnapshot&, const MetricsSnapshot&) = default;
};

struct MetricsSeries {
  std::vector<MetricsSnapshot> snapshots;
  std::optional<std::string> failure; // set when the run was cut short

  friend bool operator==(const MetricsSeries&, const MetricsSeries&) = default;
};

Money money_supply(const SystemState& state);
Money bank_held_loans(const SystemState& state);
Money total_bank_originated_debt(const SystemState& state);

MetricsSnapshot take_snapshot(const SystemState& state, const RegulatoryParams& params, std::uint64_t step,
                              std::string label = {}, std::string event = {});

enum class RepaymentCapacity { Feasible, Infeasible };
std::string_view to_string(RepaymentCapacity r);

/// Crude macro bound: a period's scheduled repayments cannot exceed the
/// money in existence.
RepaymentCapacity repayment_capacity(const SystemState& state, Money scheduled_repayments);
RepaymentCapacity repayment_capacity(Money money_supply, Money scheduled_repayments);

enum class Sign { Negative = -1, Zero = 0, Positive = 1 };
enum class PriceDirection { Inflation, Deflation, Indeterminate };
std::string_view to_string(PriceDirection d);

/// Direction of the price level for a change in money supply and product
/// supply, with the other held constant.
PriceDirection price_level_direction(Sign money_change, Sign product_supply_change);

} // namespace reservesim
