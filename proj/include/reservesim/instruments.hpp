#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "reservesim/ledger.hpp"
#include "reservesim/regulation.hpp"

namespace reservesim {

/// An origination exceeded lending headroom. Carries the numbers so callers
/// can audit the refusal.
class RegulatoryBreach : public std::runtime_error {
public:
  RegulatoryBreach(std::string bank, Money requested, Money headroom);
  const std::string& bank() const { return bank_; }
  Money requested() const { return requested_; }
  Money headroom() const { return headroom_; }

private:
  std::string bank_;
  Money requested_;
  Money headroom_;
};

struct BreachRecord {
  std::string bank;
  Money requested;
  Money headroom;
  bool overridden = false;
};

struct OriginationResult {
  std::string loan_id;
  std::optional<BreachRecord> breach; // set only when an override let it through
};

/// Lends `amount` from `bank`, crediting `proceeds_account`. Refuses with
/// RegulatoryBreach above lending headroom unless `override_regulation`.
OriginationResult originate_loan(SystemState& state, const RegulatoryParams& params, std::string_view bank,
                                 LoanKind kind, Money amount, std::string_view proceeds_account,
                                 std::optional<std::string> loan_id = std::nullopt,
                                 bool override_regulation = false);

/// Size of one tranche: a fixed amount, a share of the security face (rounded
/// down), or neither, meaning "whatever remains". At most one may be empty.
struct TrancheSpec {
  std::string label;
  std::optional<Money> amount;
  std::optional<Ratio> share;
};

/// Packages loans held by `bank` into a security it owns on-book. The loans'
/// balances stay in the bank's loan column until the tranches are sold or
/// booked to equity.
const Security& securitize(SystemState& state, std::string_view bank, std::string_view security_id,
                           std::span<const std::string> loan_ids, std::span<const TrancheSpec> tranches);

/// All performing loans `bank` holds directly, in id order.
std::vector<std::string> held_performing_loans(const SystemState& state, std::string_view bank);

/// Sells one tranche to a depositor for `price`. The buyer's deposit pays the
/// seller bank's cash; a premium over the sold on-book balance first funds
/// the seller's other on-book tranches of the same security (taking them off
/// the deposit books), and any remainder is realized into equity cash. A
/// discount is absorbed from equity cash.
void sell_security(SystemState& state, std::string_view security_id, std::string_view tranche,
                   std::string_view buyer_account, Money price);

/// Moves a bank-owned tranche into equity capital at
/// mbs_equity_valuation_weight of its balance. Any part still on the deposit
/// books is bought out by equity cash.
void book_security_to_equity(SystemState& state, const RegulatoryParams& params, std::string_view bank,
                             std::string_view security_id, std::string_view tranche);

/// Pays equity cash out into a deposit account.
void pay_bonus(SystemState& state, std::string_view bank, Money amount, std::string_view to_account);

/// Principal repayment. Destroys deposit money for the part held on a bank's
/// loan column; a plain transfer for the part owned outside the banks.
void repay_loan(SystemState& state, std::string_view loan_id, Money amount, std::string_view payer_account);

/// Interest from a borrower's deposit to whoever holds the loan. Bank income
/// goes to equity cash.
void pay_interest(SystemState& state, std::string_view loan_id, Money amount, std::string_view payer_account);

struct DefaultReport {
  Money absorbed_by_equity_cash;
  Money absorbed_by_instruments;
  Money depositor_shortfall;
  std::vector<std::string> failed_banks;
};

/// Writes `loss` off a performing loan. Bank-side losses run through equity
/// cash, then equity instruments pro-rata, then depositors (bank flagged
/// failed). Losses on externally owned tranches only shrink the owners' claim.
DefaultReport default_loan(SystemState& state, std::string_view loan_id, Money loss);

/// Splits `total` across `weights` proportionally, rounding down and handing
/// leftover minor units out in order. Requires total <= sum(weights); no
/// share exceeds its weight.
std::vector<Money> allocate_pro_rata(Money total, std::span<const Money> weights);

} // namespace reservesim
