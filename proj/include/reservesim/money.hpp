#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace reservesim {

/// Thrown on any arithmetic result that does not fit in the 64-bit minor-unit
/// representation. Never silently wraps.
class MoneyOverflow : public std::overflow_error {
public:
  using std::overflow_error::overflow_error;
};

/// Exact rational in lowest terms with a positive denominator.
class Ratio {
public:
  constexpr Ratio() = default;
  Ratio(std::int64_t num, std::int64_t den);

  static Ratio zero() { return Ratio{0, 1}; }
  static Ratio one() { return Ratio{1, 1}; }

  /// Accepts "1/10", "0.1", "10%" and integers.
  static Ratio parse(std::string_view text);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }

  bool is_zero() const { return num_ == 0; }
  bool in_unit_interval() const { return num_ >= 0 && num_ <= den_; }

  Ratio complement() const; // 1 - r

  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  std::string to_string() const;

  friend bool operator==(const Ratio&, const Ratio&) = default;
  friend std::strong_ordering operator<=>(const Ratio& a, const Ratio& b);

private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

/// Signed amount in integer minor currency units (cents). One whole unit is
/// `kMinorPerUnit` minor units.
class Money {
public:
  static constexpr std::int64_t kMinorPerUnit = 100;

  constexpr Money() = default;
  static constexpr Money minor(std::int64_t m) { return Money{m}; }
  static Money units(std::int64_t u);

  /// Parses a decimal string in whole units ("1000", "1000.5", "-3.25") into
  /// minor units. More than two fractional digits is an error.
  static Money parse(std::string_view text);

  constexpr std::int64_t minor_units() const { return minor_; }
  constexpr bool is_zero() const { return minor_ == 0; }
  constexpr bool is_negative() const { return minor_ < 0; }
  constexpr bool is_positive() const { return minor_ > 0; }

  /// Whole-unit decimal: "1000" when there is no fractional part, "1018.09"
  /// otherwise.
  std::string to_string() const;

  Money operator+(Money o) const;
  Money operator-(Money o) const;
  Money operator-() const;
  Money& operator+=(Money o) { return *this = *this + o; }
  Money& operator-=(Money o) { return *this = *this - o; }

  /// ratio * amount rounded toward -inf / +inf.
  Money mul_floor(const Ratio& r) const;
  Money mul_ceil(const Ratio& r) const;

  friend constexpr bool operator==(Money, Money) = default;
  friend constexpr std::strong_ordering operator<=>(Money a, Money b) { return a.minor_ <=> b.minor_; }

private:
  constexpr explicit Money(std::int64_t m) : minor_(m) {}
  std::int64_t minor_ = 0;
};

constexpr Money min(Money a, Money b) { return a < b ? a : b; }
constexpr Money max(Money a, Money b) { return a < b ? b : a; }

namespace detail {
std::int64_t narrow_checked(__int128 v);
__int128 floor_div(__int128 a, __int128 b);
__int128 ceil_div(__int128 a, __int128 b);
} // namespace detail

} // namespace reservesim
