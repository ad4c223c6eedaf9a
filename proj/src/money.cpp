#include "reservesim/money.hpp"

#include <charconv>
#include <cstdlib>
#include <limits>
#include <numeric>

namespace reservesim {

namespace detail {

std::int64_t narrow_checked(__int128 v) {
  if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min()) {
    throw MoneyOverflow("amount out of 64-bit range");
  }
  return static_cast<std::int64_t>(v);
}

__int128 floor_div(__int128 a, __int128 b) {
  if (b < 0) {
    a = -a;
    b = -b;
  }
  __int128 q = a / b;
  if ((a % b != 0) && (a < 0)) --q;
  return q;
}

__int128 ceil_div(__int128 a, __int128 b) { return -floor_div(-a, b); }

} // namespace detail

namespace {

std::int64_t parse_int(std::string_view s, std::string_view whole) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || s.empty()) {
    throw std::invalid_argument("malformed number: '" + std::string(whole) + "'");
  }
  return v;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

// Splits "[-]int[.frac]" into a scaled integer with `scale_digits` fraction
// digits. Rejects more fraction digits than the scale holds.
__int128 parse_fixed(std::string_view text, int scale_digits, int* frac_digits_out = nullptr) {
  std::string_view s = trim(text);
  bool neg = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    neg = s.front() == '-';
    s.remove_prefix(1);
  }
  auto dot = s.find('.');
  std::string_view ip = s.substr(0, dot);
  std::string_view fp = dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);
  if (ip.empty() && fp.empty()) throw std::invalid_argument("malformed number: '" + std::string(text) + "'");
  if (static_cast<int>(fp.size()) > scale_digits) {
    throw std::invalid_argument("too many fractional digits: '" + std::string(text) + "'");
  }
  for (char c : ip)
    if (c < '0' || c > '9') throw std::invalid_argument("malformed number: '" + std::string(text) + "'");
  for (char c : fp)
    if (c < '0' || c > '9') throw std::invalid_argument("malformed number: '" + std::string(text) + "'");
  __int128 v = ip.empty() ? 0 : parse_int(ip, text);
  for (int i = 0; i < scale_digits; ++i) {
    v *= 10;
    if (i < static_cast<int>(fp.size())) v += fp[static_cast<std::size_t>(i)] - '0';
  }
  if (frac_digits_out) *frac_digits_out = static_cast<int>(fp.size());
  return neg ? -v : v;
}

} // namespace

Ratio::Ratio(std::int64_t num, std::int64_t den) {
  if (den == 0) throw std::invalid_argument("ratio with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  std::int64_t g = std::gcd(num < 0 ? -num : num, den);
  if (g == 0) g = 1;
  num_ = num / g;
  den_ = den / g;
}

Ratio Ratio::parse(std::string_view text) {
  std::string_view s = trim(text);
  if (s.empty()) throw std::invalid_argument("empty ratio");
  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    return Ratio{parse_int(trim(s.substr(0, slash)), text), parse_int(trim(s.substr(slash + 1)), text)};
  }
  std::int64_t extra_den = 1;
  if (s.back() == '%') {
    extra_den = 100;
    s.remove_suffix(1);
  }
  int digits = 0;
  constexpr int kMaxDigits = 12;
  __int128 scaled = parse_fixed(s, kMaxDigits, &digits);
  __int128 den = 1;
  for (int i = 0; i < kMaxDigits; ++i) den *= 10;
  return Ratio{detail::narrow_checked(scaled), detail::narrow_checked(den * extra_den)};
}

Ratio Ratio::complement() const { return Ratio{den_ - num_, den_}; }

std::string Ratio::to_string() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

std::strong_ordering operator<=>(const Ratio& a, const Ratio& b) {
  __int128 l = static_cast<__int128>(a.num_) * b.den_;
  __int128 r = static_cast<__int128>(b.num_) * a.den_;
  return l < r ? std::strong_ordering::less : (l > r ? std::strong_ordering::greater : std::strong_ordering::equal);
}

Money Money::units(std::int64_t u) {
  return Money{detail::narrow_checked(static_cast<__int128>(u) * kMinorPerUnit)};
}

Money Money::parse(std::string_view text) {
  return Money{detail::narrow_checked(parse_fixed(text, 2))};
}

std::string Money::to_string() const {
  __int128 v = minor_;
  bool neg = v < 0;
  if (neg) v = -v;
  auto whole = static_cast<std::uint64_t>(v / kMinorPerUnit);
  auto frac = static_cast<unsigned>(v % kMinorPerUnit);
  std::string out = (neg ? "-" : "") + std::to_string(whole);
  if (frac != 0) {
    out += '.';
    out += static_cast<char>('0' + frac / 10);
    out += static_cast<char>('0' + frac % 10);
  }
  return out;
}

Money Money::operator+(Money o) const {
  std::int64_t r = 0;
  if (__builtin_add_overflow(minor_, o.minor_, &r)) throw MoneyOverflow("money addition overflow");
  return Money{r};
}

Money Money::operator-(Money o) const {
  std::int64_t r = 0;
  if (__builtin_sub_overflow(minor_, o.minor_, &r)) throw MoneyOverflow("money subtraction overflow");
  return Money{r};
}

Money Money::operator-() const { return Money{} - *this; }

Money Money::mul_floor(const Ratio& r) const {
  return Money{detail::narrow_checked(detail::floor_div(static_cast<__int128>(minor_) * r.num(), r.den()))};
}

Money Money::mul_ceil(const Ratio& r) const {
  return Money{detail::narrow_checked(detail::ceil_div(static_cast<__int128>(minor_) * r.num(), r.den()))};
}

} // namespace reservesim
