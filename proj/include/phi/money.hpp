#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace phi {

/// Exact currency amount held as an integer number of pence.
class Money {
 public:
  constexpr Money() = default;
  static constexpr Money from_pence(std::int64_t pence) { return Money(pence); }

  constexpr std::int64_t pence() const noexcept { return pence_; }
  /// Conversion to binary floating point; only numerical routines should call this.
  constexpr double to_double() const noexcept { return static_cast<double>(pence_) / 100.0; }

  constexpr bool positive() const noexcept { return pence_ > 0; }

  constexpr Money& operator+=(Money o) noexcept {
    pence_ += o.pence_;
    return *this;
  }
  friend constexpr Money operator+(Money a, Money b) noexcept { return Money(a.pence_ + b.pence_); }
  friend constexpr Money operator-(Money a, Money b) noexcept { return Money(a.pence_ - b.pence_); }
  friend constexpr auto operator<=>(Money, Money) = default;

  /// Plain decimal rendering, e.g. "-1234.05".
  std::string str() const;

 private:
  constexpr explicit Money(std::int64_t p) : pence_(p) {}
  std::int64_t pence_ = 0;
};

/// Parses a transparency-feed amount. Strips currency symbols (GBP, pound sign),
/// thousands separators and surrounding whitespace; accepts a leading or trailing
/// minus and accounting-style parentheses. More than two decimal places are
/// rounded half away from zero to the nearest penny. Returns nullopt when the
/// text is not a finite decimal.
std::optional<Money> parse_money(std::string_view text);

}  // namespace phi
