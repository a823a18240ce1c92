#include "phi/money.hpp"

#include <cstdlib>
#include <limits>

#include <fmt/format.h>

namespace phi {

std::string Money::str() const {
  const std::int64_t mag = pence_ < 0 ? -pence_ : pence_;
  return fmt::format("{}{}.{:02d}", pence_ < 0 ? "-" : "", mag / 100, mag % 100);
}

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

bool strip_prefix(std::string_view& s, std::string_view p) {
  if (s.substr(0, p.size()) == p) {
    s.remove_prefix(p.size());
    return true;
  }
  return false;
}

bool strip_suffix(std::string_view& s, std::string_view p) {
  if (s.size() >= p.size() && s.substr(s.size() - p.size()) == p) {
    s.remove_suffix(p.size());
    return true;
  }
  return false;
}

// UTF-8 and Latin-1 pound signs, dollar, euro, ISO code.
void strip_currency(std::string_view& s) {
  static constexpr std::string_view kSymbols[] = {"\xC2\xA3", "\xA3", "$", "\xE2\x82\xAC", "GBP"};
  bool changed = true;
  while (changed) {
    changed = false;
    s = trim(s);
    for (auto sym : kSymbols) {
      if (strip_prefix(s, sym) || strip_suffix(s, sym)) changed = true;
    }
  }
}

}  // namespace

std::optional<Money> parse_money(std::string_view text) {
  std::string_view s = trim(text);
  bool negative = false;
  if (s.size() >= 2 && s.front() == '(' && s.back() == ')') {
    negative = true;
    s = s.substr(1, s.size() - 2);
  }
  strip_currency(s);
  if (strip_prefix(s, "-")) {
    negative = !negative;
  } else if (strip_suffix(s, "-")) {
    negative = !negative;
  } else {
    strip_prefix(s, "+");
  }
  strip_currency(s);
  if (s.empty()) return std::nullopt;

  constexpr std::int64_t kMax = std::numeric_limits<std::int64_t>::max() / 100 - 1;
  std::int64_t whole = 0;
  int frac_digits = 0;
  std::int64_t frac = 0;
  bool round_up = false;
  bool seen_point = false;
  bool any_digit = false;
  for (char c : s) {
    if (c == ',') {
      if (seen_point) return std::nullopt;
      continue;
    }
    if (c == '.') {
      if (seen_point) return std::nullopt;
      seen_point = true;
      continue;
    }
    if (c < '0' || c > '9') return std::nullopt;
    any_digit = true;
    const int d = c - '0';
    if (!seen_point) {
      if (whole > kMax / 10) return std::nullopt;
      whole = whole * 10 + d;
    } else if (frac_digits < 2) {
      frac = frac * 10 + d;
      ++frac_digits;
    } else if (frac_digits == 2) {
      round_up = d >= 5;
      ++frac_digits;
    }
  }
  if (!any_digit) return std::nullopt;
  if (frac_digits == 1) frac *= 10;
  std::int64_t pence = whole * 100 + frac + (round_up ? 1 : 0);
  return Money::from_pence(negative ? -pence : pence);
}

}  // namespace phi
