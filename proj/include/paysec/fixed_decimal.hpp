// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <string>

#include "paysec/errors.hpp"

namespace paysec {

namespace detail {

constexpr std::int64_t pow10(unsigned n) {
  std::int64_t v = 1;
  for (unsigned i = 0; i < n; ++i) v *= 10;
  return v;
}

/// num/den rounded half away from zero; den > 0.
constexpr std::int64_t div_round_half_away(__int128 num, __int128 den) {
  __int128 q = num >= 0 ? (2 * num + den) / (2 * den) : -((2 * -num + den) / (2 * den));
  return static_cast<std::int64_t>(q);
}

}  // namespace detail

/// Decimal value held as an integer count of 10^-FracDigits units. Report
/// arithmetic stays exact: no float drift between a table and its recomputation.
template <unsigned FracDigits>
class FixedDecimal {
 public:
  static constexpr std::int64_t scale = detail::pow10(FracDigits);

  constexpr FixedDecimal() = default;

  static constexpr FixedDecimal from_units(std::int64_t units) { return FixedDecimal(units); }
  static constexpr FixedDecimal from_int(std::int64_t whole) { return FixedDecimal(whole * scale); }

  static FixedDecimal from_double(double v) {
    return FixedDecimal(static_cast<std::int64_t>(std::llround(v * static_cast<double>(scale))));
  }

  /// Parses "[-]digits[.digits]" with at most FracDigits fractional digits.
  static FixedDecimal parse(const std::string& text) {
    if (text.empty()) throw Error(ErrorKind::Format, "empty decimal");
    std::size_t i = 0;
    bool neg = false;
    if (text[i] == '-' || text[i] == '+') {
      neg = text[i] == '-';
      ++i;
    }
    if (i == text.size()) throw Error(ErrorKind::Format, "decimal has no digits: " + text);
    std::int64_t units = 0;
    bool any = false;
    for (; i < text.size() && text[i] != '.'; ++i) {
      if (text[i] < '0' || text[i] > '9') throw Error(ErrorKind::Format, "bad decimal: " + text);
      units = units * 10 + (text[i] - '0');
      any = true;
    }
    unsigned frac = 0;
    if (i < text.size()) {  // at '.'
      for (++i; i < text.size(); ++i) {
        if (text[i] < '0' || text[i] > '9') throw Error(ErrorKind::Format, "bad decimal: " + text);
        if (++frac > FracDigits)
          throw Error(ErrorKind::Format, "too many fractional digits: " + text);
        units = units * 10 + (text[i] - '0');
        any = true;
      }
      if (frac == 0) throw Error(ErrorKind::Format, "no digits after decimal point: " + text);
    }
    if (!any) throw Error(ErrorKind::Format, "decimal has no digits: " + text);
    for (; frac < FracDigits; ++frac) units *= 10;
    return FixedDecimal(neg ? -units : units);
  }

  constexpr std::int64_t units() const { return units_; }
  constexpr double to_double() const { return static_cast<double>(units_) / scale; }
  constexpr bool positive() const { return units_ > 0; }

  std::string str() const {
    std::int64_t mag = units_ < 0 ? -units_ : units_;
    std::string frac;
    if constexpr (FracDigits > 0) {
      frac = std::to_string(mag % scale);
      frac.insert(frac.begin(), FracDigits - frac.size(), '0');
      frac.insert(frac.begin(), '.');
    }
    return (units_ < 0 ? "-" : "") + std::to_string(mag / scale) + frac;
  }

  constexpr FixedDecimal operator+(FixedDecimal o) const { return FixedDecimal(units_ + o.units_); }
  constexpr FixedDecimal operator-(FixedDecimal o) const { return FixedDecimal(units_ - o.units_); }
  constexpr FixedDecimal& operator+=(FixedDecimal o) {
    units_ += o.units_;
    return *this;
  }
  constexpr FixedDecimal scaled_by(std::int64_t n) const { return FixedDecimal(units_ * n); }

  friend constexpr auto operator<=>(FixedDecimal, FixedDecimal) = default;

 private:
  explicit constexpr FixedDecimal(std::int64_t units) : units_(units) {}

  std::int64_t units_ = 0;
};

using Micros = FixedDecimal<3>;       // microseconds
using Milliwatts = FixedDecimal<3>;   // milliwatts
using MicroJoules = FixedDecimal<3>;  // microjoules
using Percent = FixedDecimal<2>;

}  // namespace paysec
