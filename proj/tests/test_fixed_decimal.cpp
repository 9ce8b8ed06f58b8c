// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include "paysec/fixed_decimal.hpp"

using paysec::FixedDecimal;
using paysec::Micros;
using paysec::MicroJoules;
using paysec::Percent;

TEST_CASE("fixed-decimal parses and prints without drift") {
  CHECK(Micros::parse("23.4").units() == 23400);
  CHECK(Micros::parse("23.4").str() == "23.400");
  CHECK(Micros::parse("0.001").units() == 1);
  CHECK(Micros::parse("-0.001").units() == -1);
  CHECK(Micros::parse("-1.5").str() == "-1.500");
  CHECK(Micros::parse("150").units() == 150000);
  CHECK(Percent::parse("49.85").units() == 4985);
  CHECK(Percent::parse("49.85").str() == "49.85");
  CHECK(Percent::from_units(0).str() == "0.00");
  CHECK(FixedDecimal<1>::parse("1.7").units() == 17);
  CHECK(FixedDecimal<1>::from_units(17).str() == "1.7");
}

TEST_CASE("fixed-decimal rejects malformed text") {
  CHECK_THROWS_AS(Micros::parse(""), paysec::Error);
  CHECK_THROWS_AS(Micros::parse("abc"), paysec::Error);
  CHECK_THROWS_AS(Micros::parse("1.2345"), paysec::Error);  // too many digits
  CHECK_THROWS_AS(Micros::parse("1."), paysec::Error);
  CHECK_THROWS_AS(Micros::parse("--1"), paysec::Error);
  CHECK_THROWS_AS(Micros::parse("1.2.3"), paysec::Error);
  CHECK_THROWS_AS(Micros::parse(" 1.2"), paysec::Error);
}

TEST_CASE("fixed-decimal round-trips every units value it can print") {
  for (std::int64_t u : {-1000001LL, -1LL, 0LL, 1LL, 999LL, 1000LL, 14105LL,
                         135248LL, 1518696000LL}) {
    auto v = Micros::from_units(u);
    CHECK(Micros::parse(v.str()).units() == u);
  }
}

TEST_CASE("fixed-decimal from_double rounds half away from zero") {
  CHECK(Percent::from_double(49.845).units() == 4985);
  CHECK(Percent::from_double(-49.845).units() == -4985);
  CHECK(Micros::from_double(1.0005).units() == 1001);
  CHECK(Micros::from_double(0.0).units() == 0);
}

TEST_CASE("div_round_half_away matches the stated rounding rule") {
  using paysec::detail::div_round_half_away;
  CHECK(div_round_half_away(5, 2) == 3);    // 2.5 -> 3
  CHECK(div_round_half_away(-5, 2) == -3);  // -2.5 -> -3
  CHECK(div_round_half_away(3, 2) == 2);
  CHECK(div_round_half_away(1, 3) == 0);
  CHECK(div_round_half_away(2, 3) == 1);
  CHECK(div_round_half_away(-1, 3) == 0);
  CHECK(div_round_half_away(-2, 3) == -1);
  CHECK(div_round_half_away(50, 3) == 17);   // 16.67 -> 17
  CHECK(div_round_half_away(70, 3) == 23);   // 23.33 -> 23
}

TEST_CASE("fixed-decimal arithmetic is exact") {
  auto a = MicroJoules::parse("14.105");
  auto b = MicroJoules::parse("28.124");
  CHECK((a + a).str() == "28.210");
  CHECK((b - a).str() == "14.019");
  CHECK(a.scaled_by(54).str() == "761.670");
  CHECK(b.scaled_by(54).str() == "1518.696");
  CHECK(a < b);
  CHECK(b > a);
  CHECK(a == MicroJoules::from_units(14105));
  auto acc = MicroJoules::from_units(0);
  for (int i = 0; i < 54; ++i) acc += a;
  CHECK(acc == a.scaled_by(54));
  CHECK(a.positive());
  CHECK_FALSE(MicroJoules::from_units(0).positive());
  CHECK_FALSE(MicroJoules::from_units(-3).positive());
}
