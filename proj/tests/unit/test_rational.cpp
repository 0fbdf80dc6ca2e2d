#include <deflab/error.hpp>
#include <deflab/rational.hpp>

#include <gtest/gtest.h>

using namespace deflab;

TEST(Rational, ParsesCanonicalForms) {
  EXPECT_EQ(parse_rational("0"), Rational(0));
  EXPECT_EQ(parse_rational("3"), Rational(3));
  EXPECT_EQ(parse_rational("-1/2"), Rational(-1, 2));
  EXPECT_EQ(parse_rational("123456789012345678901234567891/2"),
            Rational(mpz_class("123456789012345678901234567891"), mpz_class(2)));
}

TEST(Rational, RejectsNonCanonicalText) {
  for (const char* bad : {"", "+1", "-0", "01", "2/4", "1/1", "1/-2", "-1/0", "0.5", "1e3", "1/", "/2", " 1", "1 ",
                          "0/3", "1//2", "--1"}) {
    EXPECT_THROW(parse_rational(bad), ParseError) << bad;
  }
}

TEST(Rational, FormatRoundTrips) {
  for (const char* s : {"0", "7", "-7", "1/3", "-22/7", "1000000000000000000000/3"}) {
    EXPECT_EQ(format_rational(parse_rational(s)), s);
  }
  EXPECT_EQ(format_rational(make_rational(4, -6)), "-2/3");
}

TEST(Rational, Dot) {
  const RationalVector a{make_rational(1, 2), Rational(2)};
  const RationalVector b{Rational(4), make_rational(-1, 4)};
  EXPECT_EQ(dot(a, b), make_rational(3, 2));
}
