#include <gtest/gtest.h>

#include "allocx/rational.hpp"

using allocx::parse_rational;
using allocx::ParseError;
using allocx::Rational;

TEST(Rational, PrintsReducedFractions) {
    EXPECT_EQ(allocx::to_string(Rational(2, 4)), "1/2");
    EXPECT_EQ(allocx::to_string(Rational(1)), "1");
    EXPECT_EQ(allocx::to_string(Rational(0)), "0");
    EXPECT_EQ(allocx::to_string(Rational(-6, 8)), "-3/4");
    EXPECT_EQ(allocx::to_string(Rational(11, 12)), "11/12");
}

TEST(Rational, ParsesIntegersAndFractions) {
    EXPECT_EQ(parse_rational("3/8"), Rational(3, 8));
    EXPECT_EQ(parse_rational("1/1"), Rational(1));
    EXPECT_EQ(parse_rational("2"), Rational(2));
}

TEST(Rational, RejectsGarbage) {
    for (const char* bad : {"", "1/0", "a", "1/2/3", "0.5", "1/", "/2"})
        EXPECT_THROW(parse_rational(bad), ParseError) << bad;
}

TEST(Rational, RoundTrips) {
    for (int num = -7; num <= 7; ++num)
        for (int den = 1; den <= 9; ++den) {
            Rational r(num, den);
            EXPECT_EQ(parse_rational(allocx::to_string(r)), r);
        }
}
