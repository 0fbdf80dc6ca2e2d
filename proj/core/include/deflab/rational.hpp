#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>
#include <vector>

namespace deflab {

using Rational = mpq_class;
using RationalVector = std::vector<Rational>;

/// Parses a canonical rational string ("3", "-1/2", "0").
///
/// Canonical means lowest terms, a strictly positive denominator, no leading
/// zeros or '+' sign, no "-0", and the "/q" suffix present only when q != 1.
/// Anything else (including decimals and exponents) throws ParseError.
Rational parse_rational(std::string_view text);

/// Inverse of parse_rational; always emits the canonical form.
std::string format_rational(const Rational& value);

/// Rational built from a (numerator, denominator) pair of machine integers.
Rational make_rational(long numerator, long denominator = 1);

inline double to_double(const Rational& value) { return value.get_d(); }

Rational dot(const RationalVector& a, const RationalVector& b);

}  // namespace deflab
