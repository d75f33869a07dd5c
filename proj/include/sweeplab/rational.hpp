#pragma once

#include <string>
#include <string_view>

#include <boost/multiprecision/gmp.hpp>

namespace sweeplab {

using Rational = boost::multiprecision::mpq_rational;
using BigInt = boost::multiprecision::mpz_int;

/// Parses "num/den", an integer, or a decimal literal (optionally with an
/// exponent) into an exact rational. Decimals become digits over a power of
/// ten. Throws std::invalid_argument on malformed input or a zero denominator.
Rational parse_rational(std::string_view text);

/// Exact rational from a double via its shortest round-trip decimal form,
/// so 0.1 becomes 1/10 rather than the binary expansion.
Rational rational_from_decimal(double value);

/// Always "num/den", with den > 0 ("0/1", "1/1" for the integers).
std::string to_fraction_string(const Rational& q);

double to_double(const Rational& q);

/// Fixed 12-significant-digit rendering used in every report.
std::string format_probability(double value);

}  // namespace sweeplab
