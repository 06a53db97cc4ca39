#pragma once

#include <cstdint>
#include <string>

#include <boost/multiprecision/gmp.hpp>

namespace fedasm {

/// Exact rational number. Quotas, weighted populations and rounding
/// marginals are carried in this type; floating point only appears in the
/// optimizer's loss.
using Rational = boost::multiprecision::mpq_rational;
using BigInt = boost::multiprecision::mpz_int;

BigInt floor_int(const Rational& x);
BigInt ceil_int(const Rational& x);

/// Floor as a machine integer; throws std::overflow_error if out of range.
std::int64_t floor_i64(const Rational& x);
std::int64_t ceil_i64(const Rational& x);

bool is_integer(const Rational& x);

double to_double(const Rational& x);

/// "p/q" (or "p" when integral).
std::string to_string(const Rational& x);

/// Parses "p/q", "p" or a finite decimal such as "0.125".
Rational parse_rational(const std::string& text);

inline Rational make_rational(std::int64_t num, std::int64_t den = 1) {
  return Rational(BigInt(num), BigInt(den));
}

}  // namespace fedasm
