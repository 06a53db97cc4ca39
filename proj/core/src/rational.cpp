#include "fedasm/rational.hpp"

#include <limits>
#include <stdexcept>

namespace fedasm {

namespace mp = boost::multiprecision;

BigInt floor_int(const Rational& x) {
  BigInt num = mp::numerator(x);
  BigInt den = mp::denominator(x);
  BigInt q = num / den;  // truncates toward zero
  if (num < 0 && q * den != num) q -= 1;
  return q;
}

BigInt ceil_int(const Rational& x) {
  BigInt f = floor_int(x);
  return Rational(f) == x ? f : f + 1;
}

namespace {
std::int64_t narrow(const BigInt& v) {
  if (v > std::numeric_limits<std::int64_t>::max() ||
      v < std::numeric_limits<std::int64_t>::min()) {
    throw std::overflow_error("rational value does not fit in 64 bits");
  }
  return v.convert_to<std::int64_t>();
}
}  // namespace

std::int64_t floor_i64(const Rational& x) { return narrow(floor_int(x)); }
std::int64_t ceil_i64(const Rational& x) { return narrow(ceil_int(x)); }

bool is_integer(const Rational& x) { return mp::denominator(x) == 1; }

double to_double(const Rational& x) { return x.convert_to<double>(); }

std::string to_string(const Rational& x) {
  if (is_integer(x)) return mp::numerator(x).str();
  return mp::numerator(x).str() + "/" + mp::denominator(x).str();
}

namespace {
// Decimal only: BigInt's string constructor would treat a leading zero as octal.
BigInt parse_integer(const std::string& text, const std::string& whole) {
  std::size_t i = 0;
  bool negative = false;
  if (i < text.size() && (text[i] == '-' || text[i] == '+')) negative = text[i++] == '-';
  if (i == text.size()) throw std::invalid_argument("malformed number '" + whole + "'");
  for (std::size_t j = i; j < text.size(); ++j) {
    if (text[j] < '0' || text[j] > '9') throw std::invalid_argument("malformed number '" + whole + "'");
  }
  while (i + 1 < text.size() && text[i] == '0') ++i;
  BigInt v(text.substr(i));
  return negative ? BigInt(-v) : v;
}
}  // namespace

Rational parse_rational(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("empty rational literal");
  auto slash = text.find('/');
  if (slash != std::string::npos) {
    BigInt num = parse_integer(text.substr(0, slash), text);
    BigInt den = parse_integer(text.substr(slash + 1), text);
    if (den == 0) throw std::invalid_argument("zero denominator in '" + text + "'");
    return Rational(num, den);
  }
  auto dot = text.find('.');
  if (dot == std::string::npos) return Rational(parse_integer(text, text));
  std::string digits = text.substr(0, dot) + text.substr(dot + 1);
  BigInt den = 1;
  for (std::size_t i = dot + 1; i < text.size(); ++i) den *= 10;
  return Rational(parse_integer(digits, text), den);
}

}  // namespace fedasm
