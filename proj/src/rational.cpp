#include "sweeplab/rational.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <stdexcept>

namespace sweeplab {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

BigInt decimal_integer(std::string_view digits) {
  const auto first = digits.find_first_not_of('0');
  return first == std::string_view::npos ? BigInt(0) : BigInt(std::string(digits.substr(first)));
}

BigInt pow10(long exponent) {
  BigInt r = 1;
  for (long i = 0; i < exponent; ++i) r *= 10;
  return r;
}

Rational parse_decimal(std::string_view text, std::string_view original) {
  bool negative = false;
  if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }
  long exponent = 0;
  if (auto e = text.find_first_of("eE"); e != std::string_view::npos) {
    std::string_view exp_part = text.substr(e + 1);
    text = text.substr(0, e);
    bool exp_negative = false;
    if (!exp_part.empty() && (exp_part.front() == '-' || exp_part.front() == '+')) {
      exp_negative = exp_part.front() == '-';
      exp_part.remove_prefix(1);
    }
    if (!all_digits(exp_part) || exp_part.size() > 6) {
      throw std::invalid_argument("malformed exponent in number '" + std::string(original) + "'");
    }
    exponent = std::stol(std::string(exp_part));
    if (exp_negative) exponent = -exponent;
  }
  std::string digits;
  long fraction_digits = 0;
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    std::string_view whole = text.substr(0, dot);
    std::string_view frac = text.substr(dot + 1);
    if ((whole.empty() && frac.empty()) || (!whole.empty() && !all_digits(whole)) ||
        (!frac.empty() && !all_digits(frac))) {
      throw std::invalid_argument("malformed number '" + std::string(original) + "'");
    }
    digits = std::string(whole) + std::string(frac);
    fraction_digits = static_cast<long>(frac.size());
  } else {
    if (!all_digits(text)) {
      throw std::invalid_argument("malformed number '" + std::string(original) + "'");
    }
    digits = std::string(text);
  }
  // leading zeros would otherwise select octal
  const BigInt numerator = decimal_integer(digits);
  long scale = exponent - fraction_digits;
  Rational q = scale >= 0 ? Rational(numerator * pow10(scale))
                          : Rational(numerator, pow10(-scale));
  return negative ? Rational(-q) : q;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  std::string_view trimmed = text;
  while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.front()))) {
    trimmed.remove_prefix(1);
  }
  while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.back()))) {
    trimmed.remove_suffix(1);
  }
  if (trimmed.empty()) throw std::invalid_argument("empty number");

  if (auto slash = trimmed.find('/'); slash != std::string_view::npos) {
    std::string_view num = trimmed.substr(0, slash);
    std::string_view den = trimmed.substr(slash + 1);
    bool negative = false;
    if (!num.empty() && (num.front() == '-' || num.front() == '+')) {
      negative = num.front() == '-';
      num.remove_prefix(1);
    }
    if (!all_digits(num) || !all_digits(den)) {
      throw std::invalid_argument("malformed fraction '" + std::string(text) + "'");
    }
    BigInt d = decimal_integer(den);
    if (d == 0) throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
    Rational q(decimal_integer(num), d);
    return negative ? Rational(-q) : q;
  }
  return parse_decimal(trimmed, text);
}

Rational rational_from_decimal(double value) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) throw std::invalid_argument("cannot render number");
  std::string_view text(buf.data(), static_cast<std::size_t>(end - buf.data()));
  if (text.find_first_of("ni") != std::string_view::npos) {
    throw std::invalid_argument("non-finite number");
  }
  return parse_rational(text);
}

std::string to_fraction_string(const Rational& q) {
  return boost::multiprecision::numerator(q).str() + "/" +
         boost::multiprecision::denominator(q).str();
}

double to_double(const Rational& q) { return q.convert_to<double>(); }

std::string format_probability(double value) {
  std::array<char, 64> buf{};
  std::snprintf(buf.data(), buf.size(), "%#.12g", value);
  return buf.data();
}

}  // namespace sweeplab
