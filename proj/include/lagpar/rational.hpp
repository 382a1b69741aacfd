#pragma once

#include <lagpar/error.hpp>

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>

namespace lagpar {

using BigInt = boost::multiprecision::cpp_int;

/// Exact fraction over arbitrary-precision integers.
///
/// Always held in canonical form: the denominator is positive, numerator and
/// denominator are coprime, and zero is 0/1. The text form `<num>/<den>`
/// (e.g. `-1/2`, `3/1`) is the only encoding used on disk and on the wire.
class Rational {
 public:
  Rational() = default;
  Rational(std::int64_t value) : value_(value) {}  // NOLINT(google-explicit-constructor)
  explicit Rational(const BigInt& value) : value_(value) {}

  Rational(const BigInt& numerator, const BigInt& denominator) {
    if (denominator == 0) throw Error(Errc::zero_denominator, "rational with zero denominator");
    value_ = denominator < 0 ? Value(-numerator, -denominator) : Value(numerator, denominator);
  }

  [[nodiscard]] BigInt numerator() const { return boost::multiprecision::numerator(value_); }
  [[nodiscard]] BigInt denominator() const { return boost::multiprecision::denominator(value_); }
  [[nodiscard]] bool is_zero() const { return value_ == 0; }
  [[nodiscard]] bool is_integer() const { return denominator() == 1; }
  [[nodiscard]] int sign() const { return value_.sign(); }

  Rational& operator+=(const Rational& rhs) { value_ += rhs.value_; return *this; }
  Rational& operator-=(const Rational& rhs) { value_ -= rhs.value_; return *this; }
  Rational& operator*=(const Rational& rhs) { value_ *= rhs.value_; return *this; }
  Rational& operator/=(const Rational& rhs) {
    if (rhs.is_zero()) throw Error(Errc::zero_denominator, "division by zero");
    value_ /= rhs.value_;
    return *this;
  }

  friend Rational operator+(Rational lhs, const Rational& rhs) { return lhs += rhs; }
  friend Rational operator-(Rational lhs, const Rational& rhs) { return lhs -= rhs; }
  friend Rational operator*(Rational lhs, const Rational& rhs) { return lhs *= rhs; }
  friend Rational operator/(Rational lhs, const Rational& rhs) { return lhs /= rhs; }
  friend Rational operator-(const Rational& v) { return Rational(Value(-v.value_)); }

  friend bool operator==(const Rational& lhs, const Rational& rhs) { return lhs.value_ == rhs.value_; }
  friend std::strong_ordering operator<=>(const Rational& lhs, const Rational& rhs) {
    if (lhs.value_ < rhs.value_) return std::strong_ordering::less;
    if (lhs.value_ > rhs.value_) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

  /// Canonical `<num>/<den>` text.
  [[nodiscard]] std::string to_string() const {
    return numerator().str() + "/" + denominator().str();
  }

  /// True when numerator and denominator satisfy the canonical-form invariant.
  [[nodiscard]] bool is_canonical() const {
    const BigInt den = denominator();
    const BigInt num = numerator();
    if (den <= 0) return false;
    if (num == 0) return den == 1;
    return boost::multiprecision::gcd(num < 0 ? BigInt(-num) : num, den) == 1;
  }

  /// Parses the strict canonical encoding. `2/4`, `1/-2`, `-0/1`, `+1/1`,
  /// whitespace and leading zeros are all rejected.
  static Rational parse(std::string_view text) {
    const auto slash = text.find('/');
    if (slash == std::string_view::npos) {
      throw Error(Errc::parse_error, "rational '" + std::string(text) + "' lacks '/'");
    }
    const std::string_view num_text = text.substr(0, slash);
    const std::string_view den_text = text.substr(slash + 1);
    const bool negative = !num_text.empty() && num_text.front() == '-';
    const std::string_view num_digits = negative ? num_text.substr(1) : num_text;
    if (!is_decimal(num_digits) || !is_decimal(den_text) || den_text == "0" ||
        (negative && num_digits == "0")) {
      throw Error(Errc::parse_error, "malformed rational '" + std::string(text) + "'");
    }
    BigInt num{std::string(num_digits)};
    if (negative) num = -num;
    const BigInt den{std::string(den_text)};
    Rational result(num, den);
    if (result.numerator() != num || result.denominator() != den) {
      throw Error(Errc::parse_error, "rational '" + std::string(text) + "' is not in lowest terms");
    }
    return result;
  }

  /// Accepts the canonical encoding or a bare integer (`7` means `7/1`).
  static Rational parse_value(std::string_view text) {
    if (text.find('/') != std::string_view::npos) return parse(text);
    return parse(std::string(text) + "/1");
  }

  friend std::ostream& operator<<(std::ostream& os, const Rational& v) { return os << v.to_string(); }

 private:
  using Value = boost::multiprecision::cpp_rational;
  explicit Rational(Value value) : value_(std::move(value)) {}

  static bool is_decimal(std::string_view digits) {
    if (digits.empty()) return false;
    if (digits.size() > 1 && digits.front() == '0') return false;
    for (const char c : digits) {
      if (c < '0' || c > '9') return false;
    }
    return true;
  }

  Value value_;
};

}  // namespace lagpar
