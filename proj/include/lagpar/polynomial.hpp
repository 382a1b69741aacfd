#pragma once

#include <lagpar/error.hpp>
#include <lagpar/rational.hpp>

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace lagpar {

struct Point {
  Rational x;
  Rational y;

  friend bool operator==(const Point&, const Point&) = default;
};

/// Polynomial with exact rational coefficients in ascending degree order.
/// The zero polynomial has no coefficients; otherwise the last one is nonzero.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<Rational> coefficients) : coefficients_(std::move(coefficients)) {
    trim();
  }

  [[nodiscard]] const std::vector<Rational>& coefficients() const noexcept { return coefficients_; }
  [[nodiscard]] bool is_zero() const noexcept { return coefficients_.empty(); }

  /// Degree, or -1 for the zero polynomial.
  [[nodiscard]] std::ptrdiff_t degree() const noexcept {
    return static_cast<std::ptrdiff_t>(coefficients_.size()) - 1;
  }

  friend bool operator==(const Polynomial&, const Polynomial&) = default;

  [[nodiscard]] std::string to_string() const {
    std::string out = "[";
    for (std::size_t i = 0; i < coefficients_.size(); ++i) {
      if (i != 0) out += ",";
      out += coefficients_[i].to_string();
    }
    return out + "]";
  }

 private:
  void trim() {
    while (!coefficients_.empty() && coefficients_.back().is_zero()) coefficients_.pop_back();
  }

  std::vector<Rational> coefficients_;
};

namespace detail {

inline void require_distinct(std::span<const Rational> xs) {
  std::vector<Rational> sorted(xs.begin(), xs.end());
  std::sort(sorted.begin(), sorted.end());
  const auto dup = std::adjacent_find(sorted.begin(), sorted.end());
  if (dup != sorted.end()) {
    throw Error(Errc::duplicate_x, "x = " + dup->to_string() + " appears more than once");
  }
}

}  // namespace detail

/// Value at `x` of the i-th Lagrange basis polynomial over nodes `xs`:
/// the product over j != i of (x - xs[j]) / (xs[i] - xs[j]).
inline Rational lagrange_basis(std::span<const Rational> xs, std::size_t i, const Rational& x) {
  if (i >= xs.size()) {
    throw Error(Errc::index_out_of_range,
                "basis index " + std::to_string(i) + " with " + std::to_string(xs.size()) + " nodes");
  }
  Rational numerator = 1;
  Rational denominator = 1;
  for (std::size_t j = 0; j < xs.size(); ++j) {
    if (j == i) continue;
    const Rational gap = xs[i] - xs[j];
    if (gap.is_zero()) throw Error(Errc::duplicate_x, "x = " + xs[i].to_string() + " repeated");
    numerator *= x - xs[j];
    denominator *= gap;
  }
  return numerator / denominator;
}

/// Horner evaluation.
inline Rational evaluate(const Polynomial& p, const Rational& x) {
  Rational acc;
  const auto& c = p.coefficients();
  for (auto it = c.rbegin(); it != c.rend(); ++it) {
    acc *= x;
    acc += *it;
  }
  return acc;
}

inline std::vector<Rational> evaluate_many(const Polynomial& p, std::span<const Rational> xs) {
  std::vector<Rational> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(evaluate(p, x));
  return out;
}

/// The unique polynomial of degree < points.size() through every point,
/// assembled in Lagrange form.
///
/// The node polynomial N(x) = prod (x - x_j) is built once; each basis
/// numerator N(x) / (x - x_i) then falls out of one synthetic division, which
/// keeps the expansion at O(n^2) rational operations.
inline Polynomial interpolate(std::span<const Point> points) {
  if (points.empty()) throw Error(Errc::empty_input, "interpolation needs at least one point");
  const std::size_t n = points.size();

  std::vector<Rational> xs;
  xs.reserve(n);
  for (const auto& p : points) xs.push_back(p.x);
  detail::require_distinct(xs);

  // node[d] is the coefficient of x^d in N(x); degree n.
  std::vector<Rational> node(n + 1);
  node[0] = 1;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t d = j + 1; d > 0; --d) {
      node[d] = node[d - 1] - xs[j] * node[d];
    }
    node[0] = -xs[j] * node[0];
  }

  std::vector<Rational> result(n);
  std::vector<Rational> quotient(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (points[i].y.is_zero()) continue;

    // N(x) / (x - x_i), highest degree first.
    quotient[n - 1] = node[n];
    for (std::size_t d = n - 1; d > 0; --d) {
      quotient[d - 1] = node[d] + xs[i] * quotient[d];
    }

    Rational denominator = 1;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) denominator *= xs[i] - xs[j];
    }
    const Rational scale = points[i].y / denominator;
    for (std::size_t d = 0; d < n; ++d) result[d] += scale * quotient[d];
  }
  return Polynomial(std::move(result));
}

}  // namespace lagpar
