#pragma once

/**
 * @file jet.hpp
 * @brief Truncated multivariate Taylor arithmetic.
 *
 * A Jet holds the Taylor coefficients of a scalar function of `nvars`
 * variables around a base point, truncated at total degree `order`
 * (1 <= order <= 4). Coefficients are stored densely in graded
 * lexicographic order, so the jet of order p is a prefix of the jet of
 * order q > p over the same variables.
 *
 * Convention: Jet::derivative() and extract() return PARTIAL DERIVATIVES,
 * i.e. the raw Taylor coefficient multiplied by alpha_1! ... alpha_n!.
 * Jet::coefficients() exposes the raw Taylor coefficients.
 *
 * A Jet without a space is a plain constant; it broadcasts against any
 * other jet. Binary operations on jets of different order truncate to the
 * smaller order.
 *
 * @code
 * auto x = gabm::seed(std::vector{3.0}, std::vector{0}, 2);
 * auto f = x[0] * x[0];
 * int d1[] = {1};
 * f.derivative(d1);  // 6.0
 * @endcode
 */

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace gabm {

inline constexpr int kMaxJetOrder = 4;
inline constexpr int kMaxJetVars = 10;

/// Monomial bookkeeping shared by all jets with the same (nvars, order).
class JetSpace {
 public:
  struct Product {
    std::uint32_t lhs, rhs, out;
  };
  struct DerivativeTerm {
    std::uint32_t src, dst;
    double factor;
  };

  /// Cached, thread-safe lookup.
  static std::shared_ptr<const JetSpace> get(int nvars, int order);

  JetSpace(int nvars, int order);

  int nvars() const noexcept { return nvars_; }
  int order() const noexcept { return order_; }
  std::size_t size() const noexcept { return degree_.size(); }

  /// Number of monomials of total degree <= d.
  std::size_t prefix_size(int d) const;
  int degree(std::size_t idx) const { return degree_[idx]; }
  std::span<const std::uint8_t> exponents(std::size_t idx) const {
    return {exps_.data() + idx * static_cast<std::size_t>(nvars_), static_cast<std::size_t>(nvars_)};
  }
  /// Product of factorials of the exponents of monomial idx.
  double factorial_weight(std::size_t idx) const { return fact_[idx]; }

  /// Index of a monomial; returns size() if its degree exceeds order().
  std::size_t index_of(std::span<const std::uint8_t> exps) const;
  std::size_t index_of(std::span<const int> exps) const;

  std::span<const Product> products() const { return products_; }
  /// Terms of d/dx_var mapping this space onto (nvars, order - 1).
  std::span<const DerivativeTerm> derivative_terms(int var) const { return deriv_[var]; }

 private:
  int nvars_;
  int order_;
  std::vector<std::uint8_t> exps_;
  std::vector<int> degree_;
  std::vector<double> fact_;
  std::vector<Product> products_;
  std::vector<std::vector<DerivativeTerm>> deriv_;
  std::vector<std::size_t> prefix_;
};

using JetSpacePtr = std::shared_ptr<const JetSpace>;

class Jet {
 public:
  Jet() : Jet(0.0) {}
  Jet(double value) : c_{value} {}  // NOLINT(google-explicit-constructor): constants broadcast
  Jet(JetSpacePtr space, std::vector<double> coeffs);

  static Jet constant(JetSpacePtr space, double value);
  static Jet variable(JetSpacePtr space, int var, double value);

  double value() const noexcept { return c_[0]; }
  bool is_constant() const noexcept { return !space_; }
  int nvars() const noexcept;
  int order() const noexcept;
  const JetSpacePtr& space() const noexcept { return space_; }
  std::span<const double> coefficients() const noexcept { return c_; }

  /// Partial derivative of the given multi-degree (see file comment).
  double derivative(std::span<const int> multidegree) const;
  /// d/dx_var as a jet of order() - 1.
  Jet partial(int var) const;
  /// Prefix truncation; no-op if order >= order().
  Jet truncated(int order) const;

  Jet operator-() const;
  Jet& operator+=(const Jet& rhs);
  Jet& operator-=(const Jet& rhs);
  Jet& operator*=(const Jet& rhs);
  Jet& operator/=(const Jet& rhs);

  friend Jet operator+(Jet lhs, const Jet& rhs) { return lhs += rhs; }
  friend Jet operator-(Jet lhs, const Jet& rhs) { return lhs -= rhs; }
  friend Jet operator*(const Jet& lhs, const Jet& rhs);
  friend Jet operator/(const Jet& lhs, const Jet& rhs);

 private:
  JetSpacePtr space_;
  std::vector<double> c_;
};

/// One jet per value; values[active[k]] becomes variable k. Other entries
/// are returned as plain constants. All variable jets share one space with
/// nvars = active.size().
std::vector<Jet> seed(std::span<const double> values, std::span<const int> active, int order);

/// Partial derivative of multi-degree `multidegree` (length nvars).
double extract(const Jet& j, std::span<const int> multidegree);

/// f(arg) where taylor[k] = f^(k)(arg.value()) / k!. Needs taylor.size() > order.
Jet compose(const Jet& arg, std::span<const double> taylor);

/// Keep variables `keep` (renumbered 0..keep.size()-1); all other
/// variables are frozen at their base value.
Jet restrict_vars(const Jet& j, std::span<const int> keep);

/// Re-index variable v of j as variable map[v] of `target`. Coefficients of
/// degree above j.order() are zero-filled, so only results truncated back
/// to j.order() are meaningful.
Jet embed(const Jet& j, const JetSpacePtr& target, std::span<const int> map);

Jet sqrt(const Jet& a);
Jet exp(const Jet& a);
Jet log(const Jet& a);
Jet sin(const Jet& a);
Jet cos(const Jet& a);
Jet sinh(const Jet& a);
Jet cosh(const Jet& a);
Jet atan(const Jet& a);
Jet atan2(const Jet& y, const Jet& x);
Jet pow(const Jet& a, double p);
Jet square(const Jet& a);
Jet reciprocal(const Jet& a);

// Branching functions have no Taylor expansion at their kinks.
Jet abs(const Jet&) = delete;
Jet fabs(const Jet&) = delete;
Jet max(const Jet&, const Jet&) = delete;
Jet min(const Jet&, const Jet&) = delete;

}  // namespace gabm
