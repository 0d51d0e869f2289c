#pragma once

// Small dense matrices of jets. Only what the geometry code needs:
// storage, value extraction and a pivoted Gauss-Jordan inverse.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gabm/errors.hpp"
#include "gabm/jet.hpp"

namespace gabm {

class JetMatrix {
 public:
  JetMatrix() = default;
  explicit JetMatrix(int n) : n_(n), a_(static_cast<std::size_t>(n) * n, Jet(0.0)) {}

  int dim() const noexcept { return n_; }
  Jet& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * n_ + j]; }
  const Jet& operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * n_ + j]; }

  Eigen::MatrixXd values() const {
    Eigen::MatrixXd m(n_, n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) m(i, j) = (*this)(i, j).value();
    return m;
  }

 private:
  int n_ = 0;
  std::vector<Jet> a_;
};

/// Gauss-Jordan with partial pivoting on the base values.
inline JetMatrix inverse(const JetMatrix& m) {
  const int n = m.dim();
  JetMatrix a = m;
  JetMatrix inv(n);
  for (int i = 0; i < n; ++i) inv(i, i) = Jet(1.0);

  double scale = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) scale = std::max(scale, std::abs(m(i, j).value()));

  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a(r, col).value()) > std::abs(a(piv, col).value())) piv = r;
    if (!(std::abs(a(piv, col).value()) > 1e-14 * scale)) throw DomainError("singular matrix");
    if (piv != col)
      for (int j = 0; j < n; ++j) {
        std::swap(a(piv, j), a(col, j));
        std::swap(inv(piv, j), inv(col, j));
      }
    const Jet p = reciprocal(a(col, col));
    for (int j = 0; j < n; ++j) {
      a(col, j) = a(col, j) * p;
      inv(col, j) = inv(col, j) * p;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const Jet f = a(r, col);
      if (f.is_constant() && f.value() == 0.0) continue;
      for (int j = 0; j < n; ++j) {
        a(r, j) -= f * a(col, j);
        inv(r, j) -= f * inv(col, j);
      }
    }
  }
  return inv;
}

}  // namespace gabm
