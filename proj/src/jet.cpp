#include "gabm/jet.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <string>
#include <unordered_map>

#include "gabm/errors.hpp"

namespace gabm {

namespace {

constexpr int kExponentBits = 3;  // exponents never exceed kMaxJetOrder < 8

std::uint32_t pack(std::span<const std::uint8_t> e) {
  std::uint32_t key = 0;
  for (std::size_t i = 0; i < e.size(); ++i) key |= static_cast<std::uint32_t>(e[i]) << (kExponentBits * i);
  return key;
}

// All exponent vectors of total degree d in lexicographic-descending order.
void enumerate_degree(int nvars, int d, std::vector<std::uint8_t>& cur, int var,
                      std::vector<std::uint8_t>& out) {
  if (var == nvars - 1) {
    cur[var] = static_cast<std::uint8_t>(d);
    out.insert(out.end(), cur.begin(), cur.end());
    return;
  }
  for (int k = d; k >= 0; --k) {
    cur[var] = static_cast<std::uint8_t>(k);
    enumerate_degree(nvars, d - k, cur, var + 1, out);
  }
}

std::mutex& cache_mutex() {
  static std::mutex m;
  return m;
}

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

// Generalized binomial coefficient C(p, k).
double binomial(double p, int k) {
  double b = 1.0;
  for (int i = 0; i < k; ++i) b *= (p - i) / (i + 1);
  return b;
}

bool is_integer(double p) { return std::floor(p) == p; }

}  // namespace

// ---------------------------------------------------------------------------
// JetSpace
// ---------------------------------------------------------------------------

JetSpace::JetSpace(int nvars, int order) : nvars_(nvars), order_(order) {
  if (nvars < 1 || nvars > kMaxJetVars) throw InvalidInput("jet: nvars out of range: " + std::to_string(nvars));
  if (order < 0 || order > kMaxJetOrder) throw InvalidInput("jet: order out of range: " + std::to_string(order));

  std::vector<std::uint8_t> cur(static_cast<std::size_t>(nvars), 0);
  prefix_.push_back(0);
  for (int d = 0; d <= order; ++d) {
    enumerate_degree(nvars, d, cur, 0, exps_);
    prefix_.push_back(exps_.size() / static_cast<std::size_t>(nvars));
  }
  const std::size_t n = exps_.size() / static_cast<std::size_t>(nvars);
  degree_.resize(n);
  fact_.resize(n);

  std::unordered_map<std::uint32_t, std::uint32_t> lookup;
  lookup.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto e = exponents(i);
    int d = 0;
    double f = 1.0;
    for (auto v : e) {
      d += v;
      f *= factorial(v);
    }
    degree_[i] = d;
    fact_[i] = f;
    lookup.emplace(pack(e), static_cast<std::uint32_t>(i));
  }

  std::vector<std::uint8_t> sum(static_cast<std::size_t>(nvars));
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (degree_[a] + degree_[b] > order) continue;
      auto ea = exponents(a);
      auto eb = exponents(b);
      for (int v = 0; v < nvars; ++v) sum[v] = static_cast<std::uint8_t>(ea[v] + eb[v]);
      products_.push_back({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b), lookup.at(pack(sum))});
    }
  }

  deriv_.resize(static_cast<std::size_t>(nvars));
  if (order > 0) {
    for (int v = 0; v < nvars; ++v) {
      for (std::size_t i = 0; i < n; ++i) {
        auto e = exponents(i);
        if (e[v] == 0) continue;
        std::vector<std::uint8_t> lowered(e.begin(), e.end());
        --lowered[v];
        deriv_[v].push_back({static_cast<std::uint32_t>(i), lookup.at(pack(lowered)), static_cast<double>(e[v])});
      }
    }
  }
}

std::shared_ptr<const JetSpace> JetSpace::get(int nvars, int order) {
  static std::map<std::pair<int, int>, std::shared_ptr<const JetSpace>> cache;
  std::lock_guard lock(cache_mutex());
  auto key = std::make_pair(nvars, order);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto space = std::make_shared<const JetSpace>(nvars, order);
  cache.emplace(key, space);
  return space;
}

std::size_t JetSpace::prefix_size(int d) const {
  d = std::clamp(d, -1, order_);
  return prefix_[static_cast<std::size_t>(d + 1)];
}

std::size_t JetSpace::index_of(std::span<const std::uint8_t> exps) const {
  int d = 0;
  for (auto v : exps) d += v;
  if (d > order_) return size();
  // Linear scan within the degree block; blocks are tiny.
  for (std::size_t i = prefix_size(d - 1); i < prefix_size(d); ++i) {
    auto e = exponents(i);
    if (std::equal(e.begin(), e.end(), exps.begin())) return i;
  }
  return size();
}

std::size_t JetSpace::index_of(std::span<const int> exps) const {
  std::vector<std::uint8_t> e(exps.size());
  for (std::size_t i = 0; i < exps.size(); ++i) {
    if (exps[i] < 0 || exps[i] > kMaxJetOrder) return size();
    e[i] = static_cast<std::uint8_t>(exps[i]);
  }
  return index_of(std::span<const std::uint8_t>(e));
}

// ---------------------------------------------------------------------------
// Jet
// ---------------------------------------------------------------------------

Jet::Jet(JetSpacePtr space, std::vector<double> coeffs) : space_(std::move(space)), c_(std::move(coeffs)) {
  if (space_ && c_.size() != space_->size()) throw InvalidInput("jet: coefficient count does not match space");
  if (!space_ && c_.size() != 1) throw InvalidInput("jet: constant jet needs exactly one coefficient");
}

Jet Jet::constant(JetSpacePtr space, double value) {
  std::vector<double> c(space->size(), 0.0);
  c[0] = value;
  return {std::move(space), std::move(c)};
}

Jet Jet::variable(JetSpacePtr space, int var, double value) {
  if (var < 0 || var >= space->nvars()) throw InvalidInput("jet: variable index out of range");
  Jet j = constant(space, value);
  if (space->order() >= 1) j.c_[1 + static_cast<std::size_t>(var)] = 1.0;
  return j;
}

int Jet::nvars() const noexcept { return space_ ? space_->nvars() : 0; }
int Jet::order() const noexcept { return space_ ? space_->order() : 0; }

double Jet::derivative(std::span<const int> multidegree) const {
  if (!space_) {
    bool zero = std::all_of(multidegree.begin(), multidegree.end(), [](int k) { return k == 0; });
    return zero ? c_[0] : 0.0;
  }
  if (multidegree.size() != static_cast<std::size_t>(space_->nvars()))
    throw InvalidInput("jet: multidegree length does not match nvars");
  int d = 0;
  for (int k : multidegree) {
    if (k < 0) throw InvalidInput("jet: negative multidegree entry");
    d += k;
  }
  if (d > space_->order())
    throw InvalidInput("jet: derivative degree " + std::to_string(d) + " exceeds order " +
                       std::to_string(space_->order()));
  auto idx = space_->index_of(multidegree);
  return c_[idx] * space_->factorial_weight(idx);
}

Jet Jet::partial(int var) const {
  if (!space_) return Jet(0.0);
  if (var < 0 || var >= space_->nvars()) throw InvalidInput("jet: variable index out of range");
  if (space_->order() == 0) throw InvalidInput("jet: cannot differentiate an order-0 jet");
  auto lower = JetSpace::get(space_->nvars(), space_->order() - 1);
  std::vector<double> out(lower->size(), 0.0);
  for (const auto& t : space_->derivative_terms(var)) out[t.dst] += t.factor * c_[t.src];
  return {std::move(lower), std::move(out)};
}

Jet Jet::truncated(int order) const {
  if (!space_ || order >= space_->order()) return *this;
  if (order < 0) throw InvalidInput("jet: negative truncation order");
  auto lower = JetSpace::get(space_->nvars(), order);
  return {lower, std::vector<double>(c_.begin(), c_.begin() + static_cast<std::ptrdiff_t>(lower->size()))};
}

Jet Jet::operator-() const {
  Jet r = *this;
  for (auto& v : r.c_) v = -v;
  return r;
}

namespace {

// Truncate both operands to a common space; constants are left alone.
void harmonize(Jet& a, Jet& b) {
  if (a.is_constant() || b.is_constant()) return;
  if (a.nvars() != b.nvars()) throw InvalidInput("jet: operands have different variable counts");
  if (a.order() > b.order()) a = a.truncated(b.order());
  if (b.order() > a.order()) b = b.truncated(a.order());
}

}  // namespace

Jet& Jet::operator+=(const Jet& rhs) {
  if (rhs.is_constant()) {
    c_[0] += rhs.c_[0];
    return *this;
  }
  if (is_constant()) {
    double v = c_[0];
    *this = rhs;
    c_[0] += v;
    return *this;
  }
  Jet r = rhs;
  harmonize(*this, r);
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += r.c_[i];
  return *this;
}

Jet& Jet::operator-=(const Jet& rhs) { return *this += -rhs; }

Jet& Jet::operator*=(const Jet& rhs) { return *this = *this * rhs; }

Jet& Jet::operator/=(const Jet& rhs) { return *this = *this / rhs; }

Jet operator*(const Jet& lhs, const Jet& rhs) {
  if (lhs.is_constant() && rhs.is_constant()) return Jet(lhs.c_[0] * rhs.c_[0]);
  if (lhs.is_constant() || rhs.is_constant()) {
    const double k = lhs.is_constant() ? lhs.c_[0] : rhs.c_[0];
    Jet r = lhs.is_constant() ? rhs : lhs;
    for (auto& v : r.c_) v *= k;
    return r;
  }
  if (lhs.order() != rhs.order()) {
    Jet a = lhs, b = rhs;
    harmonize(a, b);
    return a * b;
  }
  if (lhs.nvars() != rhs.nvars()) throw InvalidInput("jet: operands have different variable counts");
  std::vector<double> out(lhs.c_.size(), 0.0);
  const double* a = lhs.c_.data();
  const double* b = rhs.c_.data();
  for (const auto& p : lhs.space_->products()) out[p.out] += a[p.lhs] * b[p.rhs];
  return {lhs.space_, std::move(out)};
}

Jet operator/(const Jet& lhs, const Jet& rhs) {
  if (rhs.is_constant()) {
    if (rhs.value() == 0.0) throw DomainError("jet: division by zero-valued jet", {rhs.value()});
    return lhs * Jet(1.0 / rhs.value());
  }
  return lhs * reciprocal(rhs);
}

// ---------------------------------------------------------------------------
// Free functions
// ---------------------------------------------------------------------------

std::vector<Jet> seed(std::span<const double> values, std::span<const int> active, int order) {
  if (order < 1 || order > kMaxJetOrder) throw InvalidInput("seed: order must be in 1..4, got " + std::to_string(order));
  if (active.empty() || active.size() > static_cast<std::size_t>(kMaxJetVars))
    throw InvalidInput("seed: active set size must be in 1..10");
  std::vector<bool> seen(values.size(), false);
  for (int a : active) {
    if (a < 0 || static_cast<std::size_t>(a) >= values.size()) throw InvalidInput("seed: active index out of bounds");
    if (seen[static_cast<std::size_t>(a)]) throw InvalidInput("seed: duplicate active index " + std::to_string(a));
    seen[static_cast<std::size_t>(a)] = true;
  }
  auto space = JetSpace::get(static_cast<int>(active.size()), order);
  std::vector<Jet> out;
  out.reserve(values.size());
  for (double v : values) out.emplace_back(v);
  for (std::size_t k = 0; k < active.size(); ++k) {
    auto idx = static_cast<std::size_t>(active[k]);
    out[idx] = Jet::variable(space, static_cast<int>(k), values[idx]);
  }
  return out;
}

double extract(const Jet& j, std::span<const int> multidegree) { return j.derivative(multidegree); }

Jet compose(const Jet& arg, std::span<const double> taylor) {
  if (arg.is_constant()) return Jet(taylor[0]);
  const int order = arg.order();
  if (taylor.size() <= static_cast<std::size_t>(order)) throw InvalidInput("compose: Taylor series too short");
  std::vector<double> d(arg.coefficients().begin(), arg.coefficients().end());
  d[0] = 0.0;
  const Jet delta(arg.space(), std::move(d));
  Jet result = Jet::constant(arg.space(), taylor[0]);
  Jet power = delta;
  for (int k = 1; k <= order; ++k) {
    if (taylor[static_cast<std::size_t>(k)] != 0.0) result += taylor[static_cast<std::size_t>(k)] * power;
    if (k < order) power = power * delta;
  }
  return result;
}

Jet restrict_vars(const Jet& j, std::span<const int> keep) {
  if (j.is_constant() || keep.empty()) return Jet(j.value());
  const auto& src = *j.space();
  auto dst = JetSpace::get(static_cast<int>(keep.size()), src.order());
  std::vector<int> slot(static_cast<std::size_t>(src.nvars()), -1);
  for (std::size_t k = 0; k < keep.size(); ++k) slot[static_cast<std::size_t>(keep[k])] = static_cast<int>(k);
  std::vector<double> out(dst->size(), 0.0);
  std::vector<std::uint8_t> e(keep.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    auto ex = src.exponents(i);
    bool frozen = false;
    std::fill(e.begin(), e.end(), 0);
    for (std::size_t v = 0; v < ex.size(); ++v) {
      if (ex[v] == 0) continue;
      if (slot[v] < 0) {
        frozen = true;
        break;
      }
      e[static_cast<std::size_t>(slot[v])] = ex[v];
    }
    if (!frozen) out[dst->index_of(std::span<const std::uint8_t>(e))] += j.coefficients()[i];
  }
  return {std::move(dst), std::move(out)};
}

Jet embed(const Jet& j, const JetSpacePtr& target, std::span<const int> map) {
  if (j.is_constant()) return Jet::constant(target, j.value());
  const auto& src = *j.space();
  if (map.size() != static_cast<std::size_t>(src.nvars())) throw InvalidInput("embed: map size must equal nvars");
  std::vector<double> out(target->size(), 0.0);
  std::vector<std::uint8_t> e(static_cast<std::size_t>(target->nvars()));
  const std::size_t n = src.prefix_size(std::min(src.order(), target->order()));
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(e.begin(), e.end(), 0);
    auto ex = src.exponents(i);
    for (std::size_t v = 0; v < ex.size(); ++v) e[static_cast<std::size_t>(map[v])] = ex[v];
    out[target->index_of(std::span<const std::uint8_t>(e))] += j.coefficients()[i];
  }
  return {target, std::move(out)};
}

namespace {

std::vector<double> series(int order) { return std::vector<double>(static_cast<std::size_t>(order) + 1, 0.0); }

}  // namespace

Jet reciprocal(const Jet& a) {
  const double a0 = a.value();
  if (a0 == 0.0) throw DomainError("jet: division by zero-valued jet", {a0});
  auto t = series(a.order());
  double p = 1.0 / a0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    t[k] = (k % 2 == 0 ? p : -p);
    p /= a0;
  }
  return compose(a, t);
}

Jet sqrt(const Jet& a) {
  const double a0 = a.value();
  if (!(a0 > 0.0)) throw DomainError("jet: sqrt of non-positive value " + std::to_string(a0), {a0});
  auto t = series(a.order());
  for (std::size_t k = 0; k < t.size(); ++k)
    t[k] = binomial(0.5, static_cast<int>(k)) * std::pow(a0, 0.5 - static_cast<double>(k));
  return compose(a, t);
}

Jet pow(const Jet& a, double p) {
  const double a0 = a.value();
  auto t = series(a.order());
  if (is_integer(p)) {
    if (a0 == 0.0) {
      if (p < 0) throw DomainError("jet: negative power of zero-valued jet", {a0});
      if (static_cast<std::size_t>(p) < t.size()) t[static_cast<std::size_t>(p)] = 1.0;
      return compose(a, t);
    }
  } else if (!(a0 > 0.0)) {
    throw DomainError("jet: fractional power of non-positive value " + std::to_string(a0), {a0, p});
  }
  for (std::size_t k = 0; k < t.size(); ++k)
    t[k] = binomial(p, static_cast<int>(k)) * std::pow(a0, p - static_cast<double>(k));
  return compose(a, t);
}

Jet square(const Jet& a) { return a * a; }

Jet exp(const Jet& a) {
  auto t = series(a.order());
  const double e = std::exp(a.value());
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = e / factorial(static_cast<int>(k));
  return compose(a, t);
}

Jet log(const Jet& a) {
  const double a0 = a.value();
  if (!(a0 > 0.0)) throw DomainError("jet: log of non-positive value " + std::to_string(a0), {a0});
  auto t = series(a.order());
  t[0] = std::log(a0);
  double p = 1.0;
  for (std::size_t k = 1; k < t.size(); ++k) {
    p /= a0;
    t[k] = (k % 2 == 1 ? p : -p) / static_cast<double>(k);
  }
  return compose(a, t);
}

namespace {

// Derivatives cycle with period four: {f, f', f'', f'''}.
Jet cyclic(const Jet& a, const std::array<double, 4>& cycle) {
  auto t = series(a.order());
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = cycle[k % 4] / factorial(static_cast<int>(k));
  return compose(a, t);
}

// atan(w) for a jet with zero constant term: w - w^3/3 up to order 4.
Jet atan_at_zero(const Jet& w, double base) {
  std::vector<double> t = {base, 1.0, 0.0, -1.0 / 3.0, 0.0};
  t.resize(static_cast<std::size_t>(std::max(w.order(), 0)) + 1);
  return compose(w, t);
}

}  // namespace

Jet sin(const Jet& a) {
  const double s = std::sin(a.value()), c = std::cos(a.value());
  return cyclic(a, {s, c, -s, -c});
}

Jet cos(const Jet& a) {
  const double s = std::sin(a.value()), c = std::cos(a.value());
  return cyclic(a, {c, -s, -c, s});
}

Jet sinh(const Jet& a) {
  const double s = std::sinh(a.value()), c = std::cosh(a.value());
  return cyclic(a, {s, c, s, c});
}

Jet cosh(const Jet& a) {
  const double s = std::sinh(a.value()), c = std::cosh(a.value());
  return cyclic(a, {c, s, c, s});
}

Jet atan(const Jet& a) {
  if (a.is_constant()) return Jet(std::atan(a.value()));
  const double a0 = a.value();
  // atan(a) = atan(a0) + atan((a - a0) / (1 + a a0))
  Jet w = (a - a0) / (1.0 + a * a0);
  return atan_at_zero(w, std::atan(a0));
}

Jet atan2(const Jet& y, const Jet& x) {
  const double y0 = y.value(), x0 = x.value();
  if (x0 == 0.0 && y0 == 0.0) throw DomainError("jet: atan2 at the origin", {y0, x0});
  if (y.is_constant() && x.is_constant()) return Jet(std::atan2(y0, x0));
  // tan(theta - theta0) = (x0 y - y0 x) / (x0 x + y0 y)
  Jet w = (x0 * y - y0 * x) / (x0 * x + y0 * y);
  return atan_at_zero(w, std::atan2(y0, x0));
}

}  // namespace gabm
