#include "padicso/padic.hpp"

#include <algorithm>
#include <sstream>

namespace padicso {

std::int64_t checked_val_add(std::int64_t a, std::int64_t b) {
  if (a == val_inf || b == val_inf) return val_inf;
  __int128 s = static_cast<__int128>(a) + b;
  if (s >= val_limit || s <= -static_cast<__int128>(val_limit))
    throw ValuationOverflow("valuation sum leaves the safe range");
  return static_cast<std::int64_t>(s);
}

namespace {

bool trial_division_prime(std::int64_t p) {
  if (p < 2) return false;
  if (p % 2 == 0) return p == 2;
  for (std::int64_t d = 3; d * d <= p; d += 2)
    if (p % d == 0) return false;
  return true;
}

int valp_u64(std::uint64_t x, std::uint64_t p) {
  int t = 0;
  while (x % p == 0) {
    x /= p;
    ++t;
  }
  return t;
}

void require_same_ctx(const PadicScalar& a, const PadicScalar& b) {
  if (!a.ctx().same(b.ctx()))
    throw ContextMismatch("operands from different precision contexts");
}

}  // namespace

PrecisionContext::PrecisionContext(std::int64_t p, int N, int guard)
    : p_(p), N_(N), guard_(guard) {
  if (p < 3 || p % 2 == 0 || !trial_division_prime(p))
    throw PreconditionViolated("p must be an odd prime >= 3");
  if (N < 1) throw PreconditionViolated("working precision N must be >= 1");
  if (guard < 0 || guard >= N)
    throw PreconditionViolated("guard band must satisfy 0 <= guard < N");
  pow_.resize(static_cast<std::size_t>(N) + 1);
  pow_[0] = 1;
  const std::uint64_t limit = std::uint64_t{1} << 62;
  for (int k = 1; k <= N; ++k) {
    if (pow_[k - 1] > limit / static_cast<std::uint64_t>(p))
      throw PreconditionViolated("p^N must stay below 2^62");
    pow_[k] = pow_[k - 1] * static_cast<std::uint64_t>(p);
  }
}

std::uint64_t PrecisionContext::pk(int k) const {
  if (k < 0 || k > N_)
    throw PreconditionViolated("power index outside [0, N]");
  return pow_[static_cast<std::size_t>(k)];
}

std::uint64_t PrecisionContext::mulmod(std::uint64_t a, std::uint64_t b,
                                       int k) const {
  const std::uint64_t m = pk(k);
  return static_cast<std::uint64_t>(
      (static_cast<unsigned __int128>(a % m) * (b % m)) % m);
}

std::uint64_t PrecisionContext::invmod(std::uint64_t a, int k) const {
  const std::uint64_t m = pk(k);
  a %= m;
  if (a % static_cast<std::uint64_t>(p_) == 0)
    throw PreconditionViolated("invmod of a non-unit");
  // Extended Euclid on (a, m); m is a prime power so the gcd is 1.
  __int128 r0 = static_cast<__int128>(m), r1 = static_cast<__int128>(a);
  __int128 t0 = 0, t1 = 1;
  while (r1 != 0) {
    __int128 q = r0 / r1;
    __int128 r2 = r0 - q * r1;
    r0 = r1;
    r1 = r2;
    __int128 t2 = t0 - q * t1;
    t0 = t1;
    t1 = t2;
  }
  __int128 inv = t0 % static_cast<__int128>(m);
  if (inv < 0) inv += static_cast<__int128>(m);
  return static_cast<std::uint64_t>(inv);
}

// ---------------------------------------------------------------------------
// PadicOps bundles the raw field-level constructions that the public
// interface deliberately hides.  Everything here must re-establish the class
// invariants before returning.

class PadicOps {
 public:
  static PadicScalar make(const PrecisionContext& ctx, std::int64_t v,
                          std::uint64_t u, int rel) {
    // u is a representative of the unit part, meaningful mod p^rel.
    PadicScalar s(ctx);
    s.zero_ = false;
    s.v_ = v;
    s.rel_ = rel;
    s.u_ = u % ctx.pk(rel);
    if (rel < 1 || rel > ctx.N() ||
        s.u_ % static_cast<std::uint64_t>(ctx.p()) == 0)
      throw PreconditionViolated("internal: malformed scalar construction");
    if (v >= val_limit || v <= -val_limit)
      throw ValuationOverflow("valuation outside the safe range");
    return s;
  }

  static PadicScalar add(const PadicScalar& a, const PadicScalar& b,
                         bool enforce_guard) {
    require_same_ctx(a, b);
    const PrecisionContext& ctx = a.ctx();
    if (a.is_exact_zero()) return b;
    if (b.is_exact_zero()) return a;

    const std::int64_t w = std::min(a.val_lower_bound(), b.val_lower_bound());
    const std::int64_t A = std::min(a.known_to(), b.known_to());
    const int k = static_cast<int>(A - w);  // 0 <= k <= N by the invariants

    std::uint64_t D = 0;
    if (k > 0) {
      const std::uint64_t m = ctx.pk(k);
      auto contribution = [&](const PadicScalar& x) -> std::uint64_t {
        if (x.is_zero_class()) return 0;
        const std::int64_t shift = x.v_ - w;
        if (shift >= k) return 0;
        return ctx.mulmod(x.u_, ctx.pk(static_cast<int>(shift)), k);
      };
      D = (contribution(a) + contribution(b)) % m;
    }

    if (D == 0) return PadicScalar::zero_class(ctx, A);

    const int t = valp_u64(D, static_cast<std::uint64_t>(ctx.p()));
    const int rel = k - t;
    if (enforce_guard && rel < ctx.guard())
      throw PrecisionExhausted(
          "cancellation left only " + std::to_string(rel) +
          " certain digits (guard is " + std::to_string(ctx.guard()) + ")");
    return make(ctx, w + t, D / ctx.pk(t), rel);
  }

  static PadicScalar mul(const PadicScalar& a, const PadicScalar& b) {
    require_same_ctx(a, b);
    const PrecisionContext& ctx = a.ctx();
    if (a.is_exact_zero() || b.is_exact_zero()) return PadicScalar::zero(ctx);
    if (a.is_zero_class() || b.is_zero_class()) {
      const std::int64_t f =
          checked_val_add(a.val_lower_bound(), b.val_lower_bound());
      return PadicScalar::zero_class(ctx, f);
    }
    const int rel = std::min(a.rel_, b.rel_);
    return make(ctx, checked_val_add(a.v_, b.v_), ctx.mulmod(a.u_, b.u_, rel),
                rel);
  }

  static PadicScalar inverse(const PadicScalar& a) {
    const PrecisionContext& ctx = a.ctx();
    if (a.is_exact_zero()) throw DivisionByZero("inverse of exact zero");
    if (a.is_zero_class())
      throw PrecisionExhausted(
          "inverse of a value not known to be nonzero (floor " +
          std::to_string(a.v_) + ")");
    return make(ctx, checked_val_add(0, -a.v_), ctx.invmod(a.u_, a.rel_),
                a.rel_);
  }
};

namespace detail {

PadicScalar add_raw(const PadicScalar& a, const PadicScalar& b) {
  return PadicOps::add(a, b, false);
}

PadicScalar sub_raw(const PadicScalar& a, const PadicScalar& b) {
  return PadicOps::add(a, -b, false);
}

}  // namespace detail

// ---------------------------------------------------------------------------

PadicScalar PadicScalar::zero(const PrecisionContext& ctx) {
  PadicScalar s(ctx);
  s.zero_ = true;
  s.v_ = val_inf;
  return s;
}

PadicScalar PadicScalar::zero_class(const PrecisionContext& ctx,
                                    std::int64_t floor) {
  if (floor == val_inf) return zero(ctx);
  if (floor >= val_limit || floor <= -val_limit)
    throw ValuationOverflow("zero-class floor outside the safe range");
  PadicScalar s(ctx);
  s.zero_ = true;
  s.v_ = floor;
  return s;
}

PadicScalar PadicScalar::one(const PrecisionContext& ctx) {
  return from_unit(ctx, 1, 0);
}

PadicScalar PadicScalar::from_int(const PrecisionContext& ctx, std::int64_t k) {
  if (k == 0) return zero(ctx);
  bool negative = k < 0;
  std::uint64_t a = negative ? (~static_cast<std::uint64_t>(k) + 1)
                             : static_cast<std::uint64_t>(k);
  std::int64_t v = 0;
  const std::uint64_t p = static_cast<std::uint64_t>(ctx.p());
  while (a % p == 0) {
    a /= p;
    ++v;
  }
  std::uint64_t u = a % ctx.pk(ctx.N());
  if (negative) u = ctx.pk(ctx.N()) - u;
  return PadicOps::make(ctx, v, u, ctx.N());
}

PadicScalar PadicScalar::from_unit(const PrecisionContext& ctx,
                                   std::uint64_t unit, std::int64_t v) {
  if (unit % static_cast<std::uint64_t>(ctx.p()) == 0)
    throw PreconditionViolated("from_unit requires a unit residue");
  return PadicOps::make(ctx, v, unit, ctx.N());
}

PadicScalar PadicScalar::pi_pow(const PrecisionContext& ctx, std::int64_t k) {
  return from_unit(ctx, 1, k);
}

std::int64_t PadicScalar::val() const {
  if (!zero_) return v_;
  if (v_ == val_inf) return val_inf;
  throw PrecisionExhausted(
      "valuation undetermined: value only known to lie in ideal^" +
      std::to_string(v_));
}

std::int64_t PadicScalar::known_to() const {
  if (zero_) return v_;
  return v_ + rel_;  // v_ is bounded by val_limit and rel_ <= N: no overflow
}

bool PadicScalar::has_val_at_least(std::int64_t k) const {
  if (!zero_) return v_ >= k;
  if (v_ == val_inf || v_ >= k) return true;
  throw PrecisionExhausted("cannot decide val >= " + std::to_string(k) +
                           " for a zero class with floor " +
                           std::to_string(v_));
}

bool PadicScalar::has_val_exactly(std::int64_t k) const {
  if (!zero_) return v_ == k;
  if (v_ == val_inf) return k == val_inf;
  if (k < v_) return false;
  throw PrecisionExhausted("cannot decide val == " + std::to_string(k) +
                           " for a zero class with floor " +
                           std::to_string(v_));
}

std::uint64_t PadicScalar::unit_residue(int k) const {
  if (zero_) throw PreconditionViolated("a zero class has no unit part");
  if (k < 1) throw PreconditionViolated("unit_residue needs k >= 1");
  if (k > rel_)
    throw PrecisionExhausted("unit part only known mod p^" +
                             std::to_string(rel_));
  return u_ % ctx_->pk(k);
}

std::uint64_t PadicScalar::residue_mod(int k) const {
  if (k < 0 || k > ctx_->N())
    throw PreconditionViolated("residue_mod needs 0 <= k <= N");
  if (k == 0) return 0;
  if (zero_) {
    if (v_ >= k) return 0;
    throw PrecisionExhausted("zero class floor " + std::to_string(v_) +
                             " below requested depth " + std::to_string(k));
  }
  if (v_ >= k) return 0;
  if (v_ < 0) throw PreconditionViolated("residue_mod of a non-integral value");
  if (known_to() < k)
    throw PrecisionExhausted("class mod ideal^" + std::to_string(k) +
                             " not determined");
  return ctx_->mulmod(u_, ctx_->pk(static_cast<int>(v_)), k);
}

PadicScalar PadicScalar::operator-() const {
  if (zero_) return *this;
  PadicScalar s(*ctx_);
  s.zero_ = false;
  s.v_ = v_;
  s.rel_ = rel_;
  s.u_ = ctx_->pk(rel_) - u_;
  return s;
}

PadicScalar PadicScalar::operator+(const PadicScalar& rhs) const {
  return PadicOps::add(*this, rhs, true);
}

PadicScalar PadicScalar::operator-(const PadicScalar& rhs) const {
  return PadicOps::add(*this, -rhs, true);
}

PadicScalar PadicScalar::operator*(const PadicScalar& rhs) const {
  return PadicOps::mul(*this, rhs);
}

PadicScalar PadicScalar::operator/(const PadicScalar& rhs) const {
  return PadicOps::mul(*this, PadicOps::inverse(rhs));
}

PadicScalar inv(const PadicScalar& a) { return PadicOps::inverse(a); }

PadicScalar PadicScalar::shift(std::int64_t k) const {
  PadicScalar s(*this);
  if (zero_) {
    if (v_ != val_inf) s.v_ = checked_val_add(v_, k);
    return s;
  }
  s.v_ = checked_val_add(v_, k);
  return s;
}

std::string PadicScalar::str() const {
  std::ostringstream os;
  if (is_exact_zero()) {
    os << "0";
  } else if (zero_) {
    os << "O(pi^" << v_ << ")";
  } else {
    os << "pi^" << v_ << "*(" << u_ << " mod p^" << rel_ << ")";
  }
  return os.str();
}

// ---------------------------------------------------------------------------

bool congruent_mod(const PadicScalar& a, const PadicScalar& b,
                   std::int64_t k) {
  require_same_ctx(a, b);
  const PrecisionContext& ctx = a.ctx();
  const std::int64_t w = std::min(a.val_lower_bound(), b.val_lower_bound());
  if (k <= w) return true;  // both values lie in ideal^k already
  // w is finite here: w = inf would mean both are exact zeros, caught above.
  const std::int64_t m = std::min(a.known_to(), b.known_to());
  const std::int64_t lim = std::min(k, m);
  const int kk = static_cast<int>(lim - w);
  std::uint64_t D = 0;
  if (kk > 0) {
    const std::uint64_t mod = ctx.pk(kk);
    auto contribution = [&](const PadicScalar& x,
                            bool negate) -> std::uint64_t {
      if (x.is_zero_class()) return 0;
      const std::int64_t shift = x.val() - w;
      if (shift >= kk) return 0;
      std::uint64_t c = ctx.mulmod(x.unit_residue(std::min(
                                       x.rel_precision(),
                                       kk - static_cast<int>(shift))),
                                   ctx.pk(static_cast<int>(shift)), kk);
      return negate && c != 0 ? mod - c : c;
    };
    D = (contribution(a, false) + contribution(b, true)) % mod;
  }
  if (D != 0) return false;
  if (k <= m) return true;
  throw PrecisionExhausted(
      "congruence mod ideal^" + std::to_string(k) +
      " undecidable: classes agree to depth " + std::to_string(m) +
      " but are not known further");
}

bool equal_within_guard(const PadicScalar& a, const PadicScalar& b,
                        std::int64_t scale_cap) {
  require_same_ctx(a, b);
  if (a.is_exact_zero() && b.is_exact_zero()) return true;
  std::int64_t s =
      std::min({a.val_lower_bound(), b.val_lower_bound(), scale_cap});
  const std::int64_t k =
      checked_val_add(s, a.ctx().N() - a.ctx().guard());
  return congruent_mod(a, b, k);
}

// ---------------------------------------------------------------------------

std::string ValBand::str() const {
  std::ostringstream os;
  os << "[" << lo << ", ";
  if (hi == val_inf)
    os << "inf";
  else
    os << hi;
  os << "]" << (exact ? " exact" : "");
  return os.str();
}

ValBand band_of(const PadicScalar& a) {
  if (a.is_exact_zero()) return ValBand{val_inf, val_inf, true};
  if (a.is_zero_class()) return ValBand{a.val_lower_bound(), val_inf, false};
  return ValBand::exactly(a.val());
}

ValBand combine_sum(const std::vector<ValBand>& terms) {
  ValBand out{val_inf, val_inf, true};  // empty sum is exactly zero
  if (terms.empty()) return out;
  std::int64_t lo = val_inf, second = val_inf;
  int minimizers = 0;
  const ValBand* leader = nullptr;
  for (const ValBand& t : terms) {
    if (t.lo < lo) {
      second = lo;
      lo = t.lo;
      minimizers = 1;
      leader = &t;
    } else if (t.lo == lo) {
      ++minimizers;
      if (t.lo < second) second = t.lo;
    } else if (t.lo < second) {
      second = t.lo;
    }
  }
  out.lo = lo;
  out.exact = false;
  out.hi = val_inf;
  if (lo == val_inf) {
    out.exact = true;  // every term is exactly zero
    return out;
  }
  if (minimizers == 1 && leader != nullptr) {
    if (leader->exact) {
      out.exact = true;
      out.hi = lo;
    } else if (leader->hi < second) {
      // The leading term cannot be cancelled by the others, so its own
      // upper bound survives.
      out.hi = leader->hi;
    }
  }
  return out;
}

ValBand combine_product(const std::vector<ValBand>& terms) {
  ValBand out{0, 0, true};  // empty product is a unit with valuation 0
  for (const ValBand& t : terms) {
    out.lo = checked_val_add(out.lo, t.lo);
    out.hi = checked_val_add(out.hi, t.hi);
    out.exact = out.exact && t.exact;
  }
  return out;
}

bool band_consistent(const ValBand& band, const PadicScalar& a) {
  if (band.exact) return a.has_val_exactly(band.lo);
  if (!a.has_val_at_least(band.lo)) return false;
  if (band.hi == val_inf) return true;
  if (a.is_exact_zero()) return false;  // val inf exceeds the finite cap
  if (a.is_nonzero()) return a.val() <= band.hi;
  throw PrecisionExhausted("upper valuation bound " + std::to_string(band.hi) +
                           " cannot be checked against a zero class");
}

// ---------------------------------------------------------------------------

PadicScalar hensel_quadratic_root(const PadicScalar& b_neg,
                                  const PadicScalar& a0,
                                  const PadicScalar& b1, std::int64_t m) {
  require_same_ctx(b_neg, a0);
  require_same_ctx(b_neg, b1);
  const PrecisionContext& ctx = b_neg.ctx();
  if (!(a0.is_nonzero() && a0.val() == 0 && a0.unit_residue(1) == 1))
    throw PreconditionViolated("a0 must be congruent to 1 mod the ideal");
  if (!b_neg.has_val_at_least(0) || !b1.has_val_at_least(0) || m < 0)
    throw PreconditionViolated("coefficients must be integral and m >= 0");
  if (b_neg.is_zero_class()) {
    // y = 0 solves the equation to the full extent it is determined.
    return b_neg.is_exact_zero()
               ? PadicScalar::zero(ctx)
               : PadicScalar::zero_class(ctx, b_neg.val_lower_bound());
  }
  if (checked_val_add(m, checked_val_add(b_neg.val_lower_bound(),
                                         b1.val_lower_bound())) < 1)
    throw PreconditionViolated(
        "quadratic term not subordinate: m + val(b1) + val(b_neg) < 1");

  const PadicScalar two = PadicScalar::from_int(ctx, 2);
  const PadicScalar qcoef = b1.shift(m);  // pi^m * b1
  PadicScalar y = PadicScalar::zero(ctx);

  // The integral root has the valuation of the linear term, so its class is
  // pinned once the residual is dead to val(b_neg) + N digits.  The inputs
  // may be known to less than that; then the loop stalls at the depth they
  // do support, and the returned precision is cut back to what the final
  // residual certifies.
  const std::int64_t target = checked_val_add(b_neg.val(), ctx.N());
  std::int64_t best = -val_limit;
  bool converged = false;
  for (int iter = 0; iter < 80 && !converged; ++iter) {
    // Residual and derivative, evaluated without the guard tripwire: deep
    // cancellation in the residual is exactly what convergence looks like.
    const PadicScalar fy = detail::add_raw(
        detail::add_raw(b_neg, a0 * y), -(qcoef * y * y));
    const std::int64_t lower = fy.val_lower_bound();
    if (lower >= target) {
      best = target;
      converged = true;
      break;
    }
    if (lower <= best) {
      converged = true;  // certification cap of the inputs reached
      break;
    }
    best = lower;
    const PadicScalar fpy = detail::add_raw(a0, -(two * qcoef * y));
    y = detail::sub_raw(y, fy / fpy);
  }
  if (!converged)
    throw PreconditionViolated("quadratic solve did not converge");
  const std::int64_t certified = best - y.val();
  if (certified < 1)
    throw PrecisionExhausted(
        "quadratic root cannot be certified to a single digit");
  if (certified < y.rel_precision())
    y = PadicOps::make(ctx, y.val(), y.unit_residue(static_cast<int>(certified)),
                       static_cast<int>(certified));
  return y;
}

}  // namespace padicso
