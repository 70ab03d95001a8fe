#pragma once

// Truncated p-adic arithmetic with certified precision tracking.
//
// A value of F = Q_p is represented by its residue class modulo a power of
// the maximal ideal.  Every scalar knows exactly how much of itself is
// determined: a nonzero scalar stores an exact valuation v together with the
// unit part modulo p^rel (so the class mod "p-ideal"^(v+rel) is pinned down),
// while a scalar that is indistinguishable from zero stores the largest
// exponent f for which "value lies in p-ideal^f" is certain.  Arithmetic
// propagates these bounds pessimistically and refuses to answer questions the
// stored information cannot decide, raising PrecisionExhausted instead of
// guessing.  This makes every boolean the library ever returns a theorem
// about the rounded inputs rather than a hope.

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace padicso {

// ---------------------------------------------------------------------------
// Error taxonomy.  Every failure mode the library can signal has its own
// type so that callers (and tests) can react to the precise cause.  The kind
// string doubles as the machine-readable tag in CLI reports.

struct Error : std::runtime_error {
  Error(std::string k, const std::string& msg)
      : std::runtime_error(k + ": " + msg), kind(std::move(k)) {}
  std::string kind;
};

struct PrecisionExhausted : Error {
  explicit PrecisionExhausted(const std::string& msg)
      : Error("PrecisionExhausted", msg) {}
};

struct ValuationOverflow : Error {
  explicit ValuationOverflow(const std::string& msg)
      : Error("ValuationOverflow", msg) {}
};

struct DivisionByZero : Error {
  explicit DivisionByZero(const std::string& msg)
      : Error("DivisionByZero", msg) {}
};

struct PreconditionViolated : Error {
  explicit PreconditionViolated(const std::string& msg)
      : Error("PreconditionViolated", msg) {}
};

struct ContextMismatch : Error {
  explicit ContextMismatch(const std::string& msg)
      : Error("ContextMismatch", msg) {}
};

// Raised by the structured decomposition routines (see decompose.hpp) when a
// quantity that the theory says must be a unit, or must reduce to 1, fails to
// do so on the concrete input.
struct HenselFailure : Error {
  explicit HenselFailure(const std::string& msg)
      : Error("HenselFailure", msg) {}
};

struct FinalScalarNotOne : Error {
  explicit FinalScalarNotOne(const std::string& msg)
      : Error("FinalScalarNotOne", msg) {}
};

struct MembershipFailure : Error {
  explicit MembershipFailure(const std::string& msg)
      : Error("MembershipFailure", msg) {}
};

// A coefficient fails the divisibility its slot requires (e.g. a column that
// must vanish to level m carries a shallower entry), so the sweep that would
// consume it cannot be formed.
struct DivisibilityFailure : Error {
  explicit DivisibilityFailure(const std::string& msg)
      : Error("DivisibilityFailure", msg) {}
};

// A constructed conjugating witness failed its final membership check.
struct WitnessFailed : Error {
  explicit WitnessFailed(const std::string& msg)
      : Error("WitnessFailed", msg) {}
};

// The requested derivation does not apply to the given input (e.g. asking
// for an obstruction on an element that is actually a member).
struct NotApplicable : Error {
  explicit NotApplicable(const std::string& msg)
      : Error("NotApplicable", msg) {}
};

struct ReductionStuck : Error {
  explicit ReductionStuck(const std::string& msg)
      : Error("ReductionStuck", msg) {}
};

struct NotSeparable : Error {
  explicit NotSeparable(const std::string& msg)
      : Error("NotSeparable", msg) {}
};

struct ProfileMismatch : Error {
  explicit ProfileMismatch(const std::string& msg)
      : Error("ProfileMismatch", msg) {}
};

struct ParseError : Error {
  explicit ParseError(const std::string& msg) : Error("ParseError", msg) {}
};

// ---------------------------------------------------------------------------
// Valuations.  We use a dedicated sentinel for +infinity (the valuation of an
// exact zero) and keep all finite valuations well inside int64 so that sums
// of a few of them cannot wrap.  Anything leaving the safe window trips
// ValuationOverflow.

inline constexpr std::int64_t val_inf = std::numeric_limits<std::int64_t>::max();
inline constexpr std::int64_t val_limit = std::int64_t{1} << 62;

std::int64_t checked_val_add(std::int64_t a, std::int64_t b);

// ---------------------------------------------------------------------------
// PrecisionContext fixes the ambient arithmetic once per run: the odd prime
// p, the working precision N (digits of the unit part that are carried), and
// the guard band.  Two scalars interoperate only if they share a context.
// Equality of group elements is decided modulo p^(N - guard) relative to the
// natural scale of the entries, so `guard` is the number of digits we are
// willing to sacrifice to rounding before declaring a comparison undecidable.

class PrecisionContext {
 public:
  PrecisionContext(std::int64_t p, int N, int guard);

  std::int64_t p() const { return p_; }
  int N() const { return N_; }
  int guard() const { return guard_; }

  // p^k for 0 <= k <= N.  Guaranteed to fit: the constructor enforces
  // p^N < 2^62.
  std::uint64_t pk(int k) const;

  // Modular helpers in the ring Z / p^k.
  std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, int k) const;
  std::uint64_t invmod(std::uint64_t a, int k) const;  // a must be a unit

  bool same(const PrecisionContext& other) const { return this == &other; }

 private:
  std::int64_t p_;
  int N_;
  int guard_;
  std::vector<std::uint64_t> pow_;
};

// ---------------------------------------------------------------------------
// PadicScalar: one residue class of F, plus a record of how much of it is
// known.  Invariants for a nonzero scalar: 1 <= rel <= N, 0 < u < p^rel,
// u not divisible by p.  For a zero-class scalar: u = 0, rel = 0, and v_
// holds the certainty floor f (val >= f is guaranteed; val_inf means the
// value is exactly 0, not merely small).

class PadicScalar {
 public:
  // Exact zero.
  static PadicScalar zero(const PrecisionContext& ctx);

  // "Zero as far as we know": some member of p-ideal^floor.
  static PadicScalar zero_class(const PrecisionContext& ctx, std::int64_t floor);

  static PadicScalar one(const PrecisionContext& ctx);

  // The exact rational integer k, known to full working precision.
  static PadicScalar from_int(const PrecisionContext& ctx, std::int64_t k);

  // unit * uniformizer^v where unit is given mod p^N (must be prime to p).
  static PadicScalar from_unit(const PrecisionContext& ctx, std::uint64_t unit,
                               std::int64_t v = 0);

  // uniformizer^k (exact).
  static PadicScalar pi_pow(const PrecisionContext& ctx, std::int64_t k);

  const PrecisionContext& ctx() const { return *ctx_; }

  bool is_zero_class() const { return zero_; }
  bool is_exact_zero() const { return zero_ && v_ == val_inf; }
  bool is_nonzero() const { return !zero_; }

  // Exact valuation.  Throws PrecisionExhausted on a floored zero class
  // (the valuation of such a value is genuinely undetermined).
  std::int64_t val() const;

  // Largest k with "val >= k" certain.  Never throws.
  std::int64_t val_lower_bound() const { return zero_ ? v_ : v_; }

  // Exponent up to which the residue class is fully determined:
  // v + rel for a nonzero value, the floor for a zero class.
  std::int64_t known_to() const;

  int rel_precision() const { return rel_; }

  // Decidable predicates; throw PrecisionExhausted when the stored
  // information cannot settle the question.
  bool has_val_at_least(std::int64_t k) const;
  bool has_val_exactly(std::int64_t k) const;
  bool is_unit() const { return has_val_exactly(0); }

  // Unit part mod p^k (k <= rel required), and the value itself mod
  // p-ideal^k as a canonical representative in [0, p^k) (requires the class
  // mod p-ideal^k to be determined and integral).
  std::uint64_t unit_residue(int k) const;
  std::uint64_t residue_mod(int k) const;

  PadicScalar operator-() const;
  PadicScalar operator+(const PadicScalar& rhs) const;
  PadicScalar operator-(const PadicScalar& rhs) const;
  PadicScalar operator*(const PadicScalar& rhs) const;
  PadicScalar operator/(const PadicScalar& rhs) const;

  friend PadicScalar inv(const PadicScalar& a);

  // Multiply by uniformizer^k: exact rescaling, never loses digits.
  PadicScalar shift(std::int64_t k) const;

  std::string str() const;

 private:
  PadicScalar(const PrecisionContext& ctx) : ctx_(&ctx) {}

  const PrecisionContext* ctx_ = nullptr;
  bool zero_ = true;
  std::int64_t v_ = val_inf;  // valuation, or certainty floor when zero_
  std::uint64_t u_ = 0;       // unit part, canonical mod p^rel
  int rel_ = 0;

  friend class PadicOps;
};

namespace detail {
// Addition variants that skip the guard tripwire.  Reserved for algorithm
// internals whose results only feed valuation queries (e.g. the residual of
// a Newton iteration, where deep cancellation is the success condition).
PadicScalar add_raw(const PadicScalar& a, const PadicScalar& b);
PadicScalar sub_raw(const PadicScalar& a, const PadicScalar& b);
}  // namespace detail

// Congruence test "a == b mod p-ideal^k" as a theorem about the stored
// classes: returns true/false only when decidable, otherwise throws
// PrecisionExhausted.
bool congruent_mod(const PadicScalar& a, const PadicScalar& b, std::int64_t k);

// Guard-band equality: the two classes agree modulo
// p-ideal^(scale + N - guard) where scale = min(val lower bounds, capped at
// the given ceiling, default 0).  Returns false as soon as a genuine
// discrepancy is visible at any depth; throws only when the inputs carry too
// little information to certify agreement to the guard depth.
bool equal_within_guard(const PadicScalar& a, const PadicScalar& b,
                        std::int64_t scale_cap = 0);

// ---------------------------------------------------------------------------
// Valuation bands: closed intervals [lo, hi] (hi possibly val_inf) carrying
// an exactness bit.  `exact` asserts val == lo.  These are the atoms of the
// distinctness certificates: each certificate is a short chain of band
// combinations whose soundness can be replayed on concrete scalars.

struct ValBand {
  std::int64_t lo = 0;
  std::int64_t hi = val_inf;
  bool exact = false;

  static ValBand exactly(std::int64_t v) { return {v, v, true}; }
  static ValBand at_least(std::int64_t v) { return {v, val_inf, false}; }

  std::string str() const;
};

ValBand band_of(const PadicScalar& a);

// Band of a sum of terms with the given bands.  The minimum lower bound
// always survives; exactness survives exactly when a unique term attains the
// minimal lower bound and that term is exact (no possible cancellation at
// the leading depth).
ValBand combine_sum(const std::vector<ValBand>& terms);

// Band of a product.
ValBand combine_product(const std::vector<ValBand>& terms);

// Does the stored information about `a` stay consistent with `band`?  Used
// when replaying certificates against concrete scalars.
bool band_consistent(const ValBand& band, const PadicScalar& a);

// ---------------------------------------------------------------------------
// Quadratic Hensel solve: the unique root y in the integer ring of
//
//     b_neg + a0 * y - pi^m * b1 * y^2 = 0
//
// given that a0 is congruent to 1 mod p-ideal and the quadratic term is
// subordinate (m + val(b1) + val(b_neg) >= 1).  This is the scalar engine
// behind the row-sweep decompositions: each sweep stage must cancel one
// coefficient exactly, and this equation is the shape every stage reduces
// to.  Throws PreconditionViolated if the hypotheses fail.

PadicScalar hensel_quadratic_root(const PadicScalar& b_neg,
                                  const PadicScalar& a0,
                                  const PadicScalar& b1, std::int64_t m);

}  // namespace padicso
