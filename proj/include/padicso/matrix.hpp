#pragma once

// Small dense matrices over the truncated p-adic scalars.  Everything here
// is dimension-agnostic; the orthogonal-group structure (Gram matrix, root
// subgroups, membership patterns) lives in rootdata.hpp and subgroups.hpp.
//
// Sizes stay tiny (at most a few dozen rows), so the implementation favours
// transparency over asymptotics: plain cubic multiplication, Gauss-Jordan
// with minimum-valuation pivoting for the generic inverse.

#include <functional>
#include <vector>

#include "padicso/padic.hpp"

namespace padicso {

using Vec = std::vector<PadicScalar>;

class Mat {
 public:
  Mat(const PrecisionContext& ctx, int d)
      : ctx_(&ctx), d_(d),
        a_(static_cast<std::size_t>(d) * d, PadicScalar::zero(ctx)) {
    if (d < 1) throw PreconditionViolated("matrix dimension must be >= 1");
  }

  static Mat identity(const PrecisionContext& ctx, int d);

  const PrecisionContext& ctx() const { return *ctx_; }
  int dim() const { return d_; }

  // 1-based indexing, matching the usual matrix conventions in the formulas
  // this library implements.
  PadicScalar& at(int i, int j);
  const PadicScalar& at(int i, int j) const;

  Mat operator*(const Mat& rhs) const;
  Mat operator+(const Mat& rhs) const;
  Mat operator-(const Mat& rhs) const;
  Mat scaled(const PadicScalar& c) const;

  Mat transpose() const;

  Vec apply(const Vec& v) const;        // matrix * column vector
  Vec apply_row(const Vec& v) const;    // row vector * matrix

  Vec col(int j) const;
  Vec row(int i) const;

  // Minimum over all entries of the certified valuation lower bound.
  std::int64_t min_val_lower_bound() const;

  std::string str() const;

 private:
  const PrecisionContext* ctx_;
  int d_;
  std::vector<PadicScalar> a_;
};

// Entrywise guard-band equality (see equal_within_guard for scalars); the
// comparison scale of each entry is capped at scale_cap.
bool mats_equal(const Mat& a, const Mat& b, std::int64_t scale_cap = 0);

// Entrywise congruence at an absolute depth.
bool mats_congruent(const Mat& a, const Mat& b, std::int64_t k);

bool is_identity(const Mat& a, std::int64_t scale_cap = 0);

// Determinant and generic inverse by Gaussian elimination with
// minimum-valuation pivoting.  Throws DivisionByZero on a matrix that is
// certainly singular, PrecisionExhausted when singularity cannot be decided
// at the stored precision.
PadicScalar det(const Mat& a);
Mat inverse_general(const Mat& a);

// Product of a list, left to right; empty product is the identity.
Mat product(const PrecisionContext& ctx, int d, const std::vector<Mat>& fs);

// Product and matrix-vector action with the guard tripwire disabled on the
// accumulating additions.  For verification sums and clearing sweeps whose
// deep cancellations are the point; every surviving class still carries its
// honest precision, so the guarded comparisons downstream stay meaningful.
Mat mul_raw(const Mat& a, const Mat& b);
Vec apply_raw(const Mat& a, const Vec& v);

// Conjugation h * g * h^-1 with a caller-supplied inverse (group elements
// usually have a cheap one).
Mat conjugate(const Mat& g, const Mat& h, const Mat& h_inv);

// Bilinear pairing  u^T A v.
PadicScalar pair_with(const Mat& A, const Vec& u, const Vec& v);

PadicScalar dot(const Vec& u, const Vec& v);

}  // namespace padicso
