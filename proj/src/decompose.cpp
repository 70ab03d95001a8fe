#include "padicso/decompose.hpp"

#include <algorithm>
#include <limits>
#include <utility>

#include "padicso/rootdata.hpp"

namespace padicso {

namespace {

std::string first_violation(const MembershipReport& rep) {
  if (rep.violations.empty()) return "";
  return " (" + rep.violations.front().str() + ")";
}

}  // namespace

Mat reassemble(const PrecisionContext& ctx, int n, const KDecomposition& dec) {
  if (static_cast<int>(dec.ys.size()) != n ||
      static_cast<int>(dec.zs.size()) != n)
    throw PreconditionViolated("parameter count does not match the rank");
  std::vector<Mat> fs;
  auto push_pos = [&] {
    for (int t = 1; t <= n; ++t)
      fs.push_back(x_elt(ctx, n, Root::short_root(t, n), dec.ys[t - 1]));
  };
  auto push_neg = [&] {
    for (int t = 1; t <= n; ++t)
      fs.push_back(
          x_elt(ctx, n, Root::short_root(t, n).negated(), dec.zs[t - 1]));
  };
  if (dec.reversed) {
    push_neg();
    push_pos();
  } else {
    push_pos();
    push_neg();
  }
  fs.push_back(dec.h);
  return product(ctx, 2 * n + 1, fs);
}

KDecomposition decompose_K(const Mat& k, int n, int m, bool reversed) {
  const PrecisionContext& ctx = k.ctx();
  if (n < 1) throw PreconditionViolated("rank must be >= 1");
  if (m < 1) throw PreconditionViolated("the sweep needs level >= 1");
  {
    MembershipReport rep = check_K(k, n, m);
    if (!rep.member)
      throw MembershipFailure("input is not in the level-" +
                              std::to_string(m) + " stabilizer" +
                              first_violation(rep));
  }

  if (reversed) {
    // Conjugating by the involutive Weyl block swaps the two short factor
    // families (with a uniform sign and a depth shift on the parameters),
    // so the reversed order reduces to the forward sweep of the conjugate.
    Mat w = w_block(ctx, n, n, m);
    KDecomposition fwd = decompose_K(w * k * w, n, m, false);
    KDecomposition dec(w * fwd.h * w);
    dec.reversed = true;
    const bool flip = (n % 2) != 0;
    for (const PadicScalar& y : fwd.ys)
      dec.zs.push_back(flip ? (-y).shift(m) : y.shift(m));
    for (const PadicScalar& z : fwd.zs)
      dec.ys.push_back(flip ? (-z).shift(-m) : z.shift(-m));
    MembershipReport rep = check_H(dec.h, n, n, m);
    if (!rep.member)
      throw MembershipFailure("reflected remainder left the corner subgroup" +
                              first_violation(rep));
    return dec;
  }

  Mat cur = k;
  const int c = n + 1;
  const PadicScalar two = PadicScalar::from_int(ctx, 2);
  KDecomposition dec(cur);

  // Stage one: cancel the leading central-column coefficients.  Stage t
  // premultiplies by x_{e_t}(-y_t) where y_t solves
  //
  //     a_minus - 2 a0 y - a_plus y^2 = 0
  //
  // against the current column (a_minus above the middle, a0 the middle,
  // a_plus below); dividing by 2 puts this in the quadratic Hensel shape.
  for (int t = 1; t <= n; ++t) {
    const PadicScalar a_minus = cur.at(t, c);
    const PadicScalar a0 = cur.at(c, c);
    const PadicScalar a_plus = cur.at(star(t, n), c);
    if (!a_minus.has_val_at_least(0))
      throw DivisibilityFailure(
          "central-column entry above the middle is not integral");
    if (!a_plus.has_val_at_least(m))
      throw DivisibilityFailure(
          "central-column entry below the middle is shallower than the level");
    const PadicScalar y = hensel_quadratic_root(a_minus / two, a0,
                                                a_plus.shift(-m) / two, m);
    dec.ys.push_back(y);
    cur = mul_raw(x_elt(ctx, n, Root::short_root(t, n), -y), cur);
  }

  // Stage two: cancel the trailing coefficients.  The leading ones are
  // already dead, so the quadratic term of stage t acts on a zero class and
  // the cancellation is linear: z_t = a_plus / (2 a0).
  for (int t = 1; t <= n; ++t) {
    const PadicScalar a_plus = cur.at(star(t, n), c);
    const PadicScalar a0 = cur.at(c, c);
    PadicScalar z = a_plus;  // zero class: cancelled already; keep the depth
    if (!a_plus.is_zero_class()) {
      if (!a_plus.has_val_at_least(m))
        throw DivisibilityFailure(
            "central-column entry below the middle is shallower than the "
            "level");
      z = a_plus / (two * a0);
    }
    dec.zs.push_back(z);
    cur = mul_raw(x_elt(ctx, n, Root::short_root(t, n).negated(), -z), cur);
  }

  if (!equal_within_guard(cur.at(c, c), PadicScalar::one(ctx)))
    throw FinalScalarNotOne(
        "sweep remainder scales the middle vector by something other than 1");
  {
    MembershipReport rep = check_H(cur, n, n, m);
    if (!rep.member)
      throw MembershipFailure("sweep remainder is not in the corner subgroup" +
                              first_violation(rep));
  }
  dec.h = cur;
  return dec;
}

KDecomposition decompose_K0(const Mat& g, int n, int m, bool reversed) {
  const PrecisionContext& ctx = g.ctx();
  if (n < 1) throw PreconditionViolated("rank must be >= 1");
  if (m < 1)
    throw PreconditionViolated(
        "the balanced sweep needs level >= 1 (at level 0 the two subgroups "
        "coincide, use decompose_K once levels exist)");
  {
    MembershipReport rep = check_K0(g, n, m);
    if (!rep.member)
      throw MembershipFailure("input is not in the balanced level-" +
                              std::to_string(m) + " subgroup" +
                              first_violation(rep));
  }

  const int e = m % 2;
  const std::int64_t l = m / 2;
  Mat z = depth_conjugator(ctx, n, m);
  Mat zi = pi_coweight(ctx, n, lambda_coweight(n, n), -l);

  KDecomposition dec = decompose_K(zi * g * z, n, m, reversed);

  // Undo the depth conjugation factor by factor: positive short parameters
  // gain a factor pi^l, negative ones lose it, the corner remainder is
  // carried back whole.
  for (PadicScalar& y : dec.ys) y = y.shift(l);
  for (PadicScalar& zz : dec.zs) zz = zz.shift(-l);
  dec.h = z * dec.h * zi;
  MembershipReport rep = check_H(dec.h, n, n, e);
  if (!rep.member)
    throw MembershipFailure(
        "remainder is not in the corner subgroup at the residual level" +
        first_violation(rep));
  return dec;
}

// ---------------------------------------------------------------------------
// Triangular-times-open factorization.

namespace {

// Build W in the level-e open subgroup of rank k with W u0 = c e_{-k} for a
// unit c, given u0 integral in the leading block and at depth >= e in the
// centre and trailing block, with the scale primitive (some coordinate at
// the floor of its block).
Mat clear_column(const PrecisionContext& ctx, int k, int e, Vec u,
                 PadicScalar* c_out) {
  const int d = 2 * k + 1;
  Mat W = Mat::identity(ctx, d);
  auto premul = [&](const Mat& f) {
    u = apply_raw(f, u);
    W = mul_raw(f, W);
  };

  auto find_unit = [&]() {
    for (int t = 1; t <= k; ++t) {
      const PadicScalar& a = u[static_cast<std::size_t>(t) - 1];
      if (a.is_nonzero() && a.val() == 0) return t;
    }
    return 0;
  };

  int pivot = find_unit();
  if (pivot == 0) {
    // No unit among the leading coordinates: primitivity puts one in the
    // trailing block at depth exactly e, and the displaced reflection on
    // that axis lifts it to the leading block.  (The centre alone cannot
    // carry the floor: isotropy would force 2 c0^2 to cancel against
    // strictly deeper terms.)
    for (int t = 1; t <= k && pivot == 0; ++t) {
      const PadicScalar& q = u[static_cast<std::size_t>(star(t, k)) - 1];
      if (q.is_nonzero() && q.val() == e) {
        premul(w_elt_displaced(ctx, k, Root::short_root(t, k), e));
        pivot = find_unit();
      }
    }
  }
  if (pivot == 0)
    throw PrecisionExhausted(
        "no coordinate of the primitive column is visibly at its floor");
  if (pivot != 1)
    premul(w_elt(ctx, k, Root::diff(1, pivot, k), PadicScalar::one(ctx)));

  const PadicScalar a = u[0];
  for (int t = 2; t <= k; ++t) {
    const PadicScalar& mt = u[static_cast<std::size_t>(t) - 1];
    if (mt.is_zero_class()) continue;
    premul(x_elt(ctx, k, Root::diff(1, t, k).negated(), -(mt / a)));
  }
  const PadicScalar c0 = u[static_cast<std::size_t>(k)];
  if (!c0.is_zero_class()) {
    const PadicScalar y = c0 / a;
    if (!y.has_val_at_least(e))
      throw DivisibilityFailure("centre coordinate is shallower than the level");
    premul(x_elt(ctx, k, Root::short_root(1, k).negated(), y));
  }
  for (int t = 2; t <= k; ++t) {
    const PadicScalar& pt = u[static_cast<std::size_t>(star(t, k)) - 1];
    if (pt.is_zero_class()) continue;
    const PadicScalar y = -(pt / a);
    if (!y.has_val_at_least(e))
      throw DivisibilityFailure(
          "trailing coordinate is shallower than the level");
    premul(x_elt(ctx, k, Root::sum(1, t, k).negated(), y));
  }
  if (!u[static_cast<std::size_t>(d) - 1].is_zero_class())
    throw MembershipFailure(
        "cleared column keeps a visible last coordinate; the input cannot be "
        "isotropic");
  *c_out = u[0];
  return W;
}

std::pair<Mat, Mat> iwasawa_rec(const Mat& g, int k, int e) {
  const PrecisionContext& ctx = g.ctx();
  if (k == 0) {
    if (!equal_within_guard(g.at(1, 1), PadicScalar::one(ctx)))
      throw MembershipFailure("rank-zero block is not the identity");
    return {Mat::identity(ctx, 1), Mat::identity(ctx, 1)};
  }
  const int d = 2 * k + 1;

  // The column to straighten is the preimage of the lowest basis vector.
  Vec u = group_inverse(g, k).col(1);

  // Its primitive scale: the largest power of the uniformizer dividing it
  // inside o^(leading) + p^e (centre + trailing).
  std::int64_t scale = std::numeric_limits<std::int64_t>::max();
  bool seen = false;
  for (int i = 1; i <= d; ++i) {
    const PadicScalar& x = u[static_cast<std::size_t>(i) - 1];
    const std::int64_t adj = (i <= k) ? 0 : e;
    if (x.is_nonzero()) {
      seen = true;
      scale = std::min(scale, x.val() - adj);
    }
  }
  if (!seen)
    throw PrecisionExhausted("column is indistinguishable from zero");
  for (int i = 1; i <= d; ++i) {
    const PadicScalar& x = u[static_cast<std::size_t>(i) - 1];
    const std::int64_t adj = (i <= k) ? 0 : e;
    if (x.is_zero_class() && !x.is_exact_zero() &&
        x.val_lower_bound() < scale + adj)
      throw PrecisionExhausted(
          "a zero-class coordinate could undercut the primitive scale");
  }
  for (PadicScalar& x : u) x = x.shift(-scale);

  PadicScalar c = PadicScalar::one(ctx);
  Mat W = clear_column(ctx, k, e, u, &c);
  Mat g1 = mul_raw(g, group_inverse(W, k));

  // g1 now fixes the lowest line: first column and last row are scalar.
  // Its middle block is a group element of the next rank down.
  Mat A(ctx, d - 2);
  for (int i = 2; i <= d - 1; ++i)
    for (int j = 2; j <= d - 1; ++j) A.at(i - 1, j - 1) = g1.at(i, j);

  std::pair<Mat, Mat> inner = iwasawa_rec(A, k - 1, e);
  Mat a_inv(ctx, d - 2);
  if (k == 1) {
    a_inv.at(1, 1) = inv(A.at(1, 1));
  } else {
    a_inv = group_inverse(A, k - 1);
  }
  Mat P = mul_raw(g1, embed_middle(ctx, k, 1, a_inv));
  Mat b = mul_raw(P, embed_middle(ctx, k, 1, inner.first));
  Mat j = mul_raw(embed_middle(ctx, k, 1, inner.second), W);
  return {b, j};
}

}  // namespace

IwasawaPair iwasawa(const Mat& g, int n, int e) {
  if (n < 1) throw PreconditionViolated("rank must be >= 1");
  if (e != 0 && e != 1)
    throw PreconditionViolated("the level parity must be 0 or 1");
  if (!is_in_group(g, n))
    throw MembershipFailure(
        "input does not preserve the form with determinant one");

  std::pair<Mat, Mat> bj = iwasawa_rec(g, n, e);
  IwasawaPair out{bj.first, bj.second};

  if (!in_parabolic_part(out.b, n, 1, ParabolicPart::B))
    throw MembershipFailure("triangular factor is not upper triangular");
  {
    MembershipReport rep = check_J(out.j, n, e);
    if (!rep.member)
      throw MembershipFailure("open factor left its subgroup" +
                              first_violation(rep));
  }
  const std::int64_t cap =
      2 * std::min<std::int64_t>(
              0, std::min(g.min_val_lower_bound(), out.b.min_val_lower_bound()));
  if (!mats_equal(mul_raw(out.b, out.j), g, cap))
    throw MembershipFailure("factors do not multiply back to the input");
  return out;
}

IwasawaPair iwasawa_bar(const Mat& g, int n, int e) {
  const PrecisionContext& ctx = g.ctx();
  if (n < 1) throw PreconditionViolated("rank must be >= 1");
  if (e != 0 && e != 1)
    throw PreconditionViolated("the level parity must be 0 or 1");
  Mat w = w_block(ctx, n, n, e);
  IwasawaPair pr = iwasawa(w * g, n, e);
  IwasawaPair out{w * pr.b * w, w * pr.j};
  if (!in_parabolic_part(out.b, n, 1, ParabolicPart::Bbar))
    throw MembershipFailure("reflected factor is not lower triangular");
  return out;
}

}  // namespace padicso
