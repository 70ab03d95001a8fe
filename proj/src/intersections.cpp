#include "padicso/intersections.hpp"

#include <algorithm>
#include <cstdint>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "padicso/decompose.hpp"

namespace padicso {

namespace {

void require_dim(const Mat& g, int n) {
  if (n < 1 || g.dim() != 2 * n + 1)
    throw PreconditionViolated("matrix dimension disagrees with the rank");
}

// Block of a 1-based coordinate under the (r, 2(n-r)+1, r) split.
int levi_block(int idx, int n, int r) {
  if (idx <= r) return 0;
  if (idx <= 2 * n + 1 - r) return 1;
  return 2;
}

int append_axiom(Derivation& d, const std::string& label,
                 const std::string& how, const ValBand& band,
                 std::int64_t residue = 0, int res_depth = 0) {
  DerivationStep st;
  st.label = label;
  st.how = how;
  st.band = band;
  st.residue = residue;
  st.res_depth = res_depth;
  d.steps.push_back(std::move(st));
  return static_cast<int>(d.steps.size()) - 1;
}

std::string entry_label(const char* prefix, int i, int j,
                        const char* suffix = "") {
  std::ostringstream os;
  os << prefix << "[" << i << "," << j << "]" << suffix;
  return os.str();
}

// ---------------------------------------------------------------------------
// Scalar solvers for the depth-zero central sweep.

// Square root of a unit congruent to 1 mod p^2, by the usual averaging
// iteration.  The residual is formed with raw subtraction: driving it into
// the certainty floor is the success condition, not a precision accident.
PadicScalar sqrt_near_one(const PadicScalar& x) {
  const PrecisionContext& ctx = x.ctx();
  const PadicScalar half = inv(PadicScalar::from_int(ctx, 2));
  PadicScalar w = PadicScalar::one(ctx);
  for (int iter = 0; iter < 64; ++iter) {
    if (detail::sub_raw(w * w, x).is_zero_class()) return w;
    w = (w + x / w) * half;
  }
  throw HenselFailure("square root iteration did not converge");
}

// Integral root of  vlow - 2 zeta vc - zeta^2 vt = 0  with vc a unit.  When
// vlow or vt is below unit level the linearization dominates and a Newton
// run from vlow / (2 vc) converges; when all three are units the caller's
// loop invariant guarantees the discriminant vc^2 + vt vlow is congruent to
// 1 mod p^2, hence a square, and the root is explicit.
PadicScalar clear_quadratic(const PadicScalar& vlow, const PadicScalar& vc,
                            const PadicScalar& vt) {
  const PrecisionContext& ctx = vlow.ctx();
  const PadicScalar two = PadicScalar::from_int(ctx, 2);
  if (vlow.is_zero_class()) return PadicScalar::zero(ctx);
  if (!vlow.is_unit() || !vt.is_unit()) {
    PadicScalar zeta = vlow / (two * vc);
    for (int iter = 0; iter < 64; ++iter) {
      const PadicScalar f = detail::sub_raw(
          detail::sub_raw(vlow, two * zeta * vc), zeta * zeta * vt);
      if (f.is_zero_class()) return zeta;
      const PadicScalar fp = -(two * vc) - two * zeta * vt;
      zeta = detail::sub_raw(zeta, f / fp);
    }
    throw HenselFailure("central sweep quadratic did not converge");
  }
  const PadicScalar w = sqrt_near_one(vc * vc + vt * vlow);
  return (w - vc) / vt;
}

// ---------------------------------------------------------------------------
// Central sweep at depth zero.  decompose_K0 needs a positive level, so the
// level-zero middle factor is handled here: the element is written as an
// ordered product of one-parameter root elements times a remainder fixing
// the central basis vector.  Unlike the positive-level sweep, the column
// can be in completely general position, so each slot is cleared by the
// cheapest move available: a linear cross-axis move when another uncleared
// coordinate is a unit, and a short-root move against the center otherwise.
// The orthogonality relation 2 vc^2 + 2 sum_s v_s v_{s*} = 2 satisfied by
// the central column guarantees at every stage that either a unit helper
// exists, or the center (after at most one boost move from the current
// axis) is a unit and the short-root quadratic has an integral root.

struct SweepResult {
  std::vector<RootFactor> moves;  // input = product of x_root(param) * rest
  Mat rest;

  explicit SweepResult(const Mat& m0) : rest(m0) {}
};

void sweep_move(SweepResult& out, int np, const Root& alpha,
                const PadicScalar& zeta) {
  out.moves.push_back({alpha, zeta});
  // Invariant: input = (product of recorded moves) * rest.  Appending the
  // factor f multiplies rest by f^-1 on the left; raw products keep honest
  // floors on the entries the move was chosen to cancel.
  out.rest = mul_raw(x_elt(out.rest.ctx(), np, alpha, -zeta), out.rest);
}

SweepResult level0_sweep(const Mat& h, int np) {
  const PrecisionContext& ctx = h.ctx();
  const int c = np + 1;
  const PadicScalar one = PadicScalar::one(ctx);
  const PadicScalar two = PadicScalar::from_int(ctx, 2);
  SweepResult out(h);
  auto vat = [&](int x) { return out.rest.at(x, c); };

  for (int t = 1; t <= np; ++t) {
    const int ts = 2 * np + 2 - t;

    // Clear the lower slot of the pair, v_{t*}.
    if (!vat(ts).is_zero_class()) {
      int helper = 0;
      bool helper_low = false;
      for (int u = t + 1; u <= np; ++u) {
        if (vat(2 * np + 2 - u).is_unit()) {
          helper = u;
          helper_low = true;
          break;
        }
        if (vat(u).is_unit()) {
          helper = u;
          helper_low = false;
          break;
        }
      }
      if (helper != 0 && helper_low) {
        // x_{e_u - e_t}: adds zeta * v_{u*} to v_{t*}.
        sweep_move(out, np, Root::diff(helper, t, np),
                   -vat(ts) / vat(2 * np + 2 - helper));
      } else if (helper != 0) {
        // x_{-(e_t + e_u)}: adds zeta * v_u to v_{t*}.
        sweep_move(out, np, Root::sum(t, helper, np).negated(),
                   -vat(ts) / vat(helper));
      } else {
        if (!vat(c).is_unit()) {
          // No unit helper and a non-unit center force v_t to be a unit,
          // so one move against it boosts the center to exactly 1.
          sweep_move(out, np, Root::short_root(t, np).negated(),
                     (one - vat(c)) / vat(t));
        }
        // x_{-e_t}: adds -2 zeta vc - zeta^2 v_t to v_{t*}.
        sweep_move(out, np, Root::short_root(t, np).negated(),
                   clear_quadratic(vat(ts), vat(c), vat(t)));
      }
    }

    // Clear the upper slot v_t.  The partner slot is already deep, so the
    // short-root move against the center is linear and leaves the center
    // untouched; the center is a unit whenever no helper is.
    if (!vat(t).is_zero_class()) {
      int helper = 0;
      bool helper_low = false;
      for (int u = t + 1; u <= np; ++u) {
        if (vat(u).is_unit()) {
          helper = u;
          helper_low = false;
          break;
        }
        if (vat(2 * np + 2 - u).is_unit()) {
          helper = u;
          helper_low = true;
          break;
        }
      }
      if (helper != 0 && !helper_low) {
        // x_{e_t - e_u}: subtracts zeta * v_u from v_t.
        sweep_move(out, np, Root::diff(t, helper, np), vat(t) / vat(helper));
      } else if (helper != 0) {
        // x_{e_t + e_u}: subtracts zeta * v_{u*} from v_t.
        sweep_move(out, np, Root::sum(t, helper, np),
                   vat(t) / vat(2 * np + 2 - helper));
      } else {
        // x_{e_t}: adds 2 zeta vc - zeta^2 v_{t*} to v_t.
        sweep_move(out, np, Root::short_root(t, np),
                   -vat(t) / (two * vat(c)));
      }
    }
  }

  // Every off-center slot is deep, so the center is +-1 up to the floor.
  const PadicScalar vc = vat(c);
  if (vc.is_zero_class() || !vc.is_unit())
    throw FinalScalarNotOne("central sweep left a non-unit center");
  const std::uint64_t res = vc.unit_residue(1);
  if (res == static_cast<std::uint64_t>(ctx.p()) - 1) {
    // The short Weyl triple on the first axis turns -e_c into +e_c while
    // keeping the cleared pair deep.
    sweep_move(out, np, Root::short_root(1, np), one);
    sweep_move(out, np, Root::short_root(1, np).negated(), -one);
    sweep_move(out, np, Root::short_root(1, np), one);
  } else if (res != 1) {
    throw FinalScalarNotOne("central sweep center is not congruent to +-1");
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Level bookkeeping.

CosetRep IntersectionSpec::rep() const {
  CosetRep out;
  out.r = r;
  out.i = i;
  out.twist = false;
  out.side = side;
  return out;
}

std::string IntersectionSpec::str() const {
  std::ostringstream os;
  os << coset_side_str(side) << " r=" << r << " n=" << n << " m=" << m
     << " i=" << i << " gl=" << gl_level << " so=" << so_level;
  return os.str();
}

IntersectionSpec intersection_group_spec(int r, int n, int m, int i,
                                         CosetSide side) {
  if (n < 1 || r < 1 || r > n)
    throw PreconditionViolated("axis out of range for the parabolic");
  if (m < 0) throw PreconditionViolated("level must be nonnegative");
  const int e = m % 2;
  const int l = m / 2;
  IntersectionSpec sp;
  sp.r = r;
  sp.n = n;
  sp.m = m;
  sp.i = i;
  sp.side = side;
  if (side == CosetSide::Bar) {
    if (i < 0 || i > l)
      throw PreconditionViolated(
          "exponent outside the lower-side enumeration");
    sp.gl_level = l - i;
    sp.so_level = e + 2 * i;
  } else {
    if (i < e || i > e + l)
      throw PreconditionViolated(
          "exponent outside the upper-side enumeration");
    sp.gl_level = (l + e) - i;
    sp.so_level = 2 * i - e;
  }
  return sp;
}

// ---------------------------------------------------------------------------
// Block plumbing.

Mat gl_dual_block(const Mat& a) {
  const int r = a.dim();
  const Mat ai = inverse_general(a);
  Mat d(a.ctx(), r);
  for (int p = 1; p <= r; ++p)
    for (int q = 1; q <= r; ++q) d.at(p, q) = ai.at(r + 1 - q, r + 1 - p);
  return d;
}

Mat levi_element(const Mat& a, const Mat& h, int n) {
  const int r = a.dim();
  if (r < 1 || r > n)
    throw PreconditionViolated("upper block rank out of range");
  if (h.dim() != 2 * (n - r) + 1)
    throw PreconditionViolated("middle block dimension disagrees with n - r");
  const int d = 2 * n + 1;
  Mat g = Mat::identity(a.ctx(), d);
  const Mat dual = gl_dual_block(a);
  for (int p = 1; p <= r; ++p)
    for (int q = 1; q <= r; ++q) {
      g.at(p, q) = a.at(p, q);
      g.at(d - r + p, d - r + q) = dual.at(p, q);
    }
  for (int p = 1; p <= h.dim(); ++p)
    for (int q = 1; q <= h.dim(); ++q) g.at(r + p, r + q) = h.at(p, q);
  return g;
}

Mat gl_block(const Mat& g, int n, int r) {
  require_dim(g, n);
  if (r < 1 || r > n) throw PreconditionViolated("block rank out of range");
  Mat a(g.ctx(), r);
  for (int p = 1; p <= r; ++p)
    for (int q = 1; q <= r; ++q) a.at(p, q) = g.at(p, q);
  return a;
}

Mat middle_block(const Mat& g, int n, int r) {
  require_dim(g, n);
  if (r < 1 || r > n) throw PreconditionViolated("block rank out of range");
  const int dm = 2 * (n - r) + 1;
  Mat h(g.ctx(), dm);
  for (int p = 1; p <= dm; ++p)
    for (int q = 1; q <= dm; ++q) h.at(p, q) = g.at(r + p, r + q);
  return h;
}

// ---------------------------------------------------------------------------
// Membership.

namespace {

// Violations of the block shape shared by every element of the product
// group: off-block entries, the duality between the two corner blocks, and
// the middle factor's own level membership.  The top-left congruence
// pattern is checked separately so the obstruction scope can reuse this.
std::vector<MembershipViolation> shape_violations(const Mat& g,
                                                  const IntersectionSpec& sp) {
  std::vector<MembershipViolation> out;
  const int n = sp.n;
  const int r = sp.r;
  const int d = 2 * n + 1;

  for (int i = 1; i <= d; ++i)
    for (int j = 1; j <= d; ++j)
      if (levi_block(i, n, r) != levi_block(j, n, r) &&
          !g.at(i, j).is_zero_class())
        out.push_back({i, j, 0, "entry outside the diagonal blocks"});

  const Mat a = gl_block(g, n, r);
  const std::int64_t cap =
      2 * std::min<std::int64_t>(0, g.min_val_lower_bound());
  try {
    const Mat dual = gl_dual_block(a);
    for (int p = 1; p <= r; ++p)
      for (int q = 1; q <= r; ++q)
        if (!equal_within_guard(g.at(d - r + p, d - r + q), dual.at(p, q),
                                cap))
          out.push_back({d - r + p, d - r + q, 0,
                         "bottom corner is not the dual of the top corner"});
  } catch (const Error&) {
    out.push_back({0, 0, 0, "top corner block is not invertible"});
  }

  if (r < n) {
    const MembershipReport mid =
        check_K0(middle_block(g, n, r), n - r, sp.so_level);
    for (const MembershipViolation& v : mid.violations) {
      if (v.i == 0 && v.j == 0)
        out.push_back({0, 0, 0, "middle block: " + v.what});
      else
        out.push_back({v.i + r, v.j + r, v.need, v.what});
    }
  } else if (!equal_within_guard(g.at(n + 1, n + 1),
                                 PadicScalar::one(g.ctx()), cap)) {
    out.push_back({n + 1, n + 1, 0, "center entry must be 1"});
  }
  return out;
}

}  // namespace

MembershipReport check_membership(const Mat& g, const IntersectionSpec& spec) {
  const IntersectionSpec sp =
      intersection_group_spec(spec.r, spec.n, spec.m, spec.i, spec.side);
  require_dim(g, sp.n);

  MembershipReport rep;
  rep.violations = shape_violations(g, sp);
  const MembershipReport gl =
      check_gamma(gl_block(g, sp.n, sp.r), sp.r, sp.gl_level,
                  sp.side == CosetSide::Bar);
  rep.violations.insert(rep.violations.end(), gl.violations.begin(),
                        gl.violations.end());
  rep.member = rep.violations.empty();
  return rep;
}

// ---------------------------------------------------------------------------
// Witness construction.

namespace {

// Witness for the lower-side spec: tokens generating the Levi element are
// listed in product order, each with a left correction u_L solving
//   s^-1 * (u_L * token) * s  in  the level subgroup,
// and the corrections are pushed to the right through the later tokens.
// The corrections come from three exact conjugation identities:
//
//   s^-1 x_{e_u - e_r}(-y/t) x_{e_u}(y) s
//       = x_{e_u - e_r}(-y/t) x_{e_r + e_u}(y t),
//   s^-1 x_{-(e_r + e_u)}(z/t) x_{-e_u}(z) s
//       = x_{-(e_r + e_u)}(z/t) x_{e_r - e_u}(-z t),
//
// with s = x_{e_r}(t), t = pi^i, while the top-left token and any factor
// supported away from the central cross of the middle block conjugate into
// the level subgroup with no correction at all.
Mat bar_witness(const Mat& g, const IntersectionSpec& sp) {
  const PrecisionContext& ctx = g.ctx();
  const int n = sp.n;
  const int r = sp.r;
  const int np = n - r;
  const int d = 2 * n + 1;

  const MembershipReport rep = check_membership(g, sp);
  if (!rep.member)
    throw PreconditionViolated(
        "witness needs an element of the product group; " +
        std::to_string(rep.violations.size()) + " conditions failed");

  const Mat a = gl_block(g, n, r);
  std::vector<Mat> tokens;
  std::vector<Mat> lefts;
  const Mat id_big = Mat::identity(ctx, d);
  const PadicScalar pim = PadicScalar::pi_pow(ctx, -sp.i);

  tokens.push_back(levi_element(a, Mat::identity(ctx, 2 * np + 1), n));
  lefts.push_back(id_big);

  auto push_short_pos = [&](int axis, const PadicScalar& y) {
    tokens.push_back(x_elt(ctx, n, Root::short_root(r + axis, n), y));
    lefts.push_back(x_elt(ctx, n, Root::diff(r + axis, r, n), -(y * pim)));
  };
  auto push_short_neg = [&](int axis, const PadicScalar& z) {
    tokens.push_back(
        x_elt(ctx, n, Root::short_root(r + axis, n).negated(), z));
    lefts.push_back(
        x_elt(ctx, n, Root::sum(r, r + axis, n).negated(), z * pim));
  };

  if (np >= 1) {
    const Mat h = middle_block(g, n, r);
    if (sp.so_level >= 1) {
      const KDecomposition dec = decompose_K0(h, np, sp.so_level, false);
      for (int t = 1; t <= np; ++t) push_short_pos(t, dec.ys[t - 1]);
      for (int t = 1; t <= np; ++t) push_short_neg(t, dec.zs[t - 1]);
      tokens.push_back(embed_middle(ctx, n, r, dec.h));
      lefts.push_back(id_big);
    } else {
      const SweepResult sweep = level0_sweep(h, np);
      for (const RootFactor& mv : sweep.moves) {
        const std::vector<int> sup = mv.root.support();
        if (sup.size() == 1) {
          const int axis = sup[0];
          if (mv.root.c[static_cast<std::size_t>(axis - 1)] == 1)
            push_short_pos(axis, mv.param);
          else
            push_short_neg(axis, mv.param);
        } else {
          // Long roots supported on middle axes commute with the
          // representative and already satisfy the level pattern.
          Root big = mv.root;
          big.c.assign(static_cast<std::size_t>(n), 0);
          for (int axis : sup)
            big.c[static_cast<std::size_t>(r + axis - 1)] =
                mv.root.c[static_cast<std::size_t>(axis - 1)];
          tokens.push_back(x_elt(ctx, n, big, mv.param));
          lefts.push_back(id_big);
        }
      }
      tokens.push_back(embed_middle(ctx, n, r, sweep.rest));
      lefts.push_back(id_big);
    }
  }

  // The corrections reproduce entries of g that the decomposition solved
  // for, so these products cancel to the certainty floor by design; raw
  // products keep the tripwire out of what is honest full cancellation.
  Mat u = id_big;
  Mat tail = id_big;
  Mat tail_inv = id_big;
  for (int t = static_cast<int>(tokens.size()) - 1; t >= 0; --t) {
    const Mat tok_inv = group_inverse(tokens[t], n);
    if (!is_identity(lefts[t])) {
      const Mat right = mul_raw(mul_raw(tok_inv, lefts[t]), tokens[t]);
      u = mul_raw(mul_raw(mul_raw(tail_inv, right), tail), u);
    }
    tail = mul_raw(tokens[t], tail);
    tail_inv = mul_raw(tail_inv, tok_inv);
  }

  if (!in_parabolic_part(u, n, r, ParabolicPart::Nbar))
    throw WitnessFailed("correction is not in the lower radical");
  const Mat s = rep_matrix(ctx, n, sp.m, sp.rep());
  const Mat si = group_inverse(s, n);
  if (!in_K0(mul_raw(mul_raw(si, mul_raw(g, u)), s), n, sp.m))
    throw WitnessFailed("conjugated product leaves the level subgroup");
  return u;
}

}  // namespace

Mat witness_unipotent(const Mat& g, const IntersectionSpec& spec) {
  const IntersectionSpec sp =
      intersection_group_spec(spec.r, spec.n, spec.m, spec.i, spec.side);
  require_dim(g, sp.n);
  if (sp.side == CosetSide::Bar) return bar_witness(g, sp);

  // Upper side: transfer to the lower side, build the witness there, and
  // conjugate it back.  The transfer conjugator carries the upper-side
  // representative with exponent i to the lower-side one with exponent
  // i - (m mod 2) and normalizes the level subgroup, so membership is
  // equivalent on the two sides.
  const PrecisionContext& ctx = g.ctx();
  const int n = sp.n;
  const Mat v = side_transfer_conjugator(ctx, n, sp.r, sp.m);
  const Mat vi = group_inverse(v, n);
  const IntersectionSpec bar = intersection_group_spec(
      sp.r, sp.n, sp.m, sp.i - sp.m % 2, CosetSide::Bar);
  const Mat ub = bar_witness(conjugate(g, v, vi), bar);
  const Mat u = mul_raw(mul_raw(vi, ub), v);

  if (!in_parabolic_part(u, n, sp.r, ParabolicPart::N))
    throw WitnessFailed("correction is not in the upper radical");
  const Mat s = rep_matrix(ctx, n, sp.m, sp.rep());
  const Mat si = group_inverse(s, n);
  if (!in_K0(mul_raw(mul_raw(si, mul_raw(g, u)), s), n, sp.m))
    throw WitnessFailed("conjugated product leaves the level subgroup");
  return u;
}

// ---------------------------------------------------------------------------
// Obstruction certificates.

namespace {

// The two entry identities behind the certificates, for x = s^-1 (g u) s
// with s = x_{e_r}(pi^i), any block element g = diag(a, h, a*) and any u in
// the lower radical:
//
//   x[j,c] = -2 pi^i a[j,r]                              (j < r)
//   x[r,c] = -2 pi^i (a[r,r]-1) + 2 pi^i (x[c,c]-1) + pi^{2i} x[r*,c]
//
// both exact.  A violation of the top-left congruence pattern therefore
// forces the translated entry into a band strictly above the floor the
// level pattern demands of the central column, and the clash survives in
// residue form whenever the deviation dominates the other two terms, which
// the level inequalities guarantee for every admissible exponent.
Derivation build_obstruction(const Mat& gt, const IntersectionSpec& sp,
                             bool transported, const CosetRep& rep_out) {
  const PrecisionContext& ctx = gt.ctx();
  const std::int64_t p = ctx.p();
  const int n = sp.n;
  const int r = sp.r;
  const int gl = sp.gl_level;
  const int e = sp.m % 2;
  const int l = sp.m / 2;
  const int iB = sp.i;
  const int c = n + 1;
  const int rs = 2 * n + 2 - r;

  const Mat a = gl_block(gt, n, r);
  const std::string origin = transported ? " (after side transfer)" : "";
  const std::string dev_how = transported ? "transport" : "structure";

  Derivation d;
  d.n = n;
  d.m = sp.m;
  d.a = rep_out;
  d.b = rep_out;
  d.separable = true;
  d.note = "congruence obstruction against the exponent-" +
           std::to_string(rep_out.i) + " representative on axis " +
           std::to_string(r) + origin;

  auto certify = [&](const PadicScalar& dev) -> std::pair<std::int64_t, bool> {
    if (dev.has_val_at_least(gl)) return {0, false};
    if (dev.is_zero_class())
      throw PreconditionViolated(
          "deviation is too uncertain to carry a residue certificate");
    return {dev.val(), true};
  };

  for (int j = 1; j < r; ++j) {
    const auto [v, usable] = certify(a.at(j, r));
    if (!usable) continue;
    const std::int64_t rho =
        static_cast<std::int64_t>(a.at(j, r).unit_residue(1));
    append_axiom(d, entry_label("column deviation a", j, r, origin.c_str()),
                 dev_how, ValBand::exactly(v), rho, 1);
    const std::string tr = entry_label("translated entry conj", j, c);
    const int lhs = append_sum_step(d, tr, {0}, {iB}, {p - 2}, p);
    const int rhs = append_axiom(d, tr, "pattern", ValBand::at_least(l));
    d.lhs_step = lhs;
    d.rhs_step = rhs;
    d.contradiction =
        "the translated entry has exact valuation " + std::to_string(v + iB) +
        " but the level pattern needs at least " + std::to_string(l);
    return d;
  }

  const PadicScalar delta =
      detail::sub_raw(a.at(r, r), PadicScalar::one(ctx));
  const auto [v, usable] = certify(delta);
  if (!usable)
    throw NotApplicable(
        "the top-left block satisfies the congruence pattern at this level");
  const std::int64_t rho = static_cast<std::int64_t>(delta.unit_residue(1));
  append_axiom(d, entry_label("corner deviation a", r, r, "-1") + origin,
               dev_how, ValBand::exactly(v), rho, 1);
  append_axiom(d, entry_label("center entry conj", c, c, "-1"), "structure",
               ValBand::at_least(sp.m));
  append_axiom(d, entry_label("lower entry conj", rs, c), "pattern",
               ValBand::at_least(e + l));
  const std::string tr = entry_label("translated entry conj", r, c);
  const int lhs =
      append_sum_step(d, tr, {0, 1, 2}, {iB, iB, 2 * iB}, {p - 2, 2, 1}, p);
  const int rhs = append_axiom(d, tr, "pattern", ValBand::at_least(l));
  d.lhs_step = lhs;
  d.rhs_step = rhs;
  d.contradiction =
      "the translated entry has exact valuation " + std::to_string(v + iB) +
      " with a unit residue, but the level pattern needs at least " +
      std::to_string(l);
  return d;
}

}  // namespace

Derivation obstruction_check(const Mat& g, const IntersectionSpec& spec) {
  const IntersectionSpec sp =
      intersection_group_spec(spec.r, spec.n, spec.m, spec.i, spec.side);
  require_dim(g, sp.n);

  if (check_membership(g, sp).member)
    throw NotApplicable("the element satisfies every membership condition");

  // Transfer the upper side to the lower side; the certificate then speaks
  // about the transferred element against the lower-side representative.
  const bool transported = sp.side == CosetSide::Plain;
  Mat gt = g;
  IntersectionSpec spB = sp;
  if (transported) {
    const Mat v = side_transfer_conjugator(g.ctx(), sp.n, sp.r, sp.m);
    gt = conjugate(g, v, group_inverse(v, sp.n));
    spB = intersection_group_spec(sp.r, sp.n, sp.m, sp.i - sp.m % 2,
                                  CosetSide::Bar);
  }

  // Only a violation of the top-left congruence pattern is certified; any
  // other failure is outside the certificate's scope.
  if (!shape_violations(gt, spB).empty() ||
      !check_gamma(gl_block(gt, spB.n, spB.r), spB.r, 0, true).member)
    throw PreconditionViolated(
        "only the congruence deviation is certified; the element must "
        "otherwise have the product shape");

  Derivation d = build_obstruction(gt, spB, transported, sp.rep());
  if (!replay(d, g.ctx().p()))
    throw WitnessFailed("obstruction certificate failed its own replay");
  return d;
}

// ---------------------------------------------------------------------------
// Samplers.

Mat sample_product_element(const PrecisionContext& ctx,
                           const IntersectionSpec& spec,
                           std::mt19937_64& rng) {
  const IntersectionSpec sp =
      intersection_group_spec(spec.r, spec.n, spec.m, spec.i, spec.side);
  const Mat a = sample_gamma(ctx, sp.r, sp.gl_level,
                             sp.side == CosetSide::Bar, rng);
  const Mat h = sp.r < sp.n
                    ? sample_K0(ctx, sp.n - sp.r, sp.so_level, rng)
                    : Mat::identity(ctx, 1);
  return levi_element(a, h, sp.n);
}

Mat sample_obstructed_element(const PrecisionContext& ctx,
                              const IntersectionSpec& spec,
                              std::mt19937_64& rng, bool column) {
  const IntersectionSpec sp =
      intersection_group_spec(spec.r, spec.n, spec.m, spec.i, spec.side);
  if (sp.gl_level < 1)
    throw PreconditionViolated(
        "no congruence to violate: the top-left level is zero");
  if (column && sp.r < 2)
    throw PreconditionViolated("column damage needs at least two axes");

  // The congruence pattern depends on the side: the lower side constrains
  // the last column, the upper side the last row.  Damage the constrained
  // slot so the element stays integral with unit determinant but misses
  // the congruence by an exactly known valuation.
  const bool primed = sp.side == CosetSide::Bar;
  for (int attempt = 0; attempt < 32; ++attempt) {
    Mat a = sample_gamma(ctx, sp.r, sp.gl_level, primed, rng);
    const std::int64_t v =
        static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(
                                             sp.gl_level));
    if (column) {
      const int j = 1 + static_cast<int>(
                            rng() % static_cast<std::uint64_t>(sp.r - 1));
      const int row = primed ? j : sp.r;
      const int col = primed ? sp.r : j;
      a.at(row, col) = a.at(row, col) + random_unit(ctx, rng).shift(v);
    } else {
      a.at(sp.r, sp.r) =
          a.at(sp.r, sp.r) * (PadicScalar::one(ctx) +
                              random_unit(ctx, rng).shift(v));
    }
    const MembershipReport lvl0 = check_gamma(a, sp.r, 0, primed);
    if (!lvl0.member) continue;  // the damage spoiled invertibility
    const Mat h = sp.r < sp.n
                      ? sample_K0(ctx, sp.n - sp.r, sp.so_level, rng)
                      : Mat::identity(ctx, 1);
    return levi_element(a, h, sp.n);
  }
  throw PreconditionViolated(
      "could not produce an invertible congruence violator");
}

Mat sample_radical(const PrecisionContext& ctx, int n, int r, CosetSide side,
                   std::mt19937_64& rng, int lo, int hi) {
  if (n < 1 || r < 1 || r > n)
    throw PreconditionViolated("axis out of range for the parabolic");
  if (lo > hi) throw PreconditionViolated("empty depth range");

  // Every root of the radical appears once, in a fixed order, with a unit
  // parameter at a random depth from the range; the lower radical for the
  // lower side, its opposite for the upper side.
  std::vector<Root> roots;
  for (int t = 1; t <= r; ++t) roots.push_back(Root::short_root(t, n));
  for (int t = 1; t <= r; ++t)
    for (int u = t + 1; u <= n; ++u) roots.push_back(Root::sum(t, u, n));
  for (int t = 1; t <= r; ++t)
    for (int u = r + 1; u <= n; ++u) roots.push_back(Root::diff(t, u, n));

  Mat out = Mat::identity(ctx, 2 * n + 1);
  for (const Root& rt : roots) {
    const Root use = side == CosetSide::Bar ? rt.negated() : rt;
    const std::int64_t depth =
        lo + static_cast<std::int64_t>(
                 rng() % static_cast<std::uint64_t>(hi - lo + 1));
    out = out * x_elt(ctx, n, use, random_unit(ctx, rng).shift(depth));
  }
  return out;
}

}  // namespace padicso
