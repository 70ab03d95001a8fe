#include "padicso/subgroups.hpp"

#include <sstream>

namespace padicso {

namespace {

// Block index of a 1-based position: 0 for the first n rows, 1 for the
// center, 2 for the last n.
int block_of(int n, int i) { return i <= n ? 0 : (i == n + 1 ? 1 : 2); }

void require_shape(const Mat& g, int n, int m) {
  if (n < 1) throw PreconditionViolated("rank must be >= 1");
  if (m < 0) throw PreconditionViolated("level must be >= 0");
  if (g.dim() != 2 * n + 1)
    throw PreconditionViolated("matrix size does not match the rank");
}

}  // namespace

std::string MembershipViolation::str() const {
  std::ostringstream os;
  if (i == 0 && j == 0) return what;
  os << "entry (" << i << "," << j << ") needs valuation >= " << need;
  if (!what.empty()) os << " [" << what << "]";
  return os.str();
}

std::int64_t level_need_J(int n, int m, int i, int j) {
  const std::int64_t mm = m;
  const std::int64_t tab[3][3] = {{0, 0, -mm}, {mm, 0, 0}, {mm, mm, 0}};
  return tab[block_of(n, i)][block_of(n, j)];
}

std::int64_t level_need_J0(int n, int m, int i, int j) {
  const std::int64_t e = m % 2;
  const std::int64_t l = m / 2;
  const std::int64_t tab[3][3] = {
      {0, l, -e}, {e + l, 0, l}, {e, e + l, 0}};
  return tab[block_of(n, i)][block_of(n, j)];
}

namespace {

// Shared engine behind the four pattern checks.  `balanced` selects the
// level pattern; `center_cond` adds the index-two condition (center entry
// congruent to 1 mod the maximal ideal).
MembershipReport check_pattern(const Mat& g, int n, int m, bool balanced,
                               bool center_cond) {
  require_shape(g, n, m);
  MembershipReport rep;

  if (!is_in_group(g, n))
    rep.violations.push_back(
        {0, 0, 0, "does not preserve the form with determinant one"});

  const int d = 2 * n + 1;
  for (int i = 1; i <= d; ++i)
    for (int j = 1; j <= d; ++j) {
      const std::int64_t need = balanced ? level_need_J0(n, m, i, j)
                                         : level_need_J(n, m, i, j);
      if (!g.at(i, j).has_val_at_least(need))
        rep.violations.push_back({i, j, need, ""});
    }

  if (center_cond &&
      !congruent_mod(g.at(n + 1, n + 1), PadicScalar::one(g.ctx()), 1))
    rep.violations.push_back(
        {0, 0, 0, "center entry is not congruent to 1 mod the maximal ideal"});

  rep.member = rep.violations.empty();
  return rep;
}

}  // namespace

MembershipReport check_J(const Mat& g, int n, int m) {
  return check_pattern(g, n, m, false, false);
}

// At level 0 the index-two subgroup coincides with the full stabilizer, so
// the center condition only applies from level 1 on.
MembershipReport check_K(const Mat& g, int n, int m) {
  return check_pattern(g, n, m, false, m >= 1);
}

MembershipReport check_J0(const Mat& g, int n, int m) {
  return check_pattern(g, n, m, true, false);
}

MembershipReport check_K0(const Mat& g, int n, int m) {
  return check_pattern(g, n, m, true, m >= 1);
}

MembershipReport check_H(const Mat& g, int n, int r, int m) {
  require_shape(g, n, m);
  if (r < 1 || r > n) throw PreconditionViolated("corner rank out of range");

  MembershipReport rep = check_K(g, n, m);

  // The fixed middle coordinates: columns and rows r+1 .. 2n+1-r must agree
  // with the identity to guard depth at the natural scale of g.
  const std::int64_t cap = 2 * std::min<std::int64_t>(0, g.min_val_lower_bound());
  const PadicScalar one = PadicScalar::one(g.ctx());
  const PadicScalar zero = PadicScalar::zero(g.ctx());
  const int d = 2 * n + 1;
  for (int c = r + 1; c <= d - r; ++c)
    for (int i = 1; i <= d; ++i) {
      const bool diag = i == c;
      if (!equal_within_guard(g.at(i, c), diag ? one : zero, cap) ||
          !equal_within_guard(g.at(c, i), diag ? one : zero, cap)) {
        std::ostringstream os;
        os << "does not fix the middle coordinate block at position " << c;
        rep.violations.push_back({0, 0, 0, os.str()});
        rep.member = false;
        return rep;
      }
    }

  rep.member = rep.violations.empty();
  return rep;
}

bool in_J(const Mat& g, int n, int m) { return check_J(g, n, m).member; }
bool in_K(const Mat& g, int n, int m) { return check_K(g, n, m).member; }
bool in_J0(const Mat& g, int n, int m) { return check_J0(g, n, m).member; }
bool in_K0(const Mat& g, int n, int m) { return check_K0(g, n, m).member; }
bool in_H(const Mat& g, int n, int r, int m) {
  return check_H(g, n, r, m).member;
}

Mat depth_conjugator(const PrecisionContext& ctx, int n, int m) {
  return pi_coweight(ctx, n, lambda_coweight(n, n), m / 2);
}

// ---------------------------------------------------------------------------
// Parabolic block structure.

namespace {

// Block index of a 1-based position for the (r, 2(n-r)+1, r) partition.
int rblock_of(int n, int r, int i) {
  return i <= r ? 0 : (i <= 2 * n + 1 - r ? 1 : 2);
}

bool part_uses_r(ParabolicPart part) {
  switch (part) {
    case ParabolicPart::P:
    case ParabolicPart::Pbar:
    case ParabolicPart::M:
    case ParabolicPart::N:
    case ParabolicPart::Nbar:
      return true;
    default:
      return false;
  }
}

}  // namespace

ParabolicPart parabolic_part_parse(const std::string& s) {
  if (s == "P") return ParabolicPart::P;
  if (s == "Pbar") return ParabolicPart::Pbar;
  if (s == "M") return ParabolicPart::M;
  if (s == "N") return ParabolicPart::N;
  if (s == "Nbar") return ParabolicPart::Nbar;
  if (s == "B") return ParabolicPart::B;
  if (s == "Bbar") return ParabolicPart::Bbar;
  if (s == "U") return ParabolicPart::U;
  if (s == "Ubar") return ParabolicPart::Ubar;
  if (s == "T_integral") return ParabolicPart::T_integral;
  throw ParseError("unknown parabolic part: " + s);
}

std::string parabolic_part_str(ParabolicPart part) {
  switch (part) {
    case ParabolicPart::P: return "P";
    case ParabolicPart::Pbar: return "Pbar";
    case ParabolicPart::M: return "M";
    case ParabolicPart::N: return "N";
    case ParabolicPart::Nbar: return "Nbar";
    case ParabolicPart::B: return "B";
    case ParabolicPart::Bbar: return "Bbar";
    case ParabolicPart::U: return "U";
    case ParabolicPart::Ubar: return "Ubar";
    case ParabolicPart::T_integral: return "T_integral";
  }
  return "?";
}

MembershipReport check_parabolic_part(const Mat& g, int n, int r,
                                      ParabolicPart part) {
  require_shape(g, n, 0);
  if (part_uses_r(part) && (r < 1 || r > n))
    throw PreconditionViolated("parabolic rank out of range");

  MembershipReport rep;
  if (!is_in_group(g, n))
    rep.violations.push_back(
        {0, 0, 0, "does not preserve the form with determinant one"});

  const int d = 2 * n + 1;
  const std::int64_t cap =
      2 * std::min<std::int64_t>(0, g.min_val_lower_bound());
  const PadicScalar one = PadicScalar::one(g.ctx());

  auto want_zero = [&](int i, int j) {
    if (!g.at(i, j).is_zero_class())
      rep.violations.push_back({i, j, 0, "entry must vanish"});
  };
  auto want_delta = [&](int i, int j) {
    if (i == j) {
      if (!equal_within_guard(g.at(i, j), one, cap))
        rep.violations.push_back({i, j, 0, "diagonal entry must be 1"});
    } else {
      want_zero(i, j);
    }
  };

  for (int i = 1; i <= d; ++i)
    for (int j = 1; j <= d; ++j) {
      const int bi = part_uses_r(part) ? rblock_of(n, r, i) : 0;
      const int bj = part_uses_r(part) ? rblock_of(n, r, j) : 0;
      switch (part) {
        case ParabolicPart::P:
          if (bi > bj) want_zero(i, j);
          break;
        case ParabolicPart::Pbar:
          if (bi < bj) want_zero(i, j);
          break;
        case ParabolicPart::M:
          if (bi != bj) want_zero(i, j);
          break;
        case ParabolicPart::N:
          if (bi > bj) want_zero(i, j);
          else if (bi == bj) want_delta(i, j);
          break;
        case ParabolicPart::Nbar:
          if (bi < bj) want_zero(i, j);
          else if (bi == bj) want_delta(i, j);
          break;
        case ParabolicPart::B:
          if (i > j) want_zero(i, j);
          break;
        case ParabolicPart::Bbar:
          if (i < j) want_zero(i, j);
          break;
        case ParabolicPart::U:
          if (i > j) want_zero(i, j);
          else if (i == j) want_delta(i, j);
          break;
        case ParabolicPart::Ubar:
          if (i < j) want_zero(i, j);
          else if (i == j) want_delta(i, j);
          break;
        case ParabolicPart::T_integral:
          if (i != j) {
            want_zero(i, j);
          } else if (!g.at(i, j).has_val_exactly(0)) {
            rep.violations.push_back({i, j, 0, "diagonal entry must be a unit"});
          }
          break;
      }
    }

  rep.member = rep.violations.empty();
  return rep;
}

bool in_parabolic_part(const Mat& g, int n, int r, ParabolicPart part) {
  return check_parabolic_part(g, n, r, part).member;
}

// ---------------------------------------------------------------------------
// GL_r congruence patterns.

MembershipReport check_gamma(const Mat& a, int r, int m, bool primed) {
  if (r < 1) throw PreconditionViolated("rank must be >= 1");
  if (m < 0) throw PreconditionViolated("level must be >= 0");
  if (a.dim() != r) throw PreconditionViolated("matrix size does not match");

  MembershipReport rep;
  for (int i = 1; i <= r; ++i)
    for (int j = 1; j <= r; ++j)
      if (!a.at(i, j).has_val_at_least(0))
        rep.violations.push_back({i, j, 0, ""});

  if (rep.violations.empty()) {
    bool unit_det = false;
    try {
      unit_det = det(a).has_val_exactly(0);
    } catch (const DivisionByZero&) {
      unit_det = false;
    }
    if (!unit_det)
      rep.violations.push_back(
          {0, 0, 0, "determinant is not an integral unit"});
  }

  if (m >= 1) {
    for (int t = 1; t <= r - 1; ++t) {
      const int i = primed ? t : r;
      const int j = primed ? r : t;
      if (!a.at(i, j).has_val_at_least(m))
        rep.violations.push_back({i, j, m, ""});
    }
    if (!congruent_mod(a.at(r, r), PadicScalar::one(a.ctx()), m))
      rep.violations.push_back(
          {r, r, m, "corner entry must be congruent to 1"});
  }

  rep.member = rep.violations.empty();
  return rep;
}

bool in_gamma(const Mat& a, int r, int m, bool primed) {
  return check_gamma(a, r, m, primed).member;
}

Mat sample_gamma(const PrecisionContext& ctx, int r, int m, bool primed,
                 std::mt19937_64& rng, int factors) {
  Mat a(ctx, r);
  for (int i = 1; i <= r; ++i)
    a.at(i, i) = (i == r && m >= 1)
                     ? PadicScalar::one(ctx) + random_unit(ctx, rng).shift(m)
                     : random_unit(ctx, rng);
  for (int step = 0; step < factors; ++step) {
    int i = 1 + static_cast<int>(rng() % r);
    int j = 1 + static_cast<int>(rng() % r);
    if (i == j) continue;
    // Elementary transvection respecting the pattern: the constrained slot
    // (column r above the corner for the primed pattern, row r left of it
    // otherwise) takes a level-m parameter, everything else is integral.
    const bool constrained = m >= 1 && (primed ? j == r : i == r);
    Mat f = Mat::identity(ctx, r);
    f.at(i, j) = random_unit(ctx, rng).shift(constrained ? m : 0);
    a = a * f;
  }
  return a;
}

Mat atkin_lehner(const PrecisionContext& ctx, int n, int m) {
  if (n < 1 || m < 0)
    throw PreconditionViolated("atkin_lehner needs n >= 1, m >= 0");
  return w_elt_displaced(ctx, n, Root::short_root(1, n), m);
}

Mat torus_signs(const PrecisionContext& ctx, int n,
                const std::vector<int>& signs) {
  if (static_cast<int>(signs.size()) != n)
    throw PreconditionViolated("need one sign per axis");
  std::vector<PadicScalar> t;
  for (int s : signs) {
    if (s != 1 && s != -1) throw PreconditionViolated("signs must be +-1");
    t.push_back(PadicScalar::from_int(ctx, s));
  }
  return torus_diag(ctx, n, t);
}

// ---------------------------------------------------------------------------
// Samplers.

PadicScalar random_unit(const PrecisionContext& ctx, std::mt19937_64& rng) {
  const int k = std::min(ctx.N(), 6);
  const std::uint64_t span = ctx.pk(k);
  std::uint64_t u = rng() % span;
  while (u % static_cast<std::uint64_t>(ctx.p()) == 0) u = rng() % span;
  return PadicScalar::from_unit(ctx, u);
}

namespace {

// A parameter of valuation >= depth, usually exactly depth.
PadicScalar random_param(const PrecisionContext& ctx, std::int64_t depth,
                         std::mt19937_64& rng) {
  std::int64_t extra = (rng() % 4 == 0) ? 1 + static_cast<std::int64_t>(rng() % 2) : 0;
  return random_unit(ctx, rng).shift(depth + extra);
}

// Product of `factors` random generator-shaped factors of the index-two
// subgroup at level m, restricted to the rank-r corner when corner_only.
Mat sample_k_like(const PrecisionContext& ctx, int n, int r, int m,
                  std::mt19937_64& rng, int factors, bool corner_only) {
  const int d = 2 * n + 1;
  Mat g = Mat::identity(ctx, d);
  for (int step = 0; step < factors; ++step) {
    const int kind = static_cast<int>(rng() % (corner_only ? 4 : 6));
    Mat f = Mat::identity(ctx, d);
    switch (kind) {
      case 0: {  // difference root, unit-scale parameter
        if (r < 2) { --step; continue; }
        int i = 1 + static_cast<int>(rng() % r);
        int j = 1 + static_cast<int>(rng() % r);
        if (i == j) { --step; continue; }
        f = x_elt(ctx, n, Root::diff(i, j, n), random_param(ctx, 0, rng));
        break;
      }
      case 1: {  // positive sum root, pole of order m
        if (r < 2) { --step; continue; }
        int i = 1 + static_cast<int>(rng() % r);
        int j = 1 + static_cast<int>(rng() % r);
        if (i == j) { --step; continue; }
        f = x_elt(ctx, n, Root::sum(i, j, n), random_param(ctx, -m, rng));
        break;
      }
      case 2: {  // negative sum root, zero of order m
        if (r < 2) { --step; continue; }
        int i = 1 + static_cast<int>(rng() % r);
        int j = 1 + static_cast<int>(rng() % r);
        if (i == j) { --step; continue; }
        f = x_elt(ctx, n, Root::sum(i, j, n).negated(),
                  random_param(ctx, m, rng));
        break;
      }
      case 3: {  // torus units on the first r axes
        std::vector<PadicScalar> t;
        for (int a = 1; a <= n; ++a)
          t.push_back(a <= r ? random_unit(ctx, rng) : PadicScalar::one(ctx));
        f = torus_diag(ctx, n, t);
        break;
      }
      case 4: {  // positive short root, integral parameter
        int l = 1 + static_cast<int>(rng() % n);
        f = x_elt(ctx, n, Root::short_root(l, n), random_param(ctx, 0, rng));
        break;
      }
      case 5: {  // negative short root, zero of order m
        int l = 1 + static_cast<int>(rng() % n);
        f = x_elt(ctx, n, Root::short_root(l, n).negated(),
                  random_param(ctx, m, rng));
        break;
      }
    }
    g = g * f;
  }
  return g;
}

}  // namespace

Mat sample_H(const PrecisionContext& ctx, int n, int r, int m,
             std::mt19937_64& rng, int factors) {
  return sample_k_like(ctx, n, r, m, rng, factors, true);
}

Mat sample_K(const PrecisionContext& ctx, int n, int m, std::mt19937_64& rng,
             int factors) {
  return sample_k_like(ctx, n, n, m, rng, factors, false);
}

Mat sample_J(const PrecisionContext& ctx, int n, int m, std::mt19937_64& rng,
             int factors) {
  Mat g = sample_K(ctx, n, m, rng, factors);
  if (rng() % 2 == 0) {
    const int j = 1 + static_cast<int>(rng() % n);
    Mat w = w_elt_displaced(ctx, n, Root::short_root(j, n), m);
    g = (rng() % 2 == 0) ? g * w : w * g;
  }
  return g;
}

Mat sample_K0(const PrecisionContext& ctx, int n, int m, std::mt19937_64& rng,
              int factors) {
  Mat z = depth_conjugator(ctx, n, m);
  Mat zi = pi_coweight(ctx, n, lambda_coweight(n, n), -(m / 2));
  return conjugate(sample_K(ctx, n, m, rng, factors), z, zi);
}

Mat sample_J0(const PrecisionContext& ctx, int n, int m, std::mt19937_64& rng,
              int factors) {
  Mat z = depth_conjugator(ctx, n, m);
  Mat zi = pi_coweight(ctx, n, lambda_coweight(n, n), -(m / 2));
  return conjugate(sample_J(ctx, n, m, rng, factors), z, zi);
}

}  // namespace padicso
