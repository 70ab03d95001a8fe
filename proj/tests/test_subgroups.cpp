#include "doctest.h"

#include <random>

#include "padicso/subgroups.hpp"

using namespace padicso;

namespace {

// Independent oracle for the level-m stabilizer: an element lies in it
// exactly when it and its inverse both map every generator of the ambient
// lattice (integral on the first n coordinates, level-m deep on the center
// and the last n) back into the lattice.  This checks vector images only
// and never looks at the block pattern the implementation uses.
bool stabilizes_lattice(const Mat& g, int n, int m) {
  const PrecisionContext& ctx = g.ctx();
  const Mat gi = group_inverse(g, n);
  for (const Mat* h : {&g, &gi}) {
    for (int k = -n; k <= n; ++k) {
      const std::int64_t sh = k >= 0 ? m : 0;  // generator pi^sh e_k
      Vec img = h->apply(basis_vector(ctx, n, k));
      for (int t = -n; t <= n; ++t) {
        const std::int64_t need = t >= 0 ? m : 0;
        if (!img[static_cast<std::size_t>(basis_col(t, n)) - 1].shift(sh)
                 .has_val_at_least(need))
          return false;
      }
    }
  }
  return true;
}

// A random product of root elements with parameters of mixed depth, giving
// group elements that land inside or outside the stabilizers unpredictably.
Mat random_group_element(const PrecisionContext& ctx, int n,
                         std::mt19937_64& rng, int factors, int min_depth) {
  Mat g = Mat::identity(ctx, 2 * n + 1);
  std::vector<Root> roots = all_roots(n);
  for (int s = 0; s < factors; ++s) {
    const Root& alpha = roots[rng() % roots.size()];
    const std::int64_t depth =
        min_depth + static_cast<std::int64_t>(rng() % 4);
    g = g * x_elt(ctx, n, alpha, random_unit(ctx, rng).shift(depth));
  }
  return g;
}

}  // namespace

TEST_CASE("lattice stabilizer oracle agrees with the pattern test") {
  PrecisionContext ctx(5, 16, 2);
  const int n = 2;
  for (int m = 0; m <= 3; ++m) {
    std::mt19937_64 rng(1000 + m);
    for (int trial = 0; trial < 6; ++trial) {
      Mat g = sample_J(ctx, n, m, rng);
      CAPTURE(m);
      CAPTURE(trial);
      CHECK(in_J(g, n, m));
      CHECK(stabilizes_lattice(g, n, m));
    }
  }

  // Boundary violations: a negative short root one step shy of the level,
  // and a sum root one step beyond the allowed pole.
  for (int m = 1; m <= 3; ++m) {
    Mat bad1 = x_elt(ctx, n, Root::short_root(1, n).negated(),
                     PadicScalar::pi_pow(ctx, m - 1));
    CHECK_FALSE(in_J(bad1, n, m));
    CHECK_FALSE(stabilizes_lattice(bad1, n, m));
    Mat bad2 = x_elt(ctx, n, Root::sum(1, 2, n),
                     PadicScalar::pi_pow(ctx, -m - 1));
    CHECK_FALSE(in_J(bad2, n, m));
    CHECK_FALSE(stabilizes_lattice(bad2, n, m));
  }

  // Mixed random products: oracle and pattern must agree in both verdicts.
  std::mt19937_64 rng(424242);
  int inside = 0, outside = 0;
  for (int trial = 0; trial < 60; ++trial) {
    Mat g = random_group_element(ctx, n, rng, 5, -1);
    for (int m = 0; m <= 2; ++m) {
      const bool a = in_J(g, n, m);
      const bool b = stabilizes_lattice(g, n, m);
      CAPTURE(trial);
      CAPTURE(m);
      CHECK(a == b);
      (a ? inside : outside) += 1;
    }
  }
  CHECK(inside > 0);
  CHECK(outside > 0);
}

TEST_CASE("index-two structure and the exceptional coset") {
  PrecisionContext ctx(5, 16, 2);
  for (int n : {2, 3}) {
    for (int m = 1; m <= 3; ++m) {
      for (int j = 1; j <= n; ++j) {
        Mat w = w_elt_displaced(ctx, n, Root::short_root(j, n), m);
        CAPTURE(n); CAPTURE(m); CAPTURE(j);
        CHECK(in_J(w, n, m));
        CHECK_FALSE(in_K(w, n, m));
      }
      // Index two: the product of any two elements of the nontrivial coset
      // falls back into the subgroup.
      Mat w1 = w_elt_displaced(ctx, n, Root::short_root(1, n), m);
      Mat w2 = w_elt_displaced(ctx, n, Root::short_root(n, n), m);
      CHECK(in_K(w1 * w2, n, m));

      for (int r = 1; r <= n; ++r) {
        Mat wr = w_block(ctx, n, r, m);
        CHECK(in_J(wr, n, m));
        CHECK(in_K(wr, n, m) == (r % 2 == 0));
      }
    }
    // At level zero there is no index-two subgroup: the coset collapses.
    Mat w0 = w_elt_displaced(ctx, n, Root::short_root(1, n), 0);
    CHECK(in_K(w0, n, 0));
  }
}

TEST_CASE("center entry congruences at full level") {
  PrecisionContext ctx(5, 16, 2);
  const int n = 2;
  for (int m = 1; m <= 3; ++m) {
    std::mt19937_64 rng(7000 + m);
    for (int trial = 0; trial < 8; ++trial) {
      Mat k = sample_K(ctx, n, m, rng);
      CAPTURE(m);
      CAPTURE(trial);
      // The defining condition only asks for congruence mod the maximal
      // ideal, but membership forces congruence to the full level.
      CHECK(congruent_mod(k.at(n + 1, n + 1), PadicScalar::one(ctx), m));
      for (int i = 1; i <= n; ++i)
        CHECK(k.at(i, n + 1).has_val_at_least(0));
      for (int i = n + 2; i <= 2 * n + 1; ++i)
        CHECK(k.at(i, n + 1).has_val_at_least(m));
    }
    // The nontrivial coset has center entry congruent to -1 instead.
    std::mt19937_64 rng2(9000 + m);
    Mat w = w_elt_displaced(ctx, n, Root::short_root(1, n), m);
    Mat j = sample_K(ctx, n, m, rng2) * w;
    CHECK(congruent_mod(j.at(n + 1, n + 1), -PadicScalar::one(ctx), m));
  }
}

TEST_CASE("balanced pattern equals its defining conjugation") {
  // Integer-level identity between the two patterns: conjugating by the
  // depth cocharacter shifts the requirement of block (i, j) by
  // floor(m/2) * (sigma_i - sigma_j) with sigma = (+1, 0, -1).
  for (int n : {2, 3}) {
    for (int m = 0; m <= 5; ++m) {
      const std::int64_t l = m / 2;
      const int d = 2 * n + 1;
      auto sigma = [&](int i) { return i <= n ? 1 : (i == n + 1 ? 0 : -1); };
      for (int i = 1; i <= d; ++i)
        for (int j = 1; j <= d; ++j)
          CHECK(level_need_J0(n, m, i, j) ==
                level_need_J(n, m, i, j) + l * (sigma(i) - sigma(j)));
    }
  }

  // Matrix level: membership in the balanced group is membership of the
  // conjugate in the plain group, for members and non-members alike.
  PrecisionContext ctx(5, 16, 2);
  const int n = 2;
  for (int m = 0; m <= 4; ++m) {
    Mat z = depth_conjugator(ctx, n, m);
    Mat zi = pi_coweight(ctx, n, lambda_coweight(n, n), -(m / 2));
    std::mt19937_64 rng(3100 + m);
    for (int trial = 0; trial < 5; ++trial) {
      Mat g = sample_J0(ctx, n, m, rng);
      CAPTURE(m);
      CHECK(in_J0(g, n, m));
      CHECK(in_J(conjugate(g, zi, z), n, m));
    }
    std::mt19937_64 rng2(3200 + m);
    for (int trial = 0; trial < 20; ++trial) {
      Mat g = random_group_element(ctx, n, rng2, 4, -1);
      CAPTURE(m);
      CAPTURE(trial);
      CHECK(in_J0(g, n, m) == in_J(conjugate(g, zi, z), n, m));
    }
  }
}

TEST_CASE("properties of the balanced family") {
  PrecisionContext ctx(5, 16, 2);
  const int n = 2;

  // At levels 0 and 1 the balanced and plain patterns coincide.
  for (int m : {0, 1})
    for (int i = 1; i <= 2 * n + 1; ++i)
      for (int j = 1; j <= 2 * n + 1; ++j)
        CHECK(level_need_J0(n, m, i, j) == level_need_J(n, m, i, j));

  // The corner subgroup at the parity level sits inside every balanced
  // group of the same parity.
  for (int e : {0, 1}) {
    std::mt19937_64 rng(5000 + e);
    for (int trial = 0; trial < 6; ++trial) {
      Mat h = sample_H(ctx, n, n, e, rng);
      for (int m = e; m <= e + 4; m += 2) {
        CAPTURE(e); CAPTURE(m); CAPTURE(trial);
        CHECK(in_K0(h, n, m));
      }
    }
  }

  // The displaced reflection at the parity level is in the balanced
  // stabilizer but not in its index-two subgroup, for every level >= 1.
  for (int m = 1; m <= 4; ++m) {
    const int e = m % 2;
    for (int j = 1; j <= n; ++j) {
      Mat w = w_elt_displaced(ctx, n, Root::short_root(j, n), e);
      CAPTURE(m); CAPTURE(j);
      CHECK(in_J0(w, n, m));
      CHECK_FALSE(in_K0(w, n, m));
    }
  }

  // Descending chain: raising the level by two only sharpens the pattern,
  // and concrete elements follow suit.
  for (int m = 0; m <= 4; ++m) {
    for (int i = 1; i <= 2 * n + 1; ++i)
      for (int j = 1; j <= 2 * n + 1; ++j)
        CHECK(level_need_J0(n, m + 2, i, j) >= level_need_J0(n, m, i, j));
    std::mt19937_64 rng(6100 + m);
    for (int trial = 0; trial < 5; ++trial) {
      Mat g = sample_K0(ctx, n, m + 2, rng);
      CAPTURE(m); CAPTURE(trial);
      CHECK(in_K0(g, n, m));
    }
  }
}

TEST_CASE("corner subgroups fix the middle block") {
  PrecisionContext ctx(5, 16, 2);
  const int n = 3;
  for (int r = 1; r <= n; ++r) {
    for (int m = 0; m <= 2; ++m) {
      std::mt19937_64 rng(100 * r + m);
      for (int trial = 0; trial < 4; ++trial) {
        Mat h = sample_H(ctx, n, r, m, rng);
        CAPTURE(r); CAPTURE(m); CAPTURE(trial);
        CHECK(in_H(h, n, r, m));
        CHECK(in_K(h, n, m));
        // Larger corners contain smaller ones.
        for (int r2 = r; r2 <= n; ++r2) CHECK(in_H(h, n, r2, m));
      }
    }
  }

  // An element moving axis 2 sits in the rank-2 corner but not the rank-1.
  Mat f = x_elt(ctx, n, Root::diff(1, 2, n), PadicScalar::one(ctx));
  CHECK(in_H(f, n, 2, 1));
  CHECK_FALSE(in_H(f, n, 1, 1));

  // Rank-n characterization: fixing the anisotropic vector.  A short-root
  // element moves it and is rejected; corner samples fix it on the nose.
  std::mt19937_64 rng(31337);
  Mat h = sample_H(ctx, n, n, 1, rng);
  Vec e0 = basis_vector(ctx, n, 0);
  Vec he0 = h.apply(e0);
  for (int t = -n; t <= n; ++t) {
    const std::size_t idx = static_cast<std::size_t>(basis_col(t, n)) - 1;
    CHECK(equal_within_guard(he0[idx], e0[idx]));
  }
  Mat s = x_elt(ctx, n, Root::short_root(1, n), PadicScalar::one(ctx));
  CHECK(in_K(s, n, 1));
  CHECK_FALSE(in_H(s, n, n, 1));

  // Levels of the same parity are conjugate corners: transporting by the
  // depth cocharacter on the first r axes moves one level to the other.
  for (int r = 2; r <= n; ++r) {
    for (int m = 2; m <= 3; ++m) {
      const int e = m % 2;
      const std::int64_t l = m / 2;
      Mat down = pi_coweight(ctx, n, lambda_coweight(n, r), -l);
      Mat up = pi_coweight(ctx, n, lambda_coweight(n, r), l);
      std::mt19937_64 rng2(500 * r + m);
      Mat he = sample_H(ctx, n, r, e, rng2);
      CHECK(in_H(conjugate(he, down, up), n, r, m));
      Mat hm = sample_H(ctx, n, r, m, rng2);
      CHECK(in_H(conjugate(hm, up, down), n, r, e));
    }
  }
}

TEST_CASE("membership reports name the failing entries") {
  PrecisionContext ctx(5, 16, 2);
  const int n = 2;

  Mat bad = x_elt(ctx, n, Root::short_root(1, n).negated(),
                  PadicScalar::one(ctx));
  MembershipReport rep = check_J(bad, n, 1);
  CHECK_FALSE(rep.member);
  bool found = false;
  for (const auto& v : rep.violations)
    if (v.i == n + 1 && v.j == 1 && v.need == 1) found = true;
  CHECK(found);

  // A matrix that fails the group condition reports it as such.
  Mat notso = Mat::identity(ctx, 2 * n + 1);
  notso.at(1, 2) = PadicScalar::one(ctx);
  MembershipReport rep2 = check_J(notso, n, 0);
  CHECK_FALSE(rep2.member);
  REQUIRE(rep2.violations.size() == 1);
  CHECK(rep2.violations[0].what ==
        "does not preserve the form with determinant one");

  // Corner-subgroup failures mention the moved middle coordinate.
  Mat s = x_elt(ctx, n, Root::short_root(1, n), PadicScalar::one(ctx));
  MembershipReport rep3 = check_H(s, n, n, 1);
  CHECK_FALSE(rep3.member);
  REQUIRE_FALSE(rep3.violations.empty());
  CHECK(rep3.violations.back().what.find("fix the middle") !=
        std::string::npos);
}

TEST_CASE("parabolic parts classify the standard generators") {
  PrecisionContext ctx(5, 16, 2);
  const int n = 3;
  PadicScalar y = PadicScalar::from_int(ctx, 7);

  for (int r = 1; r <= n; ++r) {
    // Root elements sort by where the root lives relative to the cut at r:
    // roots supported inside the first r axes with positive sign go to the
    // upper triangle, their negatives to the lower, and anything touching
    // only the remaining axes lands in the Levi on both sides.
    Mat upper = x_elt(ctx, n, Root::short_root(r, n), y);
    CHECK(in_parabolic_part(upper, n, r, ParabolicPart::P));
    CHECK(in_parabolic_part(upper, n, r, ParabolicPart::N));
    CHECK_FALSE(in_parabolic_part(upper, n, r, ParabolicPart::Pbar));
    CHECK_FALSE(in_parabolic_part(upper, n, r, ParabolicPart::M));

    Mat lower = x_elt(ctx, n, Root::short_root(r, n).negated(), y);
    CHECK(in_parabolic_part(lower, n, r, ParabolicPart::Pbar));
    CHECK(in_parabolic_part(lower, n, r, ParabolicPart::Nbar));
    CHECK_FALSE(in_parabolic_part(lower, n, r, ParabolicPart::P));

    if (r < n) {
      Mat levi = x_elt(ctx, n, Root::short_root(n, n), y);
      CHECK(in_parabolic_part(levi, n, r, ParabolicPart::M));
      CHECK(in_parabolic_part(levi, n, r, ParabolicPart::P));
      CHECK(in_parabolic_part(levi, n, r, ParabolicPart::Pbar));
      CHECK_FALSE(in_parabolic_part(levi, n, r, ParabolicPart::N));
    }
    if (r >= 2) {
      Mat gl = x_elt(ctx, n, Root::diff(1, 2, n), y);
      CHECK(in_parabolic_part(gl, n, r, ParabolicPart::M));
    }
  }

  // Triangular parts ignore the cut: positive roots are upper triangular,
  // the torus is diagonal, and the unipotent parts exclude the torus.
  for (const Root& a : positive_roots(n)) {
    Mat xp = x_elt(ctx, n, a, y);
    CHECK(in_parabolic_part(xp, n, 1, ParabolicPart::B));
    CHECK(in_parabolic_part(xp, n, 1, ParabolicPart::U));
    Mat xm = x_elt(ctx, n, a.negated(), y);
    CHECK(in_parabolic_part(xm, n, 1, ParabolicPart::Bbar));
    CHECK(in_parabolic_part(xm, n, 1, ParabolicPart::Ubar));
    CHECK_FALSE(in_parabolic_part(xp, n, 1, ParabolicPart::Bbar));
  }
  Mat t = pi_coweight(ctx, n, lambda_coweight(n, 1), 2);
  CHECK(in_parabolic_part(t, n, 1, ParabolicPart::B));
  CHECK(in_parabolic_part(t, n, 1, ParabolicPart::Bbar));
  CHECK_FALSE(in_parabolic_part(t, n, 1, ParabolicPart::U));
  CHECK_FALSE(in_parabolic_part(t, n, 1, ParabolicPart::T_integral));
  std::vector<int> signs = {1, -1, 1};
  CHECK(in_parabolic_part(torus_signs(ctx, n, signs), n, 1,
                          ParabolicPart::T_integral));

  CHECK(parabolic_part_parse("Nbar") == ParabolicPart::Nbar);
  CHECK(parabolic_part_str(ParabolicPart::T_integral) == "T_integral");
}

TEST_CASE("gl congruence patterns and their transpose-inverse exchange") {
  PrecisionContext ctx(5, 16, 2);
  const int r = 3;

  for (int m = 0; m <= 3; ++m) {
    std::mt19937_64 rng(9000 + m);
    for (int trial = 0; trial < 20; ++trial) {
      Mat a = sample_gamma(ctx, r, m, true, rng);
      CHECK(in_gamma(a, r, m, true));
      // The two patterns are exchanged by transpose-inverse.
      Mat b = inverse_general(a).transpose();
      CHECK(in_gamma(b, r, m, false));
      Mat c = sample_gamma(ctx, r, m, false, rng);
      CHECK(in_gamma(c, r, m, false));
    }
  }

  // Boundary: entries at level m-1 in the constrained slots are rejected.
  std::mt19937_64 rng(77);
  const int m = 2;
  Mat a = sample_gamma(ctx, r, m, true, rng);
  Mat bad = a;
  bad.at(1, r) = PadicScalar::from_int(ctx, 5);  // val 1 < m in column r
  CHECK_FALSE(in_gamma(bad, r, m, true));
  CHECK(in_gamma(bad, r, m - 1, true));

  Mat off = a;
  off.at(r, r) = off.at(r, r) + PadicScalar::from_int(ctx, 5);
  CHECK_FALSE(in_gamma(off, r, m, true));  // corner no longer 1 mod p^2

  Mat nonint = Mat::identity(ctx, r);
  nonint.at(1, 2) = PadicScalar::from_int(ctx, 2).shift(-1);
  CHECK_FALSE(in_gamma(nonint, r, 0, true));

  Mat sing(ctx, r);
  sing.at(1, 1) = PadicScalar::from_int(ctx, 5);
  sing.at(2, 2) = PadicScalar::one(ctx);
  sing.at(3, 3) = PadicScalar::one(ctx);
  CHECK_FALSE(in_gamma(sing, r, 0, true));  // determinant not a unit

  // Rank one: only the corner congruence remains.
  Mat u1(ctx, 1);
  u1.at(1, 1) = PadicScalar::from_int(ctx, 6);
  CHECK(in_gamma(u1, 1, 1, true));
  CHECK_FALSE(in_gamma(u1, 1, 2, true));
}

TEST_CASE("displaced involution on the first axis at each level") {
  PrecisionContext ctx(5, 16, 2);
  const int n = 2;
  for (int m = 0; m <= 4; ++m) {
    Mat w = atkin_lehner(ctx, n, m);
    CHECK(is_in_group(w, n));
    CHECK(mats_equal(w * w, Mat::identity(ctx, 2 * n + 1)));
    // It normalizes the level-m family: lives in J but outside K, with the
    // characteristic off-diagonal entries at depth -m and +m on axis 1.
    CHECK(in_J(w, n, m));
    if (m >= 1) CHECK_FALSE(in_K(w, n, m));
    CHECK(w.at(1, 2 * n + 1).has_val_exactly(-m));
    CHECK(w.at(2 * n + 1, 1).has_val_exactly(m));
  }
}
