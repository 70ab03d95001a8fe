#pragma once

// Membership tests for the level-m family of open compact subgroups of the
// odd special orthogonal group: the lattice stabilizers J, their index-two
// subgroups K (center entry congruent to 1 mod the maximal ideal), the
// depth-balanced conjugates J0/K0, and the even-orthogonal corner subgroups
// H.  Every test is expressed through explicit entry conditions, and each
// has a reporting variant that lists the exact conditions that failed, so a
// negative answer is as auditable as a positive one.
//
// The J pattern at level m places poles of order at most m in the top-right
// block and zeros of order m in the lower-left blocks; the balanced pattern
// redistributes the depth symmetrically (l = floor(m/2) on the off-center
// blocks, e = m mod 2 on the corners).  The two are exchanged by
// conjugation with the diagonal cocharacter returned by depth_conjugator.

#include <random>

#include "padicso/rootdata.hpp"

namespace padicso {

// One failed requirement.  For entry conditions, (i, j) is the 1-based
// position and `need` the valuation lower bound that the stored class rules
// out.  Conditions that are not tied to a single entry (preserving the
// form, determinant one, the center congruence, fixed coordinates of the
// corner subgroups) set i = j = 0 and describe themselves in `what`.
struct MembershipViolation {
  int i = 0;
  int j = 0;
  std::int64_t need = 0;
  std::string what;
  std::string str() const;
};

struct MembershipReport {
  bool member = false;
  std::vector<MembershipViolation> violations;
};

// Required valuation lower bound on entry (i, j) for the level-m stabilizer
// pattern (sizes (2n+1) x (2n+1), m >= 0), in (n, 1, n) blocks:
//
//       [ o    o    p^-m ]
//       [ p^m  o    o    ]
//       [ p^m  p^m  o    ]
std::int64_t level_need_J(int n, int m, int i, int j);

// Required bound for the depth-balanced pattern at level m = e + 2l:
//
//       [ o      p^l    p^-e ]
//       [ p^e+l  o      p^l  ]
//       [ p^e    p^e+l  o    ]
std::int64_t level_need_J0(int n, int m, int i, int j);

MembershipReport check_J(const Mat& g, int n, int m);
MembershipReport check_K(const Mat& g, int n, int m);
MembershipReport check_J0(const Mat& g, int n, int m);
MembershipReport check_K0(const Mat& g, int n, int m);

// Corner subgroup of rank r at level m: elements of K whose action is
// supported on the four r x r corner blocks, i.e. which fix the middle
// 2(n-r)+1 basis vectors.  Fixing a vector is a closed condition, so it is
// certified to guard depth at the natural scale of the entries.
MembershipReport check_H(const Mat& g, int n, int r, int m);

bool in_J(const Mat& g, int n, int m);
bool in_K(const Mat& g, int n, int m);
bool in_J0(const Mat& g, int n, int m);
bool in_K0(const Mat& g, int n, int m);
bool in_H(const Mat& g, int n, int r, int m);

// The diagonal cocharacter D with pi^{floor(m/2)} on the first n axes:
// g satisfies the balanced pattern at level m exactly when D^-1 g D
// satisfies the plain pattern at level m.
Mat depth_conjugator(const PrecisionContext& ctx, int n, int m);

// ---------------------------------------------------------------------------
// Maximal-parabolic block structure.  For 1 <= r <= n the basis splits into
// (r, 2(n-r)+1, r) blocks; P is the upper block-triangular subgroup, Pbar
// the lower one, M their common Levi diag(a, h, a*), and N / Nbar the strict
// off-diagonal parts.  B / Bbar / U / Ubar are the full triangular versions
// (independent of r), and T_integral asks for a diagonal matrix with unit
// entries.  All tests treat an entry as vanishing when its stored class is
// indistinguishable from zero, so products of exact generators certify
// cleanly.

enum class ParabolicPart {
  P, Pbar, M, N, Nbar, B, Bbar, U, Ubar, T_integral
};

ParabolicPart parabolic_part_parse(const std::string& s);
std::string parabolic_part_str(ParabolicPart part);

MembershipReport check_parabolic_part(const Mat& g, int n, int r,
                                      ParabolicPart part);
bool in_parabolic_part(const Mat& g, int n, int r, ParabolicPart part);

// ---------------------------------------------------------------------------
// Congruence patterns on GL_r over the integers.  The primed pattern at
// level m asks for an integral invertible a whose last column above the
// corner vanishes to level m and whose corner entry is a unit congruent to
// 1 mod p^m; the unprimed pattern asks the same of the last row left of the
// corner.  At level 0 both reduce to GL_r(o).  The two patterns are
// exchanged by a -> transpose-inverse.

MembershipReport check_gamma(const Mat& a, int r, int m, bool primed);
bool in_gamma(const Mat& a, int r, int m, bool primed);

// Random element of the level-m pattern (primed or not), as a product of
// elementary matrices and a diagonal that respect the pattern.
Mat sample_gamma(const PrecisionContext& ctx, int r, int m, bool primed,
                 std::mt19937_64& rng, int factors = 8);

// ---------------------------------------------------------------------------
// The displaced short Weyl element on the first axis at level m: the
// standard involution normalizing the level-m subgroups, with off entries
// -pi^{-m} and -pi^{m} on the first/last coordinates and center -1.
Mat atkin_lehner(const PrecisionContext& ctx, int n, int m);

// diag with +-1 on the axes (sign_j at axis j), +1 center.
Mat torus_signs(const PrecisionContext& ctx, int n,
                const std::vector<int>& signs);

// ---------------------------------------------------------------------------
// Deterministic random elements, used by the unit tests and the
// verification suites.  Each sample is a product of generator-shaped
// factors whose parameters sit at (or occasionally above) the extreme
// depths the subgroup allows, so the samples exercise the boundary of the
// membership conditions.  All randomness flows through the caller's
// engine; identical seeds give identical elements.

Mat sample_H(const PrecisionContext& ctx, int n, int r, int m,
             std::mt19937_64& rng, int factors = 12);
Mat sample_K(const PrecisionContext& ctx, int n, int m, std::mt19937_64& rng,
             int factors = 12);
Mat sample_J(const PrecisionContext& ctx, int n, int m, std::mt19937_64& rng,
             int factors = 12);
Mat sample_K0(const PrecisionContext& ctx, int n, int m, std::mt19937_64& rng,
              int factors = 12);
Mat sample_J0(const PrecisionContext& ctx, int n, int m, std::mt19937_64& rng,
              int factors = 12);

// A random unit of the ring of integers, drawn from the canonical residues
// modulo p^min(N, 6).
PadicScalar random_unit(const PrecisionContext& ctx, std::mt19937_64& rng);

}  // namespace padicso
