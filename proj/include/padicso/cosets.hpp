#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "padicso/decompose.hpp"
#include "padicso/matrix.hpp"
#include "padicso/rootdata.hpp"
#include "padicso/subgroups.hpp"

namespace padicso {

// Double cosets of the balanced level subgroup against a maximal parabolic.
//
// For each corank r the group is partitioned into finitely many double
// cosets  (parabolic) * s * (level subgroup), and the representatives s can
// be listed explicitly: short one-parameter elements on the axis r with a
// prime-power parameter, plus, when r equals the rank, the same elements
// followed by a displaced short reflection.  This header provides the two
// enumerations (one for the lower parabolic, one for the upper), the
// representative matrices, the reflection that transfers one enumeration
// into the other, an algorithmic reduction of an arbitrary group element to
// its representative, and replayable certificates showing that distinct
// representatives really lie in distinct cosets.

enum class CosetSide { Bar, Plain };

CosetSide coset_side_parse(const std::string& s);
std::string coset_side_str(CosetSide side);

struct CosetRep {
  int r = 1;            // axis (and parabolic corank) of the representative
  int i = 0;            // exponent: the short parameter is pi^i
  bool twist = false;   // whether the displaced reflection follows
  CosetSide side = CosetSide::Bar;

  std::string str() const;
};

bool operator==(const CosetRep& a, const CosetRep& b);
bool operator!=(const CosetRep& a, const CosetRep& b);

// The enumeration for the lower parabolic at level m: exponents 0..floor(m/2)
// untwisted, and for r == n also the twisted exponents 1-(m mod 2) .. m/2.
std::vector<CosetRep> enumerate_bar_sigma(int r, int n, int m);

// The enumeration for the upper parabolic: exponents shifted up by m mod 2.
std::vector<CosetRep> enumerate_sigma(int r, int n, int m);

// Whether the representative appears in the level-m enumeration of its side.
bool rep_in_family(const CosetRep& rep, int n, int m);

// The representative as a matrix.  Twisted representatives multiply the
// short element by the displaced reflection on the same axis at level
// m mod 2.
Mat rep_matrix(const PrecisionContext& ctx, int n, int m, const CosetRep& rep);

// The bijection between the two enumerations: conjugation by the
// reflecting block sends the upper-side representative with exponent
// i + (m mod 2) to the lower-side representative with exponent i, so the
// transfer shifts exponents by m mod 2 (up when leaving the lower side,
// down when returning).
CosetRep weyl_transfer(const CosetRep& rep, int n, int m);

// The conjugator v realizing the transfer: v * plain * v^-1 == bar exactly,
// v * (lower parabolic) * v^-1 == upper parabolic, and v normalizes the
// balanced level subgroup.  v is the displaced reflecting block on the
// first r axes times a sign torus correcting the parity of r.
Mat side_transfer_conjugator(const PrecisionContext& ctx, int n, int r,
                             int m);

// ---------------------------------------------------------------------------
// The splitting identity for a product of two short elements on distinct
// axes s != u (any nonzero a):
//
//  x_{e_s}(a) x_{e_u}(b)
//    = x_{e_u - e_s}(b/a) * x_{e_s}(a) * x_{e_u - e_s}(-b/a) * x_{e_s+e_u}(-ab)
//
// The identity is exact in the matrix realization; it lets a reduction keep
// one short factor and push the other into long-root elements, which land
// in the parabolic (left factor) and the level subgroup (right factors)
// whenever b/a is integral.

struct RootFactor {
  Root root;
  PadicScalar param;
};

struct ShortProductSplit {
  std::vector<RootFactor> factors;  // the four factors, in product order

  Mat reassemble(const PrecisionContext& ctx, int n) const;
};

ShortProductSplit short_product_split(const PrecisionContext& ctx, int n,
                                      int s, int u, const PadicScalar& a,
                                      const PadicScalar& b);

// ---------------------------------------------------------------------------
// Reduction of an arbitrary group element to its coset representative.
//
// The result factors g = left * rep * right with left in the parabolic of
// corank r (lower for the Bar side, upper for Plain), and right in the
// balanced level subgroup.  Both memberships and the product identity are
// verified before returning; an element whose stored precision is too low
// to certify the factorization raises ReductionStuck instead of guessing.

struct ReductionResult {
  CosetRep rep;
  Mat left;
  Mat right;
};

ReductionResult reduce_to_rep(const Mat& g, int n, int r, int m,
                              CosetSide side = CosetSide::Bar);

// ---------------------------------------------------------------------------
// Distinctness certificates.
//
// A certificate is a small derivation tree over valuation bands: each step
// records a certified band (and optionally a leading residue mod p) for one
// matrix entry or linear combination, together with how it follows from
// earlier steps.  The final two steps pin the same quantity into
// incompatible bands or incompatible residues, which is the contradiction
// refuting equality of the two cosets.  replay() re-derives every "sum"
// step from its sources with the band combinators and re-checks the clash,
// so a certificate can be validated independently of the code that built
// it.

struct DerivationStep {
  std::string label;   // which entry or combination the step bounds
  ValBand band;        // certified valuation band
  std::int64_t residue = 0;  // leading unit residue mod p (when claimed)
  int res_depth = 0;         // 0: no residue claim; 1: claim mod p
  std::string how;     // "pattern", "structure", "transport" or "sum"
  std::vector<int> uses;                // indices of source steps
  std::vector<std::int64_t> shifts;     // valuation shift applied per source
  std::vector<std::int64_t> coef_res;   // coefficient residue mod p per source
};

struct Derivation {
  int n = 0;
  int m = 0;
  CosetRep a;
  CosetRep b;
  std::vector<DerivationStep> steps;
  int lhs_step = -1;     // the two steps that bound the same quantity
  int rhs_step = -1;
  std::string contradiction;
  bool separable = true;
  std::string note;
};

// Re-derive all composite steps and confirm the final incompatibility.
bool replay(const Derivation& d, std::int64_t p);

// Append a linear-combination step to a derivation under construction.
// The band and the leading residue are recomputed from the cited source
// steps with the same rules the replayer applies, so a builder cannot emit
// a combination the replay would reject.  Returns the new step's index.
int append_sum_step(Derivation& d, const std::string& label,
                    std::vector<int> uses, std::vector<std::int64_t> shifts,
                    std::vector<std::int64_t> coef_res, std::int64_t p);

// Build the certificate separating two enumerated representatives of the
// same family.  Throws PreconditionViolated when the representatives are
// equal, on different sides, on different axes, or outside the level-m
// enumeration.  The only inseparable pair (the untwisted exponent-0 and
// twisted exponent-0 representatives at even level, the latter outside the
// enumeration) is reported with separable == false and the exact identity
// showing the cosets coincide.
Derivation distinctness_certificate(const CosetRep& a, const CosetRep& b,
                                    int n, int m);

}  // namespace padicso
