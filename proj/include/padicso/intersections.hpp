#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "padicso/cosets.hpp"
#include "padicso/matrix.hpp"
#include "padicso/subgroups.hpp"

namespace padicso {

// Conjugating the level subgroup by a translated short-root representative
// cuts the corner Levi down to a product that is visible block by block:
// the corner GL factor is pinned to a congruence subgroup whose depth falls
// with the translation exponent, while the middle orthogonal factor is
// pinned to a balanced-level subgroup whose level rises twice as fast.
// This module realizes both directions of that description.  Explicit
// radical corrections certify that every product element survives the
// conjugation, and replayable valuation-band derivations certify that a
// corner block off its congruence class cannot be rescued by any radical
// correction at all.

struct IntersectionSpec {
  int r = 1;  // corner rank of the Levi
  int n = 1;  // rank of the ambient group
  int m = 0;  // level of the conjugated subgroup
  int i = 0;  // translation exponent of the representative
  CosetSide side = CosetSide::Bar;
  int gl_level = 0;  // congruence depth imposed on the corner block
  int so_level = 0;  // stabilizer level imposed on the middle block

  // The translating representative, as an enumeration member (untwisted).
  CosetRep rep() const;
  std::string str() const;
};

// Derive the two block levels from (r, n, m, i, side) and validate the
// exponent range: the lower side admits 0 <= i <= floor(m/2) and imposes
// (floor(m/2) - i, e + 2i); the upper side admits e <= i <= ceil(m/2) and
// imposes (ceil(m/2) - i, 2i - e), where e is the parity of m.  Throws
// PreconditionViolated outside those ranges.
IntersectionSpec intersection_group_spec(int r, int n, int m, int i,
                                         CosetSide side);

// The form-dual of an invertible corner block: the antidiagonal reflection
// of the transposed inverse.  Placing it opposite the corner block is what
// makes the assembled element preserve the form.
Mat gl_dual_block(const Mat& a);

// Assemble the block-diagonal element diag(a, h, dual(a)) at rank n from an
// r x r corner block and a (2(n-r)+1)-dimensional middle block.  For r = n
// pass the 1 x 1 identity as the middle block.
Mat levi_element(const Mat& a, const Mat& h, int n);

// Extract the corner block, or the middle block, back out of a
// block-diagonal element.  middle_block with r = n returns the 1 x 1
// central coordinate.
Mat gl_block(const Mat& g, int n, int r);
Mat middle_block(const Mat& g, int n, int r);

// Test g against the product description: block-diagonal shape with the
// form-dual corner opposite, the corner block against the congruence
// subgroup at gl_level (last-column flavor on the lower side, last-row
// flavor on the upper side), and the middle block against the
// balanced-level subgroup at so_level.  For r = n the middle test reduces
// to the fixed central coordinate.
MembershipReport check_membership(const Mat& g, const IntersectionSpec& spec);

// Produce a radical correction u (lower radical for the lower side, upper
// radical for the upper side) such that s^-1 g u s lands in the
// balanced-level subgroup, where s is the spec's representative.  The
// construction mirrors the product structure: the corner block needs no
// correction; the middle block is split into one-parameter short factors,
// each compensated by a mixed-root element with the translation exponent
// divided out, and a remainder that fixes the central vector and therefore
// commutes with s outright.  The result is verified before it is returned;
// a rejection throws WitnessFailed.
Mat witness_unipotent(const Mat& g, const IntersectionSpec& spec);

// For a block-diagonal g whose corner block is integral with unit
// determinant but breaks the congruence at gl_level, while the middle
// block is clean, derive the contradiction that membership would force.
// The conjugated element's entries obey the level-subgroup bands whatever
// the radical correction, yet the exact identity tying the translated
// central column to the corner deviation pins one entry strictly
// shallower.  The returned derivation replays under replay() at the
// working modulus.  Throws NotApplicable when g satisfies the product
// description, and PreconditionViolated when the violation lies outside
// the certified congruence entries or cannot be resolved to an exact
// depth.
Derivation obstruction_check(const Mat& g, const IntersectionSpec& spec);

// Samplers for the verification harnesses: a random element of the product
// description, and a product element whose corner block is then damaged at
// a random depth short of gl_level (requires gl_level >= 1).  With column
// set, an off-corner entry of the congruence column (row on the upper
// side) is damaged instead; this needs r >= 2.
Mat sample_product_element(const PrecisionContext& ctx,
                           const IntersectionSpec& spec,
                           std::mt19937_64& rng);
Mat sample_obstructed_element(const PrecisionContext& ctx,
                              const IntersectionSpec& spec,
                              std::mt19937_64& rng, bool column = false);

// A random element of the corner parabolic's radical (lower for the lower
// side, upper for the upper side) with parameter valuations drawn from the
// window [lo, hi]: the falsification probes pair these with product and
// near-product elements.
Mat sample_radical(const PrecisionContext& ctx, int n, int r, CosetSide side,
                   std::mt19937_64& rng, int lo = -2, int hi = 2);

}  // namespace padicso
