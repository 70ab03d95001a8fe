#pragma once

#include <vector>

#include "padicso/matrix.hpp"
#include "padicso/subgroups.hpp"

namespace padicso {

// Constructive factorizations of the level subgroups and of the whole group.
//
// The central-column sweep writes any element of the level-m stabilizer as an
// ordered product of one-parameter short root elements times a corner element
// fixing the middle basis vector.  Each parameter is produced by one scalar
// Hensel solve against the current central column, so the factorization is an
// algorithm rather than an existence statement, and reassembling the factors
// must reproduce the input on the nose.

struct KDecomposition {
  // Parameters of the positive short factors x_{e_1}(ys[0]) ... x_{e_n}(..)
  // and the negative short factors x_{-e_1}(zs[0]) ... x_{-e_n}(..); the
  // corner remainder h fixes the middle basis vector.  When reversed is set
  // the product is taken with the negative factors first:
  //
  //   reversed = false:   k = X+(ys) * X-(zs) * h
  //   reversed = true:    k = X-(zs) * X+(ys) * h
  std::vector<PadicScalar> ys;
  std::vector<PadicScalar> zs;
  Mat h;
  bool reversed = false;

  explicit KDecomposition(const Mat& h0) : h(h0) {}
};

// Multiply the recorded factors back together in the recorded order.
Mat reassemble(const PrecisionContext& ctx, int n, const KDecomposition& dec);

// Sweep an element of the level-m stabilizer (m >= 1).  Positive parameters
// are integral, negative parameters lie at depth m.  Throws
// DivisibilityFailure when a coefficient violates the depth its slot needs,
// HenselFailure when a stage's quadratic has no integral root, and
// FinalScalarNotOne when the swept matrix does not fix the middle vector.
KDecomposition decompose_K(const Mat& k, int n, int m, bool reversed = false);

// Same factorization for the balanced-depth conjugate subgroup at level
// m >= 1: positive parameters at depth floor(m/2), negative parameters at
// depth (m mod 2) + floor(m/2), remainder in the corner subgroup at level
// m mod 2.
KDecomposition decompose_K0(const Mat& g, int n, int m, bool reversed = false);

// Triangular-times-open factorization g = b * j with b upper triangular and
// j in the level-e open subgroup (e in {0, 1}), computed by clearing the
// last row of g one rank at a time with j-moves.
struct IwasawaPair {
  Mat b;
  Mat j;
};

IwasawaPair iwasawa(const Mat& g, int n, int e);

// Lower-triangular variant g = bbar * j obtained by reflecting through the
// long Weyl block, which exchanges the two triangles and fixes the level
// subgroup.
IwasawaPair iwasawa_bar(const Mat& g, int n, int e);

}  // namespace padicso
