#pragma once

// The split odd orthogonal group in its standard matrix realization, with
// its root system of type B: roots as integer coefficient vectors on the
// standard torus characters, one-parameter root subgroups as explicit
// (2n+1) x (2n+1) matrices, Weyl representatives, torus cocharacters, and
// the defining bilinear form.
//
// Index conventions: rows and columns are 1-based; position i pairs with
// i* = 2n+2 - i under the form; column j corresponds to the basis vector
// with index j - n - 1 in [-n, n] (negative indices first, the anisotropic
// vector in the middle).

#include <array>
#include <string>
#include <vector>

#include "padicso/matrix.hpp"

namespace padicso {

// A root is a vector of coefficients on the torus characters; legal shapes
// are (+-1 at one slot) for short roots and (+-1 at two slots) for long
// ones.  Kept as a small value type with structural equality.
struct Root {
  std::vector<int> c;

  static Root diff(int i, int j, int n);   // char_i - char_j  (i != j)
  static Root sum(int i, int j, int n);    // char_i + char_j  (i != j)
  static Root short_root(int l, int n);    // char_l

  Root negated() const;
  bool is_positive() const;  // first nonzero coefficient is +1
  bool is_short() const;
  bool is_long() const;

  // Support: indices with nonzero coefficient, ascending.
  std::vector<int> support() const;

  // Reflection of *this through the hyperplane of alpha.
  Root reflected(const Root& alpha) const;

  // Pairing with a cocharacter written in the dual basis.
  int pair(const std::vector<int>& coweight) const;

  bool operator==(const Root& o) const { return c == o.c; }
  bool operator!=(const Root& o) const { return c != o.c; }

  std::string str() const;               // e.g. "e1-e2", "-e3"
  static Root parse(const std::string& s, int n);
};

// All roots / all positive roots of the rank-n system.
std::vector<Root> all_roots(int n);
std::vector<Root> positive_roots(int n);

// Star involution on 1-based matrix indices.
inline int star(int i, int n) { return 2 * n + 2 - i; }

// 1-based column of the basis vector with index k in [-n, n].
inline int basis_col(int k, int n) { return k + n + 1; }

// Gram matrix of the defining form (antidiagonal ones, 2 in the middle).
Mat gram_matrix(const PrecisionContext& ctx, int n);

// Standard basis vector with index k in [-n, n], as a length-(2n+1) vector.
Vec basis_vector(const PrecisionContext& ctx, int n, int k);

// The defining pairing <u, v> = u^T S v.
PadicScalar form_pair(const PrecisionContext& ctx, int n, const Vec& u,
                      const Vec& v);

// One-parameter root element.
Mat x_elt(const PrecisionContext& ctx, int n, const Root& alpha,
          const PadicScalar& y);

// Weyl representative w_alpha(y) = x_alpha(y) x_{-alpha}(-1/y) x_alpha(y).
Mat w_elt(const PrecisionContext& ctx, int n, const Root& alpha,
          const PadicScalar& y);

// Displaced Weyl representative at level k.  For long roots this is the
// literal w_alpha(pi^{-k}).  For short roots the literal element would move
// by twice the intended amount, so the displaced representative is the
// cocharacter shift (pi^{-k} on the axis of the root) applied to w_alpha(1);
// its nonzero entries off the diagonal are -pi^{-k} and -pi^{k} and it
// squares to the identity.
Mat w_elt_displaced(const PrecisionContext& ctx, int n, const Root& alpha,
                    std::int64_t k);

// Product of the displaced short Weyl elements for the first r axes.
Mat w_block(const PrecisionContext& ctx, int n, int r, std::int64_t m);

// diag(t_1..t_n, 1, t_n^-1..t_1^-1).
Mat torus_diag(const PrecisionContext& ctx, int n,
               const std::vector<PadicScalar>& t);

// The cocharacter sum_i mu_i char_i^* evaluated at pi^k.
Mat pi_coweight(const PrecisionContext& ctx, int n,
                const std::vector<int>& mu, std::int64_t k);

// lambda_r = char_1^* + ... + char_r^* as a coefficient vector.
std::vector<int> lambda_coweight(int n, int r);

// Fast inverse for elements of the group: S^-1 g^T S.
Mat group_inverse(const Mat& g, int n);

// Does g preserve the form and have determinant 1 (to guard depth)?
bool is_in_group(const Mat& g, int n);

// Embedding of the even orthogonal group of rank r into the corners
// (block a at top-left, b top-right, c bottom-left, d bottom-right), fixing
// the middle 2(n-r)+1 coordinates.
Mat embed_corner(const PrecisionContext& ctx, int n, int r, const Mat& h2r);

// Embedding of the odd orthogonal group of rank n-r into the middle block,
// fixing the first and last r coordinates.
Mat embed_middle(const PrecisionContext& ctx, int n, int r, const Mat& hsmall);

}  // namespace padicso
