#include "padicso/rootdata.hpp"

#include <algorithm>
#include <sstream>

namespace padicso {

namespace {

void check_rank(int n) {
  if (n < 1) throw PreconditionViolated("rank must be >= 1");
}

void check_axis(int i, int n) {
  if (i < 1 || i > n) throw PreconditionViolated("root axis out of range");
}

}  // namespace

Root Root::diff(int i, int j, int n) {
  check_rank(n);
  check_axis(i, n);
  check_axis(j, n);
  if (i == j) throw PreconditionViolated("diff root needs distinct axes");
  Root r;
  r.c.assign(static_cast<std::size_t>(n), 0);
  r.c[static_cast<std::size_t>(i - 1)] = 1;
  r.c[static_cast<std::size_t>(j - 1)] = -1;
  return r;
}

Root Root::sum(int i, int j, int n) {
  check_rank(n);
  check_axis(i, n);
  check_axis(j, n);
  if (i == j) throw PreconditionViolated("sum root needs distinct axes");
  Root r;
  r.c.assign(static_cast<std::size_t>(n), 0);
  r.c[static_cast<std::size_t>(i - 1)] = 1;
  r.c[static_cast<std::size_t>(j - 1)] = 1;
  return r;
}

Root Root::short_root(int l, int n) {
  check_rank(n);
  check_axis(l, n);
  Root r;
  r.c.assign(static_cast<std::size_t>(n), 0);
  r.c[static_cast<std::size_t>(l - 1)] = 1;
  return r;
}

Root Root::negated() const {
  Root r = *this;
  for (int& x : r.c) x = -x;
  return r;
}

bool Root::is_positive() const {
  for (int x : c)
    if (x != 0) return x > 0;
  throw PreconditionViolated("zero vector is not a root");
}

std::vector<int> Root::support() const {
  std::vector<int> s;
  for (int k = 0; k < static_cast<int>(c.size()); ++k)
    if (c[static_cast<std::size_t>(k)] != 0) s.push_back(k + 1);
  return s;
}

bool Root::is_short() const { return support().size() == 1; }
bool Root::is_long() const { return support().size() == 2; }

Root Root::reflected(const Root& alpha) const {
  // beta - 2 (beta, alpha) / (alpha, alpha) * alpha with the Euclidean
  // pairing on coefficient vectors.
  if (c.size() != alpha.c.size())
    throw PreconditionViolated("roots from different ranks");
  int bb = 0, aa = 0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    bb += c[k] * alpha.c[k];
    aa += alpha.c[k] * alpha.c[k];
  }
  Root r = *this;
  for (std::size_t k = 0; k < c.size(); ++k)
    r.c[k] -= 2 * bb * alpha.c[k] / aa;
  return r;
}

int Root::pair(const std::vector<int>& coweight) const {
  if (coweight.size() != c.size())
    throw PreconditionViolated("coweight rank mismatch");
  int s = 0;
  for (std::size_t k = 0; k < c.size(); ++k) s += c[k] * coweight[k];
  return s;
}

std::string Root::str() const {
  std::ostringstream os;
  bool first = true;
  for (int k = 0; k < static_cast<int>(c.size()); ++k) {
    int x = c[static_cast<std::size_t>(k)];
    if (x == 0) continue;
    if (x > 0 && !first) os << "+";
    if (x < 0) os << "-";
    os << "e" << (k + 1);
    first = false;
  }
  return os.str();
}

Root Root::parse(const std::string& s, int n) {
  Root r;
  r.c.assign(static_cast<std::size_t>(n), 0);
  int sign = 1;
  std::size_t pos = 0;
  bool any = false;
  while (pos < s.size()) {
    char ch = s[pos];
    if (ch == '+') {
      sign = 1;
      ++pos;
    } else if (ch == '-') {
      sign = -1;
      ++pos;
    } else if (ch == 'e') {
      ++pos;
      std::size_t start = pos;
      while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos])))
        ++pos;
      if (start == pos) throw ParseError("bad root literal: " + s);
      int axis = std::stoi(s.substr(start, pos - start));
      if (axis < 1 || axis > n) throw ParseError("root axis out of range: " + s);
      r.c[static_cast<std::size_t>(axis - 1)] += sign;
      sign = 1;
      any = true;
    } else {
      throw ParseError("bad character in root literal: " + s);
    }
  }
  if (!any) throw ParseError("empty root literal");
  return r;
}

std::vector<Root> all_roots(int n) {
  std::vector<Root> rs;
  for (const Root& r : positive_roots(n)) {
    rs.push_back(r);
    rs.push_back(r.negated());
  }
  return rs;
}

std::vector<Root> positive_roots(int n) {
  check_rank(n);
  std::vector<Root> rs;
  for (int i = 1; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j) {
      rs.push_back(Root::diff(i, j, n));
      rs.push_back(Root::sum(i, j, n));
    }
  for (int l = 1; l <= n; ++l) rs.push_back(Root::short_root(l, n));
  return rs;
}

Mat gram_matrix(const PrecisionContext& ctx, int n) {
  check_rank(n);
  const int d = 2 * n + 1;
  Mat s(ctx, d);
  for (int i = 1; i <= d; ++i) {
    if (i == n + 1) continue;
    s.at(i, star(i, n)) = PadicScalar::one(ctx);
  }
  s.at(n + 1, n + 1) = PadicScalar::from_int(ctx, 2);
  return s;
}

Vec basis_vector(const PrecisionContext& ctx, int n, int k) {
  if (k < -n || k > n) throw PreconditionViolated("basis index out of range");
  Vec v(static_cast<std::size_t>(2 * n + 1), PadicScalar::zero(ctx));
  v[static_cast<std::size_t>(basis_col(k, n) - 1)] = PadicScalar::one(ctx);
  return v;
}

PadicScalar form_pair(const PrecisionContext& ctx, int n, const Vec& u,
                      const Vec& v) {
  return pair_with(gram_matrix(ctx, n), u, v);
}

Mat x_elt(const PrecisionContext& ctx, int n, const Root& alpha,
          const PadicScalar& y) {
  check_rank(n);
  if (static_cast<int>(alpha.c.size()) != n)
    throw PreconditionViolated("root rank disagrees with group rank");
  const int d = 2 * n + 1;
  Mat g = Mat::identity(ctx, d);
  const std::vector<int> sup = alpha.support();

  if (sup.size() == 1) {
    const int l = sup[0];
    const int cl = alpha.c[static_cast<std::size_t>(l - 1)];
    const PadicScalar two = PadicScalar::from_int(ctx, 2);
    if (cl == 1) {
      g.at(l, n + 1) = -(two * y);
      g.at(n + 1, star(l, n)) = y;
      g.at(l, star(l, n)) = -(y * y);
    } else if (cl == -1) {
      g.at(star(l, n), n + 1) = two * y;
      g.at(n + 1, l) = -y;
      g.at(star(l, n), l) = -(y * y);
    } else {
      throw PreconditionViolated("malformed short root");
    }
    return g;
  }

  if (sup.size() == 2) {
    const int i = sup[0], j = sup[1];
    const int ci = alpha.c[static_cast<std::size_t>(i - 1)];
    const int cj = alpha.c[static_cast<std::size_t>(j - 1)];
    if (ci == 1 && cj == -1) {  // char_i - char_j
      g.at(i, j) = y;
      g.at(star(j, n), star(i, n)) = -y;
    } else if (ci == -1 && cj == 1) {  // transpose of the above
      g.at(j, i) = y;
      g.at(star(i, n), star(j, n)) = -y;
    } else if (ci == 1 && cj == 1) {  // char_i + char_j
      g.at(i, star(j, n)) = y;
      g.at(j, star(i, n)) = -y;
    } else if (ci == -1 && cj == -1) {  // transpose of the above
      g.at(star(j, n), i) = y;
      g.at(star(i, n), j) = -y;
    } else {
      throw PreconditionViolated("malformed long root");
    }
    return g;
  }
  throw PreconditionViolated("not a root of type B");
}

Mat w_elt(const PrecisionContext& ctx, int n, const Root& alpha,
          const PadicScalar& y) {
  // Constructed entry by entry (all entries exact powers of the parameter)
  // rather than as the defining triple product x(y) x_neg(-1/y) x(y); the
  // tests verify that both agree.  Exact off-pattern zeros matter: the
  // reduction pipelines multiply many of these together, and certified-zero
  // floors would otherwise pile up.
  if (static_cast<int>(alpha.c.size()) != n)
    throw PreconditionViolated("root rank disagrees with group rank");
  const int d = 2 * n + 1;
  const PadicScalar yi = inv(y);
  const std::vector<int> sup = alpha.support();

  if (sup.size() == 1) {
    const int l = sup[0];
    Mat w = Mat::identity(ctx, d);
    w.at(l, l) = PadicScalar::zero(ctx);
    w.at(n + 1, n + 1) = PadicScalar::from_int(ctx, -1);
    w.at(star(l, n), star(l, n)) = PadicScalar::zero(ctx);
    if (alpha.c[static_cast<std::size_t>(l - 1)] == 1) {
      w.at(l, star(l, n)) = -(y * y);
      w.at(star(l, n), l) = -(yi * yi);
    } else {
      w.at(l, star(l, n)) = -(yi * yi);
      w.at(star(l, n), l) = -(y * y);
    }
    return w;
  }

  const int i = sup[0], j = sup[1];
  const int ci = alpha.c[static_cast<std::size_t>(i - 1)];
  const int cj = alpha.c[static_cast<std::size_t>(j - 1)];
  Mat w = Mat::identity(ctx, d);
  auto clear_diag = [&](int a) { w.at(a, a) = PadicScalar::zero(ctx); };
  clear_diag(i);
  clear_diag(j);
  clear_diag(star(i, n));
  clear_diag(star(j, n));

  if (ci != cj) {
    // a carries +1, b carries -1: the representative swaps the two axes.
    const int a = ci == 1 ? i : j;
    const int b = ci == 1 ? j : i;
    w.at(a, b) = y;
    w.at(b, a) = -yi;
    w.at(star(b, n), star(a, n)) = -y;
    w.at(star(a, n), star(b, n)) = yi;
    return w;
  }
  if (ci == 1) {
    // char_i + char_j: swap i <-> j*, j <-> i*, signs on rows j and j*.
    w.at(i, star(j, n)) = y;
    w.at(j, star(i, n)) = -y;
    w.at(star(j, n), i) = -yi;
    w.at(star(i, n), j) = yi;
    return w;
  }
  // Negative sum root: the transpose of the positive one, same parameter.
  w.at(star(j, n), i) = y;
  w.at(star(i, n), j) = -y;
  w.at(i, star(j, n)) = -yi;
  w.at(j, star(i, n)) = yi;
  return w;
}

Mat w_elt_displaced(const PrecisionContext& ctx, int n, const Root& alpha,
                    std::int64_t k) {
  if (alpha.is_long())
    return w_elt(ctx, n, alpha, PadicScalar::pi_pow(ctx, -k));
  // Short root: cocharacter shift on the root's axis applied to w_alpha(1).
  std::vector<int> mu(static_cast<std::size_t>(n), 0);
  const int l = alpha.support()[0];
  mu[static_cast<std::size_t>(l - 1)] = alpha.c[static_cast<std::size_t>(l - 1)];
  return pi_coweight(ctx, n, mu, -k) * w_elt(ctx, n, alpha, PadicScalar::one(ctx));
}

Mat w_block(const PrecisionContext& ctx, int n, int r, std::int64_t m) {
  check_axis(r, n);
  Mat g = Mat::identity(ctx, 2 * n + 1);
  for (int j = 1; j <= r; ++j)
    g = g * w_elt_displaced(ctx, n, Root::short_root(j, n), m);
  return g;
}

Mat torus_diag(const PrecisionContext& ctx, int n,
               const std::vector<PadicScalar>& t) {
  check_rank(n);
  if (static_cast<int>(t.size()) != n)
    throw PreconditionViolated("torus needs n parameters");
  Mat g = Mat::identity(ctx, 2 * n + 1);
  for (int i = 1; i <= n; ++i) {
    const PadicScalar& ti = t[static_cast<std::size_t>(i - 1)];
    g.at(i, i) = ti;
    g.at(star(i, n), star(i, n)) = inv(ti);
  }
  return g;
}

Mat pi_coweight(const PrecisionContext& ctx, int n, const std::vector<int>& mu,
                std::int64_t k) {
  if (static_cast<int>(mu.size()) != n)
    throw PreconditionViolated("coweight rank mismatch");
  std::vector<PadicScalar> t;
  for (int i = 0; i < n; ++i)
    t.push_back(PadicScalar::pi_pow(
        ctx, checked_val_add(0, k * mu[static_cast<std::size_t>(i)])));
  return torus_diag(ctx, n, t);
}

std::vector<int> lambda_coweight(int n, int r) {
  check_rank(n);
  check_axis(r, n);
  std::vector<int> mu(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < r; ++i) mu[static_cast<std::size_t>(i)] = 1;
  return mu;
}

Mat group_inverse(const Mat& g, int n) {
  const PrecisionContext& ctx = g.ctx();
  if (g.dim() != 2 * n + 1)
    throw PreconditionViolated("group_inverse dimension mismatch");
  // S^-1 g^T S with S the Gram matrix; S^-1 differs from S only in the
  // middle entry (1/2 instead of 2).
  Mat s = gram_matrix(ctx, n);
  Mat si = s;
  si.at(n + 1, n + 1) = inv(s.at(n + 1, n + 1));
  return si * g.transpose() * s;
}

bool is_in_group(const Mat& g, int n) {
  const PrecisionContext& ctx = g.ctx();
  if (g.dim() != 2 * n + 1) return false;
  // Entries of g^T S g are sums of products of two entries of g, so their
  // classes are only determined to twice the scale of g; compare there.
  const std::int64_t cap =
      2 * std::min<std::int64_t>(0, g.min_val_lower_bound());
  Mat s = gram_matrix(ctx, n);
  if (!mats_equal(mul_raw(mul_raw(g.transpose(), s), g), s, cap)) return false;
  return equal_within_guard(det(g), PadicScalar::one(ctx), cap);
}

Mat embed_corner(const PrecisionContext& ctx, int n, int r, const Mat& h2r) {
  check_rank(n);
  check_axis(r, n);
  if (h2r.dim() != 2 * r)
    throw PreconditionViolated("corner embedding expects a 2r x 2r matrix");
  const int d = 2 * n + 1;
  Mat g = Mat::identity(ctx, d);
  for (int i = 1; i <= r; ++i)
    for (int j = 1; j <= r; ++j) {
      g.at(i, j) = h2r.at(i, j);                          // block a
      g.at(i, d - r + j) = h2r.at(i, r + j);              // block b
      g.at(d - r + i, j) = h2r.at(r + i, j);              // block c
      g.at(d - r + i, d - r + j) = h2r.at(r + i, r + j);  // block d
    }
  return g;
}

Mat embed_middle(const PrecisionContext& ctx, int n, int r, const Mat& hsmall) {
  check_rank(n);
  if (r < 0 || r > n)
    throw PreconditionViolated("middle embedding needs 0 <= r <= n");
  const int ds = 2 * (n - r) + 1;
  if (hsmall.dim() != ds)
    throw PreconditionViolated("middle embedding dimension mismatch");
  Mat g = Mat::identity(ctx, 2 * n + 1);
  for (int i = 1; i <= ds; ++i)
    for (int j = 1; j <= ds; ++j) g.at(r + i, r + j) = hsmall.at(i, j);
  return g;
}

}  // namespace padicso
