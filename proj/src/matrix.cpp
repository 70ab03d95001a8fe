#include "padicso/matrix.hpp"

#include <algorithm>
#include <sstream>

namespace padicso {

namespace {

void require_same_ctx(const Mat& a, const Mat& b) {
  if (!a.ctx().same(b.ctx()))
    throw ContextMismatch("matrices from different precision contexts");
}

void require_same_dim(const Mat& a, const Mat& b) {
  if (a.dim() != b.dim())
    throw PreconditionViolated("matrix dimensions disagree");
}

}  // namespace

Mat Mat::identity(const PrecisionContext& ctx, int d) {
  Mat m(ctx, d);
  for (int i = 1; i <= d; ++i) m.at(i, i) = PadicScalar::one(ctx);
  return m;
}

PadicScalar& Mat::at(int i, int j) {
  if (i < 1 || i > d_ || j < 1 || j > d_)
    throw PreconditionViolated("matrix index out of range");
  return a_[static_cast<std::size_t>(i - 1) * d_ + (j - 1)];
}

const PadicScalar& Mat::at(int i, int j) const {
  if (i < 1 || i > d_ || j < 1 || j > d_)
    throw PreconditionViolated("matrix index out of range");
  return a_[static_cast<std::size_t>(i - 1) * d_ + (j - 1)];
}

Mat Mat::operator*(const Mat& rhs) const {
  require_same_ctx(*this, rhs);
  require_same_dim(*this, rhs);
  Mat out(*ctx_, d_);
  for (int i = 1; i <= d_; ++i) {
    for (int j = 1; j <= d_; ++j) {
      PadicScalar s = PadicScalar::zero(*ctx_);
      for (int k = 1; k <= d_; ++k) s = s + at(i, k) * rhs.at(k, j);
      out.at(i, j) = s;
    }
  }
  return out;
}

Mat Mat::operator+(const Mat& rhs) const {
  require_same_ctx(*this, rhs);
  require_same_dim(*this, rhs);
  Mat out(*ctx_, d_);
  for (int i = 1; i <= d_; ++i)
    for (int j = 1; j <= d_; ++j) out.at(i, j) = at(i, j) + rhs.at(i, j);
  return out;
}

Mat Mat::operator-(const Mat& rhs) const {
  require_same_ctx(*this, rhs);
  require_same_dim(*this, rhs);
  Mat out(*ctx_, d_);
  for (int i = 1; i <= d_; ++i)
    for (int j = 1; j <= d_; ++j) out.at(i, j) = at(i, j) - rhs.at(i, j);
  return out;
}

Mat Mat::scaled(const PadicScalar& c) const {
  Mat out(*ctx_, d_);
  for (int i = 1; i <= d_; ++i)
    for (int j = 1; j <= d_; ++j) out.at(i, j) = at(i, j) * c;
  return out;
}

Mat Mat::transpose() const {
  Mat out(*ctx_, d_);
  for (int i = 1; i <= d_; ++i)
    for (int j = 1; j <= d_; ++j) out.at(j, i) = at(i, j);
  return out;
}

Vec Mat::apply(const Vec& v) const {
  if (static_cast<int>(v.size()) != d_)
    throw PreconditionViolated("vector length disagrees with matrix size");
  Vec out;
  out.reserve(static_cast<std::size_t>(d_));
  for (int i = 1; i <= d_; ++i) {
    PadicScalar s = PadicScalar::zero(*ctx_);
    for (int k = 1; k <= d_; ++k)
      s = s + at(i, k) * v[static_cast<std::size_t>(k - 1)];
    out.push_back(s);
  }
  return out;
}

Vec Mat::apply_row(const Vec& v) const {
  if (static_cast<int>(v.size()) != d_)
    throw PreconditionViolated("vector length disagrees with matrix size");
  Vec out;
  out.reserve(static_cast<std::size_t>(d_));
  for (int j = 1; j <= d_; ++j) {
    PadicScalar s = PadicScalar::zero(*ctx_);
    for (int k = 1; k <= d_; ++k)
      s = s + v[static_cast<std::size_t>(k - 1)] * at(k, j);
    out.push_back(s);
  }
  return out;
}

Vec Mat::col(int j) const {
  Vec out;
  for (int i = 1; i <= d_; ++i) out.push_back(at(i, j));
  return out;
}

Vec Mat::row(int i) const {
  Vec out;
  for (int j = 1; j <= d_; ++j) out.push_back(at(i, j));
  return out;
}

std::int64_t Mat::min_val_lower_bound() const {
  std::int64_t m = val_inf;
  for (const PadicScalar& s : a_) m = std::min(m, s.val_lower_bound());
  return m;
}

std::string Mat::str() const {
  std::ostringstream os;
  for (int i = 1; i <= d_; ++i) {
    os << (i == 1 ? "[" : " ");
    for (int j = 1; j <= d_; ++j) os << at(i, j).str() << (j == d_ ? "" : ", ");
    os << (i == d_ ? "]" : "\n");
  }
  return os.str();
}

bool mats_equal(const Mat& a, const Mat& b, std::int64_t scale_cap) {
  require_same_ctx(a, b);
  require_same_dim(a, b);
  for (int i = 1; i <= a.dim(); ++i)
    for (int j = 1; j <= a.dim(); ++j)
      if (!equal_within_guard(a.at(i, j), b.at(i, j), scale_cap)) return false;
  return true;
}

bool mats_congruent(const Mat& a, const Mat& b, std::int64_t k) {
  require_same_ctx(a, b);
  require_same_dim(a, b);
  for (int i = 1; i <= a.dim(); ++i)
    for (int j = 1; j <= a.dim(); ++j)
      if (!congruent_mod(a.at(i, j), b.at(i, j), k)) return false;
  return true;
}

bool is_identity(const Mat& a, std::int64_t scale_cap) {
  return mats_equal(a, Mat::identity(a.ctx(), a.dim()), scale_cap);
}

namespace {

// Shared elimination engine: returns the determinant and, when `invert` is
// set, writes the inverse into `inv_out`.
PadicScalar eliminate(const Mat& a, bool invert, Mat* inv_out) {
  const PrecisionContext& ctx = a.ctx();
  const int d = a.dim();
  Mat work = a;
  Mat aug = Mat::identity(ctx, d);
  PadicScalar detval = PadicScalar::one(ctx);

  for (int col = 1; col <= d; ++col) {
    // Pick the pivot with minimal certified valuation among the remaining
    // rows; entries that are unresolved zero classes cannot be pivots.
    int pivot = -1;
    std::int64_t best = val_inf;
    bool fog = false;
    for (int i = col; i <= d; ++i) {
      const PadicScalar& e = work.at(i, col);
      if (e.is_exact_zero()) continue;
      if (e.is_zero_class()) {
        fog = true;
        continue;
      }
      if (e.val() < best) {
        best = e.val();
        pivot = i;
      }
    }
    if (pivot == -1) {
      if (fog)
        throw PrecisionExhausted(
            "elimination pivot undecidable: column " + std::to_string(col) +
            " is zero to working precision but not exactly");
      throw DivisionByZero("matrix is singular (column " +
                           std::to_string(col) + ")");
    }
    if (pivot != col) {
      for (int j = 1; j <= d; ++j) {
        std::swap(work.at(pivot, j), work.at(col, j));
        std::swap(aug.at(pivot, j), aug.at(col, j));
      }
      detval = -detval;
    }
    const PadicScalar piv = work.at(col, col);
    detval = detval * piv;
    const PadicScalar piv_inv = inv(piv);
    for (int j = 1; j <= d; ++j) {
      work.at(col, j) = work.at(col, j) * piv_inv;
      aug.at(col, j) = aug.at(col, j) * piv_inv;
    }
    for (int i = 1; i <= d; ++i) {
      if (i == col) continue;
      const PadicScalar f = work.at(i, col);
      if (f.is_exact_zero()) continue;
      for (int j = 1; j <= d; ++j) {
        // Clearing a column is cancellation by construction, so the guard
        // tripwire stays out of it; the surviving classes are honest.
        work.at(i, j) = detail::sub_raw(work.at(i, j), f * work.at(col, j));
        aug.at(i, j) = detail::sub_raw(aug.at(i, j), f * aug.at(col, j));
      }
    }
  }
  if (invert) *inv_out = aug;
  return detval;
}

}  // namespace

PadicScalar det(const Mat& a) { return eliminate(a, false, nullptr); }

Mat inverse_general(const Mat& a) {
  Mat out = Mat::identity(a.ctx(), a.dim());
  eliminate(a, true, &out);
  return out;
}

Mat mul_raw(const Mat& a, const Mat& b) {
  const PrecisionContext& ctx = a.ctx();
  if (a.dim() != b.dim()) throw PreconditionViolated("dimension mismatch");
  const int d = a.dim();
  Mat out(ctx, d);
  for (int i = 1; i <= d; ++i)
    for (int j = 1; j <= d; ++j) {
      PadicScalar s = PadicScalar::zero(ctx);
      for (int t = 1; t <= d; ++t)
        s = detail::add_raw(s, a.at(i, t) * b.at(t, j));
      out.at(i, j) = s;
    }
  return out;
}

Vec apply_raw(const Mat& a, const Vec& v) {
  const PrecisionContext& ctx = a.ctx();
  const int d = a.dim();
  if (static_cast<int>(v.size()) != d)
    throw PreconditionViolated("dimension mismatch");
  Vec out(static_cast<std::size_t>(d), PadicScalar::zero(ctx));
  for (int i = 1; i <= d; ++i) {
    PadicScalar s = PadicScalar::zero(ctx);
    for (int t = 1; t <= d; ++t)
      s = detail::add_raw(s, a.at(i, t) * v[static_cast<std::size_t>(t) - 1]);
    out[static_cast<std::size_t>(i) - 1] = s;
  }
  return out;
}

Mat product(const PrecisionContext& ctx, int d, const std::vector<Mat>& fs) {
  Mat out = Mat::identity(ctx, d);
  for (const Mat& f : fs) out = out * f;
  return out;
}

Mat conjugate(const Mat& g, const Mat& h, const Mat& h_inv) {
  return h * g * h_inv;
}

PadicScalar pair_with(const Mat& A, const Vec& u, const Vec& v) {
  return dot(u, A.apply(v));
}

PadicScalar dot(const Vec& u, const Vec& v) {
  if (u.size() != v.size() || u.empty())
    throw PreconditionViolated("dot of vectors with unequal lengths");
  PadicScalar s = PadicScalar::zero(u.front().ctx());
  for (std::size_t k = 0; k < u.size(); ++k) s = s + u[k] * v[k];
  return s;
}

}  // namespace padicso
