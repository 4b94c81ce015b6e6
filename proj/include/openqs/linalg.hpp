#pragma once

// Dense complex linear algebra for small complex symmetric matrices:
// the bilinear c-product, the Hermitian product, a complex Schur based
// eigensolver and an LU solver.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "openqs/errors.hpp"

namespace openqs {

using cplx = std::complex<double>;
using ComplexVector = std::vector<cplx>;

/// Row-major real matrix with arbitrary shape.
class RealMatrix {
 public:
  RealMatrix() = default;
  RealMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static RealMatrix from_rows(const std::vector<std::vector<double>>& rows) {
    RealMatrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
    for (std::size_t i = 0; i < m.rows_; ++i) {
      if (rows[i].size() != m.cols_) throw DimensionError("ragged rows in RealMatrix::from_rows");
      std::copy(rows[i].begin(), rows[i].end(), m.data_.begin() + static_cast<std::ptrdiff_t>(i * m.cols_));
    }
    return m;
  }

  static RealMatrix diagonal(std::span<const double> d) {
    RealMatrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  bool is_symmetric() const {
    if (!square()) return false;
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = i + 1; j < cols_; ++j)
        if ((*this)(i, j) != (*this)(j, i)) return false;
    return true;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Square row-major complex matrix. The `symmetric` flag is only ever set
/// when entries(i,j) == entries(j,i) holds exactly.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  explicit ComplexMatrix(std::size_t n) : n_(n), data_(n * n) {
    if (n == 0) throw DimensionError("ComplexMatrix dimension must be >= 1");
  }

  static ComplexMatrix identity(std::size_t n) {
    ComplexMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    m.symmetric_ = true;
    return m;
  }

  static ComplexMatrix from_rows(const std::vector<std::vector<cplx>>& rows) {
    ComplexMatrix m(rows.size());
    for (std::size_t i = 0; i < m.n_; ++i) {
      if (rows[i].size() != m.n_) throw DimensionError("ComplexMatrix must be square");
      for (std::size_t j = 0; j < m.n_; ++j) m(i, j) = rows[i][j];
    }
    return m;
  }

  std::size_t n() const noexcept { return n_; }
  bool symmetric() const noexcept { return symmetric_; }

  cplx& operator()(std::size_t i, std::size_t j) {
    symmetric_ = false;
    return data_[i * n_ + j];
  }
  cplx operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  cplx at(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

  /// Flag as symmetric; throws if any pair of mirrored entries differs.
  ComplexMatrix& mark_symmetric() {
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i + 1; j < n_; ++j)
        if (at(i, j) != at(j, i))
          throw InputError("matrix is not symmetric at (" + std::to_string(i) + "," + std::to_string(j) + ")");
    symmetric_ = true;
    return *this;
  }

  /// Replace the matrix by (M + M^T)/2 and flag it symmetric.
  ComplexMatrix& symmetrize() {
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i + 1; j < n_; ++j) {
        const cplx avg = 0.5 * (at(i, j) + at(j, i));
        data_[i * n_ + j] = avg;
        data_[j * n_ + i] = avg;
      }
    symmetric_ = true;
    return *this;
  }

  /// Largest absolute entry; the scale used by every relative tolerance here.
  double max_abs() const {
    double m = 0.0;
    for (const cplx& z : data_) m = std::max(m, std::abs(z));
    return m;
  }

  cplx trace() const {
    cplx t = 0.0;
    for (std::size_t i = 0; i < n_; ++i) t += at(i, i);
    return t;
  }

  bool is_diagonal() const {
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j)
        if (i != j && at(i, j) != cplx{}) return false;
    return true;
  }

  ComplexVector operator*(std::span<const cplx> v) const {
    if (v.size() != n_) throw DimensionError("matrix-vector dimension mismatch");
    ComplexVector r(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      cplx s = 0.0;
      for (std::size_t j = 0; j < n_; ++j) s += at(i, j) * v[j];
      r[i] = s;
    }
    return r;
  }

 private:
  std::size_t n_ = 0;
  std::vector<cplx> data_;
  bool symmetric_ = false;
};

/// Bilinear product sum_k u_k v_k, no conjugation.
inline cplx cproduct(std::span<const cplx> u, std::span<const cplx> v) {
  if (u.size() != v.size()) throw DimensionError("cproduct: dimension mismatch");
  cplx s = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) s += u[k] * v[k];
  return s;
}

/// Hermitian product sum_k conj(u_k) v_k.
inline cplx hproduct(std::span<const cplx> u, std::span<const cplx> v) {
  if (u.size() != v.size()) throw DimensionError("hproduct: dimension mismatch");
  cplx s = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) s += std::conj(u[k]) * v[k];
  return s;
}

inline double norm2(std::span<const cplx> v) {
  double s = 0.0;
  for (const cplx& z : v) s += std::norm(z);
  return std::sqrt(s);
}

/// Max-entry residual ||m v - lambda v|| / ||m||, with ||.|| the Euclidean
/// norm for vectors and v scaled to unit length.
inline double eigen_residual(const ComplexMatrix& m, std::span<const cplx> v, cplx lambda) {
  const ComplexVector mv = m * v;
  double r = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) r += std::norm(mv[i] - lambda * v[i]);
  const double scale = m.max_abs();
  const double nv = norm2(v);
  return scale > 0.0 && nv > 0.0 ? std::sqrt(r) / (scale * nv) : std::sqrt(r);
}

/// Raw right eigenpairs of a complex symmetric matrix.
struct EigenPairs {
  std::vector<cplx> values;
  std::vector<ComplexVector> vectors;  ///< unit Euclidean norm, not c-normalized
  bool defective = false;
  /// Index pairs (i < j) whose eigenvalues and eigenvectors coalesced.
  std::vector<std::pair<std::size_t, std::size_t>> defective_pairs;
  /// Largest relative residual over the non-defective pairs.
  double max_residual = 0.0;
  std::size_t qr_iterations = 0;
};

/// Tolerances of the eigensolver, all relative to ComplexMatrix::max_abs().
struct EigenTolerances {
  /// Eigenvalues closer than this may form a defective pair.
  double coalescence_gap = 1e-6;
  /// ... provided 1 - |<v_i|v_j>| (unit vectors) is below this.
  double collinearity = 1e-10;
  /// Real parts closer than this count as ties when ordering.
  double tie_gap = 1e-12;
};

namespace detail {

struct Givens {
  double c = 1.0;
  cplx s = 0.0;
};

// G = [[c, s], [-conj(s), c]] with G [a; b] = [r; 0].
inline Givens make_givens(cplx a, cplx b) {
  const double aa = std::abs(a);
  const double bb = std::abs(b);
  if (bb == 0.0) return {1.0, 0.0};
  if (aa == 0.0) return {0.0, 1.0};
  const double r = std::hypot(aa, bb);
  return {aa / r, (a / aa) * std::conj(b) / r};
}

class Schur {
 public:
  Schur(const ComplexMatrix& m, std::size_t budget) : n_(m.n()), t_(m.n() * m.n()), q_(m.n() * m.n()) {
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) t(i, j) = m(i, j);
    for (std::size_t i = 0; i < n_; ++i) q(i, i) = 1.0;
    hessenberg();
    iterate(budget);
  }

  std::size_t n() const { return n_; }
  cplx t(std::size_t i, std::size_t j) const { return t_[i * n_ + j]; }
  cplx q(std::size_t i, std::size_t j) const { return q_[i * n_ + j]; }
  std::size_t iterations() const { return iterations_; }

 private:
  cplx& t(std::size_t i, std::size_t j) { return t_[i * n_ + j]; }
  cplx& q(std::size_t i, std::size_t j) { return q_[i * n_ + j]; }

  void hessenberg() {
    if (n_ < 3) return;
    std::vector<cplx> v(n_);
    for (std::size_t k = 0; k + 2 < n_; ++k) {
      double xnorm = 0.0;
      for (std::size_t i = k + 1; i < n_; ++i) xnorm += std::norm(t(i, k));
      xnorm = std::sqrt(xnorm);
      if (xnorm == 0.0) continue;
      const cplx x0 = t(k + 1, k);
      const cplx phase = std::abs(x0) > 0.0 ? x0 / std::abs(x0) : cplx{1.0};
      const cplx alpha = -phase * xnorm;
      std::fill(v.begin(), v.end(), cplx{});
      for (std::size_t i = k + 1; i < n_; ++i) v[i] = t(i, k);
      v[k + 1] -= alpha;
      double vnorm = 0.0;
      for (std::size_t i = k + 1; i < n_; ++i) vnorm += std::norm(v[i]);
      vnorm = std::sqrt(vnorm);
      if (vnorm == 0.0) continue;
      for (std::size_t i = k + 1; i < n_; ++i) v[i] /= vnorm;

      // T <- (I - 2vv*) T (I - 2vv*), Q <- Q (I - 2vv*)
      for (std::size_t c = 0; c < n_; ++c) {
        cplx s = 0.0;
        for (std::size_t r = k + 1; r < n_; ++r) s += std::conj(v[r]) * t(r, c);
        for (std::size_t r = k + 1; r < n_; ++r) t(r, c) -= 2.0 * v[r] * s;
      }
      for (std::size_t r = 0; r < n_; ++r) {
        cplx s = 0.0;
        for (std::size_t c = k + 1; c < n_; ++c) s += t(r, c) * v[c];
        for (std::size_t c = k + 1; c < n_; ++c) t(r, c) -= 2.0 * s * std::conj(v[c]);
        cplx sq = 0.0;
        for (std::size_t c = k + 1; c < n_; ++c) sq += q(r, c) * v[c];
        for (std::size_t c = k + 1; c < n_; ++c) q(r, c) -= 2.0 * sq * std::conj(v[c]);
      }
      for (std::size_t i = k + 2; i < n_; ++i) t(i, k) = 0.0;
    }
  }

  void rotate_rows(std::size_t p, const Givens& g, std::size_t col_from) {
    for (std::size_t j = col_from; j < n_; ++j) {
      const cplx x = t(p, j);
      const cplx y = t(p + 1, j);
      t(p, j) = g.c * x + g.s * y;
      t(p + 1, j) = -std::conj(g.s) * x + g.c * y;
    }
  }

  void rotate_cols(std::size_t p, const Givens& g, std::size_t row_to) {
    for (std::size_t i = 0; i <= row_to; ++i) {
      const cplx x = t(i, p);
      const cplx y = t(i, p + 1);
      t(i, p) = g.c * x + std::conj(g.s) * y;
      t(i, p + 1) = -g.s * x + g.c * y;
    }
    for (std::size_t i = 0; i < n_; ++i) {
      const cplx x = q(i, p);
      const cplx y = q(i, p + 1);
      q(i, p) = g.c * x + std::conj(g.s) * y;
      q(i, p + 1) = -g.s * x + g.c * y;
    }
  }

  cplx wilkinson_shift(std::size_t iu) const {
    const cplx a = t(iu - 1, iu - 1);
    const cplx b = t(iu - 1, iu);
    const cplx c = t(iu, iu - 1);
    const cplx d = t(iu, iu);
    const cplx half = 0.5 * (a - d);
    const cplx disc = std::sqrt(half * half + b * c);
    const cplx mid = 0.5 * (a + d);
    const cplx mu1 = mid + disc;
    const cplx mu2 = mid - disc;
    return std::abs(mu1 - d) <= std::abs(mu2 - d) ? mu1 : mu2;
  }

  void iterate(std::size_t budget) {
    constexpr double eps = std::numeric_limits<double>::epsilon();
    double hnorm = 0.0;
    for (const cplx& z : t_) hnorm = std::max(hnorm, std::abs(z));
    const double tiny = std::max(hnorm, 1.0) * std::numeric_limits<double>::min() / eps;

    std::size_t iu = n_ - 1;
    std::size_t local = 0;
    while (iu > 0) {
      std::size_t il = iu;
      while (il > 0) {
        const double sub = std::abs(t(il, il - 1));
        const double diag = std::abs(t(il - 1, il - 1)) + std::abs(t(il, il));
        if (sub <= eps * diag || sub <= tiny) {
          t(il, il - 1) = 0.0;
          break;
        }
        --il;
      }
      if (il == iu) {
        --iu;
        local = 0;
        continue;
      }
      if (iterations_ >= budget) {
        throw ConvergenceError("complex Schur iteration exceeded " + std::to_string(budget) + " steps",
                               std::abs(t(iu, iu - 1)) / std::max(hnorm, tiny));
      }
      ++iterations_;
      ++local;

      cplx shift = wilkinson_shift(iu);
      if (local == 10 || local == 30) {
        shift = std::abs(t(iu, iu - 1).real()) + (iu >= 2 ? std::abs(t(iu - 1, iu - 2).real()) : 0.0);
        shift += t(iu, iu);
      }

      Givens g = make_givens(t(il, il) - shift, t(il + 1, il));
      rotate_rows(il, g, il);
      rotate_cols(il, g, std::min(il + 2, iu));
      for (std::size_t i = il + 1; i < iu; ++i) {
        g = make_givens(t(i, i - 1), t(i + 1, i - 1));
        rotate_rows(i, g, i - 1);
        t(i + 1, i - 1) = 0.0;
        rotate_cols(i, g, std::min(i + 2, iu));
      }
    }
  }

  std::size_t n_;
  std::vector<cplx> t_;
  std::vector<cplx> q_;
  std::size_t iterations_ = 0;
};

// Order by real part, treating real parts within `tol` as equal and then
// ordering by imaginary part.
inline std::vector<std::size_t> eigen_order(const std::vector<cplx>& values, double tol) {
  std::vector<std::size_t> idx(values.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return values[a].real() < values[b].real(); });
  // insertion pass for near-ties; n is small
  for (std::size_t i = 1; i < idx.size(); ++i) {
    for (std::size_t j = i; j > 0; --j) {
      const cplx& lo = values[idx[j - 1]];
      const cplx& hi = values[idx[j]];
      if (std::abs(hi.real() - lo.real()) <= tol && hi.imag() < lo.imag()) {
        std::swap(idx[j - 1], idx[j]);
      } else {
        break;
      }
    }
  }
  return idx;
}

}  // namespace detail

/// Eigenvalues and right eigenvectors of a complex symmetric matrix.
///
/// Complex Hessenberg reduction followed by single-shift QR; eigenvectors are
/// recovered by back substitution on the Schur form. Eigenvalues come back
/// sorted by real part, then imaginary part. That order is a presentation
/// convention only: it carries no state identity.
///
/// Rounding splits an exactly defective pair by roughly sqrt(eps)*||m||, so a
/// pair is reported as coalesced when its eigenvalues are within
/// `tol.coalescence_gap` *and* its eigenvectors are collinear. Both members
/// of such a pair then carry the pair mean (well conditioned even where the
/// individual eigenvalues are not) and the same eigenvector.
inline EigenPairs eig_complex_symmetric(const ComplexMatrix& m, const EigenTolerances& tol = {}) {
  if (!m.symmetric()) throw InputError("eig_complex_symmetric requires a matrix flagged symmetric");
  const std::size_t n = m.n();
  if (n > 64) throw DimensionError("eig_complex_symmetric supports n <= 64");
  const double scale = m.max_abs();

  EigenPairs out;
  if (scale == 0.0) {
    out.values.assign(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      ComplexVector e(n);
      e[k] = 1.0;
      out.vectors.push_back(std::move(e));
    }
    return out;
  }

  const detail::Schur schur(m, 100 * n * n);
  out.qr_iterations = schur.iterations();

  std::vector<cplx> values(n);
  for (std::size_t k = 0; k < n; ++k) values[k] = schur.t(k, k);

  constexpr double eps = std::numeric_limits<double>::epsilon();
  const double smin = std::max(eps * scale, std::numeric_limits<double>::min());
  std::vector<ComplexVector> vectors(n, ComplexVector(n));
  std::vector<cplx> y(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::fill(y.begin(), y.end(), cplx{});
    y[k] = 1.0;
    for (std::size_t ii = k; ii-- > 0;) {
      cplx s = 0.0;
      for (std::size_t j = ii + 1; j <= k; ++j) s += schur.t(ii, j) * y[j];
      cplx denom = schur.t(ii, ii) - values[k];
      if (std::abs(denom) < smin) denom = smin;
      y[ii] = -s / denom;
      // rescale on growth to stay clear of overflow
      const double big = std::abs(y[ii]);
      if (big > 1e100) {
        for (std::size_t j = ii; j <= k; ++j) y[j] /= big;
      }
    }
    ComplexVector& v = vectors[k];
    for (std::size_t r = 0; r < n; ++r) {
      cplx s = 0.0;
      for (std::size_t j = 0; j <= k; ++j) s += schur.q(r, j) * y[j];
      v[r] = s;
    }
    const double nv = norm2(v);
    for (cplx& z : v) z /= nv;
  }

  const auto order = detail::eigen_order(values, tol.tie_gap * scale);
  for (const std::size_t k : order) {
    out.values.push_back(values[k]);
    out.vectors.push_back(std::move(vectors[k]));
  }

  std::vector<bool> in_pair(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (in_pair[i] || in_pair[j]) continue;
      const double gap = std::abs(out.values[i] - out.values[j]);
      if (gap > tol.coalescence_gap * scale) continue;
      const double overlap = std::abs(hproduct(out.vectors[i], out.vectors[j]));
      const bool collinear = 1.0 - overlap <= tol.collinearity;
      if (collinear) {
        in_pair[i] = in_pair[j] = true;
        const cplx mean = 0.5 * (out.values[i] + out.values[j]);
        out.values[i] = out.values[j] = mean;
        out.vectors[j] = out.vectors[i];
        out.defective_pairs.emplace_back(i, j);
      }
    }
  }
  out.defective = !out.defective_pairs.empty();

  for (std::size_t k = 0; k < n; ++k) {
    if (in_pair[k]) continue;
    out.max_residual = std::max(out.max_residual, eigen_residual(m, out.vectors[k], out.values[k]));
  }
  return out;
}

/// Solve A X = B by LU with partial pivoting; B is n x k row-major.
/// Throws Error when A is singular to working precision.
inline std::vector<cplx> lu_solve(const ComplexMatrix& a, std::vector<cplx> b, std::size_t nrhs) {
  const std::size_t n = a.n();
  if (b.size() != n * nrhs) throw DimensionError("lu_solve: right-hand side has wrong size");
  std::vector<cplx> lu(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) lu[i * n + j] = a(i, j);
  const double scale = a.max_abs();
  constexpr double eps = std::numeric_limits<double>::epsilon();

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::abs(lu[k * n + k]);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double v = std::abs(lu[i * n + k]);
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (best <= eps * scale || best == 0.0) throw Error("lu_solve: singular matrix");
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu[k * n + j], lu[piv * n + j]);
      for (std::size_t j = 0; j < nrhs; ++j) std::swap(b[k * nrhs + j], b[piv * nrhs + j]);
    }
    const cplx inv = 1.0 / lu[k * n + k];
    for (std::size_t i = k + 1; i < n; ++i) {
      const cplx f = lu[i * n + k] * inv;
      if (f == cplx{}) continue;
      for (std::size_t j = k + 1; j < n; ++j) lu[i * n + j] -= f * lu[k * n + j];
      for (std::size_t j = 0; j < nrhs; ++j) b[i * nrhs + j] -= f * b[k * nrhs + j];
    }
  }
  for (std::size_t k = n; k-- > 0;) {
    for (std::size_t j = 0; j < nrhs; ++j) {
      cplx s = b[k * nrhs + j];
      for (std::size_t c = k + 1; c < n; ++c) s -= lu[k * n + c] * b[c * nrhs + j];
      b[k * nrhs + j] = s / lu[k * n + k];
    }
  }
  return b;
}

}  // namespace openqs
