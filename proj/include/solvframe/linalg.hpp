#ifndef SOLVFRAME_LINALG_HPP
#define SOLVFRAME_LINALG_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "dual.hpp"

namespace solvframe {

/// Dense vector over an arbitrary scalar ring (double or Dual).
/// Sizes in this library are tiny (Lie algebra dimensions), so
/// everything is plain heap storage with no blocking tricks.
template <class T>
class Vec {
 public:
  Vec() = default;
  explicit Vec(std::size_t n, T fill = T(0)) : d_(n, fill) {}
  Vec(std::initializer_list<T> xs) : d_(xs) {}

  std::size_t size() const { return d_.size(); }
  T& operator[](std::size_t i) { return d_[i]; }
  const T& operator[](std::size_t i) const { return d_[i]; }
  auto begin() { return d_.begin(); }
  auto end() { return d_.end(); }
  auto begin() const { return d_.begin(); }
  auto end() const { return d_.end(); }

  Vec& operator+=(const Vec& o) {
    for (std::size_t i = 0; i < d_.size(); ++i) d_[i] += o[i];
    return *this;
  }
  Vec& operator-=(const Vec& o) {
    for (std::size_t i = 0; i < d_.size(); ++i) d_[i] -= o[i];
    return *this;
  }
  Vec& operator*=(const T& s) {
    for (auto& x : d_) x *= s;
    return *this;
  }

 private:
  std::vector<T> d_;
};

template <class T> Vec<T> operator+(Vec<T> a, const Vec<T>& b) { return a += b; }
template <class T> Vec<T> operator-(Vec<T> a, const Vec<T>& b) { return a -= b; }
template <class T> Vec<T> operator*(Vec<T> a, const T& s) { return a *= s; }
template <class T> Vec<T> operator*(const T& s, Vec<T> a) { return a *= s; }

template <class T>
T dot(const Vec<T>& a, const Vec<T>& b) {
  T s(0);
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

template <class T>
double max_abs(const Vec<T>& a) {
  double m = 0;
  for (const auto& x : a) m = std::max(m, primal_abs(x));
  return m;
}

/// Dense row-major matrix over an arbitrary scalar ring.
template <class T>
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t r, std::size_t c, T fill = T(0)) : r_(r), c_(c), d_(r * c, fill) {}

  static Mat identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  std::size_t rows() const { return r_; }
  std::size_t cols() const { return c_; }
  T& operator()(std::size_t i, std::size_t j) { return d_[i * c_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return d_[i * c_ + j]; }

  Mat& operator+=(const Mat& o) {
    for (std::size_t i = 0; i < d_.size(); ++i) d_[i] += o.d_[i];
    return *this;
  }
  Mat& operator-=(const Mat& o) {
    for (std::size_t i = 0; i < d_.size(); ++i) d_[i] -= o.d_[i];
    return *this;
  }
  Mat& operator*=(const T& s) {
    for (auto& x : d_) x *= s;
    return *this;
  }

  Mat transposed() const {
    Mat t(c_, r_);
    for (std::size_t i = 0; i < r_; ++i)
      for (std::size_t j = 0; j < c_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

 private:
  std::size_t r_ = 0, c_ = 0;
  std::vector<T> d_;
};

template <class T> Mat<T> operator+(Mat<T> a, const Mat<T>& b) { return a += b; }
template <class T> Mat<T> operator-(Mat<T> a, const Mat<T>& b) { return a -= b; }
template <class T> Mat<T> operator*(Mat<T> a, const T& s) { return a *= s; }
template <class T> Mat<T> operator*(const T& s, Mat<T> a) { return a *= s; }

template <class T>
Mat<T> operator*(const Mat<T>& a, const Mat<T>& b) {
  Mat<T> c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const T& aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

template <class T>
Vec<T> operator*(const Mat<T>& a, const Vec<T>& x) {
  Vec<T> y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    T s(0);
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

template <class T>
double max_abs(const Mat<T>& a) {
  double m = 0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) m = std::max(m, primal_abs(a(i, j)));
  return m;
}

/// Row-sum infinity norm of the primal part.
template <class T>
double norm_inf(const Mat<T>& a) {
  double m = 0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += primal_abs(a(i, j));
    m = std::max(m, s);
  }
  return m;
}

/// LU factorization with partial pivoting; pivot comparison is on the
/// primal magnitude so the same code path serves dual-number matrices.
template <class T>
struct Lu {
  Mat<T> lu;
  std::vector<std::size_t> perm;
  int sign = 1;
  bool singular = false;
};

template <class T>
Lu<T> lu_factor(Mat<T> a) {
  const std::size_t n = a.rows();
  Lu<T> f{std::move(a), {}, 1, false};
  f.perm.resize(n);
  for (std::size_t i = 0; i < n; ++i) f.perm[i] = i;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    double best = primal_abs(f.lu(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      double v = primal_abs(f.lu(i, k));
      if (v > best) { best = v; p = i; }
    }
    if (best == 0.0) { f.singular = true; continue; }
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(f.lu(k, j), f.lu(p, j));
      std::swap(f.perm[k], f.perm[p]);
      f.sign = -f.sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      T m = f.lu(i, k) / f.lu(k, k);
      f.lu(i, k) = m;
      for (std::size_t j = k + 1; j < n; ++j) f.lu(i, j) -= m * f.lu(k, j);
    }
  }
  return f;
}

template <class T>
T det(const Mat<T>& a) {
  auto f = lu_factor(a);
  if (f.singular) return T(0);
  T d(f.sign);
  for (std::size_t i = 0; i < a.rows(); ++i) d *= f.lu(i, i);
  return d;
}

template <class T>
Vec<T> lu_solve(const Lu<T>& f, const Vec<T>& b) {
  const std::size_t n = f.lu.rows();
  if (f.singular) throw std::domain_error("lu_solve: singular matrix");
  Vec<T> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    T s = b[f.perm[i]];
    for (std::size_t j = 0; j < i; ++j) s -= f.lu(i, j) * y[j];
    y[i] = s;
  }
  Vec<T> x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    T s = y[ii];
    for (std::size_t j = ii + 1; j < n; ++j) s -= f.lu(ii, j) * x[j];
    x[ii] = s / f.lu(ii, ii);
  }
  return x;
}

template <class T>
Vec<T> solve(const Mat<T>& a, const Vec<T>& b) {
  return lu_solve(lu_factor(a), b);
}

template <class T>
Mat<T> inverse(const Mat<T>& a) {
  const std::size_t n = a.rows();
  auto f = lu_factor(a);
  if (f.singular) throw std::domain_error("inverse: singular matrix");
  Mat<T> inv(n, n);
  Vec<T> e(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) e[i] = T(i == j ? 1 : 0);
    Vec<T> x = lu_solve(f, e);
    for (std::size_t i = 0; i < n; ++i) inv(i, j) = x[i];
  }
  return inv;
}

/// Matrix exponential by scaling-and-squaring with a truncated Taylor
/// series. Entries are assumed desk-scale; anything above 1e3 in
/// magnitude is rejected rather than silently overflowing.
template <class T>
Mat<T> expm(const Mat<T>& m) {
  if (max_abs(m) > 1e3)
    throw std::domain_error("expm: entries exceed 1e3, refusing to exponentiate");
  const std::size_t n = m.rows();
  double nrm = norm_inf(m);
  int s = 0;
  while (nrm > 0.5) { nrm *= 0.5; ++s; }
  Mat<T> x = m;
  if (s > 0) x *= T(std::ldexp(1.0, -s));
  Mat<T> sum = Mat<T>::identity(n);
  Mat<T> term = Mat<T>::identity(n);
  for (int k = 1; k <= 40; ++k) {
    term = term * x;
    term *= T(1.0 / k);
    sum += term;
    if (max_abs(term) < 1e-16 * std::max(1.0, max_abs(sum))) break;
  }
  for (int i = 0; i < s; ++i) sum = sum * sum;
  return sum;
}

/// phi(x) = (1 - e^{-x})/x applied to a matrix, evaluated through the
/// everywhere-convergent series sum_k (-1)^k x^k/(k+1)!. For large
/// arguments the matrix is halved first and rebuilt through the
/// identity phi(2A) = phi(A) (I + e^{-A})/2, which keeps the series in
/// its fast-converging regime without dividing by ad(A).
template <class T>
Mat<T> phi1m(const Mat<T>& m) {
  const std::size_t n = m.rows();
  int s = 0;
  double nrm = norm_inf(m);
  while (nrm > 1.0) { nrm *= 0.5; ++s; }
  Mat<T> x = m;
  if (s > 0) x *= T(std::ldexp(1.0, -s));
  Mat<T> sum = Mat<T>::identity(n);
  Mat<T> term = Mat<T>::identity(n);
  double sgn = 1.0;
  for (int k = 1; k <= 40; ++k) {
    term = term * x;
    term *= T(1.0 / (k + 1));
    sgn = -sgn;
    Mat<T> contrib = term;
    contrib *= T(sgn);
    sum += contrib;
    if (max_abs(term) < 1e-17 * std::max(1.0, max_abs(sum))) break;
  }
  if (s > 0) {
    Mat<T> e = expm(Mat<T>(x) *= T(-1.0));
    for (int i = 0; i < s; ++i) {
      sum = sum * (Mat<T>::identity(n) + e);
      sum *= T(0.5);
      e = e * e;
    }
  }
  return sum;
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
inline std::vector<double> symmetric_eigenvalues(Mat<double> a) {
  const std::size_t n = a.rows();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        double theta = (a(q, q) - a(p, p)) / (2 * a(p, q));
        double t = (theta >= 0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1));
        double c = 1 / std::sqrt(t * t + 1), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

/// Singular values via the symmetric eigenproblem of A^T A — adequate
/// for the small Jacobians certified here.
inline std::vector<double> singular_values(const Mat<double>& a) {
  const std::size_t n = a.cols();
  Mat<double> ata(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0;
      for (std::size_t k = 0; k < a.rows(); ++k) s += a(k, i) * a(k, j);
      ata(i, j) = s;
    }
  auto ev = symmetric_eigenvalues(ata);
  std::vector<double> sv(n);
  for (std::size_t i = 0; i < n; ++i) sv[i] = std::sqrt(std::max(0.0, ev[i]));
  std::sort(sv.begin(), sv.end());
  return sv;
}

namespace detail {

inline void hessenberg(Mat<double>& a) {
  const std::size_t n = a.rows();
  for (std::size_t k = 0; k + 2 < n; ++k) {
    double scale = 0;
    for (std::size_t i = k + 1; i < n; ++i) scale += std::abs(a(i, k));
    if (scale == 0) continue;
    std::vector<double> v(n, 0.0);
    double alpha = 0;
    for (std::size_t i = k + 1; i < n; ++i) {
      v[i] = a(i, k) / scale;
      alpha += v[i] * v[i];
    }
    alpha = std::sqrt(alpha);
    if (v[k + 1] < 0) alpha = -alpha;
    v[k + 1] += alpha;
    double vnorm2 = 0;
    for (std::size_t i = k + 1; i < n; ++i) vnorm2 += v[i] * v[i];
    if (vnorm2 == 0) continue;
    // A <- (I - 2 v v^T / v^T v) A (I - 2 v v^T / v^T v)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0;
      for (std::size_t i = k + 1; i < n; ++i) s += v[i] * a(i, j);
      s = 2 * s / vnorm2;
      for (std::size_t i = k + 1; i < n; ++i) a(i, j) -= s * v[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0;
      for (std::size_t j = k + 1; j < n; ++j) s += a(i, j) * v[j];
      s = 2 * s / vnorm2;
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= s * v[j];
    }
  }
}

}  // namespace detail

/// Eigenvalues of a general real matrix: Hessenberg reduction followed
/// by the shifted QR iteration, deflating 1x1 and 2x2 trailing blocks.
inline std::vector<std::complex<double>> eigenvalues(Mat<double> a) {
  const std::size_t n = a.rows();
  std::vector<std::complex<double>> ev;
  if (n == 0) return ev;
  detail::hessenberg(a);
  std::size_t hi = n;  // active block is a[0..hi)
  int iter_budget = 60 * static_cast<int>(n);
  auto scale0 = std::max(1.0, max_abs(a));
  while (hi > 0 && iter_budget-- > 0) {
    // deflate tiny subdiagonals
    for (std::size_t i = hi; i-- > 1;) {
      if (std::abs(a(i, i - 1)) <
          1e-14 * (std::abs(a(i, i)) + std::abs(a(i - 1, i - 1)) + scale0 * 1e-3))
        a(i, i - 1) = 0.0;
    }
    if (hi == 1 || a(hi - 1, hi - 2) == 0.0) {
      ev.emplace_back(a(hi - 1, hi - 1), 0.0);
      hi -= 1;
      continue;
    }
    if (hi == 2 || a(hi - 2, hi - 3) == 0.0) {
      double p = a(hi - 2, hi - 2), q = a(hi - 2, hi - 1);
      double r = a(hi - 1, hi - 2), s = a(hi - 1, hi - 1);
      double tr = p + s, dd = p * s - q * r;
      double disc = tr * tr / 4 - dd;
      if (disc >= 0) {
        double rt = std::sqrt(disc);
        ev.emplace_back(tr / 2 + rt, 0.0);
        ev.emplace_back(tr / 2 - rt, 0.0);
      } else {
        double im = std::sqrt(-disc);
        ev.emplace_back(tr / 2, im);
        ev.emplace_back(tr / 2, -im);
      }
      hi -= 2;
      continue;
    }
    // Wilkinson shift from the trailing 2x2 of the active block.
    double p = a(hi - 2, hi - 2), q = a(hi - 2, hi - 1);
    double r = a(hi - 1, hi - 2), s = a(hi - 1, hi - 1);
    double tr = p + s, dd = p * s - q * r;
    double disc = tr * tr / 4 - dd;
    double shift;
    if (disc >= 0) {
      double rt = std::sqrt(disc);
      double e1 = tr / 2 + rt, e2 = tr / 2 - rt;
      shift = (std::abs(e1 - s) < std::abs(e2 - s)) ? e1 : e2;
    } else {
      shift = tr / 2;  // complex pair: use the real part
    }
    // One explicit shifted QR step on the active block via Givens.
    std::size_t m = hi;
    std::vector<double> cs(m), sn(m);
    for (std::size_t i = 0; i < m; ++i) a(i, i) -= shift;
    for (std::size_t i = 0; i + 1 < m; ++i) {
      double x = a(i, i), y = a(i + 1, i);
      double rr = std::hypot(x, y);
      double c = rr == 0 ? 1.0 : x / rr, ss = rr == 0 ? 0.0 : y / rr;
      cs[i] = c; sn[i] = ss;
      for (std::size_t j = 0; j < m; ++j) {
        double t1 = a(i, j), t2 = a(i + 1, j);
        a(i, j) = c * t1 + ss * t2;
        a(i + 1, j) = -ss * t1 + c * t2;
      }
    }
    for (std::size_t i = 0; i + 1 < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        double t1 = a(j, i), t2 = a(j, i + 1);
        a(j, i) = cs[i] * t1 + sn[i] * t2;
        a(j, i + 1) = -sn[i] * t1 + cs[i] * t2;
      }
    }
    for (std::size_t i = 0; i < m; ++i) a(i, i) += shift;
  }
  if (hi > 0) {
    // QR ran out of budget; report the remaining diagonal as-is.
    for (std::size_t i = 0; i < hi; ++i) ev.emplace_back(a(i, i), 0.0);
  }
  return ev;
}

}  // namespace solvframe

#endif
