#pragma once

// Dense real matrix/vector kernel with LU factorization and an attached
// flop cost model. The tally charges model costs (e.g. exactly 2/3*n^3 per
// n-by-n solve), not the true operation count of pivoted elimination; counts
// are kept in integer thirds so 2/3*n^3 is exact.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <initializer_list>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace msbvp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class SingularMatrixError : public Error {
 public:
  SingularMatrixError(const std::string& msg, std::size_t step)
      : Error(msg), step_(step) {}
  // elimination column at which the pivot dropped below tolerance
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_ = 0;
};

class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& msg, double t) : Error(msg), t_(t) {}
  double offending_time() const noexcept { return t_; }

 private:
  double t_ = 0.0;
};

// |pivot| <= kPivotTol * ||A||_inf declares the factorization singular.
inline constexpr double kPivotTol = 1e-14;

namespace detail {
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}
}  // namespace detail

// "8" when the count is a whole number of flops, "25/3" otherwise; handles
// negative differences too.
inline std::string thirds_to_string(std::int64_t thirds) {
  if (thirds % 3 == 0) return std::to_string(thirds / 3);
  return std::to_string(thirds) + "/3";
}

// Exact flop count in units of 1/3 flop. Merging two tallies is addition.
class FlopTally {
 public:
  FlopTally() = default;

  void charge_flops(std::int64_t flops) { charge_thirds(3 * flops); }

  void charge_thirds(std::int64_t thirds) {
    if (thirds < 0) throw InvalidArgument("FlopTally: negative charge");
    thirds_ += thirds;
  }

  std::int64_t thirds() const noexcept { return thirds_; }

  FlopTally& operator+=(const FlopTally& other) {
    thirds_ += other.thirds_;
    return *this;
  }

  friend FlopTally operator+(FlopTally a, const FlopTally& b) { return a += b; }
  friend bool operator==(const FlopTally&, const FlopTally&) = default;

  std::string to_string() const { return thirds_to_string(thirds_); }

 private:
  std::int64_t thirds_ = 0;
};

// Model costs (in flops) of the counted primitives.
namespace cost {
inline std::int64_t mat_mul(std::size_t r, std::size_t k, std::size_t c) {
  return 2 * std::int64_t(r) * std::int64_t(k) * std::int64_t(c) -
         std::int64_t(r) * std::int64_t(c);
}
inline std::int64_t mat_vec(std::size_t r, std::size_t c) {
  return 2 * std::int64_t(r) * std::int64_t(c) - std::int64_t(r);
}
inline std::int64_t mat_add(std::size_t r, std::size_t c) {
  return std::int64_t(r) * std::int64_t(c);
}
inline std::int64_t vec_add(std::size_t n) { return std::int64_t(n); }
// model cost of an n-by-n LU solve, in thirds: 3 * (2/3 n^3) = 2 n^3
inline std::int64_t lu_solve_thirds(std::size_t n) {
  return 2 * std::int64_t(n) * std::int64_t(n) * std::int64_t(n);
}
}  // namespace cost

class Vector {
 public:
  explicit Vector(std::size_t len) : entries_(check_len(len), 0.0) {}

  explicit Vector(std::vector<double> entries) : entries_(std::move(entries)) {
    check_len(entries_.size());
    check_finite();
  }

  Vector(std::initializer_list<double> entries)
      : Vector(std::vector<double>(entries)) {}

  std::size_t len() const noexcept { return entries_.size(); }
  double operator[](std::size_t i) const { return entries_[i]; }
  double& operator[](std::size_t i) { return entries_[i]; }
  const std::vector<double>& entries() const noexcept { return entries_; }

 private:
  static std::size_t check_len(std::size_t len) {
    if (len == 0) throw DimensionError("Vector: length must be at least 1");
    return len;
  }
  void check_finite() const {
    for (double v : entries_) {
      if (!std::isfinite(v))
        throw InvalidArgument("Vector: non-finite entry on construction");
    }
  }

  std::vector<double> entries_;
};

class Matrix {
 public:
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), entries_(check_dims(rows, cols), 0.0) {}

  Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
      : rows_(rows), cols_(cols), entries_(std::move(entries)) {
    if (entries_.size() != check_dims(rows, cols))
      throw DimensionError("Matrix: entry count does not match rows*cols");
    check_finite();
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    if (rows.size() == 0) throw DimensionError("Matrix: no rows");
    const std::size_t cols = rows.begin()->size();
    std::vector<double> data;
    data.reserve(rows.size() * cols);
    for (const auto& r : rows) {
      if (r.size() != cols)
        throw DimensionError("Matrix: ragged initializer rows");
      data.insert(data.end(), r.begin(), r.end());
    }
    return Matrix(rows.size(), cols, std::move(data));
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double operator()(std::size_t i, std::size_t j) const {
    return entries_[i * cols_ + j];
  }
  double& operator()(std::size_t i, std::size_t j) {
    return entries_[i * cols_ + j];
  }

  const std::vector<double>& entries() const noexcept { return entries_; }

 private:
  static std::size_t check_dims(std::size_t rows, std::size_t cols) {
    if (rows == 0 || cols == 0)
      throw DimensionError("Matrix: dimensions must be at least 1x1");
    return rows * cols;
  }
  void check_finite() const {
    for (double v : entries_) {
      if (!std::isfinite(v))
        throw InvalidArgument("Matrix: non-finite entry on construction");
    }
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> entries_;
};

inline bool is_finite(const Vector& v) {
  for (double x : v.entries())
    if (!std::isfinite(x)) return false;
  return true;
}

inline bool is_finite(const Matrix& m) {
  for (double x : m.entries())
    if (!std::isfinite(x)) return false;
  return true;
}

inline double norm_inf(const Vector& v) {
  double best = 0.0;
  for (double x : v.entries()) best = std::max(best, std::abs(x));
  return best;
}

inline double norm_inf(const Matrix& m) {
  double best = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) row += std::abs(m(i, j));
    best = std::max(best, row);
  }
  return best;
}

// ---------------------------------------------------------------------------
// untallied arithmetic (diagnostic and test paths)
// ---------------------------------------------------------------------------

inline Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows())
    throw DimensionError("matrix product: inner dimensions disagree (" +
                         std::to_string(a.cols()) + " vs " +
                         std::to_string(b.rows()) + ")");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

inline Vector operator*(const Matrix& a, const Vector& x) {
  if (a.cols() != x.len())
    throw DimensionError("matrix-vector product: dimensions disagree (" +
                         std::to_string(a.cols()) + " vs " +
                         std::to_string(x.len()) + ")");
  Vector out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) acc += a(i, j) * x[j];
    out[i] = acc;
  }
  return out;
}

inline void check_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError(std::string(op) + ": shapes disagree");
}

inline void check_same_len(const Vector& a, const Vector& b, const char* op) {
  if (a.len() != b.len())
    throw DimensionError(std::string(op) + ": lengths disagree");
}

inline Matrix operator+(const Matrix& a, const Matrix& b) {
  check_same_shape(a, b, "matrix addition");
  Matrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = a(i, j) + b(i, j);
  return out;
}

inline Matrix operator-(const Matrix& a, const Matrix& b) {
  check_same_shape(a, b, "matrix subtraction");
  Matrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = a(i, j) - b(i, j);
  return out;
}

inline Matrix operator-(const Matrix& a) {
  Matrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = -a(i, j);
  return out;
}

inline Matrix operator*(double s, const Matrix& a) {
  Matrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = s * a(i, j);
  return out;
}

inline Vector operator+(const Vector& a, const Vector& b) {
  check_same_len(a, b, "vector addition");
  Vector out(a.len());
  for (std::size_t i = 0; i < a.len(); ++i) out[i] = a[i] + b[i];
  return out;
}

inline Vector operator-(const Vector& a, const Vector& b) {
  check_same_len(a, b, "vector subtraction");
  Vector out(a.len());
  for (std::size_t i = 0; i < a.len(); ++i) out[i] = a[i] - b[i];
  return out;
}

inline Vector operator-(const Vector& a) {
  Vector out(a.len());
  for (std::size_t i = 0; i < a.len(); ++i) out[i] = -a[i];
  return out;
}

inline Vector operator*(double s, const Vector& a) {
  Vector out(a.len());
  for (std::size_t i = 0; i < a.len(); ++i) out[i] = s * a[i];
  return out;
}

inline Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

inline Vector column(const Matrix& a, std::size_t j) {
  Vector out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) out[i] = a(i, j);
  return out;
}

inline void set_column(Matrix& a, std::size_t j, const Vector& v) {
  if (v.len() != a.rows())
    throw DimensionError("set_column: length disagrees with row count");
  for (std::size_t i = 0; i < a.rows(); ++i) a(i, j) = v[i];
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  check_same_shape(a, b, "max_abs_diff");
  double best = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      best = std::max(best, std::abs(a(i, j) - b(i, j)));
  return best;
}

inline double max_abs_diff(const Vector& a, const Vector& b) {
  check_same_len(a, b, "max_abs_diff");
  double best = 0.0;
  for (std::size_t i = 0; i < a.len(); ++i)
    best = std::max(best, std::abs(a[i] - b[i]));
  return best;
}

// ---------------------------------------------------------------------------
// tallied kernels
// ---------------------------------------------------------------------------

inline Matrix mat_mul(const Matrix& a, const Matrix& b, FlopTally& tally) {
  Matrix out = a * b;
  tally.charge_flops(cost::mat_mul(a.rows(), a.cols(), b.cols()));
  return out;
}

inline Vector mat_vec(const Matrix& a, const Vector& x, FlopTally& tally) {
  Vector out = a * x;
  tally.charge_flops(cost::mat_vec(a.rows(), a.cols()));
  return out;
}

inline Matrix mat_add(const Matrix& a, const Matrix& b, FlopTally& tally) {
  Matrix out = a + b;
  tally.charge_flops(cost::mat_add(a.rows(), a.cols()));
  return out;
}

inline Matrix mat_sub(const Matrix& a, const Matrix& b, FlopTally& tally) {
  Matrix out = a - b;
  tally.charge_flops(cost::mat_add(a.rows(), a.cols()));
  return out;
}

inline Vector vec_add(const Vector& a, const Vector& b, FlopTally& tally) {
  Vector out = a + b;
  tally.charge_flops(cost::vec_add(a.len()));
  return out;
}

inline Vector vec_sub(const Vector& a, const Vector& b, FlopTally& tally) {
  Vector out = a - b;
  tally.charge_flops(cost::vec_add(a.len()));
  return out;
}

// Scaling is charged like an addition of the same shape. Only the integrator
// path uses these; they are not part of the published solver totals.
inline Vector vec_scale(double s, const Vector& a, FlopTally& tally) {
  Vector out = s * a;
  tally.charge_flops(cost::vec_add(a.len()));
  return out;
}

inline Matrix mat_scale(double s, const Matrix& a, FlopTally& tally) {
  Matrix out = s * a;
  tally.charge_flops(cost::mat_add(a.rows(), a.cols()));
  return out;
}

// ---------------------------------------------------------------------------
// LU factorization with partial pivoting
// ---------------------------------------------------------------------------

struct LuFactorization {
  Matrix lu;                      // unit-lower factors below, upper above
  std::vector<std::size_t> perm;  // row permutation applied to the input

  std::size_t order() const noexcept { return perm.size(); }

  Vector solve(const Vector& b) const {
    const std::size_t n = order();
    if (b.len() != n)
      throw DimensionError("LU solve: right-hand side length disagrees");
    Vector x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[perm[i]];
    // forward substitution (unit lower triangle)
    for (std::size_t i = 1; i < n; ++i) {
      double acc = x[i];
      for (std::size_t j = 0; j < i; ++j) acc -= lu(i, j) * x[j];
      x[i] = acc;
    }
    // back substitution
    for (std::size_t ii = n; ii-- > 0;) {
      double acc = x[ii];
      for (std::size_t j = ii + 1; j < n; ++j) acc -= lu(ii, j) * x[j];
      x[ii] = acc / lu(ii, ii);
    }
    return x;
  }
};

inline LuFactorization lu_factor(const Matrix& a) {
  if (a.rows() != a.cols())
    throw DimensionError("lu_factor: matrix must be square");
  const std::size_t n = a.rows();
  const double tol = kPivotTol * norm_inf(a);
  LuFactorization f{a, std::vector<std::size_t>(n)};
  for (std::size_t i = 0; i < n; ++i) f.perm[i] = i;

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    double best = std::abs(f.lu(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double cand = std::abs(f.lu(i, k));
      if (cand > best) {
        best = cand;
        p = i;
      }
    }
    if (!(best > tol))
      throw SingularMatrixError(
          "lu_factor: pivot " + detail::format_double(best) +
              " below tolerance at elimination step " + std::to_string(k),
          k);
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j)
        std::swap(f.lu(k, j), f.lu(p, j));
      std::swap(f.perm[k], f.perm[p]);
    }
    const double pivot = f.lu(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double l = f.lu(i, k) / pivot;
      f.lu(i, k) = l;
      if (l == 0.0) continue;
      for (std::size_t j = k + 1; j < n; ++j) f.lu(i, j) -= l * f.lu(k, j);
    }
  }
  return f;
}

// Untallied solve for oracle and diagnostic paths.
inline Vector lu_solve(const Matrix& a, const Vector& b) {
  return lu_factor(a).solve(b);
}

// Model-charged solve: exactly 2/3*n^3 flops regardless of the pivoting work.
inline Vector lu_solve(const Matrix& a, const Vector& b, FlopTally& tally) {
  Vector x = lu_solve(a, b);
  tally.charge_thirds(cost::lu_solve_thirds(a.rows()));
  return x;
}

inline Matrix lu_inverse(const Matrix& a) {
  const LuFactorization f = lu_factor(a);
  const std::size_t n = a.rows();
  Matrix inv(n, n);
  Vector e(n);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    set_column(inv, j, f.solve(e));
    e[j] = 0.0;
  }
  return inv;
}

// kappa_inf(A) via the explicit inverse; +inf sentinel when A is singular.
inline double cond_estimate(const Matrix& a) {
  try {
    return norm_inf(a) * norm_inf(lu_inverse(a));
  } catch (const SingularMatrixError&) {
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace msbvp
