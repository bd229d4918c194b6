#pragma once

// Multiple-shooting data for a linear two-point boundary value problem:
// the shooting grid, per-segment fundamental matrix and particular solution,
// and the block system M c = q gluing the segments together.
//
// Block layout of M (m block rows of size n):
//
//   [ -X_0    I                      ] [c_0    ]   [ v_0               ]
//   [        -X_1   I                ] [c_1    ]   [ v_1               ]
//   [               ...  ...         ] [ ...   ] = [ ...               ]
//   [                   -X_{m-2}  I  ] [c_{m-2}]   [ v_{m-2}           ]
//   [ B_a                  B_b X_{m-1}] [c_{m-1}]   [ beta - B_b v_{m-1}]

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "msbvp/linalg.hpp"
#include "msbvp/ode.hpp"

namespace msbvp {

// B_a x(a) + B_b x(b) = beta on [t_begin, t_end]
struct BvpProblem {
  LinearOde ode;
  Matrix boundary_a;
  Matrix boundary_b;
  Vector boundary_rhs;
  double t_begin = 0.0;
  double t_end = 1.0;
};

inline void validate(const BvpProblem& p) {
  const std::size_t n = p.ode.dim;
  if (n == 0) throw InvalidArgument("BvpProblem: ode dimension must be >= 1");
  if (!p.ode.coeff || !p.ode.inhom)
    throw InvalidArgument("BvpProblem: missing ode evaluators");
  if (!(p.t_begin < p.t_end))
    throw InvalidArgument("BvpProblem: need t_begin < t_end");
  if (p.boundary_a.rows() != n || p.boundary_a.cols() != n ||
      p.boundary_b.rows() != n || p.boundary_b.cols() != n)
    throw DimensionError("BvpProblem: boundary matrices must be n x n");
  if (p.boundary_rhs.len() != n)
    throw DimensionError("BvpProblem: boundary right-hand side must have length n");
}

// Strictly increasing shooting points. At least two segments are required:
// with a single segment the boundary block and the corner block of M would
// occupy the same block column and the layout degenerates.
class ShootingGrid {
 public:
  explicit ShootingGrid(std::vector<double> points) : points_(std::move(points)) {
    if (points_.size() < 3)
      throw InvalidArgument("ShootingGrid: need at least 2 segments");
    for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
      if (!(points_[i] < points_[i + 1]))
        throw InvalidArgument("ShootingGrid: points must be strictly increasing");
    }
  }

  static ShootingGrid uniform(double a, double b, std::size_t segments) {
    if (!(a < b)) throw InvalidArgument("ShootingGrid: need a < b");
    if (segments < 2)
      throw InvalidArgument("ShootingGrid: need at least 2 segments");
    std::vector<double> pts(segments + 1);
    for (std::size_t i = 0; i <= segments; ++i) {
      pts[i] = a + (b - a) * (static_cast<double>(i) / static_cast<double>(segments));
    }
    pts.front() = a;
    pts.back() = b;
    return ShootingGrid(std::move(pts));
  }

  std::size_t segments() const noexcept { return points_.size() - 1; }
  const std::vector<double>& points() const noexcept { return points_; }

 private:
  std::vector<double> points_;
};

struct SegmentData {
  Matrix fundamental;  // X_j = X(tau_{j+1}; tau_j), regular
  Vector particular;   // v_j = v(tau_{j+1}; tau_j)
  std::size_t index = 0;
};

struct BlockSystem {
  std::vector<SegmentData> segments;  // m entries
  Matrix boundary_a;
  Matrix boundary_b;
  Vector boundary_rhs;
  std::vector<Vector> rhs;    // q_0 .. q_{m-1}
  std::vector<double> points; // shooting grid; empty for synthetic systems
  // integration and assembly cost, kept apart from the solver cost model
  FlopTally offline_tally;

  std::size_t segment_count() const noexcept { return segments.size(); }
  std::size_t dim() const noexcept { return boundary_a.rows(); }
};

namespace detail {

// q_j = v_j for j <= m-2; q_{m-1} = beta - B_b v_{m-1}
inline std::vector<Vector> assemble_rhs(const std::vector<SegmentData>& segments,
                                        const Matrix& boundary_b,
                                        const Vector& boundary_rhs,
                                        FlopTally& tally) {
  const std::size_t m = segments.size();
  std::vector<Vector> rhs;
  rhs.reserve(m);
  for (std::size_t j = 0; j + 1 < m; ++j) rhs.push_back(segments[j].particular);
  rhs.push_back(vec_sub(boundary_rhs,
                        mat_vec(boundary_b, segments[m - 1].particular, tally),
                        tally));
  return rhs;
}

}  // namespace detail

// Assemble a block system from precomputed segment data (synthetic systems
// and tests). No grid is attached, so defect diagnostics that re-integrate
// are unavailable on the result.
inline BlockSystem make_block_system(std::vector<SegmentData> segments,
                                     Matrix boundary_a, Matrix boundary_b,
                                     Vector boundary_rhs) {
  const std::size_t m = segments.size();
  if (m < 2) throw InvalidArgument("make_block_system: need at least 2 segments");
  const std::size_t n = boundary_a.rows();
  if (boundary_a.cols() != n || boundary_b.rows() != n || boundary_b.cols() != n)
    throw DimensionError("make_block_system: boundary matrices must be n x n");
  if (boundary_rhs.len() != n)
    throw DimensionError("make_block_system: boundary rhs must have length n");
  for (std::size_t j = 0; j < m; ++j) {
    const auto& s = segments[j];
    if (s.fundamental.rows() != n || s.fundamental.cols() != n ||
        s.particular.len() != n)
      throw DimensionError("make_block_system: segment " + std::to_string(j) +
                           " has inconsistent dimensions");
  }
  BlockSystem sys{std::move(segments), std::move(boundary_a),
                  std::move(boundary_b), std::move(boundary_rhs),
                  {}, {}, {}};
  sys.rhs = detail::assemble_rhs(sys.segments, sys.boundary_b,
                                 sys.boundary_rhs, sys.offline_tally);
  return sys;
}

// Integrate all segments and assemble the block system.
inline BlockSystem build_segments(const BvpProblem& p, const ShootingGrid& g,
                                  const IntegratorConfig& cfg) {
  validate(p);
  const auto& pts = g.points();
  if (pts.front() != p.t_begin || pts.back() != p.t_end)
    throw InvalidArgument("build_segments: grid must span [t_begin, t_end]");

  const std::size_t m = g.segments();
  BlockSystem sys{{}, p.boundary_a, p.boundary_b, p.boundary_rhs, {}, pts, {}};
  sys.segments.reserve(m);
  for (std::size_t j = 0; j < m; ++j) {
    Matrix x = integrate_fundamental(p.ode, pts[j], pts[j + 1], cfg,
                                     sys.offline_tally);
    try {
      lu_factor(x);  // regularity probe
    } catch (const SingularMatrixError&) {
      throw SingularMatrixError(
          "build_segments: fundamental matrix of segment " + std::to_string(j) +
              " is singular",
          j);
    }
    Vector v = integrate_particular(p.ode, pts[j], pts[j + 1], cfg,
                                    sys.offline_tally);
    sys.segments.push_back(SegmentData{std::move(x), std::move(v), j});
  }
  sys.rhs = detail::assemble_rhs(sys.segments, sys.boundary_b, sys.boundary_rhs,
                                 sys.offline_tally);
  return sys;
}

// Full mn x mn matrix and stacked right-hand side. Oracle path only; the
// production solvers work on the blocks.
inline std::pair<Matrix, Vector> materialize_dense(const BlockSystem& sys) {
  const std::size_t m = sys.segment_count();
  const std::size_t n = sys.dim();
  Matrix full(m * n, m * n);
  for (std::size_t k = 0; k + 1 < m; ++k) {
    const Matrix& x = sys.segments[k].fundamental;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j)
        full(k * n + i, k * n + j) = -x(i, j);
      full(k * n + i, (k + 1) * n + i) = 1.0;
    }
  }
  const Matrix corner = sys.boundary_b * sys.segments[m - 1].fundamental;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      full((m - 1) * n + i, j) = sys.boundary_a(i, j);
      full((m - 1) * n + i, (m - 1) * n + j) = corner(i, j);
    }
  }
  Vector q(m * n);
  for (std::size_t k = 0; k < m; ++k)
    for (std::size_t i = 0; i < n; ++i) q[k * n + i] = sys.rhs[k][i];
  return {std::move(full), std::move(q)};
}

// ||M c - q||_inf computed block-wise; cheap diagnostic used by the solvers.
inline double block_residual(const BlockSystem& sys, const Vector& stacked) {
  const std::size_t m = sys.segment_count();
  const std::size_t n = sys.dim();
  if (stacked.len() != m * n)
    throw DimensionError("block_residual: stacked solution has wrong length");
  auto block = [&](std::size_t k) {
    Vector b(n);
    for (std::size_t i = 0; i < n; ++i) b[i] = stacked[k * n + i];
    return b;
  };
  double best = 0.0;
  for (std::size_t k = 0; k + 1 < m; ++k) {
    const Vector r =
        block(k + 1) - sys.segments[k].fundamental * block(k) - sys.rhs[k];
    best = std::max(best, norm_inf(r));
  }
  const Vector last =
      sys.boundary_a * block(0) +
      sys.boundary_b * (sys.segments[m - 1].fundamental * block(m - 1)) -
      sys.rhs[m - 1];
  return std::max(best, norm_inf(last));
}

struct DefectReport {
  double residual = 0.0;           // ||M c - q||_inf on the dense layout
  double continuity_defect = 0.0;  // max_k ||x_{k-1}(tau_k) - c_k||_inf
  double boundary_defect = 0.0;    // ||B_a x(a) + B_b x(b) - beta||_inf
};

// Numerical verification of the continuity and boundary conditions for a
// candidate stacked solution; re-integrates each segment.
inline DefectReport residual_and_defect(const BlockSystem& sys,
                                        const Vector& stacked,
                                        const BvpProblem& p,
                                        const IntegratorConfig& cfg) {
  const std::size_t m = sys.segment_count();
  const std::size_t n = sys.dim();
  if (stacked.len() != m * n)
    throw DimensionError("residual_and_defect: stacked solution has wrong length");
  if (sys.points.empty())
    throw InvalidArgument(
        "residual_and_defect: system has no grid (synthetic system?)");

  DefectReport out;
  const auto [full, q] = materialize_dense(sys);
  out.residual = norm_inf(full * stacked - q);

  auto block = [&](std::size_t k) {
    Vector b(n);
    for (std::size_t i = 0; i < n; ++i) b[i] = stacked[k * n + i];
    return b;
  };
  for (std::size_t k = 1; k < m; ++k) {
    const Vector reached = evaluate_on_segment(p.ode, sys.points[k - 1],
                                               block(k - 1), sys.points[k], cfg);
    out.continuity_defect =
        std::max(out.continuity_defect, max_abs_diff(reached, block(k)));
  }
  const Vector at_end = evaluate_on_segment(p.ode, sys.points[m - 1],
                                            block(m - 1), sys.points[m], cfg);
  out.boundary_defect = norm_inf(sys.boundary_a * block(0) +
                                 sys.boundary_b * at_end - sys.boundary_rhs);
  return out;
}

}  // namespace msbvp
