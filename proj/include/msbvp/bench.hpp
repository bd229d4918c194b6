#pragma once

// Problem registry, experiment driver, stability sweep and report emission
// (CSV / JSON).

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "msbvp/costmodel.hpp"
#include "msbvp/linalg.hpp"
#include "msbvp/ode.hpp"
#include "msbvp/shooting.hpp"
#include "msbvp/solvers.hpp"

namespace msbvp {

struct ProblemSpec {
  std::string name;
  std::size_t dim = 1;
  bool uses_lambda = false;
  double default_lambda = 1.0;
  std::function<BvpProblem(double lambda)> build;
  // exact solution x(t); empty when none is known
  std::function<Vector(double lambda, double t)> analytic;
};

// registry problems:
//  constant       x' = 0,              B_a = B_b = I          -> x == beta/2
//  exp            x' = lambda x,       value pinned at t=0    -> e^(lambda t)
//  dichotomy      x1'' = lambda^2 x1,  x1 pinned at both ends -> sinh profile
//                 (fast growing and fast decaying modes coexist; drives the
//                  conditioning of the condensed boundary matrix like cosh)
//  inhomogeneous  x' = 1,              value pinned at t=0    -> beta + t
inline const std::vector<ProblemSpec>& registry() {
  static const std::vector<ProblemSpec> problems = [] {
    std::vector<ProblemSpec> out;

    {
      ProblemSpec p;
      p.name = "constant";
      p.dim = 2;
      p.build = [](double) {
        return BvpProblem{
            LinearOde::homogeneous(2, [](double) { return Matrix(2, 2); }),
            Matrix::identity(2), Matrix::identity(2), Vector{3.0, 3.0}, 0.0,
            1.0};
      };
      p.analytic = [](double, double) { return Vector{1.5, 1.5}; };
      out.push_back(std::move(p));
    }

    {
      ProblemSpec p;
      p.name = "exp";
      p.dim = 1;
      p.uses_lambda = true;
      p.build = [](double lambda) {
        return BvpProblem{
            LinearOde::homogeneous(
                1, [lambda](double) { return Matrix(1, 1, {lambda}); }),
            Matrix(1, 1, {1.0}), Matrix(1, 1, {0.0}), Vector{1.0}, 0.0, 1.0};
      };
      p.analytic = [](double lambda, double t) {
        return Vector{std::exp(lambda * t)};
      };
      out.push_back(std::move(p));
    }

    {
      ProblemSpec p;
      p.name = "dichotomy";
      p.dim = 2;
      p.uses_lambda = true;
      p.default_lambda = 5.0;
      p.build = [](double lambda) {
        if (!(lambda > 0.0))
          throw InvalidArgument("dichotomy: lambda must be positive");
        return BvpProblem{
            LinearOde::homogeneous(2,
                                   [lambda](double) {
                                     return Matrix(2, 2,
                                                   {0.0, 1.0,
                                                    lambda * lambda, 0.0});
                                   }),
            Matrix(2, 2, {1.0, 0.0, 0.0, 0.0}),
            Matrix(2, 2, {0.0, 0.0, 1.0, 0.0}), Vector{1.0, 1.0}, 0.0, 1.0};
      };
      p.analytic = [](double lambda, double t) {
        const double s = std::sinh(lambda);
        const double x1 =
            (std::sinh(lambda * (1.0 - t)) + std::sinh(lambda * t)) / s;
        const double x2 =
            lambda * (std::cosh(lambda * t) - std::cosh(lambda * (1.0 - t))) / s;
        return Vector{x1, x2};
      };
      out.push_back(std::move(p));
    }

    {
      ProblemSpec p;
      p.name = "inhomogeneous";
      p.dim = 2;
      p.build = [](double) {
        return BvpProblem{
            LinearOde{2, [](double) { return Matrix(2, 2); },
                      [](double) { return Vector{1.0, 1.0}; }},
            Matrix::identity(2), Matrix(2, 2), Vector{1.0, 2.0}, 0.0, 1.0};
      };
      p.analytic = [](double, double t) { return Vector{1.0 + t, 2.0 + t}; };
      out.push_back(std::move(p));
    }

    return out;
  }();
  return problems;
}

inline const ProblemSpec& find_problem(const std::string& name) {
  for (const ProblemSpec& p : registry())
    if (p.name == name) return p;
  throw InvalidArgument("unknown problem '" + name + "'");
}

inline constexpr double kAnalyticSelfCheckTol = 1e-8;

// Verifies that the analytic evaluator actually solves its own BVP: the
// boundary condition directly, the ODE by short-interval propagation from
// sampled analytic states (short intervals keep growing modes from swamping
// the comparison). Returns the maximum relative defect.
inline double analytic_self_check(const ProblemSpec& spec, double lambda,
                                  const IntegratorConfig& cfg) {
  if (!spec.analytic)
    throw InvalidArgument("analytic_self_check: no analytic solution");
  IntegratorConfig fine = cfg;  // certify with at least 256 substeps
  fine.steps_per_segment = std::max<std::size_t>(cfg.steps_per_segment, 256);
  const BvpProblem p = spec.build(lambda);
  auto exact = [&](double t) { return spec.analytic(lambda, t); };

  const Vector bc = p.boundary_a * exact(p.t_begin) +
                    p.boundary_b * exact(p.t_end) - p.boundary_rhs;
  double worst = norm_inf(bc) / (1.0 + norm_inf(p.boundary_rhs));

  const double span = p.t_end - p.t_begin;
  const double delta = 0.05 * span;
  for (int i = 0; i < 5; ++i) {
    const double t = p.t_begin + 0.19 * span * i;
    const Vector reached =
        evaluate_on_segment(p.ode, t, exact(t), t + delta, fine);
    const Vector want = exact(t + delta);
    worst = std::max(worst,
                     max_abs_diff(reached, want) / (1.0 + norm_inf(want)));
  }
  return worst;
}

struct ReportRow {
  std::string problem;
  std::string method;
  std::size_t m = 0;
  std::size_t n = 0;
  double lambda = 0.0;
  double residual = std::numeric_limits<double>::quiet_NaN();
  double continuity_defect = std::numeric_limits<double>::quiet_NaN();
  double boundary_defect = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> analytic_error;
  double cond_n = std::numeric_limits<double>::quiet_NaN();
  FlopTally measured_flops;
  FlopTally predicted_flops;
  double wall_time = 0.0;
  std::string status = "ok";
};

inline std::vector<SolveMethod> all_methods() {
  return {SolveMethod::condensing, SolveMethod::smw,
          SolveMethod::dense_reference};
}

// One problem instance, all requested methods. Solver failures become rows
// with an error status, not aborts.
inline std::vector<ReportRow> run_experiment(const ProblemSpec& spec,
                                             double lambda,
                                             std::size_t segments,
                                             const IntegratorConfig& cfg,
                                             const std::vector<SolveMethod>& methods) {
  auto error_rows = [&](const std::string& status) {
    std::vector<ReportRow> rows;
    for (SolveMethod method : methods) {
      ReportRow row;
      row.problem = spec.name;
      row.method = to_string(method);
      row.m = segments;
      row.n = spec.dim;
      row.lambda = lambda;
      row.status = status;
      rows.push_back(std::move(row));
    }
    return rows;
  };

  if (spec.analytic) {
    const double defect = analytic_self_check(spec, lambda, cfg);
    if (!(defect <= kAnalyticSelfCheckTol))
      return error_rows("analytic self-check defect " +
                        detail::format_double(defect) +
                        " exceeds tolerance; the integrator cannot certify "
                        "this parameter regime");
  }
  const BvpProblem p = spec.build(lambda);
  const ShootingGrid grid = ShootingGrid::uniform(p.t_begin, p.t_end, segments);
  std::optional<BlockSystem> built;
  try {
    built = build_segments(p, grid, cfg);
  } catch (const Error& e) {
    return error_rows(e.what());
  }
  const BlockSystem& sys = *built;
  const std::size_t n = sys.dim();

  std::vector<ReportRow> rows;
  rows.reserve(methods.size());
  for (SolveMethod method : methods) {
    ReportRow row;
    row.problem = spec.name;
    row.method = to_string(method);
    row.m = segments;
    row.n = n;
    row.lambda = lambda;
    try {
      FlopTally tally;
      SolveReport report;
      switch (method) {
        case SolveMethod::condensing:
          report = solve_condensing(sys, tally);
          row.predicted_flops =
              predict_flops_condensing_schedule(segments, n).total();
          break;
        case SolveMethod::smw:
          report = solve_smw(sys, tally);
          row.predicted_flops = predict_flops_smw(segments, n).total();
          break;
        case SolveMethod::dense_reference:
          report = solve_dense_reference(sys);
          row.predicted_flops.charge_thirds(
              cost::lu_solve_thirds(segments * n));
          break;
      }
      const DefectReport defects =
          residual_and_defect(sys, report.solution, p, cfg);
      row.residual = defects.residual;
      row.continuity_defect = defects.continuity_defect;
      row.boundary_defect = defects.boundary_defect;
      row.cond_n = report.cond_pivot;
      row.measured_flops = report.tally;
      row.wall_time = report.wall_seconds;
      if (spec.analytic) {
        double err = 0.0;
        for (std::size_t j = 0; j < segments; ++j) {
          const Vector want = spec.analytic(lambda, sys.points[j]);
          err = std::max(err, max_abs_diff(report.segment_value(j, n), want));
        }
        row.analytic_error = err;
      }
    } catch (const Error& e) {
      row.status = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::vector<ReportRow> run_experiment(const std::string& problem,
                                             double lambda,
                                             std::size_t segments,
                                             const IntegratorConfig& cfg,
                                             const std::vector<SolveMethod>& methods) {
  return run_experiment(find_problem(problem), lambda, segments, cfg, methods);
}

struct StabilitySummary {
  double lambda = 0.0;
  std::size_t m = 0;
  double cond_n = std::numeric_limits<double>::quiet_NaN();
  double err_condensing = std::numeric_limits<double>::quiet_NaN();
  double err_smw = std::numeric_limits<double>::quiet_NaN();
  double err_dense = std::numeric_limits<double>::quiet_NaN();
  // max(err_condensing, err_smw) / min(err_condensing, err_smw)
  double similarity_ratio = std::numeric_limits<double>::quiet_NaN();
};

struct SweepResult {
  std::vector<ReportRow> rows;
  std::vector<StabilitySummary> summaries;
};

// Stability experiment on the dichotomy problem: both structured methods
// pivot through the same boundary matrix, so their accuracy is expected to
// degrade together as lambda grows.
inline SweepResult stability_sweep(const std::vector<double>& lambdas,
                                   const std::vector<std::size_t>& ms,
                                   const IntegratorConfig& cfg) {
  const ProblemSpec& spec = find_problem("dichotomy");
  SweepResult out;
  for (double lambda : lambdas) {
    for (std::size_t m : ms) {
      std::vector<ReportRow> rows =
          run_experiment(spec, lambda, m, cfg, all_methods());
      StabilitySummary s;
      s.lambda = lambda;
      s.m = m;
      for (const ReportRow& row : rows) {
        if (row.status != "ok" || !row.analytic_error) continue;
        if (row.method == "condensing") {
          s.err_condensing = *row.analytic_error;
          s.cond_n = row.cond_n;
        } else if (row.method == "smw") {
          s.err_smw = *row.analytic_error;
        } else if (row.method == "dense") {
          s.err_dense = *row.analytic_error;
        }
      }
      if (std::isfinite(s.err_condensing) && std::isfinite(s.err_smw)) {
        const double lo = std::min(s.err_condensing, s.err_smw);
        const double hi = std::max(s.err_condensing, s.err_smw);
        s.similarity_ratio = lo > 0.0
                                 ? hi / lo
                                 : std::numeric_limits<double>::infinity();
      }
      out.summaries.push_back(s);
      for (ReportRow& row : rows) out.rows.push_back(std::move(row));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// emission
// ---------------------------------------------------------------------------

namespace detail {

inline std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += "\"";
  return out;
}

}  // namespace detail

inline const char* report_csv_header() {
  return "problem,method,m,n,lambda,residual,continuity_defect,"
         "boundary_defect,analytic_error,cond_N,measured_flops,"
         "predicted_flops,wall_time,status";
}

inline std::string emit_csv(const std::vector<ReportRow>& rows) {
  std::string out = report_csv_header();
  out += "\n";
  for (const ReportRow& r : rows) {
    std::vector<std::string> fields = {
        r.problem,
        r.method,
        std::to_string(r.m),
        std::to_string(r.n),
        detail::format_double(r.lambda),
        detail::format_double(r.residual),
        detail::format_double(r.continuity_defect),
        detail::format_double(r.boundary_defect),
        r.analytic_error ? detail::format_double(*r.analytic_error) : "",
        detail::format_double(r.cond_n),
        r.measured_flops.to_string(),
        r.predicted_flops.to_string(),
        detail::format_double(r.wall_time),
        r.status,
    };
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out += ",";
      out += detail::csv_quote(fields[i]);
    }
    out += "\n";
  }
  return out;
}

inline std::string emit_json(const std::vector<ReportRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const ReportRow& r : rows) {
    nlohmann::json obj;
    obj["problem"] = r.problem;
    obj["method"] = r.method;
    obj["m"] = r.m;
    obj["n"] = r.n;
    obj["lambda"] = r.lambda;
    obj["residual"] = r.residual;
    obj["continuity_defect"] = r.continuity_defect;
    obj["boundary_defect"] = r.boundary_defect;
    if (r.analytic_error)
      obj["analytic_error"] = *r.analytic_error;
    else
      obj["analytic_error"] = nullptr;
    obj["cond_N"] = r.cond_n;
    obj["measured_flops"] = {{"thirds", r.measured_flops.thirds()}};
    obj["predicted_flops"] = {{"thirds", r.predicted_flops.thirds()}};
    obj["wall_time"] = r.wall_time;
    obj["status"] = r.status;
    arr.push_back(std::move(obj));
  }
  return arr.dump(2) + "\n";
}

inline std::string emit(const std::vector<ReportRow>& rows,
                        const std::string& format) {
  if (format == "csv") return emit_csv(rows);
  if (format == "json") return emit_json(rows);
  throw InvalidArgument("emit: unknown format '" + format + "'");
}

}  // namespace msbvp
