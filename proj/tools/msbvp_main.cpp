// Benchmark front end: solves registry problems by multiple shooting with the
// condensing, woodbury-update (smw) and dense-reference methods, sweeps the
// stability experiment, and emits the exact flop-model comparison table.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "msbvp/msbvp.hpp"

namespace {

std::vector<msbvp::SolveMethod> parse_methods(const std::string& spec) {
  using msbvp::SolveMethod;
  if (spec == "all") return msbvp::all_methods();
  if (spec == "condensing") return {SolveMethod::condensing};
  if (spec == "smw") return {SolveMethod::smw};
  if (spec == "dense") return {SolveMethod::dense_reference};
  throw CLI::ValidationError("--method",
                             "expected condensing|smw|dense|all, got " + spec);
}

std::pair<std::size_t, std::size_t> parse_range(const std::string& text,
                                                const char* flag) {
  const auto colon = text.find(':');
  if (colon == std::string::npos)
    throw CLI::ValidationError(flag, "expected LO:HI, got " + text);
  try {
    const std::size_t lo = std::stoull(text.substr(0, colon));
    const std::size_t hi = std::stoull(text.substr(colon + 1));
    if (lo > hi) throw CLI::ValidationError(flag, "empty range " + text);
    return {lo, hi};
  } catch (const std::invalid_argument&) {
    throw CLI::ValidationError(flag, "expected LO:HI, got " + text);
  } catch (const std::out_of_range&) {
    throw CLI::ValidationError(flag, "range out of bounds: " + text);
  }
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& text, const char* flag,
                          Parse parse) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(parse(item));
    } catch (const std::exception&) {
      throw CLI::ValidationError(flag, "bad list element '" + item + "'");
    }
  }
  if (out.empty()) throw CLI::ValidationError(flag, "empty list");
  return out;
}

int write_output(const std::string& payload, const std::string& path) {
  if (path.empty()) {
    std::cout << payload;
    return 0;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) {
    std::cerr << "error: cannot open '" << path << "' for writing\n";
    return 2;
  }
  file << payload;
  if (!file.good()) {
    std::cerr << "error: write to '" << path << "' failed\n";
    return 2;
  }
  return 0;
}

std::string emit_flops_csv(const std::vector<msbvp::CostComparison>& cells) {
  std::string out =
      "m,n,condensing_flops,smw_flops,smw_minus_condensing_flops,"
      "smw_closed_form_flops,smw_row_sum_minus_closed_form_flops,"
      "condensing_schedule_flops,condensing_schedule_minus_closed_form_flops\n";
  for (const auto& c : cells) {
    const auto smw = msbvp::predict_flops_smw(c.m, c.n);
    const auto schedule = msbvp::predict_flops_condensing_schedule(c.m, c.n);
    out += std::to_string(c.m) + "," + std::to_string(c.n) + "," +
           msbvp::thirds_to_string(c.condensing_thirds) + "," +
           msbvp::thirds_to_string(c.smw_thirds) + "," +
           msbvp::thirds_to_string(c.difference_thirds) + "," +
           msbvp::thirds_to_string(*smw.closed_form_thirds) + "," +
           msbvp::thirds_to_string(c.smw_thirds - *smw.closed_form_thirds) +
           "," + msbvp::thirds_to_string(schedule.total_thirds) + "," +
           msbvp::thirds_to_string(schedule.total_thirds -
                                   c.condensing_thirds) +
           "\n";
  }
  return out;
}

std::string emit_flops_json(const std::vector<msbvp::CostComparison>& cells) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : cells) {
    const auto smw = msbvp::predict_flops_smw(c.m, c.n);
    const auto schedule = msbvp::predict_flops_condensing_schedule(c.m, c.n);
    arr.push_back({
        {"m", c.m},
        {"n", c.n},
        {"condensing_flops", {{"thirds", c.condensing_thirds}}},
        {"smw_flops", {{"thirds", c.smw_thirds}}},
        {"smw_minus_condensing_flops", {{"thirds", c.difference_thirds}}},
        {"smw_closed_form_flops", {{"thirds", *smw.closed_form_thirds}}},
        {"condensing_schedule_flops", {{"thirds", schedule.total_thirds}}},
    });
  }
  return arr.dump(2) + "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multiple-shooting solver benchmark for linear two-point BVPs"};
  app.require_subcommand(1);

  // solve
  auto* solve = app.add_subcommand("solve", "solve one registry problem");
  std::string solve_problem = "exp";
  std::optional<double> solve_lambda;
  std::size_t solve_m = 4;
  std::size_t solve_steps = 64;
  std::string solve_method = "all";
  std::string solve_format = "csv";
  std::string solve_out;
  solve->add_option("--problem", solve_problem, "registry problem name");
  solve->add_option("--lambda", solve_lambda, "problem parameter");
  solve->add_option("--m", solve_m, "number of shooting segments (>= 2)");
  solve->add_option("--steps", solve_steps, "RK4 steps per segment");
  solve->add_option("--method", solve_method, "condensing|smw|dense|all");
  solve->add_option("--format", solve_format, "csv|json");
  solve->add_option("--out", solve_out, "output path (default stdout)");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "stability sweep (dichotomy)");
  std::string sweep_problem = "dichotomy";
  std::string sweep_lambdas = "5,10,20";
  std::string sweep_ms = "4,8,16";
  std::size_t sweep_steps = 64;
  std::string sweep_format = "csv";
  std::string sweep_out;
  sweep->add_option("--problem", sweep_problem, "must be 'dichotomy'");
  sweep->add_option("--lambdas", sweep_lambdas, "comma list of lambda values");
  sweep->add_option("--ms", sweep_ms, "comma list of segment counts");
  sweep->add_option("--steps", sweep_steps, "RK4 steps per segment");
  sweep->add_option("--format", sweep_format, "csv|json");
  sweep->add_option("--out", sweep_out, "output path (default stdout)");

  // flops
  auto* flops = app.add_subcommand("flops", "flop-model comparison table");
  std::string flops_m_range = "2:128";
  std::string flops_n_range = "1:64";
  std::string flops_format = "csv";
  std::string flops_out;
  flops->add_option("--m-range", flops_m_range, "LO:HI segment counts");
  flops->add_option("--n-range", flops_n_range, "LO:HI system dimensions");
  flops->add_option("--format", flops_format, "csv|json");
  flops->add_option("--out", flops_out, "output path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve) {
      const msbvp::ProblemSpec& spec = msbvp::find_problem(solve_problem);
      const double lambda = solve_lambda.value_or(spec.default_lambda);
      msbvp::IntegratorConfig cfg;
      cfg.steps_per_segment = solve_steps;
      const auto rows = msbvp::run_experiment(
          spec, lambda, solve_m, cfg, parse_methods(solve_method));
      return write_output(msbvp::emit(rows, solve_format), solve_out);
    }

    if (*sweep) {
      if (sweep_problem != "dichotomy") {
        std::cerr << "error: sweep supports only --problem dichotomy\n";
        return 1;
      }
      const auto lambdas = parse_list<double>(
          sweep_lambdas, "--lambdas",
          [](const std::string& s) { return std::stod(s); });
      const auto ms = parse_list<std::size_t>(
          sweep_ms, "--ms",
          [](const std::string& s) { return std::stoull(s); });
      msbvp::IntegratorConfig cfg;
      cfg.steps_per_segment = sweep_steps;
      const msbvp::SweepResult result = msbvp::stability_sweep(lambdas, ms, cfg);
      for (const auto& s : result.summaries) {
        std::cerr << "lambda=" << s.lambda << " m=" << s.m
                  << " cond_N=" << s.cond_n
                  << " err_condensing=" << s.err_condensing
                  << " err_smw=" << s.err_smw << " err_dense=" << s.err_dense
                  << " similarity_ratio=" << s.similarity_ratio << "\n";
      }
      return write_output(msbvp::emit(result.rows, sweep_format), sweep_out);
    }

    if (*flops) {
      const auto [m_lo, m_hi] = parse_range(flops_m_range, "--m-range");
      const auto [n_lo, n_hi] = parse_range(flops_n_range, "--n-range");
      if (m_lo < 2) {
        std::cerr << "error: --m-range must start at 2 or above\n";
        return 1;
      }
      const auto cells = msbvp::compare_methods(m_lo, m_hi, n_lo, n_hi);
      if (flops_format == "json")
        return write_output(emit_flops_json(cells), flops_out);
      if (flops_format != "csv") {
        std::cerr << "error: unknown format '" << flops_format << "'\n";
        return 1;
      }
      return write_output(emit_flops_csv(cells), flops_out);
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const msbvp::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const msbvp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
