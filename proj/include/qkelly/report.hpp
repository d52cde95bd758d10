#pragma once

// Contours, heat maps and CSV export of solver and simulation results.
//
// CSV files are UTF-8 with LF line ends and 17 significant digits, which
// round-trips every double exactly.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "qkelly/core.hpp"
#include "qkelly/grid.hpp"
#include "qkelly/policy.hpp"
#include "qkelly/sim.hpp"
#include "qkelly/solver.hpp"
#include "qkelly/surface.hpp"
#include "qkelly/types.hpp"

namespace qkelly {

struct ContourPoint {
  double xi = 0.0;
  double wealth = 0.0;
};

/// Points of equal utility u at step k, ordered by xi.
struct ContourLine {
  int step = 0;
  double level = 0.0;
  std::vector<ContourPoint> points;
};

/// Contour of U_k = u from the separable value: W(xi) = 2^(u - G_k(xi)).
/// Samples a log-mirrored prior axis of n_points nodes (bumped to the next odd
/// count) so that 0, 1/2 and 1 are always included.
inline ContourLine contour_points(const ValueStack& stack, int k, double u, int n_points) {
  if (k < 0 || k > stack.n_steps()) throw InvalidArgument("step index out of range");
  if (n_points < 3) throw InvalidArgument("a contour needs at least 3 points");
  const XiAxis samples(n_points | 1, XiSpacing::LogMirrored, stack.grid.xi_log_stretch);
  ContourLine line{k, u, {}};
  line.points.reserve(static_cast<std::size_t>(samples.size()));
  for (double xi : samples.nodes()) line.points.push_back({xi, std::exp2(u - stack.g(k, xi))});
  return line;
}

/// Contour of a 2-D surface: for each prior node, the wealth at which U_k
/// crosses u, read with the surface's own interpolation (linear in W, slope 1
/// in log2 W beyond the axis).
inline ContourLine surface_contour(const UtilitySurface& s, int k, double u) {
  if (k < 0 || k > s.n_steps()) throw InvalidArgument("step index out of range");
  const int n_w = s.w_axis.size();
  ContourLine line{k, u, {}};
  for (int j = 0; j < s.xi_axis.size(); ++j) {
    double w;
    const double first = s.at(k, 0, j), last = s.at(k, n_w - 1, j);
    if (u <= first) {
      w = s.w_axis[0] * std::exp2(u - first);
    } else if (u >= last) {
      w = s.w_axis[n_w - 1] * std::exp2(u - last);
    } else {
      int i = 0;
      while (i < n_w - 2 && s.at(k, i + 1, j) < u) ++i;
      const double a = s.at(k, i, j), b = s.at(k, i + 1, j);
      const double t = b > a ? (u - a) / (b - a) : 0.0;
      w = s.w_axis[i] + t * (s.w_axis[i + 1] - s.w_axis[i]);
    }
    line.points.push_back({s.xi_axis[j], w});
  }
  return line;
}

/// Utility over the W x xi product; values[i * xi_nodes.size() + j].
struct HeatMapGrid {
  int step = 0;
  std::vector<double> w_nodes;
  std::vector<double> xi_nodes;
  std::vector<double> values;

  double at(int i, int j) const { return values[static_cast<std::size_t>(i) * xi_nodes.size() + j]; }
};

inline HeatMapGrid heatmap(const ValueStack& stack, int k, const GridSpec& grid) {
  if (k < 0 || k > stack.n_steps()) throw InvalidArgument("step index out of range");
  grid.validate();
  HeatMapGrid h{k, WealthAxis(grid).nodes(), XiAxis(grid).nodes(), {}};
  h.values.reserve(h.w_nodes.size() * h.xi_nodes.size());
  for (double w : h.w_nodes)
    for (double xi : h.xi_nodes) h.values.push_back(query_value(stack, k, Wealth(w), Prior(xi)));
  return h;
}

inline HeatMapGrid heatmap(const UtilitySurface& s, int k) {
  if (k < 0 || k > s.n_steps()) throw InvalidArgument("step index out of range");
  HeatMapGrid h{k, s.w_axis.nodes(), s.xi_axis.nodes(), {}};
  h.values.reserve(h.w_nodes.size() * h.xi_nodes.size());
  for (int i = 0; i < s.w_axis.size(); ++i)
    for (int j = 0; j < s.xi_axis.size(); ++j) h.values.push_back(s.at(k, i, j));
  return h;
}

/// One (xi, delta) row comparing the printed information-angle formula with
/// the numerical maximiser of the expected entropy drop.
struct DiscrepancyRow {
  double xi = 0.0;
  double delta_rad = 0.0;
  std::optional<double> formula_angle;  // absent where the formula is undefined
  double numeric_angle = 0.0;
  std::optional<double> formula_gain;
  double numeric_gain = 0.0;
  std::optional<double> formula_p_up;
  double numeric_p_up = 0.0;
  std::optional<double> axis_offset;  // axis distance between the two angles
};

inline DiscrepancyRow discrepancy_row(Prior xi, Angle delta) {
  DiscrepancyRow r;
  r.xi = xi.value();
  r.delta_rad = delta.rad();
  const Angle numeric = info_gain_angle_numeric(xi, delta);
  r.numeric_angle = numeric.rad();
  r.numeric_gain = expected_entropy_reduction(xi, numeric, delta);
  r.numeric_p_up = spin_up_prob(xi, numeric, delta);
  try {
    const Angle formula = info_gain_angle_formula(xi, delta);
    r.formula_angle = formula.rad();
    r.formula_gain = expected_entropy_reduction(xi, formula, delta);
    r.formula_p_up = spin_up_prob(xi, formula, delta);
    r.axis_offset = axis_distance(formula, numeric);
  } catch (const UndefinedFormula&) {
  }
  return r;
}

inline std::vector<DiscrepancyRow> discrepancy_report(const std::vector<double>& xis,
                                                      const std::vector<double>& deltas_rad) {
  std::vector<DiscrepancyRow> rows;
  for (double d : deltas_rad)
    for (double xi : xis) rows.push_back(discrepancy_row(Prior(xi), Angle::radians(d)));
  return rows;
}

// ---------------------------------------------------------------------------
// CSV

namespace detail {

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fmt17(const std::optional<double>& v) { return v ? fmt17(*v) : std::string(); }

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw IoFailure("malformed number '" + s + "'");
  return v;
}

template <class Writer>
void write_file(const std::filesystem::path& path, Writer&& writer) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoFailure("cannot open " + path.string() + " for writing");
  writer(out);
  out.flush();
  if (!out) throw IoFailure("failed writing " + path.string());
}

}  // namespace detail

/// `step,xi,g_value,alpha_star_rad` for every step; alpha is empty at k = N.
inline void write_value_curves(std::ostream& out, const ValueStack& stack) {
  out << "step,xi,g_value,alpha_star_rad\n";
  for (const auto& c : stack.curves) {
    for (std::size_t j = 0; j < c.xi_nodes.size(); ++j) {
      out << c.step << ',' << detail::fmt17(c.xi_nodes[j]) << ',' << detail::fmt17(c.g_values[j]) << ',';
      if (!c.alpha_policy.empty()) out << detail::fmt17(c.alpha_policy[j]);
      out << '\n';
    }
  }
}

inline void write_value_curves(const std::filesystem::path& path, const ValueStack& stack) {
  detail::write_file(path, [&](std::ostream& o) { write_value_curves(o, stack); });
}

/// Inverse of write_value_curves; curves come back ordered by step.
inline std::vector<ValueCurve> read_value_curves(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "step,xi,g_value,alpha_star_rad")
    throw IoFailure("unexpected value-curve header in " + path.string());
  std::vector<ValueCurve> curves;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != 4) throw IoFailure("value-curve row needs 4 fields: " + line);
    const int step = static_cast<int>(detail::parse_double(cells[0]));
    if (step < 0) throw IoFailure("negative step in " + path.string());
    if (static_cast<std::size_t>(step) >= curves.size()) curves.resize(static_cast<std::size_t>(step) + 1);
    auto& c = curves[step];
    c.step = step;
    c.xi_nodes.push_back(detail::parse_double(cells[1]));
    c.g_values.push_back(detail::parse_double(cells[2]));
    if (!cells[3].empty()) c.alpha_policy.push_back(detail::parse_double(cells[3]));
  }
  return curves;
}

/// `step,xi,alpha_star_rad,fraction,bet_on` for the non-terminal steps.
inline void write_policy_table(std::ostream& out, const ValueStack& stack) {
  out << "step,xi,alpha_star_rad,fraction,bet_on\n";
  for (int k = 0; k < stack.n_steps(); ++k) {
    const auto& c = stack.at(k);
    for (std::size_t j = 0; j < c.xi_nodes.size(); ++j) {
      const auto d = make_decision(Prior(c.xi_nodes[j]), Angle::radians(c.alpha_policy[j]), stack.params.delta);
      out << k << ',' << detail::fmt17(c.xi_nodes[j]) << ',' << detail::fmt17(c.alpha_policy[j]) << ','
          << detail::fmt17(d.fraction) << ',' << to_string(d.bet_on) << '\n';
    }
  }
}

inline void write_policy_table(const std::filesystem::path& path, const ValueStack& stack) {
  detail::write_file(path, [&](std::ostream& o) { write_policy_table(o, stack); });
}

/// `xi,wealth,utility_level,step`
inline void write_contour(std::ostream& out, const ContourLine& line) {
  out << "xi,wealth,utility_level,step\n";
  for (const auto& p : line.points)
    out << detail::fmt17(p.xi) << ',' << detail::fmt17(p.wealth) << ',' << detail::fmt17(line.level) << ','
        << line.step << '\n';
}

inline void write_contour(const std::filesystem::path& path, const ContourLine& line) {
  detail::write_file(path, [&](std::ostream& o) { write_contour(o, line); });
}

/// Header `W\xi,<xi values>`, then one row per wealth node.
inline void write_heatmap(std::ostream& out, const HeatMapGrid& h) {
  out << "W\\xi";
  for (double xi : h.xi_nodes) out << ',' << detail::fmt17(xi);
  out << '\n';
  for (std::size_t i = 0; i < h.w_nodes.size(); ++i) {
    out << detail::fmt17(h.w_nodes[i]);
    for (std::size_t j = 0; j < h.xi_nodes.size(); ++j)
      out << ',' << detail::fmt17(h.at(static_cast<int>(i), static_cast<int>(j)));
    out << '\n';
  }
}

inline void write_heatmap(const std::filesystem::path& path, const HeatMapGrid& h) {
  detail::write_file(path, [&](std::ostream& o) { write_heatmap(o, h); });
}

/// `round,alpha_rad,fraction,bet_on,outcome,posterior,wealth`; rounds are 1-based.
inline void write_trajectory(std::ostream& out, const Trajectory& t) {
  out << "round,alpha_rad,fraction,bet_on,outcome,posterior,wealth\n";
  for (std::size_t r = 0; r < t.rounds.size(); ++r) {
    const auto& x = t.rounds[r];
    out << r + 1 << ',' << detail::fmt17(x.decision.alpha.rad()) << ',' << detail::fmt17(x.decision.fraction) << ','
        << to_string(x.decision.bet_on) << ',' << to_string(x.outcome) << ',' << detail::fmt17(x.posterior.value())
        << ',' << detail::fmt17(x.wealth.value()) << '\n';
  }
}

inline void write_trajectory(const std::filesystem::path& path, const Trajectory& t) {
  detail::write_file(path, [&](std::ostream& o) { write_trajectory(o, t); });
}

/// One row per run: `run,seed,true_state,log2_growth,final_xi,xi_error,outcomes`.
inline void write_batch_runs(std::ostream& out, const BatchStats& s) {
  out << "run,seed,true_state,log2_growth,final_xi,xi_error,outcomes\n";
  for (std::size_t i = 0; i < s.runs.size(); ++i) {
    const auto& r = s.runs[i];
    out << i << ',' << r.seed << ',' << to_string(r.true_state) << ',' << detail::fmt17(r.log2_growth) << ','
        << detail::fmt17(r.final_xi) << ',' << detail::fmt17(r.xi_error) << ',' << r.outcomes << '\n';
  }
}

inline void write_batch_runs(const std::filesystem::path& path, const BatchStats& s) {
  detail::write_file(path, [&](std::ostream& o) { write_batch_runs(o, s); });
}

/// `policy,exact_value,mc_mean,mc_stderr,n_runs`; exact_value is empty when not computed.
inline void write_comparison(std::ostream& out, const std::vector<ComparisonRow>& rows) {
  out << "policy,exact_value,mc_mean,mc_stderr,n_runs\n";
  for (const auto& r : rows)
    out << r.policy << ',' << detail::fmt17(r.exact_value) << ',' << detail::fmt17(r.mc_mean) << ','
        << detail::fmt17(r.mc_stderr) << ',' << r.n_runs << '\n';
}

inline void write_comparison(const std::filesystem::path& path, const std::vector<ComparisonRow>& rows) {
  detail::write_file(path, [&](std::ostream& o) { write_comparison(o, rows); });
}

/// Formula-vs-numeric information angles; empty fields where the formula is undefined.
inline void write_discrepancy(std::ostream& out, const std::vector<DiscrepancyRow>& rows) {
  out << "xi,delta_rad,formula_angle_rad,numeric_angle_rad,formula_entropy_drop,numeric_entropy_drop,"
         "formula_p_up,numeric_p_up,axis_offset_rad\n";
  for (const auto& r : rows)
    out << detail::fmt17(r.xi) << ',' << detail::fmt17(r.delta_rad) << ',' << detail::fmt17(r.formula_angle) << ','
        << detail::fmt17(r.numeric_angle) << ',' << detail::fmt17(r.formula_gain) << ','
        << detail::fmt17(r.numeric_gain) << ',' << detail::fmt17(r.formula_p_up) << ','
        << detail::fmt17(r.numeric_p_up) << ',' << detail::fmt17(r.axis_offset) << '\n';
}

inline void write_discrepancy(const std::filesystem::path& path, const std::vector<DiscrepancyRow>& rows) {
  detail::write_file(path, [&](std::ostream& o) { write_discrepancy(o, rows); });
}

}  // namespace qkelly
