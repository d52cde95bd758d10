#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qkelly/report.hpp"

using namespace qkelly;
namespace fs = std::filesystem;

namespace {

GridSpec grid(int n_xi = 401, int n_w = 65) {
  GridSpec g;
  g.n_xi = n_xi;
  g.n_w = n_w;
  return g;
}

const ValueStack& stack30() {
  static const ValueStack s = solve_1d(GameParams::from_degrees(30, 6, 0.5), grid());
  return s;
}

fs::path temp_dir() {
  auto d = fs::temp_directory_path() / ("qkelly_report_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()));
  fs::create_directories(d);
  return d;
}

std::vector<std::string> lines_of(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

}  // namespace

TEST(Contour, FinalStepIsFlatAtTwo) {
  const auto line = contour_points(stack30(), 6, 1.0, 101);
  ASSERT_EQ(line.points.size(), 101u);
  for (const auto& p : line.points) EXPECT_EQ(p.wealth, 2.0);
}

TEST(Contour, EndpointAnchorsAndInteriorAboveThem) {
  const auto& s = stack30();
  for (int k = 0; k <= 6; ++k) {
    const auto line = contour_points(s, k, 1.0, 200);
    EXPECT_EQ(line.points.size(), 201u);
    const double anchor = std::exp2(1.0 - (6 - k));
    EXPECT_EQ(line.points.front().xi, 0.0);
    EXPECT_EQ(line.points.back().xi, 1.0);
    EXPECT_NEAR(line.points.front().wealth, anchor, 1e-9 * anchor);
    EXPECT_NEAR(line.points.back().wealth, anchor, 1e-9 * anchor);
    for (const auto& p : line.points) {
      EXPECT_GE(p.wealth, anchor * (1 - 1e-12));
      EXPECT_NEAR(query_value(s, k, Wealth(p.wealth), Prior(p.xi)), 1.0, 1e-9);
      if (p.xi == 0.5 && k < 6) EXPECT_GT(p.wealth, anchor);
    }
  }
}

TEST(Contour, ConsecutiveStepsDoNotCross) {
  const auto& s = stack30();
  for (int k = 0; k < 6; ++k) {
    const auto a = contour_points(s, k, 1.0, 101), b = contour_points(s, k + 1, 1.0, 101);
    for (std::size_t i = 0; i < a.points.size(); ++i) EXPECT_LE(a.points[i].wealth, b.points[i].wealth * (1 + 1e-12));
  }
}

TEST(Contour, SurfaceContourHitsAnchors) {
  const auto params = GameParams::from_degrees(60, 3, 0.5);
  const auto surf = solve_2d_paper(params, grid(51, 129));
  for (int k = 0; k <= 3; ++k) {
    const auto line = surface_contour(surf, k, 1.0);
    EXPECT_NEAR(line.points.front().wealth, std::exp2(1.0 - (3 - k)), 1e-9);
    EXPECT_NEAR(line.points.back().wealth, std::exp2(1.0 - (3 - k)), 1e-9);
  }
}

TEST(HeatMap, TerminalAndAnchorProperties) {
  const auto& s = stack30();
  const auto g = grid(101, 33);
  const auto last = heatmap(s, 6, g), prev = heatmap(s, 5, g);
  ASSERT_EQ(last.w_nodes.size(), 33u);
  ASSERT_EQ(last.xi_nodes.size(), 101u);
  for (int i = 0; i < 33; ++i) {
    for (int j = 0; j < 101; ++j) {
      EXPECT_EQ(last.at(i, j), std::log2(last.w_nodes[i]));
      const double gain = prev.at(i, j) - last.at(i, j);
      EXPECT_GE(gain, -1e-12);
      EXPECT_LE(gain, 1 + 1e-12);
      EXPECT_EQ(prev.at(i, j), query_value(s, 5, Wealth(prev.w_nodes[i]), Prior(prev.xi_nodes[j])));
    }
    EXPECT_NEAR(prev.at(i, 0), std::log2(prev.w_nodes[i]) + 1, 1e-12);
  }
}

TEST(Csv, ValueCurvesRoundTripExactly) {
  const auto& s = stack30();
  const auto path = temp_dir() / "curves.csv";
  write_value_curves(path, s);
  const auto back = read_value_curves(path);
  ASSERT_EQ(back.size(), s.curves.size());
  for (std::size_t k = 0; k < back.size(); ++k) {
    EXPECT_EQ(back[k].step, s.curves[k].step);
    EXPECT_EQ(back[k].xi_nodes, s.curves[k].xi_nodes);
    EXPECT_EQ(back[k].g_values, s.curves[k].g_values);
    EXPECT_EQ(back[k].alpha_policy, s.curves[k].alpha_policy);
  }
  EXPECT_EQ(lines_of(path).front(), "step,xi,g_value,alpha_star_rad");
}

TEST(Csv, ContourAndHeatMapLayout) {
  const auto dir = temp_dir();
  write_contour(dir / "c.csv", contour_points(stack30(), 2, 1.0, 11));
  auto lines = lines_of(dir / "c.csv");
  EXPECT_EQ(lines.front(), "xi,wealth,utility_level,step");
  EXPECT_EQ(lines.size(), 12u);
  EXPECT_EQ(lines[1].substr(0, 2), "0,");

  const auto g = grid(21, 17);
  write_heatmap(dir / "h.csv", heatmap(stack30(), 3, g));
  lines = lines_of(dir / "h.csv");
  ASSERT_EQ(lines.size(), 18u);
  EXPECT_EQ(lines.front().substr(0, 5), "W\\xi,");
  for (const auto& l : lines) EXPECT_EQ(std::count(l.begin(), l.end(), ','), 21);
}

TEST(Csv, PolicyTrajectoryAndComparison) {
  std::ostringstream pol;
  write_policy_table(pol, stack30());
  EXPECT_EQ(pol.str().substr(0, pol.str().find('\n')), "step,xi,alpha_star_rad,fraction,bet_on");

  const auto p = GameParams::from_degrees(30, 3, 0.5);
  std::ostringstream traj;
  write_trajectory(traj, simulate_run(p, MyopicPolicy{}, 4));
  std::istringstream in(traj.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "round,alpha_rad,fraction,bet_on,outcome,posterior,wealth");
  std::getline(in, line);
  EXPECT_EQ(line.substr(0, 2), "1,");

  std::ostringstream cmp;
  write_comparison(cmp, {ComparisonRow{"zerobet", std::nullopt, 0.0, 0.0, 5}});
  EXPECT_EQ(cmp.str(), "policy,exact_value,mc_mean,mc_stderr,n_runs\nzerobet,,0,0,5\n");
}

TEST(Csv, UnwritablePathFails) {
  EXPECT_THROW(write_value_curves(fs::path("/proc/qkelly/none/curves.csv"), stack30()), IoFailure);
  EXPECT_THROW(read_value_curves(fs::path("/nonexistent/curves.csv")), IoFailure);
}

TEST(Discrepancy, RowsAndUndefinedFormula) {
  const auto rows = discrepancy_report({1.0 / 3.0, 0.5}, {pi / 3});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_FALSE(rows[0].formula_angle.has_value());
  ASSERT_TRUE(rows[1].formula_angle.has_value());
  EXPECT_NEAR(*rows[1].formula_angle, 2 * pi / 3, 1e-12);
  EXPECT_NEAR(rows[1].numeric_p_up, 0.5, 1e-9);
  EXPECT_GE(rows[1].numeric_gain, *rows[1].formula_gain);
}
