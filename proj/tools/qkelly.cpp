// qkelly: solve, simulate and export the spin-measurement Kelly game.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qkelly/qkelly.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Invalid configuration; reported with exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  double delta_deg = 30.0;
  int n_steps = 10;
  double xi0 = 0.5;
  qkelly::GridSpec grid;
  std::string mode = "1d";
  std::uint64_t seed = 1;
  fs::path output_dir = "qkelly-out";
  std::string policy;
  int runs = 10000;
  std::vector<double> levels;
  int trajectories = 5;
  int points = 401;
};

/// Command-line values; unset ones fall back to the config file, then to defaults.
struct Flags {
  std::optional<double> delta_deg;
  std::optional<int> n_steps;
  std::optional<double> xi0;
  std::optional<std::string> mode;
  std::optional<int> n_xi;
  std::optional<int> n_w;
  std::optional<int> n_alpha;
  std::optional<double> alpha_tol;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> policy;
  std::optional<int> runs;
  std::vector<double> levels;
  std::optional<std::string> out;
  std::optional<int> trajectories;
  std::optional<int> points;
  std::string config;
};

template <class T>
void take(const json& j, const char* key, T& dst) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw UsageError(std::string("config key '") + key + "': " + e.what());
  }
}

template <class T>
void take(const std::optional<T>& flag, T& dst) {
  if (flag) dst = *flag;
}

RunConfig resolve(const Flags& f, const std::string& default_policy) {
  RunConfig c;
  c.policy = default_policy;
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw UsageError("cannot read config file " + f.config);
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw UsageError("config file " + f.config + " is not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw UsageError("config file must hold a JSON object");
    static const std::vector<std::string> known = {"delta_deg", "n_steps",    "xi0",         "n_xi",   "n_w",
                                                   "n_alpha_coarse", "alpha_tol", "mode",   "seed",   "output_dir",
                                                   "policy",    "runs",       "levels",      "trajectories", "points"};
    for (const auto& [key, value] : j.items())
      if (std::find(known.begin(), known.end(), key) == known.end())
        throw UsageError("unknown config key '" + key + "'");
    take(j, "delta_deg", c.delta_deg);
    take(j, "n_steps", c.n_steps);
    take(j, "xi0", c.xi0);
    take(j, "n_xi", c.grid.n_xi);
    take(j, "n_w", c.grid.n_w);
    take(j, "n_alpha_coarse", c.grid.n_alpha_coarse);
    take(j, "alpha_tol", c.grid.alpha_tol);
    take(j, "mode", c.mode);
    take(j, "seed", c.seed);
    std::string out;
    take(j, "output_dir", out);
    if (!out.empty()) c.output_dir = out;
    take(j, "policy", c.policy);
    take(j, "runs", c.runs);
    take(j, "levels", c.levels);
    take(j, "trajectories", c.trajectories);
    take(j, "points", c.points);
  }
  take(f.delta_deg, c.delta_deg);
  take(f.n_steps, c.n_steps);
  take(f.xi0, c.xi0);
  take(f.n_xi, c.grid.n_xi);
  take(f.n_w, c.grid.n_w);
  take(f.n_alpha, c.grid.n_alpha_coarse);
  take(f.alpha_tol, c.grid.alpha_tol);
  take(f.mode, c.mode);
  take(f.seed, c.seed);
  take(f.policy, c.policy);
  take(f.runs, c.runs);
  if (!f.levels.empty()) c.levels = f.levels;
  if (f.out) c.output_dir = *f.out;
  take(f.trajectories, c.trajectories);
  take(f.points, c.points);

  if (!(c.delta_deg >= 0.0 && c.delta_deg <= 90.0)) throw UsageError("--delta-deg must lie in [0, 90]");
  if (c.n_steps < 1) throw UsageError("--steps must be at least 1");
  if (!(c.xi0 >= 0.0 && c.xi0 <= 1.0)) throw UsageError("--xi0 must lie in [0, 1]");
  if (c.mode != "1d" && c.mode != "2d" && c.mode != "both") throw UsageError("--mode must be 1d, 2d or both");
  if (c.runs < 1) throw UsageError("--runs must be at least 1");
  if (c.trajectories < 0) throw UsageError("--trajectories must be non-negative");
  if (c.points < 3) throw UsageError("--points must be at least 3");
  for (double u : c.levels)
    if (!std::isfinite(u)) throw UsageError("--levels must be finite");
  try {
    c.grid.validate();
  } catch (const qkelly::InvalidArgument& e) {
    throw UsageError(e.what());
  }
  return c;
}

qkelly::GameParams game(const RunConfig& c) { return qkelly::GameParams::from_degrees(c.delta_deg, c.n_steps, c.xi0); }

void warn_degenerate(const RunConfig& c) {
  if (c.delta_deg == 0.0)
    std::cerr << "warning: delta = 0 makes both states identical; every round is a sure doubling\n";
}

json grid_json(const qkelly::GridSpec& g) {
  return {{"n_xi", g.n_xi},           {"xi_spacing", qkelly::to_string(g.xi_spacing)},
          {"xi_log_stretch", g.xi_log_stretch}, {"n_w", g.n_w},
          {"w_max", g.w_max},         {"w_octaves", g.w_octaves},
          {"n_alpha_coarse", g.n_alpha_coarse}, {"alpha_tol", g.alpha_tol}};
}

json manifest(const std::string& command, const RunConfig& c) {
  return {{"tool", "qkelly"},     {"tool_version", qkelly::version}, {"command", command},
          {"delta_deg", c.delta_deg}, {"n_steps", c.n_steps},          {"xi0", c.xi0},
          {"grid", grid_json(c.grid)}, {"solver_mode", c.mode},        {"files", json::array()}};
}

void write_json(const fs::path& path, const json& j) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw qkelly::IoFailure("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw qkelly::IoFailure("failed writing " + path.string());
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string step_file(const std::string& stem, int k, int n_steps) {
  const int width = static_cast<int>(std::to_string(n_steps).size());
  std::ostringstream s;
  s << stem << "_k" << std::string(width - std::to_string(k).size(), '0') << k << ".csv";
  return s.str();
}

qkelly::PolicySpec parse_policy(const std::string& name, const std::shared_ptr<const qkelly::ValueStack>& stack) {
  if (name == "optimal") return qkelly::OptimalPolicy{stack};
  if (name == "myopic") return qkelly::MyopicPolicy{};
  if (name == "maxinfo") return qkelly::MaxInfoPolicy{};
  if (name == "zerobet") return qkelly::ZeroBetPolicy{};
  if (name.rfind("fixed:", 0) == 0) {
    const std::string deg = name.substr(6);
    char* end = nullptr;
    const double d = std::strtod(deg.c_str(), &end);
    if (deg.empty() || end != deg.c_str() + deg.size() || !std::isfinite(d))
      throw UsageError("bad fixed-angle policy '" + name + "'");
    return qkelly::FixedAnglePolicy{qkelly::Angle::degrees(d)};
  }
  throw UsageError("unknown policy '" + name + "' (optimal, myopic, maxinfo, zerobet, fixed:<deg>)");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::shared_ptr<const qkelly::ValueStack> solve_stack(const RunConfig& c) {
  return std::make_shared<const qkelly::ValueStack>(qkelly::solve_1d(game(c), c.grid));
}

int cmd_solve(const RunConfig& c) {
  warn_degenerate(c);
  const auto params = game(c);
  auto m = manifest("solve", c);
  const fs::path out = c.output_dir;
  std::optional<qkelly::ValueStack> stack;
  if (c.mode != "2d") {
    stack = qkelly::solve_1d(params, c.grid);
    qkelly::write_value_curves(out / "value_curves.csv", *stack);
    qkelly::write_policy_table(out / "policy.csv", *stack);
    m["files"].push_back("value_curves.csv");
    m["files"].push_back("policy.csv");
    const double g0 = stack->g(0, c.xi0);
    m["g0_at_xi0"] = g0;
    std::cout << "G_0(" << g17(c.xi0) << ") = " << g17(g0) << " bits\n";
  }
  if (c.mode != "1d") {
    const auto surface = qkelly::solve_2d_paper(params, c.grid);
    for (int k : {c.n_steps, c.n_steps - 1, 0}) {
      const auto name = step_file("heatmap", k, c.n_steps);
      qkelly::write_heatmap(out / name, qkelly::heatmap(surface, k));
      if (std::find(m["files"].begin(), m["files"].end(), name) == m["files"].end()) m["files"].push_back(name);
    }
    if (stack) {
      const double r = qkelly::separability_residual(surface, *stack);
      m["separability_residual"] = r;
      std::cout << "separability residual = " << g17(r) << '\n';
    }
  }
  write_json(out / "manifest.json", m);
  std::cout << "wrote " << (out / "manifest.json").string() << '\n';
  return 0;
}

int cmd_contours(const RunConfig& c) {
  warn_degenerate(c);
  const auto params = game(c);
  auto m = manifest("contours", c);
  const fs::path out = c.output_dir;
  const auto stack = qkelly::solve_1d(params, c.grid);
  const std::vector<double> levels = c.levels.empty() ? std::vector<double>{std::log2(c.grid.w_max)} : c.levels;
  std::optional<qkelly::UtilitySurface> surface;
  if (c.mode != "1d") surface = qkelly::solve_2d_paper(params, c.grid);
  json contours = json::array();
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const std::string stem = levels.size() == 1 ? "contour" : "contour_u" + std::to_string(l);
    for (int k = 0; k <= c.n_steps; ++k) {
      const auto name = step_file(stem, k, c.n_steps);
      qkelly::write_contour(out / name, qkelly::contour_points(stack, k, levels[l], c.points));
      contours.push_back({{"file", name}, {"step", k}, {"utility_level", levels[l]}, {"source", "1d"}});
      m["files"].push_back(name);
      if (surface) {
        const auto sname = step_file("surface_" + stem, k, c.n_steps);
        qkelly::write_contour(out / sname, qkelly::surface_contour(*surface, k, levels[l]));
        contours.push_back({{"file", sname}, {"step", k}, {"utility_level", levels[l]}, {"source", "2d"}});
        m["files"].push_back(sname);
      }
    }
  }
  m["contours"] = contours;
  write_json(out / "manifest.json", m);
  std::cout << "wrote " << contours.size() << " contour files to " << out.string() << '\n';
  return 0;
}

json stats_json(const qkelly::BatchStats& s, const std::string& policy, const RunConfig& c) {
  return {{"policy", policy},
          {"n_runs", s.n_runs},
          {"base_seed", c.seed},
          {"mean_log2_growth", s.mean_log2_growth},
          {"std_log2_growth", s.std_log2_growth},
          {"stderr_log2_growth", s.stderr_log2_growth},
          {"mean_final_xi_error", s.mean_final_xi_error}};
}

int cmd_simulate(const RunConfig& c) {
  warn_degenerate(c);
  const auto params = game(c);
  const fs::path out = c.output_dir;
  parse_policy(c.policy, nullptr);
  std::shared_ptr<const qkelly::ValueStack> stack;
  if (c.policy == "optimal") stack = solve_stack(c);
  const auto policy = parse_policy(c.policy, stack);
  const auto stats = qkelly::simulate_batch(params, policy, c.runs, c.seed, c.trajectories);
  qkelly::write_batch_runs(out / "runs.csv", stats);
  auto m = manifest("simulate", c);
  m["files"].push_back("runs.csv");
  m["files"].push_back("stats.json");
  for (const auto& t : stats.trajectories) {
    const auto name = "trajectories/run_" + std::to_string(t.run_seed) + ".csv";
    qkelly::write_trajectory(out / name, t);
    m["files"].push_back(name);
  }
  auto js = stats_json(stats, qkelly::policy_name(policy), c);
  if (c.n_steps <= 12) js["exact_value"] = qkelly::evaluate_policy_exact(params, policy);
  write_json(out / "stats.json", js);
  m["policy"] = qkelly::policy_name(policy);
  write_json(out / "manifest.json", m);
  std::cout << qkelly::policy_name(policy) << ": mean log2 growth " << g17(stats.mean_log2_growth) << " +/- "
            << g17(stats.stderr_log2_growth) << " over " << stats.n_runs << " runs\n";
  return 0;
}

int cmd_compare(const RunConfig& c) {
  warn_degenerate(c);
  const auto params = game(c);
  const fs::path out = c.output_dir;
  const auto names = split_list(c.policy);
  if (names.size() < 2) throw UsageError("compare needs at least two policies, e.g. --policy optimal,myopic");
  for (const auto& n : names) parse_policy(n, nullptr);
  std::shared_ptr<const qkelly::ValueStack> stack;
  if (std::find(names.begin(), names.end(), "optimal") != names.end()) stack = solve_stack(c);
  std::vector<qkelly::PolicySpec> policies;
  for (const auto& n : names) policies.push_back(parse_policy(n, stack));
  const auto rows = qkelly::compare_strategies(params, policies, c.runs, c.seed);
  qkelly::write_comparison(out / "comparison.csv", rows);
  auto m = manifest("compare", c);
  m["files"].push_back("comparison.csv");
  write_json(out / "manifest.json", m);

  std::printf("%-16s %22s %22s %14s\n", "policy", "exact", "monte_carlo", "stderr");
  for (const auto& r : rows) {
    const std::string exact = r.exact_value ? g17(*r.exact_value) : "-";
    std::printf("%-16s %22s %22s %14.6g\n", r.policy.c_str(), exact.c_str(), g17(r.mc_mean).c_str(), r.mc_stderr);
  }
  return 0;
}

json discrepancy_json(const std::vector<qkelly::DiscrepancyRow>& rows) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json j = {{"rows", json::array()}, {"at_half", json::array()}};
  double worst = 0.0;
  int undefined = 0;
  for (const auto& r : rows) {
    j["rows"].push_back({{"xi", r.xi},
                         {"delta_rad", r.delta_rad},
                         {"formula_angle_rad", opt(r.formula_angle)},
                         {"numeric_angle_rad", r.numeric_angle},
                         {"formula_entropy_drop", opt(r.formula_gain)},
                         {"numeric_entropy_drop", r.numeric_gain},
                         {"formula_p_up", opt(r.formula_p_up)},
                         {"numeric_p_up", r.numeric_p_up},
                         {"axis_offset_rad", opt(r.axis_offset)}});
    if (r.axis_offset) worst = std::max(worst, *r.axis_offset);
    else ++undefined;
    if (r.xi == 0.5)
      j["at_half"].push_back({{"delta_rad", r.delta_rad},
                              {"numeric_angle_rad", r.numeric_angle},
                              {"numeric_p_up", r.numeric_p_up},
                              {"numeric_fraction", std::fabs(2.0 * r.numeric_p_up - 1.0)},
                              {"formula_angle_rad", opt(r.formula_angle)}});
  }
  j["max_axis_offset_rad"] = worst;
  j["formula_undefined_rows"] = undefined;
  return j;
}

int cmd_figures_data(RunConfig c) {
  const fs::path out = c.output_dir;
  const std::vector<double> deltas = {7.5, 30.0, 60.0, 90.0};
  const double heatmap_delta = 60.0;
  qkelly::GridSpec heat_grid = c.grid;
  heat_grid.n_xi = 101;
  heat_grid.n_w = 129;
  const double level = std::log2(c.grid.w_max);

  json top = manifest("figures-data", c);
  top.erase("delta_deg");
  top["delta_deg_set"] = deltas;
  top["utility_level"] = level;
  top["heatmap_grid"] = grid_json(heat_grid);
  top["bundles"] = json::array();
  json figures = json::array();

  for (double d : deltas) {
    c.delta_deg = d;
    const auto stack = qkelly::solve_1d(game(c), c.grid);
    std::ostringstream dir;
    dir << "delta_" << d;
    const fs::path sub = out / dir.str();
    auto m = manifest("figures-data", c);
    qkelly::write_value_curves(sub / "value_curves.csv", stack);
    m["files"].push_back("value_curves.csv");
    json contour_files = json::array();
    for (int k = 0; k <= c.n_steps; ++k) {
      const auto name = step_file("contour", k, c.n_steps);
      qkelly::write_contour(sub / name, qkelly::contour_points(stack, k, level, c.points));
      m["files"].push_back(name);
      contour_files.push_back(dir.str() + "/" + name);
    }
    json heat_files = json::array();
    if (d == heatmap_delta) {
      for (int k : {c.n_steps, c.n_steps - 1}) {
        const auto name = step_file("heatmap", k, c.n_steps);
        qkelly::write_heatmap(sub / name, qkelly::heatmap(stack, k, heat_grid));
        m["files"].push_back(name);
        heat_files.push_back(dir.str() + "/" + name);
      }
      m["heatmap_grid"] = grid_json(heat_grid);
    }
    write_json(sub / "manifest.json", m);
    top["bundles"].push_back({{"delta_deg", d}, {"dir", dir.str()}});

    const int base = d == 7.5 ? 1 : d == 30.0 ? 3 : d == 60.0 ? 5 : 9;
    figures.push_back({{"figure_id", base}, {"kind", "contour"}, {"delta_deg", d}, {"axis_scale", "log-x"},
                       {"files", contour_files}});
    figures.push_back({{"figure_id", base + 1}, {"kind", "contour"}, {"delta_deg", d}, {"axis_scale", "linear-x"},
                       {"files", contour_files}});
    if (!heat_files.empty()) {
      figures.push_back({{"figure_id", 7}, {"kind", "heatmap"}, {"delta_deg", d}, {"step", c.n_steps},
                         {"files", json::array({heat_files[0]})}});
      figures.push_back({{"figure_id", 8}, {"kind", "heatmap"}, {"delta_deg", d}, {"step", c.n_steps - 1},
                         {"files", json::array({heat_files[1]})}});
    }
    std::cout << "delta " << d << ": G_0(1/2) = " << g17(stack.g(0, 0.5)) << '\n';
  }
  std::sort(figures.begin(), figures.end(),
            [](const json& a, const json& b) { return a["figure_id"].get<int>() < b["figure_id"].get<int>(); });
  top["figures"] = figures;

  std::vector<double> xis, drad;
  for (int i = 1; i <= 19; ++i) xis.push_back(0.05 * i);
  for (int i = 1; i <= 18; ++i) drad.push_back(qkelly::Angle::degrees(5.0 * i).rad());
  const auto rows = qkelly::discrepancy_report(xis, drad);
  qkelly::write_discrepancy(out / "discrepancy.csv", rows);
  write_json(out / "discrepancy.json", discrepancy_json(rows));
  top["files"] = {"discrepancy.csv", "discrepancy.json"};
  write_json(out / "manifest.json", top);
  std::cout << "wrote figure bundle to " << out.string() << '\n';
  return 0;
}

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--delta-deg", f.delta_deg, "separation angle in degrees, [0, 90]");
  sub->add_option("--steps", f.n_steps, "number of rounds N");
  sub->add_option("--xi0", f.xi0, "initial prior of the reference state");
  sub->add_option("--mode", f.mode, "solver: 1d, 2d or both");
  sub->add_option("--n-xi", f.n_xi, "prior grid nodes (odd)");
  sub->add_option("--n-w", f.n_w, "wealth grid nodes (2-D solver)");
  sub->add_option("--n-alpha", f.n_alpha, "coarse angle scan points");
  sub->add_option("--alpha-tol", f.alpha_tol, "angle refinement tolerance (rad)");
  sub->add_option("--seed", f.seed, "base random seed");
  sub->add_option("--policy", f.policy, "optimal | myopic | maxinfo | zerobet | fixed:<deg> (comma list for compare)");
  sub->add_option("--runs", f.runs, "Monte Carlo runs");
  sub->add_option("--levels", f.levels, "utility levels for contours")->delimiter(',');
  sub->add_option("--out", f.out, "output directory");
  sub->add_option("--trajectories", f.trajectories, "runs exported as full trajectories");
  sub->add_option("--points", f.points, "points per contour");
  sub->add_option("--config", f.config, "flat JSON config file");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kelly betting on spin measurements: solver, simulator and data export"};
  app.set_version_flag("--version", std::string(qkelly::version));
  app.require_subcommand(1);
  Flags f;
  auto* solve = app.add_subcommand("solve", "solve the value function; writes value curves and the policy table");
  auto* contours = app.add_subcommand("contours", "equal-utility contour lines per step");
  auto* simulate = app.add_subcommand("simulate", "seeded Monte Carlo games under one policy");
  auto* compare = app.add_subcommand("compare", "exact and Monte Carlo comparison of policies");
  auto* figures = app.add_subcommand("figures-data", "data bundle for the contour and heat-map figures");
  for (auto* sub : {solve, contours, simulate, compare, figures}) add_common(sub, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*solve) return cmd_solve(resolve(f, "optimal"));
    if (*contours) return cmd_contours(resolve(f, "optimal"));
    if (*simulate) return cmd_simulate(resolve(f, "optimal"));
    if (*compare) return cmd_compare(resolve(f, "optimal,myopic,maxinfo,zerobet"));
    if (*figures) return cmd_figures_data(resolve(f, "optimal"));
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const qkelly::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 2;
}
