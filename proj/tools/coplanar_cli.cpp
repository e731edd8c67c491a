#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "coplanar/io.hpp"
#include "coplanar/linalg.hpp"
#include "coplanar/pipeline.hpp"
#include "coplanar/scenarios.hpp"

namespace {

using namespace coplanar;

int code(ExitStatus s) { return static_cast<int>(s); }

int simulate(const std::string& config_path) {
  RunConfig cfg;
  try {
    cfg = load_run_config(config_path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return code(ExitStatus::config_error);
  }
  const PipelineResult res = run_pipeline(cfg);
  if (!res.message.empty()) std::cerr << (res.status == ExitStatus::ok ? "note: " : "error: ") << res.message << '\n';
  if (res.report) {
    const auto& r = *res.report;
    std::cout << "events " << r.event_count << "  window " << format_double(r.oscillation.window) << "  violations "
              << r.oscillation.violations.size() << "  energy drift "
              << format_double(r.conservation.max_rel_energy_drift) << "  status " << r.status << '\n';
    if (!r.word.empty()) std::cout << "word " << r.word << '\n';
  }
  return code(res.status);
}

int verify(const std::string& config_path, std::string series_path, const std::string& report_path) {
  RunConfig cfg;
  std::optional<ResolvedRun> resolved;
  std::vector<SeriesRow> rows;
  try {
    cfg = load_run_config(config_path);
    resolved = resolve(cfg);
    if (series_path.empty()) series_path = cfg.output.series_csv;
    std::ifstream in(series_path);
    if (!in) throw ConfigError("cannot read series '" + series_path + "'");
    rows = read_series_csv(in);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return code(ExitStatus::config_error);
  }

  const ResolvedRun& run = *resolved;
  HypothesisFlags known;
  const State& s0 = run.initial;
  const double j = bivector_norm(angular_momentum(s0.q, s0.v, run.masses));
  const double scale = mass_norm(s0.q.colwise() - center_of_mass(s0.q, run.masses), run.masses) *
                       mass_norm(s0.v, run.masses);
  known.nonzero_j = j > cfg.verify.zero_j_rel * (scale > 0.0 ? scale : 1.0);
  known.collision_truncated = !rows.empty() && rows.back().t < run.integrator.t_end;

  SeriesAnalysis a;
  try {
    a = analyze_series(rows, run.masses, run.potential, known, cfg.verify);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return code(ExitStatus::config_error);
  }
  Json events = Json::array();
  for (double t : a.event_times) events.push_back(detail::json_number(t));
  const Json out{{"series", series_path},
                 {"event_times", events},
                 {"oscillation", to_json_value(a.oscillation)},
                 {"g_estimate", to_json_value(a.g)},
                 {"segments", to_json_value(a.segments)},
                 {"status", code(a.status)}};
  if (report_path.empty()) {
    std::cout << out.dump(2) << '\n';
  } else {
    std::ofstream f(report_path);
    if (!(f << out.dump(2) << '\n')) {
      std::cerr << "error: cannot write '" << report_path << "'\n";
      return code(ExitStatus::output_error);
    }
  }
  return code(a.status);
}

int list_scenarios() {
  for (const auto& s : scenario_catalog()) std::cout << s.name << "\t" << s.description << '\n';
  return 0;
}

void print_matrix(const char* name, const Matrix& m) {
  std::cout << name << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) std::cout << (j ? " " : "  ") << format_double(m(i, j));
    std::cout << '\n';
  }
}

int svd(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "error: cannot read '" << path << "'\n";
    return code(ExitStatus::config_error);
  }
  std::vector<std::vector<double>> rows;
  std::string line;
  try {
    while (std::getline(in, line)) {
      std::istringstream ss(line);
      std::vector<double> row;
      std::string tok;
      while (ss >> tok) row.push_back(parse_double(tok));
      if (!row.empty()) rows.push_back(std::move(row));
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return code(ExitStatus::config_error);
  }
  const auto d = static_cast<Eigen::Index>(rows.size());
  for (const auto& r : rows)
    if (static_cast<Eigen::Index>(r.size()) != d) {
      std::cerr << "error: expected a square matrix, one row per line\n";
      return code(ExitStatus::config_error);
    }
  if (d == 0) {
    std::cerr << "error: empty matrix\n";
    return code(ExitStatus::config_error);
  }
  Matrix q(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) q(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  try {
    const PseudoSvd f = pseudo_svd(q);
    print_matrix("g1", f.rot_left);
    print_matrix("x", f.x.transpose());
    print_matrix("g2", f.rot_right);
    const auto dm = distance_and_margin(q);
    std::cout << "S " << format_double(dm.signed_distance) << "\nmargin " << format_double(dm.margin) << "\ndet "
              << format_double(q.determinant()) << '\n';
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return code(ExitStatus::config_error);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Degeneration instants of the (d+1)-body problem in d dimensions"};
  app.require_subcommand(1);

  std::string config_path, series_path, report_path, matrix_path;
  auto* sim = app.add_subcommand("simulate", "Integrate a run configuration and write series, events and report");
  sim->add_option("config", config_path, "JSON run configuration")->required();
  auto* ver = app.add_subcommand("verify", "Re-analyse an existing series CSV");
  ver->add_option("config", config_path, "JSON run configuration")->required();
  ver->add_option("--series", series_path, "Series CSV (default: output.series_csv of the config)");
  ver->add_option("--report", report_path, "Write the analysis here instead of stdout");
  auto* scen = app.add_subcommand("scenarios", "List the built-in scenarios");
  auto* dec = app.add_subcommand("svd", "Pseudo-SVD and signed distance of a d x d matrix");
  dec->add_option("matrix-file", matrix_path, "Whitespace-separated rows")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : code(ExitStatus::config_error);
  }

  try {
    if (*sim) return simulate(config_path);
    if (*ver) return verify(config_path, series_path, report_path);
    if (*scen) return list_scenarios();
    if (*dec) return svd(matrix_path);
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return code(ExitStatus::internal_error);
  }
  return code(ExitStatus::internal_error);
}
