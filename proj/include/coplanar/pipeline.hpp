#pragma once

// Configuration-driven run: initial data, integration, degeneration scan,
// verification and output files, with a distinct exit status per failure.

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "coplanar/dynamics.hpp"
#include "coplanar/errors.hpp"
#include "coplanar/events.hpp"
#include "coplanar/io.hpp"
#include "coplanar/verify.hpp"

namespace coplanar {

enum class ExitStatus : int {
  ok = 0,
  internal_error = 1,
  config_error = 2,
  output_error = 3,
  integrator_error = 4,
  bound_violated = 5,  // gap bound violated while every hypothesis flag is clear
};

struct PipelineResult {
  ExitStatus status = ExitStatus::ok;
  std::string message;
  std::optional<RunReport> report;
  std::optional<Trajectory> trajectory;
  std::vector<DegenerationEvent> events;
};

namespace detail {

inline std::ofstream open_output(const std::string& path) {
  const std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw OutputError("cannot write '" + path + "'");
  return out;
}

inline void finish_output(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw OutputError("write to '" + path + "' failed");
}

inline std::string positions_path(const std::string& series_csv) {
  std::filesystem::path p(series_csv);
  return (p.parent_path() / (p.stem().string() + "_positions.csv")).string();
}

inline ExitStatus status_for(const OscillationReport& osc) {
  return !osc.violations.empty() && osc.hypotheses_met() ? ExitStatus::bound_violated : ExitStatus::ok;
}

}  // namespace detail

/// Runs integration and analysis without touching the file system.
inline PipelineResult analyze_run(const ResolvedRun& run, const VerifyOptions& opt) {
  PipelineResult res;
  Trajectory traj = integrate(run.initial, run.masses, run.potential, run.integrator);
  res.events = scan_degenerations(traj, run.masses);

  RunReport rep;
  rep.scenario = run.scenario;
  rep.seed = run.seed;
  rep.dimension = run.masses.dimension();
  rep.masses.assign(run.masses.masses().data(), run.masses.masses().data() + run.masses.bodies());
  rep.G = run.masses.G();
  rep.potential = to_string(run.potential.kind());
  rep.termination = traj.termination() == Termination::completed ? "completed" : "collision_guard";
  rep.termination_reason = traj.termination_reason();
  rep.accepted_steps = traj.accepted_steps();
  rep.rejected_steps = traj.rejected_steps();
  rep.conservation = traj.conservation();
  rep.oscillation = check_window_bound(traj, res.events, run.masses, run.potential, opt);
  if (traj.t_end() - traj.t_start() > 4 * opt.stencil_step) rep.g = estimate_g_series(traj, opt).summary();
  rep.segments = check_concavity_segments(traj, res.events, opt);
  rep.word = symbol_sequence(res.events);
  rep.event_count = res.events.size();
  res.status = detail::status_for(rep.oscillation);
  rep.status = static_cast<int>(res.status);
  res.report = std::move(rep);
  res.trajectory = std::move(traj);
  return res;
}

/// The `simulate` verb.
inline PipelineResult run_pipeline(const RunConfig& cfg) {
  PipelineResult res;
  try {
    const ResolvedRun run = resolve(cfg);
    // Fail on unwritable destinations before spending time integrating.
    auto series = detail::open_output(cfg.output.series_csv);
    auto events = detail::open_output(cfg.output.events_jsonl);
    auto report = detail::open_output(cfg.output.report_json);
    std::optional<std::ofstream> positions;
    if (cfg.output.plot_data) positions = detail::open_output(detail::positions_path(cfg.output.series_csv));

    res = analyze_run(run, cfg.verify);
    write_series_csv(series, *res.trajectory);
    detail::finish_output(series, cfg.output.series_csv);
    write_events_jsonl(events, res.events);
    detail::finish_output(events, cfg.output.events_jsonl);
    report << to_json_value(*res.report).dump(2) << '\n';
    detail::finish_output(report, cfg.output.report_json);
    if (positions) {
      write_positions_csv(*positions, *res.trajectory);
      detail::finish_output(*positions, detail::positions_path(cfg.output.series_csv));
    }
    if (res.status == ExitStatus::bound_violated)
      res.message = std::to_string(res.report->oscillation.violations.size()) +
                    " window violation(s) with all hypothesis flags clear";
  } catch (const ConfigError& e) {
    res.status = ExitStatus::config_error;
    res.message = e.what();
  } catch (const OutputError& e) {
    res.status = ExitStatus::output_error;
    res.message = e.what();
  } catch (const IntegrationError& e) {
    res.status = ExitStatus::integrator_error;
    res.message = std::string(e.what()) + " (last good state at t = " + format_double(e.last_good_state().t) + ")";
  } catch (const CollisionError& e) {
    res.status = ExitStatus::integrator_error;
    res.message = e.what();
  } catch (const InputError& e) {
    res.status = ExitStatus::config_error;
    res.message = e.what();
  } catch (const PotentialSpecError& e) {
    res.status = ExitStatus::config_error;
    res.message = e.what();
  } catch (const std::exception& e) {
    res.status = ExitStatus::internal_error;
    res.message = e.what();
  }
  return res;
}

// ---------------------------------------------------------------------------
// Re-analysis of a stored series (the `verify` verb).

struct SeriesAnalysis {
  std::vector<double> event_times;  // zeros of S by linear interpolation between rows
  OscillationReport oscillation;
  GSummary g;
  SegmentReport segments;
  ExitStatus status = ExitStatus::ok;
};

/// Works from the CSV columns alone: S on the sample grid is interpolated
/// linearly and differentiated with a stencil equal to the sample spacing.
inline SeriesAnalysis analyze_series(const std::vector<SeriesRow>& rows, const MassSystem& m, const PairPotential& p,
                                     const HypothesisFlags& known, VerifyOptions opt = {}) {
  if (rows.size() < 2) throw InputError("analyze_series: need at least two rows");
  SeriesAnalysis out;
  std::vector<double> t(rows.size()), s(rows.size());
  double c = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    t[i] = rows[i].t;
    s[i] = rows[i].s;
    c = std::max(c, rows[i].r_max);
    if (i > 0 && !(t[i] > t[i - 1])) throw InputError("analyze_series: times must increase");
  }
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (s[i] == 0.0) out.event_times.push_back(t[i]);
    else if (s[i - 1] != 0.0 && (s[i - 1] > 0) != (s[i] > 0))
      out.event_times.push_back(t[i - 1] + (t[i] - t[i - 1]) * s[i - 1] / (s[i - 1] - s[i]));
  }
  if (s[0] == 0.0) out.event_times.insert(out.event_times.begin(), t[0]);

  auto lerp = [&](double x, auto field) {
    auto it = std::upper_bound(t.begin(), t.end(), x);
    if (it == t.begin()) return field(rows.front());
    if (it == t.end()) return field(rows.back());
    const std::size_t i = static_cast<std::size_t>(it - t.begin());
    const double w = (x - t[i - 1]) / (t[i] - t[i - 1]);
    return (1 - w) * field(rows[i - 1]) + w * field(rows[i]);
  };
  // The CSV does not carry ||reduce(q)||; Lagrange's identity bounds it by
  // r_max sqrt(sum_{a<b} m_a m_b / M), which stands in for the scale.
  double pair_mass = 0.0;
  for (Eigen::Index a = 0; a < m.bodies(); ++a)
    for (Eigen::Index b = a + 1; b < m.bodies(); ++b) pair_mass += m.mass(a) * m.mass(b);
  const double scale_factor = std::sqrt(pair_mass / m.total_mass());
  const ShapeSignal signal = [&](double x) {
    ShapeSample c;
    c.s = lerp(x, [](const SeriesRow& r) { return r.s; });
    c.margin = lerp(x, [](const SeriesRow& r) { return r.margin; });
    c.scale = scale_factor * lerp(x, [](const SeriesRow& r) { return r.r_max; });
    return c;
  };
  opt.stencil_step = t[1] - t[0];

  const double delta = delta_bound(p, c, m);
  const double omega = std::sqrt(m.G() * m.total_mass() * delta);
  out.oscillation = check_window_bound(out.event_times, t.front(), t.back(), M_PI / omega);
  out.oscillation.c_observed = c;
  out.oscillation.delta = delta;
  out.oscillation.omega = omega;
  out.oscillation.flags = known;
  out.oscillation.flags.unbounded_suspected = known.unbounded_suspected || rows.front().energy >= 0.0;

  if (t.back() - t.front() > 4 * opt.stencil_step) {
    out.g = estimate_g_series(signal, t, t.front(), t.back(), m.G() * m.total_mass() * delta, opt).summary();
    out.g.c_observed = c;
    out.g.diagnostic_only = out.oscillation.flags.nonzero_j;
  }
  out.segments = check_concavity_segments(signal, t, out.event_times, t.front(), t.back(), opt);
  out.status = detail::status_for(out.oscillation);
  return out;
}

}  // namespace coplanar
