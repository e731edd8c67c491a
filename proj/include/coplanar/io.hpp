#pragma once

// Run configuration (JSON), series CSV, events JSONL and run report JSON.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "coplanar/dynamics.hpp"
#include "coplanar/errors.hpp"
#include "coplanar/events.hpp"
#include "coplanar/potentials.hpp"
#include "coplanar/reduction.hpp"
#include "coplanar/scenarios.hpp"
#include "coplanar/verify.hpp"

namespace coplanar {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

// ---------------------------------------------------------------------------
// Numbers

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double x = 0.0;
  const char* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, x);
  if (res.ec != std::errc() || res.ptr != end) throw InputError("not a number: '" + s + "'");
  return x;
}

namespace detail {

// JSON has no infinities; non-finite values travel as strings.
inline Json json_number(double x) { return std::isfinite(x) ? Json(x) : Json(format_double(x)); }

inline double number_from(const Json& j) {
  if (j.is_string()) return parse_double(j.get<std::string>());
  return j.get<double>();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Series CSV

inline constexpr const char* kSeriesHeader = "t,S,det,margin,energy,J_norm,p_norm,r_max,r_min_pair";

struct SeriesRow {
  double t, s, det, margin, energy, j_norm, p_norm, r_max, r_min_pair;
};

inline void write_series_csv(std::ostream& out, const Trajectory& traj) {
  out << kSeriesHeader << '\n';
  const auto& samples = traj.samples();
  const auto& diag = traj.diagnostics();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& d = diag[i];
    for (double x : {samples[i].t, d.signed_distance, d.det, d.margin, d.energy, d.j_norm, d.p_norm, d.r_max})
      out << format_double(x) << ',';
    out << format_double(d.r_min) << '\n';
  }
}

inline std::vector<SeriesRow> read_series_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kSeriesHeader) throw InputError("series CSV: missing or unexpected header");
  std::vector<SeriesRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(parse_double(cell));
    if (f.size() != 9) throw InputError("series CSV: line " + std::to_string(line_no) + " has " +
                                        std::to_string(f.size()) + " fields, expected 9");
    rows.push_back({f[0], f[1], f[2], f[3], f[4], f[5], f[6], f[7], f[8]});
  }
  return rows;
}

/// Positions per sample: t followed by q(i, a) in body-major order.
inline void write_positions_csv(std::ostream& out, const Trajectory& traj) {
  const auto d = traj.masses().dimension(), n = traj.masses().bodies();
  out << 't';
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index i = 0; i < d; ++i) out << ",q" << a + 1 << '_' << i + 1;
  out << '\n';
  for (const auto& s : traj.samples()) {
    out << format_double(s.t);
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index i = 0; i < d; ++i) out << ',' << format_double(s.q(i, a));
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Events JSONL

inline Json to_json_value(const DegenerationEvent& e) {
  return Json{{"t_star", detail::json_number(e.t_star)},
              {"symbol", e.symbol.str()},
              {"residual", detail::json_number(e.residual)},
              {"bracket", Json::array({detail::json_number(e.t_lo), detail::json_number(e.t_hi)})},
              {"grazing", e.grazing}};
}

inline void write_events_jsonl(std::ostream& out, const std::vector<DegenerationEvent>& events) {
  for (const auto& e : events) out << to_json_value(e).dump() << '\n';
}

inline std::vector<DegenerationEvent> read_events_jsonl(std::istream& in, Eigen::Index d) {
  std::vector<DegenerationEvent> events;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const Json j = Json::parse(line);
    DegenerationEvent e;
    e.t_star = detail::number_from(j.at("t_star"));
    e.symbol = parse_symbol(j.at("symbol").get<std::string>(), d);
    e.residual = detail::number_from(j.at("residual"));
    e.t_lo = detail::number_from(j.at("bracket").at(0));
    e.t_hi = detail::number_from(j.at("bracket").at(1));
    e.grazing = j.value("grazing", false);
    events.push_back(e);
  }
  return events;
}

// ---------------------------------------------------------------------------
// Run configuration

struct OutputPaths {
  std::string series_csv;
  std::string events_jsonl;
  std::string report_json;
  bool plot_data = false;  // also write <series stem>_positions.csv
};

struct RunConfig {
  int version = kSchemaVersion;
  std::optional<Eigen::Index> dimension;
  std::optional<Vector> masses;
  std::optional<double> G;
  std::optional<PairPotential> potential;

  std::optional<std::string> scenario;
  std::uint64_t seed = 0;
  std::optional<Matrix> positions;   // d x N
  std::optional<Matrix> velocities;  // d x N
  bool project_zero_am = false;
  bool zero_linear_momentum = false;

  IntegratorConfig integrator;
  bool t_end_given = false;
  std::optional<double> periods;

  OutputPaths output;
  VerifyOptions verify;
};

namespace detail {

inline void require_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

inline double positive(const Json& j, const std::string& what) {
  if (!j.is_number()) throw ConfigError(what + ": expected a number");
  const double x = j.get<double>();
  if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError(what + ": must be positive and finite");
  return x;
}

// [[x, y, ...], ...] one row per body -> d x N.
inline Matrix point_list(const Json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw ConfigError(what + ": expected a non-empty list of points");
  const auto n = static_cast<Eigen::Index>(j.size());
  const auto d = static_cast<Eigen::Index>(j.at(0).size());
  Matrix m(d, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    const Json& p = j.at(static_cast<std::size_t>(a));
    if (!p.is_array() || static_cast<Eigen::Index>(p.size()) != d)
      throw ConfigError(what + ": every point needs " + std::to_string(d) + " coordinates");
    for (Eigen::Index i = 0; i < d; ++i) {
      if (!p.at(static_cast<std::size_t>(i)).is_number()) throw ConfigError(what + ": non-numeric coordinate");
      m(i, a) = p.at(static_cast<std::size_t>(i)).get<double>();
    }
  }
  if (!m.allFinite()) throw ConfigError(what + ": non-finite coordinate");
  return m;
}

inline PairPotential potential_from(const Json& j) {
  require_keys(j, {"kind", "alpha", "k"}, "potential");
  const std::string kind = j.value("kind", std::string("newtonian"));
  if (kind == "newtonian") {
    if (j.contains("alpha") || j.contains("k")) throw ConfigError("potential: newtonian takes no parameters");
    return PairPotential::newtonian();
  }
  if (kind != "power_law") throw ConfigError("potential: kind must be newtonian or power_law");
  const double alpha = positive(j.at("alpha"), "potential.alpha");
  if (!j.contains("k")) return PairPotential::power_law(alpha);
  const Json& k = j.at("k");
  if (k.is_number()) return PairPotential::power_law(alpha, positive(k, "potential.k"));
  const Matrix km = point_list(k, "potential.k");
  return PairPotential::power_law(alpha, km.transpose());
}

}  // namespace detail

inline RunConfig parse_run_config(const Json& j) {
  using detail::positive;
  detail::require_keys(j,
                       {"version", "dimension", "masses", "G", "potential", "initial", "integrator", "output", "verify"},
                       "config");
  RunConfig cfg;
  if (!j.contains("version") || !j.at("version").is_number_integer() || j.at("version").get<int>() != kSchemaVersion)
    throw ConfigError("config: \"version\": 1 is required");
  if (j.contains("dimension")) {
    if (!j.at("dimension").is_number_integer() || j.at("dimension").get<long>() < 1)
      throw ConfigError("config: dimension must be a positive integer");
    cfg.dimension = j.at("dimension").get<Eigen::Index>();
  }
  if (j.contains("masses")) {
    const Json& ms = j.at("masses");
    if (!ms.is_array() || ms.empty()) throw ConfigError("config: masses must be a non-empty list");
    Vector m(static_cast<Eigen::Index>(ms.size()));
    for (std::size_t a = 0; a < ms.size(); ++a) m(static_cast<Eigen::Index>(a)) = positive(ms.at(a), "masses");
    cfg.masses = m;
  }
  if (j.contains("G")) cfg.G = positive(j.at("G"), "G");
  if (j.contains("potential")) cfg.potential = detail::potential_from(j.at("potential"));

  if (!j.contains("initial")) throw ConfigError("config: \"initial\" is required");
  const Json& init = j.at("initial");
  detail::require_keys(init, {"scenario", "seed", "positions", "velocities", "project_zero_am", "zero_linear_momentum"},
                       "initial");
  if (init.contains("scenario")) cfg.scenario = init.at("scenario").get<std::string>();
  if (init.contains("seed")) {
    if (!init.at("seed").is_number_unsigned()) throw ConfigError("initial.seed must be a nonnegative integer");
    cfg.seed = init.at("seed").get<std::uint64_t>();
  }
  if (init.contains("positions")) cfg.positions = detail::point_list(init.at("positions"), "initial.positions");
  if (init.contains("velocities")) cfg.velocities = detail::point_list(init.at("velocities"), "initial.velocities");
  cfg.project_zero_am = init.value("project_zero_am", false);
  cfg.zero_linear_momentum = init.value("zero_linear_momentum", false);
  if (cfg.scenario && (cfg.positions || cfg.velocities))
    throw ConfigError("initial: give either a scenario or positions/velocities, not both");
  if (!cfg.scenario && !(cfg.positions && cfg.velocities))
    throw ConfigError("initial: a scenario or both positions and velocities are required");

  if (j.contains("integrator")) {
    const Json& in = j.at("integrator");
    detail::require_keys(in,
                         {"kind", "rel_tol", "abs_tol", "max_step", "step", "t_end", "periods", "sample_interval",
                          "collision_radius", "max_steps"},
                         "integrator");
    auto& ic = cfg.integrator;
    const std::string kind = in.value("kind", std::string("adaptive_embedded"));
    if (kind == "adaptive_embedded") ic.kind = IntegratorKind::adaptive_embedded;
    else if (kind == "rk4_fixed") ic.kind = IntegratorKind::rk4_fixed;
    else throw ConfigError("integrator.kind must be adaptive_embedded or rk4_fixed");
    if (in.contains("rel_tol")) ic.rel_tol = positive(in.at("rel_tol"), "integrator.rel_tol");
    if (in.contains("abs_tol")) ic.abs_tol = positive(in.at("abs_tol"), "integrator.abs_tol");
    if (in.contains("max_step")) ic.max_step = positive(in.at("max_step"), "integrator.max_step");
    if (in.contains("step")) ic.step = positive(in.at("step"), "integrator.step");
    if (in.contains("sample_interval"))
      ic.sample_interval = positive(in.at("sample_interval"), "integrator.sample_interval");
    if (in.contains("collision_radius"))
      ic.collision_radius = positive(in.at("collision_radius"), "integrator.collision_radius");
    if (in.contains("max_steps")) ic.max_steps = in.at("max_steps").get<std::size_t>();
    if (in.contains("t_end") && in.contains("periods")) throw ConfigError("integrator: give t_end or periods, not both");
    if (in.contains("t_end")) {
      ic.t_end = positive(in.at("t_end"), "integrator.t_end");
      cfg.t_end_given = true;
    }
    if (in.contains("periods")) cfg.periods = positive(in.at("periods"), "integrator.periods");
  }

  if (!j.contains("output")) throw ConfigError("config: \"output\" is required");
  const Json& out = j.at("output");
  detail::require_keys(out, {"series_csv", "events_jsonl", "report_json", "plot_data"}, "output");
  for (const char* key : {"series_csv", "events_jsonl", "report_json"})
    if (!out.contains(key) || !out.at(key).is_string() || out.at(key).get<std::string>().empty())
      throw ConfigError(std::string("output.") + key + " must be a non-empty path");
  cfg.output.series_csv = out.at("series_csv").get<std::string>();
  cfg.output.events_jsonl = out.at("events_jsonl").get<std::string>();
  cfg.output.report_json = out.at("report_json").get<std::string>();
  cfg.output.plot_data = out.value("plot_data", false);

  if (j.contains("verify")) {
    const Json& v = j.at("verify");
    detail::require_keys(v, {"eps_S", "eps_margin", "stencil_step", "concavity_fraction"}, "verify");
    if (v.contains("eps_S")) cfg.verify.eps_s_rel = positive(v.at("eps_S"), "verify.eps_S");
    if (v.contains("eps_margin")) cfg.verify.eps_margin_rel = positive(v.at("eps_margin"), "verify.eps_margin");
    if (v.contains("stencil_step")) cfg.verify.stencil_step = positive(v.at("stencil_step"), "verify.stencil_step");
    if (v.contains("concavity_fraction"))
      cfg.verify.concavity_fraction = positive(v.at("concavity_fraction"), "verify.concavity_fraction");
  }
  return cfg;
}

inline RunConfig parse_run_config_text(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    return parse_run_config(j);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config_text(ss.str());
}

/// Everything a run needs, with scenario defaults filled in.
struct ResolvedRun {
  std::string scenario;  // empty for explicit initial data
  std::uint64_t seed = 0;
  MassSystem masses;
  PairPotential potential;
  State initial;
  IntegratorConfig integrator;
};

inline ResolvedRun resolve(const RunConfig& cfg) {
  std::optional<Scenario> sc;
  if (cfg.scenario) sc = make_scenario(*cfg.scenario, cfg.seed);

  State s0 = sc ? sc->initial : State{0.0, *cfg.positions, *cfg.velocities};
  const Eigen::Index d = s0.q.rows(), n = s0.q.cols();
  if (s0.v.rows() != d || s0.v.cols() != n) throw ConfigError("initial: positions and velocities differ in shape");
  if (cfg.dimension && *cfg.dimension != d)
    throw ConfigError("dimension " + std::to_string(*cfg.dimension) + " does not match the initial data (d = " +
                      std::to_string(d) + ")");

  Vector masses = sc ? sc->masses.masses() : Vector::Ones(n);
  if (cfg.masses) masses = *cfg.masses;
  const Eigen::Index d_cfg = cfg.dimension.value_or(d);
  if (masses.size() != d_cfg + 1)
    throw ConfigError("N must equal d + 1: got " + std::to_string(masses.size()) + " masses for d = " +
                      std::to_string(d_cfg));
  if (n != d + 1) throw ConfigError("N must equal d + 1: initial data has " + std::to_string(n) + " bodies in d = " +
                                    std::to_string(d));
  const double G = cfg.G.value_or(sc ? sc->masses.G() : 1.0);

  ResolvedRun run{cfg.scenario.value_or(""), cfg.seed, MassSystem(masses, G),
                  cfg.potential.value_or(sc ? sc->potential : PairPotential::newtonian()), s0, cfg.integrator};
  const MassSystem& m = run.masses;

  if (cfg.zero_linear_momentum) {
    run.initial.q = run.initial.q.colwise() - center_of_mass(run.initial.q, m);
    run.initial.v = run.initial.v.colwise() - linear_momentum(run.initial.v, m) / m.total_mass();
  }
  if (cfg.project_zero_am) {
    run.initial.q = run.initial.q.colwise() - center_of_mass(run.initial.q, m);
    run.initial.v = zero_am_projection(run.initial.q, run.initial.v, m).velocity;
  }

  IntegratorConfig& ic = run.integrator;
  if (cfg.periods) {
    if (!sc || !sc->period) throw ConfigError("integrator.periods needs a periodic scenario");
    ic.t_end = run.initial.t + *cfg.periods * *sc->period;
  } else if (!cfg.t_end_given) {
    ic.t_end = run.initial.t + (sc ? sc->default_t_end : 10.0);
  }
  if (!(ic.t_end > run.initial.t)) throw ConfigError("integrator: t_end must exceed the initial time");
  return run;
}

// ---------------------------------------------------------------------------
// Run report

struct RunReport {
  int version = kSchemaVersion;
  std::string scenario;
  std::uint64_t seed = 0;
  Eigen::Index dimension = 0;
  std::vector<double> masses;
  double G = 1.0;
  std::string potential;
  std::string termination;
  std::string termination_reason;
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  ConservationReport conservation;
  OscillationReport oscillation;
  GSummary g;
  SegmentReport segments;
  std::string word;
  std::size_t event_count = 0;
  int status = 0;

  friend bool operator==(const RunReport&, const RunReport&) = default;
};

inline Json to_json_value(const ConservationReport& c) {
  using detail::json_number;
  return Json{{"max_rel_energy_drift", json_number(c.max_rel_energy_drift)},
              {"max_j_norm", json_number(c.max_j_norm)},
              {"max_rel_j_drift", json_number(c.max_rel_j_drift)},
              {"max_p_norm", json_number(c.max_p_norm)},
              {"max_p_drift", json_number(c.max_p_drift)}};
}

inline Json to_json_value(const OscillationReport& r) {
  using detail::json_number;
  Json violations = Json::array();
  for (const auto& v : r.violations) violations.push_back({{"t_lo", json_number(v.t_lo)}, {"t_hi", json_number(v.t_hi)}});
  return Json{{"c_observed", json_number(r.c_observed)},
              {"delta", json_number(r.delta)},
              {"omega", json_number(r.omega)},
              {"window", json_number(r.window)},
              {"t_start", json_number(r.t_start)},
              {"t_end", json_number(r.t_end)},
              {"events", r.events},
              {"windows_checked", r.windows_checked},
              {"windows_empty", r.windows_empty},
              {"violations", violations},
              {"hypothesis_flags",
               {{"nonzero_J", r.flags.nonzero_j},
                {"unbounded_suspected", r.flags.unbounded_suspected},
                {"collision_truncated", r.flags.collision_truncated}}},
              {"confirmed", r.confirmed()}};
}

inline Json to_json_value(const GSummary& g) {
  using detail::json_number;
  return Json{{"lower_bound", json_number(g.lower_bound)}, {"c_observed", json_number(g.c_observed)},
              {"min_g", json_number(g.min_g)},             {"nodes", g.nodes},
              {"unmasked", g.unmasked},                    {"nonpositive", g.nonpositive},
              {"below_bound", g.below_bound},              {"diagnostic_only", g.diagnostic_only}};
}

inline Json to_json_value(const SegmentReport& s) {
  using detail::json_number;
  Json segs = Json::array();
  for (const auto& x : s.segments)
    segs.push_back({{"t_lo", json_number(x.t_lo)},
                    {"t_hi", json_number(x.t_hi)},
                    {"sign", x.sign},
                    {"checked", x.checked},
                    {"agreeing", x.agreeing},
                    {"skipped", x.skipped}});
  return Json{{"segments", segs},
              {"skipped", s.skipped},
              {"failed", s.failed},
              {"checked_nodes", s.checked_nodes},
              {"agreeing_nodes", s.agreeing_nodes},
              {"required_fraction", json_number(s.required_fraction)},
              {"overall_fraction", json_number(s.overall_fraction())},
              {"passed", s.passed()}};
}

inline Json to_json_value(const RunReport& r) {
  Json masses = Json::array();
  for (double m : r.masses) masses.push_back(detail::json_number(m));
  return Json{{"version", r.version},
              {"scenario", r.scenario},
              {"seed", r.seed},
              {"dimension", r.dimension},
              {"masses", masses},
              {"G", detail::json_number(r.G)},
              {"potential", r.potential},
              {"termination", r.termination},
              {"termination_reason", r.termination_reason},
              {"accepted_steps", r.accepted_steps},
              {"rejected_steps", r.rejected_steps},
              {"conservation", to_json_value(r.conservation)},
              {"oscillation", to_json_value(r.oscillation)},
              {"g_estimate", to_json_value(r.g)},
              {"segments", to_json_value(r.segments)},
              {"word", r.word},
              {"event_count", r.event_count},
              {"status", r.status}};
}

inline RunReport run_report_from_json(const Json& j) {
  using detail::number_from;
  RunReport r;
  r.version = j.at("version").get<int>();
  if (r.version != kSchemaVersion) throw InputError("report: unsupported version");
  r.scenario = j.at("scenario").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.dimension = j.at("dimension").get<Eigen::Index>();
  for (const auto& m : j.at("masses")) r.masses.push_back(number_from(m));
  r.G = number_from(j.at("G"));
  r.potential = j.at("potential").get<std::string>();
  r.termination = j.at("termination").get<std::string>();
  r.termination_reason = j.at("termination_reason").get<std::string>();
  r.accepted_steps = j.at("accepted_steps").get<std::size_t>();
  r.rejected_steps = j.at("rejected_steps").get<std::size_t>();

  const Json& c = j.at("conservation");
  r.conservation = {number_from(c.at("max_rel_energy_drift")), number_from(c.at("max_j_norm")),
                    number_from(c.at("max_rel_j_drift")), number_from(c.at("max_p_norm")),
                    number_from(c.at("max_p_drift"))};

  const Json& o = j.at("oscillation");
  auto& osc = r.oscillation;
  osc.c_observed = number_from(o.at("c_observed"));
  osc.delta = number_from(o.at("delta"));
  osc.omega = number_from(o.at("omega"));
  osc.window = number_from(o.at("window"));
  osc.t_start = number_from(o.at("t_start"));
  osc.t_end = number_from(o.at("t_end"));
  osc.events = o.at("events").get<std::size_t>();
  osc.windows_checked = o.at("windows_checked").get<std::size_t>();
  osc.windows_empty = o.at("windows_empty").get<std::size_t>();
  for (const auto& v : o.at("violations")) osc.violations.push_back({number_from(v.at("t_lo")), number_from(v.at("t_hi"))});
  const Json& f = o.at("hypothesis_flags");
  osc.flags = {f.at("nonzero_J").get<bool>(), f.at("unbounded_suspected").get<bool>(),
               f.at("collision_truncated").get<bool>()};

  const Json& g = j.at("g_estimate");
  r.g = {number_from(g.at("lower_bound")),       number_from(g.at("c_observed")),   number_from(g.at("min_g")),
         g.at("nodes").get<std::size_t>(),       g.at("unmasked").get<std::size_t>(), g.at("nonpositive").get<std::size_t>(),
         g.at("below_bound").get<std::size_t>(), g.at("diagnostic_only").get<bool>()};

  const Json& s = j.at("segments");
  for (const auto& x : s.at("segments")) {
    SignSegment seg;
    seg.t_lo = number_from(x.at("t_lo"));
    seg.t_hi = number_from(x.at("t_hi"));
    seg.sign = x.at("sign").get<int>();
    seg.checked = x.at("checked").get<std::size_t>();
    seg.agreeing = x.at("agreeing").get<std::size_t>();
    seg.skipped = x.at("skipped").get<bool>();
    r.segments.segments.push_back(seg);
  }
  r.segments.skipped = s.at("skipped").get<std::size_t>();
  r.segments.failed = s.at("failed").get<std::size_t>();
  r.segments.checked_nodes = s.at("checked_nodes").get<std::size_t>();
  r.segments.agreeing_nodes = s.at("agreeing_nodes").get<std::size_t>();
  r.segments.required_fraction = number_from(s.at("required_fraction"));

  r.word = j.at("word").get<std::string>();
  r.event_count = j.at("event_count").get<std::size_t>();
  r.status = j.at("status").get<int>();
  return r;
}

}  // namespace coplanar
