#include "cli/runner.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>

#include "leafhol/errors.hpp"
#include "leafhol/lie_ode.hpp"

namespace leafhol::cli {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Collector {
  std::vector<Metric> metrics;
  std::vector<Table> tables;

  void metric(std::string name, double value) { metrics.push_back({std::move(name), value, std::nullopt, true}); }
};

std::string num(double v) { return format_number(v); }
std::string num(int v) { return std::to_string(v); }
std::string num(std::size_t v) { return std::to_string(v); }

void append_coords(std::vector<std::string>& row, const Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) row.push_back(num(v(i)));
}

void append_header(std::vector<std::string>& header, const std::string& prefix, Eigen::Index n) {
  for (Eigen::Index i = 0; i < n; ++i) header.push_back(prefix + std::to_string(i));
}

double matrix_distance(const GroupElementd& a, const GroupElementd& b) { return (a.matrix - b.matrix).norm(); }

// Rank map: bracket_rank of the coordinate-section fields at every point.
void run_rank_map(const Scenario& s, const RankMapTask& t, Collector& c) {
  const AnchoredBundle& bundle = *s.bundle;
  std::vector<VectorField> fields;
  for (const auto& sec : coordinate_sections(bundle)) fields.push_back(induced_field(bundle, sec));

  Table table{"rank_map", {"group", "index"}, {}};
  append_header(table.header, "x", bundle.base_dim);
  for (const char* h : {"rank", "expected", "smallest_kept_sv", "largest_dropped_sv"}) table.header.push_back(h);

  for (const auto& group : t.groups) {
    int lo = std::numeric_limits<int>::max(), hi = 0, mismatches = 0;
    for (std::size_t k = 0; k < group.points.size(); ++k) {
      const RankResult r = bracket_rank(fields, group.points[k], t.depth, t.threshold);
      lo = std::min(lo, r.rank);
      hi = std::max(hi, r.rank);
      if (r.rank != group.expect_rank) ++mismatches;
      const auto& sv = r.singular_values;
      const double kept = r.rank > 0 ? sv(r.rank - 1) : 0.0;
      const double dropped = r.rank < sv.size() ? sv(r.rank) : 0.0;
      std::vector<std::string> row{group.label, num(k)};
      append_coords(row, group.points[k]);
      for (const auto& cell : {num(r.rank), num(group.expect_rank), num(kept), num(dropped)}) row.push_back(cell);
      table.add_row(std::move(row));
    }
    c.metric(group.label + ".min_rank", lo);
    c.metric(group.label + ".max_rank", hi);
    c.metric(group.label + ".mismatches", mismatches);
  }
  c.tables.push_back(std::move(table));
}

void run_orbit(const Scenario& s, const OrbitTask& t, Collector& c) {
  const AnchoredBundle& bundle = *s.bundle;
  const OrbitSample sample =
      sample_orbit(bundle, coordinate_sections(bundle), t.x0, t.count, t.max_time, s.seed, s.step);
  Table table{"orbit", {"index"}, {}};
  append_header(table.header, "x", bundle.base_dim);
  for (std::size_t k = 0; k < sample.points.size(); ++k) {
    std::vector<std::string> row{num(k)};
    append_coords(row, sample.points[k]);
    table.add_row(std::move(row));
  }
  for (int i : t.watch) {
    double worst = 0.0;
    for (const auto& p : sample.points) worst = std::max(worst, std::abs(p(i)));
    c.metric("max_abs_x" + std::to_string(i), worst);
  }
  c.metric("samples", static_cast<double>(sample.points.size()));
  c.metric("dropped", static_cast<double>(sample.dropped.size()));
  c.tables.push_back(std::move(table));
}

// phi(t) = s0 + c (b - a) psi((t - a) / (b - a)) with psi increasing on [0, 1].
Reparameterization random_reparameterization(double a, double b, Rng& rng) {
  const double len = b - a;
  const double shift = rng.uniform(-1.0, 1.0);
  const double stretch = rng.uniform(0.5, 2.0);
  if (rng.uniform_int(0, 1) == 0) {
    const double alpha = rng.uniform(-0.9, 0.9);
    const double w = 2.0 * std::numbers::pi * rng.uniform_int(1, 3);
    return {[=](double t) {
              const double u = (t - a) / len;
              return shift + stretch * len * (u + alpha * std::sin(w * u) / w);
            },
            [=](double t) {
              const double u = (t - a) / len;
              return stretch * (1.0 + alpha * std::cos(w * u));
            }};
  }
  double beta = rng.uniform(0.3, 3.0) * rng.sign();
  const double denom = std::expm1(beta);
  return {[=](double t) { return shift + stretch * len * std::expm1(beta * (t - a) / len) / denom; },
          [=](double t) { return stretch * beta * std::exp(beta * (t - a) / len) / denom; }};
}

void run_transport(const Scenario& s, const TransportTask& t, Collector& c) {
  const TrivializedLift& lift = *s.lift;
  Rng rng(s.seed);
  const auto loops = random_polygon_loops(lift.bundle.fiber_dim, t.loops, t.scale, rng);
  const GroupElementd e = GroupElementd::identity(lift.group);

  Table table{"transport", {"check", "loop", "trial", "deviation"}, {}};
  std::vector<GroupElementd> disp;
  double closure = 0.0, admissibility = 0.0;
  for (const auto& loop : loops) {
    const LiftedCurve curve = transport(lift, loop, t.x0, e, s.step);
    closure = std::max(closure, (curve.base.end() - t.x0).norm());
    admissibility = std::max(admissibility, admissibility_residual(lift.bundle, curve.base));
    disp.push_back(curve.end());
  }
  c.metric("max_closure_gap", closure);
  c.metric("max_admissibility_residual", admissibility);

  auto record = [&](const char* check, std::size_t loop, int trial, double dev, double& worst) {
    table.add_row({check, num(loop), num(trial), num(dev)});
    worst = std::max(worst, dev);
  };

  if (t.equivariance) {
    double worst = 0.0;
    for (std::size_t k = 0; k < loops.size(); ++k) {
      for (int trial = 0; trial < t.group_samples; ++trial) {
        const GroupElementd g = random_group_element(lift.group, rng);
        const GroupElementd moved = transport(lift, loops[k], t.x0, g, s.step).end();
        record("equivariance", k, trial, matrix_distance(moved, disp[k] * g), worst);
      }
    }
    c.metric("equivariance_max", worst);
  }
  if (t.reverse_inverse) {
    double worst = 0.0;
    for (std::size_t k = 0; k < loops.size(); ++k) {
      const GroupElementd back = displacement(lift, reverse(loops[k]), t.x0, s.step);
      record("reverse_inverse", k, 0, matrix_distance(back * disp[k], e), worst);
    }
    c.metric("reverse_inverse_max", worst);
  }
  if (t.composition) {
    double worst = 0.0;
    for (int trial = 0; trial < t.pairs; ++trial) {
      const auto i = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(loops.size()) - 1));
      auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(loops.size()) - 2));
      if (j >= i) ++j;
      const GroupElementd both = displacement(lift, concatenate_controls({loops[i], loops[j]}), t.x0, s.step);
      record("composition", i, trial, matrix_distance(both, disp[j] * disp[i]), worst);
    }
    c.metric("composition_max", worst);
  }
  if (t.reparameterization) {
    double worst = 0.0;
    for (int trial = 0; trial < t.reparameterizations; ++trial) {
      const std::size_t k = static_cast<std::size_t>(trial) % loops.size();
      const Reparameterization phi = random_reparameterization(loops[k].start_time(), loops[k].end_time(), rng);
      const PiecewiseControl moved = reparameterize(loops[k], phi, lift.bundle);
      const GroupElementd a = displacement(lift, moved, t.x0, s.step);
      record("reparameterization", k, trial, matrix_distance(a, disp[k]), worst);
    }
    c.metric("reparameterization_max", worst);
  }
  c.tables.push_back(std::move(table));
}

Table sample_table(const HolonomySample& sample) {
  const GroupKind group = sample.reference.group;
  const int m = group_spec<double>(group).matrix_size;
  const int d = group_spec<double>(group).algebra_dim;
  Table table{"holonomy", {"loop", "scale_a", "scale_b"}, {}};
  for (int r = 0; r < m; ++r)
    for (int col = 0; col < m; ++col) table.header.push_back("g" + std::to_string(r) + std::to_string(col));
  table.header.push_back("has_log");
  append_header(table.header, "log", d);
  table.header.push_back("closure_gap");
  for (std::size_t k = 0; k < sample.elements.size(); ++k) {
    std::vector<std::string> row{sample.loop_ids[k], num(sample.scales[k][0]), num(sample.scales[k][1])};
    for (int r = 0; r < m; ++r)
      for (int col = 0; col < m; ++col) row.push_back(num(sample.elements[k].matrix(r, col)));
    row.push_back(sample.logs[k] ? "1" : "0");
    for (int i = 0; i < d; ++i) row.push_back(sample.logs[k] ? num(sample.logs[k]->coords(i)) : "");
    row.push_back(num(sample.closure_gaps[k]));
    table.add_row(std::move(row));
  }
  return table;
}

void common_sample_metrics(const HolonomySample& sample, Collector& c) {
  double gap = 0.0, log_norm = 0.0, identity = 0.0;
  const GroupElementd e = GroupElementd::identity(sample.reference.group);
  for (std::size_t k = 0; k < sample.elements.size(); ++k) {
    gap = std::max(gap, sample.closure_gaps[k]);
    identity = std::max(identity, matrix_distance(sample.elements[k], e));
    if (sample.logs[k]) log_norm = std::max(log_norm, sample.logs[k]->norm());
  }
  c.metric("elements", static_cast<double>(sample.elements.size()));
  c.metric("skipped_logs", static_cast<double>(sample.skipped_logs));
  c.metric("max_closure_gap", gap);
  c.metric("max_log_norm", log_norm);
  c.metric("max_identity_deviation", identity);
}

void run_holonomy(const Scenario& s, const HolonomyTask& t, Collector& c) {
  const TrivializedLift& lift = *s.lift;
  const HolonomySample sample = sample_holonomy(lift, t.loops, s.step);
  common_sample_metrics(sample, c);

  if (t.area_rule) {
    // Family loops come first in the sample as L_i, rev(L_i) pairs.
    const auto loops = generate_loops(t.loops, lift.bundle);
    double oracle_err = 0.0, sides_err = 0.0;
    Table areas{"area_rule", {"loop", "shoelace_area", "sides_area", "log_coordinate"}, {}};
    for (std::size_t i = 0; i < loops.size(); ++i) {
      const RealizedCurve base = integrate_admissible(lift.bundle, loops[i], t.loops.x0, s.step);
      const double area = polygon_signed_area(base.base, 0, 1);
      const auto& lg = sample.logs[2 * i];
      const double coord = lg ? lg->coords(t.area_rule->coordinate) : std::numeric_limits<double>::quiet_NaN();
      const auto& lgr = sample.logs[2 * i + 1];
      const double coord_rev = lgr ? lgr->coords(t.area_rule->coordinate) : std::numeric_limits<double>::quiet_NaN();
      const double predicted = t.area_rule->factor * area;
      const double e1 = std::abs(coord - predicted), e2 = std::abs(coord_rev + predicted);
      oracle_err = std::max({oracle_err, std::isnan(e1) ? kInf : e1, std::isnan(e2) ? kInf : e2});
      double sides = std::numeric_limits<double>::quiet_NaN();
      if (t.loops.kind != LoopKind::Polygon) {
        sides = t.loops.orientation * t.loops.sides[i][0] * t.loops.sides[i][1];
        const double e3 = std::abs(coord - t.area_rule->factor * sides);
        sides_err = std::max(sides_err, std::isnan(e3) ? kInf : e3);
      }
      areas.add_row({sample.loop_ids[2 * i], num(area), std::isnan(sides) ? "" : num(sides), num(coord)});
    }
    c.metric("area_rule_error", oracle_err);
    if (t.loops.kind != LoopKind::Polygon) c.metric("area_vs_sides_error", sides_err);
    c.tables.push_back(std::move(areas));
  }

  if (t.conjugation_samples > 0) {
    Rng rng(s.seed);
    double worst = 0.0;
    for (int trial = 0; trial < t.conjugation_samples; ++trial) {
      const GroupElementd g = random_group_element(lift.group, rng);
      const HolonomySample direct = sample_holonomy(lift, t.loops, s.step, g);
      const HolonomySample conj = conjugate_sample(sample, g);
      for (std::size_t k = 0; k < direct.elements.size(); ++k)
        worst = std::max(worst, matrix_distance(direct.elements[k], conj.elements[k]));
    }
    c.metric("conjugation_max", worst);
  }
  c.tables.push_back(sample_table(sample));
}

void run_algebra(const Scenario& s, const AlgebraTask& t, Collector& c) {
  const TrivializedLift& lift = *s.lift;
  const HolonomySample sample = sample_holonomy(lift, t.loops, s.step);
  common_sample_metrics(sample, c);
  const AlgebraEstimate est = holonomy_algebra(sample, t.depth, t.tol);
  c.metric("rank", est.rank);
  c.metric("closure_residual", est.closure_residual);

  const int d = group_spec<double>(lift.group).algebra_dim;
  Table basis{"algebra_basis", {"reference", "index"}, {}};
  append_header(basis.header, "c", d);
  for (std::size_t k = 0; k < est.basis.size(); ++k) {
    std::vector<std::string> row{"e", num(k)};
    append_coords(row, est.basis[k].coords);
    basis.add_row(std::move(row));
  }

  if (t.reference_samples > 0) {
    Rng rng(s.seed);
    double worst = 0.0;
    int mismatches = 0;
    for (int trial = 0; trial < t.reference_samples; ++trial) {
      const GroupElementd g = random_group_element(lift.group, rng);
      const AlgebraEstimate shifted = holonomy_algebra(sample_holonomy(lift, t.loops, s.step, g), t.depth, t.tol);
      for (std::size_t k = 0; k < shifted.basis.size(); ++k) {
        std::vector<std::string> row{"g" + std::to_string(trial), num(k)};
        append_coords(row, shifted.basis[k].coords);
        basis.add_row(std::move(row));
      }
      if (shifted.rank != est.rank) {
        ++mismatches;
        worst = std::max(worst, std::numbers::pi / 2);
        continue;
      }
      std::vector<AlgebraElementd> moved;
      const GroupElementd g_inv = inverse(g);
      for (const auto& b : est.basis) moved.push_back(ad_action(g_inv, b));
      const Vector angles = principal_angles(moved, shifted.basis);
      if (angles.size() > 0) worst = std::max(worst, angles.maxCoeff());
    }
    c.metric("max_principal_angle", worst);
    c.metric("reference_rank_mismatches", mismatches);
  }

  if (t.lifted) {
    std::vector<VectorField> fields;
    for (const auto& sec : coordinate_sections(lift.bundle)) fields.push_back(lifted_section_field(lift, sec));
    const RankResult r = bracket_rank(fields, flatten_point(t.lifted->x0, t.lifted->g), t.lifted->depth);
    c.metric("lifted_bracket_rank", r.rank);
  }
  c.tables.push_back(std::move(basis));
  c.tables.push_back(sample_table(sample));
}

void run_convergence(const Scenario&, const ConvergenceTask& t, const RunOptions& options, Collector& c) {
  std::vector<double> steps = t.steps;
  if (options.step) steps = {*options.step, *options.step / 2, *options.step / 4};
  auto rhs = [&](double time) {
    Vector coords(static_cast<Eigen::Index>(t.components.size()));
    for (std::size_t i = 0; i < t.components.size(); ++i)
      coords(static_cast<Eigen::Index>(i)) = evaluate_rhs_component(t.components[i], time);
    return AlgebraElementd{t.group, coords};
  };
  const GroupElementd e = GroupElementd::identity(t.group);
  double drift = 0.0;
  auto solve = [&](double h) {
    const GroupPath<double> path = solve_right_log_ode(rhs, e, t.t0, t.t1, h);
    for (const auto& g : path.elements) drift = std::max(drift, constraint_residual(g));
    return path.elements.back();
  };
  const double h_min = *std::min_element(steps.begin(), steps.end());
  const GroupElementd reference = solve(h_min / t.reference_divisor);

  Table table{"convergence", {"step", "error", "pairwise_order"}, {}};
  std::vector<double> log_h, log_e;
  double prev_h = 0.0, prev_e = 0.0;
  for (double h : steps) {
    const double err = matrix_distance(solve(h), reference);
    std::string order;
    if (prev_h > 0.0 && err > 0.0 && prev_e > 0.0) order = num(std::log(prev_e / err) / std::log(prev_h / h));
    table.add_row({num(h), num(err), order});
    log_h.push_back(std::log(h));
    log_e.push_back(std::log(std::max(err, std::numeric_limits<double>::min())));
    prev_h = h;
    prev_e = err;
  }
  // Least-squares slope of log error against log step.
  const double n = static_cast<double>(log_h.size());
  double mh = 0.0, me = 0.0;
  for (std::size_t i = 0; i < log_h.size(); ++i) {
    mh += log_h[i] / n;
    me += log_e[i] / n;
  }
  double num_s = 0.0, den_s = 0.0;
  for (std::size_t i = 0; i < log_h.size(); ++i) {
    num_s += (log_h[i] - mh) * (log_e[i] - me);
    den_s += (log_h[i] - mh) * (log_h[i] - mh);
  }
  c.metric("observed_order", den_s > 0.0 ? num_s / den_s : std::numeric_limits<double>::quiet_NaN());
  c.metric("constraint_drift", drift);
  c.tables.push_back(std::move(table));
}

bool grade(double value, const Tolerance& t) {
  if (std::isnan(value)) return false;
  if (t.min && value < *t.min) return false;
  if (t.max && value > *t.max) return false;
  if (t.equals && value != *t.equals) return false;
  return true;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

RunResult execute(const Scenario& scenario, const RunOptions& options) {
  Scenario s = scenario;
  if (options.step) s.step = *options.step;
  Collector c;
  std::visit(
      [&](const auto& task) {
        using T = std::decay_t<decltype(task)>;
        if constexpr (std::is_same_v<T, RankMapTask>) run_rank_map(s, task, c);
        else if constexpr (std::is_same_v<T, OrbitTask>) run_orbit(s, task, c);
        else if constexpr (std::is_same_v<T, TransportTask>) run_transport(s, task, c);
        else if constexpr (std::is_same_v<T, HolonomyTask>) run_holonomy(s, task, c);
        else if constexpr (std::is_same_v<T, AlgebraTask>) run_algebra(s, task, c);
        else run_convergence(s, task, options, c);
      },
      s.params);

  for (const auto& [name, tol] : s.tolerances) {
    const bool known = std::any_of(c.metrics.begin(), c.metrics.end(), [&](const Metric& m) { return m.name == name; });
    if (!known) {
      std::string names;
      for (const auto& m : c.metrics) names += (names.empty() ? "" : ", ") + m.name;
      throw InputError(s.origin + ":" + std::to_string(tol.line) + ": tolerance for unknown metric '" + name +
                       "' (task produces: " + names + ")");
    }
  }

  RunResult result;
  for (auto& m : c.metrics) {
    if (auto it = s.tolerances.find(m.name); it != s.tolerances.end()) {
      Tolerance t = it->second;
      if (t.max) *t.max *= options.tol_scale;
      m.pass = grade(m.value, t);
      m.tolerance = t;
      result.passed = result.passed && m.pass;
    }
  }
  result.metrics = std::move(c.metrics);
  result.tables = std::move(c.tables);
  return result;
}

Table metrics_table(const RunResult& result) {
  Table table{"metrics", {"metric", "value", "min", "max", "equals", "pass"}, {}};
  auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
  for (const auto& m : result.metrics) {
    const Tolerance t = m.tolerance.value_or(Tolerance{});
    table.add_row({m.name, format_number(m.value), opt(t.min), opt(t.max), opt(t.equals),
                   m.tolerance ? (m.pass ? "pass" : "fail") : "info"});
  }
  return table;
}

int run_command(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  const auto started = std::chrono::steady_clock::now();
  Scenario scenario;
  RunResult result;
  try {
    if (options.run.step && !(*options.run.step > 0.0)) throw InputError("--step must be positive");
    if (!(options.run.tol_scale > 0.0)) throw InputError("--tol-scale must be positive");
    scenario = load_scenario(options.target, options.seed);
    result = execute(scenario, options.run);
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << (scenario.origin.empty() ? options.target : scenario.origin) << ": " << e.what() << "\n";
    return 2;
  }

  const std::filesystem::path dir = options.out_dir / scenario.name;
  const std::string stamp = options.timestamp ? "generated " + utc_timestamp() : "";
  try {
    std::filesystem::create_directories(dir);
    for (const auto& table : result.tables) write_atomic(dir / (table.name + ".csv"), render_csv(table, stamp));
    write_atomic(dir / "metrics.csv", render_csv(metrics_table(result), stamp));
  } catch (const std::exception& e) {
    err << "error: writing artifacts: " << e.what() << "\n";
    return 2;
  }

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  out << "scenario  " << scenario.name << " (" << scenario.origin << ")\n";
  if (!scenario.description.empty()) out << "          " << scenario.description << "\n";
  out << "task      " << to_string(scenario.task) << "\n";
  if (scenario.bundle) out << "bundle    " << scenario.bundle->name << "\n";
  if (scenario.lift) out << "lift      " << scenario.lift->name << " on " << to_string(scenario.lift->group) << "\n";
  out << "step      " << format_number(options.run.step.value_or(scenario.step)) << "\n";
  out << "seed      " << scenario.seed << "\n";
  for (const auto& m : result.metrics) {
    out << "  " << std::left << std::setw(32) << m.name << " " << std::setw(24) << format_number(m.value);
    if (m.tolerance) {
      std::string bound;
      if (m.tolerance->min) bound += ">= " + format_number(*m.tolerance->min) + " ";
      if (m.tolerance->max) bound += "<= " + format_number(*m.tolerance->max) + " ";
      if (m.tolerance->equals) bound += "== " + format_number(*m.tolerance->equals) + " ";
      out << (m.pass ? "PASS " : "FAIL ") << bound;
    }
    out << "\n";
  }
  out << "artifacts " << dir.string() << "\n";
  out << "wall time " << std::fixed << std::setprecision(3) << wall << " s\n" << std::defaultfloat;
  out << (result.passed ? "result    PASS" : "result    FAIL") << "\n";
  return result.passed ? 0 : 1;
}

int list_command(std::ostream& out) {
  for (const auto& name : list_scenarios()) out << name << "\n";
  return 0;
}

}  // namespace leafhol::cli
