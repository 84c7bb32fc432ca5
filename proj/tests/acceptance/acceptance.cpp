// One PASS/FAIL line per acceptance criterion; exits non-zero when any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "leafhol/holonomy.hpp"
#include "leafhol/lie_ode.hpp"
#include "support/oracles.hpp"

using namespace leafhol;

namespace {

Vector v2(double a, double b) { return Eigen::Vector2d(a, b); }

double distance(const GroupElementd& a, const GroupElementd& b) { return (a.matrix - b.matrix).norm(); }

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Outcome {
  bool pass;
  std::string detail;
};

LoopFamily rectangles(std::vector<std::array<double, 2>> sides) {
  LoopFamily f;
  f.kind = LoopKind::Rectangles;
  f.x0 = Vector::Zero(2);
  f.sides = std::move(sides);
  return f;
}

constexpr double kStep = 1e-3;

// --- 1, 2: leaves of the built-in bundles -------------------------------

Outcome montgomery_rank() {
  const auto m = montgomery_bundle();
  const auto secs = coordinate_sections(m);
  const std::vector<VectorField> fields{induced_field(m, secs[0]), induced_field(m, secs[1])};
  Rng rng(101);
  int lo = 99, hi = -1;
  for (int k = 0; k < 20; ++k) {
    const Vector x = Eigen::Vector3d(rng.uniform(0.2, 2.0), rng.uniform(-std::numbers::pi, std::numbers::pi),
                                     rng.uniform(-1, 1));
    const int r = bracket_rank(fields, x, 2, 1e-8).rank;
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  return {lo == 3 && hi == 3, fmt("rank range [%d, %d] at 20 points with 0.2 <= r <= 2, expected 3", lo, hi)};
}

Outcome twoleaf_structure() {
  const auto two = twoleaf_bundle();
  const auto secs = coordinate_sections(two);
  const std::vector<VectorField> fields{induced_field(two, secs[0]), induced_field(two, secs[1])};
  Rng rng(102);
  int on_line = 0, off_line = 0;
  for (int k = 0; k < 10; ++k) on_line += bracket_rank(fields, v2(rng.uniform(-2, 2), 0.0), 2).rank == 1;
  for (int k = 0; k < 10; ++k) {
    const double y = rng.sign() * rng.uniform(0.1, 2.0);
    off_line += bracket_rank(fields, v2(rng.uniform(-2, 2), y), 2).rank == 2;
  }
  const OrbitSample orbit = sample_orbit(two, secs, v2(0, 0), 100, 1.0, 103);
  double ymax = 0.0;
  for (const auto& p : orbit.points) ymax = std::max(ymax, std::abs(p(1)));
  const bool ok = on_line == 10 && off_line == 10 && orbit.points.size() == 100 && ymax <= 1e-9;
  return {ok, fmt("rank 1 at %d/10 points on y = 0, rank 2 at %d/10 off it, max |y| of %zu orbit samples %.3g <= 1e-9",
                  on_line, off_line, orbit.points.size(), ymax)};
}

// --- 3: abelian area rule -------------------------------------------------

Outcome area_rule() {
  const auto id = planar_identity_bundle();
  const auto lift = so2_area_lift(id);
  double worst = 0.0, oracle_gap = 0.0;
  for (auto [a, b] : {std::array<double, 2>{1, 1}, {1, 2}, {0.5, 0.5}}) {
    const PiecewiseControl loop = rectangle_loop(2, 0, 1, a, b);
    const RealizedCurve base = integrate_admissible(id, loop, Vector::Zero(2), kStep);
    const double area = oracle::shoelace(base.base.points);
    const GroupElementd g = displacement(lift, loop, Vector::Zero(2), kStep);
    const double angle = std::atan2(g.matrix(1, 0), g.matrix(0, 0));
    worst = std::max(worst, std::abs(angle - a * b));
    oracle_gap = std::max(oracle_gap, std::abs(angle - area));
  }
  return {worst <= 1e-6 && oracle_gap <= 1e-6,
          fmt("max |angle - ab| %.3g, max |angle - shoelace| %.3g (<= 1e-6)", worst, oracle_gap)};
}

// --- 4: solver order --------------------------------------------------------

Outcome solver_order() {
  auto rhs = [](double t) {
    return AlgebraElementd{GroupKind::SO3, Eigen::Vector3d(std::sin(t), std::cos(2 * t), t)};
  };
  const GroupElementd e = GroupElementd::identity(GroupKind::SO3);
  const std::vector<double> steps{0.1, 0.05, 0.025};
  double drift = 0.0;
  auto solve = [&](double h) {
    const auto path = solve_right_log_ode(rhs, e, 0.0, 2.0, h);
    for (const auto& g : path.elements) drift = std::max(drift, constraint_residual(g));
    return path.elements.back();
  };
  const GroupElementd reference = solve(steps.back() / 64);
  // Least-squares slope of log error against log step.
  std::vector<double> lh, le;
  for (double h : steps) {
    lh.push_back(std::log(h));
    le.push_back(std::log(distance(solve(h), reference)));
  }
  const double mh = (lh[0] + lh[1] + lh[2]) / 3, me = (le[0] + le[1] + le[2]) / 3;
  double num = 0, den = 0;
  for (int i = 0; i < 3; ++i) {
    num += (lh[i] - mh) * (le[i] - me);
    den += (lh[i] - mh) * (lh[i] - mh);
  }
  const double order = num / den;
  return {std::abs(order - 4.0) <= 0.3 && drift <= 1e-8,
          fmt("observed order %.4f (4.0 +- 0.3), orthogonality drift %.3g (<= 1e-8)", order, drift)};
}

// --- 5, 6, 7: transport identities on random loops ------------------------

struct TransportStats {
  double equivariance = 0, reverse_inverse = 0, composition = 0;
};

TransportStats transport_stats() {
  const auto id = planar_identity_bundle();
  TransportStats out;
  for (const auto& lift : {so2_area_lift(id), so3_flat2_lift(id)}) {
    Rng rng(lift.group == GroupKind::SO2 ? 201 : 202);
    const auto loops = random_polygon_loops(2, 50, 0.5, rng);
    const Vector x0 = Vector::Zero(2);
    const GroupElementd e = GroupElementd::identity(lift.group);
    std::vector<GroupElementd> disp;
    for (const auto& loop : loops) {
      const GroupElementd a = transport(lift, loop, x0, e, kStep).end();
      disp.push_back(a);
      for (int k = 0; k < 5; ++k) {
        const GroupElementd g = random_group_element(lift.group, rng);
        out.equivariance = std::max(out.equivariance, distance(transport(lift, loop, x0, g, kStep).end(), a * g));
      }
      const GroupElementd r = displacement(lift, reverse(loop), x0, kStep);
      out.reverse_inverse = std::max(out.reverse_inverse, distance(r * a, e));
    }
    for (int k = 0; k < 30; ++k) {
      const int i = rng.uniform_int(0, 49), j = rng.uniform_int(0, 49);
      const GroupElementd both = displacement(lift, concatenate_controls({loops[i], loops[j]}), x0, kStep);
      out.composition = std::max(out.composition, distance(both, disp[j] * disp[i]));
    }
  }
  return out;
}

// --- 8, 9, 10: holonomy samples --------------------------------------------

Outcome conjugation() {
  const auto id = planar_identity_bundle();
  const auto lift = so3_flat2_lift(id);
  const LoopFamily family = rectangles({{0.5, 0.5}, {1.0, 0.5}, {0.5, 1.0}});
  const HolonomySample at_e = sample_holonomy(lift, family, kStep);
  Rng rng(301);
  double worst = 0.0;
  for (int k = 0; k < 5; ++k) {
    const GroupElementd g = random_group_element(GroupKind::SO3, rng);
    const HolonomySample at_g = sample_holonomy(lift, family, kStep, g);
    for (std::size_t n = 0; n < at_e.elements.size(); ++n)
      worst = std::max(worst, distance(at_g.elements[n], inverse(g) * at_e.elements[n] * g));
  }
  return {worst <= 1e-9, fmt("max |a(ug) - g^-1 a(u) g| %.3g over 5 references (<= 1e-9)", worst)};
}

Outcome flatness() {
  const auto id = planar_identity_bundle();
  const auto lift = zero_lift(id, GroupKind::SO3);
  LoopFamily lasso = rectangles({{0.5, 0.5}, {1.0, 2.0}});
  lasso.kind = LoopKind::Lasso;
  lasso.tail = v2(0.3, -0.6);
  double worst = 0.0;
  std::size_t count = 0;
  for (const LoopFamily& f : {rectangles({{0.5, 0.5}, {1.0, 2.0}, {2.0, 1.0}}), lasso}) {
    const HolonomySample s = sample_holonomy(lift, f, kStep);
    for (const auto& a : s.elements) {
      worst = std::max(worst, log(a).norm());
      ++count;
    }
  }
  return {worst <= 1e-9, fmt("max |log a| %.3g over %zu loops (<= 1e-9)", worst, count)};
}

Outcome holonomy_algebra_check() {
  const auto id = planar_identity_bundle();
  const LoopFamily family = rectangles({{0.5, 0.5}, {1.0, 0.5}, {0.5, 1.0}});
  const AlgebraEstimate abelian = holonomy_algebra(sample_holonomy(so2_area_lift(id), family, kStep), 3);
  const AlgebraEstimate flat = holonomy_algebra(sample_holonomy(so3_flat2_lift(id), family, kStep), 3);

  // B = (x1 s2 - x2 s1)/2 E3 has a one-dimensional algebra, so Ad-transport
  // moves it to a genuinely different line.
  CoefficientPolynomials area3(3);
  area3[2] = {{0.5, {1, 0, 0, 1}}, {-0.5, {0, 1, 1, 0}}};
  const auto line_lift = custom_polynomial_lift(id, GroupKind::SO3, area3);
  const AlgebraEstimate line = holonomy_algebra(sample_holonomy(line_lift, family, kStep), 3);

  const auto flat_lift = so3_flat2_lift(id);
  const std::vector<std::pair<const TrivializedLift*, const AlgebraEstimate*>> cases{{&flat_lift, &flat},
                                                                                    {&line_lift, &line}};
  Rng rng(302);
  double angle = 0.0;
  bool ranks_kept = true;
  for (int k = 0; k < 3; ++k) {
    const GroupElementd g = random_group_element(GroupKind::SO3, rng);
    for (const auto& [lift, est] : cases) {
      const AlgebraEstimate there = holonomy_algebra(sample_holonomy(*lift, family, kStep, g), 3);
      if (there.rank != est->rank) {
        ranks_kept = false;
        continue;
      }
      std::vector<AlgebraElementd> moved;
      for (const auto& b : est->basis) moved.push_back(ad_action(inverse(g), b));
      angle = std::max(angle, principal_angles(moved, there.basis).maxCoeff());
    }
  }
  const bool ok = abelian.rank == 1 && flat.rank == 3 && flat.closure_residual <= 1e-6 && line.rank == 1 &&
                  ranks_kept && angle <= 1e-6;
  return {ok, fmt("so2-area rank %d, so3-flat2 rank %d with closure residual %.3g (<= 1e-6), "
                  "max principal angle after Ad-transport %.3g (<= 1e-6)",
                  abelian.rank, flat.rank, flat.closure_residual, angle)};
}

// --- 11: reparameterization ---------------------------------------------------

Outcome reparameterization() {
  const auto id = planar_identity_bundle();
  const auto lift = so2_area_lift(id);
  Rng rng(401);
  const auto loops = random_polygon_loops(2, 20, 0.5, rng);
  double worst = 0.0;
  for (const auto& loop : loops) {
    const double a = loop.start_time(), b = loop.end_time(), len = b - a;
    // phi(t) = s0 + c (t + alpha len sin(2 pi k (t - a) / len) / (2 pi k)), increasing for alpha < 1.
    const double alpha = rng.uniform(0.0, 0.9), s0 = rng.uniform(-1, 1), c = rng.uniform(0.5, 2.0);
    const double w = 2 * std::numbers::pi * rng.uniform_int(1, 3) / len;
    const Reparameterization phi{[=](double t) { return s0 + c * (t + alpha * std::sin(w * (t - a)) / w); },
                                 [=](double t) { return c * (1 + alpha * std::cos(w * (t - a))); }};
    const GroupElementd before = displacement(lift, loop, Vector::Zero(2), kStep);
    const GroupElementd after = displacement(lift, reparameterize(loop, phi, id), Vector::Zero(2), kStep);
    worst = std::max(worst, distance(before, after));
  }
  return {worst <= 1e-7, fmt("max displacement change %.3g over 20 monotone reparameterizations (<= 1e-7)", worst)};
}

// --- 12: leaf restriction -----------------------------------------------------

Outcome leaf_restriction() {
  const auto two = twoleaf_bundle();
  // B = (x s1 + y s2 + x^2 s2) E3 + y s1 E1 on SO(3).
  CoefficientPolynomials poly(3);
  poly[0] = {{1.0, {0, 1, 1, 0}}};
  poly[2] = {{1.0, {1, 0, 1, 0}}, {1.0, {0, 1, 0, 1}}, {1.0, {2, 0, 0, 1}}};
  const auto lift = custom_polynomial_lift(two, GroupKind::SO3, poly);

  BundleMorphismSpec leaf;
  leaf.base_map = [](const Vector& x) { return v2(x(0), 0.0); };
  leaf.base_inverse = [](const Vector& x) { return Vector::Constant(1, x(0)); };
  leaf.fiber_map = leaf.fiber_inverse = [](const Vector&, const Vector& s) { return s; };
  leaf.source_group = leaf.target_group = GroupKind::SO3;
  leaf.algebra_map = Matrix::Identity(3, 3);
  const AnchoredBundle restricted = pullback_bundle(leaf, two, 1, "twoleaf|y=0");
  const auto on_leaf = pullback_lift(leaf, lift, restricted);
  const auto back = transfer_lift(leaf, on_leaf, two);

  Rng rng(501);
  const auto loops = random_polygon_loops(2, 20, 0.5, rng);
  double worst = 0.0, anchor = check_morphism(leaf, restricted, two, 50, 502).anchor_residual;
  for (const auto& loop : loops) {
    const double x = rng.uniform(-1, 1);
    const GroupElementd full = displacement(lift, loop, v2(x, 0), kStep);
    const GroupElementd restricted_g = displacement(on_leaf, loop, Vector::Constant(1, x), kStep);
    const GroupElementd transferred = displacement(back, loop, v2(x, 0), kStep);
    worst = std::max({worst, distance(full, leaf.map_group(restricted_g)), distance(full, transferred)});
  }
  return {worst <= 1e-8 && anchor <= 1e-6,
          fmt("max holonomy change %.3g over 20 in-leaf loops (<= 1e-8), morphism anchor residual %.3g", worst, anchor)};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& f) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o{false, ""};
    try {
      o = f();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s criterion %2d %-22s %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
    failures += !o.pass;
  };

  report(1, "montgomery-rank", montgomery_rank);
  report(2, "twoleaf-structure", twoleaf_structure);
  report(3, "abelian-area-rule", area_rule);
  report(4, "solver-order", solver_order);

  // Criteria 5 to 7 share one set of transports, computed during criterion 5.
  std::optional<TransportStats> stats;
  auto from_stats = [&](double TransportStats::*field, const char* what, double tol) {
    return [&stats, field, what, tol]() -> Outcome {
      if (!stats) stats = transport_stats();
      return {(*stats).*field <= tol, fmt("max %s %.3g (<= %g)", what, (*stats).*field, tol)};
    };
  };
  report(5, "equivariance", from_stats(&TransportStats::equivariance, "|c^h(ug) - c^h(u) g|", 1e-8));
  report(6, "reverse-inverse", from_stats(&TransportStats::reverse_inverse, "|a(c*) a(c) - e|", 1e-8));
  report(7, "composition", from_stats(&TransportStats::composition, "|a(c2 c1) - a(c2) a(c1)|", 1e-8));
  report(8, "conjugation", conjugation);
  report(9, "flatness", flatness);
  report(10, "holonomy-algebra", holonomy_algebra_check);
  report(11, "reparameterization", reparameterization);
  report(12, "leaf-restriction", leaf_restriction);

  std::printf("%d of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
