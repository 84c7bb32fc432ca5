#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "leafhol/errors.hpp"
#include "leafhol/lift.hpp"
#include "leafhol/random.hpp"
#include "support/oracles.hpp"

using namespace leafhol;

namespace {

Vector v2(double a, double b) { return Eigen::Vector2d(a, b); }

PiecewiseControl legs(const std::vector<Vector>& velocities) {
  std::vector<PiecewiseControl> parts;
  for (const auto& v : velocities) parts.push_back(constant_control(v, 0, 1));
  return concatenate_controls(parts);
}

PiecewiseControl rectangle(double a, double b) { return legs({v2(a, 0), v2(0, b), v2(-a, 0), v2(0, -b)}); }

// A closed loop at the origin of the plane with non-constant legs: each leg
// d - w + 2 w tau integrates to d over unit time.
PiecewiseControl wobbly_loop(Rng& rng) {
  const Vector p = rng.uniform_vector(2, -0.6, 0.6), q = rng.uniform_vector(2, -0.6, 0.6);
  auto leg = [&](const Vector& d, double t0) {
    const Vector w = rng.normal_vector(2) * 0.3;
    return ControlSegment{t0, t0 + 1, Control::polynomial({d - w, 2 * w}), 1};
  };
  PiecewiseControl c;
  c.segments = {leg(p, 0), leg(q - p, 1), leg(-q, 2)};
  return c;
}

double angle(const GroupElementd& g) { return std::atan2(g.matrix(1, 0), g.matrix(0, 0)); }

GroupElementd random_element(GroupKind kind, Rng& rng) {
  return exp(AlgebraElementd{kind, rng.normal_vector(group_spec<double>(kind).algebra_dim)});
}

}  // namespace

TEST_CASE("lift values") {
  const auto id = planar_identity_bundle();
  const auto zero = zero_lift(id, GroupKind::SO3);
  const auto e3 = GroupElementd::identity(GroupKind::SO3);
  const LiftVelocity z = lift_value(zero, v2(0.3, 0.4), e3, v2(1, 2));
  CHECK(z.base == v2(1, 2));
  CHECK(z.group.norm() == 0.0);

  const auto area = so2_area_lift(id);
  const LiftVelocity a = lift_value(area, v2(2, 0), GroupElementd::identity(GroupKind::SO2), v2(0, 3));
  CHECK((a.group - 3.0 * group_spec<double>(GroupKind::SO2).basis[0]).norm() <= 1e-15);
  CHECK(so2_area_lift(id, 2.0).coeff(v2(2, 0), v2(0, 3))(0) == doctest::Approx(6.0));

  Rng rng(1);
  const auto flat = so3_flat2_lift(id);
  for (int i = 0; i < 50; ++i) {
    const Vector x = rng.normal_vector(2), s = rng.normal_vector(2);
    const GroupElementd g = random_element(GroupKind::SO3, rng), h = random_element(GroupKind::SO3, rng);
    const LiftVelocity lhs = lift_value(flat, x, g * h, s);
    const LiftVelocity rhs = lift_value(flat, x, g, s);
    CHECK((lhs.group - rhs.group * h.matrix).norm() <= 1e-15 * (1 + lhs.group.norm()));
    CHECK(lhs.base == rhs.base);
  }
  CHECK_THROWS_AS(lift_value(flat, v2(0, 0), GroupElementd::identity(GroupKind::SO2), v2(0, 0)), SpecMismatch);
}

TEST_CASE("lifted section fields") {
  const auto id = planar_identity_bundle();
  const auto zero = zero_lift(id, GroupKind::SO2);
  const VectorField f = lifted_section_field(zero, constant_section(v2(1, -1)));
  const Vector p = flatten_point(v2(0.2, 0.3), exp(AlgebraElementd{GroupKind::SO2, Vector::Constant(1, 0.4)}));
  const Vector out = f(p);
  CHECK(out.head(2) == v2(1, -1));
  CHECK(out.tail(4).norm() == 0.0);
}

TEST_CASE("lifted rank for the flat-two lift") {
  const auto id = planar_identity_bundle();
  const auto flat = so3_flat2_lift(id);
  const std::vector<VectorField> fields{lifted_section_field(flat, constant_section(v2(1, 0))),
                                        lifted_section_field(flat, constant_section(v2(0, 1)))};
  Rng rng(2);
  const Vector p = flatten_point(v2(0.3, -0.2), random_element(GroupKind::SO3, rng));
  CHECK(bracket_rank(fields, p, 0).rank == 2);
  // [E1, E2] = E3 gives the third direction after one bracket; the second
  // round adds [E1, E3] and [E2, E3], filling M x SO(3).
  CHECK(bracket_rank(fields, p, 1).rank == 3);
  CHECK(bracket_rank(fields, p, 2).rank == 5);
}

TEST_CASE("pure gauge lift is flat") {
  const auto id = planar_identity_bundle();
  const auto gauge = so3_pure_gauge_lift(id);
  CHECK_NOTHROW(check_split(gauge, 100, 3));
  const VectorField a = lifted_section_field(gauge, constant_section(v2(1, 0)));
  const VectorField b = lifted_section_field(gauge, constant_section(v2(0, 1)));
  Rng rng(3);
  for (int i = 0; i < 10; ++i) {
    const Vector p = flatten_point(rng.uniform_vector(2, -1, 1), random_element(GroupKind::SO3, rng));
    const VectorField ab = lie_bracket(a, b);
    for (const VectorField& br : {ab, lie_bracket(a, ab), lie_bracket(b, ab)}) CHECK(br(p).tail(9).norm() <= 1e-6);
  }

  TrivializedLift broken = gauge;
  broken.coeff = [](const Vector&, const Vector& s) -> Vector { return Eigen::Vector3d(s(0), 0, 0); };
  CHECK_THROWS_AS(check_split(broken, 10, 3), std::invalid_argument);
}

TEST_CASE("transport basics") {
  const auto id = planar_identity_bundle();
  Rng rng(4);
  const PiecewiseControl loop = wobbly_loop(rng);
  const auto zero = zero_lift(id, GroupKind::SO3);
  const GroupElementd g0 = random_element(GroupKind::SO3, rng);
  const LiftedCurve still = transport(zero, loop, v2(0, 0), g0, 1e-2);
  for (const auto& g : still.path) CHECK((g.matrix - g0.matrix).norm() == 0.0);

  // The base is exactly the admissible integration of the control.
  const auto flat = so3_flat2_lift(id);
  const LiftedCurve lc = transport(flat, loop, v2(0.1, 0.2), g0, 1e-2);
  const RealizedCurve rc = integrate_admissible(id, loop, v2(0.1, 0.2), 1e-2);
  REQUIRE(lc.base.base.points.size() == rc.base.points.size());
  REQUIRE(lc.path.size() == rc.base.points.size());
  for (std::size_t k = 0; k < rc.base.points.size(); ++k) CHECK(lc.base.base.points[k] == rc.base.points[k]);
  for (const auto& g : lc.path) CHECK(constraint_residual(g) <= 1e-12);

  // Fourth-order self-convergence.
  const auto fine = transport(flat, loop, v2(0.1, 0.2), g0, 5e-3).end();
  const auto coarse = transport(flat, loop, v2(0.1, 0.2), g0, 1e-2).end();
  const auto coarser = transport(flat, loop, v2(0.1, 0.2), g0, 2e-2).end();
  const double e1 = (coarse.matrix - fine.matrix).norm(), e2 = (coarser.matrix - coarse.matrix).norm();
  CHECK(e1 <= 1e-8);
  CHECK(std::log2(e2 / e1) == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("abelian transport matches the area integral") {
  const auto id = planar_identity_bundle();
  const auto area = so2_area_lift(id);
  Rng rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    PiecewiseControl c;
    double t = 0;
    for (int i = 0; i < 3; ++i) {
      const double d = rng.uniform(0.5, 1.2);
      c.segments.push_back({t, t + d, Control::sine(rng.normal_vector(2), rng.normal_vector(2), 2.5, 0.3), rng.sign()});
      t += d;
    }
    const LiftedCurve lc = transport(area, c, v2(0.2, -0.1), GroupElementd::identity(GroupKind::SO2), 1e-3);
    const auto& base = lc.base.base;
    double expected = 0.0;
    for (std::size_t segi = 0; segi < c.segments.size(); ++segi) {
      const auto& seg = c.segments[segi];
      const std::size_t lo = base.segment_starts[segi];
      const std::size_t hi = segi + 1 < c.segments.size() ? base.segment_starts[segi + 1] : base.points.size() - 1;
      std::vector<double> ts;
      std::vector<Vector> xs, ds;
      for (std::size_t k = lo; k <= hi; ++k) {
        ts.push_back(base.times[k]);
        xs.push_back(base.points[k]);
        ds.push_back(seg.sign * seg.at(std::clamp(base.times[k], seg.t0, seg.t1)));
      }
      expected += oracle::integrate(
          [&](double s) {
            const Vector x = oracle::hermite(ts, xs, ds, s);
            const Vector v = seg.sign * seg.at(s);
            return 0.5 * (x(0) * v(1) - x(1) * v(0));
          },
          seg.t0, seg.t1, 1e-13);
    }
    CHECK(std::abs(angle(lc.end()) - expected) <= 1e-8);
  }
}

TEST_CASE("equivariance, reversal and composition of displacements") {
  const auto id = planar_identity_bundle();
  Rng rng(6);
  for (const auto& lift : {so2_area_lift(id), so3_flat2_lift(id)}) {
    CAPTURE(lift.name);
    for (int trial = 0; trial < 10; ++trial) {
      const PiecewiseControl c1 = wobbly_loop(rng), c2 = wobbly_loop(rng);
      const GroupElementd g = random_element(lift.group, rng);
      const auto e = GroupElementd::identity(lift.group);
      const GroupElementd from_e = transport(lift, c1, v2(0, 0), e, 1e-2).end();
      const GroupElementd from_g = transport(lift, c1, v2(0, 0), g, 1e-2).end();
      CHECK((from_e * g).matrix.isApprox(from_g.matrix, 1e-10));

      const GroupElementd a1 = displacement(lift, c1, v2(0, 0), 1e-2);
      const GroupElementd a2 = displacement(lift, c2, v2(0, 0), 1e-2);
      const GroupElementd ar = displacement(lift, reverse(c1), v2(0, 0), 1e-2);
      CHECK(((ar * a1).matrix - e.matrix).norm() <= 1e-9);
      const GroupElementd a12 = displacement(lift, concatenate_controls({c1, c2}), v2(0, 0), 1e-2);
      CHECK((a12.matrix - (a2 * a1).matrix).norm() <= 1e-9);
    }
  }
}

TEST_CASE("displacement examples") {
  const auto id = planar_identity_bundle();
  const auto area = so2_area_lift(id);
  CHECK((displacement(area, PiecewiseControl{}, v2(0.5, 0.5), 1e-2).matrix - Eigen::Matrix2d::Identity()).norm() == 0.0);
  for (auto [a, b] : {std::pair{1.0, 2.0}, std::pair{1.0, 1.0}, std::pair{0.5, 0.5}}) {
    const PiecewiseControl loop = rectangle(a, b);
    const RealizedCurve rc = integrate_admissible(id, loop, v2(0, 0), 1e-3);
    const double polygon_area = oracle::shoelace(rc.base.points);
    CHECK(polygon_area == doctest::Approx(a * b).epsilon(1e-12));
    CHECK(std::abs(angle(displacement(area, loop, v2(0, 0), 1e-3)) - polygon_area) <= 1e-6);
  }
  try {
    displacement(area, legs({v2(1, 0)}), v2(0, 0), 1e-2);
    FAIL("expected NotALoop");
  } catch (const NotALoop& ex) {
    CHECK(ex.gap() == doctest::Approx(1.0));
  }
}

TEST_CASE("displacement of rho-connections ignores parameterization") {
  const auto id = planar_identity_bundle();
  const auto flat = so3_flat2_lift(id);
  REQUIRE(flat.rho_connection);
  Rng rng(7);
  const PiecewiseControl c = wobbly_loop(rng);
  const GroupElementd a = displacement(flat, c, v2(0, 0), 1e-3);
  const Reparameterization phi{[](double t) { return 1 + t + 0.3 * std::sin(2 * t) / 2; },
                               [](double t) { return 1 + 0.3 * std::cos(2 * t); }};
  const GroupElementd b = displacement(flat, reparameterize(c, phi, id), v2(0, 0), 1e-3);
  CHECK((a.matrix - b.matrix).norm() <= 1e-7);
}

TEST_CASE("morphisms and transfer") {
  const auto id = planar_identity_bundle();
  BundleMorphismSpec ident;
  ident.base_map = ident.base_inverse = [](const Vector& x) { return x; };
  ident.fiber_map = ident.fiber_inverse = [](const Vector&, const Vector& s) { return s; };
  ident.source_group = ident.target_group = GroupKind::SO3;
  ident.algebra_map = Matrix::Identity(3, 3);
  const MorphismCheck chk = check_morphism(ident, id, id, 50, 1);
  CHECK(chk.base_roundtrip == 0.0);
  CHECK(chk.anchor_residual <= 1e-9);
  CHECK(chk.homomorphism_residual == 0.0);

  const auto flat = so3_flat2_lift(id);
  const auto same = transfer_lift(ident, flat, id);
  Rng rng(8);
  for (int i = 0; i < 20; ++i) {
    const Vector x = rng.normal_vector(2), s = rng.normal_vector(2);
    CHECK(same.coeff(x, s) == flat.coeff(x, s));
  }

  // f(x) = 2x with f(s) = 2s is an anchored morphism of the identity bundle.
  BundleMorphismSpec twice;
  twice.base_map = [](const Vector& x) { return Vector(2 * x); };
  twice.base_inverse = [](const Vector& x) { return Vector(x / 2); };
  twice.fiber_map = [](const Vector&, const Vector& s) { return Vector(2 * s); };
  twice.fiber_inverse = [](const Vector&, const Vector& s) { return Vector(s / 2); };
  twice.source_group = twice.target_group = GroupKind::SO3;
  twice.algebra_map = Matrix::Identity(3, 3);
  CHECK(check_morphism(twice, id, id, 50, 2).anchor_residual <= 1e-6);
  const auto pushed = transfer_lift(twice, flat, id);
  for (int trial = 0; trial < 5; ++trial) {
    const PiecewiseControl c = wobbly_loop(rng);
    PiecewiseControl image = c;
    for (auto& seg : image.segments) seg.control = seg.control.scaled(2.0);
    const Vector x0 = rng.uniform_vector(2, -0.5, 0.5);
    const GroupElementd src = displacement(flat, c, x0, 1e-3);
    const GroupElementd dst = displacement(pushed, image, twice.base_map(x0), 1e-3);
    CHECK((twice.map_group(src).matrix - dst.matrix).norm() <= 1e-8);
  }

  BundleMorphismSpec one_way = twice;
  one_way.fiber_inverse = nullptr;
  CHECK_THROWS_AS(transfer_lift(one_way, flat, id), NotInvertible);
  BundleMorphismSpec degenerate = twice;
  degenerate.algebra_map = Matrix::Zero(3, 3);
  CHECK_THROWS_AS(transfer_lift(degenerate, flat, id), NotInvertible);
}

TEST_CASE("restriction to the singular leaf of the two-leaf bundle") {
  const auto two = twoleaf_bundle();
  // B = (x s1 + y s2 + x^2 s2) E3 on SO(3).
  CoefficientPolynomials poly(3);
  poly[2] = {{1.0, {1, 0, 1, 0}}, {1.0, {0, 1, 0, 1}}, {1.0, {2, 0, 0, 1}}};
  const auto lift = custom_polynomial_lift(two, GroupKind::SO3, poly);

  BundleMorphismSpec leaf;
  leaf.base_map = [](const Vector& x) { return v2(x(0), 0); };
  leaf.base_inverse = [](const Vector& x) { return Vector::Constant(1, x(0)); };
  leaf.fiber_map = leaf.fiber_inverse = [](const Vector&, const Vector& s) { return s; };
  leaf.source_group = leaf.target_group = GroupKind::SO3;
  leaf.algebra_map = Matrix::Identity(3, 3);
  const AnchoredBundle restricted = pullback_bundle(leaf, two, 1, "leaf");
  CHECK(check_morphism(leaf, restricted, two, 50, 3).anchor_residual <= 1e-6);
  const auto on_leaf = pullback_lift(leaf, lift, restricted);

  Rng rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    PiecewiseControl loop;
    const Vector u = rng.normal_vector(2), w = rng.normal_vector(2);
    loop.segments = {{0, 1, Control::polynomial({u, w}), 1}, {1, 2, Control::polynomial({-u - w, w}), 1}};
    const double x = rng.uniform(-1, 1);
    const GroupElementd big = displacement(lift, loop, v2(x, 0), 1e-3);
    const GroupElementd small = displacement(on_leaf, loop, Vector::Constant(1, x), 1e-3);
    CHECK((big.matrix - small.matrix).norm() <= 1e-8);
  }
}
