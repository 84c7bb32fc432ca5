#pragma once

// Principal rho-lifts on the trivial bundle P = M x G. A lift is fixed by its
// coefficient B(x, s) in the Lie algebra:
//   h((x, g), s) = (gamma(x, s), B(x, s) g),
// which is right invariant by construction.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "leafhol/anchored.hpp"
#include "leafhol/curves.hpp"
#include "leafhol/liegroup.hpp"

namespace leafhol {

/// Algebra coordinates of B(x, s).
using LiftCoefficient = std::function<Vector(const Vector& x, const Vector& s)>;

/// Optional (omega, chi) description: B(x, s) = chi0(x, s) - A(x, gamma(x, s)),
/// with A the identity-section pullback of a connection form.
struct LiftSplit {
  std::function<Vector(const Vector& x, const Vector& v)> connection;
  LiftCoefficient chi0;
};

struct TrivializedLift {
  std::string name;
  GroupKind group = GroupKind::SO2;
  AnchoredBundle bundle;
  LiftCoefficient coeff;
  std::optional<LiftSplit> split;
  bool rho_connection = false;  // B(x, .) linear in s

  AlgebraElementd coefficient(const Vector& x, const Vector& s) const;
};

struct LiftVelocity {
  Vector base;
  Matrix group;
};

struct LiftedCurve {
  RealizedCurve base;
  std::vector<GroupElementd> path;  // one element per base sample

  const GroupElementd& end() const { return path.back(); }
};

/// Maps between trivialized bundles, fibred over base_map. The fibre map and
/// its inverse are given per source base point; the group morphism is
/// represented by its algebra map (target_dim x source_dim) with
/// F(exp A) = exp(L A).
struct BundleMorphismSpec {
  std::function<Vector(const Vector& x_src)> base_map;
  std::function<Vector(const Vector& x)> base_inverse;  // left inverse on the image
  std::function<Vector(const Vector& x_src, const Vector& s_src)> fiber_map;
  std::function<Vector(const Vector& x_src, const Vector& s)> fiber_inverse;
  std::function<Matrix(const Vector& x_src)> base_jacobian;  // finite differences when empty
  GroupKind source_group = GroupKind::SO2;
  GroupKind target_group = GroupKind::SO2;
  Matrix algebra_map;

  GroupElementd map_group(const GroupElementd& g_src) const;
};

struct MorphismCheck {
  double base_roundtrip = 0.0;   // |f^-1(f(x')) - x'|
  double fiber_roundtrip = 0.0;  // |f^-1(f(s')) - s'|
  double anchor_residual = 0.0;  // |T f . rho'(s') - rho(f(s'))|
  double homomorphism_residual = 0.0;  // |L[A, B] - [LA, LB]| on basis pairs
};

/// The residuals of the morphism identities on random probes in [-box, box].
MorphismCheck check_morphism(const BundleMorphismSpec& morphism, const AnchoredBundle& source,
                             const AnchoredBundle& target, int probes, std::uint64_t seed, double box = 1.0);

void check_split(const TrivializedLift& lift, int probes, std::uint64_t seed, double tol = 1e-10);

LiftVelocity lift_value(const TrivializedLift& lift, const Vector& x, const GroupElementd& g, const Vector& s);

/// Coordinates on M x G: (x, column-major entries of g).
Vector flatten_point(const Vector& x, const GroupElementd& g);

/// The vector field s^h(u) = h(u, s(pi(u))) on flattened M x G coordinates.
VectorField lifted_section_field(const TrivializedLift& lift, const Section& section);

/// Lift of a ±rho-admissible curve through (x0, g0): the base is
/// integrate_admissible of the control and g' g^-1 = sign B(x(t), u(t)) is
/// integrated with the commutator-free scheme on the same grid.
LiftedCurve transport(const TrivializedLift& lift, const PiecewiseControl& control, const Vector& x0,
                      const GroupElementd& g0, double step);

/// h-displacement a of a loop at x0: transport from (x0, e) ends at (x0, a).
/// NotALoop when the base misses x0 by more than closure_tolerance.
GroupElementd displacement(const TrivializedLift& lift, const PiecewiseControl& loop, const Vector& x0, double step,
                           double closure_tolerance = 1e-6);

/// Push-forward of lift_prime along a morphism with invertible fibre map:
/// B(x, s) = L B'(f^-1(x), f^-1(s)).
TrivializedLift transfer_lift(const BundleMorphismSpec& morphism, const TrivializedLift& lift_prime,
                              const AnchoredBundle& target_bundle);

/// Pull-back anchored bundle under an immersion: T f . rho'(x', s') = rho(f(s')).
AnchoredBundle pullback_bundle(const BundleMorphismSpec& immersion, const AnchoredBundle& target, int source_dim,
                               std::string name);

/// The unique lift on the pull-back bundle for which the immersion is a
/// morphism of lifts: B'(x', s') = L^+ B(f(x'), f(s')).
TrivializedLift pullback_lift(const BundleMorphismSpec& immersion, const TrivializedLift& lift,
                              const AnchoredBundle& source_bundle);

// Built-in lifts.

struct PolynomialTerm {
  double coeff = 0.0;
  std::vector<int> powers;  // exponents of (x_1..x_n, s_1..s_k)
};

/// One polynomial per algebra basis element.
using CoefficientPolynomials = std::vector<std::vector<PolynomialTerm>>;

TrivializedLift zero_lift(const AnchoredBundle& bundle, GroupKind group);

/// B = kappa (x1 s2 - x2 s1)/2 J on SO(2).
TrivializedLift so2_area_lift(const AnchoredBundle& bundle, double kappa = 1.0);

/// B = s1 E1 + s2 E2 on SO(3).
TrivializedLift so3_flat2_lift(const AnchoredBundle& bundle);

/// B = s1 X + s2 Y on the Heisenberg group; holonomy is generated by Z = [X, Y].
TrivializedLift heisenberg_area_lift(const AnchoredBundle& bundle);

/// Pure gauge B = -k(x)^-1 dk(rho(s)) with k(x) = exp(x1 E1) exp(x2 E2) on SO(3):
/// curved-looking but flat, with the connection part carried in the split.
TrivializedLift so3_pure_gauge_lift(const AnchoredBundle& bundle);

TrivializedLift custom_polynomial_lift(const AnchoredBundle& bundle, GroupKind group,
                                       CoefficientPolynomials polynomials);

double evaluate_polynomial(const std::vector<PolynomialTerm>& terms, const Vector& x, const Vector& s);

}  // namespace leafhol
