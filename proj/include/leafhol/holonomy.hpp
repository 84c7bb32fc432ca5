#pragma once

// Loop families, holonomy samples and the Lie algebra they generate.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "leafhol/lift.hpp"
#include "leafhol/random.hpp"

namespace leafhol {

enum class LoopKind { Rectangles, Polygon, Lasso };

/// Loops based at x0 built from the fibre directions e_i, e_j.
///  - Rectangles: +e_i for a, +e_j for b, then the same two with sign -1
///    (orientation -1 swaps the roles of i and j). One loop per (a, b).
///  - Polygon: constant controls along the edges 0 -> v_1 -> ... -> v_m -> 0 of
///    each vertex list (coordinates in the (i, j) fibre plane), unit time per edge.
///  - Lasso: a rectangle conjugated by an out-and-back tail, the constant
///    control `tail` for unit time and its reverse.
struct LoopFamily {
  LoopKind kind = LoopKind::Rectangles;
  Vector x0;
  std::vector<std::array<double, 2>> sides;
  std::vector<std::vector<std::array<double, 2>>> polygons;
  int i = 0;
  int j = 1;
  int orientation = 1;
  Vector tail;
};

PiecewiseControl rectangle_loop(int fiber_dim, int i, int j, double a, double b, int orientation = 1);

std::vector<PiecewiseControl> generate_loops(const LoopFamily& family, const AnchoredBundle& bundle);

/// Random closed polygons in the fibre: 3 to 6 edges of random duration and
/// sign whose constant, linear or sine controls integrate to the edge vectors.
/// They are loops for any bundle whose anchor is the identity.
std::vector<PiecewiseControl> random_polygon_loops(int fiber_dim, int count, double scale, Rng& rng);

/// exp of a normally distributed algebra element of the given scale.
GroupElementd random_group_element(GroupKind group, Rng& rng, double scale = 1.0);

struct HolonomySample {
  std::vector<GroupElementd> elements;
  std::vector<std::optional<AlgebraElementd>> logs;  // empty outside the injectivity radius
  std::vector<std::string> loop_ids;
  std::vector<std::array<double, 2>> scales;
  std::vector<double> closure_gaps;
  Vector base_point;
  GroupElementd reference;
  std::size_t skipped_logs = 0;
};

/// reference^-1 times the endpoint of the transport through (x0, reference):
/// the holonomy element of the loop with reference point u = (x0, reference).
GroupElementd holonomy_element(const TrivializedLift& lift, const PiecewiseControl& loop, const Vector& x0,
                               const GroupElementd& reference, double step, double closure_tolerance = 1e-6,
                               double* gap = nullptr);

/// Holonomy elements of every family loop L_i, of rev(L_i), and of the
/// compositions L_j * L_i (L_i traversed first) for i < j.
HolonomySample sample_holonomy(const TrivializedLift& lift, const LoopFamily& family, double step,
                               std::optional<GroupElementd> reference = std::nullopt,
                               double closure_tolerance = 1e-6);

/// Elementwise g^-1 a g: the sample at reference point u g.
HolonomySample conjugate_sample(const HolonomySample& sample, const GroupElementd& g);

/// Frobenius-orthonormal basis, in algebra coordinates.
struct AlgebraEstimate {
  std::vector<AlgebraElementd> basis;
  int rank = 0;
  double closure_residual = 0.0;
};

/// Span of the available logs closed under brackets for up to
/// `extra_bracket_depth` rounds; a direction is added when its projection
/// residual exceeds tol.
AlgebraEstimate holonomy_algebra(const HolonomySample& sample, int extra_bracket_depth, double tol = 1e-6);

/// Same construction from an explicit list of algebra elements.
AlgebraEstimate algebra_span(GroupKind group, const std::vector<AlgebraElementd>& elements, int extra_bracket_depth,
                             double tol = 1e-6);

/// Principal angles (radians, ascending) between two subspaces of equal
/// dimension spanned by the given elements, under the Frobenius metric.
Vector principal_angles(const std::vector<AlgebraElementd>& a, const std::vector<AlgebraElementd>& b);

/// log(displacement of the eps x eps rectangle in the (i, j) fibre plane) / eps^2.
AlgebraElementd small_loop_log(const TrivializedLift& lift, const Vector& x0, int i, int j, double eps, double step);

/// Signed area enclosed by the sampled base, using coordinates (i, j).
double polygon_signed_area(const BaseTrajectory& base, int i = 0, int j = 1);

}  // namespace leafhol
