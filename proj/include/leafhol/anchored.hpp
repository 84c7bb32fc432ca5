#pragma once

// Anchored bundles over open subsets of R^n with trivial fibre R^k, the vector
// fields they induce, composite flows and bracket-generated rank.

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace leafhol {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// gamma(q, u): the local form of the anchor map.
using AnchorMap = std::function<Vector(const Vector& q, const Vector& u)>;
using VectorField = std::function<Vector(const Vector& q)>;

/// Trajectories leaving the box |q| <= kDomainBound raise Blowup.
inline constexpr double kDomainBound = 1e6;

struct AnchoredBundle {
  std::string name;
  int base_dim = 0;
  int fiber_dim = 0;
  AnchorMap anchor;
  bool linear = false;
};

struct Section {
  std::string name;
  std::function<Vector(const Vector& q)> value;
};

Section constant_section(const Vector& u, std::string name = "constant");

/// Sections u = e_a for a = 0..k-1.
std::vector<Section> coordinate_sections(const AnchoredBundle& bundle);

/// Fields and times stored in application-reversed order (X_l, ..., X_1),
/// (t_l, ..., t_1): X_1 is flowed first, for time t_1.
struct CompositeFlowSpec {
  std::vector<VectorField> fields;
  std::vector<double> times;
};

/// Base trajectory sampled on a uniform grid per segment. segment_starts[i]
/// is the sample index where segment i begins; consecutive segments share
/// their junction sample.
struct BaseTrajectory {
  std::vector<double> times;
  std::vector<Vector> points;
  std::vector<std::size_t> segment_starts;

  const Vector& endpoint() const { return points.back(); }
};

Vector evaluate_anchor(const AnchoredBundle& bundle, const Vector& q, const Vector& u);

/// The anchored bundle with anchor s -> -rho(s).
AnchoredBundle invert_bundle(const AnchoredBundle& bundle);

/// q -> rho(sigma(q)).
VectorField induced_field(const AnchoredBundle& bundle, const Section& section);

/// Classical RK4 along sign * field for `duration` time units, appending
/// samples (excluding the start) to `out`.
void flow_field(const VectorField& field, double sign, double duration, double step, Vector x, BaseTrajectory& out);

Vector composite_flow(const CompositeFlowSpec& spec, const Vector& x, double step);

/// The concatenated integral curves realizing composite_flow; segment i
/// (in application order) lasts |t_i|.
BaseTrajectory concatenation(const CompositeFlowSpec& spec, const Vector& x, double step);

/// Finite-difference step used for brackets at q.
double bracket_fd_step(const Vector& q);

/// [X, Y](q) = DY(q) X(q) - DX(q) Y(q) through central differences of the
/// directional derivatives.
VectorField lie_bracket(VectorField x, VectorField y);

struct RankResult {
  int rank = 0;
  std::vector<Vector> basis;  // orthonormal
  Vector singular_values;
};

/// Numerical rank at x of the fields and their left-normed iterated brackets
/// [F_i1, [F_i2, ..., [F_id, F_j]]] of length up to depth + 1. Depth 0 uses
/// the fields alone.
RankResult bracket_rank(const std::vector<VectorField>& fields, const Vector& x, int depth,
                        double relative_threshold = 1e-8);

struct OrbitSample {
  std::vector<Vector> points;
  std::vector<std::size_t> dropped;  // draw indices whose flow blew up
};

/// Endpoints of seeded random composite flows of the induced fields, with
/// 1..6 segments, uniformly chosen section and sign, and |t_i| <= max_time.
OrbitSample sample_orbit(const AnchoredBundle& bundle, const std::vector<Section>& sections, const Vector& x,
                         int count, double max_time, std::uint64_t seed, double step = 1e-2);

/// max over random probes of |gamma(q, a u + b v) - a gamma(q, u) - b gamma(q, v)| / (1 + |gamma|).
double linearity_defect(const AnchoredBundle& bundle, int probes, std::uint64_t seed, double box = 2.0);

// Built-in bundles.

/// p(r) = r^2/2 - r^4/4, the profile of the Montgomery example.
double montgomery_profile(double r);

/// M = R^3 in (r, theta, z), rho(u) = u1 d/dr + u2 (d/dtheta - p(r) d/dz).
AnchoredBundle montgomery_bundle();

/// M = R^2, rho(u) = u1 d/dx + u2 y d/dy; leaves {y > 0}, {y = 0}, {y < 0}.
AnchoredBundle twoleaf_bundle();

/// M = R^2, N = R^2, rho = id.
AnchoredBundle planar_identity_bundle();

std::optional<AnchoredBundle> builtin_bundle(std::string_view name);
std::vector<std::string> builtin_bundle_names();

}  // namespace leafhol
