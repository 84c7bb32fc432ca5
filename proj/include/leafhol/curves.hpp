#pragma once

// Controls, ±rho-admissible curves and the operations on them: integration
// into base trajectories, composition, reversal, inversion and
// reparameterization.

#include <array>
#include <functional>
#include <vector>

#include "leafhol/anchored.hpp"

namespace leafhol {

enum class ControlKind { Constant, Polynomial, Sine, Custom };

/// A fibre-valued function of local time tau = t - t0 on one segment.
struct Control {
  ControlKind kind = ControlKind::Constant;
  int dim = 0;
  Vector value;                          // Constant
  std::vector<Vector> coefficients;      // Polynomial: sum_k c_k tau^k
  Vector offset, amplitude;              // Sine: offset + amplitude sin(omega tau + phase)
  double omega = 0.0, phase = 0.0;
  std::function<Vector(double)> custom;  // Custom

  static Control constant(Vector u);
  static Control polynomial(std::vector<Vector> coefficients);
  static Control sine(Vector offset, Vector amplitude, double omega, double phase);
  static Control from_function(int dim, std::function<Vector(double)> f);

  Vector operator()(double tau) const;

  Control scaled(double factor) const;
  /// tau -> u(duration - tau).
  Control reversed(double duration) const;
};

struct ControlSegment {
  double t0 = 0.0;
  double t1 = 0.0;
  Control control;
  int sign = 1;  // +1: rho-admissible, -1: (-rho)-admissible

  double duration() const { return t1 - t0; }
  Vector at(double t) const { return control(t - t0); }
};

/// Segments on abutting intervals; fibre values may jump at breakpoints.
struct PiecewiseControl {
  std::vector<ControlSegment> segments;

  bool empty() const { return segments.empty(); }
  double start_time() const { return segments.empty() ? 0.0 : segments.front().t0; }
  double end_time() const { return segments.empty() ? 0.0 : segments.back().t1; }
};

/// Throws std::invalid_argument unless every segment has t0 < t1, a finite
/// sign of +-1, and consecutive intervals abut exactly.
void validate(const PiecewiseControl& control);

/// One segment with a constant control.
PiecewiseControl constant_control(const Vector& u, double t0, double t1, int sign = 1);

struct RealizedCurve {
  PiecewiseControl control;
  BaseTrajectory base;
  std::vector<double> breakpoints;  // a_0, ..., a_l

  const Vector& start() const { return base.points.front(); }
  const Vector& end() const { return base.points.back(); }
};

/// Integrates c~' = sign * gamma(c~, u(t)) segment by segment from x0 with
/// classical RK4 on a uniform grid of at most `step` per segment.
RealizedCurve integrate_admissible(const AnchoredBundle& bundle, const PiecewiseControl& control, const Vector& x0,
                                   double step);

/// Max residual |c~'(m) - sign gamma(c~(m), u(m))| over up to `max_midpoints`
/// interior grid midpoints, using fourth-order stencils on the samples.
double admissibility_residual(const AnchoredBundle& bundle, const RealizedCurve& curve, int max_midpoints = 200);

/// Concatenates controls in traversal order (first element traversed first),
/// shifting each to start where the previous one ends. No endpoint check.
PiecewiseControl concatenate_controls(const std::vector<PiecewiseControl>& parts);

/// concatenate_controls after checking that realized[i] ends where
/// realized[i+1] starts, to within `tolerance`.
PiecewiseControl compose_curves(const std::vector<PiecewiseControl>& parts, const std::vector<RealizedCurve>& realized,
                                double tolerance = 1e-7);

/// c*(t) = c(a + b - t), flipping every sign.
PiecewiseControl reverse(const PiecewiseControl& control);

/// c^-1 = -c*, for linear bundles only; all signs become +1.
PiecewiseControl inverse(const PiecewiseControl& control, const AnchoredBundle& bundle);

struct Reparameterization {
  std::function<double(double)> map;
  std::function<double(double)> derivative;  // finite differences when empty
};

/// c'(s) = (d phi^-1/ds)(s) c(phi^-1(s)), applied segment by segment.
/// Requires a linear bundle and phi' > 1e-8 on a 256-interval grid.
PiecewiseControl reparameterize(const PiecewiseControl& control, const Reparameterization& phi,
                                const AnchoredBundle& bundle);

namespace detail {

/// Stage points and controls of one RK4 step: controls are sampled at tau,
/// tau + h/2, tau + h/2, tau + h.
struct StageData {
  const ControlSegment* segment;
  double h;
  std::array<Vector, 4> points;
  std::array<Vector, 4> controls;
};

using StageObserver = std::function<void(const StageData&)>;

RealizedCurve integrate_admissible_staged(const AnchoredBundle& bundle, const PiecewiseControl& control,
                                          const Vector& x0, double step, const StageObserver& observer);

}  // namespace detail

}  // namespace leafhol
