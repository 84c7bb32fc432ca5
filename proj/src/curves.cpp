#include "leafhol/curves.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "leafhol/errors.hpp"
#include "leafhol/lie_ode.hpp"

namespace leafhol {

Control Control::constant(Vector u) {
  Control c;
  c.kind = ControlKind::Constant;
  c.dim = static_cast<int>(u.size());
  c.value = std::move(u);
  return c;
}

Control Control::polynomial(std::vector<Vector> coefficients) {
  if (coefficients.empty()) throw std::invalid_argument("polynomial control needs at least one coefficient");
  Control c;
  c.kind = ControlKind::Polynomial;
  c.dim = static_cast<int>(coefficients.front().size());
  for (const auto& k : coefficients)
    if (k.size() != c.dim) throw std::invalid_argument("polynomial control coefficients differ in size");
  c.coefficients = std::move(coefficients);
  return c;
}

Control Control::sine(Vector offset, Vector amplitude, double omega, double phase) {
  if (offset.size() != amplitude.size()) throw std::invalid_argument("sine control offset/amplitude size mismatch");
  Control c;
  c.kind = ControlKind::Sine;
  c.dim = static_cast<int>(offset.size());
  c.offset = std::move(offset);
  c.amplitude = std::move(amplitude);
  c.omega = omega;
  c.phase = phase;
  return c;
}

Control Control::from_function(int dim, std::function<Vector(double)> f) {
  Control c;
  c.kind = ControlKind::Custom;
  c.dim = dim;
  c.custom = std::move(f);
  return c;
}

Vector Control::operator()(double tau) const {
  switch (kind) {
    case ControlKind::Constant:
      return value;
    case ControlKind::Polynomial: {
      Vector out = coefficients.back();
      for (std::size_t k = coefficients.size() - 1; k-- > 0;) out = out * tau + coefficients[k];
      return out;
    }
    case ControlKind::Sine:
      return offset + amplitude * std::sin(omega * tau + phase);
    case ControlKind::Custom:
      return custom(tau);
  }
  return Vector::Zero(dim);
}

Control Control::scaled(double factor) const {
  Control c = *this;
  switch (kind) {
    case ControlKind::Constant: c.value *= factor; break;
    case ControlKind::Polynomial:
      for (auto& k : c.coefficients) k *= factor;
      break;
    case ControlKind::Sine:
      c.offset *= factor;
      c.amplitude *= factor;
      break;
    case ControlKind::Custom:
      c.custom = [f = custom, factor](double tau) -> Vector { return factor * f(tau); };
      break;
  }
  return c;
}

Control Control::reversed(double duration) const {
  Control c = *this;
  switch (kind) {
    case ControlKind::Constant: break;
    case ControlKind::Polynomial: {
      // p(L - tau) expanded in powers of tau.
      const std::size_t n = coefficients.size();
      for (std::size_t j = 0; j < n; ++j) {
        Vector d = Vector::Zero(dim);
        double binom = 1.0;  // C(k, j), starting at k = j
        for (std::size_t k = j; k < n; ++k) {
          d += coefficients[k] * (binom * std::pow(duration, static_cast<double>(k - j)));
          binom = binom * static_cast<double>(k + 1) / static_cast<double>(k + 1 - j);
        }
        c.coefficients[j] = (j % 2 == 0) ? d : Vector(-d);
      }
      break;
    }
    case ControlKind::Sine:
      c.phase = omega * duration + phase;
      c.omega = -omega;
      break;
    case ControlKind::Custom:
      c.custom = [f = custom, duration](double tau) -> Vector { return f(duration - tau); };
      break;
  }
  return c;
}

void validate(const PiecewiseControl& control) {
  for (std::size_t i = 0; i < control.segments.size(); ++i) {
    const auto& s = control.segments[i];
    if (!(std::isfinite(s.t0) && std::isfinite(s.t1) && s.t0 < s.t1))
      throw std::invalid_argument("control segment " + std::to_string(i) + " has an empty or invalid interval");
    if (s.sign != 1 && s.sign != -1)
      throw std::invalid_argument("control segment " + std::to_string(i) + " sign must be +1 or -1");
    if (i + 1 < control.segments.size() && control.segments[i + 1].t0 != s.t1)
      throw std::invalid_argument("control segments " + std::to_string(i) + " and " + std::to_string(i + 1) +
                                  " do not abut");
  }
}

PiecewiseControl constant_control(const Vector& u, double t0, double t1, int sign) {
  return {{ControlSegment{t0, t1, Control::constant(u), sign}}};
}

namespace detail {

RealizedCurve integrate_admissible_staged(const AnchoredBundle& bundle, const PiecewiseControl& control,
                                          const Vector& x0, double step, const StageObserver& observer) {
  validate(control);
  if (x0.size() != bundle.base_dim) throw DimensionMismatch("initial point has wrong dimension");
  if (!x0.allFinite()) throw std::invalid_argument("initial point is not finite");

  RealizedCurve curve;
  curve.control = control;
  curve.base.times.push_back(control.start_time());
  curve.base.points.push_back(x0);
  curve.breakpoints.push_back(control.start_time());

  for (const auto& seg : control.segments) {
    curve.base.segment_starts.push_back(curve.base.points.size() - 1);
    const int n = substep_count(seg.duration(), step);
    const double h = seg.duration() / n;
    const double sign = seg.sign;
    Vector x = curve.base.points.back();
    StageData stage{&seg, h, {}, {}};
    for (int i = 0; i < n; ++i) {
      const double tau = i * h;
      const double tau_next = (i + 1 == n) ? seg.duration() : (i + 1) * h;
      stage.controls[0] = seg.control(tau);
      stage.controls[1] = seg.control(tau + 0.5 * h);
      stage.controls[2] = stage.controls[1];
      stage.controls[3] = seg.control(tau_next);
      stage.points[0] = x;
      const Vector k1 = sign * evaluate_anchor(bundle, stage.points[0], stage.controls[0]);
      stage.points[1] = x + 0.5 * h * k1;
      const Vector k2 = sign * evaluate_anchor(bundle, stage.points[1], stage.controls[1]);
      stage.points[2] = x + 0.5 * h * k2;
      const Vector k3 = sign * evaluate_anchor(bundle, stage.points[2], stage.controls[2]);
      stage.points[3] = x + h * k3;
      const Vector k4 = sign * evaluate_anchor(bundle, stage.points[3], stage.controls[3]);
      if (observer) observer(stage);
      x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if (!x.allFinite() || x.norm() > kDomainBound) throw Blowup("admissible curve left the domain guard box");
      curve.base.times.push_back(seg.t0 + tau_next);
      curve.base.points.push_back(x);
    }
    curve.base.times.back() = seg.t1;
    curve.breakpoints.push_back(seg.t1);
  }
  return curve;
}

}  // namespace detail

RealizedCurve integrate_admissible(const AnchoredBundle& bundle, const PiecewiseControl& control, const Vector& x0,
                                   double step) {
  return detail::integrate_admissible_staged(bundle, control, x0, step, {});
}

double admissibility_residual(const AnchoredBundle& bundle, const RealizedCurve& curve, int max_midpoints) {
  const auto& base = curve.base;
  // Candidate midpoints (i, i+1) with neighbours i-1 and i+2 inside the same segment.
  std::vector<std::pair<std::size_t, std::size_t>> candidates;  // (i, segment)
  for (std::size_t s = 0; s < base.segment_starts.size(); ++s) {
    const std::size_t lo = base.segment_starts[s];
    const std::size_t hi = (s + 1 < base.segment_starts.size()) ? base.segment_starts[s + 1] : base.points.size() - 1;
    for (std::size_t i = lo + 1; i + 2 <= hi; ++i) candidates.emplace_back(i, s);
  }
  if (candidates.empty()) return 0.0;
  const std::size_t stride = std::max<std::size_t>(1, candidates.size() / static_cast<std::size_t>(max_midpoints));

  double worst = 0.0;
  for (std::size_t c = 0; c < candidates.size(); c += stride) {
    const auto [i, s] = candidates[c];
    const auto& seg = curve.control.segments[s];
    const double h = base.times[i + 1] - base.times[i];
    const Vector& xm1 = base.points[i - 1];
    const Vector& x0 = base.points[i];
    const Vector& x1 = base.points[i + 1];
    const Vector& x2 = base.points[i + 2];
    const Vector mid = (-xm1 + 9.0 * x0 + 9.0 * x1 - x2) / 16.0;
    const Vector deriv = (xm1 - 27.0 * x0 + 27.0 * x1 - x2) / (24.0 * h);
    const double tm = 0.5 * (base.times[i] + base.times[i + 1]);
    const Vector expected = seg.sign * evaluate_anchor(bundle, mid, seg.at(tm));
    worst = std::max(worst, (deriv - expected).norm());
  }
  return worst;
}

PiecewiseControl concatenate_controls(const std::vector<PiecewiseControl>& parts) {
  PiecewiseControl out;
  bool started = false;
  double cursor = 0.0;
  for (const auto& part : parts) {
    if (part.empty()) continue;
    if (!started) {
      cursor = part.start_time();
      started = true;
    }
    for (const auto& seg : part.segments) {
      ControlSegment shifted = seg;
      shifted.t0 = cursor;
      shifted.t1 = cursor + seg.duration();
      cursor = shifted.t1;
      out.segments.push_back(std::move(shifted));
    }
  }
  return out;
}

PiecewiseControl compose_curves(const std::vector<PiecewiseControl>& parts, const std::vector<RealizedCurve>& realized,
                                double tolerance) {
  if (parts.size() != realized.size())
    throw std::invalid_argument("compose_curves: one realized base is required per part");
  for (std::size_t i = 0; i + 1 < realized.size(); ++i) {
    const double gap = (realized[i].end() - realized[i + 1].start()).norm();
    if (!(gap <= tolerance)) throw EndpointMismatch(i, gap);
  }
  return concatenate_controls(parts);
}

PiecewiseControl reverse(const PiecewiseControl& control) {
  const double a = control.start_time(), b = control.end_time();
  PiecewiseControl out;
  for (auto it = control.segments.rbegin(); it != control.segments.rend(); ++it) {
    ControlSegment seg;
    seg.t0 = (a + b) - it->t1;
    seg.t1 = (a + b) - it->t0;
    seg.control = it->control.reversed(it->duration());
    seg.sign = -it->sign;
    out.segments.push_back(std::move(seg));
  }
  // Keep the intervals abutting exactly despite rounding in a + b - t.
  for (std::size_t i = 1; i < out.segments.size(); ++i) out.segments[i].t0 = out.segments[i - 1].t1;
  if (!out.segments.empty()) {
    out.segments.front().t0 = a;
    out.segments.back().t1 = b;
  }
  return out;
}

PiecewiseControl inverse(const PiecewiseControl& control, const AnchoredBundle& bundle) {
  if (!bundle.linear) throw NotLinear("inverse curve requires a linear anchored bundle ('" + bundle.name + "')");
  PiecewiseControl out = reverse(control);
  for (auto& seg : out.segments) {
    seg.control = seg.control.scaled(static_cast<double>(seg.sign));
    seg.sign = 1;
  }
  return out;
}

namespace {

double derivative_at(const Reparameterization& phi, double t) {
  if (phi.derivative) return phi.derivative(t);
  const double h = 1e-5 * std::max(1.0, std::abs(t));
  return (phi.map(t + h) - phi.map(t - h)) / (2.0 * h);
}

// Solves phi(t) = s for t in [lo, hi] with safeguarded Newton.
double invert_increasing(const Reparameterization& phi, double s, double lo, double hi) {
  double flo = phi.map(lo) - s, fhi = phi.map(hi) - s;
  if (flo >= 0.0) return lo;
  if (fhi <= 0.0) return hi;
  double t = lo + (hi - lo) * (-flo) / (fhi - flo);
  for (int it = 0; it < 100; ++it) {
    const double f = phi.map(t) - s;
    if (f == 0.0) return t;
    if (f < 0.0) lo = t; else hi = t;
    const double d = derivative_at(phi, t);
    double next = t - f / d;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - t) <= 1e-16 * std::max(1.0, std::abs(t))) return next;
    t = next;
    if (hi - lo <= 4e-16 * std::max(1.0, std::abs(t))) break;
  }
  return t;
}

}  // namespace

PiecewiseControl reparameterize(const PiecewiseControl& control, const Reparameterization& phi,
                                const AnchoredBundle& bundle) {
  if (!bundle.linear) throw NotLinear("reparameterization requires a linear anchored bundle ('" + bundle.name + "')");
  if (control.empty()) return control;
  const double a = control.start_time(), b = control.end_time();
  constexpr int kIntervals = 256;
  for (int i = 0; i <= kIntervals; ++i) {
    const double t = a + (b - a) * i / kIntervals;
    const double d = derivative_at(phi, t);
    if (!(std::isfinite(d) && d > 1e-8))
      throw NotMonotone("reparameterization derivative " + std::to_string(d) + " at t = " + std::to_string(t));
  }

  PiecewiseControl out;
  for (const auto& seg : control.segments) {
    ControlSegment ns;
    ns.t0 = out.segments.empty() ? phi.map(seg.t0) : out.segments.back().t1;
    ns.t1 = phi.map(seg.t1);
    ns.sign = seg.sign;
    const double t0 = seg.t0, t1 = seg.t1, s0 = ns.t0;
    ns.control = Control::from_function(seg.control.dim, [phi, u = seg.control, t0, t1, s0](double sigma) -> Vector {
      const double t = invert_increasing(phi, s0 + sigma, t0, t1);
      return u(t - t0) / derivative_at(phi, t);
    });
    out.segments.push_back(std::move(ns));
  }
  validate(out);
  return out;
}

}  // namespace leafhol
