#include "leafhol/holonomy.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "leafhol/errors.hpp"

namespace leafhol {

PiecewiseControl rectangle_loop(int fiber_dim, int i, int j, double a, double b, int orientation) {
  if (orientation < 0) {
    std::swap(i, j);
    std::swap(a, b);
  }
  const Vector ei = Vector::Unit(fiber_dim, i), ej = Vector::Unit(fiber_dim, j);
  std::vector<PiecewiseControl> parts;
  const std::array<std::pair<const Vector*, double>, 4> legs = {{{&ei, a}, {&ej, b}, {&ei, a}, {&ej, b}}};
  for (std::size_t k = 0; k < legs.size(); ++k) {
    const double len = legs[k].second;
    if (len == 0.0) continue;
    if (len < 0.0) throw std::invalid_argument("rectangle sides must be non-negative");
    parts.push_back(constant_control(*legs[k].first, 0.0, len, k < 2 ? 1 : -1));
  }
  return concatenate_controls(parts);
}

namespace {

void check_family(const LoopFamily& family, const AnchoredBundle& bundle) {
  if (family.x0.size() != bundle.base_dim)
    throw DimensionMismatch("loop base point has dimension " + std::to_string(family.x0.size()) + ", bundle '" +
                            bundle.name + "' has " + std::to_string(bundle.base_dim));
  const int k = bundle.fiber_dim;
  if (family.i < 0 || family.j < 0 || family.i >= k || family.j >= k || family.i == family.j)
    throw DimensionMismatch("loop plane indices must be distinct fibre directions below " + std::to_string(k));
  if (family.kind == LoopKind::Lasso && family.tail.size() != 0 && family.tail.size() != k)
    throw DimensionMismatch("lasso tail must be a fibre vector of dimension " + std::to_string(k));
}

PiecewiseControl polygon_loop(int fiber_dim, int i, int j, std::vector<std::array<double, 2>> vertices,
                              int orientation) {
  if (orientation < 0) std::reverse(vertices.begin(), vertices.end());
  vertices.insert(vertices.begin(), {0.0, 0.0});
  vertices.push_back({0.0, 0.0});
  std::vector<PiecewiseControl> parts;
  for (std::size_t k = 0; k + 1 < vertices.size(); ++k) {
    Vector u = Vector::Zero(fiber_dim);
    u(i) = vertices[k + 1][0] - vertices[k][0];
    u(j) = vertices[k + 1][1] - vertices[k][1];
    if (u.isZero(0.0)) continue;
    parts.push_back(constant_control(u, 0.0, 1.0));
  }
  return concatenate_controls(parts);
}

}  // namespace

std::vector<PiecewiseControl> generate_loops(const LoopFamily& family, const AnchoredBundle& bundle) {
  check_family(family, bundle);
  const int k = bundle.fiber_dim;
  std::vector<PiecewiseControl> loops;
  switch (family.kind) {
    case LoopKind::Rectangles:
      for (const auto& [a, b] : family.sides) loops.push_back(rectangle_loop(k, family.i, family.j, a, b, family.orientation));
      break;
    case LoopKind::Polygon:
      for (const auto& poly : family.polygons) loops.push_back(polygon_loop(k, family.i, family.j, poly, family.orientation));
      break;
    case LoopKind::Lasso: {
      const bool has_tail = family.tail.size() == k && !family.tail.isZero(0.0);
      for (const auto& [a, b] : family.sides) {
        const PiecewiseControl core = rectangle_loop(k, family.i, family.j, a, b, family.orientation);
        if (!has_tail) {
          loops.push_back(core);
          continue;
        }
        const PiecewiseControl out = constant_control(family.tail, 0.0, 1.0);
        loops.push_back(concatenate_controls({out, core, reverse(out)}));
      }
      break;
    }
  }
  return loops;
}

std::vector<PiecewiseControl> random_polygon_loops(int fiber_dim, int count, double scale, Rng& rng) {
  std::vector<PiecewiseControl> loops;
  for (int n = 0; n < count; ++n) {
    const int edges = rng.uniform_int(3, 6);
    std::vector<Vector> deltas;
    Vector sum = Vector::Zero(fiber_dim);
    for (int e = 0; e + 1 < edges; ++e) {
      deltas.push_back(scale * rng.normal_vector(fiber_dim));
      sum += deltas.back();
    }
    deltas.push_back(-sum);

    std::vector<PiecewiseControl> parts;
    for (const Vector& delta : deltas) {
      const double len = rng.uniform(0.5, 1.5);
      const int sign = rng.sign();
      const Vector mean = sign * delta / len;
      const Vector wiggle = scale * rng.normal_vector(fiber_dim);
      Control c;
      switch (rng.uniform_int(0, 2)) {
        case 0:
          c = Control::constant(mean);
          break;
        case 1:  // mean + w (2 tau / len - 1)
          c = Control::polynomial({mean - wiggle, 2.0 * wiggle / len});
          break;
        default:
          c = Control::sine(mean, wiggle, 2.0 * std::numbers::pi / len, 0.0);
          break;
      }
      parts.push_back(PiecewiseControl{{ControlSegment{0.0, len, c, sign}}});
    }
    loops.push_back(concatenate_controls(parts));
  }
  return loops;
}

GroupElementd random_group_element(GroupKind group, Rng& rng, double scale) {
  const int dim = group_spec<double>(group).algebra_dim;
  return exp(AlgebraElementd{group, scale * rng.normal_vector(dim)});
}

GroupElementd holonomy_element(const TrivializedLift& lift, const PiecewiseControl& loop, const Vector& x0,
                               const GroupElementd& reference, double step, double closure_tolerance, double* gap) {
  const LiftedCurve curve = transport(lift, loop, x0, reference, step);
  const double g = (curve.base.end() - x0).norm();
  if (gap) *gap = g;
  if (!(g <= closure_tolerance)) throw NotALoop(g);
  return inverse(reference) * curve.end();
}

namespace {

void push_element(HolonomySample& sample, GroupElementd element, std::string id, std::array<double, 2> scale,
                  double gap) {
  std::optional<AlgebraElementd> lg;
  try {
    lg = log(element);
  } catch (const OutOfInjectivityRadius&) {
    ++sample.skipped_logs;
  }
  sample.elements.push_back(std::move(element));
  sample.logs.push_back(std::move(lg));
  sample.loop_ids.push_back(std::move(id));
  sample.scales.push_back(scale);
  sample.closure_gaps.push_back(gap);
}

}  // namespace

HolonomySample sample_holonomy(const TrivializedLift& lift, const LoopFamily& family, double step,
                               std::optional<GroupElementd> reference, double closure_tolerance) {
  const GroupElementd ref = reference.value_or(GroupElementd::identity(lift.group));
  require_same_group(ref.group, lift.group);
  const auto loops = generate_loops(family, lift.bundle);

  std::vector<std::array<double, 2>> scale(loops.size(), {0.0, 0.0});
  if (family.kind != LoopKind::Polygon)
    for (std::size_t i = 0; i < loops.size(); ++i) scale[i] = family.sides[i];

  HolonomySample sample;
  sample.base_point = family.x0;
  sample.reference = ref;
  for (std::size_t i = 0; i < loops.size(); ++i) {
    double gap = 0.0;
    GroupElementd a = holonomy_element(lift, loops[i], family.x0, ref, step, closure_tolerance, &gap);
    push_element(sample, std::move(a), "L" + std::to_string(i), scale[i], gap);
    GroupElementd r = holonomy_element(lift, reverse(loops[i]), family.x0, ref, step, closure_tolerance, &gap);
    push_element(sample, std::move(r), "rev(L" + std::to_string(i) + ")", scale[i], gap);
  }
  for (std::size_t i = 0; i < loops.size(); ++i) {
    for (std::size_t j = i + 1; j < loops.size(); ++j) {
      double gap = 0.0;
      const PiecewiseControl composed = concatenate_controls({loops[i], loops[j]});
      GroupElementd c = holonomy_element(lift, composed, family.x0, ref, step, closure_tolerance, &gap);
      push_element(sample, std::move(c), "L" + std::to_string(j) + "*L" + std::to_string(i), {0.0, 0.0}, gap);
    }
  }
  return sample;
}

HolonomySample conjugate_sample(const HolonomySample& sample, const GroupElementd& g) {
  require_same_group(g.group, sample.reference.group);
  HolonomySample out = sample;
  const GroupElementd g_inv = inverse(g);
  for (std::size_t k = 0; k < out.elements.size(); ++k) {
    out.elements[k] = g_inv * sample.elements[k] * g;
    if (out.logs[k]) out.logs[k] = ad_action(g_inv, *sample.logs[k]);
  }
  out.reference = sample.reference * g;
  return out;
}

namespace {

// Frobenius-isometric coordinates: w = W c with W^T W = gram.
Matrix whitening(GroupKind group) {
  return group_spec<double>(group).gram.llt().matrixU();
}

// Adds the part of v orthogonal to the columns of q when it exceeds tol.
bool append_direction(Matrix& q, Vector v, double tol) {
  for (int pass = 0; pass < 2; ++pass)
    if (q.cols() > 0) v -= q * (q.transpose() * v);
  const double r = v.norm();
  if (r <= tol || q.cols() >= q.rows()) return false;
  q.conservativeResize(Eigen::NoChange, q.cols() + 1);
  q.col(q.cols() - 1) = v / r;
  return true;
}

double projection_residual(const Matrix& q, const Vector& v) {
  return q.cols() > 0 ? (v - q * (q.transpose() * v)).norm() : v.norm();
}

}  // namespace

AlgebraEstimate algebra_span(GroupKind group, const std::vector<AlgebraElementd>& elements, int extra_bracket_depth,
                             double tol) {
  const int dim = group_spec<double>(group).algebra_dim;
  const Matrix w = whitening(group);
  const Matrix w_inv = w.inverse();

  Matrix q(dim, 0);
  if (!elements.empty()) {
    Matrix stacked(dim, static_cast<Eigen::Index>(elements.size()));
    for (std::size_t k = 0; k < elements.size(); ++k) {
      require_same_group(elements[k].group, group);
      stacked.col(static_cast<Eigen::Index>(k)) = w * elements[k].coords;
    }
    Eigen::JacobiSVD<Matrix> svd(stacked, Eigen::ComputeThinU);
    const Vector sv = svd.singularValues();
    const double threshold = sv.size() > 0 ? std::max(tol, 1e-8 * sv(0)) : tol;
    for (Eigen::Index k = 0; k < sv.size(); ++k)
      if (sv(k) > threshold) append_direction(q, svd.matrixU().col(k), 0.5);
  }

  auto as_element = [&](const Vector& wcol) { return AlgebraElementd{group, w_inv * wcol}; };
  auto bracket_w = [&](Eigen::Index a, Eigen::Index b) {
    return Vector(w * bracket(as_element(q.col(a)), as_element(q.col(b))).coords);
  };

  for (int round = 0; round < extra_bracket_depth; ++round) {
    bool grew = false;
    const Eigen::Index n = q.cols();
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index b = a + 1; b < n; ++b) grew |= append_direction(q, bracket_w(a, b), tol);
    if (!grew) break;
  }

  AlgebraEstimate est;
  est.rank = static_cast<int>(q.cols());
  for (Eigen::Index a = 0; a < q.cols(); ++a) est.basis.push_back(as_element(q.col(a)));
  for (Eigen::Index a = 0; a < q.cols(); ++a)
    for (Eigen::Index b = a + 1; b < q.cols(); ++b)
      est.closure_residual = std::max(est.closure_residual, projection_residual(q, bracket_w(a, b)));
  return est;
}

AlgebraEstimate holonomy_algebra(const HolonomySample& sample, int extra_bracket_depth, double tol) {
  std::vector<AlgebraElementd> logs;
  for (const auto& lg : sample.logs)
    if (lg) logs.push_back(*lg);
  if (logs.empty()) throw NoLogsAvailable("no holonomy element lies within the injectivity radius");
  return algebra_span(sample.reference.group, logs, extra_bracket_depth, tol);
}

Vector principal_angles(const std::vector<AlgebraElementd>& a, const std::vector<AlgebraElementd>& b) {
  if (a.size() != b.size()) throw DimensionMismatch("principal angles need subspaces of equal dimension");
  if (a.empty()) return Vector::Zero(0);
  const GroupKind group = a.front().group;
  const Matrix w = whitening(group);
  const int dim = group_spec<double>(group).algebra_dim;
  Matrix ma(dim, static_cast<Eigen::Index>(a.size())), mb(dim, static_cast<Eigen::Index>(b.size()));
  for (std::size_t k = 0; k < a.size(); ++k) {
    require_same_group(a[k].group, group);
    require_same_group(b[k].group, group);
    ma.col(static_cast<Eigen::Index>(k)) = w * a[k].coords;
    mb.col(static_cast<Eigen::Index>(k)) = w * b[k].coords;
  }
  const Matrix qa = ma.householderQr().householderQ() * Matrix::Identity(dim, ma.cols());
  const Matrix qb = mb.householderQr().householderQ() * Matrix::Identity(dim, mb.cols());
  // Sines of the principal angles are the singular values of (I - Qa Qa^T) Qb.
  const Matrix residual = qb - qa * (qa.transpose() * qb);
  Vector sines = Eigen::JacobiSVD<Matrix>(residual).singularValues();
  Vector angles(sines.size());
  for (Eigen::Index k = 0; k < sines.size(); ++k)
    angles(sines.size() - 1 - k) = std::asin(std::min(1.0, sines(k)));
  return angles;
}

AlgebraElementd small_loop_log(const TrivializedLift& lift, const Vector& x0, int i, int j, double eps, double step) {
  if (!(eps > 0.0)) throw std::invalid_argument("small loop size must be positive");
  const PiecewiseControl loop = rectangle_loop(lift.bundle.fiber_dim, i, j, eps, eps);
  const GroupElementd a = displacement(lift, loop, x0, step);
  return (1.0 / (eps * eps)) * log(a);
}

double polygon_signed_area(const BaseTrajectory& base, int i, int j) {
  double twice = 0.0;
  const auto& p = base.points;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const Vector& a = p[k];
    const Vector& b = p[(k + 1) % p.size()];
    twice += a(i) * b(j) - b(i) * a(j);
  }
  return 0.5 * twice;
}

}  // namespace leafhol
