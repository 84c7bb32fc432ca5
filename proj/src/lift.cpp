#include "leafhol/lift.hpp"

#include <cmath>
#include <stdexcept>

#include "leafhol/errors.hpp"
#include "leafhol/lie_ode.hpp"
#include "leafhol/random.hpp"

namespace leafhol {

AlgebraElementd TrivializedLift::coefficient(const Vector& x, const Vector& s) const {
  AlgebraElementd a{group, coeff(x, s)};
  if (a.coords.size() != group_spec<double>(group).algebra_dim)
    throw DimensionMismatch("lift '" + name + "' coefficient has the wrong number of algebra coordinates");
  if (!a.coords.allFinite()) throw NonFiniteRHS("lift '" + name + "' coefficient is not finite");
  return a;
}

GroupElementd BundleMorphismSpec::map_group(const GroupElementd& g_src) const {
  require_same_group(g_src.group, source_group);
  if (source_group == target_group && algebra_map.isIdentity(0.0)) return g_src;
  const AlgebraElementd a = log(g_src);
  return exp(AlgebraElementd{target_group, algebra_map * a.coords});
}

namespace {

Matrix jacobian(const BundleMorphismSpec& m, const Vector& x) {
  if (m.base_jacobian) return m.base_jacobian(x);
  const Vector f0 = m.base_map(x);
  Matrix j(f0.size(), x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(x(i)));
    Vector xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    j.col(i) = (m.base_map(xp) - m.base_map(xm)) / (2.0 * h);
  }
  return j;
}

double homomorphism_residual(const BundleMorphismSpec& m) {
  const int ds = group_spec<double>(m.source_group).algebra_dim;
  double worst = 0.0;
  for (int i = 0; i < ds; ++i) {
    for (int j = i + 1; j < ds; ++j) {
      const auto ei = AlgebraElementd::basis(m.source_group, i), ej = AlgebraElementd::basis(m.source_group, j);
      const Vector lhs = m.algebra_map * bracket(ei, ej).coords;
      const Vector rhs = bracket(AlgebraElementd{m.target_group, m.algebra_map * ei.coords},
                                 AlgebraElementd{m.target_group, m.algebra_map * ej.coords})
                             .coords;
      worst = std::max(worst, (lhs - rhs).norm());
    }
  }
  return worst;
}

void require_algebra_map(const BundleMorphismSpec& m) {
  const int ds = group_spec<double>(m.source_group).algebra_dim;
  const int dt = group_spec<double>(m.target_group).algebra_dim;
  if (m.algebra_map.rows() != dt || m.algebra_map.cols() != ds)
    throw DimensionMismatch("algebra map must be " + std::to_string(dt) + " x " + std::to_string(ds));
  Eigen::FullPivLU<Matrix> lu(m.algebra_map);
  if (lu.rank() < ds) throw NotInvertible("group morphism is not injective on the Lie algebra");
  if (homomorphism_residual(m) > 1e-9) throw NotInvertible("algebra map is not a Lie algebra homomorphism");
}

}  // namespace

MorphismCheck check_morphism(const BundleMorphismSpec& morphism, const AnchoredBundle& source,
                             const AnchoredBundle& target, int probes, std::uint64_t seed, double box) {
  MorphismCheck out;
  Rng rng(seed);
  for (int i = 0; i < probes; ++i) {
    const Vector x = rng.uniform_vector(source.base_dim, -box, box);
    const Vector s = rng.normal_vector(source.fiber_dim);
    const Vector fx = morphism.base_map(x);
    const Vector fs = morphism.fiber_map(x, s);
    if (morphism.base_inverse)
      out.base_roundtrip = std::max(out.base_roundtrip, (morphism.base_inverse(fx) - x).norm());
    if (morphism.fiber_inverse)
      out.fiber_roundtrip = std::max(out.fiber_roundtrip, (morphism.fiber_inverse(x, fs) - s).norm());
    const Vector pushed = jacobian(morphism, x) * evaluate_anchor(source, x, s);
    out.anchor_residual = std::max(out.anchor_residual, (pushed - evaluate_anchor(target, fx, fs)).norm());
  }
  out.homomorphism_residual = homomorphism_residual(morphism);
  return out;
}

void check_split(const TrivializedLift& lift, int probes, std::uint64_t seed, double tol) {
  if (!lift.split) return;
  Rng rng(seed);
  for (int i = 0; i < probes; ++i) {
    const Vector x = rng.uniform_vector(lift.bundle.base_dim, -1.0, 1.0);
    const Vector s = rng.normal_vector(lift.bundle.fiber_dim);
    const Vector expected =
        lift.split->chi0(x, s) - lift.split->connection(x, evaluate_anchor(lift.bundle, x, s));
    const double r = (lift.coeff(x, s) - expected).norm();
    if (!(r <= tol)) throw std::invalid_argument("lift '" + lift.name + "' disagrees with its split by " + std::to_string(r));
  }
}

LiftVelocity lift_value(const TrivializedLift& lift, const Vector& x, const GroupElementd& g, const Vector& s) {
  require_same_group(g.group, lift.group);
  return {evaluate_anchor(lift.bundle, x, s), lift.coefficient(x, s).matrix() * g.matrix};
}

Vector flatten_point(const Vector& x, const GroupElementd& g) {
  Vector out(x.size() + g.matrix.size());
  out.head(x.size()) = x;
  out.tail(g.matrix.size()) = g.matrix.reshaped();
  return out;
}

VectorField lifted_section_field(const TrivializedLift& lift, const Section& section) {
  const int n = lift.bundle.base_dim;
  const int m = group_spec<double>(lift.group).matrix_size;
  return [lift, value = section.value, n, m](const Vector& p) -> Vector {
    const Vector x = p.head(n);
    const Matrix g = p.tail(m * m).reshaped(m, m);
    const Vector s = value(x);
    Vector out(p.size());
    out.head(n) = evaluate_anchor(lift.bundle, x, s);
    out.tail(m * m) = (lift.coefficient(x, s).matrix() * g).reshaped();
    return out;
  };
}

LiftedCurve transport(const TrivializedLift& lift, const PiecewiseControl& control, const Vector& x0,
                      const GroupElementd& g0, double step) {
  require_same_group(g0.group, lift.group);
  LiftedCurve out;
  out.path.push_back(g0);
  GroupElementd g = g0;
  auto observer = [&](const detail::StageData& stage) {
    const double sign = stage.segment->sign;
    std::array<AlgebraElementd, 4> f;
    for (int i = 0; i < 4; ++i) f[i] = sign * lift.coefficient(stage.points[i], stage.controls[i]);
    g = cf4::propagator(f[0], f[1], f[2], f[3], stage.h) * g;
    out.path.push_back(g);
  };
  out.base = detail::integrate_admissible_staged(lift.bundle, control, x0, step, observer);
  return out;
}

GroupElementd displacement(const TrivializedLift& lift, const PiecewiseControl& loop, const Vector& x0, double step,
                           double closure_tolerance) {
  const LiftedCurve curve = transport(lift, loop, x0, GroupElementd::identity(lift.group), step);
  const double gap = (curve.base.end() - x0).norm();
  if (!(gap <= closure_tolerance)) throw NotALoop(gap);
  return curve.end();
}

TrivializedLift transfer_lift(const BundleMorphismSpec& morphism, const TrivializedLift& lift_prime,
                              const AnchoredBundle& target_bundle) {
  if (!morphism.base_inverse || !morphism.fiber_inverse)
    throw NotInvertible("transfer_lift needs inverse base and fibre maps");
  require_same_group(lift_prime.group, morphism.source_group);
  require_algebra_map(morphism);

  TrivializedLift out;
  out.name = lift_prime.name + "@transfer";
  out.group = morphism.target_group;
  out.bundle = target_bundle;
  out.rho_connection = lift_prime.rho_connection;
  out.coeff = [morphism, source = lift_prime](const Vector& x, const Vector& s) -> Vector {
    const Vector xs = morphism.base_inverse(x);
    return morphism.algebra_map * source.coeff(xs, morphism.fiber_inverse(xs, s));
  };
  return out;
}

AnchoredBundle pullback_bundle(const BundleMorphismSpec& immersion, const AnchoredBundle& target, int source_dim,
                               std::string name) {
  AnchoredBundle out;
  out.name = std::move(name);
  out.base_dim = source_dim;
  out.fiber_dim = target.fiber_dim;
  out.linear = target.linear;
  out.anchor = [immersion, target](const Vector& x, const Vector& s) -> Vector {
    const Matrix j = jacobian(immersion, x);
    const Vector v = evaluate_anchor(target, immersion.base_map(x), immersion.fiber_map(x, s));
    return j.completeOrthogonalDecomposition().solve(v);
  };
  return out;
}

TrivializedLift pullback_lift(const BundleMorphismSpec& immersion, const TrivializedLift& lift,
                              const AnchoredBundle& source_bundle) {
  require_same_group(lift.group, immersion.target_group);
  require_algebra_map(immersion);
  TrivializedLift out;
  out.name = lift.name + "@" + source_bundle.name;
  out.group = immersion.source_group;
  out.bundle = source_bundle;
  out.rho_connection = lift.rho_connection;
  const Matrix left_inverse = immersion.algebra_map.completeOrthogonalDecomposition().pseudoInverse();
  out.coeff = [immersion, lift, left_inverse](const Vector& x, const Vector& s) -> Vector {
    return left_inverse * lift.coeff(immersion.base_map(x), immersion.fiber_map(x, s));
  };
  return out;
}

}  // namespace leafhol
