#include <cmath>
#include <stdexcept>

#include "leafhol/errors.hpp"
#include "leafhol/lift.hpp"

namespace leafhol {

namespace {

void require_planar(const AnchoredBundle& bundle, const char* lift) {
  if (bundle.base_dim < 2 || bundle.fiber_dim < 2)
    throw DimensionMismatch(std::string(lift) + " needs base and fibre dimension >= 2 ('" + bundle.name + "')");
}

}  // namespace

TrivializedLift zero_lift(const AnchoredBundle& bundle, GroupKind group) {
  const int dim = group_spec<double>(group).algebra_dim;
  return {"zero", group, bundle, [dim](const Vector&, const Vector&) -> Vector { return Vector::Zero(dim); },
          std::nullopt, true};
}

TrivializedLift so2_area_lift(const AnchoredBundle& bundle, double kappa) {
  require_planar(bundle, "so2-area");
  return {"so2-area", GroupKind::SO2, bundle,
          [kappa](const Vector& x, const Vector& s) -> Vector {
            Vector out(1);
            out(0) = kappa * 0.5 * (x(0) * s(1) - x(1) * s(0));
            return out;
          },
          std::nullopt, true};
}

TrivializedLift so3_flat2_lift(const AnchoredBundle& bundle) {
  require_planar(bundle, "so3-flat2");
  return {"so3-flat2", GroupKind::SO3, bundle,
          [](const Vector&, const Vector& s) -> Vector { return Eigen::Vector3d(s(0), s(1), 0.0); }, std::nullopt,
          true};
}

TrivializedLift heisenberg_area_lift(const AnchoredBundle& bundle) {
  require_planar(bundle, "heisenberg-area");
  return {"heisenberg-area", GroupKind::Heisenberg3, bundle,
          [](const Vector&, const Vector& s) -> Vector { return Eigen::Vector3d(s(0), s(1), 0.0); }, std::nullopt,
          true};
}

TrivializedLift so3_pure_gauge_lift(const AnchoredBundle& bundle) {
  require_planar(bundle, "so3-pure-gauge");
  // A(x, v) = k^-1 dk(v) = v1 Ad_{exp(-x2 E2)} E1 + v2 E2.
  auto connection = [](const Vector& x, const Vector& v) -> Vector {
    const double c = std::cos(x(1)), s = std::sin(x(1));
    return Eigen::Vector3d(v(0) * c, v(1), v(0) * s);
  };
  LiftSplit split{connection, [](const Vector&, const Vector&) -> Vector { return Vector::Zero(3); }};
  return {"so3-pure-gauge", GroupKind::SO3, bundle,
          [connection, bundle](const Vector& x, const Vector& s) -> Vector {
            return -connection(x, evaluate_anchor(bundle, x, s));
          },
          split, bundle.linear};
}

double evaluate_polynomial(const std::vector<PolynomialTerm>& terms, const Vector& x, const Vector& s) {
  double total = 0.0;
  for (const auto& term : terms) {
    double v = term.coeff;
    for (std::size_t i = 0; i < term.powers.size(); ++i) {
      const double base = i < static_cast<std::size_t>(x.size()) ? x(static_cast<Eigen::Index>(i))
                                                                  : s(static_cast<Eigen::Index>(i - x.size()));
      for (int p = 0; p < term.powers[i]; ++p) v *= base;
    }
    total += v;
  }
  return total;
}

TrivializedLift custom_polynomial_lift(const AnchoredBundle& bundle, GroupKind group,
                                       CoefficientPolynomials polynomials) {
  const int dim = group_spec<double>(group).algebra_dim;
  const std::size_t vars = static_cast<std::size_t>(bundle.base_dim + bundle.fiber_dim);
  if (polynomials.size() != static_cast<std::size_t>(dim))
    throw DimensionMismatch("custom-polynomial needs one polynomial per algebra basis element (" +
                            std::to_string(dim) + ")");
  bool linear_in_fiber = true;
  for (const auto& poly : polynomials) {
    for (const auto& term : poly) {
      if (term.powers.size() != vars)
        throw DimensionMismatch("custom-polynomial term needs " + std::to_string(vars) + " exponents");
      int fiber_degree = 0;
      for (std::size_t i = 0; i < vars; ++i) {
        if (term.powers[i] < 0) throw std::invalid_argument("custom-polynomial exponents must be non-negative");
        if (i >= static_cast<std::size_t>(bundle.base_dim)) fiber_degree += term.powers[i];
      }
      if (fiber_degree != 1 && term.coeff != 0.0) linear_in_fiber = false;
    }
  }
  return {"custom-polynomial", group, bundle,
          [polynomials = std::move(polynomials)](const Vector& x, const Vector& s) -> Vector {
            Vector out(static_cast<Eigen::Index>(polynomials.size()));
            for (std::size_t c = 0; c < polynomials.size(); ++c)
              out(static_cast<Eigen::Index>(c)) = evaluate_polynomial(polynomials[c], x, s);
            return out;
          },
          std::nullopt, linear_in_fiber && bundle.linear};
}

}  // namespace leafhol
