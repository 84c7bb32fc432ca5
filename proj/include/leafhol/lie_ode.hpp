#pragma once

// Fourth-order commutator-free Lie group integrator for the right
// logarithmic derivative equation  g'(t) g(t)^-1 = Y(t).
//
// One step from t to t + h with stage values F1 = Y(t), F2 = F3 = Y(t + h/2),
// F4 = Y(t + h) reads
//   g <- exp(h (-F1/12 + F2/6 + F3/6 + F4/4)) exp(h (F1/4 + F2/6 + F3/6 - F4/12)) g.
// Because every update is a product of exponentials the path stays on the
// group up to roundoff.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "leafhol/liegroup.hpp"

namespace leafhol {

template <typename Scalar>
struct GroupPath {
  std::vector<Scalar> times;
  std::vector<GroupElement<Scalar>> elements;
};

/// Number of uniform substeps used to cover an interval of the given length.
template <typename Scalar>
int substep_count(Scalar length, Scalar step) {
  if (!(step > Scalar(0))) throw std::invalid_argument("integration step must be positive");
  if (length <= Scalar(0)) return 0;
  const Scalar n = std::ceil(length / step - Scalar(1e-9));
  return std::max(1, static_cast<int>(n));
}

namespace cf4 {

/// The two exponent arguments of one step, in application order.
template <typename Scalar>
std::pair<AlgebraElement<Scalar>, AlgebraElement<Scalar>> exponents(const AlgebraElement<Scalar>& f1,
                                                                    const AlgebraElement<Scalar>& f2,
                                                                    const AlgebraElement<Scalar>& f3,
                                                                    const AlgebraElement<Scalar>& f4, Scalar h) {
  const Scalar sixth = Scalar(1) / Scalar(6), quarter = Scalar(0.25), twelfth = Scalar(1) / Scalar(12);
  AlgebraElement<Scalar> first{f1.group, h * (quarter * f1.coords + sixth * (f2.coords + f3.coords) - twelfth * f4.coords)};
  AlgebraElement<Scalar> second{f1.group, h * (-twelfth * f1.coords + sixth * (f2.coords + f3.coords) + quarter * f4.coords)};
  return {first, second};
}

/// Left factor applied to g over one step.
template <typename Scalar>
GroupElement<Scalar> propagator(const AlgebraElement<Scalar>& f1, const AlgebraElement<Scalar>& f2,
                                const AlgebraElement<Scalar>& f3, const AlgebraElement<Scalar>& f4, Scalar h) {
  auto [first, second] = exponents(f1, f2, f3, f4, h);
  return exp(second) * exp(first);
}

}  // namespace cf4

/// Integrates g' g^-1 = Y(t) on [a, b] from g(a) = g0 with uniform steps no
/// larger than `step`. The returned path includes both endpoints.
template <typename Scalar, typename Rhs>
GroupPath<Scalar> solve_right_log_ode(Rhs&& rhs, const GroupElement<Scalar>& g0, Scalar a, Scalar b, Scalar step) {
  const int n = substep_count(b - a, step);
  GroupPath<Scalar> path;
  path.times.reserve(n + 1);
  path.elements.reserve(n + 1);
  path.times.push_back(a);
  path.elements.push_back(g0);
  if (n == 0) return path;

  auto eval = [&](Scalar t) {
    AlgebraElement<Scalar> y = rhs(t);
    require_same_group(y.group, g0.group);
    if (!y.coords.allFinite()) throw NonFiniteRHS("right-hand side is not finite at t = " + std::to_string(static_cast<double>(t)));
    return y;
  };

  const Scalar h = (b - a) / Scalar(n);
  GroupElement<Scalar> g = g0;
  AlgebraElement<Scalar> f1 = eval(a);
  for (int i = 0; i < n; ++i) {
    const Scalar t = a + Scalar(i) * h;
    const Scalar t_next = (i + 1 == n) ? b : a + Scalar(i + 1) * h;
    const AlgebraElement<Scalar> fm = eval(t + h / Scalar(2));
    const AlgebraElement<Scalar> f4 = eval(t_next);
    g = cf4::propagator(f1, fm, fm, f4, h) * g;
    path.times.push_back(t_next);
    path.elements.push_back(g);
    f1 = f4;
  }
  return path;
}

}  // namespace leafhol
