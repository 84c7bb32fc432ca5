#pragma once

// Enumerated matrix Lie groups: exponential and logarithm maps, adjoint
// action and bracket. Everything is templated on the scalar type so that
// the same closed forms can be evaluated in extended precision.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "leafhol/errors.hpp"

namespace leafhol {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

enum class GroupKind { SO2, SO3, SE2, Heisenberg3, TransR1 };

inline constexpr std::array<GroupKind, 5> kAllGroups = {GroupKind::SO2, GroupKind::SO3, GroupKind::SE2,
                                                       GroupKind::Heisenberg3, GroupKind::TransR1};

inline std::string_view to_string(GroupKind kind) {
  switch (kind) {
    case GroupKind::SO2: return "SO2";
    case GroupKind::SO3: return "SO3";
    case GroupKind::SE2: return "SE2";
    case GroupKind::Heisenberg3: return "Heisenberg3";
    case GroupKind::TransR1: return "TransR1";
  }
  return "?";
}

inline std::optional<GroupKind> parse_group(std::string_view name) {
  for (GroupKind kind : kAllGroups)
    if (to_string(kind) == name) return kind;
  return std::nullopt;
}

/// Matrix realization of a group together with a fixed basis of its Lie
/// algebra. Basis elements are mutually Frobenius-orthogonal; their norms
/// follow the usual generator normalization (so(3) has [E1,E2] = E3).
template <typename Scalar>
struct GroupSpec {
  GroupKind kind;
  std::string name;
  int matrix_size;
  int algebra_dim;
  std::vector<MatrixX<Scalar>> basis;
  MatrixX<Scalar> gram;          // <E_i, E_j>_F
  MatrixX<Scalar> gram_inverse;  // coordinates of M are gram_inverse * (<E_i, M>_F)_i
};

namespace detail {

template <typename Scalar>
MatrixX<Scalar> unit(int n, int r, int c) {
  MatrixX<Scalar> m = MatrixX<Scalar>::Zero(n, n);
  m(r, c) = Scalar(1);
  return m;
}

template <typename Scalar>
GroupSpec<Scalar> make_spec(GroupKind kind) {
  GroupSpec<Scalar> spec;
  spec.kind = kind;
  spec.name = std::string(to_string(kind));
  using detail::unit;
  switch (kind) {
    case GroupKind::SO2:
      spec.matrix_size = 2;
      spec.basis = {unit<Scalar>(2, 1, 0) - unit<Scalar>(2, 0, 1)};
      break;
    case GroupKind::SO3:
      spec.matrix_size = 3;
      spec.basis = {unit<Scalar>(3, 2, 1) - unit<Scalar>(3, 1, 2), unit<Scalar>(3, 0, 2) - unit<Scalar>(3, 2, 0),
                    unit<Scalar>(3, 1, 0) - unit<Scalar>(3, 0, 1)};
      break;
    case GroupKind::SE2:
      spec.matrix_size = 3;
      spec.basis = {unit<Scalar>(3, 1, 0) - unit<Scalar>(3, 0, 1), unit<Scalar>(3, 0, 2), unit<Scalar>(3, 1, 2)};
      break;
    case GroupKind::Heisenberg3:
      spec.matrix_size = 3;
      spec.basis = {unit<Scalar>(3, 0, 1), unit<Scalar>(3, 1, 2), unit<Scalar>(3, 0, 2)};
      break;
    case GroupKind::TransR1:
      spec.matrix_size = 2;
      spec.basis = {unit<Scalar>(2, 0, 1)};
      break;
  }
  spec.algebra_dim = static_cast<int>(spec.basis.size());
  spec.gram.resize(spec.algebra_dim, spec.algebra_dim);
  for (int i = 0; i < spec.algebra_dim; ++i)
    for (int j = 0; j < spec.algebra_dim; ++j) spec.gram(i, j) = spec.basis[i].cwiseProduct(spec.basis[j]).sum();
  spec.gram_inverse = spec.gram.inverse();
  return spec;
}

}  // namespace detail

template <typename Scalar>
const GroupSpec<Scalar>& group_spec(GroupKind kind) {
  static const std::array<GroupSpec<Scalar>, 5> specs = {
      detail::make_spec<Scalar>(GroupKind::SO2), detail::make_spec<Scalar>(GroupKind::SO3),
      detail::make_spec<Scalar>(GroupKind::SE2), detail::make_spec<Scalar>(GroupKind::Heisenberg3),
      detail::make_spec<Scalar>(GroupKind::TransR1)};
  return specs[static_cast<std::size_t>(kind)];
}

inline void require_same_group(GroupKind a, GroupKind b) {
  if (a != b)
    throw SpecMismatch("group mismatch: " + std::string(to_string(a)) + " vs " + std::string(to_string(b)));
}

/// A Lie algebra vector in basis coordinates.
template <typename Scalar>
struct AlgebraElement {
  GroupKind group = GroupKind::SO2;
  VectorX<Scalar> coords;

  static AlgebraElement zero(GroupKind kind) {
    return {kind, VectorX<Scalar>::Zero(group_spec<Scalar>(kind).algebra_dim)};
  }

  static AlgebraElement basis(GroupKind kind, int index) {
    AlgebraElement a = zero(kind);
    a.coords(index) = Scalar(1);
    return a;
  }

  /// Coordinates of a matrix in the basis (Frobenius projection onto the algebra).
  static AlgebraElement from_matrix(GroupKind kind, const MatrixX<Scalar>& m) {
    const auto& spec = group_spec<Scalar>(kind);
    VectorX<Scalar> dots(spec.algebra_dim);
    for (int i = 0; i < spec.algebra_dim; ++i) dots(i) = spec.basis[i].cwiseProduct(m).sum();
    return {kind, spec.gram_inverse * dots};
  }

  MatrixX<Scalar> matrix() const {
    const auto& spec = group_spec<Scalar>(group);
    MatrixX<Scalar> m = MatrixX<Scalar>::Zero(spec.matrix_size, spec.matrix_size);
    for (int i = 0; i < spec.algebra_dim; ++i) m += coords(i) * spec.basis[i];
    return m;
  }

  /// Frobenius norm of the matrix form.
  Scalar norm() const { return std::sqrt(coords.dot(group_spec<Scalar>(group).gram * coords)); }

  template <typename Other>
  AlgebraElement<Other> cast() const {
    return {group, coords.template cast<Other>()};
  }
};

template <typename Scalar>
AlgebraElement<Scalar> operator+(const AlgebraElement<Scalar>& a, const AlgebraElement<Scalar>& b) {
  require_same_group(a.group, b.group);
  return {a.group, a.coords + b.coords};
}

template <typename Scalar>
AlgebraElement<Scalar> operator-(const AlgebraElement<Scalar>& a, const AlgebraElement<Scalar>& b) {
  require_same_group(a.group, b.group);
  return {a.group, a.coords - b.coords};
}

template <typename Scalar>
AlgebraElement<Scalar> operator-(const AlgebraElement<Scalar>& a) {
  return {a.group, -a.coords};
}

template <typename Scalar>
AlgebraElement<Scalar> operator*(Scalar s, const AlgebraElement<Scalar>& a) {
  return {a.group, s * a.coords};
}

/// A group element as a matrix.
template <typename Scalar>
struct GroupElement {
  GroupKind group = GroupKind::SO2;
  MatrixX<Scalar> matrix;

  static GroupElement identity(GroupKind kind) {
    const int n = group_spec<Scalar>(kind).matrix_size;
    return {kind, MatrixX<Scalar>::Identity(n, n)};
  }

  template <typename Other>
  GroupElement<Other> cast() const {
    return {group, matrix.template cast<Other>()};
  }
};

template <typename Scalar>
GroupElement<Scalar> operator*(const GroupElement<Scalar>& a, const GroupElement<Scalar>& b) {
  require_same_group(a.group, b.group);
  return {a.group, a.matrix * b.matrix};
}

template <typename Scalar>
GroupElement<Scalar> inverse(const GroupElement<Scalar>& g) {
  const auto& m = g.matrix;
  switch (g.group) {
    case GroupKind::SO2:
    case GroupKind::SO3:
      return {g.group, m.transpose()};
    case GroupKind::SE2: {
      MatrixX<Scalar> r = MatrixX<Scalar>::Identity(3, 3);
      r.template topLeftCorner<2, 2>() = m.template topLeftCorner<2, 2>().transpose();
      r.template topRightCorner<2, 1>() = -r.template topLeftCorner<2, 2>() * m.template topRightCorner<2, 1>();
      return {g.group, r};
    }
    case GroupKind::Heisenberg3:
    case GroupKind::TransR1: {
      // (I + N)^-1 = I - N + N^2 for nilpotent N of index <= 3.
      const MatrixX<Scalar> id = MatrixX<Scalar>::Identity(m.rows(), m.cols());
      const MatrixX<Scalar> n = m - id;
      return {g.group, id - n + n * n};
    }
  }
  return {g.group, m.inverse()};
}

/// Distance of a matrix from the group's constraint set.
template <typename Scalar>
Scalar constraint_residual(const GroupElement<Scalar>& g) {
  const auto& spec = group_spec<Scalar>(g.group);
  const auto& m = g.matrix;
  if (m.rows() != spec.matrix_size || m.cols() != spec.matrix_size) return std::numeric_limits<Scalar>::infinity();
  if (!m.allFinite()) return std::numeric_limits<Scalar>::infinity();
  const int n = spec.matrix_size;
  switch (g.group) {
    case GroupKind::SO2:
    case GroupKind::SO3: {
      Scalar r = (m.transpose() * m - MatrixX<Scalar>::Identity(n, n)).norm();
      return r + std::max(Scalar(0), Scalar(1) - m.determinant());
    }
    case GroupKind::SE2: {
      const MatrixX<Scalar> rot = m.template topLeftCorner<2, 2>();
      Scalar r = (rot.transpose() * rot - MatrixX<Scalar>::Identity(2, 2)).norm();
      r += std::max(Scalar(0), Scalar(1) - rot.determinant());
      r += std::abs(m(2, 0)) + std::abs(m(2, 1)) + std::abs(m(2, 2) - Scalar(1));
      return r;
    }
    case GroupKind::Heisenberg3:
    case GroupKind::TransR1: {
      Scalar r(0);
      for (int i = 0; i < n; ++i) {
        r += std::abs(m(i, i) - Scalar(1));
        for (int j = 0; j < i; ++j) r += std::abs(m(i, j));
      }
      return r;
    }
  }
  return std::numeric_limits<Scalar>::infinity();
}

template <typename Scalar>
bool is_group_element(const GroupElement<Scalar>& g, Scalar tol = Scalar(1e-9)) {
  return constraint_residual(g) <= tol;
}

namespace detail {

// sin(t)/t and (1 - cos t)/t^2 with series near zero.
template <typename Scalar>
Scalar sinc(Scalar t) {
  if (std::abs(t) < Scalar(1e-3)) {
    const Scalar t2 = t * t;
    return Scalar(1) - t2 / Scalar(6) + t2 * t2 / Scalar(120);
  }
  return std::sin(t) / t;
}

template <typename Scalar>
Scalar cosc(Scalar t) {
  if (std::abs(t) < Scalar(1e-3)) {
    const Scalar t2 = t * t;
    return Scalar(0.5) - t2 / Scalar(24) + t2 * t2 / Scalar(720);
  }
  return (Scalar(1) - std::cos(t)) / (t * t);
}

template <typename Scalar>
MatrixX<Scalar> rotation2(Scalar angle) {
  MatrixX<Scalar> r(2, 2);
  const Scalar c = std::cos(angle), s = std::sin(angle);
  r << c, -s, s, c;
  return r;
}

template <typename Scalar>
void check_angle(Scalar angle, Scalar margin) {
  if (std::abs(angle) >= std::numbers::pi_v<Scalar> - margin)
    throw OutOfInjectivityRadius("rotation angle " + std::to_string(static_cast<double>(angle)) +
                                 " outside the injectivity radius");
}

}  // namespace detail

template <typename Scalar>
GroupElement<Scalar> exp(const AlgebraElement<Scalar>& a) {
  const auto& c = a.coords;
  switch (a.group) {
    case GroupKind::SO2:
      return {a.group, detail::rotation2(c(0))};
    case GroupKind::SO3: {
      const MatrixX<Scalar> w = a.matrix();
      const Scalar theta = c.norm();
      MatrixX<Scalar> r = MatrixX<Scalar>::Identity(3, 3) + detail::sinc(theta) * w + detail::cosc(theta) * (w * w);
      return {a.group, r};
    }
    case GroupKind::SE2: {
      const Scalar theta = c(0);
      const Scalar s = detail::sinc(theta), k = theta * detail::cosc(theta);
      MatrixX<Scalar> g = MatrixX<Scalar>::Identity(3, 3);
      g.template topLeftCorner<2, 2>() = detail::rotation2(theta);
      g(0, 2) = s * c(1) - k * c(2);
      g(1, 2) = k * c(1) + s * c(2);
      return {a.group, g};
    }
    case GroupKind::Heisenberg3:
    case GroupKind::TransR1: {
      const MatrixX<Scalar> n = a.matrix();
      return {a.group, MatrixX<Scalar>::Identity(n.rows(), n.cols()) + n + Scalar(0.5) * (n * n)};
    }
  }
  return GroupElement<Scalar>::identity(a.group);
}

/// Principal logarithm. Rotation groups require the angle to stay below
/// pi - injectivity_margin and raise OutOfInjectivityRadius otherwise.
template <typename Scalar>
AlgebraElement<Scalar> log(const GroupElement<Scalar>& g, Scalar injectivity_margin = Scalar(1e-6)) {
  const auto& m = g.matrix;
  AlgebraElement<Scalar> out = AlgebraElement<Scalar>::zero(g.group);
  switch (g.group) {
    case GroupKind::SO2: {
      const Scalar angle = std::atan2(m(1, 0), m(0, 0));
      detail::check_angle(angle, injectivity_margin);
      out.coords(0) = angle;
      return out;
    }
    case GroupKind::SO3: {
      Eigen::Matrix<Scalar, 3, 1> s(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1));
      s *= Scalar(0.5);
      const Scalar sin_theta = s.norm();
      const Scalar cos_theta = (m.trace() - Scalar(1)) / Scalar(2);
      const Scalar theta = std::atan2(sin_theta, cos_theta);
      detail::check_angle(theta, injectivity_margin);
      if (theta < Scalar(2.5)) {
        out.coords = (theta < Scalar(1e-3) ? Scalar(1) + theta * theta / Scalar(6) : theta / sin_theta) * s;
        return out;
      }
      // Near pi the antisymmetric part degenerates; read the axis off the symmetric part.
      MatrixX<Scalar> nn = (m + m.transpose() - Scalar(2) * cos_theta * MatrixX<Scalar>::Identity(3, 3)) /
                           (Scalar(2) * (Scalar(1) - cos_theta));
      int col = 0;
      nn.diagonal().maxCoeff(&col);
      Eigen::Matrix<Scalar, 3, 1> axis = nn.col(col) / std::sqrt(nn(col, col));
      if (axis.dot(s) < Scalar(0)) axis = -axis;
      out.coords = theta * axis;
      return out;
    }
    case GroupKind::SE2: {
      const Scalar theta = std::atan2(m(1, 0), m(0, 0));
      detail::check_angle(theta, injectivity_margin);
      const Scalar a = detail::sinc(theta), b = theta * detail::cosc(theta);
      const Scalar d = a * a + b * b;
      out.coords(0) = theta;
      out.coords(1) = (a * m(0, 2) + b * m(1, 2)) / d;
      out.coords(2) = (-b * m(0, 2) + a * m(1, 2)) / d;
      return out;
    }
    case GroupKind::Heisenberg3:
    case GroupKind::TransR1: {
      const MatrixX<Scalar> n = m - MatrixX<Scalar>::Identity(m.rows(), m.cols());
      return AlgebraElement<Scalar>::from_matrix(g.group, n - Scalar(0.5) * (n * n));
    }
  }
  return out;
}

template <typename Scalar>
AlgebraElement<Scalar> bracket(const AlgebraElement<Scalar>& a, const AlgebraElement<Scalar>& b) {
  require_same_group(a.group, b.group);
  const MatrixX<Scalar> ma = a.matrix(), mb = b.matrix();
  return AlgebraElement<Scalar>::from_matrix(a.group, ma * mb - mb * ma);
}

/// Ad_g(A) = g A g^-1.
template <typename Scalar>
AlgebraElement<Scalar> ad_action(const GroupElement<Scalar>& g, const AlgebraElement<Scalar>& a) {
  require_same_group(g.group, a.group);
  return AlgebraElement<Scalar>::from_matrix(a.group, g.matrix * a.matrix() * inverse(g).matrix);
}

/// Residual of projecting an arbitrary matrix onto the algebra.
template <typename Scalar>
Scalar algebra_residual(GroupKind kind, const MatrixX<Scalar>& m) {
  return (m - AlgebraElement<Scalar>::from_matrix(kind, m).matrix()).norm();
}

using GroupSpecd = GroupSpec<double>;
using GroupElementd = GroupElement<double>;
using AlgebraElementd = AlgebraElement<double>;

}  // namespace leafhol
