#include "leafhol/anchored.hpp"

#include <cmath>
#include <stdexcept>

#include "leafhol/errors.hpp"
#include "leafhol/lie_ode.hpp"
#include "leafhol/random.hpp"

namespace leafhol {

Section constant_section(const Vector& u, std::string name) {
  return {std::move(name), [u](const Vector&) { return u; }};
}

std::vector<Section> coordinate_sections(const AnchoredBundle& bundle) {
  std::vector<Section> out;
  for (int a = 0; a < bundle.fiber_dim; ++a)
    out.push_back(constant_section(Vector::Unit(bundle.fiber_dim, a), "e" + std::to_string(a + 1)));
  return out;
}

Vector evaluate_anchor(const AnchoredBundle& bundle, const Vector& q, const Vector& u) {
  if (q.size() != bundle.base_dim || u.size() != bundle.fiber_dim)
    throw DimensionMismatch("anchor of '" + bundle.name + "' evaluated with wrong dimensions");
  Vector v = bundle.anchor(q, u);
  if (v.size() != bundle.base_dim || !v.allFinite())
    throw NonFiniteOutput("anchor of '" + bundle.name + "' returned a non-finite value");
  return v;
}

AnchoredBundle invert_bundle(const AnchoredBundle& bundle) {
  AnchoredBundle inv = bundle;
  inv.name = bundle.name.starts_with("-") ? bundle.name.substr(1) : "-" + bundle.name;
  inv.anchor = [anchor = bundle.anchor](const Vector& q, const Vector& u) -> Vector { return -anchor(q, u); };
  return inv;
}

VectorField induced_field(const AnchoredBundle& bundle, const Section& section) {
  return [bundle, value = section.value](const Vector& q) { return evaluate_anchor(bundle, q, value(q)); };
}

namespace {

void guard(const Vector& x) {
  if (!x.allFinite() || x.norm() > kDomainBound) throw Blowup("trajectory left the domain guard box");
}

}  // namespace

void flow_field(const VectorField& field, double sign, double duration, double step, Vector x, BaseTrajectory& out) {
  const int n = substep_count(duration, step);
  if (n == 0) return;
  const double h = duration / n;
  const double t0 = out.times.empty() ? 0.0 : out.times.back();
  auto f = [&](const Vector& q) -> Vector { return sign * field(q); };
  for (int i = 0; i < n; ++i) {
    const Vector k1 = f(x);
    const Vector k2 = f(x + 0.5 * h * k1);
    const Vector k3 = f(x + 0.5 * h * k2);
    const Vector k4 = f(x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    guard(x);
    out.times.push_back(i + 1 == n ? t0 + duration : t0 + (i + 1) * h);
    out.points.push_back(x);
  }
}

BaseTrajectory concatenation(const CompositeFlowSpec& spec, const Vector& x, double step) {
  if (spec.fields.size() != spec.times.size())
    throw std::invalid_argument("composite flow: fields and times differ in length");
  guard(x);
  BaseTrajectory out;
  out.times.push_back(0.0);
  out.points.push_back(x);
  for (std::size_t k = spec.fields.size(); k-- > 0;) {
    const double t = spec.times[k];
    out.segment_starts.push_back(out.points.size() - 1);
    flow_field(spec.fields[k], t < 0 ? -1.0 : 1.0, std::abs(t), step, out.points.back(), out);
  }
  return out;
}

Vector composite_flow(const CompositeFlowSpec& spec, const Vector& x, double step) {
  return concatenation(spec, x, step).endpoint();
}

double bracket_fd_step(const Vector& q) { return std::max(1e-5, 1e-5 * q.norm()); }

namespace {

// D f(q) v by central differences along the unit direction of v.
Vector directional(const VectorField& f, const Vector& q, const Vector& v) {
  const double nv = v.norm();
  if (nv == 0.0) return Vector::Zero(q.size());
  const double h = bracket_fd_step(q);
  const Vector d = v / nv;
  return (f(q + h * d) - f(q - h * d)) * (nv / (2.0 * h));
}

}  // namespace

VectorField lie_bracket(VectorField x, VectorField y) {
  return [x = std::move(x), y = std::move(y)](const Vector& q) -> Vector {
    return directional(y, q, x(q)) - directional(x, q, y(q));
  };
}

RankResult bracket_rank(const std::vector<VectorField>& fields, const Vector& x, int depth,
                        double relative_threshold) {
  if (depth < 0) throw std::invalid_argument("bracket depth must be non-negative");
  std::vector<VectorField> all = fields;
  std::vector<VectorField> level = fields;
  for (int d = 1; d <= depth; ++d) {
    std::vector<VectorField> next;
    for (const auto& f : fields)
      for (const auto& b : level) next.push_back(lie_bracket(f, b));
    all.insert(all.end(), next.begin(), next.end());
    level = std::move(next);
  }

  RankResult result;
  if (all.empty()) {
    result.singular_values = Vector::Zero(0);
    return result;
  }
  Matrix values(x.size(), static_cast<Eigen::Index>(all.size()));
  for (std::size_t i = 0; i < all.size(); ++i) values.col(static_cast<Eigen::Index>(i)) = all[i](x);

  Eigen::JacobiSVD<Matrix> svd(values, Eigen::ComputeThinU);
  result.singular_values = svd.singularValues();
  const double smax = result.singular_values.size() > 0 ? result.singular_values(0) : 0.0;
  if (smax > 0.0) {
    for (Eigen::Index i = 0; i < result.singular_values.size(); ++i) {
      if (result.singular_values(i) > relative_threshold * smax) {
        result.basis.push_back(svd.matrixU().col(i));
        ++result.rank;
      }
    }
  }
  return result;
}

OrbitSample sample_orbit(const AnchoredBundle& bundle, const std::vector<Section>& sections, const Vector& x,
                         int count, double max_time, std::uint64_t seed, double step) {
  if (count < 1) throw std::invalid_argument("orbit sample count must be at least 1");
  if (sections.empty()) throw std::invalid_argument("orbit sampling needs at least one section");
  std::vector<VectorField> fields;
  for (const auto& s : sections) fields.push_back(induced_field(bundle, s));

  // All draws happen up front so the sample does not depend on evaluation order.
  Rng rng(seed);
  std::vector<CompositeFlowSpec> specs(static_cast<std::size_t>(count));
  for (auto& spec : specs) {
    const int segments = rng.uniform_int(1, 6);
    for (int j = 0; j < segments; ++j) {
      const int index = rng.uniform_int(0, static_cast<int>(fields.size()) - 1);
      const int sign = rng.sign();
      const double t = rng.uniform(0.0, max_time);
      // Inserted at the front: the first drawn segment is applied first.
      spec.fields.insert(spec.fields.begin(), fields[static_cast<std::size_t>(index)]);
      spec.times.insert(spec.times.begin(), sign * t);
    }
  }

  OrbitSample out;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    try {
      out.points.push_back(composite_flow(specs[i], x, step));
    } catch (const Blowup&) {
      out.dropped.push_back(i);
    }
  }
  return out;
}

double linearity_defect(const AnchoredBundle& bundle, int probes, std::uint64_t seed, double box) {
  Rng rng(seed);
  double worst = 0.0;
  for (int i = 0; i < probes; ++i) {
    const Vector q = rng.uniform_vector(bundle.base_dim, -box, box);
    const Vector u = rng.normal_vector(bundle.fiber_dim);
    const Vector v = rng.normal_vector(bundle.fiber_dim);
    const double a = rng.uniform(-2.0, 2.0), b = rng.uniform(-2.0, 2.0);
    const Vector combined = evaluate_anchor(bundle, q, a * u + b * v);
    const Vector split = a * evaluate_anchor(bundle, q, u) + b * evaluate_anchor(bundle, q, v);
    worst = std::max(worst, (combined - split).norm() / (1.0 + combined.norm()));
  }
  return worst;
}

double montgomery_profile(double r) { return 0.5 * r * r - 0.25 * r * r * r * r; }

AnchoredBundle montgomery_bundle() {
  return {"montgomery", 3, 2,
          [](const Vector& q, const Vector& u) -> Vector {
            return Eigen::Vector3d(u(0), u(1), -montgomery_profile(q(0)) * u(1));
          },
          true};
}

AnchoredBundle twoleaf_bundle() {
  return {"twoleaf", 2, 2,
          [](const Vector& q, const Vector& u) -> Vector { return Eigen::Vector2d(u(0), q(1) * u(1)); }, true};
}

AnchoredBundle planar_identity_bundle() {
  return {"planar-identity", 2, 2, [](const Vector&, const Vector& u) -> Vector { return u; }, true};
}

std::optional<AnchoredBundle> builtin_bundle(std::string_view name) {
  if (name == "montgomery") return montgomery_bundle();
  if (name == "twoleaf") return twoleaf_bundle();
  if (name == "planar-identity") return planar_identity_bundle();
  return std::nullopt;
}

std::vector<std::string> builtin_bundle_names() { return {"montgomery", "planar-identity", "twoleaf"}; }

}  // namespace leafhol
