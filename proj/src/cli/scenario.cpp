#include "cli/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli/builtin_scenarios.hpp"
#include "leafhol/errors.hpp"

namespace leafhol::cli {

using nlohmann::json;

std::string_view to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::RankMap: return "rank-map";
    case TaskKind::Orbit: return "orbit";
    case TaskKind::Transport: return "transport";
    case TaskKind::Holonomy: return "holonomy";
    case TaskKind::Algebra: return "algebra";
    case TaskKind::Convergence: return "convergence";
  }
  return "?";
}

namespace {

// Line of every JSON pointer in the source text. Object members map to the
// line of their key.
class Locator {
 public:
  explicit Locator(const std::string& text) { scan(text); }

  int line(std::string pointer) const {
    while (true) {
      if (auto it = lines_.find(pointer); it != lines_.end()) return it->second;
      if (pointer.empty()) return 1;
      pointer.erase(pointer.rfind('/'));
    }
  }

 private:
  struct Frame {
    bool object;
    std::string key;
    int index = 0;
  };

  static std::string escape(const std::string& key) {
    std::string out;
    for (char c : key) {
      if (c == '~') out += "~0";
      else if (c == '/') out += "~1";
      else out += c;
    }
    return out;
  }

  std::string path() const {
    std::string p;
    for (const auto& f : stack_) p += "/" + (f.object ? escape(f.key) : std::to_string(f.index));
    return p;
  }

  void value_at(int line) {
    if (stack_.empty() || !stack_.back().object) lines_.emplace(path(), line);
  }

  void scan(const std::string& text) {
    int line = 1;
    bool expect_key = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
      const char c = text[i];
      switch (c) {
        case '\n': ++line; break;
        case ' ': case '\t': case '\r': case ':': break;
        case '{':
          value_at(line);
          stack_.push_back({true, "", 0});
          expect_key = true;
          break;
        case '[':
          value_at(line);
          stack_.push_back({false, "", 0});
          expect_key = false;
          break;
        case '}': case ']':
          if (!stack_.empty()) stack_.pop_back();
          expect_key = false;
          break;
        case ',':
          if (!stack_.empty()) {
            if (stack_.back().object) expect_key = true;
            else ++stack_.back().index;
          }
          break;
        case '"': {
          std::string s;
          for (++i; i < text.size() && text[i] != '"'; ++i) {
            if (text[i] == '\\' && i + 1 < text.size()) ++i;
            s += text[i];
          }
          if (expect_key && !stack_.empty() && stack_.back().object) {
            stack_.back().key = s;
            lines_.emplace(path(), line);
            expect_key = false;
          } else {
            value_at(line);
          }
          break;
        }
        default:
          value_at(line);
          while (i + 1 < text.size() && std::string_view(",]} \t\r\n").find(text[i + 1]) == std::string_view::npos) ++i;
          break;
      }
    }
  }

  std::vector<Frame> stack_;
  std::map<std::string, int> lines_;
};

// Read-only view of one JSON value with its pointer, for diagnostics.
class Node {
 public:
  Node(const json& j, std::string pointer, const Locator& loc, const std::string& origin)
      : j_(&j), ptr_(std::move(pointer)), loc_(&loc), origin_(&origin) {}

  [[noreturn]] void fail(const std::string& message) const {
    throw InputError(*origin_ + ":" + std::to_string(line()) + ": " + message +
                     (ptr_.empty() ? "" : " (at " + ptr_ + ")"));
  }

  int line() const { return loc_->line(ptr_); }
  const json& raw() const { return *j_; }

  bool has(const std::string& key) const { return j_->is_object() && j_->contains(key); }

  Node at(const std::string& key) const {
    if (!j_->is_object()) fail("expected an object");
    if (!j_->contains(key)) fail("missing required key '" + key + "'");
    return child(key);
  }

  std::optional<Node> opt(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return child(key);
  }

  Node operator[](std::size_t i) const {
    return Node((*j_)[i], ptr_ + "/" + std::to_string(i), *loc_, *origin_);
  }

  std::size_t size() const {
    if (!j_->is_array()) fail("expected an array");
    return j_->size();
  }

  void allow(std::initializer_list<std::string_view> keys) const {
    if (!j_->is_object()) fail("expected an object");
    for (const auto& [key, value] : j_->items())
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) child(key).fail("unknown key '" + key + "'");
  }

  double number() const {
    if (!j_->is_number()) fail("expected a number");
    const double v = j_->get<double>();
    if (!std::isfinite(v)) fail("expected a finite number");
    return v;
  }

  double positive() const {
    const double v = number();
    if (!(v > 0.0)) fail("expected a positive number");
    return v;
  }

  int integer(int lo = std::numeric_limits<int>::min(), int hi = std::numeric_limits<int>::max()) const {
    if (!j_->is_number_integer()) fail("expected an integer");
    const auto v = j_->get<long long>();
    if (v < lo || v > hi) fail("integer " + std::to_string(v) + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return static_cast<int>(v);
  }

  std::string str() const {
    if (!j_->is_string()) fail("expected a string");
    return j_->get<std::string>();
  }

  bool boolean() const {
    if (!j_->is_boolean()) fail("expected true or false");
    return j_->get<bool>();
  }

  Vector vector(int expected = -1) const {
    const std::size_t n = size();
    if (expected >= 0 && n != static_cast<std::size_t>(expected))
      fail("expected " + std::to_string(expected) + " numbers, got " + std::to_string(n));
    Vector v(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) v(static_cast<Eigen::Index>(i)) = (*this)[i].number();
    return v;
  }

  std::array<double, 2> pair() const {
    const Vector v = vector(2);
    return {v(0), v(1)};
  }

 private:
  Node child(const std::string& key) const {
    std::string esc;
    for (char c : key) esc += c == '~' ? "~0" : c == '/' ? "~1" : std::string(1, c);
    return Node((*j_)[key], ptr_ + "/" + esc, *loc_, *origin_);
  }

  const json* j_;
  std::string ptr_;
  const Locator* loc_;
  const std::string* origin_;
};

template <class T>
T value_or(const std::optional<Node>& n, T fallback, T (*read)(const Node&)) {
  return n ? read(*n) : fallback;
}

int read_int(const Node& n) { return n.integer(); }
int read_count(const Node& n) { return n.integer(0, 100000); }
double read_number(const Node& n) { return n.number(); }
double read_positive(const Node& n) { return n.positive(); }
bool read_bool(const Node& n) { return n.boolean(); }

AnchoredBundle parse_bundle(const Node& n) {
  std::string name;
  if (n.raw().is_string()) {
    name = n.str();
  } else {
    n.allow({"name", "params"});
    name = n.at("name").str();
    if (auto p = n.opt("params"); p && !(p->raw().is_object() && p->raw().empty()))
      p->fail("bundle '" + name + "' takes no parameters");
  }
  auto bundle = builtin_bundle(name);
  if (!bundle) {
    std::string known;
    for (const auto& b : builtin_bundle_names()) known += (known.empty() ? "" : ", ") + b;
    (n.raw().is_string() ? n : n.at("name")).fail("unknown bundle '" + name + "' (known: " + known + ")");
  }
  return *bundle;
}

GroupKind parse_group_name(const Node& n) {
  const std::string name = n.str();
  auto g = parse_group(name);
  if (!g) n.fail("unknown group '" + name + "' (known: SO2, SO3, SE2, Heisenberg3, TransR1)");
  return *g;
}

CoefficientPolynomials parse_polynomials(const Node& n, int algebra_dim, int vars) {
  if (n.size() != static_cast<std::size_t>(algebra_dim))
    n.fail("expected one polynomial per algebra basis element (" + std::to_string(algebra_dim) + ")");
  CoefficientPolynomials out;
  for (std::size_t c = 0; c < n.size(); ++c) {
    const Node poly = n[c];
    std::vector<PolynomialTerm> terms;
    for (std::size_t t = 0; t < poly.size(); ++t) {
      const Node term = poly[t];
      term.allow({"coeff", "powers"});
      PolynomialTerm pt;
      pt.coeff = term.at("coeff").number();
      const Node powers = term.at("powers");
      if (powers.size() != static_cast<std::size_t>(vars))
        powers.fail("expected " + std::to_string(vars) + " exponents over (x, s)");
      for (std::size_t k = 0; k < powers.size(); ++k) pt.powers.push_back(powers[k].integer(0, 16));
      terms.push_back(std::move(pt));
    }
    out.push_back(std::move(terms));
  }
  return out;
}

TrivializedLift parse_lift(const Node& n, const AnchoredBundle& bundle) {
  n.allow({"name", "group", "params"});
  const Node name_node = n.at("name");
  const std::string name = name_node.str();
  const std::optional<Node> group_node = n.opt("group");
  const std::optional<GroupKind> group = group_node ? std::optional(parse_group_name(*group_node)) : std::nullopt;
  const std::optional<Node> params = n.opt("params");
  auto no_params = [&] {
    if (params && !(params->raw().is_object() && params->raw().empty()))
      params->fail("lift '" + name + "' takes no parameters");
  };
  auto fixed_group = [&](GroupKind kind) {
    if (group && *group != kind)
      group_node->fail("lift '" + name + "' lives on " + std::string(to_string(kind)));
  };
  try {
    if (name == "zero") {
      no_params();
      if (!group) n.fail("lift 'zero' needs a group");
      return zero_lift(bundle, *group);
    }
    if (name == "so2-area") {
      fixed_group(GroupKind::SO2);
      double kappa = 1.0;
      if (params) {
        params->allow({"kappa"});
        kappa = value_or(params->opt("kappa"), 1.0, read_number);
      }
      return so2_area_lift(bundle, kappa);
    }
    if (name == "so3-flat2") {
      no_params();
      fixed_group(GroupKind::SO3);
      return so3_flat2_lift(bundle);
    }
    if (name == "heisenberg-area") {
      no_params();
      fixed_group(GroupKind::Heisenberg3);
      return heisenberg_area_lift(bundle);
    }
    if (name == "so3-pure-gauge") {
      no_params();
      fixed_group(GroupKind::SO3);
      return so3_pure_gauge_lift(bundle);
    }
    if (name == "custom-polynomial") {
      if (!group) n.fail("lift 'custom-polynomial' needs a group");
      if (!params) n.fail("lift 'custom-polynomial' needs params.polynomials");
      params->allow({"polynomials"});
      const int dim = group_spec<double>(*group).algebra_dim;
      return custom_polynomial_lift(bundle, *group,
                                    parse_polynomials(params->at("polynomials"), dim, bundle.base_dim + bundle.fiber_dim));
    }
  } catch (const DimensionMismatch& e) {
    n.fail(e.what());
  }
  name_node.fail("unknown lift '" + name +
                 "' (known: custom-polynomial, heisenberg-area, so2-area, so3-flat2, so3-pure-gauge, zero)");
}

void check_base_point(const Node& n, const Vector& x, const AnchoredBundle& bundle) {
  if (x.size() != bundle.base_dim)
    n.fail("base point has dimension " + std::to_string(x.size()) + ", bundle '" + bundle.name + "' has " +
           std::to_string(bundle.base_dim));
}

LoopFamily parse_loops(const Node& n, const AnchoredBundle& bundle) {
  n.allow({"kind", "x0", "sides", "polygons", "plane", "orientation", "tail"});
  LoopFamily f;
  const Node kind = n.at("kind");
  const std::string k = kind.str();
  if (k == "rectangles") f.kind = LoopKind::Rectangles;
  else if (k == "polygon") f.kind = LoopKind::Polygon;
  else if (k == "lasso") f.kind = LoopKind::Lasso;
  else kind.fail("unknown loop kind '" + k + "' (known: lasso, polygon, rectangles)");

  const Node x0 = n.at("x0");
  f.x0 = x0.vector();
  check_base_point(x0, f.x0, bundle);

  if (auto plane = n.opt("plane")) {
    if (plane->size() != 2) plane->fail("expected two fibre indices");
    f.i = (*plane)[0].integer(0, bundle.fiber_dim - 1);
    f.j = (*plane)[1].integer(0, bundle.fiber_dim - 1);
    if (f.i == f.j) plane->fail("fibre indices must differ");
  } else if (bundle.fiber_dim < 2) {
    n.fail("loops need a fibre of dimension >= 2");
  }
  if (auto o = n.opt("orientation")) {
    f.orientation = o->integer(-1, 1);
    if (f.orientation == 0) o->fail("orientation must be 1 or -1");
  }
  if (f.kind == LoopKind::Polygon) {
    const Node polys = n.at("polygons");
    if (polys.size() == 0) polys.fail("expected at least one polygon");
    for (std::size_t p = 0; p < polys.size(); ++p) {
      std::vector<std::array<double, 2>> verts;
      for (std::size_t v = 0; v < polys[p].size(); ++v) verts.push_back(polys[p][v].pair());
      f.polygons.push_back(std::move(verts));
    }
  } else {
    const Node sides = n.at("sides");
    if (sides.size() == 0) sides.fail("expected at least one rectangle");
    for (std::size_t s = 0; s < sides.size(); ++s) {
      const auto ab = sides[s].pair();
      if (ab[0] < 0.0 || ab[1] < 0.0) sides[s].fail("rectangle sides must be non-negative");
      f.sides.push_back(ab);
    }
  }
  if (auto tail = n.opt("tail")) {
    if (f.kind != LoopKind::Lasso) tail->fail("'tail' applies to lasso loops only");
    f.tail = tail->vector(bundle.fiber_dim);
  }
  return f;
}

Tolerance parse_tolerance(const Node& n) {
  Tolerance t;
  t.line = n.line();
  if (n.raw().is_number()) {
    t.max = n.number();
    return t;
  }
  n.allow({"min", "max", "equals"});
  if (auto v = n.opt("min")) t.min = v->number();
  if (auto v = n.opt("max")) t.max = v->number();
  if (auto v = n.opt("equals")) t.equals = v->number();
  if (!t.min && !t.max && !t.equals) n.fail("tolerance needs min, max or equals");
  if (t.min && t.max && *t.min > *t.max) n.fail("tolerance min exceeds max");
  return t;
}

PointGroup parse_point_group(const Node& n, int base_dim, Rng& rng) {
  n.allow({"label", "points", "sample", "expect_rank"});
  PointGroup g;
  g.label = n.at("label").str();
  g.expect_rank = n.at("expect_rank").integer(0, 1000);
  if (auto pts = n.opt("points")) {
    for (std::size_t i = 0; i < pts->size(); ++i) {
      Vector p = (*pts)[i].vector();
      if (p.size() != base_dim) (*pts)[i].fail("point must have dimension " + std::to_string(base_dim));
      g.points.push_back(std::move(p));
    }
  }
  if (auto s = n.opt("sample")) {
    // Uniform in a box; "random_sign" flips the listed coordinates with probability 1/2.
    s->allow({"count", "box", "random_sign"});
    const int count = s->at("count").integer(1, 100000);
    const Node box = s->at("box");
    if (box.size() != static_cast<std::size_t>(base_dim)) box.fail("box needs one [lo, hi] per base coordinate");
    std::vector<std::array<double, 2>> ranges;
    for (std::size_t i = 0; i < box.size(); ++i) {
      const auto r = box[i].pair();
      if (r[0] > r[1]) box[i].fail("box range must satisfy lo <= hi");
      ranges.push_back(r);
    }
    std::vector<int> flip;
    if (auto rs = s->opt("random_sign"))
      for (std::size_t i = 0; i < rs->size(); ++i) flip.push_back((*rs)[i].integer(0, base_dim - 1));
    for (int k = 0; k < count; ++k) {
      Vector p(base_dim);
      for (int i = 0; i < base_dim; ++i) p(i) = rng.uniform(ranges[i][0], ranges[i][1]);
      for (int i : flip) p(i) *= rng.sign();
      g.points.push_back(std::move(p));
    }
  }
  if (g.points.empty()) n.fail("point group needs 'points' or 'sample'");
  return g;
}

RhsTerm parse_term(const Node& n) {
  n.allow({"kind", "coeff", "omega", "phase", "power"});
  RhsTerm t;
  const Node kind = n.at("kind");
  const std::string k = kind.str();
  if (k == "sin") t.kind = RhsTerm::Kind::Sin;
  else if (k == "cos") t.kind = RhsTerm::Kind::Cos;
  else if (k == "power") t.kind = RhsTerm::Kind::Power;
  else kind.fail("unknown term kind '" + k + "' (known: cos, power, sin)");
  t.coeff = value_or(n.opt("coeff"), 1.0, read_number);
  t.omega = value_or(n.opt("omega"), 1.0, read_number);
  t.phase = value_or(n.opt("phase"), 0.0, read_number);
  if (auto p = n.opt("power")) t.power = p->integer(0, 16);
  return t;
}

const AnchoredBundle& need_bundle(const Scenario& s, const Node& root) {
  if (!s.bundle) root.fail("task '" + std::string(to_string(s.task)) + "' needs a bundle");
  return *s.bundle;
}

const TrivializedLift& need_lift(const Scenario& s, const Node& root) {
  if (!s.lift) root.fail("task '" + std::string(to_string(s.task)) + "' needs a lift");
  return *s.lift;
}

TaskParams parse_params(Scenario& s, const Node& root, const Node& p) {
  Rng rng(s.seed);
  switch (s.task) {
    case TaskKind::RankMap: {
      const AnchoredBundle& bundle = need_bundle(s, root);
      p.allow({"depth", "threshold", "groups"});
      RankMapTask t;
      if (auto d = p.opt("depth")) t.depth = d->integer(0, 4);
      t.threshold = value_or(p.opt("threshold"), 1e-8, read_positive);
      const Node groups = p.at("groups");
      for (std::size_t i = 0; i < groups.size(); ++i) t.groups.push_back(parse_point_group(groups[i], bundle.base_dim, rng));
      if (t.groups.empty()) groups.fail("expected at least one point group");
      return t;
    }
    case TaskKind::Orbit: {
      const AnchoredBundle& bundle = need_bundle(s, root);
      p.allow({"x0", "count", "max_time", "watch"});
      OrbitTask t;
      const Node x0 = p.at("x0");
      t.x0 = x0.vector();
      check_base_point(x0, t.x0, bundle);
      t.count = value_or(p.opt("count"), 100, read_count);
      t.max_time = value_or(p.opt("max_time"), 1.0, read_positive);
      if (auto w = p.opt("watch"))
        for (std::size_t i = 0; i < w->size(); ++i) t.watch.push_back((*w)[i].integer(0, bundle.base_dim - 1));
      return t;
    }
    case TaskKind::Transport: {
      const TrivializedLift& lift = need_lift(s, root);
      p.allow({"x0", "loops", "scale", "group_samples", "pairs", "reparameterizations", "checks"});
      TransportTask t;
      const Node x0 = p.at("x0");
      t.x0 = x0.vector();
      check_base_point(x0, t.x0, lift.bundle);
      t.loops = value_or(p.opt("loops"), 50, read_count);
      t.scale = value_or(p.opt("scale"), 0.5, read_positive);
      t.group_samples = value_or(p.opt("group_samples"), 5, read_count);
      t.pairs = value_or(p.opt("pairs"), 30, read_count);
      t.reparameterizations = value_or(p.opt("reparameterizations"), 20, read_count);
      if (t.loops < 2) p.fail("transport needs at least two loops");
      if (auto c = p.opt("checks")) {
        c->allow({"equivariance", "reverse_inverse", "composition", "reparameterization"});
        t.equivariance = value_or(c->opt("equivariance"), true, read_bool);
        t.reverse_inverse = value_or(c->opt("reverse_inverse"), true, read_bool);
        t.composition = value_or(c->opt("composition"), true, read_bool);
        t.reparameterization = value_or(c->opt("reparameterization"), false, read_bool);
        if (t.reparameterization && !lift.rho_connection)
          c->at("reparameterization").fail("reparameterization invariance needs a lift linear in the fibre on a linear bundle");
      }
      if (lift.bundle.base_dim != lift.bundle.fiber_dim)
        p.fail("random loops need an identity anchor; bundle '" + lift.bundle.name + "' has mismatched dimensions");
      return t;
    }
    case TaskKind::Holonomy: {
      const TrivializedLift& lift = need_lift(s, root);
      p.allow({"loops", "area_rule", "conjugation_samples"});
      HolonomyTask t;
      t.loops = parse_loops(p.at("loops"), lift.bundle);
      if (auto a = p.opt("area_rule")) {
        a->allow({"coordinate", "factor"});
        AreaRule r;
        if (auto c = a->opt("coordinate"))
          r.coordinate = c->integer(0, group_spec<double>(lift.group).algebra_dim - 1);
        r.factor = value_or(a->opt("factor"), 1.0, read_number);
        t.area_rule = r;
      }
      t.conjugation_samples = value_or(p.opt("conjugation_samples"), 0, read_count);
      return t;
    }
    case TaskKind::Algebra: {
      const TrivializedLift& lift = need_lift(s, root);
      p.allow({"loops", "depth", "tol", "reference_samples", "lifted_bracket"});
      AlgebraTask t;
      t.loops = parse_loops(p.at("loops"), lift.bundle);
      if (auto d = p.opt("depth")) t.depth = d->integer(0, 16);
      t.tol = value_or(p.opt("tol"), 1e-6, read_positive);
      t.reference_samples = value_or(p.opt("reference_samples"), 3, read_count);
      if (auto lb = p.opt("lifted_bracket")) {
        lb->allow({"x0", "g", "depth"});
        LiftedBracketCheck c;
        const Node x0 = lb->at("x0");
        c.x0 = x0.vector();
        check_base_point(x0, c.x0, lift.bundle);
        c.g = GroupElementd::identity(lift.group);
        if (auto g = lb->opt("g"))
          c.g = exp(AlgebraElementd{lift.group, g->vector(group_spec<double>(lift.group).algebra_dim)});
        if (auto d = lb->opt("depth")) c.depth = d->integer(0, 3);
        t.lifted = c;
      }
      return t;
    }
    case TaskKind::Convergence: {
      p.allow({"group", "components", "interval", "steps", "reference_divisor"});
      ConvergenceTask t;
      t.group = parse_group_name(p.at("group"));
      const int dim = group_spec<double>(t.group).algebra_dim;
      const Node comps = p.at("components");
      if (comps.size() != static_cast<std::size_t>(dim))
        comps.fail("expected one component per algebra basis element (" + std::to_string(dim) + ")");
      for (std::size_t c = 0; c < comps.size(); ++c) {
        std::vector<RhsTerm> terms;
        for (std::size_t k = 0; k < comps[c].size(); ++k) terms.push_back(parse_term(comps[c][k]));
        t.components.push_back(std::move(terms));
      }
      const Node interval = p.at("interval");
      const auto ab = interval.pair();
      if (!(ab[1] > ab[0])) interval.fail("interval must satisfy a < b");
      t.t0 = ab[0];
      t.t1 = ab[1];
      const Node steps = p.at("steps");
      if (steps.size() < 2) steps.fail("expected at least two steps");
      for (std::size_t i = 0; i < steps.size(); ++i) t.steps.push_back(steps[i].positive());
      t.reference_divisor = value_or(p.opt("reference_divisor"), 64, read_int);
      if (t.reference_divisor < 2) p.at("reference_divisor").fail("reference_divisor must be at least 2");
      return t;
    }
  }
  root.fail("unreachable task kind");
}

}  // namespace

double evaluate_rhs_component(const std::vector<RhsTerm>& terms, double t) {
  double total = 0.0;
  for (const auto& term : terms) {
    switch (term.kind) {
      case RhsTerm::Kind::Sin: total += term.coeff * std::sin(term.omega * t + term.phase); break;
      case RhsTerm::Kind::Cos: total += term.coeff * std::cos(term.omega * t + term.phase); break;
      case RhsTerm::Kind::Power: total += term.coeff * std::pow(t, term.power); break;
    }
  }
  return total;
}

Scenario parse_scenario(const std::string& text, const std::string& origin, std::optional<std::uint64_t> seed) {
  Scenario s;
  s.origin = origin;
  try {
    s.raw = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t byte = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
    throw InputError(origin + ":" + std::to_string(line) + ": malformed JSON: " + e.what());
  }
  const Locator loc(text);
  const Node root(s.raw, "", loc, origin);
  if (!s.raw.is_object()) root.fail("scenario must be a JSON object");
  root.allow({"name", "description", "task", "bundle", "lift", "step", "seed", "params", "tolerances"});

  s.name = root.at("name").str();
  if (s.name.empty() || s.name.find_first_of("/\\") != std::string::npos)
    root.at("name").fail("scenario name must be a non-empty file-name-safe string");
  if (auto d = root.opt("description")) s.description = d->str();

  const Node task = root.at("task");
  const std::string t = task.str();
  bool found = false;
  for (TaskKind k : {TaskKind::RankMap, TaskKind::Orbit, TaskKind::Transport, TaskKind::Holonomy, TaskKind::Algebra,
                     TaskKind::Convergence}) {
    if (to_string(k) == t) {
      s.task = k;
      found = true;
    }
  }
  if (!found) task.fail("unknown task '" + t + "' (known: algebra, convergence, holonomy, orbit, rank-map, transport)");

  if (auto b = root.opt("bundle")) s.bundle = parse_bundle(*b);
  if (auto l = root.opt("lift")) {
    if (!s.bundle) l->fail("a lift needs a bundle");
    s.lift = parse_lift(*l, *s.bundle);
  }
  if (auto st = root.opt("step")) s.step = st->positive();
  if (auto sd = root.opt("seed")) {
    if (!sd->raw().is_number_unsigned()) sd->fail("seed must be a non-negative integer");
    s.seed = sd->raw().get<std::uint64_t>();
  }
  if (seed) s.seed = *seed;
  const json empty = json::object();
  const Node params = root.has("params") ? root.at("params") : Node(empty, "/params", loc, origin);
  s.params = parse_params(s, root, params);

  // Tolerance keys are checked against the task's metric names by the runner.
  if (root.has("tolerances")) {
    const Node tol = root.at("tolerances");
    if (!tol.raw().is_object()) tol.fail("tolerances must be an object");
    for (const auto& [key, value] : tol.raw().items()) {
      (void)value;
      s.tolerances[key] = parse_tolerance(tol.at(key));
    }
  }
  return s;
}

std::vector<std::string> list_scenarios() {
  std::vector<std::string> names;
  for (const auto& b : builtin_scenarios()) names.emplace_back(b.name);
  std::sort(names.begin(), names.end());
  return names;
}

Scenario load_scenario(const std::string& file_or_name, std::optional<std::uint64_t> seed) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (fs::is_regular_file(file_or_name, ec)) {
    std::ifstream f(file_or_name, std::ios::binary);
    if (!f) throw InputError(file_or_name + ": cannot open file");
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse_scenario(buf.str(), file_or_name, seed);
  }
  for (const auto& b : builtin_scenarios())
    if (b.name == file_or_name) return parse_scenario(std::string(b.json), "builtin:" + file_or_name + ".json", seed);
  throw InputError(file_or_name + ": no such file or built-in scenario (see 'leafhol list')");
}

}  // namespace leafhol::cli
