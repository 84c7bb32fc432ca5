#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "leafhol/holonomy.hpp"

namespace leafhol::cli {

/// Malformed or inconsistent scenario input; the message carries the line.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A bare number in the scenario is an upper bound.
struct Tolerance {
  std::optional<double> min, max, equals;
  int line = 0;
};

enum class TaskKind { RankMap, Orbit, Transport, Holonomy, Algebra, Convergence };

std::string_view to_string(TaskKind kind);

struct PointGroup {
  std::string label;
  std::vector<Vector> points;
  int expect_rank = 0;
};

struct RankMapTask {
  int depth = 2;
  double threshold = 1e-8;
  std::vector<PointGroup> groups;
};

struct OrbitTask {
  Vector x0;
  int count = 100;
  double max_time = 1.0;
  std::vector<int> watch;  // coordinates whose max |value| is reported
};

struct TransportTask {
  Vector x0;
  int loops = 50;
  double scale = 0.5;
  int group_samples = 5;
  int pairs = 30;
  int reparameterizations = 20;
  bool equivariance = true;
  bool reverse_inverse = true;
  bool composition = true;
  bool reparameterization = false;
};

struct AreaRule {
  int coordinate = 0;
  double factor = 1.0;
};

struct HolonomyTask {
  LoopFamily loops;
  std::optional<AreaRule> area_rule;
  int conjugation_samples = 0;
};

struct LiftedBracketCheck {
  Vector x0;
  GroupElementd g;
  int depth = 1;
};

struct AlgebraTask {
  LoopFamily loops;
  int depth = 3;
  double tol = 1e-6;
  int reference_samples = 3;
  std::optional<LiftedBracketCheck> lifted;
};

/// One term of a component of Y(t): coeff sin(omega t + phase),
/// coeff cos(omega t + phase) or coeff t^power.
struct RhsTerm {
  enum class Kind { Sin, Cos, Power } kind = Kind::Power;
  double coeff = 1.0, omega = 1.0, phase = 0.0;
  int power = 0;
};

struct ConvergenceTask {
  GroupKind group = GroupKind::SO3;
  std::vector<std::vector<RhsTerm>> components;
  double t0 = 0.0, t1 = 1.0;
  std::vector<double> steps;
  int reference_divisor = 64;
};

using TaskParams = std::variant<RankMapTask, OrbitTask, TransportTask, HolonomyTask, AlgebraTask, ConvergenceTask>;

struct Scenario {
  std::string name;
  std::string description;
  std::string origin;  // file path or built-in name, for diagnostics
  TaskKind task = TaskKind::RankMap;
  std::optional<AnchoredBundle> bundle;
  std::optional<TrivializedLift> lift;
  double step = 1e-3;
  std::uint64_t seed = 0;
  TaskParams params;
  std::map<std::string, Tolerance> tolerances;
  nlohmann::json raw;
};

/// Parses and validates a scenario document; throws InputError.
/// `seed` overrides the scenario seed, including for point sampling.
Scenario parse_scenario(const std::string& text, const std::string& origin,
                        std::optional<std::uint64_t> seed = std::nullopt);

/// A path to a JSON file, or the name of a built-in scenario.
Scenario load_scenario(const std::string& file_or_name, std::optional<std::uint64_t> seed = std::nullopt);

std::vector<std::string> list_scenarios();

double evaluate_rhs_component(const std::vector<RhsTerm>& terms, double t);

}  // namespace leafhol::cli
