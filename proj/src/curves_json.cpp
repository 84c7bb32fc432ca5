#include "leafhol/curves_json.hpp"

#include <stdexcept>
#include <string>

namespace leafhol {

namespace {

using nlohmann::json;

json vector_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Vector vector_from(const json& j, const std::string& what) {
  if (!j.is_array()) throw std::invalid_argument(what + " must be an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw std::invalid_argument(what + " must be an array of numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

double number_from(const json& j, const char* key, const std::string& what) {
  if (!j.contains(key) || !j.at(key).is_number()) throw std::invalid_argument(what + "." + key + " must be a number");
  return j.at(key).get<double>();
}

}  // namespace

json control_to_json(const PiecewiseControl& control) {
  json segments = json::array();
  for (const auto& seg : control.segments) {
    json s{{"t0", seg.t0}, {"t1", seg.t1}, {"sign", seg.sign}};
    const Control& c = seg.control;
    switch (c.kind) {
      case ControlKind::Constant:
        s["kind"] = "constant";
        s["params"] = vector_json(c.value);
        break;
      case ControlKind::Polynomial: {
        s["kind"] = "polynomial";
        json coeffs = json::array();
        for (const auto& k : c.coefficients) coeffs.push_back(vector_json(k));
        s["params"] = coeffs;
        break;
      }
      case ControlKind::Sine:
        s["kind"] = "sine";
        s["params"] = {{"offset", vector_json(c.offset)},
                       {"amplitude", vector_json(c.amplitude)},
                       {"omega", c.omega},
                       {"phase", c.phase}};
        break;
      case ControlKind::Custom:
        throw std::invalid_argument("custom controls have no JSON form");
    }
    segments.push_back(std::move(s));
  }
  return json{{"segments", segments}};
}

PiecewiseControl control_from_json(const json& j) {
  if (!j.is_object() || !j.contains("segments") || !j.at("segments").is_array())
    throw std::invalid_argument("control must be an object with a 'segments' array");
  PiecewiseControl out;
  const auto& segs = j.at("segments");
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const json& s = segs[i];
    const std::string where = "segments[" + std::to_string(i) + "]";
    if (!s.is_object()) throw std::invalid_argument(where + " must be an object");
    ControlSegment seg;
    seg.t0 = number_from(s, "t0", where);
    seg.t1 = number_from(s, "t1", where);
    seg.sign = s.contains("sign") ? static_cast<int>(number_from(s, "sign", where)) : 1;
    if (!s.contains("kind") || !s.at("kind").is_string()) throw std::invalid_argument(where + ".kind must be a string");
    if (!s.contains("params")) throw std::invalid_argument(where + ".params is required");
    const std::string kind = s.at("kind").get<std::string>();
    const json& p = s.at("params");
    if (kind == "constant") {
      seg.control = Control::constant(vector_from(p, where + ".params"));
    } else if (kind == "polynomial") {
      if (!p.is_array() || p.empty()) throw std::invalid_argument(where + ".params must be a non-empty array");
      std::vector<Vector> coeffs;
      for (std::size_t k = 0; k < p.size(); ++k)
        coeffs.push_back(vector_from(p[k], where + ".params[" + std::to_string(k) + "]"));
      seg.control = Control::polynomial(std::move(coeffs));
    } else if (kind == "sine") {
      if (!p.is_object()) throw std::invalid_argument(where + ".params must be an object");
      if (!p.contains("offset") || !p.contains("amplitude"))
        throw std::invalid_argument(where + ".params needs offset and amplitude");
      seg.control = Control::sine(vector_from(p.at("offset"), where + ".params.offset"),
                                  vector_from(p.at("amplitude"), where + ".params.amplitude"),
                                  number_from(p, "omega", where + ".params"),
                                  p.contains("phase") ? number_from(p, "phase", where + ".params") : 0.0);
    } else {
      throw std::invalid_argument(where + ".kind '" + kind + "' is not one of constant, polynomial, sine");
    }
    out.segments.push_back(std::move(seg));
  }
  validate(out);
  return out;
}

}  // namespace leafhol
