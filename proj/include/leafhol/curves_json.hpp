#pragma once

// JSON form of piecewise controls:
//   {"segments": [{"t0": 0, "t1": 1, "sign": 1, "kind": "constant", "params": [1, 0]}, ...]}
// kind "polynomial": params = [c0, c1, ...], each a fibre vector, u = sum c_k (t - t0)^k
// kind "sine": params = {"offset": [...], "amplitude": [...], "omega": w, "phase": p},
//              u = offset + amplitude sin(w (t - t0) + p)

#include "json.hpp"
#include "leafhol/curves.hpp"

namespace leafhol {

/// Throws std::invalid_argument for segments with a Custom control.
nlohmann::json control_to_json(const PiecewiseControl& control);

/// Throws std::invalid_argument on schema errors.
PiecewiseControl control_from_json(const nlohmann::json& j);

}  // namespace leafhol
