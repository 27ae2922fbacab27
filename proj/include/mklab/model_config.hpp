#pragma once

#include <nlohmann/json.hpp>

#include "mklab/model.hpp"

namespace mklab {

// Builds a model from a JSON description.  Recognized kinds:
//   {"kind": "uniform_cube", "dim": 1}
//   {"kind": "cantor", "depth": 64}
//   {"kind": "nested", "ratio": 0.5}
//   {"kind": "gaussian_mixture", "mean0": [x,y], "mean1": [x,y],
//    "sigma": s, "weight1": w}
//   {"kind": "dirac", "point": [..]}            (euclidean point)
//   {"kind": "discrete", "space": "euclidean", "dim": d,
//    "atoms": [{"point": [..], "mass": m}, ...]}
//   {"kind": "heisenberg_cube", "half_side": a}
// Optional: "mc_samples", "oracle_seed".
ModelPtr model_from_json(const nlohmann::json& j);

// Regression functions by name:
//   {"name": "const", "value": p}
//   {"name": "coordinate"}            eta(x) = clamp(x[0], 0, 1)
//   {"name": "mixture_posterior"}     posterior of component 1 (mixture model)
//   {"name": "nested_parity"}         1 on even indices
//   {"name": "halfplane", "axis": 0, "threshold": c}  1 when x[axis] >= c
std::function<double(const Point&)> eta_from_json(const nlohmann::json& j,
                                                  const ModelPtr& model);

LearningProblem problem_from_json(const nlohmann::json& j);

}  // namespace mklab
