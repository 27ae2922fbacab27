#include "mklab/model_config.hpp"

#include <algorithm>
#include <stdexcept>

namespace mklab {

namespace {

using nlohmann::json;

std::array<double, 2> pair_of(const json& j) {
  if (!j.is_array() || j.size() != 2) throw std::invalid_argument("expected [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

ModelPtr model_from_json(const nlohmann::json& j) {
  if (!j.contains("kind")) throw std::invalid_argument("model config: missing kind");
  const std::string kind = j.at("kind").get<std::string>();
  const int mc = j.value("mc_samples", 100000);
  const std::uint64_t oracle_seed = j.value("oracle_seed", 9001ULL);

  if (kind == "uniform_cube") {
    return std::make_shared<UniformCubeModel>(j.value("dim", 1), mc, oracle_seed);
  }
  if (kind == "cantor") {
    return std::make_shared<CantorUniformModel>(j.value("depth", 64));
  }
  if (kind == "nested") {
    return std::make_shared<NestedBallModel>(NestedBallSpace{j.value("ratio", 0.5)});
  }
  if (kind == "gaussian_mixture") {
    return std::make_shared<GaussianMixture2DModel>(
        pair_of(j.value("mean0", json{-1.0, 0.0})),
        pair_of(j.value("mean1", json{1.0, 0.0})), j.value("sigma", 1.0),
        j.value("weight1", 0.5), mc, oracle_seed);
  }
  if (kind == "dirac") {
    std::vector<double> coords = j.value("point", std::vector<double>{0.0});
    return make_dirac_model(EuclideanPoint{std::move(coords)});
  }
  if (kind == "discrete") {
    const std::string space_kind = j.value("space", "euclidean");
    Space sp;
    if (space_kind == "euclidean") {
      sp = EuclideanSpace{j.value("dim", 1)};
    } else if (space_kind == "nested_ball") {
      sp = NestedBallSpace{j.value("ratio", 0.5)};
    } else {
      throw std::invalid_argument("discrete model: unsupported space " + space_kind);
    }
    std::vector<Atom> atoms;
    for (const auto& aj : j.at("atoms")) {
      Atom a;
      if (space_kind == "euclidean") {
        a.point = EuclideanPoint{aj.at("point").get<std::vector<double>>()};
      } else {
        a.point = NestedPoint{aj.at("point").get<std::int64_t>()};
      }
      a.mass = aj.at("mass").get<double>();
      atoms.push_back(std::move(a));
    }
    return std::make_shared<FiniteDiscreteModel>(sp, std::move(atoms));
  }
  if (kind == "heisenberg_cube") {
    return std::make_shared<HeisenbergCubeModel>(j.value("half_side", 1.0), mc,
                                                 oracle_seed);
  }
  throw std::invalid_argument("model config: unknown kind " + kind);
}

std::function<double(const Point&)> eta_from_json(const nlohmann::json& j,
                                                  const ModelPtr& model) {
  const std::string name = j.value("name", "const");
  if (name == "const") {
    double v = j.value("value", 0.5);
    if (v < 0.0 || v > 1.0) throw std::invalid_argument("eta const: value in [0,1]");
    return [v](const Point&) { return v; };
  }
  if (name == "coordinate") {
    return [](const Point& p) {
      const auto& c = std::get<EuclideanPoint>(p).coords;
      return std::clamp(c.at(0), 0.0, 1.0);
    };
  }
  if (name == "mixture_posterior") {
    auto mix = std::dynamic_pointer_cast<const GaussianMixture2DModel>(model);
    if (!mix) {
      throw std::invalid_argument("eta mixture_posterior requires a mixture model");
    }
    return [mix](const Point& p) { return mix->posterior1(p); };
  }
  if (name == "nested_parity") {
    return [](const Point& p) {
      return std::get<NestedPoint>(p).index % 2 == 0 ? 1.0 : 0.0;
    };
  }
  if (name == "halfplane") {
    int axis = j.value("axis", 0);
    double threshold = j.value("threshold", 0.0);
    return [axis, threshold](const Point& p) {
      const auto& c = std::get<EuclideanPoint>(p).coords;
      return c.at(axis) >= threshold ? 1.0 : 0.0;
    };
  }
  throw std::invalid_argument("eta config: unknown name " + name);
}

LearningProblem problem_from_json(const nlohmann::json& j) {
  LearningProblem problem;
  problem.model = model_from_json(j.at("model"));
  nlohmann::json ej = j.value("eta", nlohmann::json{{"name", "const"}, {"value", 0.5}});
  problem.eta = eta_from_json(ej, problem.model);
  problem.eta_name = ej.value("name", "const");
  return problem;
}

}  // namespace mklab
