#include "mklab/koranyi.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "mklab/heisenberg.hpp"

namespace mklab {

KoranyiFamily koranyi_reimann_family(int count, double shrink_factor) {
  if (count < 1) throw std::invalid_argument("koranyi_reimann_family: count >= 1");
  if (!(shrink_factor > 0.0 && shrink_factor < 1.0)) {
    throw std::invalid_argument("koranyi_reimann_family: shrink_factor in (0,1)");
  }

  KoranyiFamily out;
  out.family.space = HeisenbergSpace{};

  double prev_r = 1.0;
  for (int j = 1; j <= count; ++j) {
    KoranyiEntry e;
    e.j = j;
    e.psi = M_PI - (M_PI / 2.0) / ((j + 1.0) * (j + 1.0));
    e.theta = (M_PI / 2.0) * (j - 1.0) / j;
    // psi_j in (pi/2, pi), so sin(psi_j) > 0 and (z_j, t_j) sits on the unit
    // sphere: |z|^4 + t^2 = sin^2 + cos^2 = 1.
    double mag = std::sqrt(std::sin(e.psi));
    e.z = std::polar(mag, e.theta);
    e.t = std::cos(e.psi);

    auto dilated = [&](double r) {
      return HeisPoint{r * e.z.real(), r * e.z.imag(), r * r * e.t};
    };
    auto escapes_previous = [&](const HeisPoint& p) {
      for (const auto& prev : out.family.balls) {
        if (ball_contains(out.family.space, prev, HeisPoint{p})) return false;
      }
      return true;
    };

    double r = (j == 1) ? 1.0 : prev_r * shrink_factor;
    if (j > 1) {
      int steps = 0;
      while (!escapes_previous(dilated(r))) {
        r *= shrink_factor;
        if (++steps > 200) {
          throw std::runtime_error(
              "koranyi_reimann_family: radius failed to escape previous balls "
              "within 200 shrink steps at j=" + std::to_string(j));
        }
      }
    }
    e.p = dilated(r);
    e.r = heis_norm(e.p);
    prev_r = r;

    out.family.balls.push_back(
        Ball{Point{e.p}, e.r, /*closed=*/true, /*radius_is_center_norm=*/true});
    out.report.entries.push_back(e);
  }

  const int n = count;
  out.report.center_in_ball.assign(n, std::vector<bool>(n, false));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      out.report.center_in_ball[i][j] = ball_contains(
          out.family.space, out.family.balls[j], out.family.balls[i].center);
    }
  }
  return out;
}

std::string KoranyiReport::to_json() const {
  nlohmann::json j;
  j["entries"] = nlohmann::json::array();
  for (const auto& e : entries) {
    j["entries"].push_back({{"j", e.j},
                            {"psi", e.psi},
                            {"theta", e.theta},
                            {"z", {e.z.real(), e.z.imag()}},
                            {"t", e.t},
                            {"p", {e.p.x, e.p.y, e.p.z}},
                            {"r", e.r}});
  }
  j["center_in_ball"] = nlohmann::json::array();
  for (const auto& row : center_in_ball) {
    nlohmann::json jr = nlohmann::json::array();
    for (bool b : row) jr.push_back(b);
    j["center_in_ball"].push_back(jr);
  }
  return j.dump(2);
}

}  // namespace mklab
