// Copyright 2026 The hpq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hpq/fit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <boost/math/distributions/students_t.hpp>

#include "hpq/error.hpp"

namespace hpq {

LogLinearFit loglinear_fit(std::span<const FitPoint> points) {
  const std::size_t count = points.size();
  if (count < 3) throw ParameterError("log-linear fit needs at least 3 points");
  double mx = 0.0, my = 0.0;
  std::vector<double> ys(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (!(points[i].dfi_min > 0.0) || !std::isfinite(points[i].dfi_min)) {
      throw ParameterError("log-linear fit needs finite dfi_min > 0");
    }
    ys[i] = std::log(points[i].dfi_min);
    mx += points[i].n;
    my += ys[i];
  }
  mx /= count;
  my /= count;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double dx = points[i].n - mx, dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx <= 0.0) throw ParameterError("log-linear fit needs at least two distinct n (rank-deficient design)");

  LogLinearFit fit;
  fit.points = static_cast<int>(count);
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double e = ys[i] - (fit.intercept + fit.slope * points[i].n);
    sse += e * e;
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 1.0;
  fit.residual_rms = std::sqrt(sse / count);

  const double dof = static_cast<double>(count - 2);
  const double se = std::sqrt(sse / dof / sxx);
  boost::math::students_t dist(dof);
  const double q = boost::math::quantile(boost::math::complement(dist, 0.025));
  fit.ci95_slope = {fit.slope - q * se, fit.slope + q * se};
  if (se > 0.0) {
    fit.p_value_slope = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(fit.slope) / se));
  } else {
    fit.p_value_slope = fit.slope != 0.0 ? 0.0 : 1.0;
  }
  return fit;
}

nlohmann::json fit_to_json(const LogLinearFit& fit) {
  return {{"slope", fit.slope},
          {"intercept", fit.intercept},
          {"r_squared", fit.r_squared},
          {"ci95_slope", {fit.ci95_slope.first, fit.ci95_slope.second}},
          {"p_value_slope", fit.p_value_slope},
          {"residual_rms", fit.residual_rms},
          {"points", fit.points}};
}

void write_fit_json(const LogLinearFit& fit, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << fit_to_json(fit).dump(2) << '\n';
}

}  // namespace hpq
