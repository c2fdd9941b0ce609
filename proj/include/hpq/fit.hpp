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

// Ordinary least squares for ln DFI_min(n) = k n + b.

#pragma once

#include <filesystem>
#include <span>
#include <utility>

#include <nlohmann/json.hpp>

namespace hpq {

struct LogLinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::pair<double, double> ci95_slope;
  double p_value_slope = 0.0;
  double residual_rms = 0.0;
  int points = 0;
};

struct FitPoint {
  double n = 0.0;
  double dfi_min = 0.0;
};

/// Fits (n, ln dfi_min). Needs three or more points with at least two
/// distinct n and every dfi_min > 0. The slope interval uses the Student t
/// quantile with points - 2 degrees of freedom.
LogLinearFit loglinear_fit(std::span<const FitPoint> points);

nlohmann::json fit_to_json(const LogLinearFit& fit);
void write_fit_json(const LogLinearFit& fit, const std::filesystem::path& path);

}  // namespace hpq
