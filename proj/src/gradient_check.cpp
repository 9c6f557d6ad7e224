// Copyright (c) 2026 The stsvlcc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "stsvlcc/gradient_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "stsvlcc/error.hpp"

namespace stsvlcc {

GradientCheckReport GradientCheck(const DifferentiableLoss &loss,
                                  const Eigen::VectorXd &params,
                                  double tolerance,
                                  const GradientCheckOptions &options) {
  const auto n = static_cast<std::size_t>(params.size());
  Eigen::VectorXd analytic = Eigen::VectorXd::Zero(params.size());
  double base = loss(params, &analytic);
  if (!std::isfinite(base))
    throw Error(ErrorCode::kNonFiniteLoss, "loss is not finite at params");
  if (static_cast<std::size_t>(analytic.size()) != n)
    throw Error(ErrorCode::kDimMismatch, "analytic gradient has wrong size");

  std::vector<std::size_t> coords(n);
  std::iota(coords.begin(), coords.end(), 0);
  if (options.max_coordinates != 0 && options.max_coordinates < n) {
    std::mt19937_64 rng(options.seed);
    std::shuffle(coords.begin(), coords.end(), rng);
    coords.resize(options.max_coordinates);
    std::sort(coords.begin(), coords.end());
  }

  GradientCheckReport report;
  Eigen::VectorXd probe = params;
  for (std::size_t i : coords) {
    const double original = probe[i];
    probe[i] = original + options.step;
    const double plus = loss(probe, nullptr);
    probe[i] = original - options.step;
    const double minus = loss(probe, nullptr);
    probe[i] = original;
    if (!std::isfinite(plus) || !std::isfinite(minus))
      throw Error(ErrorCode::kNonFiniteLoss,
                  "loss not finite at perturbed coordinate " + std::to_string(i));
    const double numeric = (plus - minus) / (2.0 * options.step);
    const double denom = std::max(
        {std::abs(analytic[i]), std::abs(numeric), options.scale_floor});
    const double rel = std::abs(analytic[i] - numeric) / denom;
    if (report.coordinates_checked == 0 || rel > report.max_rel_error) {
      report.max_rel_error = rel;
      report.worst_index = i;
    }
    ++report.coordinates_checked;
  }
  report.pass = report.max_rel_error < tolerance;
  return report;
}

}  // namespace stsvlcc
