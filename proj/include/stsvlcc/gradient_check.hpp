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

#ifndef STSVLCC_GRADIENT_CHECK_HPP_
#define STSVLCC_GRADIENT_CHECK_HPP_

#include <cstdint>
#include <functional>

#include <Eigen/Core>

namespace stsvlcc {

// Loss over a flat parameter vector. When `grad` is non-null the callee
// writes the analytic gradient into it (same size as params).
using DifferentiableLoss =
    std::function<double(const Eigen::VectorXd &params, Eigen::VectorXd *grad)>;

struct GradientCheckOptions {
  double step = 1e-5;
  // 0 checks every coordinate; otherwise a fixed pseudorandom subset.
  std::size_t max_coordinates = 0;
  std::uint64_t seed = 0;
  // Denominator floor for the relative error, guarding near-zero entries.
  double scale_floor = 1e-6;
};

struct GradientCheckReport {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  std::size_t coordinates_checked = 0;
  bool pass = false;
};

/// Central finite differences against the analytic gradient:
/// rel = |g_a - g_fd| / max(|g_a|, |g_fd|, scale_floor); pass iff the
/// maximum is below `tolerance`. Throws kNonFiniteLoss.
GradientCheckReport GradientCheck(const DifferentiableLoss &loss,
                                  const Eigen::VectorXd &params,
                                  double tolerance,
                                  const GradientCheckOptions &options = {});

}  // namespace stsvlcc

#endif  // STSVLCC_GRADIENT_CHECK_HPP_
