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

// Vision-language cross contextualization: a frame embedding A and its turn
// transcript embedding B are convexly combined, z = alpha A + (1 - alpha) B,
// and mapped through the trainable affine adapter C = W z + b.
//
// Everything here is templated on the scalar type. Training and gradient
// checks run at double precision; stored embeddings are float and are cast
// on the way in.

#ifndef STSVLCC_FUSION_HPP_
#define STSVLCC_FUSION_HPP_

#include <cstdint>
#include <random>
#include <string>

#include <Eigen/Core>

#include "stsvlcc/error.hpp"

namespace stsvlcc {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

struct FusionConfig {
  double alpha = 0.5;  // vision weight
  int dim = 512;
};

inline void ValidateFusionConfig(const FusionConfig &config) {
  if (!(config.alpha >= 0.0 && config.alpha <= 1.0))
    throw Error(ErrorCode::kInvalidArgument, "alpha must lie in [0, 1]");
  if (config.dim < 1) throw Error(ErrorCode::kInvalidArgument, "dim must be >= 1");
}

// z = alpha * vision + (1 - alpha) * text. Exact at the alpha endpoints.
template <typename DerivedA, typename DerivedB>
Vector<typename DerivedA::Scalar> Fuse(const Eigen::MatrixBase<DerivedA> &vision,
                                       const Eigen::MatrixBase<DerivedB> &text,
                                       double alpha) {
  using Scalar = typename DerivedA::Scalar;
  if (vision.size() != text.size())
    throw Error(ErrorCode::kDimMismatch,
                "fuse: vision dim " + std::to_string(vision.size()) +
                    " vs text dim " + std::to_string(text.size()));
  if (alpha == 1.0) return vision;
  if (alpha == 0.0) return text.template cast<Scalar>();
  const Scalar a = static_cast<Scalar>(alpha);
  return a * vision + (Scalar(1) - a) * text.template cast<Scalar>();
}

template <typename Scalar>
struct AdapterParams {
  Matrix<Scalar> weight;  // d x d
  Vector<Scalar> bias;    // d

  int dim() const { return static_cast<int>(bias.size()); }

  static AdapterParams Identity(int dim) {
    return {Matrix<Scalar>::Identity(dim, dim), Vector<Scalar>::Zero(dim)};
  }

  // Identity plus N(0, sigma^2) entries, zero bias.
  static AdapterParams NearIdentity(int dim, double sigma, std::uint64_t seed) {
    AdapterParams p = Identity(dim);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, sigma);
    for (int c = 0; c < dim; ++c)
      for (int r = 0; r < dim; ++r) p.weight(r, c) += static_cast<Scalar>(noise(rng));
    return p;
  }

  bool allFinite() const { return weight.allFinite() && bias.allFinite(); }

  template <typename Other>
  AdapterParams<Other> cast() const {
    return {weight.template cast<Other>(), bias.template cast<Other>()};
  }
};

template <typename Scalar>
void ValidateAdapter(const AdapterParams<Scalar> &params) {
  if (params.weight.rows() != params.bias.size() ||
      params.weight.cols() != params.bias.size())
    throw Error(ErrorCode::kDimMismatch, "adapter weight/bias shape mismatch");
  if (!params.allFinite())
    throw Error(ErrorCode::kInvalidArgument, "adapter has non-finite entries");
}

// W z + b. Accepts a single vector or a d x n block of column vectors.
template <typename Scalar, typename Derived>
Matrix<Scalar> AdapterApply(const AdapterParams<Scalar> &params,
                            const Eigen::MatrixBase<Derived> &z) {
  if (z.rows() != params.weight.cols())
    throw Error(ErrorCode::kDimMismatch,
                "adapter expects dim " + std::to_string(params.weight.cols()) +
                    ", got " + std::to_string(z.rows()));
  return (params.weight * z.template cast<Scalar>()).colwise() + params.bias;
}

template <typename Scalar>
struct AdapterGradients {
  Matrix<Scalar> weight;
  Vector<Scalar> bias;
};

// Gradients of a scalar loss w.r.t. (W, b) given adapter inputs `inputs`
// (d x n, one column per sample) and upstream dL/dC `upstream` (d x n),
// averaged over the n samples.
template <typename Scalar, typename DerivedZ, typename DerivedG>
AdapterGradients<Scalar> AdapterGradient(const AdapterParams<Scalar> &params,
                                         const Eigen::MatrixBase<DerivedZ> &inputs,
                                         const Eigen::MatrixBase<DerivedG> &upstream) {
  const auto d = params.weight.cols();
  if (inputs.rows() != d || upstream.rows() != params.weight.rows() ||
      inputs.cols() != upstream.cols())
    throw Error(ErrorCode::kDimMismatch, "adapter gradient batch shape mismatch");
  const auto n = inputs.cols();
  if (n == 0) {
    return {Matrix<Scalar>::Zero(params.weight.rows(), d),
            Vector<Scalar>::Zero(params.weight.rows())};
  }
  const Scalar inv_n = Scalar(1) / static_cast<Scalar>(n);
  return {(upstream * inputs.transpose()) * inv_n,
          upstream.rowwise().sum() * inv_n};
}

}  // namespace stsvlcc

#endif  // STSVLCC_FUSION_HPP_
