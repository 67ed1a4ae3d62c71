// Copyright 2026 The FairAuction Authors.
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

#include "fairauction/kernels.hpp"

namespace fairauction::simd {
namespace {

constexpr std::size_t kLanes = 4;

double combine(const double (&acc)[kLanes]) { return (acc[0] + acc[1]) + (acc[2] + acc[3]); }

void affine_scalar(std::span<const double> x, double slope, double offset, std::span<double> out) {
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = slope * x[i] + offset;
}

double sum_scalar(std::span<const double> x) {
  double acc[kLanes] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < x.size(); ++i) acc[i % kLanes] += x[i];
  return combine(acc);
}

double dot_scalar(std::span<const double> x, std::span<const double> y) {
  double acc[kLanes] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < x.size(); ++i) acc[i % kLanes] += x[i] * y[i];
  return combine(acc);
}

double ratio_integral_scalar(std::span<const double> f, std::span<const double> w, double slope,
                             double offset, double rival) {
  double acc[kLanes] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double s = slope * f[i] + offset;
    const double den = s + rival;
    if (den != 0.0) acc[i % kLanes] += w[i] * (s / den);
  }
  return combine(acc);
}

RatioMoments ratio_moments_scalar(std::span<const double> f, std::span<const double> w,
                                  double slope, double offset, double rival) {
  double v[kLanes] = {0.0, 0.0, 0.0, 0.0};
  double ds[kLanes] = {0.0, 0.0, 0.0, 0.0};
  double dof[kLanes] = {0.0, 0.0, 0.0, 0.0};
  double dr[kLanes] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double s = slope * f[i] + offset;
    const double den = s + rival;
    if (den == 0.0) continue;
    const double den2 = den * den;
    const std::size_t l = i % kLanes;
    v[l] += w[i] * (s / den);
    ds[l] += w[i] * ((rival * f[i]) / den2);
    dof[l] += w[i] * (rival / den2);
    dr[l] += w[i] * (s / den2);
  }
  return {combine(v), combine(ds), combine(dof), combine(dr)};
}

constexpr KernelTable kScalarTable{Isa::kScalar,         "scalar",
                                   affine_scalar,        sum_scalar,
                                   dot_scalar,           ratio_integral_scalar,
                                   ratio_moments_scalar};

}  // namespace

const KernelTable& scalar_kernels() { return kScalarTable; }

}  // namespace fairauction::simd
