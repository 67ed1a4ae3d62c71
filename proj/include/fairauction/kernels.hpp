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

// Data-parallel inner loops: score evaluation, reductions and the weighted
// quadrature sums behind lottery payments.
//
// Every kernel has a scalar reference and, on x86-64, an AVX2 variant picked
// at runtime. Reductions use four interleaved accumulators combined as
// (l0 + l1) + (l2 + l3) in both variants, and neither variant fuses
// multiply-adds, so the two produce bit-identical results.

#ifndef FAIRAUCTION_KERNELS_HPP_
#define FAIRAUCTION_KERNELS_HPP_

#include <cstddef>
#include <span>

namespace fairauction::simd {

enum class Isa { kScalar, kAvx2 };

// Quadrature sums of the lottery integrand g(x) = s(x) / (s(x) + R) with
// s(x) = slope * f(x) + offset, over nodes f_j with weights w_j:
//   value    = sum w * g
//   d_slope  = sum w * R f / (s+R)^2     (dg/d slope)
//   d_offset = sum w * R / (s+R)^2       (dg/d offset)
//   d_rival  = sum w * s / (s+R)^2       (-dg/dR)
// Nodes where s + R == 0 contribute nothing.
struct RatioMoments {
  double value = 0.0;
  double d_slope = 0.0;
  double d_offset = 0.0;
  double d_rival = 0.0;
};

struct KernelTable {
  Isa isa;
  const char* name;
  // out[i] = slope * x[i] + offset
  void (*affine)(std::span<const double> x, double slope, double offset, std::span<double> out);
  double (*sum)(std::span<const double> x);
  double (*dot)(std::span<const double> x, std::span<const double> y);
  double (*ratio_integral)(std::span<const double> f, std::span<const double> w, double slope,
                           double offset, double rival);
  RatioMoments (*ratio_moments)(std::span<const double> f, std::span<const double> w,
                                double slope, double offset, double rival);
};

const KernelTable& scalar_kernels();
// nullptr when the build has no AVX2 variant or the CPU lacks AVX2.
const KernelTable* avx2_kernels();

// Best table for this CPU. FAIRAUCTION_SIMD=scalar in the environment forces
// the scalar reference. Chosen once per process.
const KernelTable& active_kernels();

}  // namespace fairauction::simd

#endif  // FAIRAUCTION_KERNELS_HPP_
