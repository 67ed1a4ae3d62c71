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

// AVX2 variants. This translation unit alone is compiled with -mavx2; it is
// only entered after the dispatcher has checked the CPU. Lane order and the
// final combine mirror kernels_scalar.cpp exactly.

#include <immintrin.h>

#include "fairauction/kernels.hpp"

namespace fairauction::simd {
namespace {

constexpr std::size_t kLanes = 4;

double combine(const double (&acc)[kLanes]) { return (acc[0] + acc[1]) + (acc[2] + acc[3]); }

void affine_avx2(std::span<const double> x, double slope, double offset, std::span<double> out) {
  const __m256d vs = _mm256_set1_pd(slope);
  const __m256d vo = _mm256_set1_pd(offset);
  const std::size_t n = x.size();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d v = _mm256_loadu_pd(x.data() + i);
    _mm256_storeu_pd(out.data() + i, _mm256_add_pd(_mm256_mul_pd(vs, v), vo));
  }
  for (; i < n; ++i) out[i] = slope * x[i] + offset;
}

double sum_avx2(std::span<const double> x) {
  __m256d vacc = _mm256_setzero_pd();
  const std::size_t n = x.size();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) vacc = _mm256_add_pd(vacc, _mm256_loadu_pd(x.data() + i));
  double acc[kLanes];
  _mm256_storeu_pd(acc, vacc);
  for (; i < n; ++i) acc[i % kLanes] += x[i];
  return combine(acc);
}

double dot_avx2(std::span<const double> x, std::span<const double> y) {
  __m256d vacc = _mm256_setzero_pd();
  const std::size_t n = x.size();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d p = _mm256_mul_pd(_mm256_loadu_pd(x.data() + i), _mm256_loadu_pd(y.data() + i));
    vacc = _mm256_add_pd(vacc, p);
  }
  double acc[kLanes];
  _mm256_storeu_pd(acc, vacc);
  for (; i < n; ++i) acc[i % kLanes] += x[i] * y[i];
  return combine(acc);
}

double ratio_integral_avx2(std::span<const double> f, std::span<const double> w, double slope,
                           double offset, double rival) {
  const __m256d vslope = _mm256_set1_pd(slope);
  const __m256d voff = _mm256_set1_pd(offset);
  const __m256d vr = _mm256_set1_pd(rival);
  const __m256d zero = _mm256_setzero_pd();
  __m256d vacc = zero;
  const std::size_t n = f.size();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d s = _mm256_add_pd(_mm256_mul_pd(vslope, _mm256_loadu_pd(f.data() + i)), voff);
    const __m256d den = _mm256_add_pd(s, vr);
    const __m256d dead = _mm256_cmp_pd(den, zero, _CMP_EQ_OQ);
    const __m256d term = _mm256_mul_pd(_mm256_loadu_pd(w.data() + i), _mm256_div_pd(s, den));
    vacc = _mm256_add_pd(vacc, _mm256_andnot_pd(dead, term));
  }
  double acc[kLanes];
  _mm256_storeu_pd(acc, vacc);
  for (; i < n; ++i) {
    const double s = slope * f[i] + offset;
    const double den = s + rival;
    if (den != 0.0) acc[i % kLanes] += w[i] * (s / den);
  }
  return combine(acc);
}

RatioMoments ratio_moments_avx2(std::span<const double> f, std::span<const double> w,
                                double slope, double offset, double rival) {
  const __m256d vslope = _mm256_set1_pd(slope);
  const __m256d voff = _mm256_set1_pd(offset);
  const __m256d vr = _mm256_set1_pd(rival);
  const __m256d zero = _mm256_setzero_pd();
  __m256d v = zero, ds = zero, dof = zero, dr = zero;
  const std::size_t n = f.size();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d vf = _mm256_loadu_pd(f.data() + i);
    const __m256d vw = _mm256_loadu_pd(w.data() + i);
    const __m256d s = _mm256_add_pd(_mm256_mul_pd(vslope, vf), voff);
    const __m256d den = _mm256_add_pd(s, vr);
    const __m256d den2 = _mm256_mul_pd(den, den);
    const __m256d dead = _mm256_cmp_pd(den, zero, _CMP_EQ_OQ);
    v = _mm256_add_pd(v, _mm256_andnot_pd(dead, _mm256_mul_pd(vw, _mm256_div_pd(s, den))));
    ds = _mm256_add_pd(
        ds, _mm256_andnot_pd(dead, _mm256_mul_pd(vw, _mm256_div_pd(_mm256_mul_pd(vr, vf), den2))));
    dof = _mm256_add_pd(dof, _mm256_andnot_pd(dead, _mm256_mul_pd(vw, _mm256_div_pd(vr, den2))));
    dr = _mm256_add_pd(dr, _mm256_andnot_pd(dead, _mm256_mul_pd(vw, _mm256_div_pd(s, den2))));
  }
  double av[kLanes], ads[kLanes], adof[kLanes], adr[kLanes];
  _mm256_storeu_pd(av, v);
  _mm256_storeu_pd(ads, ds);
  _mm256_storeu_pd(adof, dof);
  _mm256_storeu_pd(adr, dr);
  for (; i < n; ++i) {
    const double s = slope * f[i] + offset;
    const double den = s + rival;
    if (den == 0.0) continue;
    const double den2 = den * den;
    const std::size_t l = i % kLanes;
    av[l] += w[i] * (s / den);
    ads[l] += w[i] * ((rival * f[i]) / den2);
    adof[l] += w[i] * (rival / den2);
    adr[l] += w[i] * (s / den2);
  }
  return {combine(av), combine(ads), combine(adof), combine(adr)};
}

constexpr KernelTable kAvx2Table{Isa::kAvx2,        "avx2",   affine_avx2,      sum_avx2,
                                 dot_avx2,          ratio_integral_avx2, ratio_moments_avx2};

}  // namespace

namespace detail {
const KernelTable& avx2_table() { return kAvx2Table; }
}  // namespace detail

}  // namespace fairauction::simd
