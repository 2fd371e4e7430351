// aarch64 only. Advanced SIMD is mandatory on this architecture, so no
// runtime probe is needed.
#include <arm_neon.h>

#include <limits>

#include "a2d/simd/kernels.hpp"

namespace a2d::simd {
namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double sum = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

double squared_distance_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
    acc = vfmaq_f64(acc, d, d);
  }
  double sum = vaddvq_f64(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

// Two lanes per step; same first-maximum rule as the scalar reference.
void pair_argmax_neon(const double* a, const double* b, std::size_t n, double* best_score,
                      std::size_t* best_p, std::size_t* best_q) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  double best = kNegInf;
  std::size_t bp = n, bq = n;
  const float64x2_t zero = vdupq_n_f64(0.0);
  const float64x2_t neg_inf = vdupq_n_f64(kNegInf);
  for (std::size_t p = 0; p < n; ++p) {
    const float64x2_t ap = vdupq_n_f64(a[p]);
    const float64x2_t bpv = vdupq_n_f64(b[p]);
    double row_best = kNegInf;
    std::size_t row_q = n;
    std::size_t q = p + 1;
    for (; q + 2 <= n; q += 2) {
      const float64x2_t sa = vaddq_f64(ap, vld1q_f64(a + q));
      const float64x2_t sb = vaddq_f64(bpv, vld1q_f64(b + q));
      const uint64x2_t ok = vandq_u64(vcgtq_f64(sa, zero), vcltq_f64(sb, zero));
      const float64x2_t score = vbslq_f64(ok, vmulq_f64(sa, vsubq_f64(zero, sb)), neg_inf);
      const double s0 = vgetq_lane_f64(score, 0);
      const double s1 = vgetq_lane_f64(score, 1);
      if (s0 > row_best) {
        row_best = s0;
        row_q = q;
      }
      if (s1 > row_best) {
        row_best = s1;
        row_q = q + 1;
      }
    }
    for (; q < n; ++q) {
      const double sa = a[p] + a[q];
      const double sb = b[p] + b[q];
      if (sa > 0.0 && sb < 0.0 && sa * -sb > row_best) {
        row_best = sa * -sb;
        row_q = q;
      }
    }
    if (row_best > best) {
      best = row_best;
      bp = p;
      bq = row_q;
    }
  }
  *best_score = best;
  *best_p = bp;
  *best_q = bq;
}

constexpr KernelTable kNeon{"neon", dot_neon, axpy_neon, squared_distance_neon, pair_argmax_neon};

}  // namespace

const KernelTable* neon_kernels() { return &kNeon; }

}  // namespace a2d::simd
