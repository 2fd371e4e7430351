// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include <immintrin.h>

#include <limits>

#include "a2d/simd/kernels.hpp"

namespace a2d::simd {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double sum = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    _mm256_storeu_pd(y + i + 4,
                     _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4)));
  }
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

double squared_distance_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double sum = hsum(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

void pair_argmax_avx2(const double* a, const double* b, std::size_t n, double* best_score,
                      std::size_t* best_p, std::size_t* best_q) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  const __m256d zero = _mm256_setzero_pd();
  const __m256d neg_inf = _mm256_set1_pd(kNegInf);
  const __m256d lane_offsets = _mm256_set_pd(3.0, 2.0, 1.0, 0.0);

  double best = kNegInf;
  std::size_t bp = n, bq = n;
  for (std::size_t p = 0; p < n; ++p) {
    const __m256d ap = _mm256_set1_pd(a[p]);
    const __m256d bpv = _mm256_set1_pd(b[p]);
    __m256d lane_best = neg_inf;
    __m256d lane_q = _mm256_set1_pd(static_cast<double>(n));
    std::size_t q = p + 1;
    for (; q + 4 <= n; q += 4) {
      const __m256d sa = _mm256_add_pd(ap, _mm256_loadu_pd(a + q));
      const __m256d sb = _mm256_add_pd(bpv, _mm256_loadu_pd(b + q));
      const __m256d ok =
          _mm256_and_pd(_mm256_cmp_pd(sa, zero, _CMP_GT_OQ), _mm256_cmp_pd(sb, zero, _CMP_LT_OQ));
      const __m256d score = _mm256_blendv_pd(neg_inf, _mm256_mul_pd(sa, _mm256_sub_pd(zero, sb)), ok);
      const __m256d better = _mm256_cmp_pd(score, lane_best, _CMP_GT_OQ);
      lane_best = _mm256_blendv_pd(lane_best, score, better);
      const __m256d qv = _mm256_add_pd(_mm256_set1_pd(static_cast<double>(q)), lane_offsets);
      lane_q = _mm256_blendv_pd(lane_q, qv, better);
    }
    alignas(32) double scores[4];
    alignas(32) double qs[4];
    _mm256_store_pd(scores, lane_best);
    _mm256_store_pd(qs, lane_q);
    double row_best = kNegInf;
    std::size_t row_q = n;
    for (int lane = 0; lane < 4; ++lane) {
      const auto lq = static_cast<std::size_t>(qs[lane]);
      if (scores[lane] > row_best || (scores[lane] == row_best && scores[lane] > kNegInf && lq < row_q)) {
        row_best = scores[lane];
        row_q = lq;
      }
    }
    for (; q < n; ++q) {
      const double sa = a[p] + a[q];
      const double sb = b[p] + b[q];
      if (sa > 0.0 && sb < 0.0) {
        const double score = sa * -sb;
        if (score > row_best) {
          row_best = score;
          row_q = q;
        }
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

constexpr KernelTable kAvx2{"avx2", dot_avx2, axpy_avx2, squared_distance_avx2, pair_argmax_avx2};

}  // namespace

const KernelTable* avx2_kernels() {
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &kAvx2 : nullptr;
}

}  // namespace a2d::simd
