#include "a2d/simd/kernels.hpp"

#include <limits>

namespace a2d::simd {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double squared_distance_scalar(const double* a, const double* b, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

void pair_argmax_scalar(const double* a, const double* b, std::size_t n, double* best_score,
                        std::size_t* best_p, std::size_t* best_q) {
  double best = -std::numeric_limits<double>::infinity();
  std::size_t bp = n, bq = n;
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = p + 1; q < n; ++q) {
      const double sa = a[p] + a[q];
      const double sb = b[p] + b[q];
      if (sa > 0.0 && sb < 0.0) {
        const double score = sa * -sb;
        if (score > best) {
          best = score;
          bp = p;
          bq = q;
        }
      }
    }
  }
  *best_score = best;
  *best_p = bp;
  *best_q = bq;
}

constexpr KernelTable kScalar{"scalar", dot_scalar, axpy_scalar, squared_distance_scalar,
                              pair_argmax_scalar};

}  // namespace

const KernelTable& scalar_kernels() { return kScalar; }

}  // namespace a2d::simd
