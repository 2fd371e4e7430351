#pragma once

// Dense double-precision inner loops used by the network, the attacks and the
// K-NN search. Every kernel has a scalar reference implementation; AVX2+FMA
// (x86-64) and NEON (aarch64) variants are picked once at runtime.
//
// Set A2D_SIMD=scalar in the environment to force the reference path.

#include <cstddef>
#include <span>
#include <string_view>

namespace a2d::simd {

using DotFn = double (*)(const double* a, const double* b, std::size_t n);
using AxpyFn = void (*)(double alpha, const double* x, double* y, std::size_t n);
using SqDistFn = double (*)(const double* a, const double* b, std::size_t n);
using PairArgmaxFn = void (*)(const double* a, const double* b, std::size_t n, double* best_score,
                              std::size_t* best_p, std::size_t* best_q);

struct KernelTable {
  std::string_view name;
  DotFn dot;
  AxpyFn axpy;
  SqDistFn squared_distance;
  // Saliency pair search: maximise (a_p + a_q) * |b_p + b_q| over p < q with
  // a_p + a_q > 0 and b_p + b_q < 0. First maximum in (p, q) order wins.
  PairArgmaxFn pair_argmax;
};

const KernelTable& scalar_kernels();
// nullptr when the variant was not compiled in or the CPU lacks it.
const KernelTable* avx2_kernels();
const KernelTable* neon_kernels();

// The table chosen for this process.
const KernelTable& active();

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  return active().squared_distance(a.data(), b.data(), a.size());
}

}  // namespace a2d::simd
