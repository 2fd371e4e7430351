#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "a2d/simd/kernels.hpp"

using namespace a2d::simd;

namespace {

std::vector<const KernelTable*> variants() {
  std::vector<const KernelTable*> v{&scalar_kernels()};
  if (const KernelTable* t = avx2_kernels()) v.push_back(t);
  if (const KernelTable* t = neon_kernels()) v.push_back(t);
  return v;
}

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST_SUITE("simd") {

TEST_CASE("active table is one of the compiled variants") {
  bool found = false;
  for (const KernelTable* t : variants()) found = found || t == &active();
  CHECK(found);
}

TEST_CASE("dot, axpy and squared distance agree with the scalar reference") {
  std::mt19937_64 rng(3);
  const KernelTable& ref = scalar_kernels();
  for (const KernelTable* t : variants()) {
    CAPTURE(t->name);
    for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 15u, 16u, 17u, 33u, 784u}) {
      CAPTURE(n);
      const auto a = random_vec(rng, n);
      const auto b = random_vec(rng, n);
      const double tol = 1e-12 * (1.0 + static_cast<double>(n));
      CHECK(t->dot(a.data(), b.data(), n) == doctest::Approx(ref.dot(a.data(), b.data(), n)).epsilon(tol));
      CHECK(t->squared_distance(a.data(), b.data(), n) ==
            doctest::Approx(ref.squared_distance(a.data(), b.data(), n)).epsilon(tol));
      auto y1 = b, y2 = b;
      t->axpy(0.37, a.data(), y1.data(), n);
      ref.axpy(0.37, a.data(), y2.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-15));
    }
  }
}

TEST_CASE("scalar dot matches a hand sum") {
  const std::vector<double> a{1, 2, 3}, b{4, -5, 6};
  CHECK(scalar_kernels().dot(a.data(), b.data(), 3) == 12.0);
  CHECK(scalar_kernels().squared_distance(a.data(), b.data(), 3) == 9.0 + 49.0 + 9.0);
}

TEST_CASE("pair argmax is identical across variants and matches brute force") {
  std::mt19937_64 rng(9);
  for (const KernelTable* t : variants()) {
    CAPTURE(t->name);
    for (std::size_t n : {2u, 3u, 5u, 8u, 9u, 31u, 100u}) {
      for (int rep = 0; rep < 20; ++rep) {
        const auto a = random_vec(rng, n);
        const auto b = random_vec(rng, n);
        double best = -1.0;
        std::size_t bp = n, bq = n;
        for (std::size_t p = 0; p < n; ++p) {
          for (std::size_t q = p + 1; q < n; ++q) {
            const double sa = a[p] + a[q], sb = b[p] + b[q];
            if (sa > 0.0 && sb < 0.0 && sa * -sb > best) {
              best = sa * -sb;
              bp = p;
              bq = q;
            }
          }
        }
        double score = 0.0;
        std::size_t p = 0, q = 0;
        t->pair_argmax(a.data(), b.data(), n, &score, &p, &q);
        if (bp == n) {
          CHECK(score < 0.0);
        } else {
          CHECK(p == bp);
          CHECK(q == bq);
          CHECK(score == doctest::Approx(best).epsilon(1e-14));
        }
      }
    }
  }
}

TEST_CASE("pair argmax keeps the first of equal scores") {
  const std::vector<double> a{1, 1, 1, 1}, b{-1, -1, -1, -1};
  for (const KernelTable* t : variants()) {
    double score = 0.0;
    std::size_t p = 9, q = 9;
    t->pair_argmax(a.data(), b.data(), 4, &score, &p, &q);
    CHECK(p == 0);
    CHECK(q == 1);
    CHECK(score == 4.0);
  }
}

}  // TEST_SUITE
