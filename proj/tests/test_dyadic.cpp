#include <doctest.h>

#include "kpi/dyadic.hpp"
#include "oracle_bump.hpp"
#include "support.hpp"

using namespace kpi;
using kpi::test::pi;

TEST_CASE("bump profile") {
  CHECK(eta0(0.0) == 1.0);
  CHECK(eta0(2.0) == 0.0);
  CHECK(eta0(1.25) == 1.0);
  CHECK(eta0(1.6) == 0.0);
  double prev = 1.0;
  for (int i = 0; i <= 1000; ++i) {
    const double x = 1.2 + 0.45 * i / 1000.0;
    const double v = eta0(x);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    CHECK(v <= prev);
    CHECK(eta0(-x) == v);
    CHECK(std::abs(v - test::bump(x)) <= 1e-15);
    prev = v;
  }
  for (int j = 1; j < 12; ++j) CHECK(eta(j, std::ldexp(1.0, j)) == 1.0);
}

TEST_CASE("eta telescopes") {
  std::mt19937_64 rng(20);
  std::uniform_real_distribution<double> ud(-3000.0, 3000.0);
  for (int i = 0; i < 2000; ++i) {
    const double x = ud(rng);
    for (int L : {0, 3, 7, 11}) {
      double sum = 0.0;
      for (int j = 0; j <= L; ++j) sum += eta(j, x);
      CHECK(std::abs(sum - eta_le(L, x)) <= 1e-12);
    }
  }
}

TEST_CASE("dyadic shells") {
  const DyadicShell s{3, false};
  CHECK(s.contains(6.0));
  CHECK(s.contains(-11.9));
  CHECK_FALSE(s.contains(12.0));
  CHECK_FALSE(s.contains(5.9));
  const DyadicShell le{3, true};
  CHECK(le.contains(0.1));
  CHECK_FALSE(le.contains(0.0));
  for (double x = 0.01; x < 11.9; x += 0.013) {
    bool any = false;
    for (int j = 0; j <= 3; ++j) any = any || DyadicShell{j, false}.contains(x) || (j == 0 && DyadicShell{0, true}.contains(x));
    CHECK(any == le.contains(x));
  }
  // Consecutive shells overlap.
  CHECK(DyadicShell{4, false}.contains(13.0));
  CHECK(DyadicShell{3, false}.contains(13.0 * 0.5 + 4.0));
}

TEST_CASE("projections") {
  std::mt19937_64 rng(21);
  const Grid g(256, 16, 2 * pi, 3.0);
  const auto u = test::random_constrained(g, rng);
  const double n = test::max_abs(u);
  const int top = top_shell(g);
  CHECK(top == 7);

  for (int K = 1; K <= top; ++K) {
    SpectralField2D sum = project_shell(u, 0, ShellMode::le_k);
    for (int k = 1; k <= K; ++k) sum = sum + project_shell(u, k);
    CHECK(test::max_diff(sum, project_shell(u, K, ShellMode::le_k)) <= 1e-12 * n);
  }
  for (int k = 1; k <= top; ++k)
    for (int kk = 0; kk <= top; ++kk)
      if (std::abs(k - kk) >= 2) CHECK(test::max_abs(project_shell(project_shell(u, k), kk)) <= 1e-12 * n);

  // Data at |xi| = 2^k is fixed by P_k.
  std::vector<Complex> c(g.size());
  SpectralField2D probe(g);
  c[probe.index(16, 3)] = Complex(1.0, 2.0);
  c[probe.index(-16, -3)] = Complex(1.0, -2.0);
  const SpectralField2D single(g, c);
  CHECK(test::max_diff(project_shell(single, 4), single) == 0.0);
}

TEST_CASE("hs0 norm") {
  std::mt19937_64 rng(22);
  const Grid g(32, 32, 2 * pi, 2 * pi);
  const auto u = test::random_constrained(g, rng);
  CHECK(std::abs(hs0_norm(u, 0.0) - u.l2_norm()) <= 1e-12 * u.l2_norm());
  double prev = 0.0;
  for (double s = 0.0; s <= 3.0; s += 0.25) {
    const double v = hs0_norm(u, s);
    CHECK(v >= prev);
    prev = v;
  }

  const double a = 0.7;
  std::vector<Complex> c(g.size());
  SpectralField2D probe(g);
  c[probe.index(2, 1)] = std::polar(a, 0.3);
  c[probe.index(-2, -1)] = std::polar(a, -0.3);
  const SpectralField2D pair(g, c);
  for (double s : {0.0, 0.5, 0.75, 1.0, 2.0}) {
    CHECK(hs0_norm(pair, s) == doctest::Approx(a * std::sqrt(2.0) * std::pow(5.0, s / 2)).epsilon(1e-14));
  }
}
