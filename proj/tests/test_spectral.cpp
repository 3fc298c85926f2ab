#include <doctest.h>

#include "kpi/error.hpp"
#include "kpi/snapshot_io.hpp"
#include "kpi/spectral.hpp"
#include "support.hpp"

using namespace kpi;
using kpi::test::pi;

TEST_CASE("make_grid lattices") {
  const Grid a = make_grid(8, 8, 2 * pi, 2 * pi);
  const std::vector<double> ints = {-4, -3, -2, -1, 0, 1, 2, 3};
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(a.xi_lattice()[i] == doctest::Approx(ints[i]).epsilon(1e-15));
    CHECK(a.mu_lattice()[i] == doctest::Approx(ints[i]).epsilon(1e-15));
  }
  const Grid b = make_grid(8, 8, pi, 2 * pi);
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(b.xi_lattice()[i] == doctest::Approx(2 * ints[i]).epsilon(1e-15));
    CHECK(b.mu_lattice()[i] == doctest::Approx(ints[i]).epsilon(1e-15));
  }
  CHECK_THROWS_AS(make_grid(6, 8, 1, 1), ContractError);
  CHECK_THROWS_AS(make_grid(4, 8, 1, 1), ContractError);
  CHECK_THROWS_AS(make_grid(8, 8, 0, 1), ContractError);
  CHECK_THROWS_AS(make_grid(8, 8, 1, -2), ContractError);
}

TEST_CASE("constant field is a single DC mode") {
  const Grid g(8, 8, 2 * pi, 2 * pi);
  const auto c = to_spectral(test::sample(g, [](double, double) { return 3.0; }));
  for (int n = g.min_x_mode(); n <= g.max_x_mode(); ++n)
    for (int m = g.min_y_mode(); m <= g.max_y_mode(); ++m) {
      if (n == 0 && m == 0) {
        CHECK(c(0, 0).real() == doctest::Approx(3.0 * 2 * pi));
      } else {
        CHECK(std::abs(c(n, m)) < 1e-14);
      }
    }
}

TEST_CASE("cos x has two modes of equal modulus") {
  const Grid g(16, 8, 2 * pi, 2 * pi);
  const auto c = to_spectral(test::sample(g, [](double x, double) { return std::cos(x); }));
  // Half of sqrt(lx ly) under the unitary convention.
  CHECK(std::abs(c(1, 0)) == doctest::Approx(pi));
  CHECK(std::abs(c(-1, 0)) == doctest::Approx(pi));
  CHECK(c.l2_norm() == doctest::Approx(std::sqrt(2.0) * pi));
}

TEST_CASE("round trip, Parseval and reality on random fields") {
  std::mt19937_64 rng(1);
  for (auto [nx, ny, lx, ly] : {std::tuple{8, 8, 2 * pi, 2 * pi}, std::tuple{64, 16, 5.0, 0.3},
                                std::tuple{32, 128, 16 * pi, 2.0}}) {
    const Grid g(nx, ny, lx, ly);
    const auto u = test::random_real(g, rng);
    const auto c = to_spectral(u);
    const auto back = to_physical(c);
    double err = 0.0, phys = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      err = std::max(err, std::abs(back.values()[i] - u.values()[i]));
      phys += u.values()[i] * u.values()[i];
    }
    CHECK(err <= 1e-12 * u.max_abs());
    const double l2 = std::sqrt(phys * g.dx() * g.dy());
    CHECK(std::abs(l2 - c.l2_norm()) <= 1e-12 * l2);
    // Sum |u|^2 dx dy = Sum |c_DFT|^2 (2 pi)^2 / (lx ly) with c_DFT the continuum-normalised coefficient.
    double spectral = 0.0;
    for (auto z : c.coeff()) spectral += std::norm(z * std::sqrt(lx * ly) / (2 * pi));
    spectral *= (2 * pi) * (2 * pi) / (lx * ly);
    CHECK(std::abs(spectral - phys * g.dx() * g.dy()) <= 1e-12 * phys * g.dx() * g.dy());
    CHECK(c.hermitian_residue() <= 1e-12 * c.l2_norm());

    const auto k = enforce_kp_constraint(c);
    const auto im = to_physical_complex(apply_symbol(k, [](double xi, double mu) { return Complex(0, xi + mu * mu * mu); }));
    double res = 0.0;
    for (auto z : im) res = std::max(res, std::abs(z.imag()));
    CHECK(res <= 1e-12 * k.l2_norm());
  }
}

TEST_CASE("shape mismatch is rejected") {
  const Grid g(8, 8, 1, 1);
  CHECK_THROWS_AS(RealField2D(g, std::vector<double>(63)), ContractError);
  CHECK_THROWS_AS(SpectralField2D(g, std::vector<Complex>(65)), ContractError);
}

TEST_CASE("apply_symbol") {
  std::mt19937_64 rng(2);
  const Grid g(32, 16, 2 * pi, 4.0);
  const auto u = test::random_constrained(g, rng);
  CHECK(test::max_diff(apply_symbol(u, [](double, double) { return Complex(1.0); }), u) == 0.0);

  const auto dd = apply_symbol(apply_symbol(u, [](double xi, double) { return Complex(0, xi); }),
                               [](double xi, double) { return Complex(0, xi); });
  const auto lap = apply_symbol(u, [](double xi, double) { return Complex(-xi * xi); });
  CHECK(test::max_diff(dd, lap) <= 1e-12 * test::max_abs(lap));

  const auto s = to_spectral(test::sample(g, [](double x, double) { return std::sin(x); }));
  const auto c = to_spectral(test::sample(g, [](double x, double) { return std::cos(x); }));
  CHECK(test::max_diff(apply_symbol(s, [](double xi, double) { return Complex(0, xi); }), c) <= 1e-13);

  CHECK_THROWS_AS(apply_symbol(u, [](double xi, double) { return Complex(1.0 / (xi - 1.0)); }), ContractError);
}

TEST_CASE("dx_inverse") {
  const Grid g(16, 16, 2 * pi, 2 * pi);
  const auto c = to_spectral(test::sample(g, [](double x, double) { return std::cos(x); }));
  const auto s = to_spectral(test::sample(g, [](double x, double) { return std::sin(x); }));
  CHECK(test::max_diff(dx_inverse(c), s) <= 1e-13);

  std::mt19937_64 rng(3);
  const Grid h(64, 32, 3.0, 7.0);
  const auto u = test::random_constrained(h, rng);
  const auto back = to_physical(dx(dx_inverse(u)));
  const auto ref = to_physical(u);
  double err = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) err = std::max(err, std::abs(back.values()[i] - ref.values()[i]));
  CHECK(err <= 1e-11);

  std::vector<Complex> bad(g.size());
  bad[SpectralField2D(g).index(0, 3)] = 0.1;
  CHECK_THROWS_AS(dx_inverse(SpectralField2D(g, bad)), ContractError);
}

TEST_CASE("snapshot encoding") {
  std::mt19937_64 rng(4);
  const Grid g(16, 8, 1.5, 2.5);
  const auto u = test::random_real(g, rng);
  const auto bytes = encode_snapshot(u);
  REQUIRE(bytes.size() == 28 + 8 * g.size());
  CHECK(bytes[0] == 'K');
  CHECK(bytes[3] == '1');
  CHECK(bytes[4] == 16);
  CHECK(bytes[8] == 8);
  const auto v = decode_snapshot(bytes);
  CHECK(v.grid() == g);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(v.values()[i] == u.values()[i]);
  auto truncated = bytes;
  truncated.pop_back();
  CHECK_THROWS_AS(decode_snapshot(truncated), ContractError);
}
