#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <random>

#include "snls/fft.hpp"
#include "snls/spectral.hpp"

using namespace snls;

namespace {

FieldState gaussian_field(const GridSpec& g, double a) {
  FieldState f = make_field(g);
  for_each_point(g, [&](std::size_t idx, const double* x) {
    double r2 = 0;
    for (int k = 0; k < g.d; ++k) r2 += x[k] * x[k];
    f.values[idx] = std::exp(-a * r2);
  });
  return f;
}

FieldState random_field(const GridSpec& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  FieldState f = make_field(g);
  for (auto& v : f.values) v = {nd(rng), nd(rng)};
  // smooth it: damp high modes so norms are grid-resolved
  fft::forward(g, f.values);
  for_each_mode(g, [&](std::size_t idx, const double* xi) {
    double k2 = 0;
    for (int k = 0; k < g.d; ++k) k2 += xi[k] * xi[k];
    f.values[idx] *= std::exp(-0.05 * k2);
  });
  fft::inverse(g, f.values);
  return f;
}

}  // namespace

TEST_CASE("free evolution of a gaussian matches the closed form") {
  // u0 = e^{-a x^2}; e^{it Lap} u0 = (1+4iat)^{-d/2} e^{-a x^2 / (1+4iat)}
  const double a = 0.5, t = 0.7;
  for (int d : {1, 2}) {
    const GridSpec g = make_grid(d, d == 1 ? 256 : 128, 40.0);
    FieldState f = gaussian_field(g, a);
    const FieldState evolved = free_propagate(f, t);
    const Complex den{1.0, 4.0 * a * t};
    double err = 0;
    for_each_point(g, [&](std::size_t idx, const double* x) {
      double r2 = 0;
      for (int k = 0; k < g.d; ++k) r2 += x[k] * x[k];
      const Complex exact =
          std::pow(den, -0.5 * d) * std::exp(-a * r2 / den);
      err = std::max(err, std::abs(evolved.values[idx] - exact));
    });
    CHECK(err < 1e-10);
  }
}

TEST_CASE("free evolution is unitary and satisfies the group law") {
  const GridSpec g = make_grid(1, 128, 30.0);
  for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
    const FieldState f = random_field(g, seed);
    const double m0 = lebesgue_norm(f, 2.0);
    const FieldState once = free_propagate(f, 0.83);
    CHECK(std::abs(lebesgue_norm(once, 2.0) - m0) < 1e-12 * m0);
    const FieldState split = free_propagate(free_propagate(f, 0.33), 0.5);
    double err = 0;
    for (std::size_t i = 0; i < f.values.size(); ++i)
      err = std::max(err, std::abs(split.values[i] - once.values[i]));
    CHECK(err < 1e-12 * m0);
    // inverse
    const FieldState back = free_propagate(once, -0.83);
    err = 0;
    for (std::size_t i = 0; i < f.values.size(); ++i)
      err = std::max(err, std::abs(back.values[i] - f.values[i]));
    CHECK(err < 1e-12 * m0);
  }
}

TEST_CASE("lebesgue norms of a gaussian match the analytic integrals") {
  // ||e^{-a x^2}||_p^p = sqrt(pi / (p a)) in 1d.
  const double a = 0.35;
  const GridSpec g = make_grid(1, 512, 60.0);
  const FieldState f = gaussian_field(g, a);
  for (double p : {2.0, 4.0, 6.0}) {
    const double exact = std::pow(std::sqrt(M_PI / (p * a)), 1.0 / p);
    CHECK(lebesgue_norm(f, p) == doctest::Approx(exact).epsilon(1e-10));
  }
  CHECK(lebesgue_norm(f, kInf) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("h1 and virial of a gaussian match the analytic values") {
  const double a = 0.35;
  const GridSpec g = make_grid(1, 512, 60.0);
  const FieldState f = gaussian_field(g, a);
  const double l2sq = std::sqrt(M_PI / (2 * a));
  const double gradsq = a * std::sqrt(M_PI / (2 * a));
  CHECK(sobolev_h1_norm(f) ==
        doctest::Approx(std::sqrt(l2sq + gradsq)).epsilon(1e-10));
  CHECK(gradient_l2_norm(f) ==
        doctest::Approx(std::sqrt(gradsq)).epsilon(1e-10));
  // int x^2 e^{-2a x^2} = sqrt(pi/(2a)) / (4a)
  CHECK(virial_moment(f) ==
        doctest::Approx(std::sqrt(M_PI / (2 * a)) / (4 * a)).epsilon(1e-10));
}

TEST_CASE("w1p norm dominates the lebesgue norm") {
  const GridSpec g = make_grid(1, 128, 30.0);
  for (std::uint64_t seed : {11ull, 12ull, 13ull}) {
    const FieldState f = random_field(g, seed);
    for (double p : {2.0, 4.0})
      CHECK(w1p_norm(f, p) >= lebesgue_norm(f, p) * (1 - 1e-12));
  }
}

TEST_CASE("admissible pairs") {
  for (int d : {3, 4, 5}) {
    const auto [q, p] = energy_admissible_pair(d);
    CHECK(is_admissible(q, p, d));
    // scaling relation 2/q + d/p = d/2
    CHECK(2.0 / q + d / p == doctest::Approx(d / 2.0).epsilon(1e-12));
  }
  for (int d : {1, 2, 3}) {
    const auto [q, p] = mass_admissible_pair(d);
    CHECK(q == doctest::Approx(p));
    CHECK(is_admissible(q, p, d));
  }
  CHECK(is_admissible(kInf, 2.0, 2));
  CHECK(!is_admissible(2.0, kInf, 2));  // forbidden endpoint in d = 2
  CHECK(!is_admissible(3.0, 3.0, 2));   // fails the scaling relation
}

TEST_CASE("spacetime norm against dense quadrature of a separable field") {
  // u(t,x) = (1+t) g(x): ||u||_{L^q L^p} = (int_0^1 (1+t)^q dt)^{1/q} ||g||_p
  const GridSpec g = make_grid(1, 128, 30.0);
  const FieldState base = gaussian_field(g, 0.5);
  const int nt = 2000;
  std::vector<double> times;
  std::vector<FieldState> samples;
  for (int j = 0; j <= nt; ++j) {
    const double t = double(j) / nt;
    times.push_back(t);
    FieldState s = base;
    for (auto& v : s.values) v *= (1.0 + t);
    s.time = t;
    samples.push_back(std::move(s));
  }
  for (double q : {2.0, 6.0}) {
    const double tfac = std::pow((std::pow(2.0, q + 1) - 1) / (q + 1), 1 / q);
    const double exact = tfac * lebesgue_norm(base, 4.0);
    const double got =
        spacetime_norm(times, samples, StrichartzSpec{q, 4.0, 0, 0.0, 1.0});
    CHECK(got == doctest::Approx(exact).epsilon(1e-5));
  }
  // q = inf takes the max over the window
  const double sup =
      spacetime_norm(times, samples, StrichartzSpec{kInf, 4.0, 0, 0.0, 1.0});
  CHECK(sup == doctest::Approx(2.0 * lebesgue_norm(base, 4.0)).epsilon(1e-10));
  // sub-window
  const double half =
      spacetime_norm(times, samples, StrichartzSpec{kInf, 4.0, 0, 0.0, 0.5});
  CHECK(half == doctest::Approx(1.5 * lebesgue_norm(base, 4.0)).epsilon(1e-10));
  CHECK_THROWS_WITH_AS(
      spacetime_norm(times, samples, StrichartzSpec{2.0, 4.0, 0, 0.0, 2.0}),
      "interval-not-covered", std::invalid_argument);
}

TEST_CASE("boundary mass fraction flags wrap-around") {
  const GridSpec g = make_grid(1, 256, 40.0);
  CHECK(boundary_mass_fraction(gaussian_field(g, 0.5)) < 1e-12);
  FieldState edge = make_field(g);
  for (int i = 0; i < g.n; ++i) {
    const double x = g.coord(i);
    edge.values[i] = std::exp(-0.5 * (std::abs(x) - 20.0) * (std::abs(x) - 20.0));
  }
  CHECK(boundary_mass_fraction(edge) > 0.5);
}

TEST_CASE("grid validation errors") {
  CHECK_THROWS_WITH_AS(make_grid(1, 7, 10.0),
                       doctest::Contains("invalid-resolution"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(make_grid(1, 4, 10.0),
                       doctest::Contains("invalid-resolution"),
                       std::invalid_argument);
  CHECK_THROWS_AS(make_grid(0, 16, 10.0), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(4, 16, 10.0), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(1, 16, -1.0), std::invalid_argument);
}

TEST_CASE("snapshot io round trip and corruption detection") {
  const GridSpec g = make_grid(2, 32, 12.5);
  FieldState f = random_field(g, 99);
  f.frame = Frame::rescaled;
  f.time = 0.625;
  const std::string path = "/tmp/snls_test_snapshot.snls";
  write_snapshot(f, path);
  const FieldState back = read_snapshot(path);
  CHECK(back.grid.d == 2);
  CHECK(back.grid.n == 32);
  CHECK(back.grid.L == 12.5);
  CHECK(back.frame == Frame::rescaled);
  CHECK(back.time == 0.625);
  bool identical = back.values.size() == f.values.size();
  for (std::size_t i = 0; identical && i < f.values.size(); ++i)
    identical = back.values[i] == f.values[i];
  CHECK(identical);

  // flip a magic byte
  {
    std::FILE* fp = std::fopen(path.c_str(), "r+b");
    std::fputc('X', fp);
    std::fclose(fp);
  }
  CHECK_THROWS_AS(read_snapshot(path), std::runtime_error);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_snapshot(path), std::runtime_error);
}

TEST_CASE("fft round trip and parseval on all dimensions") {
  for (int d : {1, 2, 3}) {
    const GridSpec g = make_grid(d, d == 3 ? 16 : 64, 15.0);
    FieldState f = random_field(g, 7 + d);
    const double l2 = lebesgue_norm(f, 2.0);
    std::vector<Complex> hat = f.values;
    fft::forward(g, hat);
    double sum = 0;
    for (const auto& z : hat) sum += std::norm(z);
    // Parseval with the discrete normalization: V/N^2 * sum |hat|^2
    const double par = std::sqrt(g.volume() / double(g.total()) /
                                 double(g.total()) * sum);
    CHECK(par == doctest::Approx(l2).epsilon(1e-12));
    fft::inverse(g, hat);
    double err = 0;
    for (std::size_t i = 0; i < hat.size(); ++i)
      err = std::max(err, std::abs(hat[i] - f.values[i]));
    CHECK(err < 1e-12 * std::max(1.0, l2));
  }
}
