#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "snls/noise.hpp"
#include "snls/stats.hpp"

using namespace snls;

TEST_CASE("model invariants for random coefficient lists") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 20; ++trial) {
    const int n_modes = 1 + int(rng() % 4);
    std::vector<Complex> phi(n_modes);
    for (auto& z : phi) z = {nd(rng), nd(rng)};
    const auto m = build_noise_model(phi, 5.0, -1, 1);
    double mu = 0, csq = 0;
    Complex mu_hat{0, 0};
    for (const auto& z : phi) {
      mu += 0.5 * std::norm(z);
      mu_hat += 0.5 * (std::norm(z) + z * z);
      csq += z.real() * z.real();
    }
    CHECK(m.mu == doctest::Approx(mu).epsilon(1e-14));
    CHECK(m.mu_hat.real() == doctest::Approx(mu_hat.real()).epsilon(1e-14));
    CHECK(m.mu_hat.imag() == doctest::Approx(mu_hat.imag()).epsilon(1e-14));
    // real part of mu_hat is exactly sum of squared real parts
    CHECK(m.mu_hat.real() == doctest::Approx(csq).epsilon(1e-14));
    CHECK(m.c_norm == doctest::Approx(std::sqrt(csq)).epsilon(1e-14));
  }
}

TEST_CASE("exponent validation against the dimension") {
  CHECK(build_noise_model({}, 5.0, -1, 1).criticality == Criticality::mass);
  CHECK(build_noise_model({}, 3.0, -1, 2).criticality == Criticality::mass);
  CHECK(build_noise_model({}, 5.0, -1, 3).criticality == Criticality::energy);
  CHECK(build_noise_model({}, 7.0 / 3.0, -1, 3).criticality ==
        Criticality::mass);
  CHECK_THROWS_WITH_AS(build_noise_model({}, 4.0, -1, 1),
                       doctest::Contains("exponent-dimension-mismatch"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(build_noise_model({}, 5.0, -1, 2),
                       doctest::Contains("exponent-dimension-mismatch"),
                       std::invalid_argument);
  CHECK_THROWS_AS(build_noise_model({}, 5.0, 0, 1), std::invalid_argument);
}

TEST_CASE("s_alpha selects the duhamel space by criticality") {
  CHECK(build_noise_model({}, 5.0, -1, 1).s_alpha() == 0.0);
  CHECK(build_noise_model({}, 5.0, -1, 3).s_alpha() == 1.0);
}

TEST_CASE("path statistics: M(T) has the right variance") {
  const auto m = build_noise_model({Complex{0.8, 0.1}, Complex{0.6, -0.4}},
                                   5.0, -1, 1);
  const double T = 2.0;
  const int n = 4000;
  double sum = 0, sumsq = 0;
  for (int i = 0; i < n; ++i) {
    const auto p = sample_path(m, 0.01, T, 1000 + i);
    const double mT = p.M.back();
    sum += mT;
    sumsq += mT * mT;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  const double sigma2 = m.c_norm * m.c_norm * T;
  // SE of the mean and (approximately) of the sample variance
  CHECK(std::abs(mean) < 3 * std::sqrt(sigma2 / n));
  CHECK(std::abs(var - sigma2) < 3 * sigma2 * std::sqrt(2.0 / n));
}

TEST_CASE("exponential martingale of the mass factor") {
  // the mass ratio e^{2 M(t) - 2 ||c||^2 t} has mean exactly 1
  const auto m = build_noise_model({Complex{0.7, 0.0}}, 5.0, -1, 1);
  const double t = 0.5, s2 = m.c_norm * m.c_norm;
  const int n = 20000;
  double sum = 0, sumsq = 0;
  for (int i = 0; i < n; ++i) {
    const auto p = sample_path(m, 0.05, t, 500 + i);
    const double v = std::exp(2 * p.M.back() - 2 * s2 * t);
    sum += v;
    sumsq += v * v;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sumsq / n - mean * mean) / n);
  CHECK(std::abs(mean - 1.0) < 3 * se);
}

TEST_CASE("path mesh bookkeeping") {
  const auto m = build_noise_model({Complex{1, 0}}, 5.0, -1, 1);
  const auto p = sample_path(m, 0.01, 1.0, 4);
  CHECK(p.n_steps == 100);
  CHECK(p.index_of(0.0) == 0);
  CHECK(p.index_of(0.37) == 37);
  CHECK(p.index_of(1.0) == 100);
  CHECK_THROWS_WITH_AS(p.index_of(0.375), doctest::Contains("t-off-mesh"),
                       std::invalid_argument);
  CHECK_THROWS_AS(p.index_of(1.01), std::invalid_argument);
}

TEST_CASE("gbm replay and determinism for random models") {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<Complex> phi{{nd(rng), nd(rng)}, {nd(rng), nd(rng)}};
    const auto m = build_noise_model(phi, 5.0, -1, 1);
    const auto p = sample_path(m, 0.02, 1.0, 42 + trial);
    const auto p2 = sample_path(m, 0.02, 1.0, 42 + trial);
    CHECK(p.M == p2.M);
    for (int j = 0; j <= p.n_steps; j += 7) {
      const double t = p.time(j);
      const double expect =
          std::exp((m.alpha - 1) * (p.M[j] - m.c_norm * m.c_norm * t));
      CHECK(eval_gbm(p, m, t) == doctest::Approx(expect).epsilon(1e-13));
    }
  }
}

TEST_CASE("rescale frame bookkeeping") {
  const GridSpec g = make_grid(1, 32, 10.0);
  const auto m = build_noise_model({Complex{1, 0.5}}, 5.0, -1, 1);
  const auto p = sample_path(m, 0.01, 1.0, 9);
  FieldState f = make_field(g, Frame::physical, 0.25);
  for (auto& v : f.values) v = 1.0;
  const FieldState r = rescale(f, p, m, RescaleDirection::to_rescaled);
  CHECK(r.frame == Frame::rescaled);
  CHECK(r.time == 0.25);
  CHECK_THROWS_WITH_AS(rescale(r, p, m, RescaleDirection::to_rescaled),
                       doctest::Contains("frame-mismatch"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(rescale(f, p, m, RescaleDirection::to_physical),
                       doctest::Contains("frame-mismatch"),
                       std::invalid_argument);
  const FieldState back = rescale(r, p, m, RescaleDirection::to_physical);
  double err = 0;
  for (std::size_t i = 0; i < f.values.size(); ++i)
    err = std::max(err, std::abs(back.values[i] - f.values[i]));
  CHECK(err < 1e-13);
}

TEST_CASE("closed-form exceedance limits and monotonicity") {
  // s -> 0+: the delayed sup collapses to the all-time sup, P = e^{-2a}
  for (double a : {0.2, 1.0, 2.5})
    CHECK(sup_drifted_bm_exceedance(1e-10, a) ==
          doctest::Approx(std::exp(-2 * a)).epsilon(1e-6));
  // a = 0, s = 1: Phibar(1) + Phi(-1) = 2 Phi(-1)
  CHECK(sup_drifted_bm_exceedance(1.0, 0.0) ==
        doctest::Approx(2 * norm_cdf(-1.0)).epsilon(1e-12));
  // a <= 0 means the level is already exceeded somewhere with prob 1 bound
  CHECK(sup_drifted_bm_exceedance(1.0, -1.0) <= 1.0);
  // decreasing in a, decreasing in s (for a > 0)
  double prev = 1.0;
  for (double a : {0.1, 0.5, 1.0, 2.0, 4.0}) {
    const double v = sup_drifted_bm_exceedance(1.5, a);
    CHECK(v < prev);
    prev = v;
  }
  prev = 1.0;
  for (double s : {0.5, 1.0, 2.0, 4.0, 8.0}) {
    const double v = sup_drifted_bm_exceedance(s, 0.25);
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("monte carlo estimate brackets the closed form") {
  for (const auto& [s, eps] : std::vector<std::pair<double, double>>{
           {1.0, 1.0}, {1.0, 0.5}, {2.0, 0.5}}) {
    const auto cf = decay_exceedance_probability(s, eps, 5.0, "closed-form");
    const auto mc =
        decay_exceedance_probability(s, eps, 5.0, "monte-carlo", 20000, 31);
    CHECK(mc.std_error > 0);
    CHECK(std::abs(mc.p_hat - cf.p_hat) < 3 * mc.std_error);
    CHECK(mc.wilson_ci.lo <= mc.p_hat);
    CHECK(mc.p_hat <= mc.wilson_ci.hi);
  }
}

TEST_CASE("monte carlo is deterministic in the seed") {
  const auto a = decay_exceedance_probability(1.0, 0.5, 5.0, "monte-carlo",
                                              5000, 11);
  const auto b = decay_exceedance_probability(1.0, 0.5, 5.0, "monte-carlo",
                                              5000, 11);
  const auto c = decay_exceedance_probability(1.0, 0.5, 5.0, "monte-carlo",
                                              5000, 12);
  CHECK(a.p_hat == b.p_hat);
  CHECK(a.p_hat != c.p_hat);
}

TEST_CASE("exceedance probability is monotone in epsilon") {
  double prev = 1.1;
  for (double eps : {0.25, 0.5, 1.0, 2.0}) {
    const double v =
        decay_exceedance_probability(1.0, eps, 5.0, "closed-form").p_hat;
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(decay_exceedance_probability(0.0, 0.5, 5.0, "closed-form"),
                  std::invalid_argument);
  CHECK_THROWS_AS(decay_exceedance_probability(1.0, -0.5, 5.0, "closed-form"),
                  std::invalid_argument);
  CHECK_THROWS_AS(decay_exceedance_probability(1.0, 0.5, 5.0, "bogus"),
                  std::invalid_argument);
  CHECK_THROWS_AS(sample_path(build_noise_model({}, 5.0, -1, 1), -0.01, 1.0, 1),
                  std::invalid_argument);
}
