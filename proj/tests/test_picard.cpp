#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "snls/fft.hpp"
#include "snls/picard.hpp"
#include "snls/solver.hpp"

using namespace snls;

namespace {

FieldState gaussian(const GridSpec& g, double amp, double a) {
  FieldState f = make_field(g, Frame::rescaled, 0.0);
  for_each_point(g, [&](std::size_t idx, const double* x) {
    double r2 = 0;
    for (int k = 0; k < g.d; ++k) r2 += x[k] * x[k];
    f.values[idx] = amp * std::exp(-a * r2);
  });
  return f;
}

}  // namespace

TEST_CASE("budget algebra saturates the fixed-point inequality") {
  // Small-time energy regime: delta solves 4 C A (2 delta)^{4/(d-2)} = 1,
  // ball of radius 2 delta in the gradient norm.
  for (int d : {3, 4, 5})
    for (double C : {0.5, 1.0, 3.0})
      for (double A : {0.5, 2.0}) {
        const auto b = solve_budget(Regime::energy_small_time, A, C, d);
        const double lhs = 4 * C * A * std::pow(2 * b.delta, 4.0 / (d - 2));
        CHECK(lhs == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(b.delta ==
              doctest::Approx(0.5 * std::pow(4 * C * A, -(d - 2) / 4.0))
                  .epsilon(1e-12));
        CHECK(b.satisfied);
        CHECK(b.ball_radius() == doctest::Approx(2 * b.delta));
        CHECK(b.ball_uses_gradient());
      }
  // Large-time energy regime: epsilon = 1 / (4 C (2 C E)^{4/(d-2)}),
  // ball of radius 2 C E.
  for (int d : {3, 4})
    for (double C : {1.0, 2.0})
      for (double E : {1.5, 4.0}) {
        const auto b = solve_budget(Regime::energy_large_time, E, C, d);
        const double lhs =
            4 * C * b.epsilon * std::pow(2 * C * E, 4.0 / (d - 2));
        CHECK(lhs == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(b.satisfied);
        CHECK(b.ball_radius() == doctest::Approx(2 * C * E));
        CHECK(b.ball_uses_gradient());
      }
  CHECK_THROWS_AS(solve_budget(Regime::energy_large_time, 0.5, 1.0, 3),
                  std::invalid_argument);
  // Mass small-time: delta = (2^{2+4/d} C A)^{-d/4}, radius 2 delta.
  for (int d : {1, 2, 3})
    for (double C : {1.0, 2.5})
      for (double A : {0.5, 2.0}) {
        const auto b = solve_budget(Regime::mass_small_time, A, C, d);
        const double k = 4.0 / d;
        const double lhs =
            std::pow(2.0, 2 + k) * C * A * std::pow(b.delta, k);
        CHECK(lhs == doctest::Approx(1.0).epsilon(1e-11));
        CHECK(b.ball_radius() == doctest::Approx(2 * b.delta));
        CHECK(!b.ball_uses_gradient());
      }
  // Mass large-time: epsilon = ((2C+1)^{1+4/d} 2 C M^{4/d})^{-1},
  // radius (2C+1) M.
  for (int d : {1, 2})
    for (double C : {1.0, 2.0})
      for (double M : {0.5, 4.0}) {
        const auto b = solve_budget(Regime::mass_large_time, M, C, d);
        const double expect =
            1.0 / (std::pow(2 * C + 1, 1 + 4.0 / d) * 2 * C *
                   std::pow(M, 4.0 / d));
        CHECK(b.epsilon == doctest::Approx(expect).epsilon(1e-12));
        CHECK(b.ball_radius() == doctest::Approx((2 * C + 1) * M));
      }
}

TEST_CASE("budgets shrink monotonically in the data size and the constant") {
  double prev = 1e300;
  for (double A : {0.5, 1.0, 2.0, 4.0}) {
    const double delta = solve_budget(Regime::energy_small_time, A, 1.0, 3).delta;
    CHECK(delta < prev);
    prev = delta;
  }
  prev = 1e300;
  for (double C : {0.5, 1.0, 2.0, 4.0}) {
    const double delta = solve_budget(Regime::mass_small_time, 1.0, C, 1).delta;
    CHECK(delta < prev);
    prev = delta;
  }
  CHECK_THROWS_AS(solve_budget(Regime::energy_small_time, 1.0, 1.0, 2),
                  std::invalid_argument);
  CHECK_THROWS_AS(solve_budget(Regime::mass_small_time, -1.0, 1.0, 1),
                  std::invalid_argument);
}

TEST_CASE("time mesh") {
  const TimeMesh mesh{0.0, 1.0, 10};
  CHECK(mesh.dt() == doctest::Approx(0.1));
  CHECK(mesh.times().size() == 11);
  CHECK(mesh.time(7) == doctest::Approx(0.7));
}

TEST_CASE("nonlinearity pointwise values") {
  const GridSpec g = make_grid(1, 32, 10.0);
  FieldState f = make_field(g);
  f.values[3] = Complex{1.0, 1.0};  // |u|^4 u = 4 (1+i)
  const FieldState out = nonlinearity(f, 5.0);
  CHECK(std::abs(out.values[3] - Complex{4.0, 4.0}) < 1e-12);
  CHECK(std::abs(out.values[4]) == 0.0);
  // cubic branch
  f.values[3] = Complex{2.0, 0.0};
  CHECK(std::abs(nonlinearity(f, 3.0).values[3].real() - 8.0) < 1e-12);
}

TEST_CASE("duhamel map against the scalar inhomogeneous solution") {
  // With initial 0 and forcing from a frozen field, one trapezoid step of
  // the recursion matches the directly assembled quadrature.
  const GridSpec g = make_grid(1, 64, 20.0);
  PicardProblem prob;
  prob.initial = make_field(g, Frame::rescaled, 0.0);
  prob.h = [](double) { return 1.0; };
  prob.mesh = TimeMesh{0.0, 0.2, 4};
  prob.model = build_noise_model({Complex{1, 0}}, 5.0, -1, 1);

  FieldSeries u(prob.mesh.n_t + 1, gaussian(g, 0.5, 0.5));
  for (int j = 0; j <= prob.mesh.n_t; ++j) u[j].time = prob.mesh.time(j);
  const auto mapped = duhamel_map(prob, u);

  // direct quadrature: -i lambda int_0^T e^{i(T-s) Lap} h N(u(s)) ds
  const double dt = prob.mesh.dt();
  const double T = prob.mesh.t1;
  FieldState acc = make_field(g, Frame::rescaled, T);
  for (int j = 0; j <= prob.mesh.n_t; ++j) {
    const double w = (j == 0 || j == prob.mesh.n_t) ? 0.5 * dt : dt;
    FieldState term = nonlinearity(u[j], prob.model.alpha);
    term = free_propagate(term, T - prob.mesh.time(j));
    const Complex fac =
        Complex{0, -1} * double(prob.model.lambda_sign) * w;
    for (std::size_t i = 0; i < acc.values.size(); ++i)
      acc.values[i] += fac * term.values[i];
  }
  double err = 0;
  for (std::size_t i = 0; i < acc.values.size(); ++i)
    err = std::max(err, std::abs(mapped.back().values[i] - acc.values[i]));
  CHECK(err < 1e-12);
}

TEST_CASE("picard iteration contracts and hits a fixed point") {
  const GridSpec g = make_grid(1, 256, 30.0);
  PicardProblem prob;
  prob.initial = gaussian(g, 0.3, 0.5);
  prob.h = [](double) { return 1.0; };
  prob.mesh = TimeMesh{0.0, 0.25, 50};
  prob.model = build_noise_model({Complex{1, 0}}, 5.0, -1, 1);

  PicardBudget budget = solve_budget(Regime::mass_small_time, 1.0, 0.5, 1);
  const auto [fixed, report] = picard_solve(prob, budget, 30, 1e-11, 10, 3);
  CHECK(report.iterations >= 2);
  CHECK(report.empirical_lipschitz < 0.55);
  // geometric decay of successive distances
  for (std::size_t i = 0; i + 1 < report.iterate_distances.size(); ++i)
    if (report.iterate_distances[i] > 1e-13)
      CHECK(report.iterate_distances[i + 1] <
            0.55 * report.iterate_distances[i]);
  // the fixed point satisfies the equation it was iterated on
  const auto once_more = duhamel_map(prob, fixed);
  CHECK(series_s_distance(fixed, once_more, prob.mesh, 6.0, 6.0) < 1e-9);
}

TEST_CASE("picard fixed point agrees with the split-step integrator") {
  const GridSpec g = make_grid(1, 256, 30.0);
  const auto model = build_noise_model({}, 5.0, -1, 1);
  const FieldState u0 = gaussian(g, 0.3, 0.5);

  PicardProblem prob;
  prob.initial = u0;
  prob.h = [](double) { return 1.0; };
  prob.mesh = TimeMesh{0.0, 0.25, 250};
  prob.model = model;
  PicardBudget budget = solve_budget(Regime::mass_small_time, 1.0, 0.5, 1);
  const auto [fixed, report] = picard_solve(prob, budget, 30, 1e-11, 4, 3);

  SolverConfig cfg;
  cfg.grid = g;
  cfg.model = model;
  cfg.dt = 1e-3;
  cfg.t_end = 0.25;
  cfg.frame = Frame::physical;
  cfg.record_stride = 250;
  const auto path = sample_path(model, 5e-4, 0.3, 1);
  FieldState u0p = u0;
  u0p.frame = Frame::physical;
  const auto traj = integrate(cfg, path, u0p);

  FieldState diff = fixed.back();
  for (std::size_t i = 0; i < diff.values.size(); ++i)
    diff.values[i] -= traj.snapshots.back().values[i];
  const double rel =
      lebesgue_norm(diff, 2.0) / lebesgue_norm(traj.snapshots.back(), 2.0);
  CHECK(rel < 1e-3);
}

TEST_CASE("picard diverges loudly outside any contraction ball") {
  const GridSpec g = make_grid(1, 128, 20.0);
  PicardProblem prob;
  prob.initial = gaussian(g, 6.0, 0.5);  // far too large
  prob.h = [](double) { return 1.0; };
  prob.mesh = TimeMesh{0.0, 1.0, 40};
  prob.model = build_noise_model({Complex{1, 0}}, 5.0, -1, 1);
  PicardBudget budget = solve_budget(Regime::mass_small_time, 1.0, 0.5, 1);
  CHECK_THROWS_AS(picard_solve(prob, budget, 40, 1e-11, 0, 3),
                  std::runtime_error);
}

TEST_CASE("random bandlimited fields are deterministic and band limited") {
  const GridSpec g = make_grid(1, 128, 20.0);
  const FieldState a = random_bandlimited_field(g, 5);
  const FieldState b = random_bandlimited_field(g, 5);
  const FieldState c = random_bandlimited_field(g, 6);
  CHECK(a.values == b.values);
  CHECK(a.values != c.values);
  std::vector<Complex> hat = a.values;
  fft::forward(g, hat);
  double high = 0;
  for_each_mode(g, [&](std::size_t idx, const double* xi) {
    const double kmax = M_PI * g.n / g.L;
    if (std::abs(xi[0]) > kmax / 4 + 1e-9)
      high = std::max(high, std::abs(hat[idx]));
  });
  CHECK(high < 1e-12);
}

TEST_CASE("pointwise nonlinearity constant sits in a narrow stable band") {
  const auto r1 = probe_nonlinearity_estimates(1, 5.0, 4000, 11);
  CHECK(r1.pointwise_constant >= 1.0);
  CHECK(r1.pointwise_constant <= 5.0);
  // half-sample stability
  CHECK(std::abs(r1.pointwise_constant - r1.pointwise_constant_half) <
        0.2 * r1.pointwise_constant);
  // independent dense scan of the ratio |F(u)-F(v)| / ((|u|^4+|v|^4)|u-v|)
  // on a deterministic grid of magnitudes and phases
  double worst = 0;
  for (double ru : {0.1, 0.5, 1.0, 2.0})
    for (double rv : {0.1, 0.5, 1.0, 2.0})
      for (double th : {0.0, 0.7, 1.9, 3.1}) {
        const Complex u{ru, 0.0};
        const Complex v = rv * std::polar(1.0, th);
        const double den =
            (std::pow(ru, 4.0) + std::pow(rv, 4.0)) * std::abs(u - v);
        if (den < 1e-14) continue;
        const double num =
            std::abs(std::pow(ru, 4.0) * u - std::pow(rv, 4.0) * v);
        worst = std::max(worst, num / den);
      }
  CHECK(r1.pointwise_constant >= worst - 0.35);
  // norm-level ratios are finite and positive
  CHECK(r1.norm_ratio_f > 0);
  CHECK(r1.norm_ratio_diff > 0);
  const auto r3 = probe_nonlinearity_estimates(3, 5.0, 500, 11);
  CHECK(r3.norm_ratio_grad > 0);
}

TEST_CASE("empirical strichartz constants are positive and modest") {
  const GridSpec g = make_grid(1, 128, 30.0);
  const auto [q, p] = mass_admissible_pair(1);
  const double hom = estimate_strichartz_constant(1, q, p, g, 6, 0.5, 3);
  CHECK(hom > 0.1);
  CHECK(hom < 50.0);
  const double inhom = estimate_inhomogeneous_constant(1, q, p, g, 4, 0.5, 3);
  CHECK(inhom > 0.0);
  CHECK(inhom < 100.0);
}

TEST_CASE("series norms nest: larger exponent set dominates") {
  const GridSpec g = make_grid(1, 128, 20.0);
  const TimeMesh mesh{0.0, 0.5, 20};
  FieldSeries u;
  for (int j = 0; j <= mesh.n_t; ++j) {
    FieldState f = random_bandlimited_field(g, 100 + j);
    f.time = mesh.time(j);
    u.push_back(std::move(f));
  }
  const auto model = build_noise_model({Complex{1, 0}}, 5.0, -1, 1);
  const double full = series_s_norm(u, mesh, 6.0, 6.0, 0);
  CHECK(full > 0);
  FieldSeries zero(u.size(), make_field(g, Frame::rescaled, 0.0));
  CHECK(series_s_distance(u, zero, mesh, 6.0, 6.0) ==
        doctest::Approx(full).epsilon(1e-12));
}
