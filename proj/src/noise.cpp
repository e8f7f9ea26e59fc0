#include "snls/noise.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <stdexcept>

#include "snls/parallel.hpp"

namespace snls {

NoiseModel build_noise_model(const std::vector<Complex>& phi, double alpha,
                             int lambda_sign, int d) {
  if (d < 1 || d > 3) throw std::invalid_argument("invalid-dimension");
  if (lambda_sign != 1 && lambda_sign != -1)
    throw std::invalid_argument("lambda_sign must be +1 or -1");

  NoiseModel m;
  m.phi = phi;
  m.alpha = alpha;
  m.lambda_sign = lambda_sign;
  m.d = d;

  const double mass_alpha = 1.0 + 4.0 / d;
  const double energy_alpha = d >= 3 ? 1.0 + 4.0 / (d - 2.0) : -1.0;
  if (std::abs(alpha - mass_alpha) < 1e-12) {
    m.criticality = Criticality::mass;
  } else if (d >= 3 && std::abs(alpha - energy_alpha) < 1e-12) {
    m.criticality = Criticality::energy;
  } else {
    throw std::invalid_argument(
        "exponent-dimension-mismatch: alpha is neither 1+4/d nor 1+4/(d-2)");
  }

  double mu = 0.0;
  Complex mu_hat{0.0, 0.0};
  double c2 = 0.0;
  m.c.reserve(phi.size());
  for (const auto& p : phi) {
    mu += 0.5 * std::norm(p);
    mu_hat += 0.5 * (std::norm(p) + p * p);
    m.c.push_back(p.real());
    c2 += p.real() * p.real();
  }
  m.mu = mu;
  m.mu_hat = mu_hat;
  m.c_norm = std::sqrt(c2);
  return m;
}

int BrownianPath::index_of(double t) const {
  const long long j = std::llround(t / dt);
  if (j < 0 || j > n_steps || std::abs(t - j * dt) > 1e-9 * std::max(1.0, t))
    throw std::invalid_argument("t-off-mesh");
  return static_cast<int>(j);
}

BrownianPath sample_path(const NoiseModel& model, double dt, double horizon,
                         std::uint64_t seed) {
  if (!(dt > 0.0) || horizon < dt)
    throw std::invalid_argument("sample_path: need dt > 0 and horizon >= dt");
  BrownianPath path;
  path.dt = dt;
  path.n_steps = static_cast<int>(std::ceil(horizon / dt - 1e-9));
  path.seed = seed;

  const std::size_t K = model.phi.size();
  path.beta.assign(K, std::vector<double>(path.n_steps + 1, 0.0));
  path.M.assign(path.n_steps + 1, 0.0);
  path.W.assign(path.n_steps + 1, Complex{0.0, 0.0});

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double sdt = std::sqrt(dt);
  for (int j = 1; j <= path.n_steps; ++j) {
    double mj = 0.0;
    Complex wj{0.0, 0.0};
    for (std::size_t k = 0; k < K; ++k) {
      const double b = path.beta[k][j - 1] + sdt * gauss(rng);
      path.beta[k][j] = b;
      mj += model.c[k] * b;
      wj += model.phi[k] * b;
    }
    path.M[j] = mj;
    path.W[j] = wj;
  }
  return path;
}

double eval_gbm(const BrownianPath& path, const NoiseModel& model, double t) {
  const int j = path.index_of(t);
  return std::exp((model.alpha - 1.0) *
                  (path.M[j] - model.c_norm * model.c_norm * t));
}

FieldState rescale(const FieldState& f, const BrownianPath& path,
                   const NoiseModel& model, RescaleDirection direction) {
  const Frame expect = direction == RescaleDirection::to_rescaled
                           ? Frame::physical
                           : Frame::rescaled;
  if (f.frame != expect)
    throw std::invalid_argument(std::string("frame-mismatch: field is ") +
                                frame_name(f.frame));
  const int j = path.index_of(f.time);
  const Complex exponent = model.mu_hat * f.time - path.W[j];
  const Complex factor = direction == RescaleDirection::to_rescaled
                             ? std::exp(exponent)
                             : std::exp(-exponent);
  FieldState out = f;
  for (auto& v : out.values) v *= factor;
  out.frame = direction == RescaleDirection::to_rescaled ? Frame::rescaled
                                                         : Frame::physical;
  return out;
}

double sup_drifted_bm_exceedance(double s, double a) {
  if (!(s > 0.0)) throw std::invalid_argument("nonpositive-inputs: s");
  // Condition on D(s) = B(s) - s ~ N(-s, s). From x <= a the running maximum
  // of the drift -1 process exceeds a with probability e^{-2(a-x)}; integrate
  // against the Gaussian density of D(s):
  //   P = Phibar((a+s)/sqrt(s)) + e^{-2a} Phi((a-s)/sqrt(s)).
  const double rs = std::sqrt(s);
  const double term1 = norm_sf((a + s) / rs);
  const double term2 = std::exp(-2.0 * a + log_norm_cdf((a - s) / rs));
  return std::min(1.0, term1 + term2);
}

namespace {

// One reduced-process sample: drift -1 Brownian path started from
// D(s) ~ N(-s, s), monitored on [s, s + t_trunc] with bridge-crossing draws,
// plus an exact Bernoulli tail draw at the truncation horizon.
struct McSample {
  bool hit = false;
  double tail_prob = 0.0;  // analytic mass resolved by the tail draw
};

McSample simulate_exceedance(double s, double a, double dt, double t_trunc,
                             std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  McSample out;
  double x = -s + std::sqrt(s) * gauss(rng);
  if (x > a) {
    out.hit = true;
    return out;
  }
  const int n_steps = static_cast<int>(std::ceil(t_trunc / dt));
  const double sdt = std::sqrt(dt);
  for (int j = 0; j < n_steps; ++j) {
    const double x_next = x - dt + sdt * gauss(rng);
    if (x_next > a) {
      out.hit = true;
      return out;
    }
    // Brownian bridge between (x, x_next) crosses level a with probability
    // exp(-2 (a-x)(a-x_next)/dt); skip the exp when it underflows.
    const double prod = (a - x) * (a - x_next);
    if (prod < 14.0 * dt && unif(rng) < std::exp(-2.0 * prod / dt)) {
      out.hit = true;
      return out;
    }
    x = x_next;
  }
  out.tail_prob = std::min(1.0, std::exp(-2.0 * (a - x)));
  if (unif(rng) < out.tail_prob) out.hit = true;
  return out;
}

}  // namespace

ProbabilityEstimate decay_exceedance_probability(double c_norm, double epsilon,
                                                 double alpha,
                                                 const std::string& method,
                                                 long long n_samples,
                                                 std::uint64_t seed,
                                                 double dt_mc, int workers) {
  if (!(c_norm > 0.0) || !(epsilon > 0.0) || !(alpha > 1.0))
    throw std::invalid_argument("nonpositive-inputs");
  const double s = c_norm;
  const double a = std::log(epsilon) / (alpha - 1.0);

  ProbabilityEstimate est;
  if (method == "closed-form") {
    est.method = method;
    est.p_hat = sup_drifted_bm_exceedance(s, a);
    est.n_samples = 0;
    est.wilson_ci = {est.p_hat, est.p_hat};
    return est;
  }
  if (method != "monte-carlo")
    throw std::invalid_argument("unknown method: " + method);

  // The estimator is unbiased for any horizon: the tail Bernoulli draw is
  // exact. The window length only moves mass between the simulated part and
  // the tail draw, so a moderate horizon suffices.
  const double t_trunc = 10.0 + 4.0 / s;
  if (workers <= 0) workers = default_workers();

  std::vector<char> hits(n_samples, 0);
  std::vector<double> tails(n_samples, 0.0);
  parallel_for(static_cast<std::size_t>(n_samples), workers,
               [&](std::size_t i) {
                 const auto r = simulate_exceedance(
                     s, a, dt_mc, t_trunc,
                     seed ^ (0x9e3779b97f4a7c15ULL * (i + 1)));
                 hits[i] = r.hit ? 1 : 0;
                 tails[i] = r.tail_prob;
               });

  long long k = 0;
  double tail_sum = 0.0;
  for (long long i = 0; i < n_samples; ++i) {
    k += hits[i];
    tail_sum += tails[i];
  }
  est.method = method;
  est.n_samples = n_samples;
  est.p_hat = static_cast<double>(k) / static_cast<double>(n_samples);
  est.wilson_ci = wilson_interval(static_cast<double>(k),
                                  static_cast<double>(n_samples));
  est.std_error =
      std::sqrt(std::max(est.p_hat * (1.0 - est.p_hat), 1e-12) / n_samples);
  est.tail_bound = tail_sum / static_cast<double>(n_samples);
  return est;
}

}  // namespace snls
