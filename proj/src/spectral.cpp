#include "snls/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "snls/fft.hpp"

namespace snls {

bool is_admissible(double q, double p, int d) {
  if (q < 2.0 || p < 2.0) return false;
  const double iq = std::isinf(q) ? 0.0 : 1.0 / q;
  const double ip = std::isinf(p) ? 0.0 : 1.0 / p;
  if (std::abs(2.0 * iq + d * ip - 0.5 * d) > 1e-12) return false;
  if (d == 2 && q == 2.0 && std::isinf(p)) return false;
  return true;
}

std::pair<double, double> energy_admissible_pair(int d) {
  if (d < 3) throw std::invalid_argument("energy pair requires d >= 3");
  return {2.0 * d / (d - 2.0), 2.0 * d * d / (d * d - 2.0 * d + 4.0)};
}

std::pair<double, double> mass_admissible_pair(int d) {
  const double q = 2.0 * (d + 2.0) / d;
  return {q, q};
}

FieldState free_propagate(const FieldState& f, double dt) {
  if (!f.finite())
    throw std::invalid_argument("free_propagate: non-finite input field");
  FieldState out = f;
  if (dt == 0.0) return out;
  fft::forward(out.grid, out.values);
  for_each_mode(out.grid, [&](std::size_t i, const double* xi) {
    double k2 = 0.0;
    for (int a = 0; a < out.grid.d; ++a) k2 += xi[a] * xi[a];
    const double phase = -dt * k2;
    out.values[i] *= Complex{std::cos(phase), std::sin(phase)};
  });
  fft::inverse(out.grid, out.values);
  out.time = f.time + dt;
  return out;
}

double lebesgue_norm(const FieldState& f, double p) {
  if (p < 1.0) throw std::invalid_argument("lebesgue_norm: p must be >= 1");
  if (std::isinf(p)) {
    double m = 0.0;
    for (const auto& v : f.values) m = std::max(m, std::abs(v));
    return m;
  }
  const double w = f.grid.cell_volume();
  double acc = 0.0;
  if (p == 2.0) {
    for (const auto& v : f.values) acc += std::norm(v);
  } else {
    for (const auto& v : f.values) acc += std::pow(std::abs(v), p);
  }
  return std::pow(w * acc, 1.0 / p);
}

namespace {

// |f|_p^p including the volume weight; helper for W^{1,p}.
double lp_pth_power(const FieldState& f, double p) {
  const double w = f.grid.cell_volume();
  double acc = 0.0;
  for (const auto& v : f.values) acc += std::pow(std::abs(v), p);
  return w * acc;
}

FieldState spectral_derivative(const FieldState& f, int axis) {
  FieldState out = f;
  fft::forward(out.grid, out.values);
  for_each_mode(out.grid, [&](std::size_t i, const double* xi) {
    out.values[i] *= Complex{0.0, xi[axis]};
  });
  fft::inverse(out.grid, out.values);
  return out;
}

}  // namespace

double gradient_l2_norm(const FieldState& f) {
  // Parseval: work on the Fourier side, one transform total.
  FieldState hat = f;
  fft::forward(hat.grid, hat.values);
  const double scale =
      f.grid.volume() / static_cast<double>(f.grid.total() * f.grid.total());
  double acc = 0.0;
  for_each_mode(hat.grid, [&](std::size_t i, const double* xi) {
    double k2 = 0.0;
    for (int a = 0; a < hat.grid.d; ++a) k2 += xi[a] * xi[a];
    acc += k2 * std::norm(hat.values[i]);
  });
  return std::sqrt(scale * acc);
}

double sobolev_h1_norm(const FieldState& f) {
  const double l2 = lebesgue_norm(f, 2.0);
  const double g = gradient_l2_norm(f);
  return std::sqrt(l2 * l2 + g * g);
}

double w1p_norm(const FieldState& f, double p) {
  if (std::isinf(p)) {
    double m = lebesgue_norm(f, kInf);
    for (int a = 0; a < f.grid.d; ++a)
      m = std::max(m, lebesgue_norm(spectral_derivative(f, a), kInf));
    return m;
  }
  double acc = lp_pth_power(f, p);
  for (int a = 0; a < f.grid.d; ++a)
    acc += lp_pth_power(spectral_derivative(f, a), p);
  return std::pow(acc, 1.0 / p);
}

double virial_moment(const FieldState& f) {
  const double w = f.grid.cell_volume();
  double acc = 0.0;
  for_each_point(f.grid, [&](std::size_t i, const double* x) {
    double r2 = 0.0;
    for (int a = 0; a < f.grid.d; ++a) r2 += x[a] * x[a];
    acc += r2 * std::norm(f.values[i]);
  });
  return w * acc;
}

double boundary_mass_fraction(const FieldState& f) {
  const double w = f.grid.cell_volume();
  const double edge = 0.4 * f.grid.L;  // outer 10% per side
  double total = 0.0, outer = 0.0;
  for_each_point(f.grid, [&](std::size_t i, const double* x) {
    const double m = std::norm(f.values[i]);
    total += m;
    for (int a = 0; a < f.grid.d; ++a) {
      if (std::abs(x[a]) >= edge) {
        outer += m;
        break;
      }
    }
  });
  (void)w;
  return total > 0.0 ? outer / total : 0.0;
}

double spacetime_norm(const std::vector<double>& times,
                      const std::vector<const FieldState*>& fields,
                      const StrichartzSpec& spec) {
  if (times.size() != fields.size() || times.empty())
    throw std::invalid_argument("spacetime_norm: empty or mismatched samples");
  if (spec.t_b < spec.t_a)
    throw std::invalid_argument("spacetime_norm: bad interval");
  if (spec.t_b == spec.t_a) return 0.0;
  const double tol = 1e-9 * std::max(1.0, std::abs(spec.t_b));
  if (times.front() > spec.t_a + tol || times.back() < spec.t_b - tol)
    throw std::invalid_argument("interval-not-covered");

  auto spatial = [&](std::size_t i) {
    return spec.derivative_order == 0 ? lebesgue_norm(*fields[i], spec.p)
                                      : w1p_norm(*fields[i], spec.p);
  };

  // Collect the covered sample indices.
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < times.size(); ++i)
    if (times[i] >= spec.t_a - tol && times[i] <= spec.t_b + tol)
      idx.push_back(i);
  if (idx.size() < 2) {
    if (std::isinf(spec.q) && idx.size() == 1) return spatial(idx[0]);
    throw std::invalid_argument("interval-not-covered");
  }

  if (std::isinf(spec.q)) {
    double m = 0.0;
    for (auto i : idx) m = std::max(m, spatial(i));
    return m;
  }

  double acc = 0.0;
  double prev_t = times[idx[0]];
  double prev_v = std::pow(spatial(idx[0]), spec.q);
  for (std::size_t k = 1; k < idx.size(); ++k) {
    const double t = times[idx[k]];
    const double v = std::pow(spatial(idx[k]), spec.q);
    acc += 0.5 * (v + prev_v) * (t - prev_t);
    prev_t = t;
    prev_v = v;
  }
  return std::pow(acc, 1.0 / spec.q);
}

double spacetime_norm(const std::vector<double>& times,
                      const std::vector<FieldState>& fields,
                      const StrichartzSpec& spec) {
  std::vector<const FieldState*> ptrs;
  ptrs.reserve(fields.size());
  for (const auto& f : fields) ptrs.push_back(&f);
  return spacetime_norm(times, ptrs, spec);
}

namespace {
template <typename T>
void put(std::ofstream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
T get(std::ifstream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}
}  // namespace

void write_snapshot(const FieldState& f, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  os.write("SNLS1", 5);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(f.grid.d));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(f.grid.n));
  put<double>(os, f.grid.L);
  put<std::uint8_t>(os, f.frame == Frame::physical ? 0 : 1);
  put<double>(os, f.time);
  for (const auto& v : f.values) {
    put<double>(os, v.real());
    put<double>(os, v.imag());
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

FieldState read_snapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  char magic[5];
  is.read(magic, 5);
  if (!is || std::memcmp(magic, "SNLS1", 5) != 0)
    throw std::runtime_error("corrupt-snapshot: bad magic in " + path);
  const int d = static_cast<int>(get<std::uint32_t>(is));
  const int n = static_cast<int>(get<std::uint32_t>(is));
  const double L = get<double>(is);
  const auto tag = get<std::uint8_t>(is);
  const double time = get<double>(is);
  GridSpec g = make_grid(d, n, L);
  FieldState f =
      make_field(g, tag == 0 ? Frame::physical : Frame::rescaled, time);
  for (auto& v : f.values) {
    const double re = get<double>(is);
    const double im = get<double>(is);
    v = Complex{re, im};
  }
  if (!is) throw std::runtime_error("corrupt-snapshot: truncated " + path);
  return f;
}

}  // namespace snls
