#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace snls {

using Complex = std::complex<double>;

enum class Frame { physical, rescaled };

inline const char* frame_name(Frame f) {
  return f == Frame::physical ? "physical" : "rescaled";
}

// Periodic box [0,L)^d sampled on n points per axis, n a power of two.
// The frequency lattice is the usual FFT layout: mode index i along an axis
// maps to the integer wavenumber m = i for i < n/2 and m = i - n otherwise,
// with angular frequency 2*pi*m/L.
struct GridSpec {
  int d = 1;
  int n = 8;
  double L = 1.0;

  std::size_t total() const {
    std::size_t t = 1;
    for (int i = 0; i < d; ++i) t *= static_cast<std::size_t>(n);
    return t;
  }
  double spacing() const { return L / n; }
  double volume() const {
    double v = 1.0;
    for (int i = 0; i < d; ++i) v *= L;
    return v;
  }
  double cell_volume() const {
    double v = 1.0;
    for (int i = 0; i < d; ++i) v *= spacing();
    return v;
  }
  // Angular frequency of mode index i (0 <= i < n) along one axis.
  double freq(int i) const {
    const int m = (i < n / 2) ? i : i - n;
    return 2.0 * 3.14159265358979323846 * m / L;
  }
  // Physical coordinate of point index i along one axis, centered box
  // [-L/2, L/2).
  double coord(int i) const { return -0.5 * L + i * spacing(); }

  bool operator==(const GridSpec& o) const {
    return d == o.d && n == o.n && L == o.L;
  }
};

inline GridSpec make_grid(int d, int n, double L) {
  if (d < 1 || d > 3)
    throw std::invalid_argument("invalid-dimension: d must be 1, 2 or 3, got " +
                                std::to_string(d));
  if (n < 8 || (n & (n - 1)) != 0)
    throw std::invalid_argument(
        "invalid-resolution: n must be a power of two >= 8, got " +
        std::to_string(n));
  if (!(L > 0))
    throw std::invalid_argument("invalid-resolution: L must be positive");
  return GridSpec{d, n, L};
}

struct FieldState {
  GridSpec grid;
  std::vector<Complex> values;
  Frame frame = Frame::physical;
  double time = 0.0;

  bool finite() const {
    for (const auto& v : values)
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
  }
};

inline FieldState make_field(const GridSpec& g, Frame frame = Frame::physical,
                             double time = 0.0) {
  return FieldState{g, std::vector<Complex>(g.total(), Complex{0.0, 0.0}),
                    frame, time};
}

// Walks the grid in row-major order handing the d-dimensional coordinates of
// each point to fn(flat_index, x[0..d)).
template <typename Fn>
void for_each_point(const GridSpec& g, Fn&& fn) {
  const std::size_t total = g.total();
  double x[3] = {0, 0, 0};
  int idx[3] = {0, 0, 0};
  for (std::size_t flat = 0; flat < total; ++flat) {
    for (int a = 0; a < g.d; ++a) x[a] = g.coord(idx[a]);
    fn(flat, x);
    for (int a = g.d - 1; a >= 0; --a) {
      if (++idx[a] < g.n) break;
      idx[a] = 0;
    }
  }
}

// Same walk over the frequency lattice: fn(flat_index, xi[0..d)).
template <typename Fn>
void for_each_mode(const GridSpec& g, Fn&& fn) {
  const std::size_t total = g.total();
  double xi[3] = {0, 0, 0};
  int idx[3] = {0, 0, 0};
  for (std::size_t flat = 0; flat < total; ++flat) {
    for (int a = 0; a < g.d; ++a) xi[a] = g.freq(idx[a]);
    fn(flat, xi);
    for (int a = g.d - 1; a >= 0; --a) {
      if (++idx[a] < g.n) break;
      idx[a] = 0;
    }
  }
}

}  // namespace snls
