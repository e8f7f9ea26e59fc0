#pragma once

#include <limits>
#include <string>
#include <vector>

#include "snls/grid.hpp"

namespace snls {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Mixed space-time norm L^q(I; L^p) (derivative_order 0) or
// L^q(I; W^{1,p}) (derivative_order 1).
struct StrichartzSpec {
  double q = 2.0;
  double p = 2.0;
  int derivative_order = 0;
  double t_a = 0.0;
  double t_b = 0.0;
};

// 2/q + d/p = d/2, excluding (d,q,p) = (2,2,inf).
bool is_admissible(double q, double p, int d);

// The paper's two designated pairs.
// Energy pair (2d/(d-2), 2d^2/(d^2-2d+4)), d >= 3.
std::pair<double, double> energy_admissible_pair(int d);
// Mass pair q = p = 2(d+2)/d, any d >= 1.
std::pair<double, double> mass_admissible_pair(int d);

// Exact free Schrodinger propagator e^{i*dt*Laplacian}: multiplies each
// Fourier mode by e^{-i*dt*|xi|^2}. Unitary on L^2; dt may be negative.
FieldState free_propagate(const FieldState& f, double dt);

// ||f||_{L^p} by mesh-volume-weighted Riemann sum; p = kInf gives max|f|.
double lebesgue_norm(const FieldState& f, double p);

// Spectral gradient; returns ||grad f||_{L^2}.
double gradient_l2_norm(const FieldState& f);

// (||f||_2^2 + ||grad f||_2^2)^{1/2}.
double sobolev_h1_norm(const FieldState& f);

// (||f||_p^p + sum_j ||d_j f||_p^p)^{1/p}; p = kInf takes the max.
double w1p_norm(const FieldState& f, double p);

// Pointwise |f|^2 weighted by |x|^2, integrated (virial functional).
double virial_moment(const FieldState& f);

// Fraction of the L^2 mass sitting in the outer 10% shell of the box,
// a wrap-around monitor for the periodic truncation of R^d.
double boundary_mass_fraction(const FieldState& f);

// Trapezoidal L^q-in-time quadrature of the spatial norm over samples at
// strictly increasing times; the samples must cover [spec.t_a, spec.t_b].
// q = kInf takes the max over covered samples.
double spacetime_norm(const std::vector<double>& times,
                      const std::vector<const FieldState*>& fields,
                      const StrichartzSpec& spec);
double spacetime_norm(const std::vector<double>& times,
                      const std::vector<FieldState>& fields,
                      const StrichartzSpec& spec);

// Binary snapshot format: magic "SNLS1", u32 d, u32 n, f64 L, u8 frame,
// f64 time, then n^d (re, im) f64 pairs; all little-endian.
void write_snapshot(const FieldState& f, const std::string& path);
FieldState read_snapshot(const std::string& path);

}  // namespace snls
