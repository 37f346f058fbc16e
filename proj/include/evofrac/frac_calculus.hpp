#pragma once

#include "evofrac/time_grid.hpp"

#include <complex>

namespace evofrac {

/// Real differentiation/integration order. Negative orders integrate, positive
/// orders differentiate; the integer/fractional split mirrors the composition
/// d0^gamma = d0^ceil(gamma) * d0^(gamma - ceil(gamma)).
struct FracExponent {
    double gamma;

    explicit FracExponent(double g);

    int integer_part() const;       // ceil(gamma)
    double fractional_part() const; // gamma - ceil(gamma), in (-1, 0]
};

/// Principal-branch power (i*lambda + rho)^gamma. Requires rho > 0, which keeps
/// the base in the open right half-plane, arg in (-pi/2, pi/2).
std::complex<double> symbol_power(double gamma, double lambda, double rho);

/// Fractional power of the time derivative as a spectral multiplier: conjugates
/// (i*lambda_k + rho)^gamma by the discrete Fourier-Laplace transform.
/// gamma = -1 approximates the running integral over (-inf, t].
Signal apply_frac_power(double gamma, const Signal& u);

/// Independent quadrature oracle for the fractional integral of order alpha in
/// (0,1): product integration of (1/Gamma(alpha)) int (t-s)^(alpha-1) u(s) ds
/// with the kernel moment integrated exactly on each cell and u taken
/// piecewise-constant (left node value). Causal by construction.
Signal rl_integral_oracle(double alpha, const Signal& u);

/// Riemann-Liouville derivative of order gamma in (0,1) with cutoff at the grid
/// node a: backward-difference of the order-(1-gamma) quadrature integral of
/// the cut-off signal. Lacks the semigroup property of the spectral definition.
Signal riemann_liouville_derivative_oracle(double gamma, double a, const Signal& u);

/// Caputo variant: cutoff and fractional integration applied after the
/// (backward-difference) derivative.
Signal caputo_derivative_oracle(double gamma, double a, const Signal& u);

/// phi_alpha(rho) = Re((i*t + rho)^(1-alpha)); the weight the fractional
/// coefficient M_alpha picks up in the symbol's Hermitian part.
double phi_alpha(double alpha, double rho, double t);

/// Smallest rho above which alpha -> Re((i*t+rho)^alpha) is monotone on
/// (0, interval_max] uniformly in t: exp((pi/2) * tan(interval_max * pi/2)).
double rho0_for(double interval_max);

}  // namespace evofrac
