#pragma once

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <vector>

namespace evofrac {

/// Uniform temporal grid carrying the exponential weight parameter rho.
///
/// The grid hosts the discrete Fourier-Laplace transform: signals live on the
/// nodes t_j = t_start + j*dt with the weighted inner product
/// <u|v> = sum_j <u_j|v_j> exp(-2*rho*t_j) * dt, spectra live on the signed
/// frequencies lambda_k = 2*pi*k/(n*dt) mapped into (-pi/dt, pi/dt].
class TimeGrid {
public:
    static constexpr double kDefaultDampingBudget = 30.0;

    TimeGrid(double t_start, double dt, int n_steps, double rho);

    double t_start() const { return t_start_; }
    double dt() const { return dt_; }
    int n_steps() const { return n_steps_; }
    double rho() const { return rho_; }

    double node(int j) const { return t_start_ + j * dt_; }
    double span() const { return n_steps_ * dt_; }

    /// Signed frequency of coefficient k, in (-pi/dt, pi/dt].
    double frequency(int k) const;

    /// True when rho*span reaches the wrap-around damping budget required for
    /// causal solves (periodization control).
    bool meets_damping_budget(double threshold = kDefaultDampingBudget) const {
        return rho_ * span() >= threshold;
    }

    /// Index of the grid node at time t; throws if t is not a node.
    int node_index(double t) const;

    bool operator==(const TimeGrid& other) const = default;

private:
    double t_start_;
    double dt_;
    int n_steps_;
    double rho_;
};

/// Time-domain samples: one complex state vector of dimension d per grid node.
/// Immutable after construction.
class Signal {
public:
    Signal(TimeGrid grid, std::vector<Eigen::VectorXcd> values);

    static Signal zero(const TimeGrid& grid, Eigen::Index dim);

    /// Builds a signal by sampling fn(t) at every node.
    static Signal sample(const TimeGrid& grid, Eigen::Index dim,
                         const std::function<Eigen::VectorXcd(double)>& fn);

    /// Scalar convenience: dimension-1 signal from a complex-valued function of t.
    static Signal sample_scalar(const TimeGrid& grid,
                                const std::function<std::complex<double>(double)>& fn);

    const TimeGrid& grid() const { return grid_; }
    Eigen::Index dim() const { return values_.empty() ? 0 : values_.front().size(); }
    const std::vector<Eigen::VectorXcd>& values() const { return values_; }
    const Eigen::VectorXcd& at(int j) const { return values_[static_cast<std::size_t>(j)]; }

private:
    TimeGrid grid_;
    std::vector<Eigen::VectorXcd> values_;
};

/// Frequency-domain coefficients in natural FFT order; accessors pair each
/// coefficient with its signed frequency so callers never see the ordering.
class Spectrum {
public:
    Spectrum(TimeGrid grid, std::vector<Eigen::VectorXcd> coefficients);

    static Spectrum zero(const TimeGrid& grid, Eigen::Index dim);

    const TimeGrid& grid() const { return grid_; }
    Eigen::Index dim() const { return coefficients_.empty() ? 0 : coefficients_.front().size(); }
    const std::vector<Eigen::VectorXcd>& coefficients() const { return coefficients_; }
    const Eigen::VectorXcd& at(int k) const { return coefficients_[static_cast<std::size_t>(k)]; }
    double frequency(int k) const { return grid_.frequency(k); }

private:
    TimeGrid grid_;
    std::vector<Eigen::VectorXcd> coefficients_;
};

/// Discrete Fourier-Laplace transform: pointwise weight exp(-rho*t_j), then the
/// unitary DFT, scaled so that <u|v>_rho equals the plain coefficient inner
/// product (discrete Parseval without extra factors).
Spectrum forward_transform(const Signal& u);

/// Exact inverse of forward_transform up to round-off.
Signal inverse_transform(const Spectrum& s);

/// Weighted norm sqrt(sum_j |u_j|^2 exp(-2*rho*t_j) dt).
double weighted_norm(const Signal& u);

/// Weighted inner product <u|v>_rho, conjugate-linear in the first argument.
std::complex<double> weighted_inner(const Signal& u, const Signal& v);

/// Applies a scalar frequency multiplier m(lambda_k) coefficient-wise.
Spectrum apply_multiplier(const Spectrum& s,
                          const std::function<std::complex<double>(double)>& multiplier);

}  // namespace evofrac
