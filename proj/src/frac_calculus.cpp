#include "evofrac/frac_calculus.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace evofrac {

namespace {

constexpr double kPi = std::numbers::pi;

Signal cutoff_from(double a, const Signal& u) {
    std::vector<Eigen::VectorXcd> values;
    values.reserve(static_cast<std::size_t>(u.grid().n_steps()));
    for (int j = 0; j < u.grid().n_steps(); ++j) {
        values.push_back(u.grid().node(j) >= a ? u.at(j)
                                               : Eigen::VectorXcd::Zero(u.dim()).eval());
    }
    return Signal(u.grid(), std::move(values));
}

// First-order causal derivative; node 0 assumes zero history before the window.
Signal backward_difference(const Signal& u) {
    const double dt = u.grid().dt();
    std::vector<Eigen::VectorXcd> values;
    values.reserve(static_cast<std::size_t>(u.grid().n_steps()));
    values.push_back((u.at(0) / dt).eval());
    for (int j = 1; j < u.grid().n_steps(); ++j) {
        values.push_back(((u.at(j) - u.at(j - 1)) / dt).eval());
    }
    return Signal(u.grid(), std::move(values));
}

}  // namespace

FracExponent::FracExponent(double g) : gamma(g) {
    if (!std::isfinite(g)) throw std::invalid_argument("FracExponent: order must be finite");
}

int FracExponent::integer_part() const { return static_cast<int>(std::ceil(gamma)); }

double FracExponent::fractional_part() const { return gamma - integer_part(); }

std::complex<double> symbol_power(double gamma, double lambda, double rho) {
    if (!(rho > 0.0)) throw std::invalid_argument("symbol_power: rho must be positive");
    if (gamma == 0.0) return {1.0, 0.0};
    const std::complex<double> base(rho, lambda);
    return std::exp(gamma * std::log(base));
}

Signal apply_frac_power(double gamma, const Signal& u) {
    FracExponent order(gamma);
    const double rho = u.grid().rho();
    Spectrum s = forward_transform(u);
    Spectrum scaled = apply_multiplier(
        s, [&](double lambda) { return symbol_power(order.gamma, lambda, rho); });
    return inverse_transform(scaled);
}

Signal rl_integral_oracle(double alpha, const Signal& u) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("rl_integral_oracle: alpha must lie in (0,1)");
    }
    const TimeGrid& g = u.grid();
    const int n = g.n_steps();
    const double dt = g.dt();
    const double inv_gamma = 1.0 / (std::tgamma(alpha) * alpha);

    // Exact kernel moments: int over cell [t_j, t_{j+1}] of (t_m - s)^(alpha-1) ds
    //   = ((t_m - t_j)^alpha - (t_m - t_{j+1})^alpha) / alpha,
    // a function of m - j only. Precompute and convolve with the left node value.
    std::vector<double> moment(static_cast<std::size_t>(n), 0.0);
    for (int lag = 1; lag <= n - 1; ++lag) {
        const double hi = lag * dt;
        const double lo = (lag - 1) * dt;
        moment[static_cast<std::size_t>(lag)] =
            (std::pow(hi, alpha) - std::pow(lo, alpha)) * inv_gamma;
    }

    std::vector<Eigen::VectorXcd> out(static_cast<std::size_t>(n),
                                      Eigen::VectorXcd::Zero(u.dim()));
    for (int m = 1; m < n; ++m) {
        Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(u.dim());
        for (int j = 0; j < m; ++j) {
            acc += moment[static_cast<std::size_t>(m - j)] * u.at(j);
        }
        out[static_cast<std::size_t>(m)] = acc;
    }
    return Signal(g, std::move(out));
}

Signal riemann_liouville_derivative_oracle(double gamma, double a, const Signal& u) {
    if (!(gamma > 0.0 && gamma < 1.0)) {
        throw std::invalid_argument("riemann_liouville_derivative_oracle: gamma must lie in (0,1)");
    }
    u.grid().node_index(a);
    return backward_difference(rl_integral_oracle(1.0 - gamma, cutoff_from(a, u)));
}

Signal caputo_derivative_oracle(double gamma, double a, const Signal& u) {
    if (!(gamma > 0.0 && gamma < 1.0)) {
        throw std::invalid_argument("caputo_derivative_oracle: gamma must lie in (0,1)");
    }
    u.grid().node_index(a);
    return rl_integral_oracle(1.0 - gamma, cutoff_from(a, backward_difference(u)));
}

double phi_alpha(double alpha, double rho, double t) {
    if (!(rho > 0.0)) throw std::invalid_argument("phi_alpha: rho must be positive");
    return symbol_power(1.0 - alpha, t, rho).real();
}

double rho0_for(double interval_max) {
    if (!(interval_max > 0.0 && interval_max < 1.0)) {
        throw std::invalid_argument("rho0_for: interval_max must lie in (0,1)");
    }
    return std::exp(kPi / 2.0 * std::tan(interval_max * kPi / 2.0));
}

}  // namespace evofrac
