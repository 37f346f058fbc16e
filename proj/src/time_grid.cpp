#include "evofrac/time_grid.hpp"

#include "evofrac/fft.hpp"
#include "evofrac/parallel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace evofrac {

namespace {

constexpr double kPi = std::numbers::pi;

void check_well_formed(const Signal& u) {
    if (u.dim() < 1) throw std::invalid_argument("Signal: dimension must be >= 1");
}

}  // namespace

TimeGrid::TimeGrid(double t_start, double dt, int n_steps, double rho)
    : t_start_(t_start), dt_(dt), n_steps_(n_steps), rho_(rho) {
    if (!(dt > 0.0)) throw std::invalid_argument("TimeGrid: dt must be positive");
    if (!(rho > 0.0)) throw std::invalid_argument("TimeGrid: rho must be positive");
    if (n_steps < 2 || !detail::is_power_of_two(static_cast<std::size_t>(n_steps))) {
        throw std::invalid_argument("TimeGrid: n_steps must be a power of two and >= 2");
    }
    if (!std::isfinite(t_start)) throw std::invalid_argument("TimeGrid: t_start must be finite");
}

double TimeGrid::frequency(int k) const {
    if (k < 0 || k >= n_steps_) throw std::out_of_range("TimeGrid::frequency: index");
    const int signed_k = (k <= n_steps_ / 2) ? k : k - n_steps_;
    return 2.0 * kPi * signed_k / (n_steps_ * dt_);
}

int TimeGrid::node_index(double t) const {
    const double real_index = (t - t_start_) / dt_;
    const int j = static_cast<int>(std::lround(real_index));
    if (j < 0 || j >= n_steps_ || std::abs(real_index - j) > 1e-9) {
        throw std::invalid_argument("TimeGrid::node_index: t is not a grid node");
    }
    return j;
}

Signal::Signal(TimeGrid grid, std::vector<Eigen::VectorXcd> values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != static_cast<std::size_t>(grid_.n_steps())) {
        throw std::invalid_argument("Signal: values length must equal n_steps");
    }
    const Eigen::Index d = values_.front().size();
    if (d < 1) throw std::invalid_argument("Signal: state dimension must be >= 1");
    for (const auto& v : values_) {
        if (v.size() != d) throw std::invalid_argument("Signal: ragged state dimensions");
    }
}

Signal Signal::zero(const TimeGrid& grid, Eigen::Index dim) {
    std::vector<Eigen::VectorXcd> values(static_cast<std::size_t>(grid.n_steps()),
                                         Eigen::VectorXcd::Zero(dim));
    return Signal(grid, std::move(values));
}

Signal Signal::sample(const TimeGrid& grid, Eigen::Index dim,
                      const std::function<Eigen::VectorXcd(double)>& fn) {
    std::vector<Eigen::VectorXcd> values;
    values.reserve(static_cast<std::size_t>(grid.n_steps()));
    for (int j = 0; j < grid.n_steps(); ++j) {
        Eigen::VectorXcd v = fn(grid.node(j));
        if (v.size() != dim) throw std::invalid_argument("Signal::sample: wrong dimension");
        values.push_back(std::move(v));
    }
    return Signal(grid, std::move(values));
}

Signal Signal::sample_scalar(const TimeGrid& grid,
                             const std::function<std::complex<double>(double)>& fn) {
    return sample(grid, 1, [&fn](double t) {
        Eigen::VectorXcd v(1);
        v[0] = fn(t);
        return v;
    });
}

Spectrum::Spectrum(TimeGrid grid, std::vector<Eigen::VectorXcd> coefficients)
    : grid_(grid), coefficients_(std::move(coefficients)) {
    if (coefficients_.size() != static_cast<std::size_t>(grid_.n_steps())) {
        throw std::invalid_argument("Spectrum: coefficients length must equal n_steps");
    }
    const Eigen::Index d = coefficients_.front().size();
    if (d < 1) throw std::invalid_argument("Spectrum: state dimension must be >= 1");
    for (const auto& c : coefficients_) {
        if (c.size() != d) throw std::invalid_argument("Spectrum: ragged state dimensions");
    }
}

Spectrum Spectrum::zero(const TimeGrid& grid, Eigen::Index dim) {
    std::vector<Eigen::VectorXcd> coeffs(static_cast<std::size_t>(grid.n_steps()),
                                         Eigen::VectorXcd::Zero(dim));
    return Spectrum(grid, std::move(coeffs));
}

Spectrum forward_transform(const Signal& u) {
    check_well_formed(u);
    const TimeGrid& g = u.grid();
    const int n = g.n_steps();
    const Eigen::Index d = u.dim();
    const double scale = std::sqrt(g.dt() / n);

    std::vector<Eigen::VectorXcd> coeffs(static_cast<std::size_t>(n), Eigen::VectorXcd(d));
    parallel_for(static_cast<std::size_t>(d), [&](std::size_t comp) {
        std::vector<std::complex<double>> buf(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) {
            buf[static_cast<std::size_t>(j)] =
                u.at(j)[static_cast<Eigen::Index>(comp)] * std::exp(-g.rho() * g.node(j));
        }
        detail::fft_radix2(buf, /*inverse=*/false);
        for (int k = 0; k < n; ++k) {
            // Phase referencing t_start so coefficients sample the transform at
            // the signed frequency, independent of the window position.
            const std::complex<double> phase = std::polar(1.0, -g.frequency(k) * g.t_start());
            coeffs[static_cast<std::size_t>(k)][static_cast<Eigen::Index>(comp)] =
                scale * phase * buf[static_cast<std::size_t>(k)];
        }
    });
    return Spectrum(g, std::move(coeffs));
}

Signal inverse_transform(const Spectrum& s) {
    const TimeGrid& g = s.grid();
    const int n = g.n_steps();
    const Eigen::Index d = s.dim();
    const double scale = 1.0 / std::sqrt(g.dt() * n);

    std::vector<Eigen::VectorXcd> values(static_cast<std::size_t>(n), Eigen::VectorXcd(d));
    parallel_for(static_cast<std::size_t>(d), [&](std::size_t comp) {
        std::vector<std::complex<double>> buf(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) {
            const std::complex<double> phase = std::polar(1.0, g.frequency(k) * g.t_start());
            buf[static_cast<std::size_t>(k)] =
                s.at(k)[static_cast<Eigen::Index>(comp)] * phase;
        }
        detail::fft_radix2(buf, /*inverse=*/true);
        for (int j = 0; j < n; ++j) {
            values[static_cast<std::size_t>(j)][static_cast<Eigen::Index>(comp)] =
                scale * std::exp(g.rho() * g.node(j)) * buf[static_cast<std::size_t>(j)];
        }
    });
    return Signal(g, std::move(values));
}

double weighted_norm(const Signal& u) {
    double acc = 0.0;
    const TimeGrid& g = u.grid();
    for (int j = 0; j < g.n_steps(); ++j) {
        acc += u.at(j).squaredNorm() * std::exp(-2.0 * g.rho() * g.node(j));
    }
    return std::sqrt(acc * g.dt());
}

std::complex<double> weighted_inner(const Signal& u, const Signal& v) {
    if (!(u.grid() == v.grid()) || u.dim() != v.dim()) {
        throw std::invalid_argument("weighted_inner: incompatible signals");
    }
    std::complex<double> acc = 0.0;
    const TimeGrid& g = u.grid();
    for (int j = 0; j < g.n_steps(); ++j) {
        acc += u.at(j).dot(v.at(j)) * std::exp(-2.0 * g.rho() * g.node(j));
    }
    return acc * g.dt();
}

Spectrum apply_multiplier(const Spectrum& s,
                          const std::function<std::complex<double>(double)>& multiplier) {
    const int n = s.grid().n_steps();
    std::vector<Eigen::VectorXcd> coeffs(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        const double lambda = s.frequency(k);
        // Sampling folds +-pi/dt onto the single Nyquist bin; the multiplier
        // there is the average over both signs, which keeps real signals real.
        const std::complex<double> m =
            (k == n / 2) ? 0.5 * (multiplier(lambda) + multiplier(-lambda))
                         : multiplier(lambda);
        coeffs[static_cast<std::size_t>(k)] = m * s.at(k);
    }
    return Spectrum(s.grid(), std::move(coeffs));
}

}  // namespace evofrac
