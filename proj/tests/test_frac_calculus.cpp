#include "evofrac/frac_calculus.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace evofrac;
using evofrac::testing::gaussian_bump;
using evofrac::testing::random_band_limited;
using evofrac::testing::relative_weighted_diff;
using evofrac::testing::signal_difference;

namespace {

constexpr double kPi = std::numbers::pi;

Signal unit_step(const TimeGrid& grid, double onset) {
    return Signal::sample_scalar(
        grid, [onset](double t) -> std::complex<double> { return t >= onset ? 1.0 : 0.0; });
}

}  // namespace

TEST_CASE("symbol_power basics") {
    CHECK(symbol_power(0.0, 123.0, 4.5) == std::complex<double>(1.0, 0.0));
    CHECK(symbol_power(0.7, 0.0, 2.0).real() == doctest::Approx(std::pow(2.0, 0.7)));
    CHECK(symbol_power(0.7, 0.0, 2.0).imag() == doctest::Approx(0.0));
    CHECK_THROWS_AS(symbol_power(0.5, 1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(symbol_power(0.5, 1.0, -1.0), std::invalid_argument);
}

TEST_CASE("symbol_power half power at lambda = rho") {
    // beta = pi/4, so the real part is rho^(1/2) 2^(1/4) cos(pi/8).
    for (double rho : {0.5, 1.0, 3.0, 10.0}) {
        const double expected = std::sqrt(rho) * std::pow(2.0, 0.25) * std::cos(kPi / 8.0);
        CHECK(symbol_power(0.5, rho, rho).real() == doctest::Approx(expected).epsilon(1e-13));
    }
}

TEST_CASE("symbol_power real part matches the angle form for gamma in [0,1]") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> gamma_dist(0.0, 1.0);
    std::uniform_real_distribution<double> lambda_dist(-50.0, 50.0);
    for (int i = 0; i < 200; ++i) {
        const double gamma = gamma_dist(rng);
        const double lambda = lambda_dist(rng);
        const double rho = 0.1 + 5.0 * gamma_dist(rng);
        const double beta = std::atan2(lambda, rho);
        const double expected = std::pow(rho, gamma) * std::cos(gamma * beta) /
                                std::pow(std::cos(beta), gamma);
        CHECK(symbol_power(gamma, lambda, rho).real() ==
              doctest::Approx(expected).epsilon(1e-11));
    }
}

TEST_CASE("fractional lower bound: Re symbol >= rho^alpha on a dense sample") {
    for (double alpha : {0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0}) {
        for (double rho : {0.3, 1.0, 7.0}) {
            for (int i = -60; i <= 60; ++i) {
                const double lambda = (i == 0) ? 0.0 : std::copysign(1.0, i) *
                                                            std::pow(10.0, std::abs(i) / 10.0 - 3);
                CHECK(symbol_power(alpha, lambda, rho).real() >=
                      std::pow(rho, alpha) * (1.0 - 1e-12));
            }
        }
    }
}

TEST_CASE("running integral of the unit step grows linearly") {
    TimeGrid grid(-4.0, 16.0 / 4096, 4096, 2.0);  // rho*T = 32
    Signal u = apply_frac_power(-1.0, unit_step(grid, 0.0));
    // Pointwise checks stay clear of the window end, where the exponential
    // unweighting amplifies round-off and wrap-around residue.
    for (int j = 0; j < grid.n_steps(); ++j) {
        const double t = grid.node(j);
        if (t > 1.0 && t < 6.5) {
            CHECK(std::abs(u.at(j)[0].real() - t) < 0.03);
            CHECK(std::abs(u.at(j)[0].imag()) < 0.03);
        } else if (t < -1.0) {
            CHECK(std::abs(u.at(j)[0]) < 0.03);
        }
    }
}

TEST_CASE("fractional round trip +alpha then -alpha is the identity") {
    TimeGrid grid(0.0, 1.0 / 128.0, 1024, 4.0);
    Signal u = random_band_limited(grid, 2, 60, 42);
    for (double alpha : {0.3, 0.5, 0.9}) {
        Signal forth = apply_frac_power(alpha, u);
        Signal back = apply_frac_power(-alpha, forth);
        CHECK(relative_weighted_diff(u, back) < 1e-10);
    }
}

TEST_CASE("semigroup of fractional integrals is exact") {
    TimeGrid grid(0.0, 1.0 / 64.0, 512, 4.0);
    Signal u = random_band_limited(grid, 1, 40, 9);
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> dist(0.05, 0.95);
    for (int i = 0; i < 10; ++i) {
        const double alpha = dist(rng);
        const double beta = dist(rng);
        Signal nested = apply_frac_power(-alpha, apply_frac_power(-beta, u));
        Signal direct = apply_frac_power(-(alpha + beta), u);
        CHECK(relative_weighted_diff(direct, nested) < 1e-10);
    }
}

TEST_CASE("rl_integral_oracle: zero in, zero out; order validation") {
    TimeGrid grid(0.0, 0.25, 64, 1.0);
    Signal zero = Signal::zero(grid, 2);
    Signal out = rl_integral_oracle(0.5, zero);
    for (int j = 0; j < grid.n_steps(); ++j) CHECK(out.at(j).norm() == 0.0);
    CHECK_THROWS_AS(rl_integral_oracle(0.0, zero), std::invalid_argument);
    CHECK_THROWS_AS(rl_integral_oracle(1.0, zero), std::invalid_argument);
}

TEST_CASE("rl_integral_oracle is exact on the node-aligned unit step") {
    TimeGrid grid(-2.0, 0.125, 256, 1.0);
    Signal integral = rl_integral_oracle(0.5, unit_step(grid, 0.0));
    for (int j = 0; j < grid.n_steps(); ++j) {
        const double t = grid.node(j);
        const double expected = t > 0.0 ? 2.0 * std::sqrt(t / kPi) : 0.0;
        CHECK(std::abs(integral.at(j)[0].real() - expected) < 1e-12);
        CHECK(std::abs(integral.at(j)[0].imag()) == 0.0);
    }
}

TEST_CASE("rl_integral_oracle output at node j ignores later inputs") {
    TimeGrid grid(0.0, 0.5, 32, 1.0);
    Signal u = random_band_limited(grid, 1, 10, 77);
    const int split = 20;
    std::vector<Eigen::VectorXcd> tampered(u.values());
    for (int j = split; j < grid.n_steps(); ++j) tampered[static_cast<std::size_t>(j)].setZero();
    Signal a = rl_integral_oracle(0.4, u);
    Signal b = rl_integral_oracle(0.4, Signal(grid, std::move(tampered)));
    for (int j = 0; j <= split; ++j) CHECK((a.at(j) - b.at(j)).norm() == 0.0);
}

TEST_CASE("spectral fractional integral of the step matches t^alpha/Gamma(1+alpha)") {
    TimeGrid grid(-4.0, 16.0 / 4096, 4096, 2.0);
    Signal step = unit_step(grid, 0.0);
    for (double alpha : {0.3, 0.5, 0.8}) {
        Signal spectral = apply_frac_power(-alpha, step);
        for (int j = 0; j < grid.n_steps(); ++j) {
            const double t = grid.node(j);
            if (t < 1.0 || t > 3.5) continue;
            const double expected = std::pow(t, alpha) / std::tgamma(alpha + 1.0);
            CHECK(std::abs(spectral.at(j)[0].real() - expected) < 0.02 * expected);
        }
    }
}

TEST_CASE("spectral and quadrature fractional integrals agree on smooth bumps") {
    TimeGrid grid(0.0, 16.0 / 2048, 2048, 2.0);
    Signal bump = gaussian_bump(grid, 4.0, 12.0);
    for (double alpha : {0.25, 0.5, 0.75}) {
        Signal spectral = apply_frac_power(-alpha, bump);
        Signal quadrature = rl_integral_oracle(alpha, bump);
        CHECK(evofrac::testing::relative_plain_diff(spectral, quadrature) < 5e-3);
    }
}

TEST_CASE("fractional integration is causal under the damping budget") {
    TimeGrid grid(-4.0, 16.0 / 2048, 2048, 2.0);
    const double a = 0.5;
    Signal u = gaussian_bump(grid, a, 4.0);
    for (double alpha : {0.25, 0.75}) {
        Signal v = apply_frac_power(-alpha, u);
        double before = 0.0, total = 0.0;
        for (int j = 0; j < grid.n_steps(); ++j) {
            const double mass =
                v.at(j).squaredNorm() * std::exp(-2.0 * grid.rho() * grid.node(j));
            total += mass;
            if (grid.node(j) < a) before += mass;
        }
        CHECK(before / total < 1e-6);
    }
}

TEST_CASE("fractional integral is effectively independent of rho on causal signals") {
    const double span = 16.0;
    const int n = 2048;
    TimeGrid grid_a(-4.0, span / n, n, 30.0 / span);
    TimeGrid grid_b(-4.0, span / n, n, 38.0 / span);
    Signal bump_a = gaussian_bump(grid_a, 0.0, 4.0);
    Signal bump_b = gaussian_bump(grid_b, 0.0, 4.0);
    Signal va = apply_frac_power(-0.5, bump_a);
    Signal vb = apply_frac_power(-0.5, bump_b);
    // Transplant vb onto grid_a (same nodes, different weight) and compare in
    // the weighted norm of the smaller rho.
    Signal vb_on_a(grid_a, vb.values());
    CHECK(relative_weighted_diff(va, vb_on_a) < 1e-6);
}

TEST_CASE("derivative oracles: validation and zero input") {
    TimeGrid grid(-1.0, 0.125, 64, 1.0);
    Signal zero = Signal::zero(grid, 1);
    CHECK_THROWS_AS(riemann_liouville_derivative_oracle(1.2, 0.0, zero), std::invalid_argument);
    CHECK_THROWS_AS(caputo_derivative_oracle(-0.1, 0.0, zero), std::invalid_argument);
    Signal rl = riemann_liouville_derivative_oracle(0.5, 0.0, zero);
    Signal cap = caputo_derivative_oracle(0.5, 0.0, zero);
    for (int j = 0; j < grid.n_steps(); ++j) {
        CHECK(rl.at(j).norm() == 0.0);
        CHECK(cap.at(j).norm() == 0.0);
    }
}

TEST_CASE("cutoff derivatives agree with the spectral one on supported signals") {
    // Signal supported in (a, inf): both cutoff variants reproduce d0^gamma up
    // to their quadrature error.
    TimeGrid grid(-4.0, 16.0 / 4096, 4096, 2.0);
    const double a = 0.0;
    const double gamma = 0.3;
    Signal u = gaussian_bump(grid, 1.0, 7.0);
    Signal spectral = apply_frac_power(gamma, u);
    Signal rl = riemann_liouville_derivative_oracle(gamma, a, u);
    Signal cap = caputo_derivative_oracle(gamma, a, u);
    CHECK(relative_weighted_diff(spectral, rl) < 0.05);
    CHECK(relative_weighted_diff(spectral, cap) < 0.05);
}

TEST_CASE("constant signal separates Caputo from Riemann-Liouville") {
    TimeGrid grid(-4.0, 16.0 / 2048, 2048, 2.0);
    const double a = 0.0;
    const double gamma = 0.5;
    Signal constant = Signal::sample_scalar(grid, [](double) { return 2.0; });
    Signal cap = caputo_derivative_oracle(gamma, a, constant);
    Signal rl = riemann_liouville_derivative_oracle(gamma, a, constant);

    // Riemann-Liouville keeps the cutoff jump: c (t-a)^-gamma / Gamma(1-gamma).
    double rl_peak = 0.0, cap_peak = 0.0;
    for (int j = 0; j < grid.n_steps(); ++j) {
        if (grid.node(j) < a + 1.0 || grid.node(j) > 10.0) continue;
        rl_peak = std::max(rl_peak, std::abs(rl.at(j)[0]));
        cap_peak = std::max(cap_peak, std::abs(cap.at(j)[0]));
    }
    CHECK(rl_peak > 0.2);          // ~ 2 t^-1/2 / sqrt(pi) on [1, 10]
    CHECK(cap_peak < 0.01 * rl_peak);
    const double t_probe = 4.0;
    const int j_probe = grid.node_index(t_probe);
    const double expected = 2.0 * std::pow(t_probe - a, -gamma) / std::tgamma(1.0 - gamma);
    CHECK(std::abs(rl.at(j_probe)[0].real() - expected) < 0.05 * expected);
}

TEST_CASE("phi_alpha closed forms") {
    CHECK(phi_alpha(0.3, 2.0, 0.0) == doctest::Approx(std::pow(2.0, 0.7)).epsilon(1e-13));
    CHECK(phi_alpha(1.0 - 1e-13, 5.0, 17.0) == doctest::Approx(1.0).epsilon(1e-10));
    for (double rho : {0.5, 2.0, 9.0}) {
        const double expected = std::sqrt(rho) * std::pow(2.0, 0.25) * std::cos(kPi / 8.0);
        CHECK(phi_alpha(0.5, rho, rho) == doctest::Approx(expected).epsilon(1e-13));
    }
}

TEST_CASE("phi_alpha dominates rho^(1-alpha) and higher orders fade") {
    for (double alpha : {0.2, 0.5, 0.8}) {
        for (double rho : {1.5, 4.0, 40.0}) {
            for (double t : {0.0, 0.3, 5.0, 500.0}) {
                CHECK(phi_alpha(alpha, rho, t) >= std::pow(rho, 1.0 - alpha) * (1.0 - 1e-12));
            }
        }
    }
    // ratio phi_alpha1 / phi_alpha0 -> 0 as rho grows, for alpha0 < alpha1
    const double alpha0 = 0.3, alpha1 = 0.7, t = 2.0;
    double previous = 1.0;
    for (double rho : {10.0, 1e2, 1e3, 1e4, 1e5, 1e6}) {
        const double ratio = phi_alpha(alpha1, rho, t) / phi_alpha(alpha0, rho, t);
        CHECK(ratio < previous);
        previous = ratio;
    }
    CHECK(previous < 0.01);  // ~ rho^(alpha0 - alpha1) = 1e6^-0.4
}

TEST_CASE("rho0_for closed forms and monotonicity") {
    CHECK(rho0_for(0.5) == doctest::Approx(std::exp(kPi / 2.0)).epsilon(1e-14));
    CHECK(rho0_for(0.5) == doctest::Approx(4.810477).epsilon(1e-6));
    CHECK(rho0_for(0.1) == doctest::Approx(1.2824723).epsilon(1e-6));
    CHECK_THROWS_AS(rho0_for(0.0), std::invalid_argument);
    CHECK_THROWS_AS(rho0_for(1.0), std::invalid_argument);
    double previous = 0.0;
    for (double im : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        const double r = rho0_for(im);
        CHECK(r > previous);
        previous = r;
    }
}

TEST_CASE("monotonicity of Re((it+rho)^alpha) above rho0, with a witness below") {
    const double interval_max = 0.6;
    const double rho0 = rho0_for(interval_max);
    const std::vector<double> alphas{0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
    std::vector<double> ts{0.0};
    for (int i = 0; i <= 40; ++i) ts.push_back(std::pow(10.0, -2.0 + 0.2 * i));

    for (double rho : {rho0 * 1.01, rho0 * 3.0, rho0 * 10.0}) {
        for (std::size_t i = 0; i < alphas.size(); ++i) {
            for (std::size_t j = i; j < alphas.size(); ++j) {
                for (double t : ts) {
                    CHECK(symbol_power(alphas[i], t, rho).real() <=
                          symbol_power(alphas[j], t, rho).real() * (1.0 + 1e-12));
                }
            }
        }
    }
    // Below rho = 1 the ordering genuinely flips (rho^alpha decreasing at t=0).
    CHECK(symbol_power(0.1, 0.0, 0.5).real() > symbol_power(0.6, 0.0, 0.5).real());
}

TEST_CASE("norm bound: fractional integration contracts by rho^-alpha") {
    TimeGrid grid(0.0, 1.0 / 64.0, 1024, 3.0);
    for (unsigned seed = 0; seed < 4; ++seed) {
        Signal u = random_band_limited(grid, 2, 100, seed);
        const double base = weighted_norm(u);
        for (double alpha : {0.2, 0.5, 1.0, 1.7}) {
            Signal v = apply_frac_power(-alpha, u);
            CHECK(weighted_norm(v) <= std::pow(grid.rho(), -alpha) * base * (1.0 + 1e-8));
        }
    }
}

TEST_CASE("accretivity bound: Re <u | d0^alpha u> >= rho^alpha ||u||^2") {
    TimeGrid grid(0.0, 1.0 / 64.0, 1024, 3.0);
    for (unsigned seed = 0; seed < 4; ++seed) {
        Signal u = random_band_limited(grid, 1, 80, 50 + seed);
        const double energy = weighted_norm(u) * weighted_norm(u);
        for (double alpha : {0.1, 0.5, 0.9}) {
            Signal v = apply_frac_power(alpha, u);
            const double re = weighted_inner(u, v).real();
            CHECK(re >= std::pow(grid.rho(), alpha) * energy - 1e-8 * energy);
        }
    }
}

TEST_CASE("FracExponent splits orders around the ceiling") {
    FracExponent half(0.5);
    CHECK(half.integer_part() == 1);
    CHECK(half.fractional_part() == doctest::Approx(-0.5));
    FracExponent minus(-0.25);
    CHECK(minus.integer_part() == 0);
    CHECK(minus.fractional_part() == doctest::Approx(-0.25));
    CHECK_THROWS_AS(FracExponent(std::nan("")), std::invalid_argument);
}
