#include "evofrac/material_law.hpp"

#include "evofrac/parallel.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace evofrac {

namespace detail {

double operator_norm(const Eigen::MatrixXcd& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
    return svd.singularValues()(0);
}

double min_eig_hermitian(const Eigen::MatrixXcd& m) {
    if (m.size() == 0) return 0.0;
    const Eigen::MatrixXcd herm = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

}  // namespace detail

namespace {

using detail::min_eig_hermitian;
using detail::operator_norm;

bool matrix_is_real(const Eigen::MatrixXcd& m) {
    return m.imag().cwiseAbs().maxCoeff() == 0.0;
}

void require_strictly_positive(const Eigen::MatrixXcd& m, const char* what) {
    const double scale = std::max(1.0, m.norm());
    if (m.rows() == 0 || min_eig_hermitian(m) <= 1e-12 * scale) {
        throw std::invalid_argument(std::string(what) + " must be strictly positive definite");
    }
}

std::complex<double> principal_power(std::complex<double> z, double exponent) {
    if (exponent == 0.0) return {1.0, 0.0};
    if (exponent == 1.0) return z;
    return std::exp(exponent * std::log(z));
}

}  // namespace

OperatorBlock::OperatorBlock(Eigen::MatrixXcd entries, bool selfadjoint)
    : entries_(std::move(entries)), selfadjoint_(selfadjoint) {
    if (entries_.rows() != entries_.cols()) {
        throw std::invalid_argument("OperatorBlock: matrix must be square");
    }
    if (selfadjoint_) {
        const double defect = (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff();
        if (defect > 1e-12 * entries_.norm() + 1e-300) {
            throw std::invalid_argument("OperatorBlock: selfadjoint flag violated");
        }
    }
}

OperatorBlock OperatorBlock::identity(Eigen::Index n) {
    return OperatorBlock(Eigen::MatrixXcd::Identity(n, n), true);
}

OperatorBlock OperatorBlock::zero(Eigen::Index n) {
    return OperatorBlock(Eigen::MatrixXcd::Zero(n, n), true);
}

OperatorBlock OperatorBlock::real(const Eigen::MatrixXd& m, bool selfadjoint) {
    return OperatorBlock(m.cast<std::complex<double>>(), selfadjoint);
}

MaterialLaw::MaterialLaw(OperatorBlock m0, std::vector<std::pair<double, OperatorBlock>> pi,
                         OperatorBlock m1, std::optional<TailSeries> tail)
    : m0_(std::move(m0)), pi_(std::move(pi)), m1_(std::move(m1)), tail_(std::move(tail)) {
    const Eigen::Index d = m0_.dim();
    if (!m0_.selfadjoint()) throw std::invalid_argument("MaterialLaw: m0 must be selfadjoint");
    const double m0_floor = -1e-12 * std::max(1.0, m0_.entries().norm());
    if (min_eig_hermitian(m0_.entries()) < m0_floor) {
        throw std::invalid_argument("MaterialLaw: m0 must be nonnegative");
    }
    double previous = 0.0;
    for (const auto& [alpha, block] : pi_) {
        if (!(alpha > 0.0 && alpha < 1.0)) {
            throw std::invalid_argument("MaterialLaw: pi exponents must lie in (0,1)");
        }
        if (!(alpha > previous)) {
            throw std::invalid_argument("MaterialLaw: pi exponents must be strictly increasing");
        }
        previous = alpha;
        if (!block.selfadjoint()) {
            throw std::invalid_argument("MaterialLaw: pi blocks must be selfadjoint");
        }
        if (block.dim() != d) throw std::invalid_argument("MaterialLaw: pi block dimension mismatch");
    }
    if (m1_.dim() != d) throw std::invalid_argument("MaterialLaw: m1 dimension mismatch");
    if (tail_) {
        if (!(tail_->radius > 0.0)) {
            throw std::invalid_argument("MaterialLaw: tail radius must be positive");
        }
        double prev_gamma = 0.0;
        for (const auto& [gamma, block] : tail_->terms) {
            if (!(gamma > prev_gamma)) {
                throw std::invalid_argument("MaterialLaw: tail exponents must be positive and increasing");
            }
            prev_gamma = gamma;
            if (block.dim() != d) {
                throw std::invalid_argument("MaterialLaw: tail block dimension mismatch");
            }
        }
    }
}

bool MaterialLaw::real_coefficients() const {
    if (!matrix_is_real(m0_.entries()) || !matrix_is_real(m1_.entries())) return false;
    for (const auto& [alpha, block] : pi_) {
        (void)alpha;
        if (!matrix_is_real(block.entries())) return false;
    }
    if (tail_) {
        for (const auto& [gamma, block] : tail_->terms) {
            (void)gamma;
            if (!matrix_is_real(block.entries())) return false;
        }
    }
    return true;
}

Eigen::MatrixXcd material_symbol(const MaterialLaw& law, std::complex<double> z) {
    if (!(z.real() > 0.0)) {
        throw std::invalid_argument("material_symbol: z must satisfy Re(1/z) > 0");
    }
    if (law.tail() && std::abs(z) >= 2.0 * law.tail()->radius) {
        throw std::invalid_argument("material_symbol: z outside the tail convergence disk");
    }
    Eigen::MatrixXcd m = law.m0().entries();
    for (const auto& [alpha, block] : law.pi()) {
        m += principal_power(z, alpha) * block.entries();
    }
    m += z * law.m1().entries();
    if (law.tail()) {
        for (const auto& [gamma, block] : law.tail()->terms) {
            m += z * principal_power(z, gamma) * block.entries();
        }
    }
    return m;
}

MaterialLaw fokker_planck_material(const OperatorBlock& kappa_alpha,
                                   const OperatorBlock& mu00, const Eigen::MatrixXcd& mu01,
                                   const Eigen::MatrixXcd& mu10, const OperatorBlock& mu11,
                                   double alpha) {
    if (!(alpha >= 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("fokker_planck_material: alpha must lie in [0,1)");
    }
    const Eigen::Index d_theta = kappa_alpha.dim();
    const Eigen::Index d_flux = mu11.dim();
    if (mu00.dim() != d_theta || mu01.rows() != d_theta || mu01.cols() != d_flux ||
        mu10.rows() != d_flux || mu10.cols() != d_theta) {
        throw std::invalid_argument("fokker_planck_material: block dimension mismatch");
    }
    if (!kappa_alpha.selfadjoint()) {
        throw std::invalid_argument("fokker_planck_material: kappa_alpha must be selfadjoint");
    }
    require_strictly_positive(kappa_alpha.entries(), "fokker_planck_material: kappa_alpha");
    require_strictly_positive(
        0.5 * (mu11.entries() + mu11.entries().adjoint()), "fokker_planck_material: Re(mu11)");

    const Eigen::Index d = d_theta + d_flux;
    Eigen::MatrixXcd frac = Eigen::MatrixXcd::Zero(d, d);
    frac.topLeftCorner(d_theta, d_theta) = kappa_alpha.entries();

    Eigen::MatrixXcd m1 = Eigen::MatrixXcd::Zero(d, d);
    m1.topLeftCorner(d_theta, d_theta) = mu00.entries();
    m1.topRightCorner(d_theta, d_flux) = mu01;
    m1.bottomLeftCorner(d_flux, d_theta) = mu10;
    m1.bottomRightCorner(d_flux, d_flux) = mu11.entries();

    if (alpha == 0.0) {
        return MaterialLaw(OperatorBlock(frac, true), {}, OperatorBlock(std::move(m1)));
    }
    std::vector<std::pair<double, OperatorBlock>> pi;
    pi.emplace_back(alpha, OperatorBlock(frac, true));
    return MaterialLaw(OperatorBlock::zero(d), std::move(pi), OperatorBlock(std::move(m1)));
}

double KelvinVoigtResult::dropped_tail_bound(double rho) const {
    if (first_dropped_index < 0) return 0.0;
    const double q = std::pow(rho, -alpha) * k1;
    if (!(q < 1.0)) return std::numeric_limits<double>::infinity();
    const int n = first_dropped_index;
    return k0 * std::pow(rho, -(1.0 + n) * alpha) * std::pow(k1, n) / (1.0 - q);
}

double KelvinVoigtResult::m2_norm_bound(double rho) const {
    if (k1 == 0.0) return 0.0;
    const double q = std::pow(rho, -alpha) * k1;
    if (!(q < 1.0)) return std::numeric_limits<double>::infinity();
    const double ceil_inv = std::ceil(1.0 / alpha);
    return k0 * std::pow(rho, -alpha) * std::pow(k1, ceil_inv) / (1.0 - q);
}

KelvinVoigtResult kelvin_voigt_material(const OperatorBlock& eta, const OperatorBlock& c_elastic,
                                        const OperatorBlock& d_viscous, double alpha,
                                        int tail_terms) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("kelvin_voigt_material: alpha must lie in (0,1)");
    }
    if (tail_terms < 0) throw std::invalid_argument("kelvin_voigt_material: tail_terms must be >= 0");
    const Eigen::Index d_v = eta.dim();
    const Eigen::Index d_t = c_elastic.dim();
    if (d_viscous.dim() != d_t) {
        throw std::invalid_argument("kelvin_voigt_material: C and D dimension mismatch");
    }
    if (!eta.selfadjoint() || !c_elastic.selfadjoint() || !d_viscous.selfadjoint()) {
        throw std::invalid_argument("kelvin_voigt_material: eta, C, D must be selfadjoint");
    }
    require_strictly_positive(eta.entries(), "kelvin_voigt_material: eta");
    const double c_scale = std::max(1.0, c_elastic.entries().norm());
    const double d_scale = std::max(1.0, d_viscous.entries().norm());
    if (min_eig_hermitian(c_elastic.entries()) < -1e-12 * c_scale ||
        min_eig_hermitian(d_viscous.entries()) < -1e-12 * d_scale) {
        throw std::invalid_argument("kelvin_voigt_material: C and D must be nonnegative");
    }

    // Null/range splitting of D by eigendecomposition with a relative threshold.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(d_viscous.entries());
    const double split = 1e-10 * std::max(es.eigenvalues().maxCoeff(), 0.0);
    std::vector<Eigen::Index> null_idx, range_idx;
    for (Eigen::Index i = 0; i < d_t; ++i) {
        (es.eigenvalues()(i) <= split ? null_idx : range_idx).push_back(i);
    }
    const Eigen::Index n0 = static_cast<Eigen::Index>(null_idx.size());
    const Eigen::Index n1 = static_cast<Eigen::Index>(range_idx.size());
    Eigen::MatrixXcd iota0(d_t, n0), iota1(d_t, n1);
    for (Eigen::Index i = 0; i < n0; ++i) iota0.col(i) = es.eigenvectors().col(null_idx[i]);
    for (Eigen::Index i = 0; i < n1; ++i) iota1.col(i) = es.eigenvectors().col(range_idx[i]);

    const Eigen::Index d = d_v + d_t;
    auto embed_t_block = [&](const Eigen::MatrixXcd& tt) {
        Eigen::MatrixXcd full = Eigen::MatrixXcd::Zero(d, d);
        full.bottomRightCorner(d_t, d_t) = tt;
        return full;
    };

    KelvinVoigtResult result{
        MaterialLaw(OperatorBlock::identity(1), {}, OperatorBlock::zero(1)),
        0.0, 0.0, alpha, 0.0, 0.0, 0, -1};

    if (n1 == 0) {
        // Purely elastic: (C + D d0^alpha)^-1 degenerates to C^-1.
        require_strictly_positive(c_elastic.entries(), "kelvin_voigt_material: C (elastic case)");
        Eigen::MatrixXcd c_inv = c_elastic.entries().inverse();
        Eigen::MatrixXcd m0 = Eigen::MatrixXcd::Zero(d, d);
        m0.topLeftCorner(d_v, d_v) = eta.entries();
        m0.bottomRightCorner(d_t, d_t) = 0.5 * (c_inv + c_inv.adjoint());
        result.law = MaterialLaw(OperatorBlock(std::move(m0), true), {}, OperatorBlock::zero(d));
        result.rho_threshold = 1.0;
        result.c0 = min_eig_hermitian(c_elastic.entries());
        return result;
    }

    const Eigen::MatrixXcd c00 = iota0.adjoint() * c_elastic.entries() * iota0;
    const Eigen::MatrixXcd c01 = iota0.adjoint() * c_elastic.entries() * iota1;
    const Eigen::MatrixXcd c10 = iota1.adjoint() * c_elastic.entries() * iota0;
    const Eigen::MatrixXcd c11 = iota1.adjoint() * c_elastic.entries() * iota1;
    Eigen::VectorXd d11_diag(n1);
    for (Eigen::Index i = 0; i < n1; ++i) d11_diag(i) = es.eigenvalues()(range_idx[i]);

    Eigen::MatrixXcd c00_inv;
    Eigen::MatrixXcd schur = c11;
    if (n0 > 0) {
        require_strictly_positive(c00, "kelvin_voigt_material: iota0* C iota0");
        c00_inv = c00.inverse();
        schur -= c10 * c00_inv * c01;
    }
    const Eigen::MatrixXcd sqrt_d11_inv =
        d11_diag.cwiseInverse().cwiseSqrt().cast<std::complex<double>>().asDiagonal();
    Eigen::MatrixXcd s = sqrt_d11_inv * schur * sqrt_d11_inv;
    s = 0.5 * (s + s.adjoint());

    // Y = (iota0 iota1) W (0; I) sqrt(D11^-1); the n-th series term is Y (-S)^n Y*.
    Eigen::MatrixXcd y = iota1 * sqrt_d11_inv;
    if (n0 > 0) y -= iota0 * (c00_inv * c01) * sqrt_d11_inv;

    result.k0 = operator_norm(y) * operator_norm(y);
    result.k1 = operator_norm(s);

    Eigen::MatrixXcd m0 = Eigen::MatrixXcd::Zero(d, d);
    m0.topLeftCorner(d_v, d_v) = eta.entries();
    if (n0 > 0) {
        Eigen::MatrixXcd nul = iota0 * c00_inv * iota0.adjoint();
        m0.bottomRightCorner(d_t, d_t) = 0.5 * (nul + nul.adjoint());
    }

    std::vector<std::pair<double, OperatorBlock>> pi;
    Eigen::MatrixXcd m1 = Eigen::MatrixXcd::Zero(d, d);
    TailSeries tail;
    tail.radius = result.k1 > 0.0 ? 0.5 * std::pow(result.k1, -1.0 / alpha)
                                  : std::numeric_limits<double>::infinity();

    Eigen::MatrixXcd power = Eigen::MatrixXcd::Identity(n1, n1);  // (-S)^n
    int stored_tail = 0;
    for (int n = 0;; ++n) {
        if (n > 0) {
            power = (-s) * power;
            if (power.norm() == 0.0) break;  // series terminated exactly
        }
        const double exponent = (1.0 + n) * alpha;
        Eigen::MatrixXcd term = y * power * y.adjoint();
        term = 0.5 * (term + term.adjoint());
        if (exponent < 1.0 - 1e-12) {
            pi.emplace_back(exponent, OperatorBlock(embed_t_block(term), true));
        } else if (std::abs(exponent - 1.0) <= 1e-12) {
            m1 += embed_t_block(term);
        } else {
            if (stored_tail >= tail_terms) {
                result.first_dropped_index = n;
                break;
            }
            tail.terms.emplace_back(exponent - 1.0, OperatorBlock(embed_t_block(term), true));
            ++stored_tail;
        }
    }
    result.stored_tail_terms = stored_tail;

    std::optional<TailSeries> tail_opt;
    if (!tail.terms.empty()) tail_opt = std::move(tail);
    result.law = MaterialLaw(OperatorBlock(std::move(m0), true), std::move(pi),
                             OperatorBlock(std::move(m1)), std::move(tail_opt));

    result.rho_threshold =
        result.k1 > 0.0 ? std::max(1.0, std::pow(2.0 * result.k1, 1.0 / alpha)) : 1.0;
    result.c0 = min_eig_hermitian(c_elastic.entries() +
                                  std::pow(result.rho_threshold, alpha) * d_viscous.entries());
    return result;
}

Signal apply_material(const MaterialLaw& law, const Signal& u) {
    if (law.dim() != u.dim()) throw std::invalid_argument("apply_material: dimension mismatch");
    const double rho = u.grid().rho();
    Spectrum s = forward_transform(u);
    const int n = u.grid().n_steps();
    std::vector<Eigen::VectorXcd> coeffs(static_cast<std::size_t>(n));
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t k) {
        const double lambda = s.frequency(static_cast<int>(k));
        Eigen::MatrixXcd symbol = material_symbol(law, 1.0 / std::complex<double>(rho, lambda));
        if (static_cast<int>(k) == n / 2) {
            // Nyquist bin carries both +-pi/dt: average the symbol over signs.
            symbol = 0.5 * (symbol + material_symbol(law, 1.0 / std::complex<double>(rho, -lambda)));
        }
        coeffs[k] = symbol * s.at(static_cast<int>(k));
    });
    return inverse_transform(Spectrum(u.grid(), std::move(coeffs)));
}

namespace {

std::string format_complex(const std::complex<double>& v) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "(%.17g,%.17g)", v.real(), v.imag());
    return buf;
}

void write_matrix(std::ostream& out, const Eigen::MatrixXcd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            out << ' ' << format_complex(m(r, c));
        }
    }
    out << "\n";
}

Eigen::MatrixXcd parse_matrix(const std::string& text, Eigen::Index d, const std::string& key) {
    std::istringstream ss(text);
    Eigen::MatrixXcd m(d, d);
    for (Eigen::Index r = 0; r < d; ++r) {
        for (Eigen::Index c = 0; c < d; ++c) {
            std::complex<double> v;
            if (!(ss >> v)) {
                throw std::runtime_error("material law: too few entries for '" + key + "'");
            }
            m(r, c) = v;
        }
    }
    std::string rest;
    if (ss >> rest) throw std::runtime_error("material law: trailing entries for '" + key + "'");
    return m;
}

}  // namespace

void save_material_law(std::ostream& out, const MaterialLaw& law) {
    out << "dim = " << law.dim() << "\n";
    out << "m0 =";
    write_matrix(out, law.m0().entries());
    for (const auto& [alpha, block] : law.pi()) {
        char key[48];
        std::snprintf(key, sizeof(key), "frac %.17g =", alpha);
        out << key;
        write_matrix(out, block.entries());
    }
    out << "m1 =";
    write_matrix(out, law.m1().entries());
    if (law.tail()) {
        for (const auto& [gamma, block] : law.tail()->terms) {
            char key[48];
            std::snprintf(key, sizeof(key), "tail %.17g =", gamma);
            out << key;
            write_matrix(out, block.entries());
        }
        char radius_line[64];
        std::snprintf(radius_line, sizeof(radius_line), "radius = %.17g\n", law.tail()->radius);
        out << radius_line;
    }
}

void save_material_law(const std::string& path, const MaterialLaw& law) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("material law: cannot open " + path + " for writing");
    save_material_law(out, law);
}

MaterialLaw load_material_law(std::istream& in) {
    Eigen::Index d = -1;
    std::optional<Eigen::MatrixXcd> m0, m1;
    std::vector<std::pair<double, Eigen::MatrixXcd>> fracs;
    std::vector<std::pair<double, Eigen::MatrixXcd>> tails;
    std::optional<double> radius;

    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error("material law: missing '=' at line " + std::to_string(line_no));
        }
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        std::istringstream key_ss(key);
        std::string head;
        key_ss >> head;
        if (head == "dim") {
            d = static_cast<Eigen::Index>(std::stol(value));
            if (d < 1) throw std::runtime_error("material law: dim must be >= 1");
        } else if (d < 1) {
            throw std::runtime_error("material law: dim must come first");
        } else if (head == "m0") {
            m0 = parse_matrix(value, d, "m0");
        } else if (head == "m1") {
            m1 = parse_matrix(value, d, "m1");
        } else if (head == "frac" || head == "tail") {
            double exponent;
            if (!(key_ss >> exponent)) {
                throw std::runtime_error("material law: missing exponent at line " +
                                         std::to_string(line_no));
            }
            (head == "frac" ? fracs : tails).emplace_back(exponent, parse_matrix(value, d, head));
        } else if (head == "radius") {
            radius = std::stod(value);
        } else {
            throw std::runtime_error("material law: unknown key '" + head + "' at line " +
                                     std::to_string(line_no));
        }
    }
    if (d < 1 || !m0 || !m1) throw std::runtime_error("material law: dim, m0 and m1 are required");
    if (!tails.empty() && !radius) throw std::runtime_error("material law: tail requires radius");

    std::vector<std::pair<double, OperatorBlock>> pi;
    for (auto& [alpha, m] : fracs) pi.emplace_back(alpha, OperatorBlock(std::move(m), true));
    std::optional<TailSeries> tail;
    if (!tails.empty()) {
        TailSeries ts;
        ts.radius = *radius;
        for (auto& [gamma, m] : tails) ts.terms.emplace_back(gamma, OperatorBlock(std::move(m)));
        tail = std::move(ts);
    }
    return MaterialLaw(OperatorBlock(std::move(*m0), true), std::move(pi),
                       OperatorBlock(std::move(*m1)), std::move(tail));
}

MaterialLaw load_material_law(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("material law: cannot open " + path);
    return load_material_law(in);
}

}  // namespace evofrac
