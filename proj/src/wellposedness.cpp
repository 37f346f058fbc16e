#include "evofrac/wellposedness.hpp"

#include "evofrac/frac_calculus.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace evofrac {

namespace {

using detail::min_eig_hermitian;
using detail::operator_norm;

constexpr double kProjectorTol = 1e-10;
constexpr double kCommuteTol = 1e-10;
constexpr double kStrictness = 1e-8;  // "strictly positive" means >= kStrictness * ||block||

void check_projector_block(const OperatorBlock& p, const char* name) {
    const Eigen::MatrixXcd& m = p.entries();
    if ((m - m.adjoint()).norm() > kProjectorTol) {
        throw std::invalid_argument(std::string("ProjectorTriple: ") + name + " not selfadjoint");
    }
    if ((m * m - m).norm() > kProjectorTol) {
        throw std::invalid_argument(std::string("ProjectorTriple: ") + name + " not idempotent");
    }
}

bool strictly_positive(const Eigen::MatrixXcd& compressed, double* witness) {
    const double min_eig = min_eig_hermitian(compressed);
    *witness = min_eig;
    return min_eig > 0.0 && min_eig >= kStrictness * operator_norm(compressed);
}

double commutator_norm(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    return (a * b - b * a).norm();
}

Eigen::MatrixXcd hermitian_part(const Eigen::MatrixXcd& m) { return 0.5 * (m + m.adjoint()); }

/// Analytic tail-norm bound sum_g rho^-g ||C_g||, valid since |z| <= 1/rho.
double tail_norm_bound(const MaterialLaw& law, double rho) {
    if (!law.tail()) return 0.0;
    double acc = 0.0;
    for (const auto& [gamma, block] : law.tail()->terms) {
        acc += std::pow(rho, -gamma) * operator_norm(block.entries());
    }
    return acc;
}

double tail_symbol_norm(const MaterialLaw& law, std::complex<double> z) {
    const Eigen::Index d = law.dim();
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(d, d);
    for (const auto& [gamma, block] : law.tail()->terms) {
        acc += std::exp(gamma * std::log(z)) * block.entries();
    }
    return operator_norm(acc);
}

double bound_at(const detail::PositivityConstants& k, double rho) {
    double bound = std::numeric_limits<double>::infinity();
    if (k.p_active) bound = std::min(bound, rho * k.c_p - k.c1_p);
    if (k.f_active) bound = std::min(bound, 0.5 * k.c3 * std::pow(rho, 1.0 - k.alpha0) - k.c1_f);
    if (k.q_active) bound = std::min(bound, 0.5 * k.c_q);
    return bound;
}

}  // namespace

ProjectorTriple::ProjectorTriple(OperatorBlock p0, OperatorBlock f0, OperatorBlock q0)
    : p0_(std::move(p0)), f0_(std::move(f0)), q0_(std::move(q0)) {
    if (p0_.dim() != f0_.dim() || p0_.dim() != q0_.dim()) {
        throw std::invalid_argument("ProjectorTriple: dimension mismatch");
    }
    check_projector_block(p0_, "P0");
    check_projector_block(f0_, "F0");
    check_projector_block(q0_, "Q0");
    const Eigen::Index d = p0_.dim();
    const Eigen::MatrixXcd sum = p0_.entries() + f0_.entries() + q0_.entries();
    if ((sum - Eigen::MatrixXcd::Identity(d, d)).norm() > kProjectorTol) {
        throw std::invalid_argument("ProjectorTriple: projectors must sum to the identity");
    }
    if ((p0_.entries() * f0_.entries()).norm() > kProjectorTol ||
        (p0_.entries() * q0_.entries()).norm() > kProjectorTol ||
        (f0_.entries() * q0_.entries()).norm() > kProjectorTol) {
        throw std::invalid_argument("ProjectorTriple: projectors must be pairwise orthogonal");
    }
}

namespace detail {

Eigen::MatrixXcd projector_basis(const OperatorBlock& p) {
    const Eigen::Index d = p.dim();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(p.entries());
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < d; ++i) {
        if (es.eigenvalues()(i) > 0.5) keep.push_back(i);
    }
    Eigen::MatrixXcd basis(d, static_cast<Eigen::Index>(keep.size()));
    for (std::size_t i = 0; i < keep.size(); ++i) {
        basis.col(static_cast<Eigen::Index>(i)) = es.eigenvectors().col(keep[i]);
    }
    return basis;
}

PositivityConstants positivity_constants(const MaterialLaw& law, const ProjectorTriple& proj) {
    PositivityConstants k;
    const Eigen::MatrixXcd basis_p = projector_basis(proj.p0());
    const Eigen::MatrixXcd basis_f = projector_basis(proj.f0());
    const Eigen::MatrixXcd basis_q = projector_basis(proj.q0());
    k.p_active = basis_p.cols() > 0;
    k.f_active = basis_f.cols() > 0;
    k.q_active = basis_q.cols() > 0;

    if (k.p_active) {
        k.c_p = min_eig_hermitian(basis_p.adjoint() * law.m0().entries() * basis_p);
    }
    if (k.q_active) {
        k.c_q = min_eig_hermitian(basis_q.adjoint() *
                                  hermitian_part(law.m1().entries()) * basis_q);
    }
    if (k.f_active && !law.pi().empty()) {
        k.alpha0 = law.pi().front().first;
        k.c3 = min_eig_hermitian(basis_f.adjoint() * law.pi().front().second.entries() * basis_f);
        for (std::size_t i = 1; i < law.pi().size(); ++i) {
            k.c4 += operator_norm(basis_f.adjoint() * law.pi()[i].second.entries() * basis_f);
        }
        if (law.pi().size() > 1) k.alpha1 = law.pi()[1].first;
    }

    // Young-inequality charges for the Re m1 cross terms. The Q0 block keeps
    // half its compression eigenvalue; each active partner absorbing a q-cross
    // term picks up partners * 2 * r^2 / cQ, and the p-f cross splits with
    // epsilon = 1.
    const double r = operator_norm(hermitian_part(law.m1().entries()));
    if (r > 0.0) {
        const int partners = (k.p_active ? 1 : 0) + (k.f_active ? 1 : 0);
        const double q_charge =
            (k.q_active && partners > 0 && k.c_q > 0.0) ? partners * 2.0 * r * r / k.c_q : 0.0;
        const double pf_charge = (k.p_active && k.f_active) ? r : 0.0;
        if (k.p_active) k.c1_p = r + pf_charge + q_charge;
        if (k.f_active) k.c1_f = r + pf_charge + q_charge;
    }

    // Validity threshold: the symbol monotonicity threshold, the halving of
    // the leading fractional weight against the higher ones, and the
    // break-even points of the rho-growing clauses (factor-2 headroom).
    double threshold = 0.0;
    if (k.f_active && law.pi().size() > 1 && k.c4 > 0.0 && k.c3 > 0.0) {
        const double rho_mono = rho0_for(1.0 - k.alpha0);
        const double ratio = std::pow(2.0 * k.c4 / k.c3, 1.0 / (k.alpha1 - k.alpha0));
        threshold = std::max(threshold, rho_mono * std::max(1.0, ratio));
    }
    if (k.p_active && k.c1_p > 0.0 && k.c_p > 0.0) {
        threshold = std::max(threshold, 2.0 * k.c1_p / k.c_p);
    }
    if (k.f_active && k.c1_f > 0.0 && k.c3 > 0.0) {
        threshold = std::max(threshold, std::pow(4.0 * k.c1_f / k.c3, 1.0 / (1.0 - k.alpha0)));
    }
    if (law.tail()) {
        threshold = std::max(threshold, 1.001 / (2.0 * law.tail()->radius));
    }
    k.rho_threshold = threshold;
    return k;
}

}  // namespace detail

WellposednessReport verify_condition(const MaterialLaw& law, const ProjectorTriple& proj) {
    if (law.dim() != proj.dim()) throw std::invalid_argument("verify_condition: dimension mismatch");
    WellposednessReport report;
    auto add = [&report](std::string name, bool ok, double witness, std::string detail_text = {}) {
        report.clause_results.push_back(
            {std::move(name), ok, witness, std::move(detail_text)});
    };

    const Eigen::MatrixXcd& p0 = proj.p0().entries();
    const Eigen::MatrixXcd& q0 = proj.q0().entries();
    const bool p_zero = p0.norm() == 0.0;
    const bool f_zero = proj.f0().entries().norm() == 0.0;
    const bool q_zero = q0.norm() == 0.0;

    // (a) commutation of m0 and every m_alpha with P0 and Q0.
    double worst_commutator = 0.0;
    auto track = [&worst_commutator](const Eigen::MatrixXcd& m, const Eigen::MatrixXcd& p) {
        const double scale = std::max(1.0, m.norm());
        worst_commutator = std::max(worst_commutator, commutator_norm(m, p) / scale);
    };
    track(law.m0().entries(), p0);
    track(law.m0().entries(), q0);
    for (const auto& [alpha, block] : law.pi()) {
        (void)alpha;
        track(block.entries(), p0);
        track(block.entries(), q0);
    }
    add("commutation of m0, m_alpha with P0, Q0", worst_commutator <= kCommuteTol,
        worst_commutator);

    // (b) nonnegativity of the P0 and Q0 parts of every fractional coefficient.
    double min_pp = 0.0, min_qq = 0.0;
    for (const auto& [alpha, block] : law.pi()) {
        (void)alpha;
        min_pp = std::min(min_pp, min_eig_hermitian(p0 * block.entries() * p0));
        min_qq = std::min(min_qq, min_eig_hermitian(q0 * block.entries() * q0));
    }
    auto nonneg_floor = [](const MaterialLaw& l) {
        double scale = 1.0;
        for (const auto& [a, b] : l.pi()) {
            (void)a;
            scale = std::max(scale, b.entries().norm());
        }
        return -kStrictness * scale;
    };
    const double floor = nonneg_floor(law);
    add("P0 m_alpha P0 >= 0", min_pp >= floor, min_pp);
    add("Q0 m_alpha Q0 >= 0", min_qq >= floor, min_qq);

    // (c) m0 >= 0 (also enforced at construction; witnessed here).
    const double m0_min = min_eig_hermitian(law.m0().entries());
    add("m0 >= 0", m0_min >= -kStrictness * std::max(1.0, law.m0().entries().norm()), m0_min);

    // (d) strict positivity of the compressions.
    double witness = 0.0;
    if (p_zero) {
        add("iota_P0* m0 iota_P0 strictly positive", true,
            std::numeric_limits<double>::quiet_NaN(), "vacuous (P0 = 0)");
    } else {
        const Eigen::MatrixXcd basis = detail::projector_basis(proj.p0());
        if (basis.cols() == 0) {
            add("iota_P0* m0 iota_P0 strictly positive", false, 0.0,
                "P0 nonzero but numerically rank-deficient");
        } else {
            const bool ok = strictly_positive(basis.adjoint() * law.m0().entries() * basis, &witness);
            add("iota_P0* m0 iota_P0 strictly positive", ok, witness);
        }
    }
    if (q_zero) {
        add("iota_Q0* Re(m1) iota_Q0 strictly positive", true,
            std::numeric_limits<double>::quiet_NaN(), "vacuous (Q0 = 0)");
    } else {
        const Eigen::MatrixXcd basis = detail::projector_basis(proj.q0());
        if (basis.cols() == 0) {
            add("iota_Q0* Re(m1) iota_Q0 strictly positive", false, 0.0,
                "Q0 nonzero but numerically rank-deficient");
        } else {
            const bool ok = strictly_positive(
                basis.adjoint() * hermitian_part(law.m1().entries()) * basis, &witness);
            add("iota_Q0* Re(m1) iota_Q0 strictly positive", ok, witness);
        }
    }
    if (f_zero) {
        add("iota_F0* m_alpha0 iota_F0 strictly positive", true,
            std::numeric_limits<double>::quiet_NaN(), "vacuous (F0 = 0)");
    } else if (law.pi().empty()) {
        add("iota_F0* m_alpha0 iota_F0 strictly positive", false, 0.0,
            "F0 nonzero but the law has no fractional coefficient");
    } else {
        const Eigen::MatrixXcd basis = detail::projector_basis(proj.f0());
        if (basis.cols() == 0) {
            add("iota_F0* m_alpha0 iota_F0 strictly positive", false, 0.0,
                "F0 nonzero but numerically rank-deficient");
        } else {
            const bool ok = strictly_positive(
                basis.adjoint() * law.pi().front().second.entries() * basis, &witness);
            add("iota_F0* m_alpha0 iota_F0 strictly positive", ok, witness);
        }
    }

    bool base_passed = true;
    for (const auto& clause : report.clause_results) base_passed = base_passed && clause.passed;

    if (base_passed) {
        const detail::PositivityConstants k = detail::positivity_constants(law, proj);
        report.rho_threshold = k.rho_threshold;
        const double rho_eval = std::max(1.0, 2.0 * k.rho_threshold);
        report.c0_estimate = bound_at(k, rho_eval);
        if (law.tail()) {
            std::vector<double> rho_list;
            double rho = std::max(rho_eval, 1.0);
            for (int i = 0; i < 4; ++i, rho *= 2.0) rho_list.push_back(rho);
            const double margin = m2_perturbation_margin(law, rho_list);
            report.m2_margin = margin;
            add("m2 perturbation margin below c0", margin < report.c0_estimate, margin);
        }
    }

    report.passed = true;
    for (const auto& clause : report.clause_results) report.passed = report.passed && clause.passed;
    if (!report.passed) {
        report.c0_estimate = 0.0;
        report.rho_threshold = 0.0;
    }
    return report;
}

double positivity_lower_bound(const MaterialLaw& law, const ProjectorTriple& proj, double rho) {
    if (!(rho > 0.0)) throw std::invalid_argument("positivity_lower_bound: rho must be positive");
    const detail::PositivityConstants k = detail::positivity_constants(law, proj);
    const double bound = bound_at(k, rho);
    if (!std::isfinite(bound)) {
        throw std::runtime_error("positivity_lower_bound: no active clause (all projectors zero)");
    }
    return bound;
}

std::vector<double> default_lambda_samples(double rho) {
    if (!(rho > 0.0)) throw std::invalid_argument("default_lambda_samples: rho must be positive");
    std::vector<double> samples{0.0};
    const double lo = 1e-3 * rho;
    const double hi = 1e6 * rho;
    const int per_decade = 8;
    const int decades = 9;
    for (int i = 0; i <= decades * per_decade; ++i) {
        const double lambda = lo * std::pow(hi / lo, double(i) / (decades * per_decade));
        samples.push_back(lambda);
        samples.push_back(-lambda);
    }
    return samples;
}

double sampled_symbol_positivity(const MaterialLaw& law, double rho,
                                 const std::vector<double>& lambda_samples) {
    if (!(rho > 0.0)) throw std::invalid_argument("sampled_symbol_positivity: rho must be positive");
    double min_eig = std::numeric_limits<double>::infinity();
    for (double lambda : lambda_samples) {
        const std::complex<double> p(rho, lambda);
        const Eigen::MatrixXcd symbol = p * material_symbol(law, 1.0 / p);
        min_eig = std::min(min_eig, min_eig_hermitian(symbol));
    }
    return min_eig;
}

double m2_perturbation_margin(const MaterialLaw& law, const std::vector<double>& rho_list) {
    if (!law.tail() || law.tail()->terms.empty()) return 0.0;
    if (rho_list.empty()) throw std::invalid_argument("m2_perturbation_margin: empty rho list");
    for (std::size_t i = 1; i < rho_list.size(); ++i) {
        if (!(rho_list[i] > rho_list[i - 1])) {
            throw std::invalid_argument("m2_perturbation_margin: rho list must be increasing");
        }
    }
    double previous = std::numeric_limits<double>::infinity();
    double latest = 0.0;
    for (double rho : rho_list) {
        if (!(rho > 0.0)) throw std::invalid_argument("m2_perturbation_margin: rho must be positive");
        double sup = 0.0;
        for (double lambda : default_lambda_samples(rho)) {
            sup = std::max(sup, tail_symbol_norm(law, 1.0 / std::complex<double>(rho, lambda)));
        }
        if (sup >= previous && sup > 0.0) {
            throw std::runtime_error(
                "m2_perturbation_margin: tail norms fail to decrease along rho (divergence)");
        }
        previous = sup;
        latest = sup;
    }
    return latest;
}

double certified_constant(const MaterialLaw& law, const ProjectorTriple& proj, double rho) {
    return positivity_lower_bound(law, proj, rho) - tail_norm_bound(law, rho);
}

std::string WellposednessReport::to_text() const {
    std::ostringstream out;
    out << "Well-posedness condition report\n";
    std::size_t width = 0;
    for (const auto& clause : clause_results) width = std::max(width, clause.name.size());
    for (const auto& clause : clause_results) {
        out << "  [" << (clause.passed ? "pass" : "FAIL") << "] " << clause.name;
        out << std::string(width - clause.name.size() + 2, ' ');
        char buf[48];
        std::snprintf(buf, sizeof(buf), "witness % .6e", clause.witness);
        out << buf;
        if (!clause.detail.empty()) out << "  (" << clause.detail << ")";
        out << "\n";
    }
    char line[96];
    std::snprintf(line, sizeof(line), "  c0 estimate   : %.6g\n", c0_estimate);
    out << line;
    std::snprintf(line, sizeof(line), "  rho threshold : %.6g\n", rho_threshold);
    out << line;
    if (m2_margin) {
        std::snprintf(line, sizeof(line), "  m2 margin     : %.6g\n", *m2_margin);
        out << line;
    }
    out << "  verdict       : " << (passed ? "WELL-POSED" : "NOT CERTIFIED") << "\n";
    return out.str();
}

namespace {

void write_projector_matrix(std::ostream& out, const char* key, const Eigen::MatrixXcd& m) {
    out << key << " =";
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            char buf[96];
            std::snprintf(buf, sizeof(buf), " (%.17g,%.17g)", m(r, c).real(), m(r, c).imag());
            out << buf;
        }
    }
    out << "\n";
}

Eigen::MatrixXcd parse_projector_matrix(const std::string& text, Eigen::Index d,
                                        const std::string& key) {
    std::istringstream ss(text);
    Eigen::MatrixXcd m(d, d);
    for (Eigen::Index r = 0; r < d; ++r) {
        for (Eigen::Index c = 0; c < d; ++c) {
            std::complex<double> v;
            if (!(ss >> v)) throw std::runtime_error("projectors: too few entries for " + key);
            m(r, c) = v;
        }
    }
    std::string rest;
    if (ss >> rest) throw std::runtime_error("projectors: trailing entries for " + key);
    return m;
}

}  // namespace

void save_projectors(std::ostream& out, const ProjectorTriple& proj) {
    out << "dim = " << proj.dim() << "\n";
    write_projector_matrix(out, "p0", proj.p0().entries());
    write_projector_matrix(out, "f0", proj.f0().entries());
    write_projector_matrix(out, "q0", proj.q0().entries());
}

void save_projectors(const std::string& path, const ProjectorTriple& proj) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("projectors: cannot open " + path + " for writing");
    save_projectors(out, proj);
}

ProjectorTriple load_projectors(std::istream& in) {
    Eigen::Index d = -1;
    std::optional<Eigen::MatrixXcd> p0, f0, q0;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error("projectors: missing '=' at line " + std::to_string(line_no));
        }
        std::istringstream key_ss(line.substr(0, eq));
        std::string head;
        key_ss >> head;
        const std::string value = line.substr(eq + 1);
        if (head == "dim") {
            d = static_cast<Eigen::Index>(std::stol(value));
            if (d < 1) throw std::runtime_error("projectors: dim must be >= 1");
        } else if (d < 1) {
            throw std::runtime_error("projectors: dim must come first");
        } else if (head == "p0") {
            p0 = parse_projector_matrix(value, d, head);
        } else if (head == "f0") {
            f0 = parse_projector_matrix(value, d, head);
        } else if (head == "q0") {
            q0 = parse_projector_matrix(value, d, head);
        } else {
            throw std::runtime_error("projectors: unknown key '" + head + "'");
        }
    }
    if (d < 1 || !p0 || !f0 || !q0) {
        throw std::runtime_error("projectors: dim, p0, f0 and q0 are required");
    }
    return ProjectorTriple(OperatorBlock(std::move(*p0)), OperatorBlock(std::move(*f0)),
                           OperatorBlock(std::move(*q0)));
}

ProjectorTriple load_projectors(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("projectors: cannot open " + path);
    return load_projectors(in);
}

}  // namespace evofrac
