#pragma once

#include "evofrac/material_law.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace evofrac {

/// Orthogonal projector decomposition P0 + F0 + Q0 = I, the certificate
/// skeleton: each block must be idempotent and selfadjoint to 1e-10, with
/// pairwise products below the same tolerance.
class ProjectorTriple {
public:
    ProjectorTriple(OperatorBlock p0, OperatorBlock f0, OperatorBlock q0);

    Eigen::Index dim() const { return p0_.dim(); }
    const OperatorBlock& p0() const { return p0_; }
    const OperatorBlock& f0() const { return f0_; }
    const OperatorBlock& q0() const { return q0_; }

private:
    OperatorBlock p0_;
    OperatorBlock f0_;
    OperatorBlock q0_;
};

struct ClauseResult {
    std::string name;
    bool passed = false;
    double witness = 0.0;  // min eigenvalue or residual norm backing the verdict
    std::string detail;
};

struct WellposednessReport {
    bool passed = false;
    std::vector<ClauseResult> clause_results;
    double c0_estimate = 0.0;
    double rho_threshold = 0.0;
    std::optional<double> m2_margin;

    std::string to_text() const;
};

/// Checks the commuting-projector positivity condition clause by clause:
/// (a) m0 and every m_alpha commute with P0 and Q0, (b) P0 m_alpha P0 >= 0 and
/// Q0 m_alpha Q0 >= 0, (c) m0 >= 0, (d) the P0/Q0/F0 compressions of m0,
/// Re m1, m_alpha0 are strictly positive definite. An empty compression is
/// vacuously positive only when its projector is exactly zero; a zero F0 with
/// a nonempty exponent set still requires nothing (the fractional mass is then
/// covered by clause (b)), while a nonzero F0 with no fractional coefficient
/// fails. When a tail is present the perturbation margin must stay below the
/// certified constant; that comparison is reported as its own clause.
WellposednessReport verify_condition(const MaterialLaw& law, const ProjectorTriple& proj);

/// Closed-form lower bound min over active clauses of
///   { rho*cP - c1P, (c3/2)*rho^(1-alpha0) - c1F, cQ/2 }
/// valid for rho >= the reported threshold; minorizes the sampled symbol.
double positivity_lower_bound(const MaterialLaw& law, const ProjectorTriple& proj, double rho);

/// Min over the lambda samples of the smallest eigenvalue of the Hermitian
/// part of (i*lambda + rho) * M(1/(i*lambda + rho)), tail included.
double sampled_symbol_positivity(const MaterialLaw& law, double rho,
                                 const std::vector<double>& lambda_samples);

/// Sign-symmetric logarithmic lambda grid including 0, reaching 1e6 * rho.
std::vector<double> default_lambda_samples(double rho);

/// Max over lambda samples of the tail symbol norm ||sum_g z^g C_g|| at each
/// rho in the increasing list; returns the value at the largest rho and throws
/// when the sequence fails to decrease (divergence indicator).
double m2_perturbation_margin(const MaterialLaw& law, const std::vector<double>& rho_list);

/// Certified accretivity constant at a concrete rho: the positivity lower
/// bound minus the analytic tail-norm bound sum_g rho^-g ||C_g||.
double certified_constant(const MaterialLaw& law, const ProjectorTriple& proj, double rho);

/// Plain-text projector serialization, matching the material-law format:
/// `dim = d`, `p0/f0/q0 = <row-major complex list>`.
void save_projectors(std::ostream& out, const ProjectorTriple& proj);
void save_projectors(const std::string& path, const ProjectorTriple& proj);
ProjectorTriple load_projectors(std::istream& in);
ProjectorTriple load_projectors(const std::string& path);

namespace detail {

/// Orthonormal column basis of the range of an (already validated) projector.
Eigen::MatrixXcd projector_basis(const OperatorBlock& p);

/// The concrete constants of the positivity estimate; exposed for tests.
struct PositivityConstants {
    bool p_active = false, f_active = false, q_active = false;
    double c_p = 0.0;   // min eig of the P0 compression of m0
    double c3 = 0.0;    // min eig of the F0 compression of m_alpha0
    double c_q = 0.0;   // min eig of the Q0 compression of Re m1
    double c1_p = 0.0;  // Re m1 cross-term charge on the P0 clause
    double c1_f = 0.0;  // Re m1 cross-term charge on the F0 clause
    double c4 = 0.0;    // sum of the higher fractional F0-compression norms
    double alpha0 = 0.0, alpha1 = 0.0;
    double rho_threshold = 0.0;
};

PositivityConstants positivity_constants(const MaterialLaw& law, const ProjectorTriple& proj);

}  // namespace detail

}  // namespace evofrac
