#pragma once

#include "evofrac/material_law.hpp"
#include "evofrac/spatial_operators.hpp"
#include "evofrac/time_grid.hpp"

#include <optional>

namespace evofrac {

/// Accretivity certificate attached to a problem: the solve's a-priori bound
/// ||U||_rho <= (1/constant) ||f||_rho holds for rho >= rho_threshold.
struct WellposednessCertificate {
    double rho_threshold = 0.0;
    double constant = 0.0;
};

/// Discretized evolutionary problem (d0 M(d0^-1) + A) U = f on a weighted grid.
class EvolutionaryProblem {
public:
    EvolutionaryProblem(MaterialLaw law, SkewOperator a, TimeGrid grid,
                        std::optional<WellposednessCertificate> certificate = std::nullopt);

    const MaterialLaw& law() const { return law_; }
    const SkewOperator& a() const { return a_; }
    const TimeGrid& grid() const { return grid_; }
    double rho() const { return grid_.rho(); }
    const std::optional<WellposednessCertificate>& certificate() const { return certificate_; }

private:
    MaterialLaw law_;
    SkewOperator a_;
    TimeGrid grid_;
    std::optional<WellposednessCertificate> certificate_;
};

/// Discrete point source delta x weight: a single-node (1/dt) pulse.
struct DeltaSource {
    int node_index = 0;
    Eigen::VectorXcd weight;
};

struct SolveStats {
    double max_relative_residual = 0.0;
    int worst_frequency_index = 0;
};

/// Per-frequency dense LU solve of B_k u_k = f_k with
/// B_k = (i*lambda_k + rho) M(1/(i*lambda_k + rho)) + A. Frequencies are
/// independent and processed in parallel with deterministic per-slot writes;
/// a singular (or numerically unusable) B_k aborts with its lambda_k.
Signal solve(const EvolutionaryProblem& p, const Signal& f, SolveStats* stats = nullptr);

/// Solves, then returns the ratio of the weighted mass of U before time a to
/// its total weighted mass. Requires f to vanish (relative weighted mass
/// <= 1e-12) before a, and the grid to meet the damping budget.
double causality_check(const EvolutionaryProblem& p, const Signal& f, double a);

struct IvpSolution {
    Signal u;
    /// || (d0^-alpha M_alpha U)(just after source) - (just before) - W ||
    /// measured in the discrete H_-1 norm ||(A+I)^-1 . ||.
    double jump_defect = 0.0;
};

/// Initial-value formulation with a delta source on the right-hand side:
/// solves with rhs f + delta(x)W at the source node and reports the jump-
/// condition defect. The weight must lie in the range of the leading
/// fractional coefficient (of m0 in the degenerate classical case).
IvpSolution ivp_solve_delta(const EvolutionaryProblem& p, const Signal& f, const DeltaSource& src);

/// History formulation: moves the pre-history term to the right-hand side,
/// rhs = g + d0^-alpha (delta(x)V). With g = d0^-alpha f and matching vectors
/// the result equals d0^-alpha of the delta-formulation solution.
Signal ivp_solve_history(const EvolutionaryProblem& p, const Signal& g, const DeltaSource& history);

/// Independent implicit-Euler convolution-quadrature oracle marching forward
/// from t0. Supports m0, fractional and m1 coefficients; rejects laws with
/// tails. First-order accurate in dt, causal by construction.
Signal time_stepping_oracle(const EvolutionaryProblem& p, const Signal& f, double t0);

/// Flux-law residual of a solved Fokker-Planck pair (theta, flux):
/// flux + mu11^-1 grad theta + mu11^-1 mu10 theta, per node, under zero flux
/// forcing. An exact solve leaves this at the solver residual level.
Signal fokker_planck_reduce(const EvolutionaryProblem& p, const Signal& u);

namespace detail {
/// B_k for one frequency; exposed for residual tests.
Eigen::MatrixXcd frequency_matrix(const MaterialLaw& law, const SkewOperator& a, double rho,
                                  double lambda);
}  // namespace detail

}  // namespace evofrac
