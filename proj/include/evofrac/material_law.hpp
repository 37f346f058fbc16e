#pragma once

#include "evofrac/time_grid.hpp"

#include <Eigen/Dense>

#include <complex>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace evofrac {

/// Dense complex operator coefficient with an optional selfadjointness claim,
/// verified at construction (max entry defect <= 1e-12 * norm).
class OperatorBlock {
public:
    explicit OperatorBlock(Eigen::MatrixXcd entries, bool selfadjoint = false);

    static OperatorBlock identity(Eigen::Index n);
    static OperatorBlock zero(Eigen::Index n);
    /// Real matrix convenience constructor.
    static OperatorBlock real(const Eigen::MatrixXd& m, bool selfadjoint = false);

    const Eigen::MatrixXcd& entries() const { return entries_; }
    bool selfadjoint() const { return selfadjoint_; }
    Eigen::Index dim() const { return entries_.rows(); }

private:
    Eigen::MatrixXcd entries_;
    bool selfadjoint_;
};

/// One truncated power-series tail: the law contributes d0^-(1+gamma) * block
/// per term, i.e. M2(z) = sum_gamma z^gamma * block.
struct TailSeries {
    std::vector<std::pair<double, OperatorBlock>> terms;  // exponents gamma > 0, increasing
    double radius = 0.0;                                  // declared analyticity radius r
};

/// Material law M(d0^-1) = M0 + sum_{alpha in Pi} d0^-alpha M_alpha
///                        + d0^-1 M1 + d0^-1 M2(d0^-1)
/// over a finite-dimensional state space. Immutable after construction.
class MaterialLaw {
public:
    MaterialLaw(OperatorBlock m0, std::vector<std::pair<double, OperatorBlock>> pi,
                OperatorBlock m1, std::optional<TailSeries> tail = std::nullopt);

    Eigen::Index dim() const { return m0_.dim(); }
    const OperatorBlock& m0() const { return m0_; }
    const std::vector<std::pair<double, OperatorBlock>>& pi() const { return pi_; }
    const OperatorBlock& m1() const { return m1_; }
    const std::optional<TailSeries>& tail() const { return tail_; }

    /// True when every coefficient block is real-valued (enables the conjugate
    /// frequency-mirroring fast path in the solver).
    bool real_coefficients() const;

private:
    OperatorBlock m0_;
    std::vector<std::pair<double, OperatorBlock>> pi_;
    OperatorBlock m1_;
    std::optional<TailSeries> tail_;
};

/// Evaluates M(z) = m0 + sum_alpha z^alpha M_alpha + z*m1 + z*sum_gamma z^gamma C_gamma.
/// Admissible z: Re(1/z) > 0; with a tail attached, |z| must stay inside the
/// declared convergence disk |z| < 2r.
Eigen::MatrixXcd material_symbol(const MaterialLaw& law, std::complex<double> z);

/// Fractional Fokker-Planck material: M_alpha = [[kappa,0],[0,0]],
/// M1 = [[mu00,mu01],[mu10,mu11]], M0 = 0, Pi = {alpha}. kappa and Re(mu11)
/// must be strictly positive definite; the off-diagonal drift couplings are
/// rectangular when the two block components differ in size. alpha = 0 is the
/// degenerate classical case (kappa moves into M0 and Pi is empty).
MaterialLaw fokker_planck_material(const OperatorBlock& kappa_alpha,
                                   const OperatorBlock& mu00, const Eigen::MatrixXcd& mu01,
                                   const Eigen::MatrixXcd& mu10, const OperatorBlock& mu11,
                                   double alpha);

/// Kelvin-Voigt construction output: the law plus the constants of the
/// truncation estimate ||M2|| <= K0 * rho^(1-alpha-ceil(1/alpha)*alpha)
///                               * K1^ceil(1/alpha) / (1 - rho^-alpha K1).
struct KelvinVoigtResult {
    MaterialLaw law;
    double k0 = 0.0;           // ||W sqrt(D11^-1)||^2
    double k1 = 0.0;           // ||sqrt(D11^-1) C~11 sqrt(D11^-1)||
    double alpha = 0.0;
    double c0 = 0.0;           // min eig of C + D rho_threshold^alpha
    double rho_threshold = 0.0;  // smallest rho with rho^-alpha K1 <= 1/2
    int stored_tail_terms = 0;
    int first_dropped_index = -1;  // series index of the first dropped term, -1 if none

    /// Bound on the dropped part of the series at a given rho (valid when
    /// rho^-alpha * k1 < 1); zero when nothing was dropped.
    double dropped_tail_bound(double rho) const;

    /// Norm bound on the full dropped-from-ceil(1/alpha) remainder, with the
    /// exponent collapsed via 1 - ceil(1/alpha)*alpha <= 0:
    /// K0 rho^-alpha K1^ceil(1/alpha) / (1 - rho^-alpha K1).
    double m2_norm_bound(double rho) const;
};

/// Builds the Kelvin-Voigt law M = diag(eta, (C + D d0^alpha)^-1) as
/// M0 + sum_{g in Pi} d0^-g M_g + d0^-1 M1 + tail, by null/range splitting of D,
/// the Schur-complement row operation, and the Neumann series of the inverse.
/// Terms whose exponent reaches 1 fold into m1, terms beyond 1 into the tail
/// (up to tail_terms stored entries), so the MaterialLaw invariants hold while
/// the symbol is preserved.
KelvinVoigtResult kelvin_voigt_material(const OperatorBlock& eta, const OperatorBlock& c_elastic,
                                        const OperatorBlock& d_viscous, double alpha,
                                        int tail_terms = 8);

/// Frequency-wise application of the material symbol: L(result)(k) =
/// M(1/(i*lambda_k + rho)) * L(u)(k).
Signal apply_material(const MaterialLaw& law, const Signal& u);

/// Plain-text serialization: `dim = d`, `m0 = <row-major complex list>`,
/// repeated `frac <alpha> = <matrix>`, `m1 = <matrix>`, repeated
/// `tail <gamma> = <matrix>`, `radius = r`. Complex entries use the
/// std::complex "(re,im)" form; bare reals are accepted on input.
void save_material_law(std::ostream& out, const MaterialLaw& law);
void save_material_law(const std::string& path, const MaterialLaw& law);
MaterialLaw load_material_law(std::istream& in);
MaterialLaw load_material_law(const std::string& path);

namespace detail {
/// Operator 2-norm via SVD (blocks are desk-scale dense matrices).
double operator_norm(const Eigen::MatrixXcd& m);
/// Smallest eigenvalue of the Hermitian part (m + m^H)/2.
double min_eig_hermitian(const Eigen::MatrixXcd& m);
}  // namespace detail

}  // namespace evofrac
