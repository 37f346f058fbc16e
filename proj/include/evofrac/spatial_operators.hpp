#pragma once

#include <Eigen/Dense>

#include <utility>

namespace evofrac {

/// Discrete skew-symmetric spatial block operator, the stand-in for the
/// skew-selfadjoint A. block_dims records the (node, cell) partition of the
/// off-diagonal block structure [[0, B],[C, 0]].
class SkewOperator {
public:
    SkewOperator(Eigen::MatrixXd entries, std::pair<Eigen::Index, Eigen::Index> block_dims);

    const Eigen::MatrixXd& entries() const { return entries_; }
    Eigen::Index dim() const { return entries_.rows(); }
    std::pair<Eigen::Index, Eigen::Index> block_dims() const { return block_dims_; }

    /// Zero operator convenience (pure material-law problems).
    static SkewOperator zero(Eigen::Index dim);

private:
    Eigen::MatrixXd entries_;
    std::pair<Eigen::Index, Eigen::Index> block_dims_;
};

/// Staggered-grid [[0, div],[grad, 0]] on (0, n_cells*h): grad maps the
/// n_cells-1 interior node values (homogeneous Dirichlet) to n_cells cell
/// fluxes by forward differences / h, and div = -grad^T, so skewness is exact.
SkewOperator build_grad_div_1d(int n_cells, double h);

/// Elastic variant [[0, -div],[-grad, 0]]: both off-diagonal blocks of
/// build_grad_div_1d negated.
SkewOperator build_elasticity_1d(int n_cells, double h);

/// Max-norm skewness defect ||A + A^T||_max of a raw matrix.
double skewness_defect(const Eigen::MatrixXd& a);
double skewness_defect(const SkewOperator& a);

}  // namespace evofrac
