#include "evofrac/spatial_operators.hpp"

#include <stdexcept>

namespace evofrac {

SkewOperator::SkewOperator(Eigen::MatrixXd entries,
                           std::pair<Eigen::Index, Eigen::Index> block_dims)
    : entries_(std::move(entries)), block_dims_(block_dims) {
    if (entries_.rows() != entries_.cols()) {
        throw std::invalid_argument("SkewOperator: matrix must be square");
    }
    if (block_dims_.first + block_dims_.second != entries_.rows()) {
        throw std::invalid_argument("SkewOperator: block partition must sum to the dimension");
    }
    const double scale = entries_.norm();
    if ((entries_ + entries_.transpose()).norm() > 1e-12 * scale) {
        throw std::invalid_argument("SkewOperator: matrix is not skew-symmetric");
    }
}

SkewOperator SkewOperator::zero(Eigen::Index dim) {
    return SkewOperator(Eigen::MatrixXd::Zero(dim, dim), {dim, 0});
}

SkewOperator build_grad_div_1d(int n_cells, double h) {
    if (n_cells < 2) throw std::invalid_argument("build_grad_div_1d: n_cells must be >= 2");
    if (!(h > 0.0)) throw std::invalid_argument("build_grad_div_1d: h must be positive");

    const Eigen::Index nodes = n_cells - 1;
    const Eigen::Index cells = n_cells;
    // grad on cell i: (u_i - u_{i-1}) / h with u_0 = u_{n_cells} = 0.
    Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(cells, nodes);
    for (Eigen::Index cell = 0; cell < cells; ++cell) {
        if (cell < nodes) grad(cell, cell) = 1.0 / h;
        if (cell >= 1) grad(cell, cell - 1) = -1.0 / h;
    }
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(nodes + cells, nodes + cells);
    a.topRightCorner(nodes, cells) = -grad.transpose();  // div
    a.bottomLeftCorner(cells, nodes) = grad;
    return SkewOperator(std::move(a), {nodes, cells});
}

SkewOperator build_elasticity_1d(int n_cells, double h) {
    SkewOperator base = build_grad_div_1d(n_cells, h);
    return SkewOperator(-base.entries(), base.block_dims());
}

double skewness_defect(const Eigen::MatrixXd& a) {
    if (a.size() == 0) return 0.0;
    return (a + a.transpose()).cwiseAbs().maxCoeff();
}

double skewness_defect(const SkewOperator& a) { return skewness_defect(a.entries()); }

}  // namespace evofrac
