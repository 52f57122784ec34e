#include "qdstirap/hilbert.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

namespace qdstirap {

Basis::Basis(int n_max) : n_max_(n_max), dim_(kQdLevels * (n_max + 1)) {
    if (n_max < 1) throw std::invalid_argument("Basis: n_max must be >= 1");
    const int nf = n_max + 1;
    const Eigen::MatrixXcd fock_id = Eigen::MatrixXcd::Identity(nf, nf);
    for (int i = 0; i < kQdLevels; ++i) {
        for (int j = 0; j < kQdLevels; ++j) {
            Eigen::MatrixXcd qd = Eigen::MatrixXcd::Zero(kQdLevels, kQdLevels);
            qd(i, j) = 1.0;
            dyads_[i * kQdLevels + j] = Eigen::kroneckerProduct(qd, fock_id);
        }
    }
    Eigen::MatrixXcd a_f = Eigen::MatrixXcd::Zero(nf, nf);
    for (int n = 1; n < nf; ++n) a_f(n - 1, n) = std::sqrt(static_cast<double>(n));
    const Eigen::MatrixXcd qd_id = Eigen::MatrixXcd::Identity(kQdLevels, kQdLevels);
    a_ = Eigen::kroneckerProduct(qd_id, a_f);
    adag_ = a_.adjoint();
    number_ = adag_ * a_;
    identity_ = Operator::Identity(dim_, dim_);
}

Operator Basis::fock_dyad(int n, int m) const {
    Operator out = Operator::Zero(dim_, dim_);
    for (int s = 0; s < kQdLevels; ++s) out(s * (n_max_ + 1) + n, s * (n_max_ + 1) + m) = 1.0;
    return out;
}

Operator Basis::pure_state(QdLevel s, int n) const {
    Operator out = Operator::Zero(dim_, dim_);
    out(index(s, n), index(s, n)) = 1.0;
    return out;
}

cd expectation(const Operator& rho, const Operator& op) {
    if (rho.rows() != op.rows() || rho.cols() != op.cols() || rho.rows() != rho.cols()) {
        throw std::invalid_argument("expectation: dimension mismatch (" + std::to_string(rho.rows()) + " vs " +
                                    std::to_string(op.rows()) + ")");
    }
    // Tr(op rho) = sum_ij op_ij rho_ji
    return (op.transpose().array() * rho.array()).sum();
}

double hermiticity_error(const Operator& a) { return (a - a.adjoint()).cwiseAbs().maxCoeff(); }

Eigen::VectorXcd vec(const Operator& a) {
    return Eigen::Map<const Eigen::VectorXcd>(a.data(), a.size());
}

Operator unvec(const Eigen::Ref<const Eigen::VectorXcd>& v, int dim) {
    Operator out(dim, dim);
    for (int c = 0; c < dim; ++c) out.col(c) = v.segment(static_cast<Eigen::Index>(c) * dim, dim);
    return out;
}

} // namespace qdstirap
