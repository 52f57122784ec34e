// hilbert.hpp: operators on the (4-level QD) x (truncated Fock) space
//
// Basis ordering: QD index major, photon number minor, i.e. the composite
// index of |s> (x) |n> is s * (n_max + 1) + n with s in {g, X, Y, XX}.

#pragma once

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

namespace qdstirap {

using cd = std::complex<double>;
using Operator = Eigen::MatrixXcd;

enum class QdLevel : int { G = 0, X = 1, Y = 2, XX = 3 };

inline constexpr int kQdLevels = 4;

/// Dyads and cavity-mode operators for a fixed Fock truncation.
class Basis {
public:
    explicit Basis(int n_max);

    int n_max() const { return n_max_; }
    int dim() const { return dim_; }
    int index(QdLevel s, int n) const { return static_cast<int>(s) * (n_max_ + 1) + n; }

    /// |i><j| (x) 1_cavity.
    const Operator& dyad(QdLevel i, QdLevel j) const {
        return dyads_[static_cast<int>(i) * kQdLevels + static_cast<int>(j)];
    }
    const Operator& projector(QdLevel s) const { return dyad(s, s); }

    const Operator& a() const { return a_; }
    const Operator& adag() const { return adag_; }
    const Operator& number() const { return number_; }
    const Operator& identity() const { return identity_; }

    /// 1_QD (x) |n><m|.
    Operator fock_dyad(int n, int m) const;

    /// |s, n><s, n| as a density matrix.
    Operator pure_state(QdLevel s, int n) const;

private:
    int n_max_;
    int dim_;
    Operator dyads_[kQdLevels * kQdLevels];
    Operator a_;
    Operator adag_;
    Operator number_;
    Operator identity_;
};

/// A density matrix tagged with its time (ns).
struct DensityMatrix {
    Operator rho;
    double t = 0.0;
};

/// Tr(op * rho). Throws std::invalid_argument on a dimension mismatch.
cd expectation(const Operator& rho, const Operator& op);
inline cd expectation(const DensityMatrix& state, const Operator& op) { return expectation(state.rho, op); }

/// max |A - A^dagger| elementwise.
double hermiticity_error(const Operator& a);

/// Column-stacked vectorisation and its inverse.
Eigen::VectorXcd vec(const Operator& a);
Operator unvec(const Eigen::Ref<const Eigen::VectorXcd>& v, int dim);

} // namespace qdstirap
