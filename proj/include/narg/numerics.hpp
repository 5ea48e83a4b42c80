#pragma once

#include <complex>
#include <span>

#include <Eigen/Dense>

#include "narg/error.hpp"

namespace narg {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;

/// Eigenvalues in ascending order with their column-orthonormal eigenvectors.
template <typename Scalar> struct EigenPairsT {
    Vector values;
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> vectors;

    Index size() const { return values.size(); }
};

using EigenPairs = EigenPairsT<double>;
using ComplexEigenPairs = EigenPairsT<std::complex<double>>;

// Relative tolerance for the Hermiticity precondition.
inline constexpr double kHermitianTolerance = 1e-10;
// Eigenvalues closer than this (relative to max(1, |E|)) count as degenerate.
inline constexpr double kDegeneracyGap = 1e-9;

/// max |M - M^H| / max(1, max |M|).
double hermiticity_defect(const Matrix &m);
double hermiticity_defect(const ComplexMatrix &m);

/// Full spectrum of a real-symmetric matrix.
///
/// Each eigenvector's sign is fixed so that its largest-magnitude component
/// (lowest row on ties) is positive, so identical input gives identical output.
/// Throws NonFinite, NonHermitian, DimensionMismatch (non-square).
EigenPairs eig_hermitian(const Matrix &m);
ComplexEigenPairs eig_hermitian(const ComplexMatrix &m);

// Eigen expressions convert to both matrix types; evaluate by scalar type.
template <typename Derived> auto eig_hermitian(const Eigen::MatrixBase<Derived> &m) {
    if constexpr (Eigen::NumTraits<typename Derived::Scalar>::IsComplex)
        return eig_hermitian(ComplexMatrix(m));
    else
        return eig_hermitian(Matrix(m));
}
template <typename Derived> double hermiticity_defect(const Eigen::MatrixBase<Derived> &m) {
    if constexpr (Eigen::NumTraits<typename Derived::Scalar>::IsComplex)
        return hermiticity_defect(ComplexMatrix(m));
    else
        return hermiticity_defect(Matrix(m));
}

/// The `count` lowest eigenpairs, computed without the full spectrum.
EigenPairs eig_hermitian_lowest(const Matrix &m, Index count);

/// Keeps the `d_retain` lowest pairs. Ties at the cutoff go to the lower
/// original column. With `close_multiplets`, the cut is moved up until it no
/// longer splits a multiplet (gap < kDegeneracyGap).
EigenPairs truncate_low(const EigenPairs &pairs, Index d_retain,
                        bool close_multiplets = false);

/// Rotates every degenerate cluster of `pairs` so the eigenvectors also
/// diagonalize each of `commuting_ops` (given in the row basis of
/// pairs.vectors), applied in sequence. Clusters split by earlier operators
/// are refined by later ones.
void resolve_degeneracies(EigenPairs &pairs, std::span<const Matrix> commuting_ops);

/// Sign convention used by eig_hermitian, exposed for callers that rotate
/// eigenvectors afterwards.
void fix_column_signs(Matrix &vectors);

} // namespace narg
