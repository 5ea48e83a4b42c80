#include "narg/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <lapacke.h>

namespace narg {
namespace {

template <typename M> void check_input(const M &m) {
    if (m.rows() != m.cols())
        throw Error(ErrorCode::DimensionMismatch,
                    "eigensolver needs a square matrix, got " + std::to_string(m.rows()) +
                        "x" + std::to_string(m.cols()));
    if (!m.allFinite())
        throw Error(ErrorCode::NonFinite, "matrix has NaN or Inf entries");
    double defect = hermiticity_defect(m);
    if (defect > kHermitianTolerance)
        throw Error(ErrorCode::NonHermitian,
                    "relative asymmetry " + std::to_string(defect));
}

template <typename M> double defect_impl(const M &m) {
    if (m.size() == 0)
        return 0.0;
    double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    return (m - m.adjoint()).cwiseAbs().maxCoeff() / scale;
}

double degeneracy_tol(double value) { return kDegeneracyGap * std::max(1.0, std::abs(value)); }

EigenPairs run_dsyevr(const Matrix &m, Index count) {
    const Index n = m.rows();
    EigenPairs out;
    if (n == 0) {
        out.values.resize(0);
        out.vectors.resize(0, 0);
        return out;
    }
    Matrix a = 0.5 * (m + m.transpose());
    Vector w(n);
    Matrix z(n, count);
    std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(n));
    lapack_int found = 0;
    const char range = count == n ? 'A' : 'I';
    lapack_int info = LAPACKE_dsyevr(
        LAPACK_COL_MAJOR, 'V', range, 'U', static_cast<lapack_int>(n), a.data(),
        static_cast<lapack_int>(n), 0.0, 0.0, 1, static_cast<lapack_int>(count), 0.0, &found,
        w.data(), z.data(), static_cast<lapack_int>(n), isuppz.data());
    if (info != 0 || found != count)
        throw Error(ErrorCode::NonFinite, "dsyevr failed with info " + std::to_string(info));
    out.values = w.head(count);
    out.vectors = std::move(z);
    fix_column_signs(out.vectors);
    return out;
}

} // namespace

double hermiticity_defect(const Matrix &m) { return defect_impl(m); }
double hermiticity_defect(const ComplexMatrix &m) { return defect_impl(m); }

void fix_column_signs(Matrix &vectors) {
    for (Index c = 0; c < vectors.cols(); ++c) {
        auto col = vectors.col(c);
        if (col.size() == 0)
            continue;
        double biggest = col.cwiseAbs().maxCoeff();
        for (Index r = 0; r < col.size(); ++r) {
            if (std::abs(col(r)) >= biggest * (1.0 - 1e-8)) {
                if (col(r) < 0)
                    col = -col;
                break;
            }
        }
    }
}

EigenPairs eig_hermitian(const Matrix &m) {
    check_input(m);
    return run_dsyevr(m, m.rows());
}

ComplexEigenPairs eig_hermitian(const ComplexMatrix &m) {
    check_input(m);
    const Index n = m.rows();
    ComplexEigenPairs out;
    if (n == 0)
        return out;
    ComplexMatrix a = 0.5 * (m + m.adjoint());
    Vector w(n);
    ComplexMatrix z(n, n);
    std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(n));
    lapack_int found = 0;
    lapack_int info = LAPACKE_zheevr(
        LAPACK_COL_MAJOR, 'V', 'A', 'U', static_cast<lapack_int>(n),
        reinterpret_cast<lapack_complex_double *>(a.data()), static_cast<lapack_int>(n), 0.0,
        0.0, 0, 0, 0.0, &found, w.data(), reinterpret_cast<lapack_complex_double *>(z.data()),
        static_cast<lapack_int>(n), isuppz.data());
    if (info != 0)
        throw Error(ErrorCode::NonFinite, "zheevr failed with info " + std::to_string(info));
    // Phase convention: largest component real positive.
    for (Index c = 0; c < n; ++c) {
        Index arg = 0;
        z.col(c).cwiseAbs().maxCoeff(&arg);
        std::complex<double> p = z(arg, c);
        z.col(c) *= std::conj(p) / std::abs(p);
    }
    out.values = w;
    out.vectors = std::move(z);
    return out;
}

EigenPairs eig_hermitian_lowest(const Matrix &m, Index count) {
    check_input(m);
    if (count < 1 || count > m.rows())
        throw Error(ErrorCode::InvalidCount, "requested " + std::to_string(count) +
                                                 " eigenpairs of a " +
                                                 std::to_string(m.rows()) + "-dim matrix");
    return run_dsyevr(m, count);
}

EigenPairs truncate_low(const EigenPairs &pairs, Index d_retain, bool close_multiplets) {
    const Index n = pairs.size();
    if (d_retain < 1 || d_retain > n)
        throw Error(ErrorCode::InvalidCount, "cannot retain " + std::to_string(d_retain) +
                                                 " of " + std::to_string(n) + " states");
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return pairs.values(a) < pairs.values(b); });
    Index keep = d_retain;
    if (close_multiplets) {
        while (keep < n) {
            double last = pairs.values(order[keep - 1]);
            double next = pairs.values(order[keep]);
            if (next - last >= degeneracy_tol(last))
                break;
            ++keep;
        }
    }
    EigenPairs out;
    out.values.resize(keep);
    out.vectors.resize(pairs.vectors.rows(), keep);
    for (Index k = 0; k < keep; ++k) {
        out.values(k) = pairs.values(order[k]);
        out.vectors.col(k) = pairs.vectors.col(order[k]);
    }
    return out;
}

void resolve_degeneracies(EigenPairs &pairs, std::span<const Matrix> commuting_ops) {
    const Index n = pairs.size();
    if (n < 2 || commuting_ops.empty())
        return;
    // labels[k] holds the eigenvalues of the operators processed so far.
    std::vector<std::vector<double>> labels(static_cast<std::size_t>(n));
    for (const Matrix &op : commuting_ops) {
        if (op.rows() != pairs.vectors.rows() || op.cols() != pairs.vectors.rows())
            throw Error(ErrorCode::DimensionMismatch, "degeneracy resolver has wrong shape");
        Index start = 0;
        while (start < n) {
            Index stop = start + 1;
            while (stop < n &&
                   pairs.values(stop) - pairs.values(stop - 1) <
                       degeneracy_tol(pairs.values(stop - 1))) {
                bool same = true;
                for (std::size_t q = 0; q < labels[stop].size(); ++q)
                    same = same && std::abs(labels[stop][q] - labels[start][q]) < 1e-8;
                if (!same)
                    break;
                ++stop;
            }
            const Index width = stop - start;
            auto block = pairs.vectors.middleCols(start, width);
            Matrix restricted = block.transpose() * op * block;
            restricted = 0.5 * (restricted + restricted.transpose());
            if (width == 1) {
                labels[start].push_back(restricted(0, 0));
            } else {
                Eigen::SelfAdjointEigenSolver<Matrix> solver(restricted);
                Matrix rotated = block * solver.eigenvectors();
                block = rotated;
                for (Index k = 0; k < width; ++k)
                    labels[start + k].push_back(solver.eigenvalues()(k));
            }
            start = stop;
        }
    }
    fix_column_signs(pairs.vectors);
}

} // namespace narg
