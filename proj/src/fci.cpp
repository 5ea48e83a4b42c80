#include <bit>
#include <cstdint>
#include <vector>

#include "narg/qchem.hpp"

namespace narg {
namespace {

using Det = std::uint64_t;

// Spin-orbital 2p+s; s = 0 up, 1 down.
struct SpinOrbitalIntegrals {
    const FcidumpData &d;

    double h(int p, int q) const { return (p & 1) == (q & 1) ? d.t(p >> 1, q >> 1) : 0.0; }
    // <pq|rs> = (pr|qs)
    double coulomb(int p, int q, int r, int s) const {
        if ((p & 1) != (r & 1) || (q & 1) != (s & 1))
            return 0.0;
        return d.eri(p >> 1, r >> 1, q >> 1, s >> 1);
    }
    double anti(int p, int q, int r, int s) const { return coulomb(p, q, r, s) - coulomb(p, q, s, r); }
};

int occupied_below(Det det, int pos) { return std::popcount(det & ((Det{1} << pos) - 1)); }

// Flips occupation `pos` (creation or annihilation) and returns the
// Jordan-Wigner sign of the operator.
int apply(Det &det, int pos) {
    const int sign = (occupied_below(det, pos) & 1) ? -1 : 1;
    det ^= (Det{1} << pos);
    return sign;
}

std::vector<int> bits_of(Det det) {
    std::vector<int> out;
    while (det) {
        out.push_back(std::countr_zero(det));
        det &= det - 1;
    }
    return out;
}

double matrix_element(const SpinOrbitalIntegrals &ints, Det bra, Det ket) {
    const Det diff = bra ^ ket;
    const int degree = std::popcount(diff) / 2;
    if (degree == 0) {
        const auto occ = bits_of(ket);
        double e = 0.0;
        for (int i : occ)
            e += ints.h(i, i);
        for (int i : occ)
            for (int j : occ)
                e += 0.5 * ints.anti(i, j, i, j);
        return e;
    }
    if (degree == 1) {
        const int i = std::countr_zero(ket & diff);
        const int a = std::countr_zero(bra & diff);
        Det work = ket;
        int sign = apply(work, i);
        sign *= apply(work, a);
        double e = ints.h(a, i);
        for (int j : bits_of(ket & ~(Det{1} << i)))
            e += ints.anti(a, j, i, j);
        return sign * e;
    }
    if (degree == 2) {
        const auto holes = bits_of(ket & diff);
        const auto parts = bits_of(bra & diff);
        const int i = holes[0], j = holes[1], a = parts[0], b = parts[1];
        Det work = ket;
        int sign = apply(work, i);
        sign *= apply(work, j);
        sign *= apply(work, b);
        sign *= apply(work, a);
        return sign * ints.anti(a, b, i, j);
    }
    return 0.0;
}

std::vector<Det> strings_with(int n_orb, int n_set) {
    std::vector<Det> out;
    for (Det s = 0; s < (Det{1} << n_orb); ++s)
        if (std::popcount(s) == n_set)
            out.push_back(s);
    return out;
}

Det interleave(Det up, Det down, int n_orb) {
    Det out = 0;
    for (int p = 0; p < n_orb; ++p) {
        if (up >> p & 1)
            out |= Det{1} << (2 * p);
        if (down >> p & 1)
            out |= Det{1} << (2 * p + 1);
    }
    return out;
}

// Local matrix of the spin-orbital operator (annihilator, or its adjoint)
// acting on the 4^L Fock space with a parity string over earlier orbitals.
SparseMatrix site_operator(Index n_orb, Index orbital, int spin) {
    const Index dim = Index{1} << (2 * n_orb);
    const Matrix local = FermionSite::annihilate(spin);
    const Matrix parity = FermionSite::parity();
    SparseMatrix op(dim, dim);
    std::vector<Eigen::Triplet<double>> entries;
    for (Index col = 0; col < dim; ++col) {
        double sign = 1.0;
        for (Index q = 0; q < orbital; ++q) {
            const Index digit = (col >> (2 * (n_orb - 1 - q))) & 3;
            sign *= parity(digit, digit);
        }
        const Index shift = 2 * (n_orb - 1 - orbital);
        const Index digit = (col >> shift) & 3;
        for (Index out_digit = 0; out_digit < 4; ++out_digit) {
            const double a = local(out_digit, digit);
            if (a == 0.0)
                continue;
            const Index row = (col & ~(Index{3} << shift)) | (out_digit << shift);
            entries.emplace_back(row, col, sign * a);
        }
    }
    op.setFromTriplets(entries.begin(), entries.end());
    return op;
}

} // namespace

Matrix determinant_hamiltonian(const FcidumpData &data, Index n_up, Index n_down) {
    const int n_orb = static_cast<int>(data.n_orb);
    if (n_orb > 31)
        throw Error(ErrorCode::TooLarge, "determinant oracle supports at most 31 orbitals");
    if (n_up < 0 || n_down < 0 || n_up > n_orb || n_down > n_orb)
        throw Error(ErrorCode::InvalidCount, "electron counts out of range");
    const auto ups = strings_with(n_orb, static_cast<int>(n_up));
    const auto downs = strings_with(n_orb, static_cast<int>(n_down));
    const Index dim = static_cast<Index>(ups.size() * downs.size());
    if (dim > 10000)
        throw Error(ErrorCode::TooLarge, "determinant sector dimension " + std::to_string(dim) + " exceeds 10000");
    std::vector<Det> dets;
    dets.reserve(static_cast<std::size_t>(dim));
    for (Det u : ups)
        for (Det d : downs)
            dets.push_back(interleave(u, d, n_orb));

    const SpinOrbitalIntegrals ints{data};
    Matrix h = Matrix::Zero(dim, dim);
    for (Index r = 0; r < dim; ++r) {
        for (Index c = 0; c <= r; ++c) {
            const Det diff = dets[static_cast<std::size_t>(r)] ^ dets[static_cast<std::size_t>(c)];
            if (std::popcount(diff) > 4)
                continue;
            const double e = matrix_element(ints, dets[static_cast<std::size_t>(r)], dets[static_cast<std::size_t>(c)]);
            h(r, c) = e;
            h(c, r) = e;
        }
    }
    return h;
}

Vector fci_oracle(const FcidumpData &data, Index n_up, Index n_down, Index n_levels) {
    const Matrix h = determinant_hamiltonian(data, n_up, n_down);
    Vector e = eig_hermitian_lowest(h, std::min<Index>(std::max<Index>(n_levels, 1), h.rows())).values;
    return e.array() + data.e_core;
}

SparseMatrix fock_hamiltonian(const FcidumpData &data) {
    const Index n = data.n_orb;
    if (n > 8)
        throw Error(ErrorCode::TooLarge, "Fock-space Hamiltonian limited to 8 orbitals");
    const Index dim = Index{1} << (2 * n);
    std::vector<SparseMatrix> c;
    std::vector<SparseMatrix> cd;
    for (Index p = 0; p < n; ++p)
        for (int s = 0; s < 2; ++s) {
            c.push_back(site_operator(n, p, s));
            cd.push_back(SparseMatrix(c.back().transpose()));
        }
    SparseMatrix h(dim, dim);
    for (Index p = 0; p < n; ++p)
        for (Index q = 0; q < n; ++q) {
            if (data.t(p, q) == 0.0)
                continue;
            for (int s = 0; s < 2; ++s)
                h += data.t(p, q) * SparseMatrix(cd[static_cast<std::size_t>(2 * p + s)] * c[static_cast<std::size_t>(2 * q + s)]);
        }
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
            for (Index k = 0; k < n; ++k)
                for (Index l = 0; l < n; ++l) {
                    const double v = data.eri(i, j, k, l);
                    if (v == 0.0)
                        continue;
                    for (int s = 0; s < 2; ++s)
                        for (int t = 0; t < 2; ++t) {
                            const auto x = static_cast<std::size_t>(2 * i + s), y = static_cast<std::size_t>(2 * k + t);
                            const auto z = static_cast<std::size_t>(2 * l + t), w = static_cast<std::size_t>(2 * j + s);
                            SparseMatrix left = cd[x] * cd[y];
                            SparseMatrix right = c[z] * c[w];
                            h += (0.5 * v) * SparseMatrix(left * right);
                        }
                }
    h.prune(0.0);
    return h;
}

SparseMatrix fock_number(const FcidumpData &data, int spin) {
    const Index n = data.n_orb;
    if (n > 8)
        throw Error(ErrorCode::TooLarge, "Fock-space operators limited to 8 orbitals");
    const Index dim = Index{1} << (2 * n);
    SparseMatrix out(dim, dim);
    for (Index p = 0; p < n; ++p) {
        const SparseMatrix cp = site_operator(n, p, spin);
        out += SparseMatrix(SparseMatrix(cp.transpose()) * cp);
    }
    return out;
}

} // namespace narg
