#include <algorithm>
#include <array>
#include <map>
#include <tuple>

#include "narg/qchem.hpp"

namespace narg {
namespace {

struct FermionOp {
    Index spin_orbital;
    bool dagger;
};

// One normal-ordered product with its block part moved to the left:
// coefficient * (block ops ... P^m) (x) (site ops ...).
struct MixedTerm {
    std::vector<FermionOp> prefix; // block ops except the last
    FermionOp last;
    bool with_parity;              // odd number of site ops
    std::string site_key;
    double coefficient;
};

std::string site_key_of(const std::vector<FermionOp> &ops, Index first_site) {
    std::string key;
    for (const auto &op : ops) {
        key += static_cast<char>('0' + (op.spin_orbital - first_site));
        key += op.dagger ? '+' : '-';
    }
    return key;
}

Matrix site_product(const std::vector<FermionOp> &ops, Index first_site) {
    Matrix y = Matrix::Identity(4, 4);
    for (const auto &op : ops) {
        const Matrix a = FermionSite::annihilate(static_cast<int>(op.spin_orbital - first_site));
        y = y * (op.dagger ? Matrix(a.transpose()) : a);
    }
    return y;
}

const Matrix &block_op(const BlockState &block, const std::string &name) {
    auto it = block.ops.find(name);
    if (it == block.ops.end())
        throw Error(ErrorCode::MissingRenormalizedOperator, "block lacks " + name);
    return it->second;
}

Matrix block_matrix(const BlockState &block, const FermionOp &op) {
    const Matrix &c = block_op(block, c_name(op.spin_orbital));
    return op.dagger ? Matrix(c.transpose()) : c;
}

// c P or c+ P; the second uses c+ P = -(c P)^T.
Matrix block_matrix_with_parity(const BlockState &block, const FermionOp &op) {
    const Matrix &cp = block_op(block, c_parity_name(op.spin_orbital));
    return op.dagger ? Matrix(-cp.transpose()) : cp;
}

std::string mix_name(int bra, int ket) {
    return "mix_" + std::to_string(bra) + std::to_string(ket);
}

} // namespace

Matrix FermionSite::annihilate(int spin) {
    Matrix a = Matrix::Zero(4, 4);
    if (spin == 0) {
        a(0, 1) = 1.0; // |up> -> |0>
        a(2, 3) = 1.0; // |updn> -> |dn>
    } else {
        a(0, 2) = 1.0;  // |dn> -> |0>
        a(1, 3) = -1.0; // |updn> -> -|up>
    }
    return a;
}

Matrix FermionSite::number(int spin) {
    const Matrix a = annihilate(spin);
    return a.transpose() * a;
}

Matrix FermionSite::parity() { return Vector{{1.0, -1.0, -1.0, 1.0}}.asDiagonal(); }

std::string c_name(Index spin_orbital) { return "c_" + std::to_string(spin_orbital); }
std::string c_parity_name(Index spin_orbital) { return "cP_" + std::to_string(spin_orbital); }

ScaleSite make_fermion_site(const FcidumpData &data, const Matrix &one_body, Index s,
                            const BlockState &block) {
    if (s < 0 || s >= data.n_orb)
        throw Error(ErrorCode::IndexOutOfRange, "orbital " + std::to_string(s) + " does not exist");
    const Index first_site = 2 * s;
    Matrix site_local = Matrix::Zero(4, 4);
    std::vector<MixedTerm> mixed;

    auto add = [&](double coefficient, std::vector<FermionOp> ops) {
        std::vector<FermionOp> block_ops, site_ops;
        int swaps = 0;
        for (const auto &op : ops) {
            if (op.spin_orbital >= first_site) {
                site_ops.push_back(op);
            } else {
                swaps += static_cast<int>(site_ops.size());
                block_ops.push_back(op);
            }
        }
        if (swaps % 2)
            coefficient = -coefficient;
        if (block_ops.empty()) {
            site_local += coefficient * site_product(site_ops, first_site);
            return;
        }
        MixedTerm term;
        term.last = block_ops.back();
        block_ops.pop_back();
        term.prefix = std::move(block_ops);
        term.with_parity = site_ops.size() % 2 == 1;
        term.site_key = site_key_of(site_ops, first_site);
        term.coefficient = coefficient;
        mixed.push_back(std::move(term));
    };

    // Every term of H with all orbital indices <= s and at least one == s.
    for (Index p = 0; p <= s; ++p)
        for (Index q = 0; q <= s; ++q) {
            if ((p != s && q != s) || one_body(p, q) == 0.0)
                continue;
            for (Index spin = 0; spin < 2; ++spin)
                add(one_body(p, q), {{2 * p + spin, true}, {2 * q + spin, false}});
        }
    for (Index i = 0; i <= s; ++i)
        for (Index j = 0; j <= s; ++j)
            for (Index k = 0; k <= s; ++k)
                for (Index l = 0; l <= s; ++l) {
                    if (i != s && j != s && k != s && l != s)
                        continue;
                    const double v = data.eri(i, j, k, l);
                    if (v == 0.0)
                        continue;
                    for (Index sg = 0; sg < 2; ++sg)
                        for (Index tau = 0; tau < 2; ++tau) {
                            const Index x = 2 * i + sg, y = 2 * k + tau, z = 2 * l + tau, w = 2 * j + sg;
                            if (x == y || z == w)
                                continue;
                            add(0.5 * v, {{x, true}, {y, true}, {z, false}, {w, false}});
                        }
                }

    // Group by prefix so each prefix product is formed once.
    std::sort(mixed.begin(), mixed.end(), [](const MixedTerm &a, const MixedTerm &b) {
        auto key = [](const MixedTerm &t) {
            std::vector<std::pair<Index, bool>> k;
            for (const auto &op : t.prefix)
                k.emplace_back(op.spin_orbital, op.dagger);
            return k;
        };
        return std::make_tuple(a.prefix.size(), key(a), a.site_key) <
               std::make_tuple(b.prefix.size(), key(b), b.site_key);
    });

    const Index dim = block.dim();
    std::array<std::array<Matrix, 4>, 4> coupling;
    std::array<std::array<bool, 4>, 4> used{};
    for (auto &row : coupling)
        for (auto &m : row)
            m = Matrix::Zero(dim, dim);

    auto same_prefix = [](const MixedTerm &a, const MixedTerm &b) {
        if (a.prefix.size() != b.prefix.size())
            return false;
        for (std::size_t q = 0; q < a.prefix.size(); ++q)
            if (a.prefix[q].spin_orbital != b.prefix[q].spin_orbital || a.prefix[q].dagger != b.prefix[q].dagger)
                return false;
        return true;
    };

    std::size_t start = 0;
    while (start < mixed.size()) {
        std::size_t stop = start;
        while (stop < mixed.size() && same_prefix(mixed[start], mixed[stop]))
            ++stop;
        Matrix prefix = Matrix::Identity(dim, dim);
        for (const auto &op : mixed[start].prefix)
            prefix = prefix * block_matrix(block, op);
        const bool trivial_prefix = mixed[start].prefix.empty();

        std::size_t group = start;
        while (group < stop) {
            const std::string &key = mixed[group].site_key;
            Matrix sum = Matrix::Zero(dim, dim);
            std::size_t end = group;
            for (; end < stop && mixed[end].site_key == key; ++end) {
                const MixedTerm &t = mixed[end];
                sum += t.coefficient * (t.with_parity ? block_matrix_with_parity(block, t.last)
                                                      : block_matrix(block, t.last));
            }
            const Matrix product = trivial_prefix ? sum : Matrix(prefix * sum);
            std::vector<FermionOp> site_ops;
            for (std::size_t q = 0; q < key.size(); q += 2)
                site_ops.push_back({first_site + (key[q] - '0'), key[q + 1] == '+'});
            const Matrix y = site_product(site_ops, first_site);
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b)
                    if (y(a, b) != 0.0) {
                        coupling[a][b] += y(a, b) * product;
                        used[a][b] = true;
                    }
            group = end;
        }
        start = stop;
    }

    ScaleSite site;
    site.n_config = 4;
    site.diagonal_energy = site_local.diagonal();
    Matrix local_offdiag = site_local;
    local_offdiag.diagonal().setZero();
    if (local_offdiag.cwiseAbs().maxCoeff() > 0.0)
        site.couplings.push_back({local_offdiag, kIdentity});

    // The exact coupling satisfies B(b,a) = B(a,b)^T; products of truncated
    // operators only do so approximately, so the pair is averaged.
    for (int a = 0; a < 4; ++a) {
        for (int b = a; b < 4; ++b) {
            if (!used[a][b] && !used[b][a])
                continue;
            const Matrix sym = 0.5 * (coupling[a][b] + coupling[b][a].transpose());
            if (sym.cwiseAbs().maxCoeff() == 0.0)
                continue;
            if (a == b) {
                Vector w = Vector::Zero(4);
                w(a) = 1.0;
                site.local_ops[mix_name(a, a)] = sym;
                site.block_terms.push_back({w, mix_name(a, a)});
                continue;
            }
            Matrix unit = Matrix::Zero(4, 4);
            unit(a, b) = 1.0;
            site.local_ops[mix_name(a, b)] = sym;
            site.couplings.push_back({unit, mix_name(a, b)});
            unit.setZero();
            unit(b, a) = 1.0;
            site.local_ops[mix_name(b, a)] = sym.transpose();
            site.couplings.push_back({unit, mix_name(b, a)});
        }
    }
    return site;
}

OpSpecs fermion_op_specs(const BlockState &block, Index s) {
    const Matrix id = Matrix::Identity(4, 4);
    const Matrix p = FermionSite::parity();
    OpSpecs specs;
    for (Index x = 0; x < 2 * s; ++x) {
        if (!block.ops.contains(c_name(x)))
            throw Error(ErrorCode::MissingRenormalizedOperator, "block lacks " + c_name(x));
        specs[c_name(x)] = {{1.0, c_name(x), id}};
        specs[c_parity_name(x)] = {{1.0, c_parity_name(x), p}};
    }
    for (int spin = 0; spin < 2; ++spin) {
        const Matrix a = FermionSite::annihilate(spin);
        specs[c_name(2 * s + spin)] = {{1.0, "P", a}};
        specs[c_parity_name(2 * s + spin)] = {{1.0, kIdentity, a * p}};
    }
    specs["P"] = {{1.0, "P", p}};
    specs["N_up"] = {{1.0, "N_up", id}, {1.0, kIdentity, FermionSite::number(0)}};
    specs["N_down"] = {{1.0, "N_down", id}, {1.0, kIdentity, FermionSite::number(1)}};
    return specs;
}

} // namespace narg
