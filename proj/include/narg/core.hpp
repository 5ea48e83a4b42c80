#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "narg/numerics.hpp"

namespace narg {

/// Operator handle that resolves to the identity on the block.
inline const std::string kIdentity = "identity";

/// Configuration-diagonal block coupling: sum_n weights(n) |n><n| (x) O.
struct BlockTerm {
    Vector weights;
    std::string op;
};

/// Coupling that changes the configuration: site_matrix (x) O.
struct SiteCoupling {
    Matrix site_matrix;
    std::string op;
};

/// One new scale to be added to the block: N slow configurations, the
/// configuration-diagonal part that enters each adiabatic problem, and the
/// configuration-changing couplings that enter the superblock.
///
/// Operator handles name an entry of BlockState::ops, an entry of
/// `local_ops` (composite block operators built for this site only) or
/// kIdentity.
struct ScaleSite {
    Index n_config = 0;
    Vector diagonal_energy;
    std::vector<BlockTerm> block_terms;
    std::vector<SiteCoupling> couplings;
    std::map<std::string, Matrix> local_ops;
};

/// Raw output of one step, kept for tensor-network export: the adiabatic
/// rotation C(n) of every configuration (block dim x adiabatic dim) and the
/// retained superblock eigenvectors (N * adiabatic dim x retained dim).
struct StepRecord {
    std::vector<Matrix> rotations;
    Matrix eigenvectors;

    Index n_config() const { return static_cast<Index>(rotations.size()); }
    Index adiabatic_dim() const { return rotations.empty() ? 0 : rotations.front().cols(); }
};

/// Retained basis of every scale processed so far. In this basis the block
/// Hamiltonian is diag(energies).
struct BlockState {
    Vector energies;
    std::map<std::string, Matrix> ops;
    std::vector<StepRecord> log;

    Index dim() const { return energies.size(); }

    /// One-dimensional block with energy 0 and no operators: the starting
    /// point before any scale is added.
    static BlockState trivial();
};

/// Dressed cross-configuration matrices A(m,n) = C(m)^T O C(n). Blocks outside
/// the requested mask are left empty.
struct OverlapBlock {
    std::string operator_name;
    Index n_config = 0;
    std::vector<Matrix> blocks;
    std::vector<char> present;

    bool has(Index m, Index n) const { return present[static_cast<std::size_t>(m * n_config + n)] != 0; }
    const Matrix &at(Index m, Index n) const;
};

/// One term of an operator to be carried into the next block:
/// coefficient * (site_matrix (x) block_op).
struct OpTerm {
    double coefficient = 1.0;
    std::string block_op;
    Matrix site_matrix;
};
using OpSpec = std::vector<OpTerm>;
using OpSpecs = std::map<std::string, OpSpec>;

/// Restriction of the final superblock to states where `op` has eigenvalue
/// `value` (the superblock basis must diagonalize `op`).
struct SectorConstraint {
    OpSpec op;
    double value = 0.0;
};

struct StepOptions {
    Index d_adiabatic = 0; ///< clamped to the block dimension
    Index d_retain = 0;    ///< clamped to the superblock dimension
    bool close_multiplets = false;
    /// Block operators commuting with every adiabatic Hamiltonian; used to
    /// pick a reproducible basis inside degenerate adiabatic multiplets.
    std::vector<std::string> block_resolvers;
    /// Same for superblock eigenvectors, as operators on the new block.
    std::vector<OpSpec> superblock_resolvers;
    std::vector<SectorConstraint> sector;
};

/// Called before each step with the incoming block, the site and the options.
using StepObserver =
    std::function<void(const BlockState &, const ScaleSite &, const StepOptions &)>;

/// Resolves a handle against the block and the site's local operators.
/// Returns nullptr for kIdentity. Throws UnknownOperator.
const Matrix *resolve_operator(const BlockState &block, const ScaleSite &site,
                               const std::string &name);

/// Per-configuration Hamiltonian diag(E) + sum_t w_t(n) O_t + V(n).
Matrix adiabatic_hamiltonian(const BlockState &block, const ScaleSite &site, Index n);

/// Diagonalizes every adiabatic Hamiltonian and keeps its d_adiabatic lowest
/// states. Results are in configuration order.
std::vector<EigenPairs> adiabatic_solve(const BlockState &block, const ScaleSite &site,
                                        Index d_adiabatic,
                                        std::span<const std::string> resolvers = {});

/// A(m,n) = rotations[m]^T * op * rotations[n]; op == nullptr means identity.
/// `mask` (row-major n x n) selects which blocks to compute; default all.
OverlapBlock overlap_dressed(std::span<const Matrix> rotations, const Matrix *op,
                             const std::string &name, const std::vector<char> *mask = nullptr);

/// H_{m b, n a} = sum_c o_c(m,n) A_c(m,n)_{ba} + E_{n a} delta_mn delta_ba,
/// with dressed[c] belonging to site.couplings[c].
/// Throws DimensionMismatch, NonHermitianResult.
Matrix superblock_assemble(const ScaleSite &site, std::span<const EigenPairs> adiabatic,
                           std::span<const OverlapBlock> dressed);

/// Matrix of an operator spec in the superblock basis {C(n)_b (x) |n>}.
Matrix dressed_operator(const BlockState &block, const ScaleSite &site,
                        std::span<const Matrix> rotations, const OpSpec &spec);

/// U^T O' U for every spec, where O' is the spec in the superblock basis and
/// U the retained superblock eigenvectors.
std::map<std::string, Matrix> renormalize_operators(const BlockState &block,
                                                    const ScaleSite &site,
                                                    std::span<const Matrix> rotations,
                                                    const Matrix &superblock_vectors,
                                                    const OpSpecs &op_specs);

/// One full coarse-graining step: adiabatic solve, dressed overlaps,
/// superblock assembly, diagonalization, truncation and operator
/// renormalization. Appends a StepRecord to the returned block's log.
BlockState narg_step(const BlockState &block, const ScaleSite &site, const StepOptions &options,
                     const OpSpecs &op_specs);

/// Finite-difference metric g_a = (1 - |<phi_a(x)|phi_a(x+dx)>|^2) / dx^2 for
/// each state a, from the adiabatic rotations at two neighbouring points.
Vector geometric_diagnostic(const Matrix &here, const Matrix &next, double spacing);

/// Same, for every consecutive pair of a uniform grid. Row p holds the
/// estimate between configurations p and p+1.
Matrix geometric_diagnostic(std::span<const Matrix> rotations, double spacing);

/// Expands the retained basis of a logged run in the product basis of all
/// scales (first scale most significant). Columns are the retained states.
Matrix expand_retained_basis(std::span<const StepRecord> log);

} // namespace narg
