#pragma once

#include <vector>

#include "narg/core.hpp"
#include "narg/dvr.hpp"

namespace narg {

/// H = sum_i (w_i/2)(p_i^2 + x_i^2 + l_i x_i^4) + sum_{i<j} g_ij sqrt(w_i w_j) x_i^2 x_j^2
/// in dimensionless coordinates.
struct BosonModel {
    Vector frequencies;
    Vector lambdas;
    Matrix couplings; ///< symmetric, zero diagonal
    Index dvr_points = 15;
    double x_max = 8.0; ///< grid half-width for a unit-frequency mode

    Index n_modes() const { return frequencies.size(); }

    /// Throws InvalidArgument when frequencies are not positive, shapes
    /// disagree, or the coupling matrix is not symmetric with zero diagonal.
    void validate() const;

    /// Mode indices by descending frequency (ties by index).
    std::vector<Index> processing_order() const;

    /// Grid for mode i, half-width x_max / sqrt(w_i).
    DvrBasis dvr(Index i) const;

    /// Same model with modes relabelled: mode k of the result is mode
    /// order[k] of this one.
    BosonModel permuted(std::span<const Index> order) const;

    /// Uniform fixture: all lambdas equal, all pair couplings equal.
    static BosonModel uniform(const std::vector<double> &frequencies, double lambda,
                              double coupling, Index dvr_points);
};

/// Name of the renormalized x_i^2 operator.
std::string x2_name(Index mode);

/// (w_i/2) kinetic + diag((w_i/2)(x^2 + l_i x^4)) on the mode's grid.
Matrix mode_hamiltonian(const BosonModel &model, Index mode);

/// Scale site for `mode`. Every earlier mode with a nonzero coupling to it
/// must have its x2 operator in `block`; otherwise throws
/// MissingRenormalizedOperator.
ScaleSite make_site(const BosonModel &model, Index mode, std::span<const Index> processed,
                    const BlockState &block);

struct BosonRunOptions {
    Index retain = 16;        ///< D kept after each superblock diagonalization
    Index d_adiabatic = 0;    ///< per-configuration states; 0 means same as retain
    Index n_levels = 16;
    bool full = false;        ///< no truncation anywhere
};

struct BosonResult {
    Vector energies;
    BlockState final_block;     ///< carries the step log for LETTA export
    std::vector<Index> order;   ///< mode processing order
};

/// Processes all modes in descending frequency and returns the lowest
/// n_levels eigenvalues of the final superblock.
BosonResult solve_narg(const BosonModel &model, const BosonRunOptions &options,
                       const StepObserver &observer = {});

/// Dense Hamiltonian in the direct-product DVR basis, mode 0 most significant.
/// Throws TooLarge beyond 20000 product states.
Matrix product_hamiltonian(const BosonModel &model);

/// H * v in the direct-product basis without forming H.
Vector apply_product_hamiltonian(const BosonModel &model, const Vector &v);

/// Lowest n_levels eigenvalues by dense diagonalization of the product
/// Hamiltonian. Throws TooLarge beyond 20000 product states.
Vector exact_diag_oracle(const BosonModel &model, Index n_levels);

} // namespace narg
