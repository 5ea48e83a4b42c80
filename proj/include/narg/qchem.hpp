#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "narg/core.hpp"

namespace narg {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// One- and two-electron integrals of
/// H = sum t_ij c+_is c_js + 1/2 sum v_ijkl c+_is c+_kt c_lt c_js + e_core,
/// v in chemist notation (ij|kl), fully expanded.
struct FcidumpData {
    Index n_orb = 0;
    Index n_elec = 0;
    int ms2 = 0;
    Matrix t;
    std::vector<double> v;
    double e_core = 0.0;
    /// Optional mean-field reference energy (header key EHF).
    std::optional<double> e_mean_field;
    /// Orbital energies from "e i 0 0 0" lines, when present.
    std::optional<Vector> orbital_energies;

    FcidumpData() = default;
    FcidumpData(Index n_orb, Index n_elec, int ms2);

    double eri(Index i, Index j, Index k, Index l) const {
        return v[static_cast<std::size_t>(((i * n_orb + j) * n_orb + k) * n_orb + l)];
    }
    /// Sets (ij|kl) and its 7 permutational images.
    void set_eri(Index i, Index j, Index k, Index l, double value);
    void set_one_body(Index i, Index j, double value);

    Index n_up() const { return (n_elec + ms2) / 2; }
    Index n_down() const { return (n_elec - ms2) / 2; }
};

/// Parses FCIDUMP text: a namelist header (&FCI ... &END or /) with NORB,
/// NELEC, MS2 (optional EHF), then "value i j k l" lines with 1-based
/// indices. Fortran D exponents are accepted.
/// Throws MalformedHeader, MalformedLine (with line number), IndexOutOfRange.
FcidumpData parse_fcidump(std::istream &in);
FcidumpData read_fcidump(const std::string &path);
void write_fcidump(std::ostream &out, const FcidumpData &data);

/// Open Hubbard chain: t_ij = -t_hop for |i-j| = 1, (ii|ii) = U, half filling, MS2 = n_sites mod 2.
FcidumpData hubbard_fixture(Index n_sites, double t_hop, double u);

enum class OrbitalOrdering { Given, Reversed };

std::vector<Index> order_orbitals(const FcidumpData &data, OrbitalOrdering mode);

/// Orbital k of the result is orbital perm[k] of `data`.
FcidumpData permute_orbitals(const FcidumpData &data, std::span<const Index> perm);

/// Local fermion states |0>, |up>, |dn>, |updn> with |updn> = c+_up c+_dn |0>.
/// Annihilators already include the on-site up-before-down sign.
struct FermionSite {
    static Matrix annihilate(int spin); // 0 = up, 1 = down
    static Matrix number(int spin);
    static Matrix parity();
};

/// Name of the renormalized annihilator of spin-orbital 2p+s (parity string
/// over the block folded in), and of its product with the block parity.
std::string c_name(Index spin_orbital);
std::string c_parity_name(Index spin_orbital);

/// Scale site adding orbital `s` to a block holding orbitals 0..s-1 of
/// `data` (already in processing order); `one_body` replaces data.t.
ScaleSite make_fermion_site(const FcidumpData &data, const Matrix &one_body, Index s,
                            const BlockState &block);

/// Operator specs that carry c, cP, parity and number operators of the grown
/// block into the next step.
OpSpecs fermion_op_specs(const BlockState &block, Index s);

struct GrowOptions {
    Index retain = 64;        ///< D; 0 keeps everything (D = 4^l)
    Index l_init = 0;         ///< 0 picks the smallest l with 4^l >= D
    Index d_adiabatic = 0;    ///< 0 means same as retain
    Index n_levels = 1;
    std::optional<double> chemical_potential;
    bool restrict_final_sector = true;
};

struct GrowResult {
    Vector energies;              ///< total energies, e_core included
    Vector number_expectation;    ///< <N> of each reported state
    double chemical_potential = 0.0;
    Index l_init = 0;
    BlockState final_block;
};

/// Orbital-by-orbital fermionic block growing. Orbitals are processed in
/// `ordering`; the first l_init are solved exactly, then each further
/// orbital is added with a truncation to `retain` states. Energies are
/// those of H - mu N during the run, shifted back for the target sector.
GrowResult grow_block(const FcidumpData &data, std::span<const Index> ordering,
                      const GrowOptions &options, const StepObserver &observer = {});

/// Midpoint between the highest occupied and lowest unoccupied mean-field
/// orbital energy, taking the first n_elec/2 orbitals as occupied.
double default_chemical_potential(const FcidumpData &data);

/// Lowest n_levels eigenvalues (plus e_core) in the determinant basis with
/// fixed n_up, n_down via Slater-Condon rules. Throws TooLarge past 10000.
Vector fci_oracle(const FcidumpData &data, Index n_up, Index n_down, Index n_levels);
Matrix determinant_hamiltonian(const FcidumpData &data, Index n_up, Index n_down);

/// Fock-space Hamiltonian (no e_core) assembled from Jordan-Wigner site
/// operators, orbital 0 most significant. Throws TooLarge for n_orb > 8.
SparseMatrix fock_hamiltonian(const FcidumpData &data);
/// Total spin-up and spin-down number operators in the same basis.
SparseMatrix fock_number(const FcidumpData &data, int spin);

/// Energy of the closed-shell determinant built from the first n_elec/2
/// columns of `orbitals` (plus e_core).
double determinant_energy(const FcidumpData &data, const Matrix &orbitals);
/// determinant_energy with the eigenvectors of t, the U=0 / core-Hamiltonian
/// reference.
double core_hamiltonian_energy(const FcidumpData &data);

/// (e_mean_field - e_narg) / (e_mean_field - e_fci). Throws
/// DegenerateDenominator when the correlation energy vanishes.
double correlation_fraction(double e_narg, double e_mean_field, double e_fci);

} // namespace narg
