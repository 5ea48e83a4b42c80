#include <cmath>

#include "narg/qchem.hpp"

namespace narg {
namespace {

Index auto_l_init(Index retain, Index n_orb) {
    Index l = 1;
    if (retain > 0) {
        Index states = 4;
        while (states < retain && l < n_orb) {
            states *= 4;
            ++l;
        }
    } else {
        l = n_orb;
    }
    return std::min(l, n_orb - 1);
}

BlockState trivial_fermion_block() {
    BlockState block = BlockState::trivial();
    block.ops["P"] = Matrix::Ones(1, 1);
    block.ops["N_up"] = Matrix::Zero(1, 1);
    block.ops["N_down"] = Matrix::Zero(1, 1);
    return block;
}

} // namespace

GrowResult grow_block(const FcidumpData &data, std::span<const Index> ordering,
                      const GrowOptions &options, const StepObserver &observer) {
    const Index n = data.n_orb;
    if (n < 2)
        throw Error(ErrorCode::InvalidSize, "need at least 2 orbitals");
    if (options.retain < 0 || options.n_levels < 1 || options.l_init < 0 || options.d_adiabatic < 0)
        throw Error(ErrorCode::InvalidCount, "retain, l_init and n_levels must be non-negative");
    if ((data.n_elec + data.ms2) % 2 != 0 || data.n_up() < 0 || data.n_down() < 0 || data.n_up() > n || data.n_down() > n)
        throw Error(ErrorCode::InvalidCount, "electron counts out of range");

    const FcidumpData work = permute_orbitals(data, ordering);
    GrowResult result;
    result.chemical_potential = options.chemical_potential.value_or(default_chemical_potential(data));
    result.l_init = options.l_init > 0 ? std::min(options.l_init, n - 1) : auto_l_init(options.retain, n);
    const Matrix one_body = work.t - result.chemical_potential * Matrix::Identity(n, n);
    const Matrix id = Matrix::Identity(4, 4);

    BlockState block = trivial_fermion_block();
    for (Index s = 0; s < n; ++s) {
        const bool last = s + 1 == n;
        const ScaleSite site = make_fermion_site(work, one_body, s, block);

        StepOptions opts;
        opts.block_resolvers = {"N_up", "N_down"};
        opts.superblock_resolvers = {{{1.0, "N_up", id}, {1.0, kIdentity, FermionSite::number(0)}},
                                     {{1.0, "N_down", id}, {1.0, kIdentity, FermionSite::number(1)}}};
        if (s < result.l_init) {
            opts.d_adiabatic = 0;
            opts.d_retain = s + 1 == result.l_init ? options.retain : 0;
        } else {
            opts.d_adiabatic = options.d_adiabatic > 0 ? options.d_adiabatic : options.retain;
            opts.d_retain = options.retain;
        }

        OpSpecs specs;
        if (last) {
            opts.d_retain = options.n_levels;
            specs["N_up"] = opts.superblock_resolvers[0];
            specs["N_down"] = opts.superblock_resolvers[1];
            if (options.restrict_final_sector) {
                opts.sector.push_back({specs["N_up"], static_cast<double>(work.n_up())});
                opts.sector.push_back({specs["N_down"], static_cast<double>(work.n_down())});
                // Inside the sector both number operators are constant.
                opts.superblock_resolvers.clear();
            }
        } else {
            specs = fermion_op_specs(block, s);
        }
        if (observer)
            observer(block, site, opts);
        block = narg_step(block, site, opts, specs);
    }

    result.number_expectation = (block.ops.at("N_up") + block.ops.at("N_down")).diagonal();
    result.energies = block.energies.array() + result.chemical_potential * result.number_expectation.array() +
                      data.e_core;
    result.final_block = std::move(block);
    return result;
}

} // namespace narg
