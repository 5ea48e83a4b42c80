#pragma once

#include <string>
#include <vector>

#include "narg/core.hpp"

namespace narg {

/// Dense tensor with named legs, data row-major over `dims`.
struct LettaTensor {
    std::vector<std::string> legs;
    std::vector<Index> dims;
    std::vector<double> data;

    Index size() const;
    double at(std::initializer_list<Index> index) const;
};

/// Leg-tied tensor chain. For L scales, tensor k < L-1 has legs
/// (j_k, j_{k+1}, b_k, b_{k+1}) where j are physical configurations and b the
/// adiabatic (virtual) indices; the first tensor drops b_0 and the last one
/// is (j_{L-1}, b_{L-1}, alpha) with alpha the retained terminal state.
/// Consecutive tensors share the physical leg j_{k+1}.
struct LettaNetwork {
    std::vector<Index> physical_dims;
    std::vector<LettaTensor> tensors;
    /// Untouched per-step rotations and eigenvectors of the run.
    std::vector<StepRecord> raw_steps;

    Index n_scales() const { return static_cast<Index>(physical_dims.size()); }
    Index terminal_dim() const;
};

/// Builds the network from a run log. Throws IncompleteLog when the log is
/// empty or its shapes do not chain.
LettaNetwork extract_letta(std::span<const StepRecord> log);

/// Full coefficient vector over (j_0, ..., j_{L-1}), j_0 most significant.
/// Throws TooLarge when the product of physical dimensions exceeds 1e6,
/// IndexOutOfRange for a bad terminal index.
Vector contract_state(const LettaNetwork &network, Index terminal);

/// One coefficient, evaluated by a left-to-right vector sweep.
/// Throws IndexOutOfRange.
double amplitude(const LettaNetwork &network, std::span<const Index> configuration, Index terminal);

/// Sum over the shared configuration j_{k+1} of the rank of the two-tensor
/// contraction of tensors k and k+1 with j_{k+1} fixed. A bond-D matrix
/// product split of the same pair has rank at most D.
Index leg_tie_rank(const LettaNetwork &network, Index k, double tolerance = 1e-10);

/// Flips the sign so that the largest-magnitude entry is positive.
void fix_global_phase(Vector &state);

/// JSON container: {"format":"letta","version":1,"physical_dims":[...],
/// "tensors":[{"legs":[...],"dims":[...],"data":[...]}],"raw_steps":[...]}.
std::string letta_to_json(const LettaNetwork &network);
/// Throws InvalidArgument on malformed or inconsistent input.
LettaNetwork letta_from_json(const std::string &text);

} // namespace narg
