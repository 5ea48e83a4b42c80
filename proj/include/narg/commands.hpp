#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "narg/boson.hpp"
#include "narg/letta.hpp"
#include "narg/qchem.hpp"
#include "narg/report.hpp"

namespace narg {

/// Boson run configuration (JSON):
///   schema_version  required, must be 1
///   frequencies     list of positive reals
///   lambdas | lambda          per-mode list or one value (default 0)
///   couplings | coupling      n x n matrix or one off-diagonal value (default 0)
///   dvr_points      default 15
///   x_max           grid half-width for unit frequency, default 8
///   D               list of retained dimensions, 0 or "full" = untruncated
///   n_levels        default 16
struct BosonConfig {
    BosonModel model;
    std::vector<Index> retain;
    Index n_levels = 16;
};

/// Throws InvalidArgument with the offending key.
BosonConfig parse_boson_config(const std::string &text);
/// Canonical JSON of the model, the input to the model hash.
std::string canonical_model_json(const BosonModel &model);

/// "4,8,full" -> {4, 8, 0}. Throws InvalidArgument.
std::vector<Index> parse_retain_list(const std::string &text);

struct BosonCommand {
    std::string config_path;
    std::optional<std::vector<Index>> retain;
    std::optional<Index> dvr_points;
    bool oracle = false;
    bool letta = false;
    bool timing = false;
    std::optional<long> seed;
    std::string out;
};

struct QchemCommand {
    std::string fcidump_path;
    std::vector<Index> retain{64};
    OrbitalOrdering ordering = OrbitalOrdering::Given;
    Index l_init = 0;
    Index n_levels = 1;
    std::optional<double> mean_field_energy;
    std::optional<double> chemical_potential;
    bool oracle = false;
    bool letta = false;
    bool timing = false;
    std::optional<long> seed;
    std::string out;
};

RunReport run_boson(const BosonCommand &cmd, std::ostream &log);
RunReport run_qchem(const QchemCommand &cmd, std::ostream &log);

/// Run, then write <out>.csv and <out>.json. Returns the exit code; errors
/// are reported on `err`.
int cmd_boson(const BosonCommand &cmd, std::ostream &log, std::ostream &err);
int cmd_qchem(const QchemCommand &cmd, std::ostream &log, std::ostream &err);

/// Residuals of a LETTA round trip against the direct run.
struct LettaResiduals {
    double norm_error = 0.0;   ///< | ||psi|| - 1 |
    double overlap = 0.0;      ///< |<psi_letta|psi_direct>|
    double energy_error = 0.0; ///< |<psi|H|psi> - E_reported|

    bool pass() const;
};

LettaResiduals boson_letta_residuals(const BosonModel &model, std::span<const Index> order,
                                     const LettaNetwork &network, Index terminal, double energy);
LettaResiduals qchem_letta_residuals(const FcidumpData &ordered, const LettaNetwork &network,
                                     Index terminal, double energy);

/// Checks a LETTA artifact written by --letta. Prints the residuals; returns
/// 0 iff all are within tolerance.
int cmd_letta_check(const std::string &path, std::ostream &log, std::ostream &err);

/// Writes the open Hubbard chain as FCIDUMP.
int cmd_hubbard_fcidump(Index n_sites, double t_hop, double u, const std::string &path,
                        std::ostream &err);

} // namespace narg
