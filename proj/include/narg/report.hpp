#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "narg/numerics.hpp"

namespace narg {

/// One (D, level) row. D = 0 stands for the untruncated run.
struct ReportRow {
    Index retain = 0;
    Index level = 0;
    double energy = 0.0;
    double gap = 0.0; ///< energy - ground energy at the same D
    std::optional<double> oracle;
    std::optional<double> drift; ///< |E(D_k) - E(D_{k-1})| for the same level
    std::optional<double> correlation_fraction;
    std::optional<double> number_expectation;

    std::optional<double> abs_error() const;
};

struct RunReport {
    std::string command;
    std::string model_hash;
    /// Ordered key/value pairs describing the run; values are JSON text.
    std::vector<std::pair<std::string, std::string>> metadata;
    std::vector<ReportRow> rows;

    /// Appends the rows of one D value, filling gap and drift from the rows
    /// already present.
    void add_levels(Index retain, const Vector &energies, const std::optional<Vector> &oracle,
                    const std::optional<Vector> &number_expectation = std::nullopt);
};

/// 64-bit FNV-1a of `text`, as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string &text);

/// Columns: D,level,energy,gap,oracle,abs_error,drift,correlation_fraction,n_expect.
/// Missing values are empty fields; reals use %.15e.
void write_csv(std::ostream &out, const RunReport &report);
std::string to_json(const RunReport &report);

} // namespace narg
