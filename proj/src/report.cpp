#include "narg/report.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include <json.hpp>

namespace narg {
namespace {

std::string real(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.15e", x);
    return buf;
}

std::string optional_real(const std::optional<double> &x) { return x ? real(*x) : std::string(); }

nlohmann::ordered_json optional_json(const std::optional<double> &x) {
    return x ? nlohmann::ordered_json(*x) : nlohmann::ordered_json(nullptr);
}

} // namespace

std::optional<double> ReportRow::abs_error() const {
    if (!oracle)
        return std::nullopt;
    return std::abs(energy - *oracle);
}

void RunReport::add_levels(Index retain, const Vector &energies, const std::optional<Vector> &oracle,
                           const std::optional<Vector> &number_expectation) {
    std::vector<const ReportRow *> previous;
    if (!rows.empty()) {
        const Index last_retain = rows.back().retain;
        for (const ReportRow &r : rows)
            if (r.retain == last_retain)
                previous.push_back(&r);
    }
    for (Index k = 0; k < energies.size(); ++k) {
        ReportRow row;
        row.retain = retain;
        row.level = k;
        row.energy = energies(k);
        row.gap = energies(k) - energies(0);
        if (oracle && k < oracle->size())
            row.oracle = (*oracle)(k);
        if (k < static_cast<Index>(previous.size()))
            row.drift = std::abs(energies(k) - previous[static_cast<std::size_t>(k)]->energy);
        if (number_expectation && k < number_expectation->size())
            row.number_expectation = (*number_expectation)(k);
        rows.push_back(row);
    }
}

std::string fnv1a_hex(const std::string &text) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_csv(std::ostream &out, const RunReport &report) {
    out << "D,level,energy,gap,oracle,abs_error,drift,correlation_fraction,n_expect\n";
    for (const ReportRow &r : report.rows) {
        out << r.retain << ',' << r.level << ',' << real(r.energy) << ',' << real(r.gap) << ','
            << optional_real(r.oracle) << ',' << optional_real(r.abs_error()) << ','
            << optional_real(r.drift) << ',' << optional_real(r.correlation_fraction) << ','
            << optional_real(r.number_expectation) << '\n';
    }
}

std::string to_json(const RunReport &report) {
    nlohmann::ordered_json j;
    j["command"] = report.command;
    j["model_hash"] = report.model_hash;
    nlohmann::ordered_json meta = nlohmann::ordered_json::object();
    for (const auto &[key, value] : report.metadata)
        meta[key] = nlohmann::ordered_json::parse(value);
    j["metadata"] = std::move(meta);
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const ReportRow &r : report.rows) {
        nlohmann::ordered_json row;
        row["D"] = r.retain;
        row["level"] = r.level;
        row["energy"] = r.energy;
        row["gap"] = r.gap;
        row["oracle"] = optional_json(r.oracle);
        row["abs_error"] = optional_json(r.abs_error());
        row["drift"] = optional_json(r.drift);
        row["correlation_fraction"] = optional_json(r.correlation_fraction);
        row["n_expect"] = optional_json(r.number_expectation);
        rows.push_back(std::move(row));
    }
    j["rows"] = std::move(rows);
    return j.dump(2) + "\n";
}

} // namespace narg
