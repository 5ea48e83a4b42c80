#include "narg/commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace narg {
namespace {

using Json = nlohmann::ordered_json;

constexpr double kNormTolerance = 1e-10;
constexpr double kOverlapTolerance = 1e-8;
constexpr double kEnergyTolerance = 1e-8;

std::string read_text(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::Io, "cannot open " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_text(const std::string &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorCode::Io, "cannot write " + path);
    out << text;
    if (!out)
        throw Error(ErrorCode::Io, "write failed for " + path);
}

Index parse_retain_value(const Json &j) {
    if (j.is_string() && j.get<std::string>() == "full")
        return 0;
    if (j.is_number_integer() && j.get<long long>() >= 0)
        return j.get<Index>();
    throw Error(ErrorCode::InvalidArgument, "D entries must be non-negative integers or \"full\"");
}

void check_ascending(const std::vector<Index> &retain) {
    if (retain.empty())
        throw Error(ErrorCode::InvalidArgument, "D list is empty");
    auto rank = [](Index d) { return d == 0 ? std::numeric_limits<Index>::max() : d; };
    for (std::size_t k = 1; k < retain.size(); ++k)
        if (rank(retain[k]) <= rank(retain[k - 1]))
            throw Error(ErrorCode::InvalidArgument, "D list must be strictly ascending (full last)");
}

Json index_list(const std::vector<Index> &v) {
    Json j = Json::array();
    for (Index x : v)
        j.push_back(x);
    return j;
}

void add_meta(RunReport &report, const std::string &key, const Json &value) {
    report.metadata.emplace_back(key, value.dump());
}

std::string letta_path(const std::string &out, Index retain) {
    return out + "_D" + (retain == 0 ? std::string("full") : std::to_string(retain)) + ".letta.json";
}

double expectation(const Vector &psi, const Vector &h_psi) { return psi.dot(h_psi) / psi.squaredNorm(); }

LettaResiduals residuals(const LettaNetwork &network, Index terminal, double energy,
                         const std::function<Vector(const Vector &)> &apply_h) {
    Vector psi = contract_state(network, terminal);
    Vector direct = expand_retained_basis(network.raw_steps).col(terminal);
    fix_global_phase(psi);
    fix_global_phase(direct);
    LettaResiduals r;
    r.norm_error = std::abs(psi.norm() - 1.0);
    r.overlap = std::abs(psi.dot(direct));
    r.energy_error = std::abs(expectation(psi, apply_h(psi)) - energy);
    return r;
}

} // namespace

BosonConfig parse_boson_config(const std::string &text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::exception &e) {
        throw Error(ErrorCode::InvalidArgument, std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object())
        throw Error(ErrorCode::InvalidArgument, "config must be a JSON object");
    static const std::set<std::string> known = {"schema_version", "frequencies", "lambdas", "lambda",
                                                "couplings", "coupling", "dvr_points", "x_max", "D",
                                                "n_levels"};
    for (const auto &item : j.items())
        if (!known.contains(item.key()))
            throw Error(ErrorCode::InvalidArgument, "unknown config key '" + item.key() + "'");
    try {
        if (!j.contains("schema_version") || j.at("schema_version").get<int>() != 1)
            throw Error(ErrorCode::InvalidArgument, "schema_version must be 1");
        const auto freqs = j.at("frequencies").get<std::vector<double>>();
        const Index n = static_cast<Index>(freqs.size());
        BosonConfig cfg;
        BosonModel &m = cfg.model;
        m.frequencies = Eigen::Map<const Vector>(freqs.data(), n);
        if (j.contains("lambdas") && j.contains("lambda"))
            throw Error(ErrorCode::InvalidArgument, "give either lambdas or lambda");
        if (j.contains("lambdas")) {
            const auto l = j.at("lambdas").get<std::vector<double>>();
            if (static_cast<Index>(l.size()) != n)
                throw Error(ErrorCode::InvalidArgument, "lambdas has wrong length");
            m.lambdas = Eigen::Map<const Vector>(l.data(), n);
        } else {
            m.lambdas = Vector::Constant(n, j.value("lambda", 0.0));
        }
        if (j.contains("couplings") && j.contains("coupling"))
            throw Error(ErrorCode::InvalidArgument, "give either couplings or coupling");
        if (j.contains("couplings")) {
            const auto rows = j.at("couplings").get<std::vector<std::vector<double>>>();
            if (static_cast<Index>(rows.size()) != n)
                throw Error(ErrorCode::InvalidArgument, "couplings has wrong shape");
            m.couplings.resize(n, n);
            for (Index a = 0; a < n; ++a) {
                if (static_cast<Index>(rows[static_cast<std::size_t>(a)].size()) != n)
                    throw Error(ErrorCode::InvalidArgument, "couplings has wrong shape");
                for (Index b = 0; b < n; ++b)
                    m.couplings(a, b) = rows[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
            }
        } else {
            m.couplings = Matrix::Constant(n, n, j.value("coupling", 0.0));
            m.couplings.diagonal().setZero();
        }
        m.dvr_points = j.value("dvr_points", Index{15});
        m.x_max = j.value("x_max", 8.0);
        if (!(m.x_max > 0.0))
            throw Error(ErrorCode::InvalidArgument, "x_max must be positive");
        cfg.n_levels = j.value("n_levels", Index{16});
        if (cfg.n_levels < 1)
            throw Error(ErrorCode::InvalidArgument, "n_levels must be positive");
        if (j.contains("D")) {
            for (const auto &d : j.at("D"))
                cfg.retain.push_back(parse_retain_value(d));
        } else {
            cfg.retain = {0};
        }
        m.validate();
        return cfg;
    } catch (const nlohmann::json::exception &e) {
        throw Error(ErrorCode::InvalidArgument, std::string("bad config value: ") + e.what());
    }
}

std::string canonical_model_json(const BosonModel &model) {
    Json couplings = Json::array();
    for (Index a = 0; a < model.n_modes(); ++a) {
        Json row = Json::array();
        for (Index b = 0; b < model.n_modes(); ++b)
            row.push_back(model.couplings(a, b));
        couplings.push_back(std::move(row));
    }
    Json j;
    j["schema_version"] = 1;
    j["frequencies"] = std::vector<double>(model.frequencies.begin(), model.frequencies.end());
    j["lambdas"] = std::vector<double>(model.lambdas.begin(), model.lambdas.end());
    j["couplings"] = std::move(couplings);
    j["dvr_points"] = model.dvr_points;
    j["x_max"] = model.x_max;
    return j.dump();
}

std::vector<Index> parse_retain_list(const std::string &text) {
    std::vector<Index> out;
    std::stringstream s(text);
    std::string token;
    while (std::getline(s, token, ',')) {
        if (token == "full") {
            out.push_back(0);
            continue;
        }
        std::size_t used = 0;
        long value = -1;
        try {
            value = std::stol(token, &used);
        } catch (const std::exception &) {
            used = 0;
        }
        if (used != token.size() || value < 0)
            throw Error(ErrorCode::InvalidArgument, "bad D value '" + token + "'");
        out.push_back(value);
    }
    check_ascending(out);
    return out;
}

bool LettaResiduals::pass() const {
    return norm_error <= kNormTolerance && overlap >= 1.0 - kOverlapTolerance && energy_error <= kEnergyTolerance;
}

LettaResiduals boson_letta_residuals(const BosonModel &model, std::span<const Index> order,
                                     const LettaNetwork &network, Index terminal, double energy) {
    const BosonModel ordered = model.permuted(order);
    return residuals(network, terminal, energy,
                     [&](const Vector &v) { return apply_product_hamiltonian(ordered, v); });
}

LettaResiduals qchem_letta_residuals(const FcidumpData &ordered, const LettaNetwork &network,
                                     Index terminal, double energy) {
    const SparseMatrix h = fock_hamiltonian(ordered);
    return residuals(network, terminal, energy - ordered.e_core,
                     [&](const Vector &v) { return Vector(h * v); });
}

RunReport run_boson(const BosonCommand &cmd, std::ostream &log) {
    const auto start = std::chrono::steady_clock::now();
    BosonConfig cfg = parse_boson_config(read_text(cmd.config_path));
    if (cmd.dvr_points)
        cfg.model.dvr_points = *cmd.dvr_points;
    if (cmd.retain)
        cfg.retain = *cmd.retain;
    check_ascending(cfg.retain);
    cfg.model.validate();

    RunReport report;
    report.command = "boson";
    report.model_hash = fnv1a_hex(canonical_model_json(cfg.model));
    add_meta(report, "n_modes", cfg.model.n_modes());
    add_meta(report, "dvr_points", cfg.model.dvr_points);
    add_meta(report, "x_max", cfg.model.x_max);
    add_meta(report, "n_levels", cfg.n_levels);
    add_meta(report, "D", index_list(cfg.retain));
    add_meta(report, "order", index_list(cfg.model.processing_order()));
    if (cmd.seed)
        add_meta(report, "seed", *cmd.seed);

    std::optional<Vector> oracle;
    if (cmd.oracle) {
        oracle = exact_diag_oracle(cfg.model, cfg.n_levels);
        log << "oracle: product dimension "
            << static_cast<long long>(std::pow(cfg.model.dvr_points, cfg.model.n_modes())) << ", E0 = "
            << (*oracle)(0) << '\n';
    }
    for (Index d : cfg.retain) {
        BosonRunOptions opts;
        opts.retain = d;
        opts.full = d == 0;
        opts.n_levels = cfg.n_levels;
        const BosonResult result = solve_narg(cfg.model, opts);
        report.add_levels(d, result.energies, oracle);
        log << "D=" << (d == 0 ? std::string("full") : std::to_string(d)) << " E0 = " << result.energies(0)
            << '\n';
        if (cmd.letta && !cmd.out.empty()) {
            Json artifact;
            artifact["kind"] = "boson";
            artifact["model"] = Json::parse(canonical_model_json(cfg.model));
            artifact["order"] = index_list(result.order);
            artifact["D"] = d;
            artifact["terminal"] = 0;
            artifact["energy"] = result.energies(0);
            artifact["network"] = Json::parse(letta_to_json(extract_letta(result.final_block.log)));
            write_text(letta_path(cmd.out, d), artifact.dump() + "\n");
        }
    }
    if (cmd.timing)
        add_meta(report, "wall_time_s",
                 std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    return report;
}

RunReport run_qchem(const QchemCommand &cmd, std::ostream &log) {
    const auto start = std::chrono::steady_clock::now();
    check_ascending(cmd.retain);
    const FcidumpData data = read_fcidump(cmd.fcidump_path);
    const std::vector<Index> order = order_orbitals(data, cmd.ordering);
    const std::optional<double> mean_field = cmd.mean_field_energy ? cmd.mean_field_energy : data.e_mean_field;

    std::ostringstream canonical;
    write_fcidump(canonical, data);
    RunReport report;
    report.command = "qchem";
    report.model_hash = fnv1a_hex(canonical.str());
    add_meta(report, "n_orb", data.n_orb);
    add_meta(report, "n_elec", data.n_elec);
    add_meta(report, "ms2", data.ms2);
    add_meta(report, "ordering", cmd.ordering == OrbitalOrdering::Given ? "given" : "reversed");
    add_meta(report, "n_levels", cmd.n_levels);
    add_meta(report, "D", index_list(cmd.retain));
    add_meta(report, "mean_field_energy", mean_field ? Json(*mean_field) : Json(nullptr));
    if (cmd.seed)
        add_meta(report, "seed", *cmd.seed);

    std::optional<Vector> oracle;
    if (cmd.oracle) {
        oracle = fci_oracle(data, data.n_up(), data.n_down(), cmd.n_levels);
        log << "oracle: E0 = " << (*oracle)(0) << '\n';
    }
    Json l_init = Json::array();
    Json mu = Json::array();
    for (Index d : cmd.retain) {
        GrowOptions opts;
        opts.retain = d;
        opts.l_init = cmd.l_init;
        opts.n_levels = cmd.n_levels;
        opts.chemical_potential = cmd.chemical_potential;
        const GrowResult result = grow_block(data, order, opts);
        const std::size_t first_row = report.rows.size();
        report.add_levels(d, result.energies, oracle, result.number_expectation);
        if (mean_field && oracle)
            report.rows[first_row].correlation_fraction =
                correlation_fraction(result.energies(0), *mean_field, (*oracle)(0));
        l_init.push_back(result.l_init);
        mu.push_back(result.chemical_potential);
        log << "D=" << (d == 0 ? std::string("full") : std::to_string(d)) << " E0 = " << result.energies(0)
            << '\n';
        if (cmd.letta && !cmd.out.empty()) {
            std::ostringstream ordered;
            write_fcidump(ordered, permute_orbitals(data, order));
            Json artifact;
            artifact["kind"] = "qchem";
            artifact["fcidump"] = ordered.str();
            artifact["D"] = d;
            artifact["terminal"] = 0;
            artifact["energy"] = result.energies(0);
            artifact["network"] = Json::parse(letta_to_json(extract_letta(result.final_block.log)));
            write_text(letta_path(cmd.out, d), artifact.dump() + "\n");
        }
    }
    add_meta(report, "l_init", l_init);
    add_meta(report, "chemical_potential", mu);
    if (cmd.timing)
        add_meta(report, "wall_time_s",
                 std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    return report;
}

namespace {

template <typename Run> int run_and_write(Run &&run, const std::string &out, std::ostream &err) {
    try {
        if (out.empty())
            throw Error(ErrorCode::InvalidArgument, "no output path given");
        const RunReport report = run();
        std::ostringstream csv;
        write_csv(csv, report);
        write_text(out + ".csv", csv.str());
        write_text(out + ".json", to_json(report));
        return 0;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace

int cmd_boson(const BosonCommand &cmd, std::ostream &log, std::ostream &err) {
    return run_and_write([&] { return run_boson(cmd, log); }, cmd.out, err);
}

int cmd_qchem(const QchemCommand &cmd, std::ostream &log, std::ostream &err) {
    return run_and_write([&] { return run_qchem(cmd, log); }, cmd.out, err);
}

int cmd_letta_check(const std::string &path, std::ostream &log, std::ostream &err) {
    try {
        Json artifact;
        try {
            artifact = Json::parse(read_text(path));
        } catch (const nlohmann::json::exception &e) {
            throw Error(ErrorCode::InvalidArgument, std::string("malformed artifact: ") + e.what());
        }
        LettaResiduals r;
        try {
            const std::string kind = artifact.at("kind").get<std::string>();
            const Index terminal = artifact.at("terminal").get<Index>();
            const double energy = artifact.at("energy").get<double>();
            const LettaNetwork network = letta_from_json(artifact.at("network").dump());
            if (kind == "boson") {
                const BosonConfig cfg = parse_boson_config(artifact.at("model").dump());
                const auto order = artifact.at("order").get<std::vector<Index>>();
                r = boson_letta_residuals(cfg.model, order, network, terminal, energy);
            } else if (kind == "qchem") {
                std::istringstream in(artifact.at("fcidump").get<std::string>());
                r = qchem_letta_residuals(parse_fcidump(in), network, terminal, energy);
            } else {
                throw Error(ErrorCode::InvalidArgument, "unknown artifact kind '" + kind + "'");
            }
        } catch (const nlohmann::json::exception &e) {
            throw Error(ErrorCode::InvalidArgument, std::string("malformed artifact: ") + e.what());
        }
        log << "norm_error   " << r.norm_error << '\n'
            << "overlap      " << r.overlap << '\n'
            << "energy_error " << r.energy_error << '\n'
            << (r.pass() ? "PASS" : "FAIL") << '\n';
        return r.pass() ? 0 : 2;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

int cmd_hubbard_fcidump(Index n_sites, double t_hop, double u, const std::string &path, std::ostream &err) {
    try {
        std::ostringstream s;
        write_fcidump(s, hubbard_fixture(n_sites, t_hop, u));
        write_text(path, s.str());
        return 0;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace narg
