#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "narg/commands.hpp"

int main(int argc, char **argv) {
    CLI::App app{"Nonadiabatic renormalization group runs and checks"};
    app.require_subcommand(1);

    narg::BosonCommand boson;
    std::string boson_retain;
    narg::Index boson_dvr = 0;
    long boson_seed = 0;
    auto *b = app.add_subcommand("boson", "Coupled anharmonic oscillators");
    b->add_option("--config", boson.config_path, "JSON model configuration")->required()->check(CLI::ExistingFile);
    b->add_option("--retain", boson_retain, "Comma list of D values, 'full' for no truncation");
    b->add_option("--dvr-points", boson_dvr, "DVR points per mode")->check(CLI::PositiveNumber);
    b->add_flag("--oracle", boson.oracle, "Compare with direct-product diagonalization");
    b->add_flag("--letta", boson.letta, "Write a tensor-network artifact per D");
    b->add_flag("--timing", boson.timing, "Record wall time in the JSON report");
    b->add_option("--seed", boson_seed, "Recorded in the report metadata");
    b->add_option("--out", boson.out, "Output prefix for .csv and .json")->required();

    narg::QchemCommand qchem;
    std::string qchem_retain = "64";
    std::string ordering = "given";
    double mean_field = 0.0, mu = 0.0;
    long qchem_seed = 0;
    auto *q = app.add_subcommand("qchem", "Orbital-by-orbital block growing from an FCIDUMP");
    q->add_option("--fcidump", qchem.fcidump_path, "Integral file")->required();
    q->add_option("--retain", qchem_retain, "Comma list of D values, 'full' for no truncation");
    q->add_option("--ordering", ordering, "Orbital processing order")->check(CLI::IsMember({"given", "reversed"}));
    q->add_option("--l-init", qchem.l_init, "Orbitals solved exactly before truncation (0 = automatic)")
        ->check(CLI::NonNegativeNumber);
    q->add_option("--n-levels", qchem.n_levels, "Levels reported per D")->check(CLI::PositiveNumber);
    auto *mf = q->add_option("--mean-field-energy", mean_field, "Reference energy for the correlation fraction");
    auto *cp = q->add_option("--chemical-potential", mu, "Override the automatic chemical potential");
    q->add_flag("--oracle", qchem.oracle, "Compare with determinant full CI");
    q->add_flag("--letta", qchem.letta, "Write a tensor-network artifact per D");
    q->add_flag("--timing", qchem.timing, "Record wall time in the JSON report");
    q->add_option("--seed", qchem_seed, "Recorded in the report metadata");
    q->add_option("--out", qchem.out, "Output prefix for .csv and .json")->required();

    std::string artifact;
    auto *l = app.add_subcommand("letta-check", "Verify a tensor-network artifact against its run");
    l->add_option("artifact", artifact, "File written by --letta")->required();

    narg::Index sites = 4;
    double hop = 1.0, u = 4.0;
    std::string fcidump_out;
    auto *h = app.add_subcommand("hubbard-fcidump", "Write an open Hubbard chain at half filling");
    h->add_option("--sites", sites, "Chain length")->check(CLI::PositiveNumber);
    h->add_option("--t", hop, "Hopping amplitude");
    h->add_option("--u", u, "On-site repulsion");
    h->add_option("--out", fcidump_out, "FCIDUMP path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (b->parsed()) {
            if (!boson_retain.empty())
                boson.retain = narg::parse_retain_list(boson_retain);
            if (b->count("--dvr-points"))
                boson.dvr_points = boson_dvr;
            if (b->count("--seed"))
                boson.seed = boson_seed;
            return narg::cmd_boson(boson, std::cout, std::cerr);
        }
        if (q->parsed()) {
            qchem.retain = narg::parse_retain_list(qchem_retain);
            qchem.ordering = ordering == "reversed" ? narg::OrbitalOrdering::Reversed : narg::OrbitalOrdering::Given;
            if (mf->count())
                qchem.mean_field_energy = mean_field;
            if (cp->count())
                qchem.chemical_potential = mu;
            if (q->count("--seed"))
                qchem.seed = qchem_seed;
            return narg::cmd_qchem(qchem, std::cout, std::cerr);
        }
        if (l->parsed())
            return narg::cmd_letta_check(artifact, std::cout, std::cerr);
        if (h->parsed())
            return narg::cmd_hubbard_fcidump(sites, hop, u, fcidump_out, std::cerr);
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
