#include "narg/qchem.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <regex>
#include <sstream>

namespace narg {
namespace {

std::string upper(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return s;
}

bool parse_real(std::string token, double &out) {
    for (char &c : token)
        if (c == 'D' || c == 'd')
            c = 'E';
    const char *begin = token.c_str();
    char *end = nullptr;
    out = std::strtod(begin, &end);
    return end != begin && *end == '\0' && std::isfinite(out);
}

bool parse_index(const std::string &token, long &out) {
    const char *begin = token.c_str();
    char *end = nullptr;
    out = std::strtol(begin, &end, 10);
    return end != begin && *end == '\0';
}

std::optional<std::string> header_value(const std::string &header, const std::string &key) {
    const std::regex re("(^|[\\s,&])" + key + "\\s*=\\s*([-+0-9.EeDd]+)");
    std::smatch m;
    if (std::regex_search(header, m, re))
        return m[2].str();
    return std::nullopt;
}

} // namespace

FcidumpData::FcidumpData(Index n_orb_, Index n_elec_, int ms2_)
    : n_orb(n_orb_), n_elec(n_elec_), ms2(ms2_), t(Matrix::Zero(n_orb_, n_orb_)),
      v(static_cast<std::size_t>(n_orb_ * n_orb_ * n_orb_ * n_orb_), 0.0) {
    if ((n_elec_ + ms2_) % 2 != 0)
        throw Error(ErrorCode::InvalidCount, "NELEC and MS2 must have the same parity");
}

void FcidumpData::set_eri(Index i, Index j, Index k, Index l, double value) {
    auto at = [&](Index a, Index b, Index c, Index d) -> double & {
        return v[static_cast<std::size_t>(((a * n_orb + b) * n_orb + c) * n_orb + d)];
    };
    at(i, j, k, l) = value;
    at(j, i, k, l) = value;
    at(i, j, l, k) = value;
    at(j, i, l, k) = value;
    at(k, l, i, j) = value;
    at(l, k, i, j) = value;
    at(k, l, j, i) = value;
    at(l, k, j, i) = value;
}

void FcidumpData::set_one_body(Index i, Index j, double value) {
    t(i, j) = value;
    t(j, i) = value;
}

FcidumpData parse_fcidump(std::istream &in) {
    std::string line;
    std::string header;
    long line_no = 0;
    bool closed = false;
    while (!closed && std::getline(in, line)) {
        ++line_no;
        const std::string u = upper(line);
        header += " " + u;
        const auto last = u.find_last_not_of(" \t\r");
        if (u.find("&END") != std::string::npos ||
            (last != std::string::npos && u[last] == '/'))
            closed = true;
    }
    if (header.find("&FCI") == std::string::npos)
        throw Error(ErrorCode::MalformedHeader, "missing &FCI namelist");
    if (!closed)
        throw Error(ErrorCode::MalformedHeader, "namelist is not terminated by &END or /");

    long norb = 0, nelec = 0, ms2 = 0;
    const auto norb_s = header_value(header, "NORB");
    const auto nelec_s = header_value(header, "NELEC");
    if (!norb_s || !parse_index(*norb_s, norb) || norb < 1)
        throw Error(ErrorCode::MalformedHeader, "NORB missing or invalid");
    if (!nelec_s || !parse_index(*nelec_s, nelec) || nelec < 0 || nelec > 2 * norb)
        throw Error(ErrorCode::MalformedHeader, "NELEC missing or invalid");
    if (const auto s = header_value(header, "MS2"); s && !parse_index(*s, ms2))
        throw Error(ErrorCode::MalformedHeader, "MS2 invalid");
    if ((nelec + ms2) % 2 != 0 || std::abs(ms2) > nelec)
        throw Error(ErrorCode::MalformedHeader, "MS2 inconsistent with NELEC");

    FcidumpData data(norb, nelec, static_cast<int>(ms2));
    if (const auto s = header_value(header, "EHF")) {
        double e = 0.0;
        if (!parse_real(*s, e))
            throw Error(ErrorCode::MalformedHeader, "EHF invalid");
        data.e_mean_field = e;
    }

    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream fields(line);
        std::vector<std::string> tok;
        for (std::string t; fields >> t;)
            tok.push_back(t);
        if (tok.empty())
            continue;
        double value = 0.0;
        long idx[4] = {0, 0, 0, 0};
        bool ok = tok.size() == 5 && parse_real(tok[0], value);
        for (int q = 0; ok && q < 4; ++q)
            ok = parse_index(tok[static_cast<std::size_t>(q + 1)], idx[q]);
        if (!ok)
            throw Error(ErrorCode::MalformedLine, "line " + std::to_string(line_no) + ": '" + line + "'");
        for (long x : idx)
            if (x < 0 || x > norb)
                throw Error(ErrorCode::IndexOutOfRange,
                            "line " + std::to_string(line_no) + ": orbital index " + std::to_string(x));
        const auto [i, j, k, l] = std::array<long, 4>{idx[0], idx[1], idx[2], idx[3]};
        if (i == 0 && j == 0 && k == 0 && l == 0) {
            data.e_core = value;
        } else if (i > 0 && j > 0 && k == 0 && l == 0) {
            data.set_one_body(i - 1, j - 1, value);
        } else if (i > 0 && j == 0 && k == 0 && l == 0) {
            if (!data.orbital_energies)
                data.orbital_energies = Vector::Zero(norb);
            (*data.orbital_energies)(i - 1) = value;
        } else if (i > 0 && j > 0 && k > 0 && l > 0) {
            data.set_eri(i - 1, j - 1, k - 1, l - 1, value);
        } else {
            throw Error(ErrorCode::MalformedLine,
                        "line " + std::to_string(line_no) + ": unrecognized index pattern");
        }
    }
    return data;
}

FcidumpData read_fcidump(const std::string &path) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::Io, "cannot open FCIDUMP '" + path + "'");
    return parse_fcidump(in);
}

void write_fcidump(std::ostream &out, const FcidumpData &data) {
    const Index n = data.n_orb;
    char buf[128];
    out << "&FCI NORB=" << n << ",NELEC=" << data.n_elec << ",MS2=" << data.ms2 << ",\n";
    out << " ORBSYM=";
    for (Index i = 0; i < n; ++i)
        out << "1,";
    out << "\n ISYM=1,";
    if (data.e_mean_field) {
        std::snprintf(buf, sizeof buf, "%.17g", *data.e_mean_field);
        out << "\n EHF=" << buf << ",";
    }
    out << "\n&END\n";
    auto emit = [&](double value, Index i, Index j, Index k, Index l) {
        std::snprintf(buf, sizeof buf, "%24.16E %4ld %4ld %4ld %4ld\n", value, static_cast<long>(i),
                      static_cast<long>(j), static_cast<long>(k), static_cast<long>(l));
        out << buf;
    };
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j <= i; ++j)
            for (Index k = 0; k < n; ++k)
                for (Index l = 0; l <= k; ++l) {
                    if (i * (i + 1) / 2 + j < k * (k + 1) / 2 + l)
                        continue;
                    const double value = data.eri(i, j, k, l);
                    if (value != 0.0)
                        emit(value, i + 1, j + 1, k + 1, l + 1);
                }
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j <= i; ++j)
            if (data.t(i, j) != 0.0)
                emit(data.t(i, j), i + 1, j + 1, 0, 0);
    if (data.orbital_energies)
        for (Index i = 0; i < n; ++i)
            emit((*data.orbital_energies)(i), i + 1, 0, 0, 0);
    emit(data.e_core, 0, 0, 0, 0);
}

FcidumpData hubbard_fixture(Index n_sites, double t_hop, double u) {
    if (n_sites < 2)
        throw Error(ErrorCode::InvalidSize, "Hubbard chain needs at least 2 sites");
    FcidumpData data(n_sites, n_sites, static_cast<int>(n_sites % 2));
    for (Index i = 0; i + 1 < n_sites; ++i)
        data.set_one_body(i, i + 1, -t_hop);
    for (Index i = 0; i < n_sites; ++i)
        data.set_eri(i, i, i, i, u);
    return data;
}

std::vector<Index> order_orbitals(const FcidumpData &data, OrbitalOrdering mode) {
    std::vector<Index> perm(static_cast<std::size_t>(data.n_orb));
    std::iota(perm.begin(), perm.end(), Index{0});
    if (mode == OrbitalOrdering::Reversed)
        std::reverse(perm.begin(), perm.end());
    return perm;
}

FcidumpData permute_orbitals(const FcidumpData &data, std::span<const Index> perm) {
    const Index n = data.n_orb;
    if (static_cast<Index>(perm.size()) != n)
        throw Error(ErrorCode::InvalidArgument, "orbital permutation has wrong length");
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    for (Index p : perm) {
        if (p < 0 || p >= n || seen[static_cast<std::size_t>(p)])
            throw Error(ErrorCode::InvalidArgument, "orbital ordering is not a permutation");
        seen[static_cast<std::size_t>(p)] = 1;
    }
    FcidumpData out = data;
    auto P = [&](Index a) { return perm[static_cast<std::size_t>(a)]; };
    for (Index a = 0; a < n; ++a)
        for (Index b = 0; b < n; ++b)
            out.t(a, b) = data.t(P(a), P(b));
    for (Index a = 0; a < n; ++a)
        for (Index b = 0; b < n; ++b)
            for (Index c = 0; c < n; ++c)
                for (Index d = 0; d < n; ++d)
                    out.v[static_cast<std::size_t>(((a * n + b) * n + c) * n + d)] = data.eri(P(a), P(b), P(c), P(d));
    if (data.orbital_energies)
        for (Index a = 0; a < n; ++a)
            (*out.orbital_energies)(a) = (*data.orbital_energies)(P(a));
    return out;
}

double default_chemical_potential(const FcidumpData &data) {
    const Index n = data.n_orb;
    const Index n_up = data.n_up(), n_down = data.n_down();
    // Spin-up Fock diagonal of the determinant filling the first orbitals.
    Vector eps(n);
    for (Index p = 0; p < n; ++p) {
        double e = data.t(p, p);
        for (Index i = 0; i < n_up; ++i)
            e += data.eri(p, p, i, i) - data.eri(p, i, i, p);
        for (Index i = 0; i < n_down; ++i)
            e += data.eri(p, p, i, i);
        eps(p) = e;
    }
    if (n_up == 0)
        return eps.minCoeff() - 1.0;
    if (n_up == n)
        return eps.maxCoeff() + 1.0;
    return 0.5 * (eps.head(n_up).maxCoeff() + eps.tail(n - n_up).minCoeff());
}

double determinant_energy(const FcidumpData &data, const Matrix &orbitals) {
    const Index n = data.n_orb;
    if (orbitals.rows() != n || orbitals.cols() < std::max(data.n_up(), data.n_down()))
        throw Error(ErrorCode::DimensionMismatch, "orbital matrix has wrong shape");
    const Matrix d_up = orbitals.leftCols(data.n_up()) * orbitals.leftCols(data.n_up()).transpose();
    const Matrix d_dn = orbitals.leftCols(data.n_down()) * orbitals.leftCols(data.n_down()).transpose();
    const Matrix d_tot = d_up + d_dn;
    double e = (data.t.array() * d_tot.array()).sum();
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
            for (Index k = 0; k < n; ++k)
                for (Index l = 0; l < n; ++l) {
                    const double v = data.eri(i, j, k, l);
                    if (v == 0.0)
                        continue;
                    e += 0.5 * v * (d_tot(i, j) * d_tot(k, l) - d_up(i, l) * d_up(k, j) - d_dn(i, l) * d_dn(k, j));
                }
    return e + data.e_core;
}

double core_hamiltonian_energy(const FcidumpData &data) {
    return determinant_energy(data, eig_hermitian(data.t).vectors);
}

double correlation_fraction(double e_narg, double e_mean_field, double e_fci) {
    const double denom = e_mean_field - e_fci;
    if (std::abs(denom) < 1e-12)
        throw Error(ErrorCode::DegenerateDenominator, "mean-field and FCI energies coincide");
    return (e_mean_field - e_narg) / denom;
}

} // namespace narg
