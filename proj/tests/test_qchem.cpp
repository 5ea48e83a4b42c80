#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "narg/qchem.hpp"

using namespace narg;

namespace {

std::vector<Index> identity_order(Index n) {
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    return order;
}

FcidumpData parse_text(const std::string &text) {
    std::istringstream in(text);
    return parse_fcidump(in);
}

ErrorCode parse_error(const std::string &text) {
    try {
        parse_text(text);
    } catch (const Error &e) {
        return e.code();
    }
    FAIL("expected a parse error");
    return ErrorCode::Io;
}

FcidumpData random_integrals(Index n, Index n_elec, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    FcidumpData d(n, n_elec, static_cast<int>(n_elec % 2));
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j <= i; ++j)
            d.set_one_body(i, j, u(rng));
    // Real orbitals: (ij|kl) with 8-fold symmetry, made positive-ish on the diagonal.
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j <= i; ++j)
            for (Index k = 0; k < n; ++k)
                for (Index l = 0; l <= k; ++l)
                    if (i * n + j >= k * n + l)
                        d.set_eri(i, j, k, l, 0.2 * u(rng) + (i == j && k == l ? 0.5 : 0.0));
    d.e_core = 0.3;
    return d;
}

// Eigenvalues of the Fock Hamiltonian restricted to one (N_up, N_down) sector.
Vector sector_spectrum(const FcidumpData &d, Index n_up, Index n_down) {
    const Matrix h = Matrix(fock_hamiltonian(d));
    const Vector nu = Matrix(fock_number(d, 0)).diagonal();
    const Vector nd = Matrix(fock_number(d, 1)).diagonal();
    std::vector<Index> idx;
    for (Index i = 0; i < nu.size(); ++i)
        if (std::lround(nu(i)) == n_up && std::lround(nd(i)) == n_down)
            idx.push_back(i);
    const Index m = static_cast<Index>(idx.size());
    Matrix sub(m, m);
    for (Index a = 0; a < m; ++a)
        for (Index b = 0; b < m; ++b)
            sub(a, b) = h(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
    return eig_hermitian(sub).values.array() + d.e_core;
}

Vector full_determinant_spectrum(const FcidumpData &d, Index n_up, Index n_down) {
    return eig_hermitian(determinant_hamiltonian(d, n_up, n_down)).values.array() + d.e_core;
}

} // namespace

TEST_SUITE("qchem") {

TEST_CASE("parser reads header, core energy and symmetric integrals") {
    const FcidumpData d = parse_text(" &FCI NORB=2, NELEC=2, MS2=0, EHF=-1.5,\n &END\n"
                                     " 0.5D+00 1 2 1 1\n -1.0 1 1 0 0\n 0.25 2 1 0 0\n 0.7 0 0 0 0\n");
    CHECK(d.n_orb == 2);
    CHECK(d.n_elec == 2);
    CHECK(d.e_core == doctest::Approx(0.7));
    CHECK(d.e_mean_field == doctest::Approx(-1.5));
    CHECK(d.t(0, 0) == -1.0);
    CHECK(d.t(0, 1) == 0.25);
    CHECK(d.t(1, 0) == 0.25);
    for (auto [i, j, k, l] : {std::array<Index, 4>{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}})
        CHECK(d.eri(i, j, k, l) == 0.5);
    CHECK(d.eri(0, 0, 0, 0) == 0.0);
}

TEST_CASE("parser errors") {
    CHECK(parse_error("NORB=2\n") == ErrorCode::MalformedHeader);
    CHECK(parse_error(" &FCI NELEC=2,MS2=0\n &END\n") == ErrorCode::MalformedHeader);
    CHECK(parse_error(" &FCI NORB=2,NELEC=2,MS2=0\n") == ErrorCode::MalformedHeader);
    CHECK(parse_error(" &FCI NORB=2,NELEC=2,MS2=0\n &END\n 1.0 3 1 1 1\n") == ErrorCode::IndexOutOfRange);
    try {
        parse_text(" &FCI NORB=2,NELEC=2,MS2=0\n &END\n 1.0 1 1 1 1\n garbage here\n");
        FAIL("expected MalformedLine");
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::MalformedLine);
        CHECK(std::string(e.what()).find("line 4") != std::string::npos);
    }
    CHECK_THROWS_AS(read_fcidump("/nonexistent/file"), Error);
}

TEST_CASE("two-orbital molecule: closed-form two-determinant ground state") {
    const FcidumpData d = read_fcidump(std::string(NARG_TEST_DATA) + "/h2_sto3g_like.fcidump");
    CHECK(d.n_orb == 2);
    const double e1 = 2 * d.t(0, 0) + d.eri(0, 0, 0, 0);
    const double e2 = 2 * d.t(1, 1) + d.eri(1, 1, 1, 1);
    const double k = d.eri(0, 1, 0, 1);
    const double exact = 0.5 * (e1 + e2) - std::sqrt(0.25 * (e2 - e1) * (e2 - e1) + k * k) + d.e_core;
    CHECK(std::abs(fci_oracle(d, 1, 1, 1)(0) - exact) < 1e-12);
    GrowOptions opts;
    opts.retain = 0;
    const auto order = identity_order(2);
    CHECK(std::abs(grow_block(d, order, opts).energies(0) - exact) < 1e-10);
}

TEST_CASE("write and read round trip") {
    const FcidumpData d = random_integrals(3, 2, 7);
    std::stringstream s;
    write_fcidump(s, d);
    const FcidumpData back = parse_fcidump(s);
    CHECK((back.t - d.t).cwiseAbs().maxCoeff() < 1e-14);
    double diff = 0.0;
    for (std::size_t i = 0; i < d.v.size(); ++i)
        diff = std::max(diff, std::abs(back.v[i] - d.v[i]));
    CHECK(diff < 1e-14);
    CHECK(back.e_core == doctest::Approx(d.e_core));
}

TEST_CASE("Hubbard dimer closed forms") {
    // U = 0: 2 electrons in the bonding orbital, 2 * (-t).
    CHECK(std::abs(fci_oracle(hubbard_fixture(2, 1.0, 0.0), 1, 1, 1)(0) + 2.0) < 1e-12);
    CHECK(std::abs(fci_oracle(hubbard_fixture(2, 1.0, 4.0), 1, 1, 1)(0) - (2.0 - 2.0 * std::sqrt(2.0))) < 1e-12);
    CHECK_THROWS_AS(hubbard_fixture(1, 1.0, 1.0), Error);
}

TEST_CASE("orbital relabelling leaves the spectrum unchanged") {
    const FcidumpData d = random_integrals(4, 4, 11);
    const auto rev = order_orbitals(d, OrbitalOrdering::Reversed);
    CHECK(rev == std::vector<Index>{3, 2, 1, 0});
    const Vector a = fci_oracle(d, 2, 2, 4);
    const Vector b = fci_oracle(permute_orbitals(d, rev), 2, 2, 4);
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-10);
    const std::vector<Index> bad{0, 0, 1, 2};
    CHECK_THROWS_AS(permute_orbitals(d, bad), Error);
}

TEST_CASE("local fermion operators") {
    const Matrix up = FermionSite::annihilate(0), dn = FermionSite::annihilate(1);
    const Matrix id = Matrix::Identity(4, 4);
    CHECK((up * up.transpose() + up.transpose() * up - id).cwiseAbs().maxCoeff() == 0.0);
    CHECK((dn * dn.transpose() + dn.transpose() * dn - id).cwiseAbs().maxCoeff() == 0.0);
    CHECK((up * dn + dn * up).cwiseAbs().maxCoeff() == 0.0);
    CHECK((up * dn.transpose() + dn.transpose() * up).cwiseAbs().maxCoeff() == 0.0);
    const Matrix p = FermionSite::parity();
    CHECK((p * up + up * p).cwiseAbs().maxCoeff() == 0.0);
    CHECK((FermionSite::number(0) - up.transpose() * up).cwiseAbs().maxCoeff() == 0.0);
    CHECK(c_name(3) != c_parity_name(3));
}

TEST_CASE("second-quantized and determinant spectra agree") {
    for (Index n = 2; n <= 4; ++n) {
        const FcidumpData hub = hubbard_fixture(n, 1.0, 3.0);
        const FcidumpData rnd = random_integrals(n, n, static_cast<unsigned>(n));
        for (const FcidumpData *d : {&hub, &rnd})
            for (Index nu = 0; nu <= n; ++nu)
                for (Index nd = 0; nd <= nu; ++nd) {
                    const Vector a = sector_spectrum(*d, nu, nd);
                    const Vector b = full_determinant_spectrum(*d, nu, nd);
                    REQUIRE(a.size() == b.size());
                    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-10);
                }
    }
}

TEST_CASE("untruncated growth reproduces the ground state") {
    for (Index n = 2; n <= 5; ++n) {
        for (const FcidumpData &d : {hubbard_fixture(n, 1.0, 4.0), random_integrals(n, 2 * (n / 2), 20u + static_cast<unsigned>(n))}) {
            GrowOptions opts;
            opts.retain = 0;
            opts.n_levels = 1;
            const auto r = grow_block(d, identity_order(n), opts);
            const double fci = fci_oracle(d, d.n_up(), d.n_down(), 1)(0);
            CHECK(std::abs(r.energies(0) - fci) < 1e-8);
            CHECK(std::abs(r.number_expectation(0) - static_cast<double>(d.n_elec)) < 1e-10);
        }
    }
}

TEST_CASE("truncated growth stays above the exact energy") {
    const FcidumpData d = hubbard_fixture(5, 1.0, 2.0);
    const double fci = fci_oracle(d, d.n_up(), d.n_down(), 1)(0);
    for (Index dd : {4, 8, 16, 32}) {
        GrowOptions opts;
        opts.retain = dd;
        const auto r = grow_block(d, identity_order(5), opts);
        CHECK(r.energies(0) >= fci - 1e-10);
        CHECK(std::abs(r.number_expectation(0) - static_cast<double>(d.n_elec)) < 1e-10);
    }
}

TEST_CASE("one electron on two sites") {
    FcidumpData d = hubbard_fixture(2, 1.0, 5.0);
    d.n_elec = 1;
    d.ms2 = 1;
    GrowOptions opts;
    opts.retain = 0;
    opts.n_levels = 2;
    const auto r = grow_block(d, identity_order(2), opts);
    CHECK(std::abs(r.energies(0) + 1.0) < 1e-10);
    CHECK(std::abs(r.energies(1) - 1.0) < 1e-10);
}

TEST_CASE("correlation fraction") {
    CHECK(correlation_fraction(-2.0, -1.0, -2.0) == doctest::Approx(1.0));
    CHECK(correlation_fraction(-1.0, -1.0, -2.0) == doctest::Approx(0.0));
    CHECK(correlation_fraction(-1.5, -1.0, -2.0) == doctest::Approx(0.5));
    try {
        correlation_fraction(-1.0, -1.0, -1.0);
        FAIL("expected DegenerateDenominator");
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::DegenerateDenominator);
    }
}

TEST_CASE("core Hamiltonian determinant is exact without interactions") {
    const FcidumpData d = hubbard_fixture(6, 1.0, 0.0);
    CHECK(std::abs(core_hamiltonian_energy(d) - fci_oracle(d, 3, 3, 1)(0)) < 1e-10);
    const FcidumpData u = hubbard_fixture(6, 1.0, 2.0);
    CHECK(core_hamiltonian_energy(u) > fci_oracle(u, 3, 3, 1)(0));
}

TEST_CASE("grow_block input validation") {
    const FcidumpData d = hubbard_fixture(2, 1.0, 1.0);
    GrowOptions opts;
    opts.n_levels = 0;
    CHECK_THROWS_AS(grow_block(d, identity_order(2), opts), Error);
}

}
