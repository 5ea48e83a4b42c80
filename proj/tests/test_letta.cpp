#include <doctest.h>

#include <cmath>

#include "narg/boson.hpp"
#include "narg/letta.hpp"

using namespace narg;

namespace {

BosonResult run(const BosonModel &model, Index retain, Index n_levels) {
    BosonRunOptions opts;
    opts.full = retain == 0;
    opts.retain = retain;
    opts.n_levels = n_levels;
    return solve_narg(model, opts);
}

} // namespace

TEST_SUITE("letta") {

TEST_CASE("network structure") {
    const BosonModel model = BosonModel::uniform({3.0, 2.0, 1.0}, 0.1, 0.1, 5);
    const auto r = run(model, 6, 3);
    const LettaNetwork net = extract_letta(r.final_block.log);
    CHECK(net.n_scales() == 3);
    REQUIRE(net.tensors.size() == 3);
    CHECK(net.tensors[0].legs == std::vector<std::string>{"j0", "j1", "b1"});
    CHECK(net.tensors[1].legs == std::vector<std::string>{"j1", "j2", "b1", "b2"});
    CHECK(net.tensors[2].legs == std::vector<std::string>{"j2", "b2", "alpha"});
    CHECK(net.terminal_dim() == 3);
    for (const auto &t : net.tensors)
        CHECK(static_cast<Index>(t.data.size()) == t.size());
}

TEST_CASE("contracted state matches the expanded retained basis") {
    const BosonModel model = BosonModel::uniform({3.0, 2.0, 1.0}, 0.1, 0.1, 5);
    const auto r = run(model, 6, 3);
    const LettaNetwork net = extract_letta(r.final_block.log);
    const Matrix basis = expand_retained_basis(r.final_block.log);
    for (Index a = 0; a < 3; ++a) {
        const Vector psi = contract_state(net, a);
        CHECK(std::abs(psi.norm() - 1.0) < 1e-10);
        CHECK((psi - basis.col(a)).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("two modes at full retention give the exact eigenvectors") {
    const BosonModel model = BosonModel::uniform({2.0, 1.0}, 0.1, 0.2, 8);
    const auto r = run(model, 0, 3);
    const LettaNetwork net = extract_letta(r.final_block.log);
    const BosonModel ordered = model.permuted(r.order);
    const EigenPairs ed = eig_hermitian(product_hamiltonian(ordered));
    for (Index a = 0; a < 3; ++a) {
        Vector psi = contract_state(net, a);
        Vector ref = ed.vectors.col(a);
        fix_global_phase(psi);
        fix_global_phase(ref);
        CHECK((psi - ref).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("truncated three-mode state reproduces its energy") {
    const BosonModel model = BosonModel::uniform({3.1, 2.0, 1.3}, 0.2, 0.1, 6);
    const auto r = run(model, 8, 2);
    const LettaNetwork net = extract_letta(r.final_block.log);
    const BosonModel ordered = model.permuted(r.order);
    for (Index a = 0; a < 2; ++a) {
        const Vector psi = contract_state(net, a);
        CHECK(std::abs(psi.dot(apply_product_hamiltonian(ordered, psi)) - r.energies(a)) < 1e-8);
    }
}

TEST_CASE("amplitudes agree with the contracted vector") {
    const BosonModel model = BosonModel::uniform({3.0, 2.0, 1.0}, 0.1, 0.1, 4);
    const auto r = run(model, 5, 2);
    const LettaNetwork net = extract_letta(r.final_block.log);
    const Vector psi = contract_state(net, 1);
    double sum = 0.0;
    Index flat = 0;
    for (Index a = 0; a < 4; ++a)
        for (Index b = 0; b < 4; ++b)
            for (Index c = 0; c < 4; ++c, ++flat) {
                const std::vector<Index> cfg{a, b, c};
                const double amp = amplitude(net, cfg, 1);
                CHECK(std::abs(amp - psi(flat)) < 1e-12);
                CHECK(std::abs(amp) <= 1.0 + 1e-12);
                sum += amp * amp;
            }
    CHECK(std::abs(sum - 1.0) < 1e-10);
    const std::vector<Index> bad{0, 9, 0};
    CHECK_THROWS_AS(amplitude(net, bad, 0), Error);
}

TEST_CASE("decoupled modes give rank-one configuration slices") {
    const BosonModel model = BosonModel::uniform({2.0, 1.0, 0.5}, 0.0, 0.0, 5);
    const auto r = run(model, 0, 1);
    const LettaNetwork net = extract_letta(r.final_block.log);
    // Ground state is a product, so it factorizes across every cut.
    const Vector psi = contract_state(net, 0);
    const Eigen::Map<const Matrix> cut(psi.data(), 25, 5);
    Eigen::JacobiSVD<Matrix> svd(cut);
    CHECK(svd.singularValues()(1) < 1e-10);
}

TEST_CASE("leg-tied pair rank can exceed the adiabatic dimension") {
    // Configuration-dependent fibers: the tie over j_{k+1} keeps a separate
    // rank per configuration, so the total exceeds the bond dimension.
    const BosonModel model = BosonModel::uniform({3.0, 2.0, 1.0}, 0.1, 0.4, 5);
    const auto r = run(model, 3, 1);
    const LettaNetwork net = extract_letta(r.final_block.log);
    const Index bond = r.final_block.log[1].adiabatic_dim();
    CHECK(leg_tie_rank(net, 0) > bond);
    CHECK_THROWS_AS(leg_tie_rank(net, 2), Error);
}

TEST_CASE("JSON round trip and corruption") {
    const BosonModel model = BosonModel::uniform({2.0, 1.0}, 0.1, 0.2, 5);
    const auto r = run(model, 4, 2);
    const LettaNetwork net = extract_letta(r.final_block.log);
    const std::string text = letta_to_json(net);
    const LettaNetwork back = letta_from_json(text);
    CHECK((contract_state(back, 1) - contract_state(net, 1)).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(letta_from_json(text.substr(0, text.size() / 2)), Error);
    CHECK_THROWS_AS(letta_from_json("{\"format\":\"other\",\"version\":1}"), Error);
}

TEST_CASE("extraction and contraction errors") {
    try {
        extract_letta({});
        FAIL("expected IncompleteLog");
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::IncompleteLog);
    }
    const BosonModel model = BosonModel::uniform({2.0, 1.0}, 0.1, 0.2, 5);
    const auto r = run(model, 4, 2);
    const LettaNetwork net = extract_letta(r.final_block.log);
    try {
        contract_state(net, 7);
        FAIL("expected IndexOutOfRange");
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::IndexOutOfRange);
    }
    LettaNetwork big = net;
    big.physical_dims = {2000, 2000};
    try {
        contract_state(big, 0);
        FAIL("expected TooLarge");
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::TooLarge);
    }
}

TEST_CASE("global phase convention") {
    Vector v{{0.1, -0.9, 0.3}};
    fix_global_phase(v);
    CHECK(v(1) == 0.9);
}

}
