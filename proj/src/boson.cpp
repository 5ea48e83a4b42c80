#include "narg/boson.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace narg {
namespace {

constexpr Index kMaxProductDim = 20000;

double potential(const BosonModel &model, Index mode, double x) {
    const double w = model.frequencies(mode);
    return 0.5 * w * (x * x + model.lambdas(mode) * x * x * x * x);
}

struct ProductLayout {
    std::vector<Index> dims;
    std::vector<Index> strides;
    Index total = 1;
};

ProductLayout layout_of(const BosonModel &model, Index limit) {
    ProductLayout l;
    for (Index i = 0; i < model.n_modes(); ++i) {
        l.dims.push_back(model.dvr_points);
        if (l.total > limit / model.dvr_points)
            throw Error(ErrorCode::TooLarge, "direct-product dimension exceeds " + std::to_string(limit));
        l.total *= model.dvr_points;
    }
    l.strides.assign(l.dims.size(), 1);
    for (Index i = static_cast<Index>(l.dims.size()) - 2; i >= 0; --i)
        l.strides[static_cast<std::size_t>(i)] =
            l.strides[static_cast<std::size_t>(i + 1)] * l.dims[static_cast<std::size_t>(i + 1)];
    return l;
}

// Potential (one-mode anharmonic plus pair terms) at one product grid point.
double product_potential(const BosonModel &model, const std::vector<DvrBasis> &grids,
                         const std::vector<Index> &digits) {
    const Index n = model.n_modes();
    double v = 0.0;
    for (Index i = 0; i < n; ++i)
        v += potential(model, i, grids[static_cast<std::size_t>(i)].points(digits[static_cast<std::size_t>(i)]));
    for (Index i = 0; i < n; ++i) {
        const double xi = grids[static_cast<std::size_t>(i)].points(digits[static_cast<std::size_t>(i)]);
        for (Index j = i + 1; j < n; ++j) {
            const double g = model.couplings(i, j);
            if (g == 0.0)
                continue;
            const double xj = grids[static_cast<std::size_t>(j)].points(digits[static_cast<std::size_t>(j)]);
            v += g * std::sqrt(model.frequencies(i) * model.frequencies(j)) * xi * xi * xj * xj;
        }
    }
    return v;
}

template <typename Visit> void for_each_product_entry(const BosonModel &model, const ProductLayout &l, Visit &&visit) {
    const Index n = model.n_modes();
    std::vector<DvrBasis> grids;
    for (Index i = 0; i < n; ++i)
        grids.push_back(model.dvr(i));
    std::vector<Index> digits(static_cast<std::size_t>(n), 0);
    for (Index r = 0; r < l.total; ++r) {
        Index rem = r;
        for (Index i = 0; i < n; ++i) {
            digits[static_cast<std::size_t>(i)] = rem / l.strides[static_cast<std::size_t>(i)];
            rem %= l.strides[static_cast<std::size_t>(i)];
        }
        visit(r, r, product_potential(model, grids, digits));
        for (Index i = 0; i < n; ++i) {
            const Matrix &t = grids[static_cast<std::size_t>(i)].kinetic;
            const double half_w = 0.5 * model.frequencies(i);
            const Index j = digits[static_cast<std::size_t>(i)];
            for (Index jp = 0; jp < l.dims[static_cast<std::size_t>(i)]; ++jp)
                visit(r, r + (jp - j) * l.strides[static_cast<std::size_t>(i)], half_w * t(j, jp));
        }
    }
}

} // namespace

void BosonModel::validate() const {
    const Index n = frequencies.size();
    if (n < 1)
        throw Error(ErrorCode::InvalidArgument, "model has no modes");
    if (lambdas.size() != n || couplings.rows() != n || couplings.cols() != n)
        throw Error(ErrorCode::InvalidArgument, "frequency, lambda and coupling shapes disagree");
    for (Index i = 0; i < n; ++i) {
        if (!(frequencies(i) > 0.0) || !std::isfinite(frequencies(i)))
            throw Error(ErrorCode::InvalidArgument, "frequencies must be positive");
        if (couplings(i, i) != 0.0)
            throw Error(ErrorCode::InvalidArgument, "coupling diagonal must be zero");
        for (Index j = 0; j < n; ++j)
            if (couplings(i, j) != couplings(j, i))
                throw Error(ErrorCode::InvalidArgument, "coupling matrix must be symmetric");
    }
    if (dvr_points < 3)
        throw Error(ErrorCode::InvalidArgument, "need at least 3 DVR points per mode");
}

std::vector<Index> BosonModel::processing_order() const {
    std::vector<Index> order(static_cast<std::size_t>(n_modes()));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return frequencies(a) > frequencies(b); });
    return order;
}

DvrBasis BosonModel::dvr(Index i) const {
    return build_uniform_dvr(dvr_points, x_max / std::sqrt(frequencies(i)));
}

BosonModel BosonModel::permuted(std::span<const Index> order) const {
    const Index n = n_modes();
    if (static_cast<Index>(order.size()) != n)
        throw Error(ErrorCode::InvalidArgument, "permutation has wrong length");
    BosonModel out = *this;
    for (Index a = 0; a < n; ++a) {
        out.frequencies(a) = frequencies(order[static_cast<std::size_t>(a)]);
        out.lambdas(a) = lambdas(order[static_cast<std::size_t>(a)]);
        for (Index b = 0; b < n; ++b)
            out.couplings(a, b) = couplings(order[static_cast<std::size_t>(a)], order[static_cast<std::size_t>(b)]);
    }
    return out;
}

BosonModel BosonModel::uniform(const std::vector<double> &frequencies, double lambda,
                               double coupling, Index dvr_points) {
    const Index n = static_cast<Index>(frequencies.size());
    BosonModel m;
    m.frequencies = Eigen::Map<const Vector>(frequencies.data(), n);
    m.lambdas = Vector::Constant(n, lambda);
    m.couplings = Matrix::Constant(n, n, coupling);
    m.couplings.diagonal().setZero();
    m.dvr_points = dvr_points;
    return m;
}

std::string x2_name(Index mode) { return "x2_" + std::to_string(mode); }

Matrix mode_hamiltonian(const BosonModel &model, Index mode) {
    if (mode < 0 || mode >= model.n_modes())
        throw Error(ErrorCode::IndexOutOfRange, "mode " + std::to_string(mode) + " does not exist");
    const DvrBasis grid = model.dvr(mode);
    Matrix h = 0.5 * model.frequencies(mode) * grid.kinetic;
    for (Index n = 0; n < grid.size(); ++n)
        h(n, n) += potential(model, mode, grid.points(n));
    return h;
}

ScaleSite make_site(const BosonModel &model, Index mode, std::span<const Index> processed,
                    const BlockState &block) {
    if (mode < 0 || mode >= model.n_modes())
        throw Error(ErrorCode::IndexOutOfRange, "mode " + std::to_string(mode) + " does not exist");
    const DvrBasis grid = model.dvr(mode);
    ScaleSite site;
    site.n_config = grid.size();
    site.diagonal_energy = grid.points.unaryExpr([&](double x) { return potential(model, mode, x); });
    site.couplings.push_back({0.5 * model.frequencies(mode) * grid.kinetic, kIdentity});
    const Vector x2 = grid.points.array().square();
    for (Index i : processed) {
        const double g = model.couplings(i, mode);
        if (g == 0.0)
            continue;
        const std::string name = x2_name(i);
        if (!block.ops.contains(name))
            throw Error(ErrorCode::MissingRenormalizedOperator,
                        "block lacks " + name + " needed by mode " + std::to_string(mode));
        const double scale = g * std::sqrt(model.frequencies(i) * model.frequencies(mode));
        site.block_terms.push_back({scale * x2, name});
    }
    return site;
}

BosonResult solve_narg(const BosonModel &model, const BosonRunOptions &options,
                       const StepObserver &observer) {
    model.validate();
    if (options.n_levels < 1 || (!options.full && options.retain < 1))
        throw Error(ErrorCode::InvalidCount, "retain and n_levels must be positive");

    BosonResult result;
    result.order = model.processing_order();
    const auto &order = result.order;
    const Index n_modes = model.n_modes();

    // Position of the last step that couples to each mode's x^2.
    std::vector<Index> last_use(static_cast<std::size_t>(n_modes), -1);
    for (Index a = 0; a < n_modes; ++a)
        for (Index b = a + 1; b < n_modes; ++b)
            if (model.couplings(order[static_cast<std::size_t>(a)], order[static_cast<std::size_t>(b)]) != 0.0)
                last_use[static_cast<std::size_t>(a)] = b;

    BlockState block = BlockState::trivial();
    std::vector<Index> processed;
    for (Index step = 0; step < n_modes; ++step) {
        const Index mode = order[static_cast<std::size_t>(step)];
        const ScaleSite site = make_site(model, mode, processed, block);
        const bool last = step + 1 == n_modes;

        StepOptions opts;
        opts.d_adiabatic = options.full ? 0 : (options.d_adiabatic > 0 ? options.d_adiabatic : options.retain);
        opts.d_retain = last ? options.n_levels : (options.full ? 0 : options.retain);

        OpSpecs specs;
        const Matrix id = Matrix::Identity(site.n_config, site.n_config);
        for (Index a = 0; a < step; ++a)
            if (last_use[static_cast<std::size_t>(a)] > step)
                specs[x2_name(order[static_cast<std::size_t>(a)])] = {{1.0, x2_name(order[static_cast<std::size_t>(a)]), id}};
        if (last_use[static_cast<std::size_t>(step)] > step) {
            const Vector x2 = model.dvr(mode).points.array().square();
            specs[x2_name(mode)] = {{1.0, kIdentity, x2.asDiagonal()}};
        }
        if (observer)
            observer(block, site, opts);
        block = narg_step(block, site, opts, specs);
        processed.push_back(mode);
    }
    result.energies = block.energies;
    result.final_block = std::move(block);
    return result;
}

Matrix product_hamiltonian(const BosonModel &model) {
    model.validate();
    const ProductLayout l = layout_of(model, kMaxProductDim);
    Matrix h = Matrix::Zero(l.total, l.total);
    for_each_product_entry(model, l, [&](Index r, Index c, double value) { h(r, c) += value; });
    return h;
}

Vector apply_product_hamiltonian(const BosonModel &model, const Vector &v) {
    model.validate();
    const ProductLayout l = layout_of(model, std::numeric_limits<Index>::max() / 4);
    if (v.size() != l.total)
        throw Error(ErrorCode::DimensionMismatch, "vector length differs from product dimension");
    Vector out = Vector::Zero(l.total);
    for_each_product_entry(model, l, [&](Index r, Index c, double value) { out(r) += value * v(c); });
    return out;
}

Vector exact_diag_oracle(const BosonModel &model, Index n_levels) {
    const Matrix h = product_hamiltonian(model);
    return eig_hermitian_lowest(h, std::min<Index>(n_levels, h.rows())).values;
}

} // namespace narg
