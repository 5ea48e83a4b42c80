#include "narg/core.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

namespace narg {
namespace {

// Runs body(i) for i in [0, n). Results must be written to slot i so the
// outcome does not depend on scheduling.
template <typename Body> void parallel_for(Index n, Index work_per_item, Body &&body) {
    const unsigned hw = std::thread::hardware_concurrency();
    if (hw < 2 || n < 2 || work_per_item < 64 * 64 * 64) {
        for (Index i = 0; i < n; ++i)
            body(i);
        return;
    }
    const Index n_threads = std::min<Index>(n, hw);
    std::exception_ptr failure;
    std::mutex failure_lock;
    std::vector<std::thread> pool;
    for (Index t = 0; t < n_threads; ++t) {
        pool.emplace_back([&, t] {
            for (Index i = t; i < n; i += n_threads) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(failure_lock);
                    if (!failure)
                        failure = std::current_exception();
                }
            }
        });
    }
    for (auto &th : pool)
        th.join();
    if (failure)
        std::rethrow_exception(failure);
}

void check_square(const Matrix &m, Index n, const std::string &what) {
    if (m.rows() != n || m.cols() != n)
        throw Error(ErrorCode::DimensionMismatch,
                    what + " is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                        ", expected " + std::to_string(n) + "x" + std::to_string(n));
}

std::vector<Index> offsets_of(std::span<const Index> dims) {
    std::vector<Index> off(dims.size() + 1, 0);
    for (std::size_t i = 0; i < dims.size(); ++i)
        off[i + 1] = off[i] + dims[i];
    return off;
}

std::vector<Index> rotation_dims(std::span<const Matrix> rotations) {
    std::vector<Index> dims;
    dims.reserve(rotations.size());
    for (const auto &r : rotations)
        dims.push_back(r.cols());
    return dims;
}

// out += spec * rhs, with spec applied block-sparsely in the superblock basis.
void apply_dressed(const BlockState &block, const ScaleSite &site,
                   std::span<const Matrix> rotations, const OpSpec &spec, const Matrix &rhs,
                   Matrix &out) {
    const Index n_config = static_cast<Index>(rotations.size());
    const auto dims = rotation_dims(rotations);
    const auto off = offsets_of(dims);
    for (const OpTerm &term : spec) {
        check_square(term.site_matrix, n_config, "operator site matrix");
        const Matrix *op = resolve_operator(block, site, term.block_op);
        if (op)
            check_square(*op, block.dim(), "block operator '" + term.block_op + "'");
        for (Index n = 0; n < n_config; ++n) {
            bool used = false;
            for (Index m = 0; m < n_config; ++m)
                used = used || term.site_matrix(m, n) != 0.0;
            if (!used)
                continue;
            const Matrix &cn = rotations[static_cast<std::size_t>(n)];
            Matrix lifted = cn * rhs.middleRows(off[n], dims[n]);
            if (op)
                lifted = (*op) * lifted;
            for (Index m = 0; m < n_config; ++m) {
                const double s = term.site_matrix(m, n);
                if (s == 0.0)
                    continue;
                out.middleRows(off[m], dims[m]).noalias() +=
                    (term.coefficient * s) * (rotations[static_cast<std::size_t>(m)].transpose() * lifted);
            }
        }
    }
}

// Diagonal of the dressed operator; a diagonal block operator costs only
// O(dim^2) per configuration.
Vector dressed_diagonal(const BlockState &block, const ScaleSite &site,
                        std::span<const Matrix> rotations, const OpSpec &spec) {
    const Index n_config = static_cast<Index>(rotations.size());
    const auto dims = rotation_dims(rotations);
    const auto off = offsets_of(dims);
    Vector out = Vector::Zero(off.back());
    for (const OpTerm &term : spec) {
        check_square(term.site_matrix, n_config, "operator site matrix");
        const Matrix *op = resolve_operator(block, site, term.block_op);
        const bool diagonal = op && Matrix(op->diagonal().asDiagonal()) == *op;
        for (Index n = 0; n < n_config; ++n) {
            const double s = term.coefficient * term.site_matrix(n, n);
            if (s == 0.0)
                continue;
            const Matrix &c = rotations[static_cast<std::size_t>(n)];
            Vector d;
            if (!op)
                d = c.colwise().squaredNorm().transpose();
            else if (diagonal)
                d = (c.array().square().colwise() * op->diagonal().array()).colwise().sum().transpose();
            else
                d = (c.array() * ((*op) * c).array()).colwise().sum().transpose();
            out.segment(off[n], dims[n]) += s * d;
        }
    }
    return out;
}

std::vector<char> nonzero_mask(const Matrix &site_matrix) {
    const Index n = site_matrix.rows();
    std::vector<char> mask(static_cast<std::size_t>(n * n), 0);
    for (Index m = 0; m < n; ++m)
        for (Index k = 0; k < n; ++k)
            mask[static_cast<std::size_t>(m * n + k)] = site_matrix(m, k) != 0.0;
    return mask;
}

} // namespace

BlockState BlockState::trivial() {
    BlockState b;
    b.energies = Vector::Zero(1);
    return b;
}

const Matrix &OverlapBlock::at(Index m, Index n) const {
    if (m < 0 || n < 0 || m >= n_config || n >= n_config || !has(m, n))
        throw Error(ErrorCode::DimensionMismatch,
                    "overlap block (" + std::to_string(m) + "," + std::to_string(n) +
                        ") of '" + operator_name + "' was not computed");
    return blocks[static_cast<std::size_t>(m * n_config + n)];
}

const Matrix *resolve_operator(const BlockState &block, const ScaleSite &site,
                               const std::string &name) {
    if (name == kIdentity)
        return nullptr;
    if (auto it = block.ops.find(name); it != block.ops.end())
        return &it->second;
    if (auto it = site.local_ops.find(name); it != site.local_ops.end())
        return &it->second;
    throw Error(ErrorCode::UnknownOperator, "no block operator named '" + name + "'");
}

Matrix adiabatic_hamiltonian(const BlockState &block, const ScaleSite &site, Index n) {
    const Index dim = block.dim();
    if (site.diagonal_energy.size() != site.n_config)
        throw Error(ErrorCode::DimensionMismatch, "diagonal_energy length differs from n_config");
    Matrix h = block.energies.asDiagonal();
    for (const BlockTerm &term : site.block_terms) {
        if (term.weights.size() != site.n_config)
            throw Error(ErrorCode::DimensionMismatch, "block term weights have wrong length");
        const double w = term.weights(n);
        if (w == 0.0)
            continue;
        const Matrix *op = resolve_operator(block, site, term.op);
        if (!op) {
            h.diagonal().array() += w;
        } else {
            check_square(*op, dim, "block operator '" + term.op + "'");
            h.noalias() += w * (*op);
        }
    }
    h.diagonal().array() += site.diagonal_energy(n);
    return h;
}

std::vector<EigenPairs> adiabatic_solve(const BlockState &block, const ScaleSite &site,
                                        Index d_adiabatic, std::span<const std::string> resolvers) {
    const Index dim = block.dim();
    const Index keep = (d_adiabatic <= 0) ? dim : std::min(d_adiabatic, dim);
    std::vector<Matrix> resolver_ops;
    for (const auto &name : resolvers) {
        const Matrix *op = resolve_operator(block, site, name);
        resolver_ops.push_back(op ? *op : Matrix::Identity(dim, dim));
    }
    std::vector<EigenPairs> out(static_cast<std::size_t>(site.n_config));
    parallel_for(site.n_config, dim * dim * dim, [&](Index n) {
        Matrix h = adiabatic_hamiltonian(block, site, n);
        // A partial spectrum is enough once the retained fraction is small;
        // the margin lets degenerate multiplets at the cut be resolved.
        EigenPairs pairs = (keep == dim || dim <= 256)
                               ? eig_hermitian(h)
                               : eig_hermitian_lowest(h, std::min(dim, keep + 32));
        resolve_degeneracies(pairs, resolver_ops);
        out[static_cast<std::size_t>(n)] = truncate_low(pairs, keep);
    });
    return out;
}

OverlapBlock overlap_dressed(std::span<const Matrix> rotations, const Matrix *op,
                             const std::string &name, const std::vector<char> *mask) {
    const Index n_config = static_cast<Index>(rotations.size());
    OverlapBlock out;
    out.operator_name = name;
    out.n_config = n_config;
    if (n_config == 0)
        return out;
    const Index rows = rotations.front().rows();
    for (const auto &r : rotations)
        if (r.rows() != rows)
            throw Error(ErrorCode::DimensionMismatch, "rotations differ in row dimension");
    if (op)
        check_square(*op, rows, "dressed operator");
    if (mask && mask->size() != static_cast<std::size_t>(n_config * n_config))
        throw Error(ErrorCode::DimensionMismatch, "overlap mask has wrong size");

    out.blocks.assign(static_cast<std::size_t>(n_config * n_config), Matrix());
    out.present.assign(static_cast<std::size_t>(n_config * n_config), 0);
    std::vector<Matrix> lifted(static_cast<std::size_t>(n_config));
    for (Index n = 0; n < n_config; ++n) {
        bool used = false;
        for (Index m = 0; m < n_config; ++m)
            used = used || !mask || (*mask)[static_cast<std::size_t>(m * n_config + n)];
        if (used && op)
            lifted[static_cast<std::size_t>(n)] = (*op) * rotations[static_cast<std::size_t>(n)];
    }
    for (Index m = 0; m < n_config; ++m) {
        for (Index n = 0; n < n_config; ++n) {
            const auto slot = static_cast<std::size_t>(m * n_config + n);
            if (mask && !(*mask)[slot])
                continue;
            const Matrix &cm = rotations[static_cast<std::size_t>(m)];
            const Matrix &cn = rotations[static_cast<std::size_t>(n)];
            if (!op && m == n)
                out.blocks[slot] = Matrix::Identity(cm.cols(), cn.cols());
            else if (!op)
                out.blocks[slot] = cm.transpose() * cn;
            else
                out.blocks[slot] = cm.transpose() * lifted[static_cast<std::size_t>(n)];
            out.present[slot] = 1;
        }
    }
    return out;
}

Matrix superblock_assemble(const ScaleSite &site, std::span<const EigenPairs> adiabatic,
                           std::span<const OverlapBlock> dressed) {
    const Index n_config = site.n_config;
    if (static_cast<Index>(adiabatic.size()) != n_config)
        throw Error(ErrorCode::DimensionMismatch, "one adiabatic solution per configuration needed");
    if (dressed.size() != site.couplings.size())
        throw Error(ErrorCode::DimensionMismatch, "one dressed overlap per coupling needed");
    std::vector<Index> dims;
    for (const auto &p : adiabatic)
        dims.push_back(p.size());
    const auto off = offsets_of(dims);
    const Index total = off.back();

    Matrix h = Matrix::Zero(total, total);
    for (Index n = 0; n < n_config; ++n)
        h.diagonal().segment(off[n], dims[n]) = adiabatic[static_cast<std::size_t>(n)].values;

    for (std::size_t c = 0; c < site.couplings.size(); ++c) {
        const Matrix &o = site.couplings[c].site_matrix;
        check_square(o, n_config, "coupling site matrix");
        const OverlapBlock &a = dressed[c];
        if (a.n_config != n_config)
            throw Error(ErrorCode::DimensionMismatch, "dressed overlap has wrong configuration count");
        for (Index m = 0; m < n_config; ++m) {
            for (Index n = 0; n < n_config; ++n) {
                if (o(m, n) == 0.0)
                    continue;
                const Matrix &blk = a.at(m, n);
                if (blk.rows() != dims[m] || blk.cols() != dims[n])
                    throw Error(ErrorCode::DimensionMismatch, "dressed block has wrong shape");
                h.block(off[m], off[n], dims[m], dims[n]).noalias() += o(m, n) * blk;
            }
        }
    }
    const double defect = hermiticity_defect(h);
    if (defect > kHermitianTolerance)
        throw Error(ErrorCode::NonHermitianResult,
                    "superblock asymmetry " + std::to_string(defect) +
                        " (missing Hermitian-conjugate coupling?)");
    return 0.5 * (h + h.transpose());
}

Matrix dressed_operator(const BlockState &block, const ScaleSite &site,
                        std::span<const Matrix> rotations, const OpSpec &spec) {
    const Index n_config = static_cast<Index>(rotations.size());
    const auto dims = rotation_dims(rotations);
    const auto off = offsets_of(dims);
    Matrix out = Matrix::Zero(off.back(), off.back());
    for (const OpTerm &term : spec) {
        check_square(term.site_matrix, n_config, "operator site matrix");
        const Matrix *op = resolve_operator(block, site, term.block_op);
        if (op)
            check_square(*op, block.dim(), "block operator '" + term.block_op + "'");
        std::vector<char> mask = nonzero_mask(term.site_matrix);
        const OverlapBlock a = overlap_dressed(rotations, op, term.block_op, &mask);
        for (Index m = 0; m < n_config; ++m)
            for (Index n = 0; n < n_config; ++n)
                if (const double s = term.site_matrix(m, n); s != 0.0)
                    out.block(off[m], off[n], dims[m], dims[n]).noalias() +=
                        (term.coefficient * s) * a.at(m, n);
    }
    return out;
}

std::map<std::string, Matrix> renormalize_operators(const BlockState &block,
                                                    const ScaleSite &site,
                                                    std::span<const Matrix> rotations,
                                                    const Matrix &superblock_vectors,
                                                    const OpSpecs &op_specs) {
    const auto dims = rotation_dims(rotations);
    const Index total = offsets_of(dims).back();
    if (superblock_vectors.rows() != total)
        throw Error(ErrorCode::DimensionMismatch, "superblock vectors have wrong row count");
    std::map<std::string, Matrix> out;
    for (const auto &[name, spec] : op_specs) {
        Matrix applied = Matrix::Zero(total, superblock_vectors.cols());
        apply_dressed(block, site, rotations, spec, superblock_vectors, applied);
        out[name] = superblock_vectors.transpose() * applied;
    }
    return out;
}

BlockState narg_step(const BlockState &block, const ScaleSite &site, const StepOptions &options,
                     const OpSpecs &op_specs) {
    const auto adiabatic = adiabatic_solve(block, site, options.d_adiabatic, options.block_resolvers);
    std::vector<Matrix> rotations;
    rotations.reserve(adiabatic.size());
    for (const auto &p : adiabatic)
        rotations.push_back(p.vectors);

    std::vector<OverlapBlock> dressed;
    dressed.reserve(site.couplings.size());
    for (const auto &c : site.couplings) {
        const auto mask = nonzero_mask(c.site_matrix);
        dressed.push_back(overlap_dressed(rotations, resolve_operator(block, site, c.op), c.op, &mask));
    }
    const Matrix h = superblock_assemble(site, adiabatic, dressed);
    const Index total = h.rows();

    std::vector<Index> kept;
    if (options.sector.empty()) {
        kept.resize(static_cast<std::size_t>(total));
        for (Index i = 0; i < total; ++i)
            kept[static_cast<std::size_t>(i)] = i;
    } else {
        Vector ok = Vector::Ones(total);
        for (const auto &constraint : options.sector) {
            const Vector x = dressed_diagonal(block, site, rotations, constraint.op);
            for (Index i = 0; i < total; ++i)
                if (std::abs(x(i) - constraint.value) > 1e-6)
                    ok(i) = 0.0;
        }
        for (Index i = 0; i < total; ++i)
            if (ok(i) != 0.0)
                kept.push_back(i);
        if (kept.empty())
            throw Error(ErrorCode::InvalidCount, "no superblock state lies in the requested sector");
    }
    const Index dim = static_cast<Index>(kept.size());
    const Matrix hs = options.sector.empty() ? h : Matrix(h(kept, kept));
    const Index retain = (options.d_retain <= 0) ? dim : std::min(options.d_retain, dim);

    EigenPairs pairs = (retain == dim || dim <= 512 || options.close_multiplets)
                           ? eig_hermitian(hs)
                           : eig_hermitian_lowest(hs, std::min(dim, retain + 32));
    if (!options.superblock_resolvers.empty()) {
        std::vector<Matrix> ops;
        for (const auto &spec : options.superblock_resolvers) {
            Matrix x = dressed_operator(block, site, rotations, spec);
            ops.push_back(options.sector.empty() ? x : Matrix(x(kept, kept)));
        }
        resolve_degeneracies(pairs, ops);
    }
    pairs = truncate_low(pairs, retain, options.close_multiplets);

    Matrix u = Matrix::Zero(total, pairs.size());
    for (Index i = 0; i < dim; ++i)
        u.row(kept[static_cast<std::size_t>(i)]) = pairs.vectors.row(i);

    BlockState next;
    next.energies = pairs.values;
    next.ops = renormalize_operators(block, site, rotations, u, op_specs);
    next.log = block.log;
    next.log.push_back(StepRecord{std::move(rotations), std::move(u)});
    return next;
}

Vector geometric_diagnostic(const Matrix &here, const Matrix &next, double spacing) {
    if (here.rows() != next.rows() || here.cols() != next.cols())
        throw Error(ErrorCode::DimensionMismatch, "neighbouring fibers differ in shape");
    if (!(spacing > 0.0))
        throw Error(ErrorCode::InvalidArgument, "grid spacing must be positive");
    Vector g(here.cols());
    for (Index a = 0; a < here.cols(); ++a) {
        const double ov = here.col(a).dot(next.col(a));
        g(a) = std::max(0.0, 1.0 - ov * ov) / (spacing * spacing);
    }
    return g;
}

Matrix geometric_diagnostic(std::span<const Matrix> rotations, double spacing) {
    if (rotations.size() < 2)
        return Matrix(0, rotations.empty() ? 0 : rotations.front().cols());
    Matrix out(static_cast<Index>(rotations.size()) - 1, rotations.front().cols());
    for (std::size_t p = 0; p + 1 < rotations.size(); ++p)
        out.row(static_cast<Index>(p)) =
            geometric_diagnostic(rotations[p], rotations[p + 1], spacing).transpose();
    return out;
}

Matrix expand_retained_basis(std::span<const StepRecord> log) {
    Matrix basis = Matrix::Ones(1, 1);
    for (const StepRecord &step : log) {
        const Index n_config = step.n_config();
        const Index d = step.adiabatic_dim();
        const Index prev_rows = basis.rows();
        if (step.eigenvectors.rows() != n_config * d)
            throw Error(ErrorCode::IncompleteLog, "eigenvector rows do not match the rotations");
        Matrix next(prev_rows * n_config, step.eigenvectors.cols());
        for (Index j = 0; j < n_config; ++j) {
            const Matrix &rot = step.rotations[static_cast<std::size_t>(j)];
            if (rot.rows() != basis.cols() || rot.cols() != d)
                throw Error(ErrorCode::IncompleteLog, "rotation shape does not match the previous step");
            const Matrix slice = basis * rot * step.eigenvectors.middleRows(j * d, d);
            for (Index r = 0; r < prev_rows; ++r)
                next.row(r * n_config + j) = slice.row(r);
        }
        basis = std::move(next);
    }
    return basis;
}

} // namespace narg
