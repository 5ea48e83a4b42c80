#include "narg/letta.hpp"

#include <cmath>

#include <json.hpp>

namespace narg {
namespace {

constexpr Index kMaxContractedSize = 1000000;

using Json = nlohmann::json;

Index flat(const LettaTensor &t, std::initializer_list<Index> index) {
    if (index.size() != t.dims.size())
        throw Error(ErrorCode::IndexOutOfRange, "wrong number of tensor indices");
    Index out = 0;
    std::size_t leg = 0;
    for (Index i : index) {
        if (i < 0 || i >= t.dims[leg])
            throw Error(ErrorCode::IndexOutOfRange, "index out of range on leg " + t.legs[leg]);
        out = out * t.dims[leg] + i;
        ++leg;
    }
    return out;
}

std::string leg(const char *prefix, Index k) { return prefix + std::to_string(k); }

LettaTensor make_tensor(std::vector<std::string> legs, std::vector<Index> dims) {
    LettaTensor t{std::move(legs), std::move(dims), {}};
    t.data.assign(static_cast<std::size_t>(t.size()), 0.0);
    return t;
}

// Virtual-to-virtual slice of tensor k at fixed (j_k, j_{k+1}). The first
// tensor has a single row, the last one ends in the terminal index.
Matrix slice(const LettaNetwork &net, Index k, Index j, Index j_next) {
    const LettaTensor &t = net.tensors[static_cast<std::size_t>(k)];
    const Index last = net.n_scales() - 1;
    if (k == 0 && last == 0) {
        Matrix s(1, t.dims[1]);
        for (Index a = 0; a < t.dims[1]; ++a)
            s(0, a) = t.at({j, a});
        return s;
    }
    if (k == 0) {
        Matrix s(1, t.dims[2]);
        for (Index b = 0; b < t.dims[2]; ++b)
            s(0, b) = t.at({j, j_next, b});
        return s;
    }
    if (k == last) {
        Matrix s(t.dims[1], t.dims[2]);
        for (Index b = 0; b < t.dims[1]; ++b)
            for (Index a = 0; a < t.dims[2]; ++a)
                s(b, a) = t.at({j, b, a});
        return s;
    }
    Matrix s(t.dims[2], t.dims[3]);
    for (Index b = 0; b < t.dims[2]; ++b)
        for (Index c = 0; c < t.dims[3]; ++c)
            s(b, c) = t.at({j, j_next, b, c});
    return s;
}

Index checked_terminal(const LettaNetwork &net, Index terminal) {
    if (net.tensors.empty())
        throw Error(ErrorCode::IncompleteLog, "network has no tensors");
    if (terminal < 0 || terminal >= net.terminal_dim())
        throw Error(ErrorCode::IndexOutOfRange, "terminal index " + std::to_string(terminal) + " out of range");
    return terminal;
}

Json matrix_json(const Matrix &m) {
    Json data = Json::array();
    for (Index r = 0; r < m.rows(); ++r)
        for (Index c = 0; c < m.cols(); ++c)
            data.push_back(m(r, c));
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from_json(const Json &j) {
    const Index rows = j.at("rows").get<Index>(), cols = j.at("cols").get<Index>();
    const auto &data = j.at("data");
    if (rows < 0 || cols < 0 || static_cast<Index>(data.size()) != rows * cols)
        throw Error(ErrorCode::InvalidArgument, "matrix data length does not match its shape");
    Matrix m(rows, cols);
    for (Index r = 0; r < rows; ++r)
        for (Index c = 0; c < cols; ++c)
            m(r, c) = data[static_cast<std::size_t>(r * cols + c)].get<double>();
    return m;
}

} // namespace

Index LettaTensor::size() const {
    Index n = 1;
    for (Index d : dims)
        n *= d;
    return n;
}

double LettaTensor::at(std::initializer_list<Index> index) const {
    return data[static_cast<std::size_t>(flat(*this, index))];
}

Index LettaNetwork::terminal_dim() const {
    return tensors.empty() ? 0 : tensors.back().dims.back();
}

LettaNetwork extract_letta(std::span<const StepRecord> log) {
    if (log.empty())
        throw Error(ErrorCode::IncompleteLog, "empty run log");
    const Index n = static_cast<Index>(log.size());
    for (Index k = 0; k < n; ++k) {
        const StepRecord &s = log[static_cast<std::size_t>(k)];
        const Index rows = k == 0 ? 1 : log[static_cast<std::size_t>(k - 1)].eigenvectors.cols();
        if (s.n_config() < 1 || s.eigenvectors.rows() != s.n_config() * s.adiabatic_dim())
            throw Error(ErrorCode::IncompleteLog, "step " + std::to_string(k) + " has inconsistent shapes");
        for (const Matrix &r : s.rotations)
            if (r.rows() != rows || r.cols() != s.adiabatic_dim())
                throw Error(ErrorCode::IncompleteLog, "step " + std::to_string(k) + " does not chain to the previous one");
    }

    LettaNetwork net;
    net.raw_steps.assign(log.begin(), log.end());
    for (const StepRecord &s : log)
        net.physical_dims.push_back(s.n_config());

    const StepRecord &first = log[0];
    const Index d0 = first.adiabatic_dim();
    if (n == 1) {
        LettaTensor t = make_tensor({"j0", "alpha"}, {first.n_config(), first.eigenvectors.cols()});
        for (Index j = 0; j < first.n_config(); ++j) {
            const Matrix row = first.rotations[static_cast<std::size_t>(j)] * first.eigenvectors.middleRows(j * d0, d0);
            for (Index a = 0; a < row.cols(); ++a)
                t.data[static_cast<std::size_t>(flat(t, {j, a}))] = row(0, a);
        }
        net.tensors.push_back(std::move(t));
        return net;
    }

    for (Index k = 0; k + 1 < n; ++k) {
        const StepRecord &here = log[static_cast<std::size_t>(k)];
        const StepRecord &next = log[static_cast<std::size_t>(k + 1)];
        const Index d = here.adiabatic_dim(), dn = next.adiabatic_dim();
        LettaTensor t = k == 0 ? make_tensor({"j0", "j1", "b1"}, {here.n_config(), next.n_config(), dn})
                               : make_tensor({leg("j", k), leg("j", k + 1), leg("b", k), leg("b", k + 1)},
                                             {here.n_config(), next.n_config(), d, dn});
        for (Index j = 0; j < here.n_config(); ++j) {
            const Matrix u = here.eigenvectors.middleRows(j * d, d);
            for (Index jn = 0; jn < next.n_config(); ++jn) {
                const Matrix s = u * next.rotations[static_cast<std::size_t>(jn)];
                if (k == 0) {
                    const Matrix row = here.rotations[static_cast<std::size_t>(j)] * s;
                    for (Index c = 0; c < dn; ++c)
                        t.data[static_cast<std::size_t>(flat(t, {j, jn, c}))] = row(0, c);
                } else {
                    for (Index b = 0; b < d; ++b)
                        for (Index c = 0; c < dn; ++c)
                            t.data[static_cast<std::size_t>(flat(t, {j, jn, b, c}))] = s(b, c);
                }
            }
        }
        net.tensors.push_back(std::move(t));
    }

    const StepRecord &tail = log.back();
    const Index d = tail.adiabatic_dim();
    LettaTensor t = make_tensor({leg("j", n - 1), leg("b", n - 1), "alpha"},
                                {tail.n_config(), d, tail.eigenvectors.cols()});
    for (Index j = 0; j < tail.n_config(); ++j)
        for (Index b = 0; b < d; ++b)
            for (Index a = 0; a < tail.eigenvectors.cols(); ++a)
                t.data[static_cast<std::size_t>(flat(t, {j, b, a}))] = tail.eigenvectors(j * d + b, a);
    net.tensors.push_back(std::move(t));
    return net;
}

Vector contract_state(const LettaNetwork &net, Index terminal) {
    checked_terminal(net, terminal);
    Index total = 1;
    for (Index d : net.physical_dims) {
        if (total > kMaxContractedSize / d)
            throw Error(ErrorCode::TooLarge, "product of physical dimensions exceeds 1e6");
        total *= d;
    }
    const Index n = net.n_scales();
    if (n == 1) {
        Vector out(net.physical_dims[0]);
        for (Index j = 0; j < out.size(); ++j)
            out(j) = slice(net, 0, j, 0)(0, terminal);
        return out;
    }

    // Rows: configuration prefix (j_0, ..., j_k) with j_k last; columns: b_k.
    const Index n0 = net.physical_dims[0], n1 = net.physical_dims[1];
    Matrix cur(n0 * n1, net.tensors[0].dims[2]);
    for (Index j = 0; j < n0; ++j)
        for (Index jn = 0; jn < n1; ++jn)
            cur.row(j * n1 + jn) = slice(net, 0, j, jn);

    for (Index k = 1; k + 1 < n; ++k) {
        const Index nk = net.physical_dims[static_cast<std::size_t>(k)];
        const Index nn = net.physical_dims[static_cast<std::size_t>(k + 1)];
        std::vector<Matrix> slices(static_cast<std::size_t>(nk * nn));
        for (Index j = 0; j < nk; ++j)
            for (Index jn = 0; jn < nn; ++jn)
                slices[static_cast<std::size_t>(j * nn + jn)] = slice(net, k, j, jn);
        Matrix next(cur.rows() * nn, net.tensors[static_cast<std::size_t>(k)].dims[3]);
        for (Index r = 0; r < cur.rows(); ++r)
            for (Index jn = 0; jn < nn; ++jn)
                next.row(r * nn + jn) = cur.row(r) * slices[static_cast<std::size_t>((r % nk) * nn + jn)];
        cur = std::move(next);
    }

    const Index nl = net.physical_dims.back();
    std::vector<Vector> last(static_cast<std::size_t>(nl));
    for (Index j = 0; j < nl; ++j)
        last[static_cast<std::size_t>(j)] = slice(net, n - 1, j, 0).col(terminal);
    Vector out(cur.rows());
    for (Index r = 0; r < cur.rows(); ++r)
        out(r) = cur.row(r).dot(last[static_cast<std::size_t>(r % nl)]);
    return out;
}

double amplitude(const LettaNetwork &net, std::span<const Index> configuration, Index terminal) {
    checked_terminal(net, terminal);
    const Index n = net.n_scales();
    if (static_cast<Index>(configuration.size()) != n)
        throw Error(ErrorCode::IndexOutOfRange, "configuration length differs from the number of scales");
    for (Index k = 0; k < n; ++k)
        if (configuration[static_cast<std::size_t>(k)] < 0 ||
            configuration[static_cast<std::size_t>(k)] >= net.physical_dims[static_cast<std::size_t>(k)])
            throw Error(ErrorCode::IndexOutOfRange, "configuration index out of range at scale " + std::to_string(k));
    auto j = [&](Index k) { return configuration[static_cast<std::size_t>(k)]; };
    if (n == 1)
        return slice(net, 0, j(0), 0)(0, terminal);
    Eigen::RowVectorXd v = slice(net, 0, j(0), j(1));
    for (Index k = 1; k + 1 < n; ++k)
        v = v * slice(net, k, j(k), j(k + 1));
    return v.dot(slice(net, n - 1, j(n - 1), 0).col(terminal));
}

Index leg_tie_rank(const LettaNetwork &net, Index k, double tolerance) {
    const Index n = net.n_scales();
    if (k < 0 || k + 1 >= static_cast<Index>(net.tensors.size()))
        throw Error(ErrorCode::IndexOutOfRange, "leg_tie_rank needs tensors k and k+1 with a shared leg");
    const Index nk = net.physical_dims[static_cast<std::size_t>(k)];
    const Index nt = net.physical_dims[static_cast<std::size_t>(k + 1)];
    const bool right_is_last = k + 2 == n;
    const Index nr = right_is_last ? 1 : net.physical_dims[static_cast<std::size_t>(k + 2)];
    Index rank = 0;
    for (Index jt = 0; jt < nt; ++jt) {
        // Rows (j_k, b_k), columns (j_{k+2}, b_{k+2}) at fixed shared j_{k+1}.
        std::vector<Matrix> left(static_cast<std::size_t>(nk));
        for (Index j = 0; j < nk; ++j)
            left[static_cast<std::size_t>(j)] = slice(net, k, j, jt);
        std::vector<Matrix> right(static_cast<std::size_t>(nr));
        for (Index j = 0; j < nr; ++j)
            right[static_cast<std::size_t>(j)] = slice(net, k + 1, jt, j);
        const Index lr = left[0].rows(), rc = right[0].cols();
        Matrix m(nk * lr, nr * rc);
        for (Index a = 0; a < nk; ++a)
            for (Index b = 0; b < nr; ++b)
                m.block(a * lr, b * rc, lr, rc) = left[static_cast<std::size_t>(a)] * right[static_cast<std::size_t>(b)];
        if (m.size() == 0)
            continue;
        Eigen::JacobiSVD<Matrix> svd(m);
        const Vector sv = svd.singularValues();
        for (Index i = 0; i < sv.size(); ++i)
            if (sv(i) > tolerance * std::max(1.0, sv(0)))
                ++rank;
    }
    return rank;
}

void fix_global_phase(Vector &state) {
    if (state.size() == 0)
        return;
    Index best = 0;
    for (Index i = 1; i < state.size(); ++i)
        if (std::abs(state(i)) > std::abs(state(best)) + 1e-12)
            best = i;
    if (state(best) < 0.0)
        state = -state;
}

std::string letta_to_json(const LettaNetwork &net) {
    Json tensors = Json::array();
    for (const LettaTensor &t : net.tensors)
        tensors.push_back({{"legs", t.legs}, {"dims", t.dims}, {"data", t.data}});
    Json raw = Json::array();
    for (const StepRecord &s : net.raw_steps) {
        Json rotations = Json::array();
        for (const Matrix &r : s.rotations)
            rotations.push_back(matrix_json(r));
        raw.push_back({{"rotations", std::move(rotations)}, {"eigenvectors", matrix_json(s.eigenvectors)}});
    }
    const Json j = {{"format", "letta"},
                    {"version", 1},
                    {"physical_dims", net.physical_dims},
                    {"tensors", std::move(tensors)},
                    {"raw_steps", std::move(raw)}};
    return j.dump();
}

LettaNetwork letta_from_json(const std::string &text) {
    try {
        const Json j = Json::parse(text);
        if (j.at("format").get<std::string>() != "letta" || j.at("version").get<int>() != 1)
            throw Error(ErrorCode::InvalidArgument, "not a version-1 letta container");
        LettaNetwork net;
        net.physical_dims = j.at("physical_dims").get<std::vector<Index>>();
        for (const Json &jt : j.at("tensors")) {
            LettaTensor t;
            t.legs = jt.at("legs").get<std::vector<std::string>>();
            t.dims = jt.at("dims").get<std::vector<Index>>();
            t.data = jt.at("data").get<std::vector<double>>();
            if (t.legs.size() != t.dims.size() || static_cast<Index>(t.data.size()) != t.size())
                throw Error(ErrorCode::InvalidArgument, "tensor data does not match its legs");
            net.tensors.push_back(std::move(t));
        }
        for (const Json &js : j.at("raw_steps")) {
            StepRecord s;
            for (const Json &r : js.at("rotations"))
                s.rotations.push_back(matrix_from_json(r));
            s.eigenvectors = matrix_from_json(js.at("eigenvectors"));
            net.raw_steps.push_back(std::move(s));
        }
        // The tensors must be exactly what the raw steps produce.
        const LettaNetwork rebuilt = extract_letta(net.raw_steps);
        if (rebuilt.physical_dims != net.physical_dims || rebuilt.tensors.size() != net.tensors.size())
            throw Error(ErrorCode::InvalidArgument, "tensors disagree with the raw steps");
        for (std::size_t k = 0; k < net.tensors.size(); ++k) {
            const LettaTensor &a = rebuilt.tensors[k], &b = net.tensors[k];
            if (a.dims != b.dims)
                throw Error(ErrorCode::InvalidArgument, "tensor " + std::to_string(k) + " has wrong dimensions");
            for (std::size_t i = 0; i < a.data.size(); ++i)
                if (!std::isfinite(b.data[i]) || std::abs(a.data[i] - b.data[i]) > 1e-12)
                    throw Error(ErrorCode::InvalidArgument, "tensor " + std::to_string(k) + " disagrees with the raw steps");
        }
        return net;
    } catch (const nlohmann::json::exception &e) {
        throw Error(ErrorCode::InvalidArgument, std::string("malformed letta JSON: ") + e.what());
    } catch (const Error &e) {
        if (e.code() == ErrorCode::IncompleteLog)
            throw Error(ErrorCode::InvalidArgument, e.what());
        throw;
    }
}

} // namespace narg
