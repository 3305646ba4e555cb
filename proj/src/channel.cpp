#include "qmac/channel.hpp"

namespace qmac {

namespace {
constexpr double kChannelTol = 1e-9;
constexpr double kInstrumentTol = 1e-6;

Matrix completeness_sum(const std::vector<Matrix>& ops) {
    Matrix sum = Matrix::Zero(ops.front().cols(), ops.front().cols());
    for (const auto& k : ops) sum += k.adjoint() * k;
    return sum;
}
} // namespace

KrausChannel::KrausChannel(std::size_t in_dim, std::size_t out_dim, std::vector<Matrix> kraus_ops)
    : in_dim_(in_dim), out_dim_(out_dim), ops_(std::move(kraus_ops)) {
    if (ops_.empty()) throw Error::validation("invalid channel: no Kraus operators");
    for (const auto& k : ops_)
        if (static_cast<std::size_t>(k.rows()) != out_dim_ ||
            static_cast<std::size_t>(k.cols()) != in_dim_)
            throw Error::validation("invalid channel: Kraus operator shape mismatch");
    Matrix sum = completeness_sum(ops_);
    Matrix id = Matrix::Identity(static_cast<Eigen::Index>(in_dim_),
                                 static_cast<Eigen::Index>(in_dim_));
    if ((sum - id).cwiseAbs().maxCoeff() > kChannelTol)
        throw Error::validation("invalid channel: Kraus set is not trace-preserving");
}

Matrix KrausChannel::apply_matrix(const Matrix& rho) const {
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(out_dim_),
                              static_cast<Eigen::Index>(out_dim_));
    for (const auto& k : ops_) out += k * rho * k.adjoint();
    return out;
}

DensityOperator KrausChannel::apply(const DensityOperator& rho) const {
    if (rho.dim() != in_dim_)
        throw Error::validation("invalid channel application: input dimension mismatch");
    return DensityOperator(apply_matrix(rho.matrix()));
}

KrausChannel KrausChannel::extend(const std::vector<std::size_t>& dims, std::size_t target) const {
    if (target >= dims.size() || dims[target] != in_dim_)
        throw Error::validation("register layout error: channel extension target");
    std::size_t left = 1, right = 1;
    for (std::size_t i = 0; i < target; ++i) left *= dims[i];
    for (std::size_t i = target + 1; i < dims.size(); ++i) right *= dims[i];
    Matrix il = Matrix::Identity(static_cast<Eigen::Index>(left), static_cast<Eigen::Index>(left));
    Matrix ir = Matrix::Identity(static_cast<Eigen::Index>(right), static_cast<Eigen::Index>(right));
    std::vector<Matrix> ext;
    ext.reserve(ops_.size());
    for (const auto& k : ops_) ext.push_back(kron(kron(il, k), ir));
    return KrausChannel(left * in_dim_ * right, left * out_dim_ * right, std::move(ext));
}

KrausChannel KrausChannel::identity(std::size_t dim) {
    return KrausChannel(dim, dim,
                        {Matrix::Identity(static_cast<Eigen::Index>(dim),
                                          static_cast<Eigen::Index>(dim))});
}

KrausChannel KrausChannel::compose(const KrausChannel& second, const KrausChannel& first) {
    if (first.out_dim() != second.in_dim())
        throw Error::validation("invalid channel composition: dimension mismatch");
    std::vector<Matrix> ops;
    ops.reserve(first.ops_.size() * second.ops_.size());
    for (const auto& k2 : second.ops_)
        for (const auto& k1 : first.ops_) ops.push_back(k2 * k1);
    return KrausChannel(first.in_dim(), second.out_dim(), std::move(ops));
}

DensityOperator apply_channel(const KrausChannel& ch, const DensityOperator& rho) {
    return ch.apply(rho);
}

Instrument::Instrument(std::size_t in_dim, std::vector<Outcome> outcomes)
    : in_dim_(in_dim), outcomes_(std::move(outcomes)) {
    if (outcomes_.empty()) throw Error::validation("invalid instrument: no outcomes");
    Matrix sum = Matrix::Zero(static_cast<Eigen::Index>(in_dim_),
                              static_cast<Eigen::Index>(in_dim_));
    for (const auto& o : outcomes_) {
        if (static_cast<std::size_t>(o.op.rows()) != in_dim_ ||
            static_cast<std::size_t>(o.op.cols()) != in_dim_)
            throw Error::validation("invalid instrument: operator shape mismatch");
        sum += o.op.adjoint() * o.op;
    }
    Matrix id = Matrix::Identity(static_cast<Eigen::Index>(in_dim_),
                                 static_cast<Eigen::Index>(in_dim_));
    if ((sum - id).cwiseAbs().maxCoeff() > kInstrumentTol)
        throw Error::validation("invalid instrument: completeness violated");
}

Instrument Instrument::trivial(std::size_t dim) {
    return Instrument(dim, {{0, Matrix::Identity(static_cast<Eigen::Index>(dim),
                                                 static_cast<Eigen::Index>(dim))}});
}

Instrument Instrument::projective_computational(std::size_t dim) {
    std::vector<Outcome> outs;
    for (std::size_t z = 0; z < dim; ++z) {
        Matrix p = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
        p(static_cast<Eigen::Index>(z), static_cast<Eigen::Index>(z)) = 1.0;
        outs.push_back({static_cast<int>(z), p});
    }
    return Instrument(dim, std::move(outs));
}

} // namespace qmac
