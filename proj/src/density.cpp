#include "qmac/density.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

namespace qmac {

std::size_t dim_cap() {
    static std::size_t cap = [] {
        if (const char* env = std::getenv("QMAC_DIM_CAP")) {
            char* end = nullptr;
            unsigned long long v = std::strtoull(env, &end, 10);
            if (end && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
        }
        return static_cast<std::size_t>(1) << 20;
    }();
    return cap;
}

DensityOperator::DensityOperator(Matrix m) : m_(std::move(m)) {
    if (m_.rows() == 0 || m_.rows() != m_.cols())
        throw Error::validation("density operator must be a nonempty square matrix");
    if (static_cast<std::size_t>(m_.rows()) > dim_cap())
        throw Error::cap("dimension cap exceeded");
    if (herm_deviation(m_) > kHermTol)
        throw Error::validation("density operator is not Hermitian within tolerance");
    double tr = m_.trace().real();
    if (std::abs(tr - 1.0) > kTraceTol)
        throw Error::validation("density operator trace differs from 1 by " +
                                std::to_string(tr - 1.0));
    auto eig = herm_eig(m_);
    if (eig.values.minCoeff() < -kPsdTol)
        throw Error::validation("density operator has negative eigenvalue " +
                                std::to_string(eig.values.minCoeff()));
}

DensityOperator DensityOperator::basis_state(std::size_t dim, std::size_t index) {
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    m(static_cast<Eigen::Index>(index), static_cast<Eigen::Index>(index)) = 1.0;
    return DensityOperator(std::move(m));
}

DensityOperator DensityOperator::pure(const Vector& psi) {
    Vector v = psi / psi.norm();
    return DensityOperator(v * v.adjoint());
}

DensityOperator DensityOperator::maximally_mixed(std::size_t dim) {
    if (dim > dim_cap()) throw Error::cap("dimension cap exceeded");
    return DensityOperator(Matrix::Identity(static_cast<Eigen::Index>(dim),
                                            static_cast<Eigen::Index>(dim)) /
                           static_cast<double>(dim));
}

DensityOperator DensityOperator::maximally_entangled(std::size_t d) {
    Vector psi = Vector::Zero(static_cast<Eigen::Index>(d * d));
    for (std::size_t i = 0; i < d; ++i)
        psi(static_cast<Eigen::Index>(i * d + i)) = 1.0 / std::sqrt(static_cast<double>(d));
    return pure(psi);
}

DensityOperator tensor(const DensityOperator& a, const DensityOperator& b) {
    if (a.dim() * b.dim() > dim_cap())
        throw Error::cap("dimension cap exceeded");
    return DensityOperator(kron(a.matrix(), b.matrix()));
}

Matrix partial_trace_matrix(const Matrix& rho,
                            const std::vector<std::size_t>& dims,
                            const std::vector<std::size_t>& keep) {
    std::size_t total = 1;
    for (std::size_t d : dims) total *= d;
    if (total != static_cast<std::size_t>(rho.rows()))
        throw Error::validation("register layout error: dims product does not match operator");
    if (keep.empty())
        throw Error::validation("register layout error: keep set is empty");
    for (std::size_t k : keep)
        if (k >= dims.size())
            throw Error::validation("register layout error: keep index out of range");

    std::vector<bool> kept(dims.size(), false);
    for (std::size_t k : keep) kept[k] = true;

    std::size_t keep_dim = 1, trace_dim = 1;
    for (std::size_t i = 0; i < dims.size(); ++i)
        (kept[i] ? keep_dim : trace_dim) *= dims[i];

    // strides of each register in the row index
    std::vector<std::size_t> stride(dims.size());
    std::size_t s = 1;
    for (std::size_t i = dims.size(); i-- > 0;) {
        stride[i] = s;
        s *= dims[i];
    }

    // Enumerate kept / traced multi-indices and their flat offsets.
    auto offsets_for = [&](bool want_kept) {
        std::vector<std::size_t> regs;
        for (std::size_t i = 0; i < dims.size(); ++i)
            if (kept[i] == want_kept) regs.push_back(i);
        std::size_t count = 1;
        for (std::size_t r : regs) count *= dims[r];
        std::vector<std::size_t> offs(count, 0);
        std::size_t repeat = count;
        for (std::size_t r : regs) {
            repeat /= dims[r];
            std::size_t period = repeat * dims[r];
            for (std::size_t idx = 0; idx < count; ++idx) {
                std::size_t digit = (idx % period) / repeat;
                offs[idx] += digit * stride[r];
            }
        }
        return offs;
    };

    std::vector<std::size_t> keep_off = offsets_for(true);
    std::vector<std::size_t> trace_off = offsets_for(false);

    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(keep_dim),
                              static_cast<Eigen::Index>(keep_dim));
    for (std::size_t i = 0; i < keep_dim; ++i)
        for (std::size_t j = 0; j < keep_dim; ++j) {
            Complex acc = 0.0;
            for (std::size_t t = 0; t < trace_dim; ++t)
                acc += rho(static_cast<Eigen::Index>(keep_off[i] + trace_off[t]),
                           static_cast<Eigen::Index>(keep_off[j] + trace_off[t]));
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = acc;
        }
    return out;
}

DensityOperator partial_trace(const DensityOperator& rho,
                              const std::vector<std::size_t>& dims,
                              const std::vector<std::size_t>& keep) {
    return DensityOperator(partial_trace_matrix(rho.matrix(), dims, keep));
}

double von_neumann_entropy(const Matrix& m) {
    auto eig = herm_eig(m);
    double h = 0.0;
    for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
        double lam = eig.values(i);
        if (lam < -kPsdTol)
            throw Error::validation("invalid state: eigenvalue " + std::to_string(lam));
        lam = std::min(std::max(lam, 0.0), 1.0);
        if (lam > 0.0) h -= lam * std::log2(lam);
    }
    return h;
}

double von_neumann_entropy(const DensityOperator& rho) {
    return von_neumann_entropy(rho.matrix());
}

} // namespace qmac
