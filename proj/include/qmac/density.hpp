#pragma once

#include "qmac/errors.hpp"
#include "qmac/linalg.hpp"

#include <cstddef>
#include <vector>

namespace qmac {

constexpr double kHermTol = 1e-9;
constexpr double kPsdTol = 1e-9;
constexpr double kTraceTol = 1e-9;

/// Hermitian, positive semidefinite, unit-trace operator. Validated on
/// construction; eigenvalues in [-1e-9, 0) are accepted and treated as 0.
class DensityOperator {
public:
    // Validates all three invariants; throws Error::validation otherwise.
    explicit DensityOperator(Matrix m);

    std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
    const Matrix& matrix() const { return m_; }

    static DensityOperator basis_state(std::size_t dim, std::size_t index);
    static DensityOperator pure(const Vector& psi);
    static DensityOperator maximally_mixed(std::size_t dim);
    static DensityOperator maximally_entangled(std::size_t local_dim);

private:
    Matrix m_;
};

DensityOperator tensor(const DensityOperator& a, const DensityOperator& b);

// Reduced state on the kept registers (order preserved). `dims` lists the
// register dimensions whose product must equal dim(rho).
DensityOperator partial_trace(const DensityOperator& rho,
                              const std::vector<std::size_t>& dims,
                              const std::vector<std::size_t>& keep);

// Raw-matrix variant used where intermediate operators are subnormalized.
Matrix partial_trace_matrix(const Matrix& rho,
                            const std::vector<std::size_t>& dims,
                            const std::vector<std::size_t>& keep);

// -sum lambda_i log2 lambda_i, in bits. Eigenvalues below -1e-9 are an error;
// values in [-1e-9, 0) and above 1 are clamped into [0, 1].
double von_neumann_entropy(const DensityOperator& rho);
double von_neumann_entropy(const Matrix& hermitian_unit_trace);

} // namespace qmac
