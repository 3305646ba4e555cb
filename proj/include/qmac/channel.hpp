#pragma once

#include "qmac/density.hpp"
#include "qmac/linalg.hpp"

#include <string>
#include <vector>

namespace qmac {

/// CPTP map given by Kraus operators; sum K^dag K = I is enforced.
class KrausChannel {
public:
    KrausChannel(std::size_t in_dim, std::size_t out_dim, std::vector<Matrix> kraus_ops);

    std::size_t in_dim() const { return in_dim_; }
    std::size_t out_dim() const { return out_dim_; }
    const std::vector<Matrix>& kraus_ops() const { return ops_; }

    DensityOperator apply(const DensityOperator& rho) const;
    Matrix apply_matrix(const Matrix& rho) const;

    // Channel acting on one register of a composite system: this on register
    // `target`, identity elsewhere.
    KrausChannel extend(const std::vector<std::size_t>& dims, std::size_t target) const;

    static KrausChannel identity(std::size_t dim);
    // Sequential composition: first `first`, then `second`.
    static KrausChannel compose(const KrausChannel& second, const KrausChannel& first);

private:
    std::size_t in_dim_, out_dim_;
    std::vector<Matrix> ops_;
};

DensityOperator apply_channel(const KrausChannel& ch, const DensityOperator& rho);

/// Measurement instrument {W_z}: sum W^dag W = I within 1e-6.
class Instrument {
public:
    struct Outcome {
        int label;
        Matrix op;
    };

    Instrument(std::size_t in_dim, std::vector<Outcome> outcomes);

    std::size_t in_dim() const { return in_dim_; }
    const std::vector<Outcome>& outcomes() const { return outcomes_; }

    static Instrument trivial(std::size_t dim); // single identity outcome
    static Instrument projective_computational(std::size_t dim);

private:
    std::size_t in_dim_;
    std::vector<Outcome> outcomes_;
};

} // namespace qmac
