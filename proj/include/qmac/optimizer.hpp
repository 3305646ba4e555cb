#pragma once

#include "qmac/regions.hpp"

#include <cstdint>

namespace qmac {

struct OptimizerConfig {
    enum class StateParam { fixed, pure_qubit_angles, basis_states };

    std::size_t restarts = 32;
    std::size_t max_iters = 500;
    double tol = 1e-7; // on objective change
    std::uint64_t seed = 0;

    // Auxiliary-alphabet overrides; defaults derive from the channel dims
    // (|U| = d_B^2+2 etc.), capped at cardinality_cap.
    std::optional<std::size_t> card_u, card_v, card_x1, card_x2;
    std::size_t cardinality_cap = 16;

    StateParam state_param = StateParam::basis_states;

    // fixed parameterization needs user-supplied input states
    std::vector<DensityOperator> theta, zeta;
};

struct ParetoPoint {
    double lambda = 0.0;
    double r1 = 0.0, r2 = 0.0;
    double objective = 0.0;
    RateBounds bounds;
    EnsembleSpec ensemble;
};

// The lambda-optimal vertex of the pentagon {r1<=b1, r2<=b2, r1+r2<=b12}.
// Ties break toward larger r1.
std::pair<double, double> lambda_corner(const RateBounds& b, double lambda);

// Maximizes lambda*r1 + (1-lambda)*r2 over ensembles by projected coordinate
// ascent on the distribution simplices plus derivative-free search over state
// and instrument angles, with Dirichlet(1) random restarts. Deterministic
// given cfg.seed.
ParetoPoint maximize_weighted_rate(RegionKind kind, const Channel& channel, double lambda,
                                   const OptimizerConfig& cfg);

// One weighted maximization per lambda, sorted by r1, dominated points
// removed.
std::vector<ParetoPoint> pareto_frontier(RegionKind kind, const Channel& channel,
                                         const std::vector<double>& lambdas,
                                         const OptimizerConfig& cfg);

} // namespace qmac
