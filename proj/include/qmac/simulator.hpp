#pragma once

#include "qmac/channels.hpp"
#include "qmac/rng.hpp"

#include <utility>

namespace qmac {

struct Rates {
    double r0 = 0.0, r1 = 0.0, r2 = 0.0; // bits per channel use
};

// ceil(2^{rate * n}); throws past the desk-scale message cap.
std::size_t message_count(double rate, std::size_t n);

/// Random codebooks: u^n(m0) i.i.d. from p_U, x_k^n(m0, mk) conditionally
/// i.i.d. from p_{Xk|U} along u^n(m0). Deterministic given the seed.
struct Codebook {
    std::size_t n = 0;
    Rates rates;
    std::vector<std::vector<std::size_t>> u_words;               // [m0][i]
    std::vector<std::vector<std::vector<std::size_t>>> x1_words; // [m0][m1][i]
    std::vector<std::vector<std::vector<std::size_t>>> x2_words; // [m0][m2][i]
};

Codebook generate_codebooks(const EnsembleSpec& ens, std::size_t n, const Rates& rates,
                            std::uint64_t seed);

/// Square-root measurement: Lambda_c = S^{-1/2} Y_c S^{-1/2} with S = sum Y,
/// pseudo-inverted on the support of S; the complement of the support is
/// split uniformly across candidates so the POVM is complete.
struct PgmDecoder {
    std::size_t dim = 0;
    std::vector<std::size_t> labels;
    std::vector<Matrix> povm;
};

PgmDecoder build_pgm(const std::vector<std::pair<std::size_t, DensityOperator>>& candidates);

// detection operators supplied directly (PSD, not necessarily states)
PgmDecoder build_pgm_raw(const std::vector<std::size_t>& labels,
                         const std::vector<Matrix>& detection_ops);

// Born-rule sampling of a decoder outcome.
std::size_t measure(const PgmDecoder& decoder, const DensityOperator& rho, SplitMix64& rng);

/// Projector onto the strong delta-typical subspace of rho^{(x)n}: spans the
/// eigenvector products whose eigenvalue-index strings satisfy
/// |freq(a) - p(a)| <= delta * p(a) for every a, with freq(a) = 0 where p(a) = 0.
struct TypicalProjector {
    Matrix projector;
    double trace_mass = 0.0; // Tr(Pi rho^{(x)n})
    std::size_t rank = 0;
};

TypicalProjector typical_projector(const DensityOperator& rho, std::size_t n, double delta);

/// Numeric check of the typical-subspace inequalities. `c` is the measured
/// slack constant: the smallest value for which the eigenvalue sandwich
/// 2^{-n(H+c delta)} <= spec(Pi rho^{(x)n} Pi) <= 2^{-n(H-c delta)} and the
/// rank bound rank(Pi) <= 2^{n(H+c delta)} all hold.
struct TypicalityReport {
    double mass = 0.0; // projector overlap with the n-fold state
    std::size_t rank = 0;
    double entropy = 0.0;
    double c = 0.0;
    double min_eig = 0.0, max_eig = 0.0; // nonzero spectrum of Pi rho^{(x)n} Pi
    bool sandwich_ok = false;
    bool rank_ok = false;
};

TypicalityReport verify_typicality_bounds(const DensityOperator& rho, std::size_t n,
                                          double delta);

/// Conditional version along a fixed sequence x^n: the projector factorizes
/// over the position groups sharing a symbol; `unconditional_mass` is the
/// overlap of the average-state projector with the conditional state.
struct ConditionalTypicalityReport {
    TypicalityReport conditional;
    double unconditional_mass = 0.0;
};

ConditionalTypicalityReport verify_conditional_typicality(
    const std::vector<double>& p_x, const std::vector<DensityOperator>& sigma,
    const std::vector<std::size_t>& xn, double delta);

enum class DecoderKind { pgm_direct, pgm_projected };

DecoderKind parse_decoder_kind(const std::string& name);
const char* decoder_kind_name(DecoderKind kind);

struct SimConfig {
    std::size_t n = 8;
    std::size_t blocks = 4; // T
    std::size_t trials = 200;
    std::uint64_t seed = 0;
    double delta = 0.1; // typicality parameter (projected decoder only)
    DecoderKind decoder = DecoderKind::pgm_direct;
};

struct SimReport {
    SimConfig config;
    Rates rates;
    double empirical_error = 0.0; // fraction of trials with any message error
    std::vector<double> per_block_errors;
    double wall_time_ms = 0.0;
};

/// Block-Markov decode-forward over T blocks with noiseless classical
/// cribbing: Alice 1 sends x1^n(m0, m1) with m0 the previous fresh message,
/// Alice 2 recovers m1 by exact lookup on the cribbed x1^n (collision or miss
/// counts as an error) and re-encodes it, Bob decodes blocks T..1 backward
/// with a PGM over (m0, m2) given the previously decoded m1. The edge
/// messages m_k(0) = m_k(T) = 1 are fixed.
SimReport simulate_df_noiseless(const CqMacSpec& spec, const EnsembleSpec& ens,
                                const Rates& rates, const SimConfig& cfg);

/// Single-block random-coding experiment: uniform (m0, m1, m2), PGM over all
/// message triples. pgm_direct uses the exact n-fold codeword output states
/// as detection operators; pgm_projected conjugates the codeword projector
/// through the average-state and conditional typical projectors.
SimReport simulate_packing_single_block(const CqMacSpec& spec, const EnsembleSpec& ens,
                                        const Rates& rates, const SimConfig& cfg);

} // namespace qmac
