#pragma once

#include "qmac/channel.hpp"
#include "qmac/cq_state.hpp"

#include <map>
#include <optional>
#include <variant>

namespace qmac {

/// Quantum MAC decomposed into a cribbing channel L: A1 -> A1' x E followed
/// by a communication channel N: A1' x A2 -> B.
struct CribbingMac {
    std::size_t d_a1, d_a1p, d_e, d_a2, d_b;
    KrausChannel L; // in d_a1, out d_a1p * d_e
    KrausChannel N; // in d_a1p * d_a2, out d_b

    CribbingMac(std::size_t d_a1, std::size_t d_a1p, std::size_t d_e, std::size_t d_a2,
                std::size_t d_b, KrausChannel L, KrausChannel N);
};

/// Classical-quantum MAC: classical inputs (x1, x2), quantum output table.
struct CqMacSpec {
    enum class Cribbing { noiseless, noisy, none };

    std::size_t card_x1, card_x2, d_b;
    std::vector<DensityOperator> table; // index x1 * card_x2 + x2
    Cribbing cribbing = Cribbing::none;
    RealMatrix q;                       // |X1| x |Z| row-stochastic, noisy only

    const DensityOperator& output(std::size_t x1, std::size_t x2) const {
        return table[x1 * card_x2 + x2];
    }
    std::size_t card_z() const;
    void validate() const;
};

struct BosonicParams {
    double eta1, eta2; // transmissivities in [0, 1]
    double n_a1, n_a2; // mean-photon-number input constraints
    double n_c;        // environment mean photon number

    void validate() const;
};

/// Input ensemble: distributions over the auxiliary variables plus the
/// input-state tables. V and the instrument are present only for the
/// partial-decode-forward and causal variants.
struct EnsembleSpec {
    std::size_t card_u = 1;
    std::size_t card_v = 0; // 0 = absent
    std::size_t card_x1 = 1, card_x2 = 1;

    // p_u: size card_u, or joint p_uv of size card_u * card_v (u-major).
    std::vector<double> p_u;
    // rows indexed by u (or u*card_v+v); cols by x1 / x2.
    RealMatrix p_x1_given;
    // rows by u (never by v: Alice 2 learns V one block late), by
    // z*card_u+u (causal), or by x1 (noiseless causal); cols by x2.
    RealMatrix p_x2_given;

    std::vector<DensityOperator> theta; // per x1 (input states of Alice 1)
    std::vector<DensityOperator> zeta;  // per x2
    std::optional<Instrument> instrument; // on E, causal only

    void validate_distributions() const;
    double joint_uv(std::size_t u, std::size_t v) const;
};

// Builds omega_{U X1 X2 A1' E A2} for the strictly-causal decode-forward
// region: weights p(u)p(x1|u)p(x2|u), quantum part L(theta^{x1}) (x) zeta^{x2}.
CqState build_omega_df_sc(const CribbingMac& mac, const EnsembleSpec& ens);

// Same weights with V: omega over (U, V, X1, X2; A1', E, A2).
CqState build_omega_pdf_sc(const CribbingMac& mac, const EnsembleSpec& ens);

// Causal variant: instrument outcomes become the classical register Z and
// the post-measurement cribbing system Eb replaces E. Zero-probability
// outcomes are dropped.
CqState build_omega_causal(const CribbingMac& mac, const EnsembleSpec& ens);

// Replaces the quantum part (A1', [E,] A2) of omega by the channel output B.
// Non-(A1',E,A2) quantum layouts are rejected.
CqState apply_n_to_omega(const CribbingMac& mac, const CqState& omega);

struct RobustnessReport {
    bool certified;
    std::vector<double> cmi_values; // Choi input first, then extras
};

// Tests I(A0; A1' | E) = 0 on the maximally entangled (Choi) input and on
// each supplied joint input theta_{A1 A0}. CMI = 0 on the Choi input yields
// an input-independent recovery channel; failure only means "not certified".
RobustnessReport check_robust_cribbing(const CribbingMac& mac, double tol,
                                       const std::vector<DensityOperator>& extra_inputs = {});

// Embeds a classical-quantum MAC into the quantum cribbing model with the
// computational basis (A1 = A1' = X1).
CribbingMac cq_to_cribbing_mac(const CqMacSpec& spec);

using Channel = std::variant<CribbingMac, CqMacSpec>;

} // namespace qmac
