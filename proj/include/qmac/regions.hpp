#pragma once

#include "qmac/channels.hpp"

#include <optional>

namespace qmac {

/// Three-bound pentagon {r1 <= b1, r2 <= b2, r1+r2 <= b12}. The common-message
/// variant carries a fourth sum bound on r0+r1+r2.
struct RateBounds {
    double b1 = 0.0;
    double b2 = 0.0;
    double b12 = 0.0;
    std::optional<double> b0_sum;
};

enum class RegionKind {
    none,
    none_common,
    df_sc,
    df_caus,
    cq_noiseless_sc,
    cq_noiseless_caus,
    pdf_sc,
    cutset,
    det_crib,
};

const char* region_kind_name(RegionKind kind);
std::optional<RegionKind> parse_region_kind(const std::string& name);

// Evaluates the single-letter bounds of the chosen region for the given
// channel and input ensemble. Bounds are clamped to 0 from >= -1e-8; larger
// negatives abort as internal-consistency errors.
RateBounds eval_region(RegionKind kind, const Channel& channel, const EnsembleSpec& ens);

// Thermal-state entropy in bits: (x+1)log2(x+1) - x log2(x), 0 at x = 0.
double g_thermal(double x);

// Closed-form beam-splitter bounds; with_cribbing selects the decode-forward
// region, otherwise the no-cribbing capacity region. They share b2 and b12.
RateBounds bosonic_region(const BosonicParams& params, bool with_cribbing);

// Membership with 1e-12 slack on each inequality.
bool in_region(const RateBounds& bounds, double r1, double r2);

} // namespace qmac
