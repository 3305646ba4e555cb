#include "qmac/regions.hpp"

#include <cmath>

namespace qmac {

namespace {

double clamp_bound(double x) {
    if (x < -1e-8)
        throw Error::internal("negative rate bound: " + std::to_string(x));
    return std::max(x, 0.0);
}

struct Resolved {
    CribbingMac mac;
    EnsembleSpec ens;
    const CqMacSpec* cq; // null for a generic quantum channel
};

std::vector<DensityOperator> basis_table(std::size_t card) {
    std::vector<DensityOperator> out;
    out.reserve(card);
    for (std::size_t x = 0; x < card; ++x) out.push_back(DensityOperator::basis_state(card, x));
    return out;
}

// For classical-quantum channels the input states are the computational
// basis unless the ensemble supplies its own.
Resolved resolve(const Channel& channel, const EnsembleSpec& ens_in) {
    if (const auto* mac = std::get_if<CribbingMac>(&channel)) {
        if (ens_in.theta.empty() || ens_in.zeta.empty())
            throw Error::validation("ensemble shape error: input states required");
        return {*mac, ens_in, nullptr};
    }
    const auto& spec = std::get<CqMacSpec>(channel);
    EnsembleSpec ens = ens_in;
    if (ens.theta.empty()) ens.theta = basis_table(spec.card_x1);
    if (ens.zeta.empty()) ens.zeta = basis_table(spec.card_x2);
    return {cq_to_cribbing_mac(spec), std::move(ens), &std::get<CqMacSpec>(channel)};
}

double cond_entropy(const CqState& omega, const std::vector<std::string>& a,
                    const std::vector<std::string>& c) {
    std::vector<std::string> ac = a;
    ac.insert(ac.end(), c.begin(), c.end());
    return cq_entropy(omega, ac) - (c.empty() ? 0.0 : cq_entropy(omega, c));
}

const CqMacSpec& require_cq(const Channel& channel, const char* kind) {
    const auto* spec = std::get_if<CqMacSpec>(&channel);
    if (!spec)
        throw Error::validation(std::string("ensemble shape error: ") + kind +
                                " requires a classical-quantum channel");
    return *spec;
}

// omega_{U X1 Z X2 B} for the cutset-style regions on a classical cribbing
// channel: Z follows Q (or copies X1 when cribbing is noiseless).
CqState build_cutset_omega(const CqMacSpec& spec, const EnsembleSpec& ens) {
    spec.validate();
    ens.validate_distributions();
    if (spec.cribbing == CqMacSpec::Cribbing::none)
        throw Error::validation("ensemble shape error: this region requires a cribbing channel");
    if (ens.card_v > 0 || ens.instrument.has_value())
        throw Error::validation("ensemble shape error: no V or instrument here");
    if (ens.card_x1 != spec.card_x1 || ens.card_x2 != spec.card_x2)
        throw Error::validation("ensemble shape error: alphabet mismatch with channel");
    if (static_cast<std::size_t>(ens.p_x2_given.rows()) != ens.card_u)
        throw Error::validation("ensemble shape error: p_X2_given must be conditioned on U");

    std::size_t card_z = spec.card_z();
    auto q = [&](std::size_t x1, std::size_t z) {
        if (spec.cribbing == CqMacSpec::Cribbing::noiseless) return x1 == z ? 1.0 : 0.0;
        return spec.q(static_cast<Eigen::Index>(x1), static_cast<Eigen::Index>(z));
    };

    std::vector<CqState::Entry> entries;
    for (std::size_t u = 0; u < ens.card_u; ++u)
        for (std::size_t x1 = 0; x1 < ens.card_x1; ++x1)
            for (std::size_t z = 0; z < card_z; ++z) {
                double wz = ens.p_u[u] * ens.p_x1_given(u, x1) * q(x1, z);
                if (wz <= 0.0) continue;
                for (std::size_t x2 = 0; x2 < ens.card_x2; ++x2) {
                    double w = wz * ens.p_x2_given(u, x2);
                    if (w <= 0.0) continue;
                    entries.push_back({{u, x1, z, x2}, w, spec.output(x1, x2).matrix()});
                }
            }
    return CqState({{"U", ens.card_u}, {"X1", ens.card_x1}, {"Z", card_z}, {"X2", ens.card_x2}},
                   {{"B", spec.d_b}}, std::move(entries));
}

} // namespace

const char* region_kind_name(RegionKind kind) {
    switch (kind) {
    case RegionKind::none: return "none";
    case RegionKind::none_common: return "none_common";
    case RegionKind::df_sc: return "df_sc";
    case RegionKind::df_caus: return "df_caus";
    case RegionKind::cq_noiseless_sc: return "cq_noiseless_sc";
    case RegionKind::cq_noiseless_caus: return "cq_noiseless_caus";
    case RegionKind::pdf_sc: return "pdf_sc";
    case RegionKind::cutset: return "cutset";
    case RegionKind::det_crib: return "det_crib";
    }
    return "?";
}

std::optional<RegionKind> parse_region_kind(const std::string& name) {
    for (RegionKind k :
         {RegionKind::none, RegionKind::none_common, RegionKind::df_sc, RegionKind::df_caus,
          RegionKind::cq_noiseless_sc, RegionKind::cq_noiseless_caus, RegionKind::pdf_sc,
          RegionKind::cutset, RegionKind::det_crib})
        if (name == region_kind_name(k)) return k;
    return std::nullopt;
}

RateBounds eval_region(RegionKind kind, const Channel& channel, const EnsembleSpec& ens_in) {
    RateBounds out;

    switch (kind) {
    case RegionKind::none:
    case RegionKind::none_common: {
        auto [mac, ens, cq] = resolve(channel, ens_in);
        CqState omega_b = apply_n_to_omega(mac, build_omega_df_sc(mac, ens));
        out.b1 = clamp_bound(cq_mutual_information(omega_b, {"X1"}, {"B"}, {"X2", "U"}));
        out.b2 = clamp_bound(cq_mutual_information(omega_b, {"X2"}, {"B"}, {"X1", "U"}));
        out.b12 = clamp_bound(cq_mutual_information(omega_b, {"X1", "X2"}, {"B"}, {"U"}));
        if (kind == RegionKind::none_common)
            out.b0_sum = clamp_bound(cq_mutual_information(omega_b, {"X1", "X2"}, {"B"}));
        return out;
    }
    case RegionKind::df_sc: {
        auto [mac, ens, cq] = resolve(channel, ens_in);
        CqState omega = build_omega_df_sc(mac, ens);
        out.b1 = clamp_bound(cq_mutual_information(omega, {"X1"}, {"E"}, {"U"}));
        CqState omega_b = apply_n_to_omega(mac, omega);
        out.b2 = clamp_bound(cq_mutual_information(omega_b, {"X2"}, {"B"}, {"X1", "U"}));
        out.b12 = clamp_bound(cq_mutual_information(omega_b, {"X1", "X2"}, {"B"}));
        return out;
    }
    case RegionKind::cq_noiseless_sc: {
        const CqMacSpec& spec = require_cq(channel, "cq_noiseless_sc");
        if (spec.cribbing != CqMacSpec::Cribbing::noiseless)
            throw Error::validation("ensemble shape error: channel cribbing must be noiseless");
        auto [mac, ens, cq] = resolve(channel, ens_in);
        CqState omega = build_omega_df_sc(mac, ens);
        out.b1 = clamp_bound(cond_entropy(omega, {"X1"}, {"U"}));
        CqState omega_b = apply_n_to_omega(mac, omega);
        out.b2 = clamp_bound(cq_mutual_information(omega_b, {"X2"}, {"B"}, {"X1", "U"}));
        out.b12 = clamp_bound(cq_mutual_information(omega_b, {"X1", "X2"}, {"B"}));
        return out;
    }
    case RegionKind::df_caus: {
        auto [mac, ens, cq] = resolve(channel, ens_in);
        if (!ens.instrument.has_value() && cq)
            ens.instrument = Instrument::projective_computational(mac.d_e);
        CqState omega = build_omega_causal(mac, ens);
        out.b1 = clamp_bound(cq_mutual_information(omega, {"X1"}, {"Eb", "Z"}, {"U"}));
        CqState omega_b = apply_n_to_omega(mac, omega);
        out.b2 = clamp_bound(cq_mutual_information(omega_b, {"X2"}, {"B"}, {"X1", "U"}));
        out.b12 = clamp_bound(cq_mutual_information(omega_b, {"X1", "X2"}, {"B"}));
        return out;
    }
    case RegionKind::cq_noiseless_caus: {
        const CqMacSpec& spec = require_cq(channel, "cq_noiseless_caus");
        if (spec.cribbing != CqMacSpec::Cribbing::noiseless)
            throw Error::validation("ensemble shape error: channel cribbing must be noiseless");
        const EnsembleSpec& ens = ens_in;
        ens.validate_distributions();
        if (ens.card_u != 1 || ens.card_v > 0)
            throw Error::validation("ensemble shape error: cq_noiseless_caus takes a joint "
                                    "p_X1X2 with |U| = 1");
        if (static_cast<std::size_t>(ens.p_x2_given.rows()) != spec.card_x1)
            throw Error::validation("ensemble shape error: p_X2_given must be conditioned on X1");
        std::vector<CqState::Entry> entries;
        for (std::size_t x1 = 0; x1 < spec.card_x1; ++x1)
            for (std::size_t x2 = 0; x2 < spec.card_x2; ++x2) {
                double w = ens.p_x1_given(0, x1) * ens.p_x2_given(x1, x2);
                if (w <= 0.0) continue;
                entries.push_back({{x1, x2}, w, spec.output(x1, x2).matrix()});
            }
        CqState omega({{"X1", spec.card_x1}, {"X2", spec.card_x2}}, {{"B", spec.d_b}},
                      std::move(entries));
        out.b1 = clamp_bound(cq_entropy(omega, {"X1"}));
        out.b2 = clamp_bound(cq_mutual_information(omega, {"X2"}, {"B"}, {"X1"}));
        out.b12 = clamp_bound(cq_mutual_information(omega, {"X1", "X2"}, {"B"}));
        return out;
    }
    case RegionKind::pdf_sc: {
        auto [mac, ens, cq] = resolve(channel, ens_in);
        CqState omega = build_omega_pdf_sc(mac, ens);
        double mi_ve = cq_mutual_information(omega, {"V"}, {"E"}, {"U"});
        CqState omega_b = apply_n_to_omega(mac, omega);
        double mi_x1b = cq_mutual_information(omega_b, {"X1"}, {"B"}, {"X2", "U", "V"});
        out.b1 = clamp_bound(mi_ve + mi_x1b);
        out.b2 = clamp_bound(cq_mutual_information(omega_b, {"X2"}, {"B"}, {"X1", "U"}));
        out.b12 = clamp_bound(cq_mutual_information(omega_b, {"X1", "X2"}, {"B"}));
        return out;
    }
    case RegionKind::cutset: {
        const CqMacSpec& spec = require_cq(channel, "cutset");
        CqState omega = build_cutset_omega(spec, ens_in);
        out.b1 = clamp_bound(cq_mutual_information(omega, {"X1"}, {"B", "Z"}, {"X2", "U"}));
        out.b2 = clamp_bound(cq_mutual_information(omega, {"X2"}, {"B"}, {"X1", "U"}));
        out.b12 = clamp_bound(cq_mutual_information(omega, {"X1", "X2"}, {"B"}));
        return out;
    }
    case RegionKind::det_crib: {
        const CqMacSpec& spec = require_cq(channel, "det_crib");
        CqState omega = build_cutset_omega(spec, ens_in);
        out.b1 = clamp_bound(cond_entropy(omega, {"Z"}, {"U"}) +
                             cq_mutual_information(omega, {"X1"}, {"B"}, {"X2", "U", "Z"}));
        out.b2 = clamp_bound(cq_mutual_information(omega, {"X2"}, {"B"}, {"X1", "U"}));
        out.b12 = clamp_bound(cq_mutual_information(omega, {"X1", "X2"}, {"B"}));
        return out;
    }
    }
    throw Error::internal("unhandled region kind");
}

double g_thermal(double x) {
    if (x < 0.0) throw Error::validation("domain error: g requires x >= 0");
    if (x == 0.0) return 0.0;
    return (x + 1.0) * std::log2(x + 1.0) - x * std::log2(x);
}

RateBounds bosonic_region(const BosonicParams& p, bool with_cribbing) {
    p.validate();
    double noise = p.eta2 * p.eta1 * p.n_c;
    RateBounds out;
    if (with_cribbing)
        out.b1 = g_thermal(p.eta1 * p.n_a1 + (1.0 - p.eta1) * p.n_c) -
                 g_thermal((1.0 - p.eta1) * p.n_c);
    else
        out.b1 = g_thermal(p.eta2 * (1.0 - p.eta1) * p.n_a1 + noise) - g_thermal(noise);
    out.b2 = g_thermal(noise + (1.0 - p.eta2) * p.n_a2) - g_thermal(noise);
    out.b12 = g_thermal(p.eta2 * (1.0 - p.eta1) * p.n_a1 + noise + (1.0 - p.eta2) * p.n_a2) -
              g_thermal(noise);
    out.b1 = clamp_bound(out.b1);
    out.b2 = clamp_bound(out.b2);
    out.b12 = clamp_bound(out.b12);
    return out;
}

bool in_region(const RateBounds& b, double r1, double r2) {
    constexpr double s = 1e-12;
    return r1 <= b.b1 + s && r2 <= b.b2 + s && r1 + r2 <= b.b12 + s;
}

} // namespace qmac
