#include "qmac/channels.hpp"

#include <cmath>

namespace qmac {

namespace {
constexpr double kSimplexTol = 1e-12;

void check_simplex(const double* p, std::size_t n, const std::string& what) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (p[i] < -kSimplexTol)
            throw Error::validation(what + ": negative probability");
        sum += p[i];
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw Error::validation(what + ": probabilities sum to " + std::to_string(sum));
}
} // namespace

CribbingMac::CribbingMac(std::size_t d_a1_, std::size_t d_a1p_, std::size_t d_e_,
                         std::size_t d_a2_, std::size_t d_b_, KrausChannel L_, KrausChannel N_)
    : d_a1(d_a1_), d_a1p(d_a1p_), d_e(d_e_), d_a2(d_a2_), d_b(d_b_),
      L(std::move(L_)), N(std::move(N_)) {
    if (L.in_dim() != d_a1 || L.out_dim() != d_a1p * d_e)
        throw Error::validation("cribbing channel L dims inconsistent with declared dims");
    if (N.in_dim() != d_a1p * d_a2 || N.out_dim() != d_b)
        throw Error::validation("communication channel N dims inconsistent with declared dims");
}

std::size_t CqMacSpec::card_z() const {
    switch (cribbing) {
    case Cribbing::noiseless: return card_x1;
    case Cribbing::noisy: return static_cast<std::size_t>(q.cols());
    case Cribbing::none: return 1;
    }
    return 1;
}

void CqMacSpec::validate() const {
    if (card_x1 == 0 || card_x2 == 0 || d_b == 0)
        throw Error::validation("cq MAC alphabets and output dim must be positive");
    if (table.size() != card_x1 * card_x2)
        throw Error::validation("cq MAC table incomplete over X1 x X2");
    for (const auto& rho : table)
        if (rho.dim() != d_b)
            throw Error::validation("cq MAC table entry has wrong output dimension");
    if (cribbing == Cribbing::noisy) {
        if (static_cast<std::size_t>(q.rows()) != card_x1 || q.cols() == 0)
            throw Error::validation("cribbing matrix Q must have |X1| rows");
        for (Eigen::Index r = 0; r < q.rows(); ++r) {
            double sum = 0.0;
            for (Eigen::Index c = 0; c < q.cols(); ++c) {
                if (q(r, c) < -kSimplexTol)
                    throw Error::validation("cribbing matrix Q has a negative entry");
                sum += q(r, c);
            }
            if (std::abs(sum - 1.0) > kSimplexTol)
                throw Error::validation("cribbing matrix Q row does not sum to 1");
        }
    }
}

void BosonicParams::validate() const {
    if (eta1 < 0.0 || eta1 > 1.0 || eta2 < 0.0 || eta2 > 1.0)
        throw Error::validation("transmissivity out of [0, 1]");
    if (n_a1 < 0.0 || n_a2 < 0.0 || n_c < 0.0)
        throw Error::validation("mean photon number must be nonnegative");
}

double EnsembleSpec::joint_uv(std::size_t u, std::size_t v) const {
    return p_u[u * card_v + v];
}

void EnsembleSpec::validate_distributions() const {
    std::size_t cond = card_v > 0 ? card_u * card_v : card_u;
    if (p_u.size() != cond)
        throw Error::validation("p_U size mismatch");
    check_simplex(p_u.data(), p_u.size(), "p_U");
    if (static_cast<std::size_t>(p_x1_given.rows()) != cond ||
        static_cast<std::size_t>(p_x1_given.cols()) != card_x1)
        throw Error::validation("p_X1_given shape mismatch");
    for (Eigen::Index r = 0; r < p_x1_given.rows(); ++r) {
        std::vector<double> row(p_x1_given.cols());
        for (Eigen::Index c = 0; c < p_x1_given.cols(); ++c) row[c] = p_x1_given(r, c);
        check_simplex(row.data(), row.size(), "p_X1_given row");
    }
    if (static_cast<std::size_t>(p_x2_given.cols()) != card_x2)
        throw Error::validation("p_X2_given shape mismatch");
    for (Eigen::Index r = 0; r < p_x2_given.rows(); ++r) {
        std::vector<double> row(p_x2_given.cols());
        for (Eigen::Index c = 0; c < p_x2_given.cols(); ++c) row[c] = p_x2_given(r, c);
        check_simplex(row.data(), row.size(), "p_X2_given row");
    }
}

namespace {
void check_ensemble_vs_mac(const CribbingMac& mac, const EnsembleSpec& ens) {
    if (ens.theta.size() != ens.card_x1 || ens.zeta.size() != ens.card_x2)
        throw Error::validation("ensemble/channel mismatch: state tables incomplete");
    for (const auto& t : ens.theta)
        if (t.dim() != mac.d_a1)
            throw Error::validation("ensemble/channel mismatch: theta dimension");
    for (const auto& z : ens.zeta)
        if (z.dim() != mac.d_a2)
            throw Error::validation("ensemble/channel mismatch: zeta dimension");
}
} // namespace

CqState build_omega_df_sc(const CribbingMac& mac, const EnsembleSpec& ens) {
    if (ens.card_v > 0 || ens.instrument.has_value())
        throw Error::validation("ensemble shape error: df_sc takes no V and no instrument");
    ens.validate_distributions();
    check_ensemble_vs_mac(mac, ens);
    if (static_cast<std::size_t>(ens.p_x2_given.rows()) != ens.card_u)
        throw Error::validation("ensemble shape error: p_X2_given must be conditioned on U");

    std::vector<CqState::Entry> entries;
    for (std::size_t u = 0; u < ens.card_u; ++u)
        for (std::size_t x1 = 0; x1 < ens.card_x1; ++x1) {
            double w1 = ens.p_u[u] * ens.p_x1_given(u, x1);
            if (w1 <= 0.0) continue;
            Matrix l_out = mac.L.apply_matrix(ens.theta[x1].matrix());
            for (std::size_t x2 = 0; x2 < ens.card_x2; ++x2) {
                double w = w1 * ens.p_x2_given(u, x2);
                if (w <= 0.0) continue;
                entries.push_back({{u, x1, x2}, w, kron(l_out, ens.zeta[x2].matrix())});
            }
        }
    return CqState({{"U", ens.card_u}, {"X1", ens.card_x1}, {"X2", ens.card_x2}},
                   {{"A1p", mac.d_a1p}, {"E", mac.d_e}, {"A2", mac.d_a2}},
                   std::move(entries));
}

CqState build_omega_pdf_sc(const CribbingMac& mac, const EnsembleSpec& ens) {
    if (ens.card_v == 0)
        throw Error::validation("ensemble shape error: pdf_sc requires V");
    ens.validate_distributions();
    check_ensemble_vs_mac(mac, ens);
    // Alice 2 only learns the resolution information V with a one-block
    // delay, so her input distribution is steered by U alone. Allowing
    // p(x2|u,v) here would let the bounds exceed the converse.
    if (static_cast<std::size_t>(ens.p_x2_given.rows()) != ens.card_u)
        throw Error::validation("ensemble shape error: p_X2_given must be conditioned on U");

    std::vector<CqState::Entry> entries;
    for (std::size_t u = 0; u < ens.card_u; ++u)
        for (std::size_t v = 0; v < ens.card_v; ++v) {
            std::size_t uv = u * ens.card_v + v;
            for (std::size_t x1 = 0; x1 < ens.card_x1; ++x1) {
                double w1 = ens.p_u[uv] * ens.p_x1_given(uv, x1);
                if (w1 <= 0.0) continue;
                Matrix l_out = mac.L.apply_matrix(ens.theta[x1].matrix());
                for (std::size_t x2 = 0; x2 < ens.card_x2; ++x2) {
                    double w = w1 * ens.p_x2_given(u, x2);
                    if (w <= 0.0) continue;
                    entries.push_back({{u, v, x1, x2}, w, kron(l_out, ens.zeta[x2].matrix())});
                }
            }
        }
    return CqState({{"U", ens.card_u}, {"V", ens.card_v}, {"X1", ens.card_x1}, {"X2", ens.card_x2}},
                   {{"A1p", mac.d_a1p}, {"E", mac.d_e}, {"A2", mac.d_a2}},
                   std::move(entries));
}

CqState build_omega_causal(const CribbingMac& mac, const EnsembleSpec& ens) {
    if (!ens.instrument.has_value())
        throw Error::validation("ensemble shape error: causal region requires an instrument");
    if (ens.card_v > 0)
        throw Error::validation("ensemble shape error: causal region takes no V");
    ens.validate_distributions();
    check_ensemble_vs_mac(mac, ens);
    const Instrument& inst = *ens.instrument;
    if (inst.in_dim() != mac.d_e)
        throw Error::validation("invalid instrument: must act on E");
    std::size_t card_z = inst.outcomes().size();
    if (static_cast<std::size_t>(ens.p_x2_given.rows()) != card_z * ens.card_u)
        throw Error::validation("ensemble shape error: p_X2_given must be conditioned on (Z,U)");

    std::vector<std::size_t> le_dims = {mac.d_a1p, mac.d_e};
    std::vector<CqState::Entry> entries;
    for (std::size_t u = 0; u < ens.card_u; ++u)
        for (std::size_t x1 = 0; x1 < ens.card_x1; ++x1) {
            double w1 = ens.p_u[u] * ens.p_x1_given(u, x1);
            if (w1 <= 0.0) continue;
            Matrix l_out = mac.L.apply_matrix(ens.theta[x1].matrix());
            for (std::size_t z = 0; z < card_z; ++z) {
                Matrix wz = kron(Matrix::Identity(static_cast<Eigen::Index>(mac.d_a1p),
                                                  static_cast<Eigen::Index>(mac.d_a1p)),
                                 inst.outcomes()[z].op);
                Matrix post = wz * l_out * wz.adjoint();
                double prob = post.trace().real();
                if (prob <= 1e-15) continue; // zero-probability outcomes dropped
                post /= prob;
                for (std::size_t x2 = 0; x2 < ens.card_x2; ++x2) {
                    double w = w1 * prob * ens.p_x2_given(z * ens.card_u + u, x2);
                    if (w <= 0.0) continue;
                    entries.push_back({{u, x1, z, x2}, w, kron(post, ens.zeta[x2].matrix())});
                }
            }
        }
    return CqState({{"U", ens.card_u}, {"X1", ens.card_x1}, {"Z", card_z}, {"X2", ens.card_x2}},
                   {{"A1p", mac.d_a1p}, {"Eb", mac.d_e}, {"A2", mac.d_a2}},
                   std::move(entries));
}

CqState apply_n_to_omega(const CribbingMac& mac, const CqState& omega) {
    const auto& qregs = omega.quantum_registers();
    std::vector<std::size_t> qdims;
    for (const auto& q : qregs) qdims.push_back(q.dim);

    std::vector<CqState::Entry> entries;
    for (const auto& e : omega.entries()) {
        Matrix in;
        if (qregs.size() == 3 && qregs[0].name == "A1p" && qregs[2].name == "A2") {
            in = partial_trace_matrix(e.op, qdims, {0, 2});
        } else if (qregs.size() == 2 && qregs[0].name == "A1p" && qregs[1].name == "A2") {
            in = e.op;
        } else {
            throw Error::validation("register layout error: expected (A1p, [E,] A2)");
        }
        entries.push_back({e.cvals, e.weight, mac.N.apply_matrix(in)});
    }
    return CqState(omega.classical_registers(), {{"B", mac.d_b}}, std::move(entries));
}

namespace {
double quantum_cmi_a0_a1p_given_e(const Matrix& rho, std::size_t d_a1p, std::size_t d_e,
                                  std::size_t d_a0) {
    // layout (A1p, E, A0)
    std::vector<std::size_t> dims = {d_a1p, d_e, d_a0};
    double h_ea0 = von_neumann_entropy(partial_trace_matrix(rho, dims, {1, 2}));
    double h_a1pe = von_neumann_entropy(partial_trace_matrix(rho, dims, {0, 1}));
    double h_all = von_neumann_entropy(rho);
    double h_e = von_neumann_entropy(partial_trace_matrix(rho, dims, {1}));
    double cmi = h_ea0 + h_a1pe - h_all - h_e;
    return std::max(cmi, 0.0);
}
} // namespace

RobustnessReport check_robust_cribbing(const CribbingMac& mac, double tol,
                                       const std::vector<DensityOperator>& extra_inputs) {
    RobustnessReport report{true, {}};

    auto run = [&](const Matrix& theta_a1_a0, std::size_t d_a0) {
        KrausChannel ext = mac.L.extend({mac.d_a1, d_a0}, 0);
        Matrix out = ext.apply_matrix(theta_a1_a0); // layout (A1p, E, A0)
        return quantum_cmi_a0_a1p_given_e(out, mac.d_a1p, mac.d_e, d_a0);
    };

    DensityOperator choi = DensityOperator::maximally_entangled(mac.d_a1);
    report.cmi_values.push_back(run(choi.matrix(), mac.d_a1));

    for (const auto& extra : extra_inputs) {
        if (extra.dim() % mac.d_a1 != 0)
            throw Error::validation("extra input dimension is not a multiple of d_A1");
        report.cmi_values.push_back(run(extra.matrix(), extra.dim() / mac.d_a1));
    }
    for (double cmi : report.cmi_values)
        if (cmi > tol) report.certified = false;
    return report;
}

CribbingMac cq_to_cribbing_mac(const CqMacSpec& spec) {
    spec.validate();
    std::size_t d1 = spec.card_x1;
    std::size_t de = spec.card_z();

    // L embeds x1 as |x1> on A1' and produces E per the cribbing mode. One
    // Kraus operator per classical branch: the inputs are classical, so the
    // channel dephases in the computational basis.
    std::vector<Matrix> l_ops;
    for (std::size_t x = 0; x < d1; ++x) {
        auto ket_out = [&](std::size_t z) {
            Matrix k = Matrix::Zero(static_cast<Eigen::Index>(d1 * de),
                                    static_cast<Eigen::Index>(d1));
            k(static_cast<Eigen::Index>(x * de + z), static_cast<Eigen::Index>(x)) = 1.0;
            return k;
        };
        switch (spec.cribbing) {
        case CqMacSpec::Cribbing::noiseless:
            l_ops.push_back(ket_out(x));
            break;
        case CqMacSpec::Cribbing::noisy:
            for (std::size_t z = 0; z < de; ++z) {
                double p = spec.q(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(z));
                if (p > 0.0) l_ops.push_back(std::sqrt(p) * ket_out(z));
            }
            break;
        case CqMacSpec::Cribbing::none:
            l_ops.push_back(ket_out(0));
            break;
        }
    }
    KrausChannel L(d1, d1 * de, std::move(l_ops));

    // N reproduces the table: Kraus via eigendecomposition of each output.
    std::vector<Matrix> n_ops;
    for (std::size_t x1 = 0; x1 < spec.card_x1; ++x1)
        for (std::size_t x2 = 0; x2 < spec.card_x2; ++x2) {
            auto eig = herm_eig(spec.output(x1, x2).matrix());
            for (Eigen::Index j = 0; j < eig.values.size(); ++j) {
                double lam = std::max(eig.values(j), 0.0);
                if (lam <= 1e-15) continue;
                Matrix k = Matrix::Zero(static_cast<Eigen::Index>(spec.d_b),
                                        static_cast<Eigen::Index>(d1 * spec.card_x2));
                k.col(static_cast<Eigen::Index>(x1 * spec.card_x2 + x2)) =
                    std::sqrt(lam) * eig.vectors.col(j);
                n_ops.push_back(std::move(k));
            }
        }
    KrausChannel N(d1 * spec.card_x2, spec.d_b, std::move(n_ops));

    return CribbingMac(d1, d1, de, spec.card_x2, spec.d_b, std::move(L), std::move(N));
}

} // namespace qmac
