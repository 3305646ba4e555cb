#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qmac/channels.hpp"
#include "qmac/rng.hpp"

using namespace qmac;

namespace {

// L that copies a basis input to (A1', E), dephasing in the computational
// basis: one Kraus operator |x,x><x| per symbol.
KrausChannel copy_tap(std::size_t d) {
    std::vector<Matrix> ops;
    for (std::size_t x = 0; x < d; ++x) {
        Matrix k = Matrix::Zero(static_cast<Eigen::Index>(d * d), static_cast<Eigen::Index>(d));
        k(static_cast<Eigen::Index>(x * d + x), static_cast<Eigen::Index>(x)) = 1.0;
        ops.push_back(std::move(k));
    }
    return KrausChannel(d, d * d, std::move(ops));
}

// N: (A1', A2) of dims (2, 2) -> B = |x1 xor x2> on basis inputs, dephasing
// everything else.
KrausChannel xor_channel() {
    std::vector<Matrix> ops;
    for (std::size_t x1 = 0; x1 < 2; ++x1)
        for (std::size_t x2 = 0; x2 < 2; ++x2) {
            Matrix k = Matrix::Zero(2, 4);
            k(static_cast<Eigen::Index>(x1 ^ x2), static_cast<Eigen::Index>(x1 * 2 + x2)) = 1.0;
            ops.push_back(k);
        }
    return KrausChannel(4, 2, std::move(ops));
}

CqMacSpec xor_cq(CqMacSpec::Cribbing crib) {
    CqMacSpec spec;
    spec.card_x1 = 2;
    spec.card_x2 = 2;
    spec.d_b = 2;
    for (std::size_t x1 = 0; x1 < 2; ++x1)
        for (std::size_t x2 = 0; x2 < 2; ++x2)
            spec.table.push_back(DensityOperator::basis_state(2, x1 ^ x2));
    spec.cribbing = crib;
    return spec;
}

EnsembleSpec uniform_product_ens(std::size_t cx1, std::size_t cx2) {
    EnsembleSpec ens;
    ens.card_u = 1;
    ens.card_x1 = cx1;
    ens.card_x2 = cx2;
    ens.p_u = {1.0};
    ens.p_x1_given = RealMatrix::Constant(1, static_cast<Eigen::Index>(cx1), 1.0 / cx1);
    ens.p_x2_given = RealMatrix::Constant(1, static_cast<Eigen::Index>(cx2), 1.0 / cx2);
    for (std::size_t x = 0; x < cx1; ++x) ens.theta.push_back(DensityOperator::basis_state(cx1, x));
    for (std::size_t x = 0; x < cx2; ++x) ens.zeta.push_back(DensityOperator::basis_state(cx2, x));
    return ens;
}

} // namespace

TEST_CASE("cribbing mac dimension checks") {
    CHECK_NOTHROW(CribbingMac(2, 2, 2, 2, 2, copy_tap(2), xor_channel()));
    CHECK_THROWS_AS(CribbingMac(2, 2, 3, 2, 2, copy_tap(2), xor_channel()), Error);
}

TEST_CASE("omega_df_sc normalization and copy correlation") {
    CribbingMac mac(2, 2, 2, 2, 2, copy_tap(2), xor_channel());
    auto ens = uniform_product_ens(2, 2);
    CqState omega = build_omega_df_sc(mac, ens);
    CHECK(omega.total_weight() == doctest::Approx(1.0));
    // E is a perfect copy of X1 here
    CHECK(cq_mutual_information(omega, {"X1"}, {"E"}) == doctest::Approx(1.0));
}

TEST_CASE("single-letter omega with degenerate alphabets") {
    CribbingMac mac(2, 2, 2, 2, 2, copy_tap(2), xor_channel());
    EnsembleSpec ens = uniform_product_ens(1, 1);
    ens.theta = {DensityOperator::basis_state(2, 0)};
    ens.zeta = {DensityOperator::basis_state(2, 0)};
    CqState omega = build_omega_df_sc(mac, ens);
    CHECK(omega.entries().size() == 1);
    CHECK(omega.total_weight() == doctest::Approx(1.0));
}

TEST_CASE("applying N matches composing the full MAC directly") {
    SplitMix64 rng(5);
    CribbingMac mac(2, 2, 2, 2, 2, copy_tap(2), xor_channel());
    auto ens = uniform_product_ens(2, 2);
    CqState omega_b = apply_n_to_omega(mac, build_omega_df_sc(mac, ens));
    CHECK(omega_b.total_weight() == doctest::Approx(1.0));

    // direct composite: Tr_E[N(L(theta) x zeta)] per (x1, x2)
    Matrix avg_direct = Matrix::Zero(2, 2);
    for (std::size_t x1 = 0; x1 < 2; ++x1)
        for (std::size_t x2 = 0; x2 < 2; ++x2) {
            Matrix le = mac.L.apply_matrix(ens.theta[x1].matrix());
            Matrix in = partial_trace_matrix(kron(le, ens.zeta[x2].matrix()), {2, 2, 2}, {0, 2});
            avg_direct += 0.25 * mac.N.apply_matrix(in);
        }
    CHECK((omega_b.quantum_marginal() - avg_direct).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("causal omega with trivial instrument matches df marginal") {
    CribbingMac mac(2, 2, 2, 2, 2, copy_tap(2), xor_channel());
    EnsembleSpec ens = uniform_product_ens(2, 2);
    ens.instrument = Instrument::trivial(2);
    // with one z outcome, p_x2_given is conditioned on (z, u): 1 * 1 rows
    CqState omega = build_omega_causal(mac, ens);
    CHECK(omega.total_weight() == doctest::Approx(1.0));
    CqState df = build_omega_df_sc(mac, uniform_product_ens(2, 2));
    CHECK(cq_mutual_information(omega, {"X1"}, {"Eb"}) ==
          doctest::Approx(cq_mutual_information(df, {"X1"}, {"E"})));
}

TEST_CASE("projective instrument on a copy tap reads out X1") {
    CribbingMac mac(2, 2, 2, 2, 2, copy_tap(2), xor_channel());
    EnsembleSpec ens = uniform_product_ens(2, 2);
    ens.instrument = Instrument::projective_computational(2);
    ens.p_x2_given = RealMatrix::Constant(2, 2, 0.5); // rows z*|U|+u
    CqState omega = build_omega_causal(mac, ens);
    CHECK(omega.total_weight() == doctest::Approx(1.0));
    CHECK(cq_mutual_information(omega, {"X1"}, {"Z"}) == doctest::Approx(1.0));
}

TEST_CASE("robust cribbing certifications") {
    // copy tap: classical value recoverable from E
    CribbingMac copy_mac(2, 2, 2, 2, 2, copy_tap(2), xor_channel());
    auto rep = check_robust_cribbing(copy_mac, 1e-6);
    CHECK(rep.certified);
    CHECK(rep.cmi_values[0] == doctest::Approx(0.0).epsilon(1e-6));

    // trivial E (dim 1), A1' = A1: nothing cribbable, CMI = 2 on the Choi input
    KrausChannel keep(2, 2, {Matrix::Identity(2, 2)});
    KrausChannel n2 = xor_channel();
    CribbingMac opaque(2, 2, 1, 2, 2, keep, n2);
    auto rep2 = check_robust_cribbing(opaque, 1e-6);
    CHECK_FALSE(rep2.certified);
    CHECK(rep2.cmi_values[0] == doctest::Approx(2.0).epsilon(1e-9));

    // trivial A1' (dim 1): all information flows to E
    Matrix iso = Matrix::Zero(2, 2); // out dim = d_a1p * d_e = 1 * 2
    iso(0, 0) = 1.0;
    iso(1, 1) = 1.0;
    KrausChannel hop(2, 2, {iso});
    std::vector<Matrix> nops;
    for (std::size_t x2 = 0; x2 < 2; ++x2) {
        Matrix k = Matrix::Zero(2, 2);
        k(static_cast<Eigen::Index>(x2), static_cast<Eigen::Index>(x2)) = 1.0;
        k(static_cast<Eigen::Index>(x2 ^ 1), static_cast<Eigen::Index>(x2 ^ 1)) = 1.0;
        nops.push_back(k / std::sqrt(2.0));
    }
    KrausChannel n_hop(2, 2, {Matrix::Identity(2, 2)});
    CribbingMac multihop(2, 1, 2, 2, 2, hop, KrausChannel(2, 2, {Matrix::Identity(2, 2)}));
    auto rep3 = check_robust_cribbing(multihop, 1e-6);
    CHECK(rep3.certified);
}

TEST_CASE("cq embedding: noiseless cribbing copies the input") {
    CqMacSpec spec = xor_cq(CqMacSpec::Cribbing::noiseless);
    spec.validate();
    CribbingMac mac = cq_to_cribbing_mac(spec);
    CHECK(mac.d_e == 2);
    Matrix out = mac.L.apply_matrix(DensityOperator::basis_state(2, 1).matrix());
    // |1>_{A1'} |1>_E = index 3 of dim 4
    CHECK(std::abs(out(3, 3) - 1.0) < 1e-12);
    auto rep = check_robust_cribbing(mac, 1e-6);
    CHECK(rep.certified);
}

TEST_CASE("cq embedding: identity Q equals noiseless; N reproduces the table") {
    CqMacSpec noisy = xor_cq(CqMacSpec::Cribbing::noisy);
    noisy.q = RealMatrix::Identity(2, 2);
    CribbingMac a = cq_to_cribbing_mac(noisy);
    CribbingMac b = cq_to_cribbing_mac(xor_cq(CqMacSpec::Cribbing::noiseless));
    auto probe = DensityOperator::maximally_mixed(2).matrix();
    CHECK((a.L.apply_matrix(probe) - b.L.apply_matrix(probe)).cwiseAbs().maxCoeff() < 1e-12);

    for (std::size_t x1 = 0; x1 < 2; ++x1)
        for (std::size_t x2 = 0; x2 < 2; ++x2) {
            Matrix in = Matrix::Zero(4, 4);
            in(static_cast<Eigen::Index>(x1 * 2 + x2), static_cast<Eigen::Index>(x1 * 2 + x2)) =
                1.0;
            Matrix out = a.N.apply_matrix(in);
            CHECK((out - noisy.output(x1, x2).matrix()).cwiseAbs().maxCoeff() < 1e-12);
        }
}

TEST_CASE("cq embedding: uncertifiable when A1' carries information E lacks") {
    // no cribbing: E is a constant, A1' carries X1
    CqMacSpec spec = xor_cq(CqMacSpec::Cribbing::none);
    CribbingMac mac = cq_to_cribbing_mac(spec);
    // A0 = classical copy of X1 embedded as a correlated basis input
    Matrix theta = Matrix::Zero(4, 4);
    theta(0, 0) = 0.5;
    theta(3, 3) = 0.5;
    auto rep = check_robust_cribbing(mac, 1e-6, {DensityOperator(theta)});
    CHECK_FALSE(rep.certified);
    CHECK(rep.cmi_values[1] >= 1.0 - 1e-6);
}

TEST_CASE("validation failures") {
    CqMacSpec spec = xor_cq(CqMacSpec::Cribbing::noisy);
    spec.q = RealMatrix::Constant(2, 2, 0.4);
    CHECK_THROWS_AS(spec.validate(), Error);

    EnsembleSpec bad = uniform_product_ens(2, 2);
    bad.p_x1_given(0, 0) = 0.9;
    CHECK_THROWS_AS(bad.validate_distributions(), Error);

    BosonicParams bp{1.2, 0.5, 1.0, 1.0, 0.0};
    CHECK_THROWS_AS(bp.validate(), Error);
}

TEST_CASE("random ensembles normalize") {
    SplitMix64 rng(17);
    CribbingMac mac(2, 2, 2, 2, 2, copy_tap(2), xor_channel());
    for (int t = 0; t < 25; ++t) {
        EnsembleSpec ens;
        ens.card_u = 2;
        ens.card_x1 = 2;
        ens.card_x2 = 2;
        ens.p_u = rng.dirichlet(2);
        ens.p_x1_given = RealMatrix(2, 2);
        ens.p_x2_given = RealMatrix(2, 2);
        for (int u = 0; u < 2; ++u) {
            auto r1 = rng.dirichlet(2);
            auto r2 = rng.dirichlet(2);
            for (int x = 0; x < 2; ++x) {
                ens.p_x1_given(u, x) = r1[x];
                ens.p_x2_given(u, x) = r2[x];
            }
        }
        for (std::size_t x = 0; x < 2; ++x) {
            ens.theta.push_back(DensityOperator::basis_state(2, x));
            ens.zeta.push_back(DensityOperator::basis_state(2, x));
        }
        CHECK(build_omega_df_sc(mac, ens).total_weight() == doctest::Approx(1.0));
    }
}
