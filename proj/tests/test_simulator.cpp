#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qmac/simulator.hpp"

#include <cmath>
#include <map>

using namespace qmac;

namespace {

DensityOperator random_density(SplitMix64& rng, std::size_t d) {
    Matrix g(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            g(i, j) = Complex(rng.uniform() - 0.5, rng.uniform() - 0.5);
    Matrix m = g * g.adjoint();
    m /= m.trace();
    return DensityOperator(m);
}

DensityOperator pure_overlap(double s) {
    // |psi> = s|0> + sqrt(1-s^2)|1>, so <0|psi> = s
    Vector v(2);
    v << Complex(s, 0.0), Complex(std::sqrt(1.0 - s * s), 0.0);
    return DensityOperator::pure(v);
}

double pgm_pairwise_error(double s_sq) {
    double s = std::sqrt(s_sq);
    auto dec = build_pgm({{0, pure_overlap(1.0)}, {1, pure_overlap(s)}});
    // pure_overlap(1.0) is |0>; the two states have overlap s
    double e01 = std::real((dec.povm[1] * pure_overlap(1.0).matrix()).trace());
    double e10 = std::real((dec.povm[0] * pure_overlap(s).matrix()).trace());
    return 0.5 * (e01 + e10);
}

CqMacSpec xor_channel() {
    CqMacSpec spec;
    spec.card_x1 = 2;
    spec.card_x2 = 2;
    spec.d_b = 2;
    for (std::size_t x1 = 0; x1 < 2; ++x1)
        for (std::size_t x2 = 0; x2 < 2; ++x2)
            spec.table.push_back(DensityOperator::basis_state(2, x1 ^ x2));
    spec.cribbing = CqMacSpec::Cribbing::noiseless;
    return spec;
}

// B = (x1, x2), perfectly distinguishable outputs
CqMacSpec pair_channel(std::size_t card) {
    CqMacSpec spec;
    spec.card_x1 = card;
    spec.card_x2 = card;
    spec.d_b = card * card;
    for (std::size_t x1 = 0; x1 < card; ++x1)
        for (std::size_t x2 = 0; x2 < card; ++x2)
            spec.table.push_back(DensityOperator::basis_state(card * card, x1 * card + x2));
    spec.cribbing = CqMacSpec::Cribbing::noiseless;
    return spec;
}

EnsembleSpec uniform_ensemble(std::size_t card_x1, std::size_t card_x2) {
    EnsembleSpec ens;
    ens.card_u = 1;
    ens.card_x1 = card_x1;
    ens.card_x2 = card_x2;
    ens.p_u = {1.0};
    ens.p_x1_given = RealMatrix::Constant(1, card_x1, 1.0 / card_x1);
    ens.p_x2_given = RealMatrix::Constant(1, card_x2, 1.0 / card_x2);
    return ens;
}

// classical strong-typicality mass by direct string enumeration
double oracle_mass(const std::vector<double>& p, std::size_t n, double delta) {
    std::size_t d = p.size(), total = 1;
    for (std::size_t i = 0; i < n; ++i) total *= d;
    double mass = 0.0;
    for (std::size_t code = 0; code < total; ++code) {
        std::vector<std::size_t> counts(d, 0);
        double q = 1.0;
        std::size_t rem = code;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t sym = rem % d;
            rem /= d;
            ++counts[sym];
            q *= p[sym];
        }
        bool ok = true;
        for (std::size_t a = 0; a < d && ok; ++a) {
            if (p[a] < 1e-15)
                ok = counts[a] == 0;
            else
                ok = std::abs(double(counts[a]) / n - p[a]) <= delta * p[a] + 1e-12;
        }
        if (ok) mass += q;
    }
    return mass;
}

std::size_t oracle_rank(const std::vector<double>& p, std::size_t n, double delta) {
    std::size_t d = p.size(), total = 1, rank = 0;
    for (std::size_t i = 0; i < n; ++i) total *= d;
    for (std::size_t code = 0; code < total; ++code) {
        std::vector<std::size_t> counts(d, 0);
        std::size_t rem = code;
        for (std::size_t i = 0; i < n; ++i) {
            ++counts[rem % d];
            rem /= d;
        }
        bool ok = true;
        for (std::size_t a = 0; a < d && ok; ++a) {
            if (p[a] < 1e-15)
                ok = counts[a] == 0;
            else
                ok = std::abs(double(counts[a]) / n - p[a]) <= delta * p[a] + 1e-12;
        }
        if (ok) ++rank;
    }
    return rank;
}

} // namespace

TEST_CASE("message counts round up") {
    CHECK(message_count(0.0, 7) == 1);
    CHECK(message_count(0.5, 4) == 4);
    CHECK(message_count(0.4, 8) == 10);
    CHECK_THROWS_WITH_AS(message_count(10.0, 16), doctest::Contains("rate too large"), Error);
}

TEST_CASE("codebook counts and determinism") {
    auto ens = uniform_ensemble(2, 2);
    Rates r{0.25, 0.5, 0.5};
    auto a = generate_codebooks(ens, 4, r, 11);
    CHECK(a.u_words.size() == 2);       // ceil(2^1)
    CHECK(a.x1_words[0].size() == 4);   // ceil(2^2)
    CHECK(a.x2_words[1].size() == 4);
    CHECK(a.x1_words[0][0].size() == 4);
    auto b = generate_codebooks(ens, 4, r, 11);
    CHECK(a.x1_words == b.x1_words);
    CHECK(a.x2_words == b.x2_words);
    auto c = generate_codebooks(ens, 4, r, 12);
    CHECK(a.x1_words != c.x1_words);
}

TEST_CASE("codebook letter frequencies follow the ensemble") {
    EnsembleSpec ens = uniform_ensemble(2, 2);
    ens.p_x1_given << 0.3, 0.7;
    auto book = generate_codebooks(ens, 10000, Rates{0.0, 0.0, 0.0}, 5);
    std::size_t ones = 0;
    for (std::size_t v : book.x1_words[0][0]) ones += v;
    double sigma = std::sqrt(10000 * 0.7 * 0.3);
    CHECK(std::abs(double(ones) - 7000.0) <= 3.0 * sigma);
}

TEST_CASE("pgm completeness on random candidates") {
    SplitMix64 rng(3);
    std::vector<std::pair<std::size_t, DensityOperator>> cands;
    for (std::size_t c = 0; c < 5; ++c) cands.emplace_back(c, random_density(rng, 3));
    auto dec = build_pgm(cands);
    Matrix total = Matrix::Zero(3, 3);
    for (const auto& lam : dec.povm) {
        total += lam;
        auto es = herm_eig(lam);
        CHECK(es.values.minCoeff() >= -1e-9);
    }
    CHECK((total - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("pgm reproduces the two-state optimum") {
    for (double s_sq : {0.0, 0.25, 0.5, 0.9}) {
        double helstrom = 0.5 * (1.0 - std::sqrt(1.0 - s_sq));
        CHECK(pgm_pairwise_error(s_sq) == doctest::Approx(helstrom).epsilon(1e-9));
    }
    CHECK(pgm_pairwise_error(0.5) == doctest::Approx(0.146447).epsilon(1e-5));
}

TEST_CASE("identical candidates force a uniform guess") {
    for (std::size_t m : {2ul, 5ul}) {
        std::vector<std::pair<std::size_t, DensityOperator>> cands;
        for (std::size_t c = 0; c < m; ++c)
            cands.emplace_back(c, DensityOperator::basis_state(2, 0));
        auto dec = build_pgm(cands);
        double err = 1.0 - std::real((dec.povm[0] * cands[0].second.matrix()).trace());
        CHECK(err == doctest::Approx(double(m - 1) / m).epsilon(1e-12));
    }
}

TEST_CASE("empty candidate list is rejected") {
    CHECK_THROWS_WITH_AS(build_pgm({}), doctest::Contains("no candidates"), Error);
}

TEST_CASE("orthogonal states measure perfectly") {
    auto dec = build_pgm({{7, DensityOperator::basis_state(2, 0)},
                          {9, DensityOperator::basis_state(2, 1)}});
    SplitMix64 rng(1);
    for (int i = 0; i < 50; ++i)
        CHECK(measure(dec, DensityOperator::basis_state(2, 1), rng) == 9);
}

TEST_CASE("measurement frequencies match the Born rule") {
    auto dec = build_pgm({{0, pure_overlap(1.0)}, {1, pure_overlap(std::sqrt(0.5))}});
    DensityOperator rho = pure_overlap(1.0);
    double p1 = std::real((dec.povm[1] * rho.matrix()).trace());
    SplitMix64 rng(42);
    std::size_t hits = 0;
    const std::size_t trials = 100000;
    for (std::size_t i = 0; i < trials; ++i)
        if (measure(dec, rho, rng) == 1) ++hits;
    double sigma = std::sqrt(trials * p1 * (1.0 - p1));
    CHECK(std::abs(double(hits) - trials * p1) <= 3.0 * sigma);
}

TEST_CASE("typical projector of the maximally mixed qubit is the identity") {
    auto tp = typical_projector(DensityOperator::maximally_mixed(2), 4, 0.1);
    CHECK((tp.projector - Matrix::Identity(16, 16)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(tp.rank == 16);
    CHECK(tp.trace_mass == doctest::Approx(1.0));
}

TEST_CASE("typical projector of a pure state has rank 1") {
    Vector v(2);
    v << Complex(std::sqrt(0.3), 0.0), Complex(std::sqrt(0.7), 0.0);
    auto tp = typical_projector(DensityOperator::pure(v), 5, 0.1);
    CHECK(tp.rank == 1);
    CHECK(tp.trace_mass == doctest::Approx(1.0));
}

TEST_CASE("typical projector matches brute-force enumeration") {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = 0.25;
    m(1, 1) = 0.75; // ascending eigen order puts 0.25 first either way
    DensityOperator rho(m);
    for (double delta : {0.1, 0.2}) {
        auto tp = typical_projector(rho, 8, delta);
        std::vector<double> p = {0.25, 0.75};
        CHECK(tp.trace_mass == doctest::Approx(oracle_mass(p, 8, delta)).epsilon(1e-12));
        CHECK(tp.rank == oracle_rank(p, 8, delta));
        // idempotence and commutation with the n-fold state
        CHECK((tp.projector * tp.projector - tp.projector).cwiseAbs().maxCoeff() < 1e-9);
        Matrix rn = Matrix::Identity(1, 1);
        for (int i = 0; i < 8; ++i) rn = kron(rn, m);
        CHECK((tp.projector * rn - rn * tp.projector).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("typicality bounds hold with the measured slack") {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = 0.75;
    m(1, 1) = 0.25;
    DensityOperator rho(m);
    for (std::size_t n : {6ul, 8ul, 10ul})
        for (double delta : {0.1, 0.2}) {
            auto rep = verify_typicality_bounds(rho, n, delta);
            CHECK(rep.mass == doctest::Approx(oracle_mass({0.75, 0.25}, n, delta)).epsilon(1e-12));
            CHECK(rep.rank == oracle_rank({0.75, 0.25}, n, delta));
            CHECK(rep.sandwich_ok);
            CHECK(rep.rank_ok);
            CHECK(rep.entropy == doctest::Approx(0.811278).epsilon(1e-5));
            if (rep.rank > 0) {
                CHECK(rep.min_eig >= std::exp2(-double(n) * (rep.entropy + rep.c * delta)) * (1 - 1e-9));
                CHECK(double(rep.rank) <= std::exp2(double(n) * (rep.entropy + rep.c * delta)) * (1 + 1e-9));
            }
        }
}

TEST_CASE("pure states make every bound tight") {
    auto rep = verify_typicality_bounds(DensityOperator::basis_state(2, 0), 6, 0.1);
    CHECK(rep.mass == doctest::Approx(1.0));
    CHECK(rep.rank == 1);
    CHECK(rep.c == doctest::Approx(0.0));
}

TEST_CASE("conditional typicality matches a classical oracle") {
    // commuting states turn the conditional subspace into classical typicality
    Matrix s0 = Matrix::Zero(2, 2), s1 = Matrix::Zero(2, 2);
    s0(0, 0) = 0.9;
    s0(1, 1) = 0.1;
    s1(0, 0) = 0.4;
    s1(1, 1) = 0.6;
    std::vector<DensityOperator> sigma = {DensityOperator(s0), DensityOperator(s1)};
    std::vector<double> px = {0.5, 0.5};
    std::vector<std::size_t> xn = {0, 1, 0, 1, 0, 1, 0, 1}; // typical for p_X
    double delta = 0.4;
    auto rep = verify_conditional_typicality(px, sigma, xn, delta);
    // groups of four positions each; spectra sorted ascending by the solver
    double expect = oracle_mass({0.1, 0.9}, 4, delta) * oracle_mass({0.4, 0.6}, 4, delta);
    CHECK(rep.conditional.mass == doctest::Approx(expect).epsilon(1e-12));
    CHECK(rep.conditional.sandwich_ok);
    CHECK(rep.conditional.rank_ok);
    double hbx = 0.5 * (-(0.9 * std::log2(0.9) + 0.1 * std::log2(0.1)) -
                        (0.4 * std::log2(0.4) + 0.6 * std::log2(0.6)));
    CHECK(rep.conditional.entropy == doctest::Approx(hbx).epsilon(1e-12));
    // the average-state projector keeps most of the conditional state
    CHECK(rep.unconditional_mass > 0.0);
    CHECK(rep.unconditional_mass <= 1.0 + 1e-9);
}

TEST_CASE("decode-forward with zero rates never errs") {
    auto spec = xor_channel();
    auto ens = uniform_ensemble(2, 2);
    SimConfig cfg;
    cfg.n = 4;
    cfg.blocks = 3;
    cfg.trials = 30;
    auto rep = simulate_df_noiseless(spec, ens, Rates{0.0, 0.0, 0.0}, cfg);
    CHECK(rep.empirical_error == 0.0);
    for (double e : rep.per_block_errors) CHECK(e == 0.0);
}

TEST_CASE("decode-forward on orthogonal outputs stays error-free in-region") {
    auto spec = pair_channel(4); // log|B| = 4 bits
    auto ens = uniform_ensemble(4, 4);
    SimConfig cfg;
    cfg.n = 8;
    cfg.blocks = 3;
    cfg.trials = 60;
    cfg.seed = 2;
    auto rep = simulate_df_noiseless(spec, ens, Rates{0.0, 0.5, 0.5}, cfg);
    CHECK(rep.empirical_error == 0.0);
}

TEST_CASE("decode-forward error grows past the sum-rate bound") {
    auto spec = xor_channel();
    auto ens = uniform_ensemble(2, 2);
    SimConfig cfg;
    cfg.n = 8;
    cfg.blocks = 4;
    cfg.trials = 200;
    auto low = simulate_df_noiseless(spec, ens, Rates{0.0, 0.4, 0.4}, cfg);
    auto high = simulate_df_noiseless(spec, ens, Rates{0.0, 0.9, 0.9}, cfg);
    CHECK(high.empirical_error > 0.5);
    CHECK(low.empirical_error < high.empirical_error);
}

TEST_CASE("decode-forward reports are deterministic") {
    auto spec = xor_channel();
    auto ens = uniform_ensemble(2, 2);
    SimConfig cfg;
    cfg.n = 6;
    cfg.blocks = 3;
    cfg.trials = 80;
    cfg.seed = 9;
    auto a = simulate_df_noiseless(spec, ens, Rates{0.0, 0.4, 0.4}, cfg);
    auto b = simulate_df_noiseless(spec, ens, Rates{0.0, 0.4, 0.4}, cfg);
    CHECK(a.empirical_error == b.empirical_error);
    CHECK(a.per_block_errors == b.per_block_errors);
}

TEST_CASE("decode-forward handles non-commuting outputs") {
    CqMacSpec spec;
    spec.card_x1 = 2;
    spec.card_x2 = 1;
    spec.d_b = 2;
    Vector plus(2);
    plus << Complex(std::sqrt(0.5), 0.0), Complex(std::sqrt(0.5), 0.0);
    spec.table.push_back(DensityOperator::basis_state(2, 0));
    spec.table.push_back(DensityOperator::pure(plus));
    spec.cribbing = CqMacSpec::Cribbing::noiseless;
    auto ens = uniform_ensemble(2, 1);
    SimConfig cfg;
    cfg.n = 3;
    cfg.blocks = 2;
    cfg.trials = 40;
    auto rep = simulate_df_noiseless(spec, ens, Rates{0.0, 0.25, 0.0}, cfg);
    CHECK(rep.empirical_error >= 0.0);
    CHECK(rep.empirical_error <= 1.0);
    auto again = simulate_df_noiseless(spec, ens, Rates{0.0, 0.25, 0.0}, cfg);
    CHECK(rep.empirical_error == again.empirical_error);
}

TEST_CASE("decode-forward requires noiseless cribbing") {
    auto spec = xor_channel();
    spec.cribbing = CqMacSpec::Cribbing::none;
    auto ens = uniform_ensemble(2, 2);
    SimConfig cfg;
    CHECK_THROWS_WITH_AS(simulate_df_noiseless(spec, ens, Rates{}, cfg),
                         doctest::Contains("noiseless cribbing"), Error);
}

TEST_CASE("single-block packing at zero rates always succeeds") {
    auto spec = xor_channel();
    auto ens = uniform_ensemble(2, 2);
    SimConfig cfg;
    cfg.n = 4;
    cfg.trials = 50;
    auto rep = simulate_packing_single_block(spec, ens, Rates{0.0, 0.0, 0.0}, cfg);
    CHECK(rep.empirical_error == 0.0);
}

TEST_CASE("single-block packing on orthogonal outputs succeeds in-region") {
    auto spec = pair_channel(4);
    auto ens = uniform_ensemble(4, 4);
    SimConfig cfg;
    cfg.n = 6;
    cfg.trials = 400;
    cfg.seed = 3;
    auto rep = simulate_packing_single_block(spec, ens, Rates{0.0, 0.5, 0.5}, cfg);
    CHECK(1.0 - rep.empirical_error >= 0.99);
}

TEST_CASE("packing success drops as rates rise with a fixed seed") {
    auto spec = xor_channel();
    auto ens = uniform_ensemble(2, 2);
    SimConfig cfg;
    cfg.n = 8;
    cfg.trials = 300;
    cfg.seed = 4;
    auto low = simulate_packing_single_block(spec, ens, Rates{0.0, 0.2, 0.2}, cfg);
    auto high = simulate_packing_single_block(spec, ens, Rates{0.0, 0.9, 0.9}, cfg);
    CHECK(low.empirical_error <= high.empirical_error);
}

TEST_CASE("projected decoder runs the literal construction") {
    CqMacSpec spec;
    spec.card_x1 = 2;
    spec.card_x2 = 1;
    spec.d_b = 2;
    spec.table.push_back(DensityOperator::basis_state(2, 0));
    spec.table.push_back(DensityOperator::basis_state(2, 1));
    spec.cribbing = CqMacSpec::Cribbing::none;
    auto ens = uniform_ensemble(2, 1);
    SimConfig cfg;
    cfg.n = 4;
    cfg.trials = 60;
    cfg.delta = 0.3;
    cfg.decoder = DecoderKind::pgm_projected;
    auto rep = simulate_packing_single_block(spec, ens, Rates{0.0, 0.25, 0.0}, cfg);
    CHECK(rep.empirical_error >= 0.0);
    CHECK(rep.empirical_error <= 1.0);
    cfg.decoder = DecoderKind::pgm_direct;
    auto direct = simulate_packing_single_block(spec, ens, Rates{0.0, 0.25, 0.0}, cfg);
    // the direct decoder should not be worse on this noiseless channel
    CHECK(direct.empirical_error <= rep.empirical_error + 1e-12);
}

TEST_CASE("decoder names round-trip") {
    CHECK(parse_decoder_kind("pgm_direct") == DecoderKind::pgm_direct);
    CHECK(parse_decoder_kind("pgm_projected") == DecoderKind::pgm_projected);
    CHECK(decoder_kind_name(DecoderKind::pgm_projected) == std::string("pgm_projected"));
    CHECK_THROWS_WITH_AS(parse_decoder_kind("ml"), doctest::Contains("unknown decoder"), Error);
}
