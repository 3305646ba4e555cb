#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qmac/optimizer.hpp"

#include <cmath>

using namespace qmac;

namespace {

CqMacSpec identity_bit_channel() {
    // B = X1, X2 ignored
    CqMacSpec spec;
    spec.card_x1 = 2;
    spec.card_x2 = 1;
    spec.d_b = 2;
    spec.table.push_back(DensityOperator::basis_state(2, 0));
    spec.table.push_back(DensityOperator::basis_state(2, 1));
    spec.cribbing = CqMacSpec::Cribbing::none;
    return spec;
}

CqMacSpec bsc_channel(double flip) {
    CqMacSpec spec;
    spec.card_x1 = 2;
    spec.card_x2 = 1;
    spec.d_b = 2;
    for (int x1 = 0; x1 < 2; ++x1) {
        Matrix m = Matrix::Zero(2, 2);
        m(x1, x1) = 1.0 - flip;
        m(1 - x1, 1 - x1) = flip;
        spec.table.push_back(DensityOperator(m));
    }
    spec.cribbing = CqMacSpec::Cribbing::none;
    return spec;
}

CqMacSpec xor_noiseless() {
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

OptimizerConfig quick_cfg(std::size_t restarts = 4) {
    OptimizerConfig cfg;
    cfg.restarts = restarts;
    cfg.max_iters = 60;
    cfg.seed = 7;
    cfg.card_u = 2;
    return cfg;
}

// Blahut-Arimoto for a binary-input classical channel, independent oracle.
double ba_capacity(double flip) {
    std::vector<double> p = {0.5, 0.5};
    double w[2][2] = {{1 - flip, flip}, {flip, 1 - flip}};
    double cap = 0.0;
    for (int iter = 0; iter < 2000; ++iter) {
        double q[2];
        for (int y = 0; y < 2; ++y) q[y] = p[0] * w[0][y] + p[1] * w[1][y];
        double d[2];
        for (int x = 0; x < 2; ++x) {
            d[x] = 0.0;
            for (int y = 0; y < 2; ++y)
                if (w[x][y] > 0) d[x] += w[x][y] * std::log2(w[x][y] / q[y]);
        }
        double z = p[0] * std::exp2(d[0]) + p[1] * std::exp2(d[1]);
        p[0] = p[0] * std::exp2(d[0]) / z;
        p[1] = 1.0 - p[0];
        cap = std::log2(z);
    }
    return cap;
}

} // namespace

TEST_CASE("lambda corner extraction") {
    RateBounds b{1.0, 1.0, 1.5, std::nullopt};
    auto [r1a, r2a] = lambda_corner(b, 1.0);
    CHECK(r1a == doctest::Approx(1.0));
    CHECK(r2a == doctest::Approx(0.5));
    auto [r1b, r2b] = lambda_corner(b, 0.0);
    CHECK(r1b == doctest::Approx(0.5));
    CHECK(r2b == doctest::Approx(1.0));
}

TEST_CASE("noiseless bit reaches capacity 1") {
    Channel ch = identity_bit_channel();
    auto pt = maximize_weighted_rate(RegionKind::none, ch, 1.0, quick_cfg());
    CHECK(pt.objective == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("bsc 0.11 matches the Blahut-Arimoto oracle") {
    double oracle = ba_capacity(0.11);
    CHECK(oracle == doctest::Approx(0.500084).epsilon(1e-5));
    Channel ch = bsc_channel(0.11);
    auto pt = maximize_weighted_rate(RegionKind::none, ch, 1.0, quick_cfg());
    CHECK(pt.objective == doctest::Approx(oracle).epsilon(1e-4));
}

TEST_CASE("lambda 0 on a channel ignoring X2 yields 0") {
    Channel ch = identity_bit_channel();
    auto pt = maximize_weighted_rate(RegionKind::none, ch, 0.0, quick_cfg());
    CHECK(pt.objective == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("xor noiseless-cribbing frontier holds both corners") {
    Channel ch = xor_noiseless();
    auto pts = pareto_frontier(RegionKind::cq_noiseless_sc, ch, {0.0, 0.5, 1.0}, quick_cfg());
    bool has10 = false, has01 = false;
    for (const auto& p : pts) {
        if (std::abs(p.r1 - 1.0) < 1e-5 && std::abs(p.r2) < 1e-5) has10 = true;
        if (std::abs(p.r2 - 1.0) < 1e-5 && std::abs(p.r1) < 1e-5) has01 = true;
    }
    CHECK(has10);
    CHECK(has01);
    // mutual non-domination
    for (const auto& a : pts)
        for (const auto& b : pts)
            if (&a != &b) {
                bool dominates =
                    a.r1 >= b.r1 && a.r2 >= b.r2 && (a.r1 > b.r1 || a.r2 > b.r2);
                CHECK_FALSE(dominates);
            }
}

TEST_CASE("single lambda gives a single point") {
    Channel ch = identity_bit_channel();
    auto pts = pareto_frontier(RegionKind::none, ch, {1.0}, quick_cfg(2));
    CHECK(pts.size() == 1);
}

TEST_CASE("determinism for a fixed seed") {
    Channel ch = bsc_channel(0.2);
    auto a = maximize_weighted_rate(RegionKind::none, ch, 0.7, quick_cfg(3));
    auto b = maximize_weighted_rate(RegionKind::none, ch, 0.7, quick_cfg(3));
    CHECK(a.objective == b.objective);
    CHECK(a.r1 == b.r1);
    CHECK(a.r2 == b.r2);
    REQUIRE(a.ensemble.p_u.size() == b.ensemble.p_u.size());
    for (std::size_t i = 0; i < a.ensemble.p_u.size(); ++i)
        CHECK(a.ensemble.p_u[i] == b.ensemble.p_u[i]);
}

TEST_CASE("objective is non-decreasing in restarts") {
    Channel ch = bsc_channel(0.3);
    double prev = -1.0;
    for (std::size_t r = 1; r <= 4; ++r) {
        auto pt = maximize_weighted_rate(RegionKind::none, ch, 0.6, quick_cfg(r));
        CHECK(pt.objective >= prev - 1e-12);
        prev = pt.objective;
    }
}

TEST_CASE("returned point lies in its own region") {
    Channel ch = xor_noiseless();
    auto pt = maximize_weighted_rate(RegionKind::cq_noiseless_sc, ch, 0.5, quick_cfg(2));
    CHECK(in_region(pt.bounds, pt.r1, pt.r2));
}

TEST_CASE("invalid cardinality override is rejected") {
    Channel ch = identity_bit_channel();
    OptimizerConfig cfg = quick_cfg();
    cfg.card_u = 0;
    CHECK_THROWS_WITH_AS(maximize_weighted_rate(RegionKind::none, ch, 1.0, cfg),
                         doctest::Contains("config error"), Error);
}
