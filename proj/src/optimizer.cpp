#include "qmac/optimizer.hpp"

#include "qmac/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qmac {

namespace {

constexpr double kTwoPi = 6.283185307179586;

// Euclidean projection onto the probability simplex.
void project_simplex(std::vector<double>& v) {
    std::vector<double> u = v;
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cum = 0.0, theta = 0.0;
    std::size_t rho = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        cum += u[i];
        double t = (cum - 1.0) / static_cast<double>(i + 1);
        if (u[i] - t > 0.0) {
            rho = i + 1;
            theta = t;
        }
    }
    if (rho == 0) {
        std::fill(v.begin(), v.end(), 1.0 / static_cast<double>(v.size()));
        return;
    }
    for (auto& x : v) x = std::max(x - theta, 0.0);
    double s = std::accumulate(v.begin(), v.end(), 0.0);
    for (auto& x : v) x /= s;
}

DensityOperator pure_qubit(double polar, double azimuth) {
    Vector psi(2);
    psi(0) = std::cos(polar / 2.0);
    psi(1) = std::exp(Complex(0.0, azimuth)) * std::sin(polar / 2.0);
    return DensityOperator::pure(psi);
}

// Traceless Hermitian basis (generalized Gell-Mann), d^2 - 1 matrices.
std::vector<Matrix> gell_mann(std::size_t d) {
    std::vector<Matrix> out;
    auto n = static_cast<Eigen::Index>(d);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            Matrix s = Matrix::Zero(n, n);
            s(i, j) = 1.0;
            s(j, i) = 1.0;
            out.push_back(s);
            Matrix a = Matrix::Zero(n, n);
            a(i, j) = Complex(0.0, -1.0);
            a(j, i) = Complex(0.0, 1.0);
            out.push_back(a);
        }
    for (Eigen::Index k = 1; k < n; ++k) {
        Matrix m = Matrix::Zero(n, n);
        for (Eigen::Index i = 0; i < k; ++i) m(i, i) = 1.0;
        m(k, k) = -static_cast<double>(k);
        out.push_back(m * (1.0 / std::sqrt(static_cast<double>(k * (k + 1)))));
    }
    return out;
}

// U = exp(iH) with H = sum_k angles_k G_k; measurement basis = columns of U.
Instrument projective_from_angles(std::size_t d, const std::vector<double>& angles) {
    auto basis = gell_mann(d);
    Matrix h = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::size_t k = 0; k < basis.size(); ++k) h += angles[k] * basis[k];
    auto eig = herm_eig(h);
    Matrix phases = Matrix::Zero(h.rows(), h.cols());
    for (Eigen::Index i = 0; i < h.rows(); ++i)
        phases(i, i) = std::exp(Complex(0.0, eig.values(i)));
    Matrix u = eig.vectors * phases * eig.vectors.adjoint();
    std::vector<Instrument::Outcome> outs;
    for (Eigen::Index z = 0; z < h.rows(); ++z) {
        Matrix proj = u.col(z) * u.col(z).adjoint();
        outs.push_back({static_cast<int>(z), std::move(proj)});
    }
    return Instrument(d, std::move(outs));
}

struct SearchSpace {
    RegionKind kind;
    const Channel* channel;
    std::size_t card_u = 1, card_v = 0, card_x1 = 2, card_x2 = 2;
    std::size_t d_a1 = 0, d_a2 = 0, d_e = 0;
    bool is_cq = false;
    bool theta_angles = false, zeta_angles = false, instr_angles = false;
    std::vector<DensityOperator> theta, zeta; // used when not angle-driven
    std::vector<std::size_t> simplex_sizes;
    std::size_t n_angles = 0;
};

std::size_t resolved(const std::optional<std::size_t>& ov, std::size_t dflt, std::size_t cap) {
    if (ov.has_value()) {
        if (*ov < 1) throw Error::validation("config error: cardinality override must be >= 1");
        return *ov;
    }
    return std::min(dflt, cap);
}

std::vector<DensityOperator> basis_table(std::size_t d, std::size_t card) {
    std::vector<DensityOperator> out;
    for (std::size_t x = 0; x < card; ++x) out.push_back(DensityOperator::basis_state(d, x % d));
    return out;
}

SearchSpace make_space(RegionKind kind, const Channel& channel, const OptimizerConfig& cfg) {
    SearchSpace sp;
    sp.kind = kind;
    sp.channel = &channel;

    std::size_t d_b;
    if (const auto* spec = std::get_if<CqMacSpec>(&channel)) {
        sp.is_cq = true;
        sp.card_x1 = spec->card_x1;
        sp.card_x2 = spec->card_x2;
        sp.d_e = spec->card_z();
        d_b = spec->d_b;
    } else {
        const auto& mac = std::get<CribbingMac>(channel);
        sp.d_a1 = mac.d_a1;
        sp.d_a2 = mac.d_a2;
        sp.d_e = mac.d_e;
        d_b = mac.d_b;
        auto lemma_x1 = (mac.d_a1 * mac.d_a1 + 2) * (d_b * d_b * d_b * d_b + 2);
        auto lemma_x2 = (mac.d_a2 * mac.d_a2 + 1) * (d_b * d_b + 2);
        switch (cfg.state_param) {
        case OptimizerConfig::StateParam::fixed:
            if (cfg.theta.empty() || cfg.zeta.empty())
                throw Error::validation("config error: fixed states require theta and zeta");
            sp.theta = cfg.theta;
            sp.zeta = cfg.zeta;
            sp.card_x1 = resolved(cfg.card_x1, sp.theta.size(), sp.theta.size());
            sp.card_x2 = resolved(cfg.card_x2, sp.zeta.size(), sp.zeta.size());
            if (sp.card_x1 != sp.theta.size() || sp.card_x2 != sp.zeta.size())
                throw Error::validation("config error: alphabet must match fixed state tables");
            break;
        case OptimizerConfig::StateParam::pure_qubit_angles:
            sp.theta_angles = mac.d_a1 == 2;
            sp.zeta_angles = mac.d_a2 == 2;
            sp.card_x1 = resolved(cfg.card_x1, sp.theta_angles ? lemma_x1 : mac.d_a1,
                                  cfg.cardinality_cap);
            sp.card_x2 = resolved(cfg.card_x2, sp.zeta_angles ? lemma_x2 : mac.d_a2,
                                  cfg.cardinality_cap);
            if (!sp.theta_angles) sp.theta = basis_table(mac.d_a1, sp.card_x1);
            if (!sp.zeta_angles) sp.zeta = basis_table(mac.d_a2, sp.card_x2);
            break;
        case OptimizerConfig::StateParam::basis_states:
            sp.card_x1 = resolved(cfg.card_x1, mac.d_a1, cfg.cardinality_cap);
            sp.card_x2 = resolved(cfg.card_x2, mac.d_a2, cfg.cardinality_cap);
            sp.theta = basis_table(mac.d_a1, sp.card_x1);
            sp.zeta = basis_table(mac.d_a2, sp.card_x2);
            break;
        }
        sp.instr_angles = kind == RegionKind::df_caus;
    }

    sp.card_u = resolved(cfg.card_u, d_b * d_b + 2, cfg.cardinality_cap);
    if (kind == RegionKind::pdf_sc) sp.card_v = resolved(cfg.card_v, 2, cfg.cardinality_cap);
    if (kind == RegionKind::cq_noiseless_caus) sp.card_u = 1;

    // distribution blocks in a fixed order: p_U (or joint p_UV), then the
    // rows of p_X1_given, then the rows of p_X2_given
    std::size_t cond = sp.card_v > 0 ? sp.card_u * sp.card_v : sp.card_u;
    sp.simplex_sizes.push_back(cond); // p_u / p_uv (size 1 blocks kept for shape uniformity)
    for (std::size_t r = 0; r < cond; ++r) sp.simplex_sizes.push_back(sp.card_x1);
    std::size_t x2_rows = cond;
    if (kind == RegionKind::pdf_sc) x2_rows = sp.card_u; // X2 is steered by U alone
    if (kind == RegionKind::df_caus) x2_rows = sp.d_e * sp.card_u;
    if (kind == RegionKind::cq_noiseless_caus) x2_rows = sp.card_x1;
    for (std::size_t r = 0; r < x2_rows; ++r) sp.simplex_sizes.push_back(sp.card_x2);

    if (sp.theta_angles) sp.n_angles += 2 * sp.card_x1;
    if (sp.zeta_angles) sp.n_angles += 2 * sp.card_x2;
    if (sp.instr_angles) sp.n_angles += sp.d_e * sp.d_e - 1;
    return sp;
}

struct Params {
    std::vector<std::vector<double>> simplices;
    std::vector<double> angles;
};

EnsembleSpec to_ensemble(const SearchSpace& sp, const Params& p) {
    EnsembleSpec ens;
    ens.card_u = sp.card_u;
    ens.card_v = sp.card_v;
    ens.card_x1 = sp.card_x1;
    ens.card_x2 = sp.card_x2;
    ens.p_u = p.simplices[0];

    std::size_t cond = sp.card_v > 0 ? sp.card_u * sp.card_v : sp.card_u;
    ens.p_x1_given = RealMatrix(static_cast<Eigen::Index>(cond),
                                static_cast<Eigen::Index>(sp.card_x1));
    for (std::size_t r = 0; r < cond; ++r)
        for (std::size_t x = 0; x < sp.card_x1; ++x)
            ens.p_x1_given(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(x)) =
                p.simplices[1 + r][x];

    std::size_t x2_rows = p.simplices.size() - 1 - cond;
    ens.p_x2_given = RealMatrix(static_cast<Eigen::Index>(x2_rows),
                                static_cast<Eigen::Index>(sp.card_x2));
    for (std::size_t r = 0; r < x2_rows; ++r)
        for (std::size_t x = 0; x < sp.card_x2; ++x)
            ens.p_x2_given(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(x)) =
                p.simplices[1 + cond + r][x];

    std::size_t a = 0;
    if (sp.theta_angles) {
        for (std::size_t x = 0; x < sp.card_x1; ++x) {
            ens.theta.push_back(pure_qubit(p.angles[a], p.angles[a + 1]));
            a += 2;
        }
    } else {
        ens.theta = sp.theta;
    }
    if (sp.zeta_angles) {
        for (std::size_t x = 0; x < sp.card_x2; ++x) {
            ens.zeta.push_back(pure_qubit(p.angles[a], p.angles[a + 1]));
            a += 2;
        }
    } else {
        ens.zeta = sp.zeta;
    }
    if (sp.instr_angles) {
        std::vector<double> ia(p.angles.begin() + static_cast<std::ptrdiff_t>(a),
                               p.angles.end());
        ens.instrument = projective_from_angles(sp.d_e, ia);
    }
    return ens;
}

struct Eval {
    double objective;
    double r1, r2;
    RateBounds bounds;
};

Eval evaluate(const SearchSpace& sp, const Params& p, double lambda) {
    EnsembleSpec ens = to_ensemble(sp, p);
    RateBounds b = eval_region(sp.kind, *sp.channel, ens);
    auto [r1, r2] = lambda_corner(b, lambda);
    return {lambda * r1 + (1.0 - lambda) * r2, r1, r2, b};
}

// Nelder-Mead over the angle vector; simplices held fixed.
double nelder_mead_angles(const SearchSpace& sp, Params& p, double lambda, double current,
                          std::size_t budget) {
    std::size_t n = p.angles.size();
    if (n == 0) return current;
    using Point = std::pair<double, std::vector<double>>; // (-objective, angles)
    auto score = [&](const std::vector<double>& a) {
        Params q = p;
        q.angles = a;
        return -evaluate(sp, q, lambda).objective;
    };
    std::vector<Point> simplex;
    simplex.push_back({-current, p.angles});
    for (std::size_t i = 0; i < n; ++i) {
        auto a = p.angles;
        a[i] += 0.35;
        simplex.push_back({score(a), a});
    }
    std::size_t evals = n;
    auto centroid = [&](std::size_t skip) {
        std::vector<double> c(n, 0.0);
        for (std::size_t i = 0; i < simplex.size(); ++i) {
            if (i == skip) continue;
            for (std::size_t k = 0; k < n; ++k) c[k] += simplex[i].second[k];
        }
        for (auto& x : c) x /= static_cast<double>(n);
        return c;
    };
    while (evals < budget) {
        std::sort(simplex.begin(), simplex.end(),
                  [](const Point& a, const Point& b) { return a.first < b.first; });
        std::size_t worst = n;
        auto c = centroid(worst);
        auto mix = [&](double t) {
            std::vector<double> out(n);
            for (std::size_t k = 0; k < n; ++k)
                out[k] = c[k] + t * (simplex[worst].second[k] - c[k]);
            return out;
        };
        auto refl = mix(-1.0);
        double fr = score(refl);
        ++evals;
        if (fr < simplex[0].first) {
            auto exp_pt = mix(-2.0);
            double fe = score(exp_pt);
            ++evals;
            simplex[worst] = fe < fr ? Point{fe, exp_pt} : Point{fr, refl};
        } else if (fr < simplex[worst - 1].first) {
            simplex[worst] = {fr, refl};
        } else {
            auto con = mix(0.5);
            double fc = score(con);
            ++evals;
            if (fc < simplex[worst].first) {
                simplex[worst] = {fc, con};
            } else {
                for (std::size_t i = 1; i <= n; ++i) {
                    for (std::size_t k = 0; k < n; ++k)
                        simplex[i].second[k] =
                            0.5 * (simplex[i].second[k] + simplex[0].second[k]);
                    simplex[i].first = score(simplex[i].second);
                    ++evals;
                }
            }
        }
    }
    std::sort(simplex.begin(), simplex.end(),
              [](const Point& a, const Point& b) { return a.first < b.first; });
    if (-simplex[0].first > current) {
        p.angles = simplex[0].second;
        return -simplex[0].first;
    }
    return current;
}

// One projected-gradient sweep over a single simplex block with backtracking.
double ascend_block(const SearchSpace& sp, Params& p, double lambda, std::size_t block,
                    double current) {
    auto& x = p.simplices[block];
    if (x.size() < 2) return current;
    const double eps = 1e-6;
    std::vector<double> grad(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        Params q = p;
        q.simplices[block][i] += eps;
        // renormalize the probe so it stays a distribution
        double s = 1.0 + eps;
        for (auto& v : q.simplices[block]) v /= s;
        grad[i] = (evaluate(sp, q, lambda).objective - current) / eps;
    }
    double step = 0.5;
    for (int bt = 0; bt < 14; ++bt) {
        Params q = p;
        for (std::size_t i = 0; i < x.size(); ++i) q.simplices[block][i] = x[i] + step * grad[i];
        project_simplex(q.simplices[block]);
        double obj = evaluate(sp, q, lambda).objective;
        if (obj > current + 1e-15) {
            p = std::move(q);
            return obj;
        }
        step *= 0.5;
    }
    return current;
}

} // namespace

std::pair<double, double> lambda_corner(const RateBounds& b, double lambda) {
    if (lambda >= 0.5) {
        double r1 = std::min(b.b1, b.b12);
        double r2 = std::min(b.b2, b.b12 - r1);
        return {r1, std::max(r2, 0.0)};
    }
    double r2 = std::min(b.b2, b.b12);
    double r1 = std::min(b.b1, b.b12 - r2);
    return {std::max(r1, 0.0), r2};
}

ParetoPoint maximize_weighted_rate(RegionKind kind, const Channel& channel, double lambda,
                                   const OptimizerConfig& cfg) {
    if (lambda < 0.0 || lambda > 1.0)
        throw Error::validation("config error: lambda must be in [0, 1]");
    if (cfg.restarts < 1) throw Error::validation("config error: restarts must be >= 1");
    SearchSpace sp = make_space(kind, channel, cfg);

    double best_obj = -1.0;
    Params best_params;
    Eval best_eval{0, 0, 0, {}};

    for (std::size_t restart = 0; restart < cfg.restarts; ++restart) {
        SplitMix64 rng = SplitMix64::stream(cfg.seed, restart);
        Params p;
        // Odd restarts start the conditional rows at random vertices. The
        // ascent rarely reaches deterministic configurations (e.g. an
        // auxiliary that copies an input letter) from an interior start, so
        // half the starts are placed on them directly.
        bool vertex_start = restart % 2 == 1;
        for (std::size_t b = 0; b < sp.simplex_sizes.size(); ++b) {
            std::size_t sz = sp.simplex_sizes[b];
            if (vertex_start && b > 0) {
                std::vector<double> row(sz, 0.0);
                row[rng.uniform_int(sz)] = 1.0;
                p.simplices.push_back(std::move(row));
            } else {
                p.simplices.push_back(rng.dirichlet(sz));
            }
        }
        for (std::size_t i = 0; i < sp.n_angles; ++i)
            p.angles.push_back(rng.uniform() * kTwoPi);

        double obj = evaluate(sp, p, lambda).objective;
        for (std::size_t iter = 0; iter < cfg.max_iters; ++iter) {
            double before = obj;
            for (std::size_t b = 0; b < p.simplices.size(); ++b)
                obj = ascend_block(sp, p, lambda, b, obj);
            if (!p.angles.empty())
                obj = nelder_mead_angles(sp, p, lambda, obj, 25 * p.angles.size());
            if (obj - before < cfg.tol) break;
        }
        // strict comparison keeps the earliest restart on ties
        if (obj > best_obj) {
            best_obj = obj;
            best_params = p;
        }
    }

    best_eval = evaluate(sp, best_params, lambda);
    ParetoPoint point;
    point.lambda = lambda;
    point.objective = best_eval.objective;
    point.r1 = best_eval.r1;
    point.r2 = best_eval.r2;
    point.bounds = best_eval.bounds;
    point.ensemble = to_ensemble(sp, best_params);

    // re-validate: the reported pair must lie in its own region
    RateBounds check = eval_region(kind, channel, point.ensemble);
    if (!in_region(check, point.r1, point.r2))
        throw Error::internal("optimizer returned a point outside its region");
    return point;
}

std::vector<ParetoPoint> pareto_frontier(RegionKind kind, const Channel& channel,
                                         const std::vector<double>& lambdas,
                                         const OptimizerConfig& cfg) {
    std::vector<ParetoPoint> points;
    for (double lam : lambdas) points.push_back(maximize_weighted_rate(kind, channel, lam, cfg));
    std::sort(points.begin(), points.end(), [](const ParetoPoint& a, const ParetoPoint& b) {
        if (a.r1 != b.r1) return a.r1 < b.r1;
        return a.r2 > b.r2;
    });
    std::vector<ParetoPoint> kept;
    for (const auto& p : points) {
        bool dominated = false;
        for (const auto& q : points)
            if ((q.r1 > p.r1 && q.r2 >= p.r2) || (q.r1 >= p.r1 && q.r2 > p.r2)) {
                dominated = true;
                break;
            }
        if (!dominated) {
            if (!kept.empty() && kept.back().r1 == p.r1 && kept.back().r2 == p.r2) continue;
            kept.push_back(p);
        }
    }
    return kept;
}

} // namespace qmac
