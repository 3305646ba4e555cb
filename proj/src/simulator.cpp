#include "qmac/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace qmac {

namespace {

constexpr double kSupportCutoff = 1e-12;
constexpr double kCompletenessTol = 1e-8;

// advance an index string over alphabet d; false once exhausted
bool odometer(std::vector<std::size_t>& s, std::size_t d) {
    for (std::size_t i = s.size(); i-- > 0;) {
        if (++s[i] < d) return true;
        s[i] = 0;
    }
    return false;
}

std::size_t checked_pow(std::size_t base, std::size_t exp, const char* what) {
    std::size_t out = 1;
    for (std::size_t i = 0; i < exp; ++i) {
        if (out > dim_cap() / base) throw Error::cap(what);
        out *= base;
    }
    return out;
}

bool counts_typical(const std::vector<std::size_t>& counts, std::size_t n,
                    const std::vector<double>& p, double delta) {
    for (std::size_t a = 0; a < p.size(); ++a) {
        if (p[a] < 1e-15) {
            if (counts[a] > 0) return false;
        } else if (std::abs(static_cast<double>(counts[a]) / n - p[a]) > delta * p[a] + 1e-12) {
            return false;
        }
    }
    return true;
}

std::vector<double> clamped_spectrum(const Eigen::VectorXd& vals) {
    std::vector<double> p(vals.size());
    for (Eigen::Index i = 0; i < vals.size(); ++i) p[i] = std::max(vals[i], 0.0);
    return p;
}

// Degenerate eigenvalues are merged into classes so the typical subspace is
// basis-independent: class probability = multiplicity * eigenvalue, and the
// frequency test runs on class counts.
struct EigenClasses {
    std::vector<std::size_t> class_of; // per eigenvector index
    std::vector<double> class_p;       // per class
};

EigenClasses classify(const std::vector<double>& p) {
    EigenClasses out;
    out.class_of.resize(p.size());
    std::vector<double> values; // representative eigenvalue per class
    for (std::size_t i = 0; i < p.size(); ++i) {
        std::size_t c = values.size();
        for (std::size_t k = 0; k < values.size(); ++k)
            if (std::abs(values[k] - p[i]) <= 1e-12) {
                c = k;
                break;
            }
        if (c == values.size()) {
            values.push_back(p[i]);
            out.class_p.push_back(0.0);
        }
        out.class_of[i] = c;
        out.class_p[c] += p[i];
    }
    return out;
}

bool string_typical(const std::vector<std::size_t>& s, const std::vector<double>& p,
                    const EigenClasses& cls, double delta, std::vector<std::size_t>& scratch) {
    (void)p;
    scratch.assign(cls.class_p.size(), 0);
    for (std::size_t v : s) ++scratch[cls.class_of[v]];
    return counts_typical(scratch, s.size(), cls.class_p, delta);
}

// exhaustive scan over eigenvalue-index strings of one spectrum
struct SpectrumScan {
    double mass = 0.0;
    std::size_t rank = 0;
    double min_eig = 1.0, max_eig = 0.0; // over typical strings
};

SpectrumScan scan_spectrum(const std::vector<double>& p, std::size_t n, double delta) {
    checked_pow(p.size(), n, "dimension cap exceeded");
    SpectrumScan out;
    if (n == 0) { // empty group contributes a trivial factor
        out.mass = 1.0;
        out.rank = 1;
        out.min_eig = out.max_eig = 1.0;
        return out;
    }
    EigenClasses cls = classify(p);
    std::vector<std::size_t> s(n, 0);
    std::vector<std::size_t> scratch;
    do {
        if (!string_typical(s, p, cls, delta, scratch)) continue;
        double q = 1.0;
        for (std::size_t v : s) q *= p[v];
        out.mass += q;
        ++out.rank;
        out.min_eig = std::min(out.min_eig, q);
        out.max_eig = std::max(out.max_eig, q);
    } while (odometer(s, p.size()));
    if (out.rank == 0) out.min_eig = out.max_eig = 0.0;
    return out;
}

TypicalityReport report_from_scan(const SpectrumScan& scan, std::size_t n, double delta,
                                  double entropy) {
    TypicalityReport rep;
    rep.mass = scan.mass;
    rep.rank = scan.rank;
    rep.entropy = entropy;
    rep.min_eig = scan.min_eig;
    rep.max_eig = scan.max_eig;
    if (scan.rank > 0 && n > 0) {
        double c = 0.0;
        if (scan.min_eig > 0.0)
            c = std::max(c, (-std::log2(scan.min_eig) / n - entropy) / delta);
        if (scan.max_eig > 0.0)
            c = std::max(c, (entropy + std::log2(scan.max_eig) / n) / delta);
        c = std::max(c, (std::log2(static_cast<double>(scan.rank)) / n - entropy) / delta);
        rep.c = std::max(c, 0.0);
    }
    double lo = std::exp2(-static_cast<double>(n) * (entropy + rep.c * delta));
    double hi = std::exp2(-static_cast<double>(n) * (entropy - rep.c * delta));
    rep.sandwich_ok = scan.rank == 0 ||
                      (scan.min_eig >= lo * (1.0 - 1e-9) && scan.max_eig <= hi * (1.0 + 1e-9));
    rep.rank_ok = static_cast<double>(scan.rank) <=
                  std::exp2(static_cast<double>(n) * (entropy + rep.c * delta)) * (1.0 + 1e-9);
    return rep;
}

void require_delta(double delta) {
    if (!(delta > 0.0)) throw Error::validation("delta must be positive");
}

// probability table p(y | x1, x2) for channels with commuting diagonal outputs
struct DiagonalChannel {
    bool diagonal = false;
    std::vector<std::vector<double>> p; // [x1 * card_x2 + x2][y]
};

DiagonalChannel diagonalize(const CqMacSpec& spec) {
    DiagonalChannel out;
    out.diagonal = true;
    for (const auto& rho : spec.table) {
        const Matrix& m = rho.matrix();
        for (Eigen::Index i = 0; i < m.rows() && out.diagonal; ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j)
                if (i != j && std::abs(m(i, j)) > 1e-12) {
                    out.diagonal = false;
                    break;
                }
        if (!out.diagonal) return out;
        std::vector<double> row(spec.d_b);
        for (std::size_t y = 0; y < spec.d_b; ++y)
            row[y] = std::max(std::real(m(static_cast<Eigen::Index>(y),
                                          static_cast<Eigen::Index>(y))), 0.0);
        out.p.push_back(std::move(row));
    }
    return out;
}

DensityOperator word_state(const CqMacSpec& spec, const std::vector<std::size_t>& x1,
                           const std::vector<std::size_t>& x2) {
    Matrix acc = Matrix::Identity(1, 1);
    for (std::size_t i = 0; i < x1.size(); ++i)
        acc = kron(acc, spec.output(x1[i], x2[i]).matrix());
    return DensityOperator(std::move(acc));
}

std::vector<std::size_t> sample_word(SplitMix64& rng, const RealMatrix& rows,
                                     const std::vector<std::size_t>& cond) {
    std::vector<std::size_t> w(cond.size());
    for (std::size_t i = 0; i < cond.size(); ++i) {
        std::vector<double> p(rows.cols());
        for (Eigen::Index c = 0; c < rows.cols(); ++c)
            p[static_cast<std::size_t>(c)] = rows(static_cast<Eigen::Index>(cond[i]), c);
        w[i] = rng.sample(p);
    }
    return w;
}

std::uint64_t derived_seed(std::uint64_t seed, std::uint64_t tag) {
    return SplitMix64::stream(seed, tag).next();
}

// per-trial streams live below 2^32; codebook streams above
constexpr std::uint64_t kBookTag = 1ull << 32;

} // namespace

std::size_t message_count(double rate, std::size_t n) {
    if (rate < 0.0 || !std::isfinite(rate)) throw Error::validation("rates must be nonnegative");
    double m = std::ceil(std::exp2(rate * static_cast<double>(n)));
    if (!(m <= static_cast<double>(dim_cap()))) throw Error::cap("rate too large for desk scale");
    return static_cast<std::size_t>(m);
}

Codebook generate_codebooks(const EnsembleSpec& ens, std::size_t n, const Rates& rates,
                            std::uint64_t seed) {
    if (ens.card_v != 0 || ens.instrument.has_value())
        throw Error::validation("codebooks take a plain (U, X1, X2) ensemble");
    ens.validate_distributions();
    if (static_cast<std::size_t>(ens.p_x2_given.rows()) != ens.card_u)
        throw Error::validation("p_X2_given must be conditioned on U");
    if (n == 0) throw Error::validation("blocklength must be positive");

    Codebook book;
    book.n = n;
    book.rates = rates;
    std::size_t m0c = message_count(rates.r0, n);
    std::size_t m1c = message_count(rates.r1, n);
    std::size_t m2c = message_count(rates.r2, n);
    // each codebook stays within the desk-scale budget
    if (m0c > dim_cap() / m1c || m0c > dim_cap() / m2c)
        throw Error::cap("rate too large for desk scale");

    SplitMix64 rng(seed);
    book.u_words.reserve(m0c);
    for (std::size_t m0 = 0; m0 < m0c; ++m0) {
        std::vector<std::size_t> u(n);
        for (std::size_t i = 0; i < n; ++i) u[i] = rng.sample(ens.p_u);
        book.u_words.push_back(std::move(u));
    }
    book.x1_words.resize(m0c);
    for (std::size_t m0 = 0; m0 < m0c; ++m0)
        for (std::size_t m1 = 0; m1 < m1c; ++m1)
            book.x1_words[m0].push_back(sample_word(rng, ens.p_x1_given, book.u_words[m0]));
    book.x2_words.resize(m0c);
    for (std::size_t m0 = 0; m0 < m0c; ++m0)
        for (std::size_t m2 = 0; m2 < m2c; ++m2)
            book.x2_words[m0].push_back(sample_word(rng, ens.p_x2_given, book.u_words[m0]));
    return book;
}

PgmDecoder build_pgm_raw(const std::vector<std::size_t>& labels,
                         const std::vector<Matrix>& detection_ops) {
    if (detection_ops.empty()) throw Error::validation("no candidates");
    if (labels.size() != detection_ops.size())
        throw Error::validation("label/operator count mismatch");
    const auto dim = detection_ops.front().rows();
    for (const auto& op : detection_ops)
        if (op.rows() != dim || op.cols() != dim)
            throw Error::validation("candidate dimension mismatch");

    Matrix s = Matrix::Zero(dim, dim);
    for (const auto& op : detection_ops) s += op;
    HermEig es = herm_eig(s);
    Eigen::VectorXd inv_sqrt(dim), supp(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        bool on = es.values[i] > kSupportCutoff;
        inv_sqrt[i] = on ? 1.0 / std::sqrt(es.values[i]) : 0.0;
        supp[i] = on ? 1.0 : 0.0;
    }
    Matrix root = es.vectors * inv_sqrt.asDiagonal() * es.vectors.adjoint();
    Matrix complement = Matrix::Identity(dim, dim) -
                        es.vectors * supp.asDiagonal() * es.vectors.adjoint();
    complement /= static_cast<double>(detection_ops.size());

    PgmDecoder dec;
    dec.dim = static_cast<std::size_t>(dim);
    dec.labels = labels;
    dec.povm.reserve(detection_ops.size());
    Matrix total = Matrix::Zero(dim, dim);
    for (const auto& op : detection_ops) {
        Matrix lam = root * op * root + complement;
        total += lam;
        dec.povm.push_back(std::move(lam));
    }
    if ((total - Matrix::Identity(dim, dim)).cwiseAbs().maxCoeff() > kCompletenessTol)
        throw Error::internal("POVM inconsistency: completeness violated");
    return dec;
}

PgmDecoder build_pgm(const std::vector<std::pair<std::size_t, DensityOperator>>& candidates) {
    std::vector<std::size_t> labels;
    std::vector<Matrix> ops;
    labels.reserve(candidates.size());
    ops.reserve(candidates.size());
    for (const auto& [label, rho] : candidates) {
        labels.push_back(label);
        ops.push_back(rho.matrix());
    }
    return build_pgm_raw(labels, ops);
}

std::size_t measure(const PgmDecoder& decoder, const DensityOperator& rho, SplitMix64& rng) {
    if (rho.dim() != decoder.dim) throw Error::validation("dimension mismatch");
    std::vector<double> p(decoder.povm.size());
    double sum = 0.0;
    for (std::size_t c = 0; c < p.size(); ++c) {
        double v = std::real((decoder.povm[c] * rho.matrix()).trace());
        if (v < -kPsdTol) throw Error::internal("POVM inconsistency: negative probability");
        p[c] = std::max(v, 0.0);
        sum += p[c];
    }
    if (std::abs(sum - 1.0) > kCompletenessTol)
        throw Error::internal("POVM inconsistency: probabilities do not sum to 1");
    for (double& v : p) v /= sum;
    return decoder.labels[rng.sample(p)];
}

TypicalProjector typical_projector(const DensityOperator& rho, std::size_t n, double delta) {
    require_delta(delta);
    if (n == 0) throw Error::validation("blocklength must be positive");
    std::size_t d = rho.dim();
    std::size_t total = checked_pow(d, n, "dimension cap exceeded");

    HermEig es = herm_eig(rho.matrix());
    std::vector<double> p = clamped_spectrum(es.values);

    TypicalProjector out;
    out.projector = Matrix::Zero(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(total));
    EigenClasses cls = classify(p);
    std::vector<std::size_t> s(n, 0);
    std::vector<std::size_t> scratch;
    do {
        if (!string_typical(s, p, cls, delta, scratch)) continue;
        Matrix vec = Matrix::Identity(1, 1);
        for (std::size_t i = 0; i < n; ++i)
            vec = kron(vec, es.vectors.col(static_cast<Eigen::Index>(s[i])));
        out.projector += vec * vec.adjoint();
        double q = 1.0;
        for (std::size_t v : s) q *= p[v];
        out.trace_mass += q;
        ++out.rank;
    } while (odometer(s, d));
    return out;
}

TypicalityReport verify_typicality_bounds(const DensityOperator& rho, std::size_t n,
                                          double delta) {
    require_delta(delta);
    if (n == 0) throw Error::validation("blocklength must be positive");
    HermEig es = herm_eig(rho.matrix());
    std::vector<double> p = clamped_spectrum(es.values);
    return report_from_scan(scan_spectrum(p, n, delta), n, delta, shannon_entropy(p));
}

ConditionalTypicalityReport verify_conditional_typicality(
    const std::vector<double>& p_x, const std::vector<DensityOperator>& sigma,
    const std::vector<std::size_t>& xn, double delta) {
    require_delta(delta);
    if (p_x.size() != sigma.size() || sigma.empty())
        throw Error::validation("ensemble size mismatch");
    if (xn.empty()) throw Error::validation("blocklength must be positive");
    double psum = 0.0;
    for (double v : p_x) {
        if (v < -1e-12) throw Error::validation("negative probability in p_X");
        psum += v;
    }
    if (std::abs(psum - 1.0) > 1e-9) throw Error::validation("p_X does not sum to 1");
    std::size_t d = sigma.front().dim();
    for (const auto& s : sigma)
        if (s.dim() != d) throw Error::validation("ensemble dimension mismatch");
    for (std::size_t x : xn)
        if (x >= sigma.size()) throw Error::validation("sequence symbol out of range");

    std::size_t n = xn.size();
    std::vector<std::size_t> group_size(sigma.size(), 0);
    for (std::size_t x : xn) ++group_size[x];

    // the conditional projector factorizes over per-symbol position groups
    SpectrumScan combined;
    combined.mass = 1.0;
    combined.rank = 1;
    combined.min_eig = combined.max_eig = 1.0;
    for (std::size_t a = 0; a < sigma.size(); ++a) {
        if (group_size[a] == 0) continue;
        HermEig es = herm_eig(sigma[a].matrix());
        SpectrumScan part = scan_spectrum(clamped_spectrum(es.values), group_size[a], delta);
        combined.mass *= part.mass;
        combined.rank *= part.rank;
        combined.min_eig *= part.min_eig;
        combined.max_eig *= part.max_eig;
    }
    double cond_entropy = 0.0;
    for (std::size_t a = 0; a < sigma.size(); ++a)
        if (p_x[a] > 0.0) cond_entropy += p_x[a] * von_neumann_entropy(sigma[a]);

    ConditionalTypicalityReport rep;
    rep.conditional = report_from_scan(combined, n, delta, cond_entropy);

    // overlap of the average-state projector with the conditional state
    Matrix avg = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::size_t a = 0; a < sigma.size(); ++a) avg += p_x[a] * sigma[a].matrix();
    HermEig avg_es = herm_eig(avg);
    std::vector<double> q = clamped_spectrum(avg_es.values);
    // per-position overlaps of the conditional states with the average eigenbasis
    std::vector<std::vector<double>> overlap(sigma.size(), std::vector<double>(d));
    for (std::size_t a = 0; a < sigma.size(); ++a)
        for (std::size_t y = 0; y < d; ++y) {
            Vector w = avg_es.vectors.col(static_cast<Eigen::Index>(y));
            overlap[a][y] = std::real((w.adjoint() * sigma[a].matrix() * w)(0, 0));
        }
    checked_pow(d, n, "dimension cap exceeded");
    EigenClasses avg_cls = classify(q);
    std::vector<std::size_t> s(n, 0);
    std::vector<std::size_t> scratch;
    do {
        if (!string_typical(s, q, avg_cls, delta, scratch)) continue;
        double w = 1.0;
        for (std::size_t i = 0; i < n; ++i) w *= overlap[xn[i]][s[i]];
        rep.unconditional_mass += w;
    } while (odometer(s, d));
    return rep;
}

DecoderKind parse_decoder_kind(const std::string& name) {
    if (name == "pgm_direct") return DecoderKind::pgm_direct;
    if (name == "pgm_projected") return DecoderKind::pgm_projected;
    throw Error::validation("unknown decoder: " + name);
}

const char* decoder_kind_name(DecoderKind kind) {
    return kind == DecoderKind::pgm_direct ? "pgm_direct" : "pgm_projected";
}

namespace {

void check_sim_inputs(const CqMacSpec& spec, const EnsembleSpec& ens, const SimConfig& cfg) {
    spec.validate();
    if (ens.card_x1 != spec.card_x1 || ens.card_x2 != spec.card_x2)
        throw Error::validation("ensemble does not match the channel alphabets");
    if (cfg.trials == 0) throw Error::validation("trials must be positive");
    if (cfg.n == 0) throw Error::validation("blocklength must be positive");
}

// weights q_c(y) = prod_i p(y_i | x1_i, x2_i); PGM on commuting diagonal
// states reduces to sampling c with probability q_c(y) / sum_c' q_c'(y)
std::size_t sample_diag_pgm(SplitMix64& rng, const std::vector<double>& weights) {
    double s = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (s <= 0.0) return rng.uniform_int(weights.size()); // off the support: uniform completion
    std::vector<double> p(weights);
    for (double& v : p) v /= s;
    return rng.sample(p);
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

} // namespace

SimReport simulate_df_noiseless(const CqMacSpec& spec, const EnsembleSpec& ens,
                                const Rates& rates, const SimConfig& cfg) {
    auto t0 = std::chrono::steady_clock::now();
    check_sim_inputs(spec, ens, cfg);
    if (spec.cribbing != CqMacSpec::Cribbing::noiseless)
        throw Error::validation("decode-forward simulation needs noiseless cribbing");
    if (cfg.blocks == 0) throw Error::validation("block count must be positive");

    std::size_t m1c = message_count(rates.r1, cfg.n);
    std::size_t m2c = message_count(rates.r2, cfg.n);
    if (m1c > dim_cap() / m2c) throw Error::cap("rate too large for desk scale");

    // m0 carries the previous fresh message of Alice 1, so R0 = R1
    Rates book_rates{rates.r1, rates.r1, rates.r2};
    std::vector<Codebook> books;
    books.reserve(cfg.blocks);
    for (std::size_t b = 0; b < cfg.blocks; ++b)
        books.push_back(generate_codebooks(ens, cfg.n, book_rates,
                                           derived_seed(cfg.seed, kBookTag + b)));

    DiagonalChannel diag = diagonalize(spec);
    if (!diag.diagonal) checked_pow(spec.d_b, cfg.n, "dimension cap exceeded");

    const std::size_t T = cfg.blocks;
    std::vector<std::size_t> block_errors(T, 0);
    std::size_t trial_errors = 0;

    for (std::size_t t = 0; t < cfg.trials; ++t) {
        SplitMix64 rng = SplitMix64::stream(cfg.seed, t);
        std::vector<std::size_t> m1(T + 1, 0), m2(T + 1, 0);
        for (std::size_t b = 1; b < T; ++b) m1[b] = rng.uniform_int(m1c);
        for (std::size_t b = 1; b <= T; ++b) m2[b] = rng.uniform_int(m2c);

        // forward pass: transmissions plus Alice 2's cribbing estimates
        bool crib_error = false;
        std::size_t a2_m0 = 0; // estimate of m1(b-1), correct at b = 1 by convention
        std::vector<std::vector<std::size_t>> received(T + 1); // diagonal path outputs
        std::vector<DensityOperator> received_state;           // dense path outputs
        if (!diag.diagonal) received_state.resize(T + 1, DensityOperator::basis_state(1, 0));
        for (std::size_t b = 1; b <= T; ++b) {
            const Codebook& book = books[b - 1];
            const auto& x1 = book.x1_words[m1[b - 1]][m1[b]];
            const auto& x2 = book.x2_words[a2_m0][m2[b]];
            if (diag.diagonal) {
                std::vector<std::size_t> y(cfg.n);
                for (std::size_t i = 0; i < cfg.n; ++i)
                    y[i] = rng.sample(diag.p[x1[i] * spec.card_x2 + x2[i]]);
                received[b] = std::move(y);
            } else {
                received_state[b] = word_state(spec, x1, x2);
            }
            if (b < T) {
                // exact lookup of the cribbed word in the believed codebook row
                std::size_t matches = 0, found = 0;
                for (std::size_t m = 0; m < m1c; ++m)
                    if (books[b - 1].x1_words[a2_m0][m] == x1) {
                        ++matches;
                        found = m;
                    }
                if (matches != 1) crib_error = true;
                a2_m0 = matches > 0 ? found : 0;
            }
        }

        // backward decoding, blocks T..1; m1(T) = 1 is fixed
        bool any_error = crib_error;
        std::size_t known_m1 = 0;
        for (std::size_t b = T; b >= 1; --b) {
            const Codebook& book = books[b - 1];
            std::size_t m0_count = (b == 1) ? 1 : m1c; // m1(0) = 1 is fixed
            std::size_t decoded_m0 = 0, decoded_m2 = 0;
            if (diag.diagonal) {
                std::vector<double> weights(m0_count * m2c);
                for (std::size_t m0 = 0; m0 < m0_count; ++m0) {
                    const auto& x1 = book.x1_words[m0][known_m1];
                    for (std::size_t m2i = 0; m2i < m2c; ++m2i) {
                        const auto& x2 = book.x2_words[m0][m2i];
                        double q = 1.0;
                        for (std::size_t i = 0; i < cfg.n; ++i)
                            q *= diag.p[x1[i] * spec.card_x2 + x2[i]][received[b][i]];
                        weights[m0 * m2c + m2i] = q;
                    }
                }
                std::size_t pick = sample_diag_pgm(rng, weights);
                decoded_m0 = pick / m2c;
                decoded_m2 = pick % m2c;
            } else {
                std::vector<std::pair<std::size_t, DensityOperator>> candidates;
                candidates.reserve(m0_count * m2c);
                for (std::size_t m0 = 0; m0 < m0_count; ++m0)
                    for (std::size_t m2i = 0; m2i < m2c; ++m2i)
                        candidates.emplace_back(
                            m0 * m2c + m2i,
                            word_state(spec, book.x1_words[m0][known_m1],
                                       book.x2_words[m0][m2i]));
                std::size_t pick = measure(build_pgm(candidates), received_state[b], rng);
                decoded_m0 = pick / m2c;
                decoded_m2 = pick % m2c;
            }
            bool block_bad = decoded_m0 != m1[b - 1] || decoded_m2 != m2[b];
            if (block_bad) {
                ++block_errors[b - 1];
                any_error = true;
            }
            known_m1 = decoded_m0;
        }
        if (any_error) ++trial_errors;
    }

    SimReport rep;
    rep.config = cfg;
    rep.rates = rates;
    rep.empirical_error = static_cast<double>(trial_errors) / cfg.trials;
    rep.per_block_errors.reserve(T);
    for (std::size_t b = 0; b < T; ++b)
        rep.per_block_errors.push_back(static_cast<double>(block_errors[b]) / cfg.trials);
    rep.wall_time_ms = elapsed_ms(t0);
    return rep;
}

namespace {

// Projector spanned by per-position eigenvector products whose eigenvalue
// substring is typical inside every group of positions sharing a symbol.
Matrix grouped_typical_projector(const std::vector<DensityOperator>& sigma,
                                 const std::vector<std::size_t>& seq, double delta) {
    std::size_t n = seq.size();
    std::size_t d = sigma.front().dim();
    std::size_t total = checked_pow(d, n, "dimension cap exceeded");

    std::vector<HermEig> eig;
    eig.reserve(sigma.size());
    std::vector<std::vector<double>> spec;
    std::vector<EigenClasses> cls;
    for (const auto& s : sigma) {
        eig.push_back(herm_eig(s.matrix()));
        spec.push_back(clamped_spectrum(eig.back().values));
        cls.push_back(classify(spec.back()));
    }
    std::vector<std::size_t> group_size(sigma.size(), 0);
    for (std::size_t x : seq) ++group_size[x];

    std::vector<Matrix> admitted;
    std::vector<std::size_t> s(n, 0);
    std::vector<std::vector<std::size_t>> counts(sigma.size());
    do {
        for (std::size_t a = 0; a < sigma.size(); ++a)
            counts[a].assign(cls[a].class_p.size(), 0);
        for (std::size_t i = 0; i < n; ++i) ++counts[seq[i]][cls[seq[i]].class_of[s[i]]];
        bool ok = true;
        for (std::size_t a = 0; a < sigma.size() && ok; ++a)
            if (group_size[a] > 0)
                ok = counts_typical(counts[a], group_size[a], cls[a].class_p, delta);
        if (!ok) continue;
        Matrix vec = Matrix::Identity(1, 1);
        for (std::size_t i = 0; i < n; ++i)
            vec = kron(vec, eig[seq[i]].vectors.col(static_cast<Eigen::Index>(s[i])));
        admitted.push_back(std::move(vec));
    } while (odometer(s, d));

    Matrix proj = Matrix::Zero(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(total));
    for (const auto& v : admitted) proj += v * v.adjoint();
    return proj;
}

} // namespace

SimReport simulate_packing_single_block(const CqMacSpec& spec, const EnsembleSpec& ens,
                                        const Rates& rates, const SimConfig& cfg) {
    auto t0 = std::chrono::steady_clock::now();
    check_sim_inputs(spec, ens, cfg);

    std::size_t m0c = message_count(rates.r0, cfg.n);
    std::size_t m1c = message_count(rates.r1, cfg.n);
    std::size_t m2c = message_count(rates.r2, cfg.n);
    if (m0c > dim_cap() / m1c || m0c * m1c > dim_cap() / m2c)
        throw Error::cap("rate too large for desk scale");

    Codebook book = generate_codebooks(ens, cfg.n, rates, derived_seed(cfg.seed, kBookTag));

    DiagonalChannel diag = diagonalize(spec);
    bool fast = diag.diagonal && cfg.decoder == DecoderKind::pgm_direct;

    PgmDecoder dec;
    if (!fast) {
        std::size_t total_dim = checked_pow(spec.d_b, cfg.n, "dimension cap exceeded");
        (void)total_dim;
        std::vector<std::size_t> labels;
        std::vector<Matrix> ops;
        // conditional-state tables for the projected detection operators
        std::vector<DensityOperator> sig_u, sig_ux1, sig_ux2;
        DensityOperator avg = DensityOperator::maximally_mixed(spec.d_b);
        if (cfg.decoder == DecoderKind::pgm_projected) {
            Matrix avg_m = Matrix::Zero(static_cast<Eigen::Index>(spec.d_b),
                                        static_cast<Eigen::Index>(spec.d_b));
            for (std::size_t u = 0; u < ens.card_u; ++u) {
                Matrix su = Matrix::Zero(avg_m.rows(), avg_m.cols());
                for (std::size_t x1 = 0; x1 < spec.card_x1; ++x1) {
                    Matrix sux1 = Matrix::Zero(avg_m.rows(), avg_m.cols());
                    for (std::size_t x2 = 0; x2 < spec.card_x2; ++x2)
                        sux1 += ens.p_x2_given(u, x2) * spec.output(x1, x2).matrix();
                    sig_ux1.push_back(DensityOperator(sux1));
                    su += ens.p_x1_given(u, x1) * sux1;
                }
                for (std::size_t x2 = 0; x2 < spec.card_x2; ++x2) {
                    Matrix sux2 = Matrix::Zero(avg_m.rows(), avg_m.cols());
                    for (std::size_t x1 = 0; x1 < spec.card_x1; ++x1)
                        sux2 += ens.p_x1_given(u, x1) * spec.output(x1, x2).matrix();
                    sig_ux2.push_back(DensityOperator(sux2));
                }
                sig_u.push_back(DensityOperator(su));
                avg_m += ens.p_u[u] * su;
            }
            avg = DensityOperator(avg_m);
        }
        Matrix pi;
        if (cfg.decoder == DecoderKind::pgm_projected)
            pi = typical_projector(avg, cfg.n, cfg.delta).projector;
        for (std::size_t m0 = 0; m0 < m0c; ++m0)
            for (std::size_t m1 = 0; m1 < m1c; ++m1)
                for (std::size_t m2 = 0; m2 < m2c; ++m2) {
                    labels.push_back((m0 * m1c + m1) * m2c + m2);
                    const auto& x1 = book.x1_words[m0][m1];
                    const auto& x2 = book.x2_words[m0][m2];
                    Matrix state = word_state(spec, x1, x2).matrix();
                    if (cfg.decoder == DecoderKind::pgm_direct) {
                        ops.push_back(std::move(state));
                        continue;
                    }
                    const auto& u = book.u_words[m0];
                    std::vector<std::size_t> ux1(cfg.n), ux2(cfg.n), ux12(cfg.n);
                    for (std::size_t i = 0; i < cfg.n; ++i) {
                        ux1[i] = u[i] * spec.card_x1 + x1[i];
                        ux2[i] = u[i] * spec.card_x2 + x2[i];
                        ux12[i] = x1[i] * spec.card_x2 + x2[i];
                    }
                    Matrix pi_u = grouped_typical_projector(sig_u, u, cfg.delta);
                    Matrix pi_u1 = grouped_typical_projector(sig_ux1, ux1, cfg.delta);
                    Matrix pi_u2 = grouped_typical_projector(sig_ux2, ux2, cfg.delta);
                    Matrix pi_u12 = grouped_typical_projector(spec.table, ux12, cfg.delta);
                    Matrix left = pi * pi_u * pi_u1 * pi_u2;
                    ops.push_back(left * pi_u12 * left.adjoint());
                }
        dec = build_pgm_raw(labels, ops);
    }

    std::size_t errors = 0;
    for (std::size_t t = 0; t < cfg.trials; ++t) {
        SplitMix64 rng = SplitMix64::stream(cfg.seed, t);
        std::size_t m0 = rng.uniform_int(m0c);
        std::size_t m1 = rng.uniform_int(m1c);
        std::size_t m2 = rng.uniform_int(m2c);
        const auto& x1 = book.x1_words[m0][m1];
        const auto& x2 = book.x2_words[m0][m2];
        std::size_t truth = (m0 * m1c + m1) * m2c + m2;
        std::size_t pick;
        if (fast) {
            std::vector<std::size_t> y(cfg.n);
            for (std::size_t i = 0; i < cfg.n; ++i)
                y[i] = rng.sample(diag.p[x1[i] * spec.card_x2 + x2[i]]);
            std::vector<double> weights(m0c * m1c * m2c);
            for (std::size_t c0 = 0; c0 < m0c; ++c0)
                for (std::size_t c1 = 0; c1 < m1c; ++c1)
                    for (std::size_t c2 = 0; c2 < m2c; ++c2) {
                        const auto& w1 = book.x1_words[c0][c1];
                        const auto& w2 = book.x2_words[c0][c2];
                        double q = 1.0;
                        for (std::size_t i = 0; i < cfg.n; ++i)
                            q *= diag.p[w1[i] * spec.card_x2 + w2[i]][y[i]];
                        weights[(c0 * m1c + c1) * m2c + c2] = q;
                    }
            pick = sample_diag_pgm(rng, weights);
        } else {
            pick = measure(dec, word_state(spec, x1, x2), rng);
        }
        if (pick != truth) ++errors;
    }

    SimReport rep;
    rep.config = cfg;
    rep.rates = rates;
    rep.empirical_error = static_cast<double>(errors) / cfg.trials;
    rep.per_block_errors = {rep.empirical_error};
    rep.wall_time_ms = elapsed_ms(t0);
    return rep;
}

} // namespace qmac
