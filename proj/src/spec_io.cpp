#include "qmac/spec_io.hpp"

#include <charconv>
#include <fstream>

namespace qmac {

using nlohmann::json;

namespace {

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error::validation("cannot open file: " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error::validation(path + ": " + e.what());
    }
}

const json& need(const json& j, const std::string& key) {
    auto it = j.find(key);
    if (it == j.end()) throw Error::validation("missing key '" + key + "'");
    return *it;
}

std::size_t need_size(const json& j, const std::string& key) {
    const json& v = need(j, key);
    if (!v.is_number_integer() || v.get<std::int64_t>() <= 0)
        throw Error::validation("key '" + key + "' must be a positive integer");
    return v.get<std::size_t>();
}

double need_double(const json& j, const std::string& key) {
    const json& v = need(j, key);
    if (!v.is_number()) throw Error::validation("key '" + key + "' must be a number");
    return v.get<double>();
}

std::vector<double> real_vector(const json& j, const std::string& key) {
    if (!j.is_array()) throw Error::validation("key '" + key + "' must be an array");
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& v : j) {
        if (!v.is_number()) throw Error::validation("key '" + key + "' must hold numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

RealMatrix real_matrix(const json& j, const std::string& key) {
    if (!j.is_array() || j.empty())
        throw Error::validation("key '" + key + "' must be a non-empty array of rows");
    std::vector<std::vector<double>> rows;
    for (const auto& r : j) rows.push_back(real_vector(r, key));
    for (const auto& r : rows)
        if (r.size() != rows.front().size())
            throw Error::validation("key '" + key + "' has ragged rows");
    RealMatrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t c = 0; c < rows[i].size(); ++c)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
    return m;
}

std::vector<Matrix> matrix_list(const json& j, const std::string& key) {
    if (!j.is_array() || j.empty())
        throw Error::validation("key '" + key + "' must be a non-empty array of matrices");
    std::vector<Matrix> out;
    out.reserve(j.size());
    for (const auto& m : j) out.push_back(matrix_from_json(m, key));
    return out;
}

std::vector<DensityOperator> state_list(const json& j, const std::string& key) {
    std::vector<DensityOperator> out;
    try {
        for (auto& m : matrix_list(j, key)) out.push_back(DensityOperator(std::move(m)));
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::validation) throw;
        throw Error::validation("key '" + key + "': " + e.what());
    }
    return out;
}

CribbingMac parse_kraus_channel(const json& j) {
    std::size_t d_a1 = need_size(j, "d_a1");
    std::size_t d_a1p = need_size(j, "d_a1p");
    std::size_t d_e = need_size(j, "d_e");
    std::size_t d_a2 = need_size(j, "d_a2");
    std::size_t d_b = need_size(j, "d_b");
    try {
        KrausChannel l(d_a1, d_a1p * d_e, matrix_list(need(j, "L"), "L"));
        KrausChannel n(d_a1p * d_a2, d_b, matrix_list(need(j, "N"), "N"));
        return CribbingMac(d_a1, d_a1p, d_e, d_a2, d_b, std::move(l), std::move(n));
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::validation) throw;
        throw Error::validation(std::string("channel spec: ") + e.what());
    }
}

CqMacSpec parse_cq_table(const json& j) {
    CqMacSpec spec;
    spec.card_x1 = need_size(j, "card_x1");
    spec.card_x2 = need_size(j, "card_x2");
    spec.d_b = need_size(j, "d_b");
    const json& table = need(j, "table");
    if (!table.is_array() || table.size() != spec.card_x1 * spec.card_x2)
        throw Error::validation("key 'table' must hold card_x1 * card_x2 states (x1-major)");
    spec.table = state_list(table, "table");

    const json& crib = need(j, "cribbing");
    if (crib.is_string()) {
        std::string s = crib.get<std::string>();
        if (s == "noiseless")
            spec.cribbing = CqMacSpec::Cribbing::noiseless;
        else if (s == "none")
            spec.cribbing = CqMacSpec::Cribbing::none;
        else
            throw Error::validation("key 'cribbing' must be \"noiseless\", \"none\" or {\"Q\": ...}");
    } else if (crib.is_object()) {
        spec.cribbing = CqMacSpec::Cribbing::noisy;
        spec.q = real_matrix(need(crib, "Q"), "Q");
    } else {
        throw Error::validation("key 'cribbing' must be \"noiseless\", \"none\" or {\"Q\": ...}");
    }
    try {
        spec.validate();
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::validation) throw;
        throw Error::validation(std::string("channel spec: ") + e.what());
    }
    return spec;
}

BosonicParams parse_bosonic(const json& j) {
    BosonicParams p;
    p.eta1 = need_double(j, "eta1");
    p.eta2 = need_double(j, "eta2");
    p.n_a1 = need_double(j, "n_a1");
    p.n_a2 = need_double(j, "n_a2");
    p.n_c = need_double(j, "n_c");
    p.validate();
    return p;
}

} // namespace

Matrix matrix_from_json(const json& j, const std::string& key) {
    if (!j.is_array() || j.empty())
        throw Error::validation("key '" + key + "' must be a non-empty matrix");
    std::size_t rows = j.size();
    std::size_t cols = 0;
    Matrix m;
    for (std::size_t r = 0; r < rows; ++r) {
        const json& row = j[r];
        if (!row.is_array() || row.empty())
            throw Error::validation("key '" + key + "' rows must be non-empty arrays");
        if (r == 0) {
            cols = row.size();
            m = Matrix::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        } else if (row.size() != cols) {
            throw Error::validation("key '" + key + "' has ragged rows");
        }
        for (std::size_t c = 0; c < cols; ++c) {
            const json& cell = row[c];
            if (!cell.is_array() || cell.size() != 2 || !cell[0].is_number() ||
                !cell[1].is_number())
                throw Error::validation("key '" + key + "' entries must be [re, im] pairs");
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                Complex(cell[0].get<double>(), cell[1].get<double>());
        }
    }
    return m;
}

nlohmann::json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            row.push_back({m(r, c).real(), m(r, c).imag()});
        rows.push_back(std::move(row));
    }
    return rows;
}

LoadedChannel parse_channel_json(const json& j) {
    if (!j.is_object()) throw Error::validation("channel spec must be a JSON object");
    std::string kind = need(j, "kind").is_string()
                           ? need(j, "kind").get<std::string>()
                           : throw Error::validation("key 'kind' must be a string");
    LoadedChannel out;
    if (kind == "kraus")
        out.channel = parse_kraus_channel(j);
    else if (kind == "cq_table")
        out.channel = parse_cq_table(j);
    else if (kind == "bosonic")
        out.bosonic = parse_bosonic(j);
    else
        throw Error::validation("key 'kind' must be \"kraus\", \"cq_table\" or \"bosonic\"");
    return out;
}

LoadedChannel load_channel_file(const std::string& path) {
    return parse_channel_json(load_json(path));
}

EnsembleSpec parse_ensemble_json(const json& j) {
    if (!j.is_object()) throw Error::validation("ensemble must be a JSON object");
    EnsembleSpec ens;
    ens.card_u = need_size(j, "card_u");
    ens.card_x1 = need_size(j, "card_x1");
    ens.card_x2 = need_size(j, "card_x2");
    if (j.contains("card_v")) {
        const json& v = j["card_v"];
        if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
            throw Error::validation("key 'card_v' must be a nonnegative integer");
        ens.card_v = v.get<std::size_t>();
    }
    ens.p_u = real_vector(need(j, "p_u"), "p_u");
    ens.p_x1_given = real_matrix(need(j, "p_x1_given"), "p_x1_given");
    ens.p_x2_given = real_matrix(need(j, "p_x2_given"), "p_x2_given");
    if (j.contains("theta")) ens.theta = state_list(j["theta"], "theta");
    if (j.contains("zeta")) ens.zeta = state_list(j["zeta"], "zeta");
    if (j.contains("instrument")) {
        auto ops = matrix_list(j["instrument"], "instrument");
        std::vector<Instrument::Outcome> outcomes;
        outcomes.reserve(ops.size());
        for (std::size_t z = 0; z < ops.size(); ++z)
            outcomes.push_back({static_cast<int>(z), std::move(ops[z])});
        std::size_t dim = static_cast<std::size_t>(outcomes.front().op.cols());
        try {
            ens.instrument = Instrument(dim, std::move(outcomes));
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::validation) throw;
            throw Error::validation("key 'instrument': " + std::string(e.what()));
        }
    }
    try {
        ens.validate_distributions();
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::validation) throw;
        throw Error::validation(std::string("ensemble: ") + e.what());
    }
    return ens;
}

EnsembleSpec load_ensemble_file(const std::string& path) {
    return parse_ensemble_json(load_json(path));
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

nlohmann::json bounds_to_json(const RateBounds& b) {
    json out = {{"b1", b.b1}, {"b2", b.b2}, {"b12", b.b12}};
    if (b.b0_sum) out["b0_sum"] = *b.b0_sum;
    return out;
}

nlohmann::json ensemble_to_json(const EnsembleSpec& ens) {
    json out;
    out["card_u"] = ens.card_u;
    if (ens.card_v > 0) out["card_v"] = ens.card_v;
    out["card_x1"] = ens.card_x1;
    out["card_x2"] = ens.card_x2;
    out["p_u"] = ens.p_u;
    auto real_rows = [](const RealMatrix& m) {
        json rows = json::array();
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            json row = json::array();
            for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
            rows.push_back(std::move(row));
        }
        return rows;
    };
    out["p_x1_given"] = real_rows(ens.p_x1_given);
    out["p_x2_given"] = real_rows(ens.p_x2_given);
    if (!ens.theta.empty()) {
        json t = json::array();
        for (const auto& s : ens.theta) t.push_back(matrix_to_json(s.matrix()));
        out["theta"] = std::move(t);
    }
    if (!ens.zeta.empty()) {
        json z = json::array();
        for (const auto& s : ens.zeta) z.push_back(matrix_to_json(s.matrix()));
        out["zeta"] = std::move(z);
    }
    if (ens.instrument) {
        json w = json::array();
        for (const auto& o : ens.instrument->outcomes()) w.push_back(matrix_to_json(o.op));
        out["instrument"] = std::move(w);
    }
    return out;
}

nlohmann::json sim_report_to_json(const SimReport& rep, bool include_timing) {
    json out;
    out["config"] = {{"n", rep.config.n},
                     {"blocks", rep.config.blocks},
                     {"trials", rep.config.trials},
                     {"seed", rep.config.seed},
                     {"delta", rep.config.delta},
                     {"decoder", decoder_kind_name(rep.config.decoder)}};
    out["rates"] = {{"r0", rep.rates.r0}, {"r1", rep.rates.r1}, {"r2", rep.rates.r2}};
    out["empirical_error"] = rep.empirical_error;
    out["per_block_errors"] = rep.per_block_errors;
    if (include_timing) out["wall_time_ms"] = rep.wall_time_ms;
    return out;
}

nlohmann::json manifest_to_json(const RunManifest& m) {
    return json{{"command", m.command},
                {"inputs", m.inputs},
                {"parameters", m.parameters},
                {"seed", m.seed},
                {"tool_version", m.tool_version},
                {"outputs", m.outputs}};
}

std::string manifest_comment(const RunManifest& m) {
    return "# manifest " + manifest_to_json(m).dump();
}

} // namespace qmac
