// Command-line front end: evaluate/optimize rate regions, run the coding
// simulations, emit CSV/JSON artifacts.
#include "qmac/optimizer.hpp"
#include "qmac/spec_io.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace qmac;
using nlohmann::json;

namespace {

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw Error::validation("cannot write file: " + out_path);
    out << text;
    if (!text.empty() && text.back() != '\n') out << '\n';
}

RunManifest make_manifest(const std::string& command, std::vector<std::string> inputs,
                          const std::string& parameters, std::uint64_t seed,
                          const std::string& out_path) {
    RunManifest m;
    m.command = command;
    m.inputs = std::move(inputs);
    m.parameters = parameters;
    m.seed = seed;
    m.outputs = {out_path.empty() ? std::string("-") : out_path};
    return m;
}

Channel require_channel(const LoadedChannel& loaded, const char* cmd) {
    if (!loaded.channel)
        throw Error::validation(std::string("bosonic parameter sets have closed-form "
                                            "evaluators only; the '") +
                                cmd + "' command needs a kraus or cq_table channel");
    return *loaded.channel;
}

const CqMacSpec& require_cq(const Channel& channel, const char* what) {
    const auto* spec = std::get_if<CqMacSpec>(&channel);
    if (!spec) throw Error::validation(std::string(what) + " needs a cq_table channel");
    return *spec;
}

std::string csv_row(const std::vector<double>& vals) {
    std::string row;
    for (std::size_t i = 0; i < vals.size(); ++i) {
        if (i) row += ',';
        row += format_double(vals[i]);
    }
    return row;
}

int run(int argc, char** argv) {
    CLI::App app{"rate regions and coding simulations for quantum MACs with cribbing"};
    app.require_subcommand(1);

    // region-eval
    auto* eval = app.add_subcommand("region-eval", "evaluate a rate region for an ensemble");
    std::string ev_spec, ev_kind, ev_ens, ev_out;
    eval->add_option("spec", ev_spec, "channel spec file")->required();
    eval->add_option("kind", ev_kind, "region kind")->required();
    eval->add_option("ensemble", ev_ens, "ensemble file")->required();
    eval->add_option("-o,--output", ev_out, "output path (default stdout)");

    // bosonic
    auto* bos = app.add_subcommand("bosonic", "closed-form beam-splitter frontier sweep");
    BosonicParams bp{0.5, 0.5, 1.0, 1.0, 0.0};
    std::size_t sweep = 11;
    std::string bos_out;
    bos->add_option("--eta1", bp.eta1, "transmissivity of the cribbing split")->required();
    bos->add_option("--eta2", bp.eta2, "transmissivity toward the receiver")->required();
    bos->add_option("--na1", bp.n_a1, "mean photon number of Alice 1")->required();
    bos->add_option("--na2", bp.n_a2, "mean photon number of Alice 2")->required();
    bos->add_option("--nc", bp.n_c, "environment mean photon number")->required();
    bos->add_option("--sweep", sweep, "number of lambda samples in [0, 1]");
    bos->add_option("-o,--output", bos_out, "output path (default stdout)");

    // optimize
    auto* opt = app.add_subcommand("optimize", "maximize weighted rates over ensembles");
    std::string op_spec, op_kind, op_out, op_ens_out;
    std::vector<double> op_lambdas = {0.0, 0.25, 0.5, 0.75, 1.0};
    OptimizerConfig ocfg;
    std::size_t op_card_u = 0, op_card_v = 0;
    opt->add_option("spec", op_spec, "channel spec file")->required();
    opt->add_option("kind", op_kind, "region kind")->required();
    opt->add_option("--lambdas", op_lambdas, "weights for r1 vs r2")->delimiter(',');
    opt->add_option("--restarts", ocfg.restarts, "random restarts per lambda");
    opt->add_option("--iters", ocfg.max_iters, "ascent iterations per restart");
    opt->add_option("--seed", ocfg.seed, "PRNG seed");
    opt->add_option("--card-u", op_card_u, "auxiliary alphabet size override");
    opt->add_option("--card-v", op_card_v, "rate-split alphabet size override");
    opt->add_option("-o,--output", op_out, "frontier CSV path (default stdout)");
    opt->add_option("--ensembles", op_ens_out, "JSON path for the maximizing ensembles");

    // simulate
    auto* sim = app.add_subcommand("simulate", "Monte-Carlo of the coding schemes");
    std::string sm_spec, sm_ens, sm_out, sm_decoder = "pgm_direct", sm_scheme = "df";
    SimConfig scfg;
    Rates srates;
    sim->add_option("spec", sm_spec, "channel spec file")->required();
    sim->add_option("ensemble", sm_ens, "ensemble file")->required();
    sim->add_option("--n", scfg.n, "blocklength");
    sim->add_option("--blocks", scfg.blocks, "number of blocks (decode-forward)");
    sim->add_option("--trials", scfg.trials, "Monte-Carlo trials");
    sim->add_option("--seed", scfg.seed, "PRNG seed");
    sim->add_option("--delta", scfg.delta, "typicality parameter");
    sim->add_option("--decoder", sm_decoder, "pgm_direct or pgm_projected");
    sim->add_option("--r0", srates.r0, "common-message rate (packing only)");
    sim->add_option("--r1", srates.r1, "rate of Alice 1");
    sim->add_option("--r2", srates.r2, "rate of Alice 2");
    sim->add_option("--scheme", sm_scheme, "df (block-Markov) or packing (single block)");
    sim->add_option("-o,--output", sm_out, "output path (default stdout)");

    // check-robust
    auto* rob = app.add_subcommand("check-robust", "certify robust cribbing");
    std::string rb_spec, rb_extra, rb_out;
    double rb_tol = 1e-9;
    rob->add_option("spec", rb_spec, "channel spec file")->required();
    rob->add_option("--tol", rb_tol, "conditional-mutual-information tolerance");
    rob->add_option("--extra-inputs", rb_extra, "JSON file with joint input states");
    rob->add_option("-o,--output", rb_out, "output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e);
        return 0;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2; // command-line misuse is input validation
    }

    if (eval->parsed()) {
        auto kind = parse_region_kind(ev_kind);
        if (!kind) throw Error::validation("unknown region kind: " + ev_kind);
        Channel channel = require_channel(load_channel_file(ev_spec), "region-eval");
        EnsembleSpec ens = load_ensemble_file(ev_ens);
        RateBounds bounds = eval_region(*kind, channel, ens);
        json out = bounds_to_json(bounds);
        out["manifest"] =
            manifest_to_json(make_manifest("region-eval", {ev_spec, ev_ens}, ev_kind, 0, ev_out));
        emit(out.dump(2), ev_out);
        return 0;
    }

    if (bos->parsed()) {
        bp.validate();
        if (sweep == 0) throw Error::validation("sweep must be positive");
        RateBounds crib = bosonic_region(bp, true);
        RateBounds none = bosonic_region(bp, false);
        std::ostringstream params;
        params << "eta1=" << format_double(bp.eta1) << " eta2=" << format_double(bp.eta2)
               << " na1=" << format_double(bp.n_a1) << " na2=" << format_double(bp.n_a2)
               << " nc=" << format_double(bp.n_c) << " sweep=" << sweep;
        std::string text = manifest_comment(make_manifest("bosonic", {}, params.str(), 0, bos_out));
        text += "\nlambda,r1_crib,r2_crib,r1_none,r2_none\n";
        for (std::size_t i = 0; i < sweep; ++i) {
            double lambda = sweep == 1 ? 1.0 : static_cast<double>(i) / (sweep - 1);
            auto [r1c, r2c] = lambda_corner(crib, lambda);
            auto [r1n, r2n] = lambda_corner(none, lambda);
            text += csv_row({lambda, r1c, r2c, r1n, r2n});
            text += '\n';
        }
        emit(text, bos_out);
        return 0;
    }

    if (opt->parsed()) {
        auto kind = parse_region_kind(op_kind);
        if (!kind) throw Error::validation("unknown region kind: " + op_kind);
        Channel channel = require_channel(load_channel_file(op_spec), "optimize");
        if (op_card_u > 0) ocfg.card_u = op_card_u;
        if (op_card_v > 0) ocfg.card_v = op_card_v;
        auto points = pareto_frontier(*kind, channel, op_lambdas, ocfg);
        std::ostringstream params;
        params << op_kind << " restarts=" << ocfg.restarts << " iters=" << ocfg.max_iters;
        std::string text = manifest_comment(
            make_manifest("optimize", {op_spec}, params.str(), ocfg.seed, op_out));
        text += "\nlambda,r1,r2,objective\n";
        for (const auto& p : points) {
            text += csv_row({p.lambda, p.r1, p.r2, p.objective});
            text += '\n';
        }
        emit(text, op_out);
        if (!op_ens_out.empty()) {
            json ens_out = json::array();
            for (const auto& p : points) {
                json e = ensemble_to_json(p.ensemble);
                e["lambda"] = p.lambda;
                ens_out.push_back(std::move(e));
            }
            json wrapped;
            wrapped["ensembles"] = std::move(ens_out);
            wrapped["manifest"] = manifest_to_json(
                make_manifest("optimize", {op_spec}, params.str(), ocfg.seed, op_ens_out));
            emit(wrapped.dump(2), op_ens_out);
        }
        return 0;
    }

    if (sim->parsed()) {
        scfg.decoder = parse_decoder_kind(sm_decoder);
        Channel channel = require_channel(load_channel_file(sm_spec), "simulate");
        const CqMacSpec& spec = require_cq(channel, "simulation");
        EnsembleSpec ens = load_ensemble_file(sm_ens);
        SimReport rep;
        if (sm_scheme == "df")
            rep = simulate_df_noiseless(spec, ens, srates, scfg);
        else if (sm_scheme == "packing")
            rep = simulate_packing_single_block(spec, ens, srates, scfg);
        else
            throw Error::validation("unknown scheme: " + sm_scheme);
        json out = sim_report_to_json(rep, false);
        out["manifest"] = manifest_to_json(
            make_manifest("simulate", {sm_spec, sm_ens}, sm_scheme, scfg.seed, sm_out));
        emit(out.dump(2), sm_out);
        std::cerr << "wall_time_ms " << rep.wall_time_ms << "\n";
        return 0;
    }

    if (rob->parsed()) {
        Channel channel = require_channel(load_channel_file(rb_spec), "check-robust");
        CribbingMac mac = std::holds_alternative<CribbingMac>(channel)
                              ? std::get<CribbingMac>(channel)
                              : cq_to_cribbing_mac(std::get<CqMacSpec>(channel));
        std::vector<DensityOperator> extras;
        if (!rb_extra.empty()) {
            std::ifstream in(rb_extra);
            if (!in) throw Error::validation("cannot open file: " + rb_extra);
            json j;
            try {
                j = json::parse(in);
            } catch (const json::parse_error& e) {
                throw Error::validation(rb_extra + ": " + e.what());
            }
            if (!j.is_array()) throw Error::validation("extra inputs must be a JSON array");
            for (const auto& m : j)
                extras.push_back(DensityOperator(matrix_from_json(m, "extra-inputs")));
        }
        auto report = check_robust_cribbing(mac, rb_tol, extras);
        json out;
        out["certified"] = report.certified;
        out["cmi_values"] = report.cmi_values;
        out["tol"] = rb_tol;
        out["manifest"] = manifest_to_json(
            make_manifest("check-robust", {rb_spec}, "tol=" + format_double(rb_tol), 0, rb_out));
        emit(out.dump(2), rb_out);
        return 0;
    }

    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        switch (e.kind()) {
            case ErrorKind::validation: return 2;
            case ErrorKind::resource_cap: return 3;
            case ErrorKind::internal: return 4;
        }
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 4;
    }
}
