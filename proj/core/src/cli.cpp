#include "phaseplane/cli.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "phaseplane/config.hpp"
#include "phaseplane/report.hpp"

namespace phaseplane::cli {

namespace {

namespace fs = std::filesystem;

struct RunContext {
    ExperimentConfig config;
    std::string hash;
    fs::path out;
    std::vector<std::string> artifacts;
    std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

    void emit(const std::string& name, const std::string& content) {
        write_text_atomic(out / name, content);
        artifacts.push_back(name);
    }

    void write_manifest(const std::string& command) {
        nlohmann::ordered_json j;
        j["command"] = command;
        j["config_hash"] = hash;
        j["code_version"] = kVersion;
        j["config"] = nlohmann::json::parse(config.canonical_json());
        j["artifacts"] = artifacts;
        const double runtime =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        j["runtime_seconds"] = runtime;
        j["timestamp"] =
            std::chrono::duration_cast<std::chrono::seconds>(
                std::chrono::system_clock::now().time_since_epoch())
                .count();
        write_text_atomic(out / ("manifest_" + hash + ".json"), j.dump(2) + "\n");
    }
};

RunContext make_context(const ExperimentConfig& config) {
    RunContext ctx;
    ctx.config = config;
    ctx.hash = hash_hex(config.hash());
    ctx.out = fs::path(config.out_dir);
    fs::create_directories(ctx.out);
    return ctx;
}

void emit_ratio(RunContext& ctx, const std::string& stem, const RatioReport& report) {
    ctx.emit(stem + "_" + ctx.hash + ".csv", ratio_report_csv(report));
    ctx.emit(stem + "_" + ctx.hash + ".json", ratio_report_summary_json(report));
}

int cmd_wavelet_verify(RunContext& ctx) {
    const MotherWavelet mw = build_mother_wavelet(ctx.config.samples, ctx.config.window);
    const WaveletVerification v = verify_wavelet(mw);

    std::ostringstream csv;
    csv << "n,orthogonality\n";
    for (std::size_t k = 0; k < v.orthogonality.size(); ++k)
        csv << (k + 1) << ',' << format_double(v.orthogonality[k]) << '\n';
    ctx.emit("wavelet_orthogonality_" + ctx.hash + ".csv", csv.str());

    nlohmann::ordered_json j;
    j["identity_deviation"] = v.max_identity_deviation;
    j["max_orthogonality"] = v.max_orthogonality;
    j["phi_l2"] = v.phi_l2;
    j["max_imag_residue"] = v.max_imag_residue;
    j["within_floors"] = v.within_floors();
    ctx.emit("wavelet_" + ctx.hash + ".json", j.dump(2) + "\n");
    ctx.write_manifest("wavelet-verify");

    if (!v.within_floors())
        throw FloorViolation("wavelet floors violated: identity deviation " +
                             format_double(v.max_identity_deviation) + ", orthogonality " +
                             format_double(v.max_orthogonality));
    return 0;
}

int cmd_gen_tiles(RunContext& ctx) {
    const LabConfig lab = ctx.config.lab();
    EnsembleSpec spec = lab.ensemble;
    spec.seed = mix_seed(lab.base_seed, 0);
    const GeneratedForest forest = random_disjprop_collection(spec, lab.grid);
    ctx.emit("tiles_" + ctx.hash + ".json", tiles_json(forest));
    ctx.write_manifest("gen-tiles");
    return 0;
}

int cmd_decompose(RunContext& ctx) {
    const LabConfig lab = ctx.config.lab();
    const MotherWavelet mw = build_mother_wavelet(lab.samples, lab.window);

    GeneratedForest forest;
    if (!ctx.config.tiles_file.empty()) {
        std::ifstream is(ctx.config.tiles_file);
        if (!is)
            throw ConfigError("tiles_file",
                              "cannot open tiles file " + ctx.config.tiles_file);
        std::ostringstream buf;
        buf << is.rdbuf();
        forest = forest_from_json(buf.str());
    } else {
        EnsembleSpec spec = lab.ensemble;
        spec.seed = mix_seed(lab.base_seed, 0);
        forest = random_disjprop_collection(spec, lab.grid);
    }
    const std::vector<Tile> tiles = forest.all_tiles();

    WavePacketFactory factory(mw, forest.grid);
    MeasurableSet f_support = random_set(lab.window, lab.samples, mix_seed(lab.base_seed, 19),
                                         forest.universe.time_halfwidth, 0.3, 6);
    MeasurableSet e_set = random_set(lab.window, lab.samples, mix_seed(lab.base_seed, 20),
                                     forest.universe.time_halfwidth, 0.2, 6);
    SampledFunction f = random_bandlimited(lab.space, lab.window, lab.samples,
                                           mix_seed(lab.base_seed, 21), 4.0);
    shape_to_support(f, f_support, 4.0);
    FrequencyChoice choice = random_frequency_choice(tiles, lab.window, lab.samples,
                                                     mix_seed(lab.base_seed, 22));

    DensityEvaluator deval(DensityContext{e_set, choice}, forest.universe);
    EnergyEvaluator eeval(factory, EnergyContext{f, lab.q}, forest.universe);
    const TileDecomposition dec =
        full_decomposition(deval, eeval, tiles, lab.alpha, f_support.measure());

    ctx.emit("decomposition_" + ctx.hash + ".json", decomposition_json(dec));
    ctx.emit("decomposition_" + ctx.hash + ".csv", decomposition_csv(dec, deval, eeval));
    ctx.write_manifest("decompose");
    return 0;
}

int cmd_tile_type(RunContext& ctx) {
    const LabConfig lab = ctx.config.lab();
    for (const std::string& exp : ctx.config.experiments) {
        if (exp == "basic") {
            emit_ratio(ctx, "tiletype_basic", run_hilbert_basic(lab));
        } else if (exp == "weak") {
            emit_ratio(ctx, "tiletype_weak", run_weak_type(lab));
        } else if (exp == "log") {
            emit_ratio(ctx, "tiletype_log", run_log_tile_type(lab));
        } else if (exp == "fourier") {
            for (double alpha : ctx.config.alphas) {
                RatioReport r = run_fourier_tile_type(lab, alpha);
                std::ostringstream stem;
                stem << "tiletype_fourier_a" << static_cast<int>(alpha * 100);
                emit_ratio(ctx, stem.str(), r);
            }
        }
    }
    ctx.write_manifest("tile-type");
    return 0;
}

int cmd_carleson_pairing(RunContext& ctx) {
    const LabConfig lab = ctx.config.lab();
    for (double p : ctx.config.p_exponents) {
        std::ostringstream tag;
        tag << "_p" << static_cast<int>(p * 100);
        emit_ratio(ctx, "pairing_rwt" + tag.str(), run_restricted_weak_type(lab, p));
        const TwoCaseReport tc = run_two_case_pairing(lab, p);
        emit_ratio(ctx, "pairing_twocase" + tag.str(), tc.main);
        emit_ratio(ctx, "pairing_twocase_inside" + tag.str(), tc.inside_part);
    }
    ctx.write_manifest("carleson-pairing");
    return 0;
}

int cmd_converge(RunContext& ctx) {
    const LabConfig lab = ctx.config.lab();
    const ConvergenceStudy study =
        convergence_study(lab, ctx.config.periodic_samples, ctx.config.convergence_orders);

    std::ostringstream csv;
    csv << "n,err_p43,err_p2,err_p4\n";
    for (std::size_t i = 0; i < study.orders.size(); ++i) {
        csv << study.orders[i];
        for (double e : study.periodic_errors[i]) csv << ',' << format_double(e);
        csv << '\n';
    }
    ctx.emit("converge_" + ctx.hash + ".csv", csv.str());

    nlohmann::ordered_json j;
    j["projection_identity_error"] = study.projection_identity_error;
    j["kernel_agreement_error"] = study.kernel_agreement_error;
    j["maximal_value"] = study.maximal_value;
    j["maximal_oracle_value"] = study.maximal_oracle_value;
    ctx.emit("converge_" + ctx.hash + ".json", j.dump(2) + "\n");
    ctx.write_manifest("converge");
    return 0;
}

int cmd_major_subset(RunContext& ctx) {
    const LabConfig lab = ctx.config.lab();
    emit_ratio(ctx, "majorsubset", run_major_subset(lab));
    ctx.write_manifest("major-subset");
    return 0;
}

int cmd_report(RunContext& ctx) {
    // Aggregate every ratio CSV in the output directory into one summary.
    nlohmann::ordered_json summary;
    std::ostringstream combined;
    combined << "experiment,seed,size,lhs,rhs,ratio\n";
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(ctx.out)) {
        if (entry.path().extension() == ".csv") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const fs::path& file : files) {
        std::ifstream is(file);
        std::string header;
        if (!std::getline(is, header)) continue;
        if (header != "experiment,seed,size,lhs,rhs,ratio") continue;
        RatioReport report;
        std::string line;
        while (std::getline(is, line)) {
            std::istringstream row(line);
            RatioRow r;
            std::string field;
            std::getline(row, report.experiment, ',');
            std::getline(row, field, ',');
            r.seed = std::stoull(field);
            std::getline(row, field, ',');
            r.size = std::stoi(field);
            std::getline(row, field, ',');
            r.lhs = std::stod(field);
            std::getline(row, field, ',');
            r.rhs = std::stod(field);
            std::getline(row, field, ',');
            r.ratio = std::stod(field);
            report.rows.push_back(r);
            combined << report.experiment << ',' << r.seed << ',' << r.size << ','
                     << format_double(r.lhs) << ',' << format_double(r.rhs) << ','
                     << format_double(r.ratio) << '\n';
        }
        if (report.rows.empty()) continue;
        report.finalize();
        nlohmann::ordered_json entry;
        entry["file"] = file.filename().string();
        entry["rows"] = report.rows.size();
        entry["max"] = report.max_ratio;
        entry["p95"] = report.p95;
        entry["drift"] = report.max_drift;
        summary[report.experiment].push_back(entry);
    }
    ctx.emit("report_combined_" + ctx.hash + ".csv", combined.str());
    ctx.emit("report_summary_" + ctx.hash + ".json", summary.dump(2) + "\n");
    ctx.write_manifest("report");
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{std::string(kVersion) +
                 " - phase-plane experiments for vector-valued maximal Fourier sums"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;
    std::uint64_t seed_override = 0;
    bool seed_set = false;
    int threads_override = -1;

    app.add_option("--config", config_path, "JSON experiment config");
    app.add_option("--out", out_override, "output directory override");
    auto* seed_opt = app.add_option("--seed", seed_override, "base seed override");
    app.add_option("--threads", threads_override, "worker thread count (0 = hardware)");

    static const std::vector<std::pair<std::string, int (*)(RunContext&)>> commands = {
        {"wavelet-verify", cmd_wavelet_verify}, {"gen-tiles", cmd_gen_tiles},
        {"decompose", cmd_decompose},           {"tile-type", cmd_tile_type},
        {"carleson-pairing", cmd_carleson_pairing}, {"converge", cmd_converge},
        {"major-subset", cmd_major_subset},     {"report", cmd_report}};
    for (const auto& [name, fn] : commands) {
        CLI::App* sub = app.add_subcommand(name);
        sub->fallthrough(true);
    }

    std::vector<const char*> argv;
    argv.push_back("phaseplane");
    for (const std::string& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    seed_set = seed_opt->count() > 0;

    try {
        ExperimentConfig config = config_path.empty()
                                      ? ExperimentConfig{}
                                      : ExperimentConfig::from_json_file(config_path);
        config.apply_env_overrides();
        if (!out_override.empty()) config.out_dir = out_override;
        if (seed_set) config.base_seed = seed_override;
        if (threads_override >= 0) config.threads = threads_override;
        config.validate();

        RunContext ctx = make_context(config);
        for (const auto& [name, fn] : commands)
            if (app.got_subcommand(name)) return fn(ctx);
        std::cerr << "no command selected\n";
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << "config error (" << e.field << "): " << e.what() << '\n';
        return 2;
    } catch (const FloorViolation& e) {
        std::cerr << "numerical floor violation: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

int run(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args);
}

}  // namespace phaseplane::cli
