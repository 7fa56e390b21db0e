#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "conefield/commands.hpp"
#include "conefield/error.hpp"

using namespace conefield;

namespace {

enum Exit { kOk = 0, kInvalid = 2, kRefused = 3, kInternal = 4 };

void emit(const Json& report, const Session& session, const std::string& name) {
    const auto text = report.dump(2) + "\n";
    std::fwrite(text.data(), 1, text.size(), stdout);
    session.write_file(name, text);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Discrete causality analysis of closed cone fields on product grids"};
    app.require_subcommand(1);

    std::string scene_path;
    RunOptions opt;
    std::string out_dir;
    int stencil = 0, r = -1;
    unsigned threads = 1;

    auto common = [&](CLI::App* cmd) {
        cmd->add_option("--scene", scene_path, "Scene JSON file")->required()->check(CLI::ExistingFile);
        cmd->add_option("--theta", opt.thetas, "Enlargement angle in radians (repeatable)");
        cmd->add_option("--stencil", stencil, "Stencil radius in cells")->check(CLI::PositiveNumber);
        cmd->add_option("--r", r, "Spatial enlargement radius in cells")->check(CLI::NonNegativeNumber);
        cmd->add_option("--out", out_dir, "Directory for reports and CSV exports");
        cmd->add_flag("--strict", opt.strict, "Treat scene warnings and band plateaus as errors");
        cmd->add_option("--threads", threads, "Worker threads (0 = hardware concurrency)");
    };

    auto* analyze = app.add_subcommand("analyze", "Recurrent sets, SCC statistics and causality verdicts");
    common(analyze);

    auto* futures = app.add_subcommand("futures", "Future sets of a point");
    common(futures);
    std::vector<double> point;
    std::string relation = "K";
    futures->add_option("--point", point, "Point coordinates (snapped to the nearest vertex)")->required();
    futures->add_option("--relation", relation, "J, K or F")->check(CLI::IsMember({"J", "K", "F"}));

    auto* classify = app.add_subcommand("classify", "Neutral/strict classification of a causal function");
    common(classify);
    std::string function;
    classify->add_option("--function", function, "Scene function name")->required();

    auto* approx = app.add_subcommand("approx", "Lyapunov approximation of a special causal function");
    common(approx);
    double eps = 0.0;
    bool regularize = false;
    approx->add_option("--function", function, "Scene function name")->required();
    approx->add_option("--eps", eps, "Approximation tolerance")->required()->check(CLI::PositiveNumber);
    approx->add_flag("--regularize", regularize, "Add eps times the complete Lyapunov function");

    auto* verify = app.add_subcommand("verify", "Check a field against the Lyapunov conditions");
    common(verify);
    std::string field_name, field_csv_path;
    std::optional<double> delta_0;
    auto* by_name = verify->add_option("--field", field_name, "Scene function or derived field name");
    auto* by_csv = verify->add_option("--csv", field_csv_path, "Field CSV as written by export/approx")
                       ->check(CLI::ExistingFile);
    by_name->excludes(by_csv);
    verify->add_option("--delta0", delta_0, "Minimum increase per unit length outside the recurrent set");

    auto* exporter = app.add_subcommand("export", "Write a field as CSV");
    common(exporter);
    std::string format = "csv";
    exporter->add_option("--field", field_name, "Scene function or derived field name")->required();
    exporter->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInvalid;
    }

    try {
        if (stencil > 0) opt.stencil = stencil;
        if (r >= 0) opt.r = r;
        if (!out_dir.empty()) opt.out_dir = out_dir;
        opt.threads = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;

        Session session(prepare_scene(load_scene(scene_path), opt.strict, opt.threads), opt);
        for (const auto& w : session.scene().validation.warnings) fmt::print(stderr, "warning: {}\n", w);

        if (app.got_subcommand(analyze)) {
            emit(cmd_analyze(session), session, "analyze.json");
        } else if (app.got_subcommand(futures)) {
            emit(cmd_futures(session, point, relation), session, "futures.json");
        } else if (app.got_subcommand(classify)) {
            emit(cmd_classify(session, function), session, "classify.json");
        } else if (app.got_subcommand(approx)) {
            emit(cmd_approx(session, function, eps, std::nullopt, regularize), session, "approx.json");
        } else if (app.got_subcommand(verify)) {
            ScalarField tau;
            if (!field_csv_path.empty()) {
                std::ifstream in(field_csv_path);
                tau = read_field_csv(in, session.grid());
            } else if (!field_name.empty()) {
                tau = session.field(field_name);
            } else {
                throw SceneError("verify needs --field or --csv");
            }
            const double d0 = delta_0.value_or(session.scene().scene.tolerances.delta_0);
            emit(cmd_verify(session, tau, d0, std::nullopt), session, "verify.json");
        } else if (app.got_subcommand(exporter)) {
            const auto csv = cmd_export(session, field_name);
            if (!session.write_file(field_name + ".csv", csv)) std::fwrite(csv.data(), 1, csv.size(), stdout);
        }
        return kOk;
    } catch (const NotStrict& e) {
        fmt::print(stderr, "refused: {}\n", e.what());
        return kRefused;
    } catch (const NoStrictBin& e) {
        fmt::print(stderr, "refused: {}\n", e.what());
        return kRefused;
    } catch (const NotCausal& e) {
        fmt::print(stderr, "refused: {}\n", e.what());
        return kRefused;
    } catch (const ParseError& e) {
        fmt::print(stderr, "error: {} (offset {})\n", e.what(), e.offset());
        return kInvalid;
    } catch (const Error& e) {
        // Remaining library errors concern the scene or its inputs.
        fmt::print(stderr, "error: {}\n", e.what());
        return kInvalid;
    } catch (const std::invalid_argument& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kInvalid;
    } catch (const std::exception& e) {
        fmt::print(stderr, "internal error: {}\n", e.what());
        return kInternal;
    }
}
