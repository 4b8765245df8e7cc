// dgatlas: run exact property checks over a scene file and emit a JSON report.
//
// Exit codes: 0 all checks pass, 1 at least one check fails, 2 usage or
// scene-validation error.

#include <dgatlas/checks.hpp>
#include <dgatlas/scene.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

int emit_report(const nlohmann::json& report, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << report.dump(2) << "\n";
    } else {
        std::ofstream out(out_path);
        if (!out) {
            std::cerr << "error: cannot write report to " << out_path << "\n";
            return 2;
        }
        out << report.dump(2) << "\n";
    }
    return report.at("all_pass").get<bool>() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact property checks for polynomial dg charts"};
    app.require_subcommand(0, 1);

    std::string scene_path;
    std::string out_path;
    std::optional<std::uint64_t> seed_override;
    std::string replay_path;
    bool list_only = false;

    CLI::App* run = app.add_subcommand("run", "run checks over a scene file");
    run->add_option("scene", scene_path, "scene JSON file")->required();
    run->add_option("--out", out_path, "write the report to this file instead of stdout");
    run->add_option("--seed", seed_override, "override the scene seed");
    run->add_option("--replay", replay_path,
                    "re-run the single check recorded in a counterexample JSON file");
    run->add_flag("--list-checks", list_only, "print the check registry and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (!run->parsed()) {
        std::cerr << app.help();
        return 2;
    }

    if (list_only) {
        for (const auto& name : dgatlas::list_checks()) std::cout << name << "\n";
        return 0;
    }

    try {
        dgatlas::Scene scene = dgatlas::load_scene(scene_path);
        std::uint64_t seed = seed_override.value_or(scene.seed);

        if (!replay_path.empty()) {
            std::ifstream in(replay_path);
            if (!in) {
                std::cerr << "error: cannot open counterexample file: " << replay_path << "\n";
                return 2;
            }
            nlohmann::json ce = nlohmann::json::parse(in);
            if (!ce.is_object() || !ce.contains("check") || !ce.contains("seed")) {
                std::cerr << "error: counterexample file needs 'check' and 'seed' fields\n";
                return 2;
            }
            dgatlas::CheckResult r = dgatlas::run_check(ce.at("check").get<std::string>(), scene,
                                                        ce.at("seed").get<std::uint64_t>());
            nlohmann::json report = dgatlas::report_to_json({r}, ce.at("seed").get<std::uint64_t>());
            return emit_report(report, out_path);
        }

        std::vector<dgatlas::CheckResult> results = dgatlas::run_scene_checks(scene, seed);
        return emit_report(dgatlas::report_to_json(results, seed), out_path);
    } catch (const dgatlas::SceneError& e) {
        std::cerr << "scene error: " << e.what() << "\n";
        return 2;
    } catch (const dgatlas::UnknownCheckError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
