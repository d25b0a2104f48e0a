// Scenario-driven command line for the orbifold sector laboratory.
//
//   orbifoldlab validate <file>
//   orbifoldlab run <file> [--stages ...] [--out DIR] [--format json|csv]
//   orbifoldlab presets list
//
// Exit codes: 0 success, 2 validation failure, 3 guard exceeded, 4 I/O.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "orbifold/orbifold.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitGuard = 3;
constexpr int kExitIo = 4;

std::string output_dir(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("ORBIFOLDLAB_OUT"); env && *env) return env;
    return "out";
}

int do_validate(const std::string& path) {
    const orbifold::Scenario sc = orbifold::load_scenario(path);
    std::cout << "ok: scenario '" << sc.name << "' (hash " << sc.hash << ", group order " << sc.group.order()
              << ", " << (sc.analytic_route ? "analytic" : "dense") << " spectra route)\n";
    return kExitOk;
}

int do_run(const std::string& path, const std::vector<std::string>& stage_names, const std::string& out_flag,
           const std::string& format) {
    namespace fs = std::filesystem;
    const orbifold::Scenario sc = orbifold::load_scenario(path);
    orbifold::StageSet stages =
        stage_names.empty() ? orbifold::StageSet::all() : orbifold::parse_stages(stage_names);
    const orbifold::RunReport report = orbifold::run_scenario(sc, stages);

    const fs::path dir = output_dir(out_flag);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw orbifold::IoError("cannot create output directory '" + dir.string() + "': " + ec.message());

    if (format == "json") {
        const fs::path file = dir / (sc.name + ".report.json");
        orbifold::emit_json(report, file.string());
        std::cout << "wrote " << file.string() << "\n";
    } else if (format == "csv") {
        const fs::path bundle = dir / sc.name;
        const std::vector<std::string> files = orbifold::emit_csv_bundle(report, bundle.string());
        for (const std::string& f : files) std::cout << "wrote " << (bundle / f).string() << "\n";
    } else {
        throw orbifold::ValidationError("unknown format '" + format + "' (expected json or csv)");
    }
    return kExitOk;
}

int do_presets() {
    std::cout << "group presets:\n";
    for (const std::string& name : orbifold::group_preset_names()) {
        const orbifold::FiniteGroupTable g = orbifold::group_preset(name);
        std::cout << "  " << name << "  (order " << g.order() << (g.is_abelian() ? ", abelian" : ", non-abelian")
                  << ")\n";
    }
    std::cout << "action presets:\n";
    for (const std::string& name : orbifold::action_preset_names()) std::cout << "  " << name << "\n";
    std::cout << "analytic spaces: circle(n), torus(n), sphere(l_max)\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"orbifoldlab: finite-group orbifold sector algebra, spectra, RG flow, observables"};
    app.require_subcommand(1);

    std::string validate_path;
    CLI::App* validate = app.add_subcommand("validate", "validate a scenario file");
    validate->add_option("file", validate_path, "scenario JSON file")->required();

    std::string run_path;
    std::vector<std::string> run_stages;
    std::string run_out;
    std::string run_format = "json";
    CLI::App* run = app.add_subcommand("run", "run a scenario and emit a report");
    run->add_option("file", run_path, "scenario JSON file")->required();
    run->add_option("--stages", run_stages, "subset of sectors,spectra,flow,observables,toy")->delimiter(',');
    run->add_option("--out", run_out, "output directory (default: $ORBIFOLDLAB_OUT or ./out)");
    run->add_option("--format", run_format, "json | csv")->check(CLI::IsMember({"json", "csv"}));

    CLI::App* presets = app.add_subcommand("presets", "preset inventory");
    CLI::App* presets_list = presets->add_subcommand("list", "list group and action presets");
    presets->require_subcommand(1);

    try {
        app.parse(argc, argv);
        if (*validate) return do_validate(validate_path);
        if (*run) return do_run(run_path, run_stages, run_out, run_format);
        if (*presets_list) return do_presets();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const orbifold::GuardError& e) {
        std::cerr << "guard exceeded: " << e.what() << "\n";
        return kExitGuard;
    } catch (const orbifold::IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitIo;
    } catch (const orbifold::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitIo;
    }
}
