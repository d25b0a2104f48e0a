#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "orbifold/scenario.hpp"

using namespace orbifold;
namespace fs = std::filesystem;

namespace {

std::string scenario_path(const std::string& name) {
    return std::string(ORBIFOLD_SCENARIO_DIR) + "/" + name;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path temp_dir(const std::string& tag) {
    fs::path dir = fs::temp_directory_path() / ("orbifoldlab_test_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("bundled z2_circle8 loads with two sectors") {
    const Scenario sc = load_scenario(scenario_path("z2_circle8.json"));
    CHECK(sc.name == "z2_circle8");
    CHECK_FALSE(sc.analytic_route);
    const SectorChart chart = sector_chart(sc.space, sc.action, sc.group);
    REQUIRE(chart.class_count() == 2);
    CHECK(chart.sectors[0].locus.size() == 8);
    CHECK(chart.sectors[1].locus.size() == 2);
}

TEST_CASE("all bundled scenarios load cleanly") {
    for (const char* name :
         {"trivial_circle8.json", "z2_circle8.json", "z3_wheel9.json", "z4_torus4.json", "z2xz2_torus4.json",
          "s3_triangle.json", "trivial_sphere2000.json", "trivial_torus_heat.json", "toy_z2.json"}) {
        CAPTURE(name);
        CHECK_NOTHROW(load_scenario(scenario_path(name)));
    }
    CHECK(load_scenario(scenario_path("trivial_sphere2000.json")).analytic_route);
    CHECK(load_scenario(scenario_path("trivial_torus_heat.json")).analytic_route);
}

TEST_CASE("validation failures are collected and named") {
    nlohmann::json doc = {
        {"schema", 1},
        {"name", "broken"},
        {"group", {{"preset", "Z2"}}},
        {"space", {{"analytic", {{"kind", "circle"}, {"size", 8}}}}},
        {"action", {{"perms", {{0, 1, 2, 3, 4, 5, 6, 7}, {1, 2, 3, 4, 5, 6, 7, 0}, {0, 1, 2, 3, 4, 5, 6, 7}}}}}};
    // Group order 2 but 3 permutations: the mismatch is named.
    CHECK_THROWS_WITH_AS(parse_scenario(doc), doctest::Contains("expected 2 permutations, got 3"), ValidationError);

    doc["action"] = {{"preset", "no_such_action"}};
    CHECK_THROWS_WITH_AS(parse_scenario(doc), doctest::Contains("unknown action preset"), ValidationError);

    doc["action"] = {{"preset", "circle_reflection"}};
    doc["group"] = {{"preset", "Z9000"}};
    CHECK_THROWS_WITH_AS(parse_scenario(doc), doctest::Contains("unknown group preset"), ValidationError);

    // Unknown fields are rejected (schema is strict).
    nlohmann::json odd = {{"schema", 1},
                          {"name", "odd"},
                          {"group", {{"preset", "trivial"}}},
                          {"space", {{"analytic", {{"kind", "circle"}, {"size", 8}}}}},
                          {"surprise", 42}};
    CHECK_THROWS_WITH_AS(parse_scenario(odd), doctest::Contains("unknown field 'surprise'"), ValidationError);

    // Wrong schema number.
    nlohmann::json old = {{"schema", 2},
                          {"name", "old"},
                          {"group", {{"preset", "trivial"}}},
                          {"space", {{"analytic", {{"kind", "circle"}, {"size", 8}}}}}};
    CHECK_THROWS_WITH_AS(parse_scenario(old), doctest::Contains("schema"), ValidationError);

    // Sphere with a nontrivial group cannot run anywhere.
    nlohmann::json sphere_z2 = {{"schema", 1},
                                {"name", "sphere_z2"},
                                {"group", {{"preset", "Z2"}}},
                                {"space", {{"analytic", {{"kind", "sphere"}, {"size", 10}}}}},
                                {"action", {{"preset", "trivial"}}}};
    CHECK_THROWS_AS(parse_scenario(sphere_z2), ValidationError);

    // Multiple violations are all reported.
    nlohmann::json multi = {{"schema", 1},
                            {"group", {{"preset", "Z9000"}}},
                            {"space", {{"analytic", {{"kind", "blob"}, {"size", 8}}}}}};
    try {
        parse_scenario(multi);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        const std::string what = e.what();
        CHECK(what.find("'name'") != std::string::npos);
        CHECK(what.find("unknown group preset") != std::string::npos);
        CHECK(what.find("unknown kind") != std::string::npos);
    }
}

TEST_CASE("stage subsets and dependency closure") {
    const Scenario sc = load_scenario(scenario_path("z2_circle8.json"));

    StageSet sectors_only;
    sectors_only.sectors = true;
    const RunReport rep = run_scenario(sc, sectors_only);
    REQUIRE(rep.doc["stages"].contains("sectors"));
    CHECK_FALSE(rep.doc["stages"].contains("spectra"));
    CHECK(rep.doc["stages"]["sectors"]["class_count"] == 2);
    CHECK(rep.doc["stages"]["sectors"]["classes"][0]["locus_size"] == 8);
    CHECK(rep.doc["stages"]["sectors"]["classes"][1]["locus_size"] == 2);

    // observables pulls spectra and sectors in.
    StageSet obs_only;
    obs_only.observables = true;
    const RunReport rep2 = run_scenario(sc, obs_only);
    CHECK(rep2.doc["stages"].contains("sectors"));
    CHECK(rep2.doc["stages"].contains("spectra"));
    CHECK(rep2.doc["stages"].contains("observables"));

    // toy on a non-toy scenario is skipped with a notice.
    StageSet toy_only;
    toy_only.toy = true;
    const RunReport rep3 = run_scenario(sc, toy_only);
    CHECK(rep3.doc["stages"]["toymodel"]["skipped"] == true);

    // toy_z2 actually runs the cross-check.
    const Scenario toy = load_scenario(scenario_path("toy_z2.json"));
    const RunReport rep4 = run_scenario(toy, toy_only);
    CHECK(rep4.doc["stages"]["toymodel"]["pass"] == true);

    CHECK_THROWS_AS(parse_stages({"bogus"}), ValidationError);
}

TEST_CASE("reports round-trip and are byte-identical across runs") {
    const Scenario sc = load_scenario(scenario_path("z2_circle8.json"));
    const RunReport a = run_scenario(sc, StageSet::all());
    const RunReport b = run_scenario(sc, StageSet::all());
    CHECK(a.doc.dump() == b.doc.dump());

    const fs::path dir = temp_dir("roundtrip");
    const fs::path file = dir / "report.json";
    emit_json(a, file.string());
    const RunReport back = read_report(file.string());
    CHECK(back.doc == a.doc);
    emit_json(back, (dir / "report2.json").string());
    CHECK(slurp(file) == slurp(dir / "report2.json"));
    fs::remove_all(dir);
}

TEST_CASE("csv bundle: partition column count and manifest") {
    const Scenario sc = load_scenario(scenario_path("z2_circle8.json"));
    const RunReport rep = run_scenario(sc, StageSet::all());
    const fs::path dir = temp_dir("bundle");
    const std::vector<std::string> files = emit_csv_bundle(rep, dir.string());
    CHECK(std::find(files.begin(), files.end(), "partition.csv") != files.end());
    CHECK(std::find(files.begin(), files.end(), "spectra.csv") != files.end());
    CHECK(std::find(files.begin(), files.end(), "flow.csv") != files.end());
    CHECK(std::find(files.begin(), files.end(), "manifest.json") != files.end());

    // partition.csv holds 2 + class-count columns.
    std::ifstream part(dir / "partition.csv");
    std::string header;
    std::getline(part, header);
    CHECK(std::count(header.begin(), header.end(), ',') == 1 + 2);  // beta, Z, Z_class0, Z_class1

    // Empty stage set: manifest-only bundle.
    const RunReport empty_rep = run_scenario(sc, StageSet{});
    const fs::path dir2 = temp_dir("bundle_empty");
    const std::vector<std::string> files2 = emit_csv_bundle(empty_rep, dir2.string());
    CHECK(files2 == std::vector<std::string>{"manifest.json"});
    fs::remove_all(dir);
    fs::remove_all(dir2);
}

TEST_CASE("analytic and dense partition routes agree on a small circle") {
    nlohmann::json base = {{"schema", 1},
                           {"name", "route_check"},
                           {"group", {{"preset", "trivial"}}},
                           {"space", {{"analytic", {{"kind", "circle"}, {"size", 8}}}}},
                           {"options", {{"beta_grid", {{"min", 0.05}, {"max", 5.0}, {"count", 9}}}}}};
    base["options"]["spectra"] = "dense";
    const RunReport dense = run_scenario(parse_scenario(base), StageSet::all());
    base["options"]["spectra"] = "analytic";
    const RunReport analytic = run_scenario(parse_scenario(base), StageSet::all());
    const auto& zd = dense.doc["stages"]["observables"]["partition"]["total"];
    const auto& za = analytic.doc["stages"]["observables"]["partition"]["total"];
    REQUIRE(zd.size() == za.size());
    for (std::size_t i = 0; i < zd.size(); ++i)
        CHECK(std::abs(zd[i].get<double>() - za[i].get<double>()) <= 1e-12 * za[i].get<double>());
}

TEST_CASE("remaining action presets build valid scenarios") {
    nlohmann::json rot = {{"schema", 1},
                          {"name", "z4_rotation"},
                          {"group", {{"preset", "Z4"}}},
                          {"space", {{"analytic", {{"kind", "circle"}, {"size", 8}}}}},
                          {"action", {{"preset", "circle_rotation"}}}};
    const Scenario sc = parse_scenario(rot);
    const SectorChart chart = sector_chart(sc.space, sc.action, sc.group);
    // Rotations act freely: every twisted locus is empty.
    CHECK(chart.sectors[0].locus.size() == 8);
    for (int c = 1; c < chart.class_count(); ++c) CHECK(chart.sectors[c].locus.size() == 0);

    nlohmann::json neg = {{"schema", 1},
                          {"name", "z2_negation"},
                          {"group", {{"preset", "Z2"}}},
                          {"space", {{"analytic", {{"kind", "torus"}, {"size", 4}}}}},
                          {"action", {{"preset", "torus_negation"}}}};
    const Scenario sn = parse_scenario(neg);
    const SectorChart cn = sector_chart(sn.space, sn.action, sn.group);
    CHECK(cn.sectors[1].locus.points == std::vector<int>{0, 2, 8, 10});

    // Rotation preset demands divisibility.
    rot["group"] = {{"preset", "Z3"}};
    CHECK_THROWS_WITH_AS(parse_scenario(rot), doctest::Contains("divide"), ValidationError);
}

TEST_CASE("analytic scenarios produce heat fits and skip flow") {
    const Scenario sc = load_scenario(scenario_path("trivial_sphere2000.json"));
    const RunReport rep = run_scenario(sc, StageSet::all());
    CHECK(rep.doc["stages"]["flow"]["skipped"] == true);
    const auto& hf = rep.doc["stages"]["observables"]["heat_fit"];
    REQUIRE(hf.contains("leading"));
    CHECK(std::abs(hf["leading"].get<double>() - 1.0) <= 5e-3);
    CHECK(std::abs(hf["constant"].get<double>() - 1.0 / 3.0) <= 5e-3);
}

TEST_CASE("algebra elements serialize as per-class [re, im] arrays") {
    const Scenario sc = load_scenario(scenario_path("z2_circle8.json"));
    const SectorChart chart = sector_chart(sc.space, sc.action, sc.group);
    std::mt19937_64 rng(83);
    const AlgebraElement a = random_element(chart, rng);
    const nlohmann::json j = element_to_json(a);
    REQUIRE(j.contains("class_0"));
    REQUIRE(j.contains("class_1"));
    CHECK(j["class_0"].size() == 8);
    CHECK(j["class_1"].size() == 2);
    CHECK(j["class_0"][0].size() == 2);  // [re, im]
    const AlgebraElement back = element_from_json(j);
    REQUIRE(back.class_count() == a.class_count());
    for (int c = 0; c < a.class_count(); ++c)
        for (std::size_t p = 0; p < a.comps[c].size(); ++p) CHECK(back.comps[c][p] == a.comps[c][p]);

    // Flow reports embed their probe elements in this format.
    StageSet flow_only;
    flow_only.flow = true;
    const RunReport rep = run_scenario(sc, flow_only);
    REQUIRE(rep.doc["stages"]["flow"].contains("probes"));
    CHECK(rep.doc["stages"]["flow"]["probes"]["a"]["class_1"].size() == 2);
}

TEST_CASE("scenario hashes differ when content differs") {
    const Scenario a = load_scenario(scenario_path("z2_circle8.json"));
    const Scenario b = load_scenario(scenario_path("trivial_circle8.json"));
    CHECK(a.hash != b.hash);
    CHECK(a.hash.size() == 16);
}

TEST_CASE("explicit grid options are honored") {
    nlohmann::json doc = {{"schema", 1},
                          {"name", "gridded"},
                          {"group", {{"preset", "trivial"}}},
                          {"space", {{"analytic", {{"kind", "circle"}, {"size", 8}}}}},
                          {"options",
                           {{"beta_grid", {{"min", 0.1}, {"max", 1.0}, {"count", 5}}},
                            {"ell_grid", {0.25, 0.5, 1.0}}}}};
    const Scenario sc = parse_scenario(doc);
    StageSet all = StageSet::all();
    const RunReport rep = run_scenario(sc, all);
    const auto& betas = rep.doc["stages"]["observables"]["partition"]["beta_grid"];
    REQUIRE(betas.size() == 5);
    CHECK(betas[0].get<double>() == doctest::Approx(0.1));
    CHECK(betas[4].get<double>() == doctest::Approx(1.0));
    const auto& ells = rep.doc["stages"]["flow"]["ell_grid"];
    REQUIRE(ells.size() == 3);
    CHECK(ells[0].get<double>() == 0.25);

    doc["options"]["beta_grid"] = {{"min", -0.1}, {"max", 1.0}, {"count", 5}};
    CHECK_THROWS_AS(parse_scenario(doc), ValidationError);
}

TEST_CASE("oversized dense spectra hit the guard with an actionable limit") {
    nlohmann::json doc = {{"schema", 1},
                          {"name", "huge_graph"},
                          {"group", {{"preset", "trivial"}}},
                          {"space", {{"points", nlohmann::json::array()}}}};
    for (int i = 0; i < 4097; ++i) doc["space"]["points"].push_back(1.0);
    const Scenario sc = parse_scenario(doc);
    StageSet spectra_only;
    spectra_only.spectra = true;
    CHECK_THROWS_WITH_AS(run_scenario(sc, spectra_only), doctest::Contains("guard"), GuardError);
}
