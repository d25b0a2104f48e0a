#pragma once

// Scenario loading, validation, pipeline orchestration
// (sectors -> spectra -> flow -> observables -> toy), and report emission.
// Reports are deterministic: identical scenario + tool version produce
// byte-identical JSON.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "orbifold/algebra.hpp"
#include "orbifold/errors.hpp"
#include "orbifold/group.hpp"
#include "orbifold/observables.hpp"
#include "orbifold/rgflow.hpp"
#include "orbifold/space.hpp"
#include "orbifold/spectral.hpp"
#include "orbifold/toymodel.hpp"

namespace orbifold {

inline constexpr const char* kToolName = "orbifoldlab";
inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kScenarioSchema = 1;

/// Point count above which the dense route is refused under "auto".
inline constexpr int kAutoDenseLimit = 2000;

inline std::vector<std::string> action_preset_names() {
    return {"trivial",          "circle_reflection", "circle_rotation",
            "torus_negation",   "torus_diagonal_flips", "torus_quarter_turn",
            "s3_triangle"};
}

// ---------------------------------------------------------------------------
// Named actions on the analytic spaces.

inline GroupAction action_preset(const std::string& name, const DiscreteSpace& space,
                                 const FiniteGroupTable& group) {
    const int npts = space.point_count();
    auto require_tag = [&](AnalyticKind kind, const char* what) {
        if (!space.analytic || space.analytic->kind != kind || npts == 0)
            throw ValidationError("action preset '" + std::string(what) + "' needs a materialized " +
                                  analytic_kind_name(kind) + " space");
        return space.analytic->size;
    };
    if (name == "trivial") return trivial_action(space, group);
    if (name == "circle_reflection") {
        const int n = require_tag(AnalyticKind::circle, "circle_reflection");
        if (group.order() != 2) throw ValidationError("action preset 'circle_reflection' needs a group of order 2");
        GroupAction a = trivial_action(space, group);
        const int g = 1 - group.identity();
        for (int p = 0; p < n; ++p) a.perms[g][p] = (n - p) % n;
        return a;
    }
    if (name == "circle_rotation") {
        const int n = require_tag(AnalyticKind::circle, "circle_rotation");
        const int k = group.order();
        if (k < 1 || n % k != 0)
            throw ValidationError("action preset 'circle_rotation' needs the group order to divide the circle size");
        const int step = n / k;
        GroupAction a;
        a.perms.assign(k, std::vector<int>(n));
        for (int g = 0; g < k; ++g)
            for (int p = 0; p < n; ++p) a.perms[g][p] = (p + g * step) % n;
        return a;
    }
    auto torus_id = [&](int n, int i, int j) { return ((i % n) + n) % n * n + ((j % n) + n) % n; };
    if (name == "torus_negation") {
        const int n = require_tag(AnalyticKind::torus, "torus_negation");
        if (group.order() != 2) throw ValidationError("action preset 'torus_negation' needs a group of order 2");
        GroupAction a = trivial_action(space, group);
        const int g = 1 - group.identity();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) a.perms[g][torus_id(n, i, j)] = torus_id(n, -i, -j);
        return a;
    }
    if (name == "torus_diagonal_flips") {
        const int n = require_tag(AnalyticKind::torus, "torus_diagonal_flips");
        if (group.order() != 4)
            throw ValidationError("action preset 'torus_diagonal_flips' needs the Z2xZ2 group (order 4)");
        GroupAction a = trivial_action(space, group);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                a.perms[1][torus_id(n, i, j)] = torus_id(n, j, i);    // flip across the diagonal
                a.perms[2][torus_id(n, i, j)] = torus_id(n, -j, -i);  // flip across the anti-diagonal
                a.perms[3][torus_id(n, i, j)] = torus_id(n, -i, -j);  // their product: point reflection
            }
        return a;
    }
    if (name == "torus_quarter_turn") {
        const int n = require_tag(AnalyticKind::torus, "torus_quarter_turn");
        if (group.order() != 4) throw ValidationError("action preset 'torus_quarter_turn' needs a group of order 4");
        GroupAction a = trivial_action(space, group);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) a.perms[1][torus_id(n, i, j)] = torus_id(n, j, -i);
        for (int g = 2; g < 4; ++g)
            for (int p = 0; p < npts; ++p) a.perms[g][p] = a.perms[1][a.perms[g - 1][p]];
        return a;
    }
    if (name == "s3_triangle") {
        if (!space.analytic || space.analytic->kind != AnalyticKind::circle || space.analytic->size != 3)
            throw ValidationError("action preset 's3_triangle' needs the circle(3) space");
        if (group.order() != 6) throw ValidationError("action preset 's3_triangle' needs the S3 group");
        GroupAction a;
        const auto perms = s3_permutations();
        for (const auto& p : perms) a.perms.push_back(p);
        return a;
    }
    throw ValidationError("unknown action preset '" + name + "'");
}

// ---------------------------------------------------------------------------
// Scenario model.

struct GridSpec {
    std::vector<double> values;  // explicit grid; empty means "use min/max/count"
    double min = 0.0;
    double max = 0.0;
    int count = 0;  // 0 means "default grid"

    bool is_default() const { return values.empty() && count == 0; }

    std::vector<double> resolve_log(const std::vector<double>& fallback) const {
        if (!values.empty()) return values;
        if (count == 0) return fallback;
        std::vector<double> grid(count);
        if (count == 1) {
            grid[0] = min;
            return grid;
        }
        const double llo = std::log(min), lhi = std::log(max);
        for (int i = 0; i < count; ++i)
            grid[i] = std::exp(llo + (lhi - llo) * static_cast<double>(i) / static_cast<double>(count - 1));
        return grid;
    }
};

struct HeatFitSpec {
    int dimension = 2;
    double beta_min = 1e-3;
    double beta_max = 1e-2;
    int samples = 16;
};

struct ScenarioOptions {
    double cluster_rel_tol = kDefaultClusterRelTol;
    GridSpec ell_grid;
    GridSpec beta_grid;
    int toy_truncation = -1;  // < 0: no toy stage
    std::optional<HeatFitSpec> heat_fit;
    std::string spectra_mode = "auto";  // auto | dense | analytic
    unsigned long long rng_seed = 12345;
};

struct Scenario {
    std::string name;
    FiniteGroupTable group;
    DiscreteSpace space;
    GroupAction action;
    ScenarioOptions options;
    bool analytic_route = false;  // resolved spectra mode
    nlohmann::json canonical;     // re-serialized scenario document
    std::string hash;
};

inline std::string fnv1a_hex(const std::string& s) {
    unsigned long long h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= static_cast<unsigned long long>(c);
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", h);
    return std::string(buf);
}

namespace detail {

inline void check_keys(const nlohmann::json& obj, const std::set<std::string>& allowed, const std::string& where,
                       std::vector<std::string>& errors) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key())) errors.push_back(where + ": unknown field '" + it.key() + "'");
}

inline bool positive_number(const nlohmann::json& v) { return v.is_number() && v.get<double>() > 0.0; }

inline GridSpec parse_grid(const nlohmann::json& v, const std::string& where, std::vector<std::string>& errors) {
    GridSpec spec;
    if (v.is_array()) {
        for (const auto& x : v) {
            if (!positive_number(x)) {
                errors.push_back(where + ": grid values must be positive numbers");
                return spec;
            }
            spec.values.push_back(x.get<double>());
        }
        if (spec.values.empty()) errors.push_back(where + ": explicit grid must be nonempty");
        return spec;
    }
    if (!v.is_object()) {
        errors.push_back(where + ": expected an array of values or {min,max,count}");
        return spec;
    }
    check_keys(v, {"min", "max", "count"}, where, errors);
    if (!v.contains("min") || !v.contains("max") || !v.contains("count") || !positive_number(v["min"]) ||
        !positive_number(v["max"]) || !v["count"].is_number_integer() || v["count"].get<int>() < 1) {
        errors.push_back(where + ": need positive min, max and an integer count >= 1");
        return spec;
    }
    spec.min = v["min"].get<double>();
    spec.max = v["max"].get<double>();
    spec.count = v["count"].get<int>();
    if (spec.max < spec.min) errors.push_back(where + ": max must be >= min");
    return spec;
}

}  // namespace detail

/// Parses and cross-validates a scenario document. Every violation found is
/// collected; the error message lists them all.
inline Scenario parse_scenario(const nlohmann::json& doc) {
    std::vector<std::string> errors;
    Scenario sc;

    if (!doc.is_object()) throw ValidationError("scenario: document must be a JSON object");
    detail::check_keys(doc, {"schema", "name", "group", "space", "action", "options"}, "scenario", errors);
    if (!doc.contains("schema") || !doc["schema"].is_number_integer() ||
        doc["schema"].get<int>() != kScenarioSchema)
        errors.push_back("scenario: missing or unsupported 'schema' (expected " + std::to_string(kScenarioSchema) + ")");
    if (doc.contains("name") && doc["name"].is_string())
        sc.name = doc["name"].get<std::string>();
    else
        errors.push_back("scenario: 'name' must be a string");

    // Group.
    std::optional<FiniteGroupTable> group;
    if (!doc.contains("group") || !doc["group"].is_object()) {
        errors.push_back("group: required object with 'preset' or 'order'+'table'");
    } else {
        const auto& g = doc["group"];
        detail::check_keys(g, {"preset", "order", "table"}, "group", errors);
        try {
            if (g.contains("preset")) {
                if (g.contains("order") || g.contains("table"))
                    errors.push_back("group: give either 'preset' or an explicit table, not both");
                group = group_preset(g["preset"].get<std::string>());
            } else if (g.contains("order") && g.contains("table")) {
                const int order = g["order"].get<int>();
                std::vector<int> flat = g["table"].get<std::vector<int>>();
                if (static_cast<int>(flat.size()) != order * order)
                    errors.push_back("group: 'table' must hold order^2 row-major entries");
                else
                    group = FiniteGroupTable::from_flat(order, std::move(flat));
            } else {
                errors.push_back("group: need 'preset' or 'order'+'table'");
            }
        } catch (const ValidationError& e) {
            errors.push_back(std::string("group: ") + e.what());
        } catch (const nlohmann::json::exception& e) {
            errors.push_back(std::string("group: malformed field: ") + e.what());
        }
    }

    // Space.
    std::optional<DiscreteSpace> space;
    if (!doc.contains("space") || !doc["space"].is_object()) {
        errors.push_back("space: required object with 'analytic' or 'points'");
    } else {
        const auto& s = doc["space"];
        detail::check_keys(s, {"analytic", "points", "edges"}, "space", errors);
        try {
            if (s.contains("analytic")) {
                if (s.contains("points") || s.contains("edges"))
                    errors.push_back("space: give either 'analytic' or explicit 'points'/'edges', not both");
                const auto& tag = s["analytic"];
                detail::check_keys(tag, {"kind", "size"}, "space.analytic", errors);
                const std::string kind = tag.at("kind").get<std::string>();
                const int size = tag.at("size").get<int>();
                if (kind == "circle")
                    space = make_circle(size);
                else if (kind == "torus")
                    space = make_torus(size);
                else if (kind == "sphere")
                    space = make_sphere(size);
                else
                    errors.push_back("space.analytic: unknown kind '" + kind + "'");
            } else if (s.contains("points")) {
                DiscreteSpace sp;
                sp.weights = s["points"].get<std::vector<double>>();
                if (s.contains("edges"))
                    for (const auto& e : s["edges"]) {
                        if (!e.is_array() || e.size() != 3) {
                            errors.push_back("space.edges: each edge must be [a, b, weight]");
                            break;
                        }
                        sp.edges.push_back({e[0].get<int>(), e[1].get<int>(), e[2].get<double>()});
                    }
                ValidationReport rep = validate_space(sp);
                if (!rep.ok)
                    errors.push_back(rep.message);
                else
                    space = std::move(sp);
            } else {
                errors.push_back("space: need 'analytic' or 'points'");
            }
        } catch (const ValidationError& e) {
            errors.push_back(std::string("space: ") + e.what());
        } catch (const nlohmann::json::exception& e) {
            errors.push_back(std::string("space: malformed field: ") + e.what());
        }
    }

    // Options.
    if (doc.contains("options")) {
        const auto& o = doc["options"];
        if (!o.is_object()) {
            errors.push_back("options: must be an object");
        } else {
            detail::check_keys(o,
                               {"cluster_rel_tol", "ell_grid", "beta_grid", "toy_truncation", "heat_fit", "spectra",
                                "rng_seed"},
                               "options", errors);
            try {
                if (o.contains("cluster_rel_tol")) {
                    if (!detail::positive_number(o["cluster_rel_tol"]))
                        errors.push_back("options.cluster_rel_tol: must be a positive number");
                    else
                        sc.options.cluster_rel_tol = o["cluster_rel_tol"].get<double>();
                }
                if (o.contains("ell_grid")) sc.options.ell_grid = detail::parse_grid(o["ell_grid"], "options.ell_grid", errors);
                if (o.contains("beta_grid"))
                    sc.options.beta_grid = detail::parse_grid(o["beta_grid"], "options.beta_grid", errors);
                if (o.contains("toy_truncation")) {
                    if (!o["toy_truncation"].is_number_integer() || o["toy_truncation"].get<int>() < 0)
                        errors.push_back("options.toy_truncation: must be a nonnegative integer");
                    else
                        sc.options.toy_truncation = o["toy_truncation"].get<int>();
                }
                if (o.contains("heat_fit")) {
                    const auto& h = o["heat_fit"];
                    detail::check_keys(h, {"dimension", "beta_min", "beta_max", "samples"}, "options.heat_fit", errors);
                    HeatFitSpec spec;
                    spec.dimension = h.at("dimension").get<int>();
                    spec.beta_min = h.at("beta_min").get<double>();
                    spec.beta_max = h.at("beta_max").get<double>();
                    spec.samples = h.value("samples", 16);
                    if (spec.dimension < 1 || !(spec.beta_min > 0.0) || spec.beta_max < spec.beta_min ||
                        spec.samples < 4)
                        errors.push_back("options.heat_fit: need dimension >= 1, 0 < beta_min <= beta_max, samples >= 4");
                    else
                        sc.options.heat_fit = spec;
                }
                if (o.contains("spectra")) {
                    const std::string m = o["spectra"].get<std::string>();
                    if (m != "auto" && m != "dense" && m != "analytic")
                        errors.push_back("options.spectra: must be one of auto|dense|analytic");
                    else
                        sc.options.spectra_mode = m;
                }
                if (o.contains("rng_seed")) sc.options.rng_seed = o["rng_seed"].get<unsigned long long>();
            } catch (const nlohmann::json::exception& e) {
                errors.push_back(std::string("options: malformed field: ") + e.what());
            }
        }
    }

    // Action (needs group and space).
    std::optional<GroupAction> action;
    if (group && space) {
        try {
            if (!doc.contains("action")) {
                if (group->order() == 1)
                    action = trivial_action(*space, *group);
                else
                    errors.push_back("action: required for a nontrivial group");
            } else if (!doc["action"].is_object()) {
                errors.push_back("action: must be an object with 'preset' or 'perms'");
            } else {
                const auto& a = doc["action"];
                detail::check_keys(a, {"preset", "perms"}, "action", errors);
                if (a.contains("preset"))
                    action = action_preset(a["preset"].get<std::string>(), *space, *group);
                else if (a.contains("perms")) {
                    GroupAction ga;
                    ga.perms = a["perms"].get<std::vector<std::vector<int>>>();
                    action = std::move(ga);
                } else {
                    errors.push_back("action: need 'preset' or 'perms'");
                }
            }
        } catch (const ValidationError& e) {
            errors.push_back(std::string("action: ") + e.what());
        } catch (const nlohmann::json::exception& e) {
            errors.push_back(std::string("action: malformed field: ") + e.what());
        }
        if (action) {
            ValidationReport rep = validate_action(*space, *action, *group);
            if (!rep.ok) errors.push_back(rep.message);
        }
    }

    // Spectra-route resolution.
    if (group && space) {
        const bool has_tag = space->analytic.has_value();
        const bool has_points = space->point_count() > 0;
        std::string mode = sc.options.spectra_mode;
        if (mode == "auto")
            mode = (has_tag && group->order() == 1 && (!has_points || space->point_count() > kAutoDenseLimit))
                       ? "analytic"
                       : "dense";
        if (mode == "analytic") {
            if (!has_tag) errors.push_back("options.spectra: analytic route needs an analytic space tag");
            if (group->order() != 1)
                errors.push_back("options.spectra: the analytic route supports only the trivial group");
            sc.analytic_route = true;
        } else {
            if (!has_points)
                errors.push_back("space: '" + std::string(has_tag ? analytic_kind_name(space->analytic->kind) : "?") +
                                 "' has no explicit points; only the analytic route (trivial group) is supported");
            sc.analytic_route = false;
        }
    }

    if (!errors.empty()) {
        std::string msg = "scenario validation failed:";
        for (const std::string& e : errors) msg += "\n  - " + e;
        throw ValidationError(msg);
    }

    sc.group = std::move(*group);
    sc.space = std::move(*space);
    sc.action = std::move(*action);
    sc.canonical = doc;
    sc.hash = fnv1a_hex(doc.dump());
    return sc;
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario file '" + path + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("scenario parse error in '" + path + "': " + e.what());
    }
    return parse_scenario(doc);
}

// ---------------------------------------------------------------------------
// Pipeline.

struct StageSet {
    bool sectors = false;
    bool spectra = false;
    bool flow = false;
    bool observables = false;
    bool toy = false;

    static StageSet all() { return {true, true, true, true, true}; }
    bool any() const { return sectors || spectra || flow || observables || toy; }
};

inline StageSet parse_stages(const std::vector<std::string>& names) {
    StageSet s;
    for (const std::string& n : names) {
        if (n == "sectors")
            s.sectors = true;
        else if (n == "spectra")
            s.spectra = true;
        else if (n == "flow")
            s.flow = true;
        else if (n == "observables")
            s.observables = true;
        else if (n == "toy")
            s.toy = true;
        else
            throw ValidationError("unknown stage '" + n + "' (expected sectors|spectra|flow|observables|toy)");
    }
    return s;
}

struct RunReport {
    nlohmann::json doc;
};

/// Wire format for algebra elements: a per-class map of arrays of
/// [re, im] pairs.
inline nlohmann::json element_to_json(const AlgebraElement& a) {
    nlohmann::json out = nlohmann::json::object();
    for (std::size_t c = 0; c < a.comps.size(); ++c) {
        nlohmann::json arr = nlohmann::json::array();
        for (const Complex& v : a.comps[c]) arr.push_back(nlohmann::json::array({v.real(), v.imag()}));
        out["class_" + std::to_string(c)] = arr;
    }
    return out;
}

inline AlgebraElement element_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ValidationError("element: expected a per-class object");
    AlgebraElement a;
    a.comps.resize(doc.size());
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        const std::string& key = it.key();
        if (key.rfind("class_", 0) != 0) throw ValidationError("element: unknown sector key '" + key + "'");
        const std::size_t c = std::stoul(key.substr(6));
        if (c >= a.comps.size()) throw ValidationError("element: sector index out of range in '" + key + "'");
        for (const auto& pair : it.value()) {
            if (!pair.is_array() || pair.size() != 2) throw ValidationError("element: entries must be [re, im]");
            a.comps[c].emplace_back(pair[0].get<double>(), pair[1].get<double>());
        }
    }
    return a;
}

/// Default log beta grid spanning the spectrum: Z near the mode count at the
/// low end, near the kernel dimension at the high end.
inline std::vector<double> default_beta_grid(double lambda_min_positive, double lambda_max, int count = 33) {
    double lo = 0.1, hi = 10.0;
    if (lambda_max > 0.0 && lambda_min_positive > 0.0) {
        lo = 0.1 / lambda_max;
        hi = 10.0 / lambda_min_positive;
    }
    std::vector<double> grid(count);
    if (count == 1) {
        grid[0] = lo;
        return grid;
    }
    const double llo = std::log(lo), lhi = std::log(hi);
    for (int i = 0; i < count; ++i)
        grid[i] = std::exp(llo + (lhi - llo) * static_cast<double>(i) / static_cast<double>(count - 1));
    return grid;
}

/// Smallest positive eigenvalue of an analytic spectrum (for default grids).
inline double lambda_min_positive_analytic(const AnalyticSpectrum& spec) {
    const int n = spec.tag.size;
    switch (spec.tag.kind) {
        case AnalyticKind::circle: return 2.0 - 2.0 * std::cos(2.0 * kPi / n);
        case AnalyticKind::torus: {
            const double h = 2.0 * kPi / n;
            const double s = std::sin(kPi / n);
            return 4.0 * s * s / (h * h);
        }
        case AnalyticKind::sphere: return n >= 1 ? 2.0 : 0.0;
    }
    return 0.0;
}

inline RunReport run_scenario(const Scenario& sc, StageSet requested) {
    // Dependency closure.
    if (requested.flow || requested.observables) requested.spectra = true;
    if (requested.spectra) requested.sectors = true;

    nlohmann::json stages = nlohmann::json::object();
    std::optional<SectorChart> chart;
    std::optional<ModeBasis> basis;
    std::optional<AnalyticSpectrum> aspec;

    if (requested.sectors) {
        nlohmann::json sec = nlohmann::json::object();
        if (sc.analytic_route) {
            sec["analytic_only"] = true;
            sec["class_count"] = 1;
            sec["kind"] = analytic_kind_name(sc.space.analytic->kind);
            sec["size"] = sc.space.analytic->size;
        } else {
            chart = sector_chart(sc.space, sc.action, sc.group);
            sec["analytic_only"] = false;
            sec["abelian"] = chart->abelian;
            sec["class_count"] = chart->class_count();
            if (!chart->fusion_note.empty()) sec["note"] = chart->fusion_note;
            nlohmann::json classes = nlohmann::json::array();
            for (const Sector& s : chart->sectors) {
                nlohmann::json c;
                c["class"] = s.class_index;
                c["representative"] = s.representative;
                c["class_size"] = chart->conjugacy.classes[s.class_index].size();
                c["centralizer_size"] = s.centralizer_size;
                c["locus_size"] = s.locus.size();
                classes.push_back(c);
            }
            sec["classes"] = classes;
            nlohmann::json inter = nlohmann::json::array();
            for (int i = 0; i < chart->class_count(); ++i) {
                nlohmann::json row = nlohmann::json::array();
                for (int j = 0; j < chart->class_count(); ++j) row.push_back(chart->intersections[i][j].size());
                inter.push_back(row);
            }
            sec["intersection_sizes"] = inter;
        }
        stages["sectors"] = sec;
    }

    if (requested.spectra) {
        nlohmann::json sp = nlohmann::json::object();
        if (sc.analytic_route) {
            aspec = analytic_spectrum(*sc.space.analytic);
            sp["mode"] = "analytic";
            sp["kind"] = analytic_kind_name(aspec->tag.kind);
            sp["size"] = aspec->tag.size;
            sp["lambda_max"] = aspec->lambda_max();
            sp["mode_count"] = aspec->mode_count();
            const auto clusters = aspec->clusters(100000);
            if (!clusters.empty()) {
                nlohmann::json rows = nlohmann::json::array();
                for (const auto& [lam, mult] : clusters) rows.push_back(nlohmann::json::array({lam, mult}));
                sp["clusters"] = rows;
            }
        } else {
            basis = decompose_chart(sc.space, *chart, sc.options.cluster_rel_tol);
            sp["mode"] = "dense";
            sp["cluster_rel_tol"] = sc.options.cluster_rel_tol;
            sp["lambda_max"] = basis->lambda_max();
            sp["lambda_min_positive"] = basis->lambda_min_positive();
            sp["total_modes"] = basis->total_modes();
            nlohmann::json sectors = nlohmann::json::array();
            for (int s = 0; s < basis->sector_count(); ++s) {
                const SectorModes& sm = basis->sectors[s];
                nlohmann::json one;
                one["class"] = s;
                one["dimension"] = sm.dimension();
                one["cluster_count"] = sm.clusters.size();
                nlohmann::json modes = nlohmann::json::array();
                for (const Mode& m : sm.modes) modes.push_back(nlohmann::json::array({m.eigenvalue, m.cluster}));
                one["modes"] = modes;
                sectors.push_back(one);
            }
            sp["sectors"] = sectors;
        }
        stages["spectra"] = sp;
    }

    if (requested.flow) {
        nlohmann::json fl = nlohmann::json::object();
        if (sc.analytic_route) {
            fl["skipped"] = true;
            fl["notice"] = "flow needs a dense mode basis; the analytic route carries only closed-form spectra";
        } else {
            std::vector<double> grid = sc.options.ell_grid.resolve_log(default_ell_grid(*basis));
            std::mt19937_64 rng(sc.options.rng_seed);
            const AlgebraElement probe_a = random_element(*chart, rng);
            const AlgebraElement probe_b = random_element(*chart, rng);
            const FlowReport rep = flow_sweep(*basis, *chart, grid, probe_a, probe_b);
            fl["probe_seed"] = sc.options.rng_seed;
            fl["probes"] = {{"a", element_to_json(probe_a)}, {"b", element_to_json(probe_b)}};
            fl["fixed_tol"] = rep.fixed_tol;
            fl["ell_grid"] = rep.ell_grid;
            nlohmann::json rows = nlohmann::json::array();
            for (const auto& r : rep.rows) {
                nlohmann::json row;
                row["ell"] = r.ell;
                row["cutoff"] = r.cutoff;
                row["retained"] = r.retained;
                row["mult_defect"] = r.mult_defect;
                row["idem_defect"] = r.idem_defect;
                rows.push_back(row);
            }
            fl["rows"] = rows;
            fl["idempotent_fixed"] = std::vector<int>(rep.idempotent_fixed.begin(), rep.idempotent_fixed.end());
        }
        stages["flow"] = fl;
    }

    if (requested.observables) {
        nlohmann::json obs = nlohmann::json::object();
        PartitionTable table;
        if (sc.analytic_route) {
            const std::vector<double> betas = sc.options.beta_grid.resolve_log(
                default_beta_grid(lambda_min_positive_analytic(*aspec), aspec->lambda_max()));
            table = partition_table(*aspec, betas);
        } else {
            const std::vector<double> betas = sc.options.beta_grid.resolve_log(
                default_beta_grid(basis->lambda_min_positive(), basis->lambda_max()));
            table = partition_table(*basis, betas);
        }
        nlohmann::json part;
        part["beta_grid"] = table.beta_grid;
        part["total"] = table.total;
        part["per_class"] = table.per_class;
        part["lambda_max"] = table.lambda_max;
        part["mode_count"] = table.mode_count;
        obs["partition"] = part;

        if (sc.options.heat_fit) {
            const HeatFitSpec& h = *sc.options.heat_fit;
            GridSpec window;
            window.min = h.beta_min;
            window.max = h.beta_max;
            window.count = h.samples;
            const std::vector<double> betas = window.resolve_log({});
            nlohmann::json hf;
            hf["dimension"] = h.dimension;
            hf["window"] = nlohmann::json::array({h.beta_min, h.beta_max});
            hf["samples"] = h.samples;
            try {
                const PartitionTable fit_table =
                    sc.analytic_route ? partition_table(*aspec, betas) : partition_table(*basis, betas);
                const HeatFit fit = heat_fit(fit_table, h.dimension);
                hf["leading"] = fit.leading;
                hf["constant"] = fit.constant;
                hf["residual"] = fit.residual;
            } catch (const ValidationError& e) {
                hf["rejected"] = e.what();
            }
            obs["heat_fit"] = hf;
        }

        if (!sc.analytic_route) {
            const SmoothLimitReport sl =
                smooth_limit_compare(sc.space, sc.action, sc.group, table.beta_grid, sc.options.cluster_rel_tol);
            nlohmann::json slj;
            slj["trivial_group"] = sl.trivial_group;
            slj["max_untwisted_diff"] = sl.max_untwisted_diff;
            slj["max_invariant_diff"] = sl.max_invariant_diff;
            obs["smooth_limit"] = slj;
        }
        stages["observables"] = obs;
    }

    if (requested.toy) {
        nlohmann::json toy = nlohmann::json::object();
        if (sc.options.toy_truncation < 0) {
            toy["skipped"] = true;
            toy["notice"] = "scenario has no toy_truncation option";
        } else {
            const ModeBasis toy_basis = toy_mode_basis(sc.options.toy_truncation);
            std::vector<double> grid = sc.options.ell_grid.resolve_log(default_ell_grid(toy_basis));
            const ToyCrossCheck cc = toy_cross_check(sc.options.toy_truncation, grid);
            toy["truncation"] = cc.truncation;
            toy["trials"] = cc.trials;
            toy["max_deviation"] = cc.max_deviation;
            toy["pass"] = cc.pass;
        }
        stages["toymodel"] = toy;
    }

    RunReport report;
    report.doc["schema"] = 1;
    report.doc["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
    report.doc["scenario"] = {{"name", sc.name}, {"hash", sc.hash}};
    report.doc["stages"] = stages;
    return report;
}

// ---------------------------------------------------------------------------
// Emission.

inline void emit_json(const RunReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << report.doc.dump(2) << "\n";
    if (!out) throw IoError("failed writing '" + path + "'");
}

inline RunReport read_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open report '" + path + "'");
    RunReport report;
    try {
        in >> report.doc;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("report parse error in '" + path + "': " + e.what());
    }
    if (!report.doc.is_object() || !report.doc.contains("tool") || !report.doc.contains("stages"))
        throw ValidationError("report '" + path + "' is not an orbifoldlab report");
    return report;
}

namespace detail {

inline std::string csv_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

}  // namespace detail

/// Writes spectra.csv / flow.csv / partition.csv for whichever stages are
/// present, plus a manifest.json; returns the file names written.
inline std::vector<std::string> emit_csv_bundle(const RunReport& report, const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
    std::vector<std::string> files;
    const nlohmann::json& stages = report.doc.at("stages");

    auto open = [&](const std::string& name) {
        std::ofstream out(fs::path(dir) / name, std::ios::binary);
        if (!out) throw IoError("cannot open '" + name + "' for writing in '" + dir + "'");
        return out;
    };

    if (stages.contains("spectra")) {
        std::ofstream out = open("spectra.csv");
        out << "sector,mode_index,eigenvalue,cluster_id\n";
        const auto& sp = stages["spectra"];
        if (sp["mode"] == "dense") {
            for (const auto& sector : sp["sectors"]) {
                const int s = sector["class"].get<int>();
                int idx = 0;
                for (const auto& m : sector["modes"])
                    out << s << "," << idx++ << "," << detail::csv_num(m[0].get<double>()) << ","
                        << m[1].get<int>() << "\n";
            }
        } else if (sp.contains("clusters")) {
            int idx = 0;
            for (const auto& c : sp["clusters"]) {
                out << 0 << "," << idx << "," << detail::csv_num(c[0].get<double>()) << "," << idx << "\n";
                ++idx;
            }
        }
        files.push_back("spectra.csv");
    }

    if (stages.contains("flow") && !stages["flow"].value("skipped", false)) {
        std::ofstream out = open("flow.csv");
        const auto& fl = stages["flow"];
        out << "ell,cutoff";
        const std::size_t nsec = fl["rows"].empty() ? 0 : fl["rows"][0]["retained"].size();
        for (std::size_t s = 0; s < nsec; ++s) out << ",retained_" << s;
        out << ",mult_defect,idem_defect\n";
        for (const auto& r : fl["rows"]) {
            out << detail::csv_num(r["ell"].get<double>()) << "," << detail::csv_num(r["cutoff"].get<double>());
            for (const auto& c : r["retained"]) out << "," << c.get<int>();
            out << "," << detail::csv_num(r["mult_defect"].get<double>()) << ","
                << detail::csv_num(r["idem_defect"].get<double>()) << "\n";
        }
        files.push_back("flow.csv");
    }

    if (stages.contains("observables") && stages["observables"].contains("partition")) {
        std::ofstream out = open("partition.csv");
        const auto& part = stages["observables"]["partition"];
        const auto& betas = part["beta_grid"];
        const auto& total = part["total"];
        const auto& per_class = part["per_class"];
        out << "beta,Z";
        for (std::size_t c = 0; c < per_class.size(); ++c) out << ",Z_class" << c;
        out << "\n";
        for (std::size_t i = 0; i < betas.size(); ++i) {
            out << detail::csv_num(betas[i].get<double>()) << "," << detail::csv_num(total[i].get<double>());
            for (std::size_t c = 0; c < per_class.size(); ++c)
                out << "," << detail::csv_num(per_class[c][i].get<double>());
            out << "\n";
        }
        files.push_back("partition.csv");
    }

    nlohmann::json manifest;
    manifest["tool"] = report.doc.at("tool");
    manifest["scenario"] = report.doc.at("scenario");
    manifest["files"] = files;
    std::vector<std::string> present;
    for (auto it = stages.begin(); it != stages.end(); ++it) present.push_back(it.key());
    manifest["stages_present"] = present;
    {
        std::ofstream out = open("manifest.json");
        out << manifest.dump(2) << "\n";
    }
    files.push_back("manifest.json");
    return files;
}

}  // namespace orbifold
