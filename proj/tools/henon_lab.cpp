#include "henon/map_spec.hpp"
#include "henon/parallel.hpp"
#include "henon/report.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>

using namespace henon;

namespace {

struct RunConfig {
    std::vector<std::string> map_specs;
    int period = 1;
    double box = 0.0;  // 0: escape radius of the map
    int seed_grid = 24;
    int saddle_index = 0;
    int n_series = 60;
    int n_samples = 1024;
    std::vector<double> r_schedule;
    double radius = 0.0;  // render-slice / analyze; 0: |lambda|
    int m = 1024;
    double tol = 1e-10;
    int n_max = 1000;
    int n_rays = 256;
    double g_start = 1.0;
    double g_stop = 1e-6;
    double land_tol = 1e-3;
    std::string z;
    std::string qx, qy;
    int j_min = -6;
    int j_max = 6;
    int threads = 0;
    std::string out_dir = ".";
    double hue_per_log = Palette{}.hue_per_log;
    bool timing = false;
};

void validate(const RunConfig& c) {
    if (c.m < 64 || c.m > 8192 || (c.m & (c.m - 1)) != 0)
        throw CLI::ValidationError("--m", "must be a power of two between 64 and 8192");
    if (!(c.tol > 0) || !(c.land_tol > 0) || !(c.g_stop > 0) || !(c.g_start > c.g_stop))
        throw CLI::ValidationError("tolerances", "must be positive with g-start > g-stop");
    if (c.period < 1) throw CLI::ValidationError("--period", "must be >= 1");
    for (double r : c.r_schedule)
        if (!(r > 0)) throw CLI::ValidationError("--r", "radii must be positive");
}

Json config_echo(const RunConfig& c) {
    // thread count is deliberately absent: reports must not depend on it
    Json j{{"maps", c.map_specs}, {"period", c.period},       {"seed_grid", c.seed_grid},
           {"saddle_index", c.saddle_index}, {"n_series", c.n_series}, {"n_samples", c.n_samples},
           {"m", c.m},         {"tol", c.tol},              {"n_max", c.n_max},
           {"n_rays", c.n_rays}, {"G_start", c.g_start},    {"G_stop", c.g_stop},
           {"land_tol", c.land_tol}, {"hue_per_log", c.hue_per_log}};
    if (c.box > 0) j["box"] = c.box;
    if (!c.r_schedule.empty()) j["r_schedule"] = c.r_schedule;
    if (c.radius > 0) j["radius"] = c.radius;
    return j;
}

struct Pipeline {
    HenonMap map;
    std::optional<HenonMap> inverse;  // set when |jac| > 1
    SaddleOrbit saddle;
    std::optional<UnstableChart> chart;  // normalized

    const HenonMap& analyzed() const { return inverse ? *inverse : map; }
};

LeafOptions leaf_options(const RunConfig& c) {
    LeafOptions opt;
    opt.n_max = c.n_max;
    return opt;
}

Pipeline build_pipeline(const RunConfig& c, Json& doc) {
    Pipeline p{parse_map(c.map_specs), std::nullopt, {}, std::nullopt};
    doc["map"] = to_json(p.map);
    if (std::abs(p.map.jac()) > 1.0) {
        p.inverse = make_henon(p.map.inverse_conjugate().map->factors());
        doc["analyzed_map"] = Json{{"kind", "inverse"}, {"map", to_json(*p.inverse)}};
    } else {
        doc["analyzed_map"] = Json{{"kind", "forward"}};
    }
    const HenonMap& g = p.analyzed();
    const double box = c.box > 0 ? c.box : g.escape_radius();
    const auto saddles = find_saddles(g, c.period, box, c.seed_grid);
    if (saddles.empty()) throw MapError("no saddle orbit of period dividing " + std::to_string(c.period));
    if (c.saddle_index < 0 || c.saddle_index >= static_cast<int>(saddles.size()))
        throw MapError("--saddle-index out of range (found " + std::to_string(saddles.size()) + " saddles)");
    p.saddle = saddles[static_cast<std::size_t>(c.saddle_index)];
    doc["saddle"] = to_json(p.saddle);
    doc["saddle_count"] = saddles.size();
    p.chart = normalize_chart(solve_chart(g, p.saddle, c.n_series), c.n_samples, leaf_options(c));
    return p;
}

VerdictParams verdict_params(const RunConfig& c) {
    VerdictParams vp;
    vp.r_schedule = c.r_schedule;
    vp.m = c.m;
    vp.tol = c.tol;
    vp.n_max = c.n_max;
    vp.n_samples = c.n_samples;
    return vp;
}

void print_saddle(const SaddleOrbit& s) {
    std::cout << "saddle " << format_complex(s.base().x) << ", " << format_complex(s.base().y)
              << "  period " << s.period << "  lambda_u " << format_complex(s.lam_u) << "  lambda_s "
              << format_complex(s.lam_s) << "\n";
}

int cmd_fixed_points(const RunConfig& c, Json& doc) {
    const HenonMap map = parse_map(c.map_specs);
    doc["map"] = to_json(map);
    const double box = c.box > 0 ? c.box : map.escape_radius();
    Json orbits = Json::array();
    for (const PeriodicOrbit& o : find_periodic(map, c.period, box, c.seed_grid)) {
        const Classification cls = classify(map, o.points, o.period);
        orbits.push_back(to_json(o, cls));
        std::cout << to_string(cls.kind) << "  period " << o.period << "  " << format_complex(o.points[0].x)
                  << ", " << format_complex(o.points[0].y) << "  |l1| " << std::abs(cls.lambda1) << "  |l2| "
                  << std::abs(cls.lambda2) << "\n";
    }
    doc["orbits"] = orbits;
    doc["search"] = Json{{"box", box}, {"seed_grid", c.seed_grid}, {"period", c.period}};
    return 0;
}

int cmd_chart(const RunConfig& c, Json& doc) {
    const Pipeline p = build_pipeline(c, doc);
    Json diag = chart_diagnostics(*p.chart, c.n_samples, leaf_options(c));
    Json norms = Json::array();
    for (int j = 1; j <= p.saddle.period; ++j) norms.push_back(g_norm(*p.chart, j, c.n_samples, leaf_options(c)));
    diag["g_norm"] = norms;
    doc["chart"] = diag;
    print_saddle(p.saddle);
    std::cout << "alpha " << p.chart->alpha << "  rho_val " << p.chart->rho_val << "\n";
    return 0;
}

int cmd_slice(const RunConfig& c, Json& doc, bool full) {
    const Pipeline p = build_pipeline(c, doc);
    const double r = c.radius > 0 ? c.radius : std::abs(p.chart->multiplier);
    const VerdictParams vp = verdict_params(c);
    SliceAnalysis a;
    if (full) {
        a = analyze_slice(*p.chart, r, c.m, vp);
        doc["slice"] = to_json(a.report);
    } else {
        a.raster = rasterize_slice(*p.chart, r, c.m, c.tol, c.n_max);
        a.report = label_components(a.raster);
        doc["slice"] = Json{{"r", r},
                            {"m", c.m},
                            {"n_kplus", a.report.n_kplus},
                            {"n_uplus", a.report.n_uplus},
                            {"undetermined", a.report.undetermined},
                            {"undetermined_fraction", a.report.undetermined_fraction}};
    }
    doc["slice"]["tol"] = c.tol;
    doc["slice"]["n_max"] = c.n_max;
    write_ppm(a.raster, Palette{c.hue_per_log}, std::filesystem::path(c.out_dir) / "slice.ppm");
    std::cout << "r " << r << "  K+ components " << a.report.n_kplus << "  U+ components " << a.report.n_uplus
              << "  undetermined " << a.report.undetermined << "\n";
    if (full)
        for (const RingLevel& ring : a.report.levels)
            std::cout << "ring " << ring.ring_radius << "  c " << ring.c << "  g " << ring.g << "\n";
    return 0;
}

int cmd_verdict(const RunConfig& c, Json& doc) {
    const Pipeline p = build_pipeline(c, doc);
    const VerdictParams vp = verdict_params(c);
    VerdictRun run = connectivity_verdict(*p.chart, vp);
    Verdict& v = run.verdict;
    v.analyzed_inverse = p.inverse.has_value();
    if (v.analyzed_inverse && v.status != VerdictStatus::Inconclusive)
        v.j_connectivity += " (analysis of the inverse map)";
    doc["verdict"] = to_json(v, vp);
    if (run.last_raster.m > 0)
        write_ppm(run.last_raster, Palette{c.hue_per_log}, std::filesystem::path(c.out_dir) / "slice.ppm");
    std::cout << to_string(v.status) << "\n" << v.reason << "\n" << v.j_connectivity << "\n";
    return v.status == VerdictStatus::Inconclusive ? 2 : 0;
}

int cmd_rays(const RunConfig& c, Json& doc) {
    const Pipeline p = build_pipeline(c, doc);
    RayOptions ro;
    ro.land_tol = c.land_tol;
    ro.leaf = leaf_options(c);
    const cx base = find_base_point(*p.chart, 1.0, c.n_samples, ro.leaf);
    const LandingStats st = landing_stats(*p.chart, c.n_rays, c.g_start, c.g_stop, base, ro);
    doc["rays"] = to_json(st, ro, c.g_start, c.g_stop);
    doc["rays"]["base_z"] = to_json(base);
    std::cout << "landed " << st.landed << "/" << st.n_rays << "  fraction " << st.fraction << "\n";
    return 0;
}

int cmd_solenoid(const RunConfig& c, Json& doc) {
    SolenoidWindow w;
    if (!c.z.empty()) {
        const Pipeline p = build_pipeline(c, doc);
        const cx z = parse_complex(c.z);
        const cx base = find_base_point(*p.chart, 1.0, c.n_samples, leaf_options(c));
        w = solenoid_coords(*p.chart, z, base, c.j_min, c.j_max, leaf_options(c));
        doc["point"] = Json{{"chart_z", to_json(z)}, {"base_z", to_json(base)}};
    } else {
        if (c.qx.empty() || c.qy.empty()) throw MapError("solenoid needs --z, or both --qx and --qy");
        const HenonMap map = parse_map(c.map_specs);
        doc["map"] = to_json(map);
        const PointC2 q{parse_complex(c.qx), parse_complex(c.qy)};
        w = solenoid_coords(map, q, c.j_min, c.j_max, c.n_max);
        doc["point"] = Json{{"q", to_json(q)}};
    }
    doc["solenoid"] = to_json(w);
    doc["solenoid"]["n_max"] = c.n_max;
    for (int j = w.j_min; j <= w.j_max; ++j)
        std::cout << j << "  " << (w.at(j) ? format_complex(*w.at(j)) : std::string("-")) << "\n";
    std::cout << "max residual " << w.max_residual() << "\n";
    return 0;
}

int cmd_selfcheck(Json& doc) {
    const HenonMap map = parse_map({"y^2;a=0.3"});
    Json checks = Json::array();
    bool all = true;
    auto check = [&](const std::string& name, bool ok, double value) {
        checks.push_back(Json{{"name", name}, {"pass", ok}, {"value", value}});
        std::cout << (ok ? "PASS " : "FAIL ") << name << "  " << value << "\n";
        all = all && ok;
    };
    const PointC2 q{0.0, 4.0};
    const double g0 = green(map, q, Side::Plus).value;
    const double g1 = green(map, map.forward(q), Side::Plus).value;
    check("green functional equation", std::abs(g1 - 2 * g0) < 1e-9 * (1 + g0), std::abs(g1 - 2 * g0));
    const auto saddles = find_saddles(map, 1, map.escape_radius(), 24);
    const bool found = !saddles.empty();
    const double lu = found ? std::abs(saddles[0].lam_u) : 0.0;
    check("saddle unstable multiplier", found && std::abs(lu - 2.4789826122551597) < 1e-6, lu);
    if (found) {
        const UnstableChart chart = normalize_chart(solve_chart(map, saddles[0], 60));
        const double m2 = max_modulus(chart, lu * lu);
        check("max modulus doubling", std::abs(m2 - 4.0) < 0.08, m2);
    }
    doc["checks"] = checks;
    return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical experiments with generalized Henon maps"};
    app.require_subcommand(1, 1);
    RunConfig c;

    auto add_common = [&](CLI::App* s, bool needs_map) {
        auto* opt = s->add_option("--map", c.map_specs, "factor \"poly;a=value\", repeat in order f1, f2, ...");
        if (needs_map) opt->required();
        s->add_option("--out", c.out_dir, "output directory");
        s->add_option("--threads", c.threads, "worker threads (default: HENON_LAB_THREADS or hardware)");
        s->add_flag("--timing", c.timing, "record wall time in the report");
    };
    auto add_search = [&](CLI::App* s) {
        s->add_option("--period", c.period, "period n");
        s->add_option("--box", c.box, "search box half-width (default: escape radius)");
        s->add_option("--seed-grid", c.seed_grid, "Newton seeds per axis");
    };
    auto add_chart = [&](CLI::App* s) {
        add_search(s);
        s->add_option("--saddle-index", c.saddle_index, "which saddle orbit to use");
        s->add_option("--series", c.n_series, "chart series order N_series");
        s->add_option("--samples", c.n_samples, "circle samples for max modulus");
        s->add_option("--n-max", c.n_max, "iteration budget N_max");
    };
    auto add_raster = [&](CLI::App* s) {
        s->add_option("--m", c.m, "raster side (power of two)");
        s->add_option("--tol", c.tol, "Green function tolerance");
        s->add_option("--hue-per-log", c.hue_per_log, "palette hue turns per unit log G");
    };

    CLI::App* fp = app.add_subcommand("fixed-points", "periodic orbits and their classification");
    add_common(fp, true);
    add_search(fp);
    CLI::App* ch = app.add_subcommand("chart", "unstable chart of a saddle and its diagnostics");
    add_common(ch, true);
    add_chart(ch);
    CLI::App* rs = app.add_subcommand("render-slice", "raster of the unstable slice");
    add_common(rs, true);
    add_chart(rs);
    add_raster(rs);
    rs->add_option("--r", c.radius, "view radius (default |lambda|)");
    CLI::App* an = app.add_subcommand("analyze", "components, ends and witnesses at one radius");
    add_common(an, true);
    add_chart(an);
    add_raster(an);
    an->add_option("--r", c.radius, "view radius (default |lambda|)");
    CLI::App* vd = app.add_subcommand("verdict", "unstable connectivity verdict");
    add_common(vd, true);
    add_chart(vd);
    add_raster(vd);
    vd->add_option("--r-schedule", c.r_schedule, "view radii (default |lambda|^1..|lambda|^6)");
    CLI::App* ry = app.add_subcommand("rays", "external ray landing statistics");
    add_common(ry, true);
    add_chart(ry);
    ry->add_option("--n-rays", c.n_rays, "number of rays");
    ry->add_option("--g-start", c.g_start, "starting level");
    ry->add_option("--g-stop", c.g_stop, "stopping level");
    ry->add_option("--land-tol", c.land_tol, "Cauchy diameter for landing");
    CLI::App* so = app.add_subcommand("solenoid", "solenoid coordinates of an escaping point");
    add_common(so, true);
    add_chart(so);
    so->add_option("--z", c.z, "chart coordinate (leaf continuation)");
    so->add_option("--qx", c.qx, "x coordinate of a point in C^2");
    so->add_option("--qy", c.qy, "y coordinate of a point in C^2");
    so->add_option("--j-min", c.j_min, "window start");
    so->add_option("--j-max", c.j_max, "window end");
    CLI::App* sc = app.add_subcommand("selfcheck", "quick numerical self-test");
    add_common(sc, false);

    try {
        app.parse(argc, argv);
        validate(c);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << app.help();
        return 1;
    }

    try {
        if (c.threads > 0) set_thread_count(c.threads);
        std::filesystem::create_directories(c.out_dir);
        CLI::App* sub = app.get_subcommands().front();
        const std::string name = sub->get_name();
        Json doc = new_document(name);
        doc["config"] = config_echo(c);
        const auto t0 = std::chrono::steady_clock::now();
        int code = 0;
        if (name == "fixed-points") code = cmd_fixed_points(c, doc);
        else if (name == "chart") code = cmd_chart(c, doc);
        else if (name == "render-slice") code = cmd_slice(c, doc, false);
        else if (name == "analyze") code = cmd_slice(c, doc, true);
        else if (name == "verdict") code = cmd_verdict(c, doc);
        else if (name == "rays") code = cmd_rays(c, doc);
        else if (name == "solenoid") code = cmd_solenoid(c, doc);
        else code = cmd_selfcheck(doc);
        if (c.timing)
            doc["timing"] = Json{{"seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()},
                                 {"threads", thread_count()}};
        write_report(doc, std::filesystem::path(c.out_dir) / "report.json");
        return code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
