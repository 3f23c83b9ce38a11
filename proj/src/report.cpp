#include "henon/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace henon {

namespace {

void append_number(std::string& out, double v) {
    if (std::isnan(v)) {
        out += "\"NaN\"";
        return;
    }
    if (std::isinf(v)) {
        out += v > 0 ? "\"Infinity\"" : "\"-Infinity\"";
        return;
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v == 0.0 ? 0.0 : v);
    out += buf;
}

void append(std::string& out, const Json& j) {
    switch (j.type()) {
        case Json::value_t::object: {
            out += '{';
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {  // std::map storage: sorted keys
                if (!first) out += ',';
                first = false;
                out += Json(it.key()).dump();
                out += ':';
                append(out, it.value());
            }
            out += '}';
            break;
        }
        case Json::value_t::array: {
            out += '[';
            for (std::size_t k = 0; k < j.size(); ++k) {
                if (k) out += ',';
                append(out, j[k]);
            }
            out += ']';
            break;
        }
        case Json::value_t::number_float:
            append_number(out, j.get<double>());
            break;
        default:
            out += j.dump();
    }
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw std::runtime_error("write failed: " + path.string());
}

void hsv_to_rgb(double h, double s, double v, unsigned char rgb[3]) {
    h = h - std::floor(h);
    const double hh = h * 6.0;
    const int sector = static_cast<int>(hh) % 6;
    const double f = hh - std::floor(hh);
    const double p = v * (1 - s), q = v * (1 - s * f), t = v * (1 - s * (1 - f));
    double r = 0, g = 0, b = 0;
    switch (sector) {
        case 0: r = v, g = t, b = p; break;
        case 1: r = q, g = v, b = p; break;
        case 2: r = p, g = v, b = t; break;
        case 3: r = p, g = q, b = v; break;
        case 4: r = t, g = p, b = v; break;
        default: r = v, g = p, b = q; break;
    }
    rgb[0] = static_cast<unsigned char>(std::lround(255.0 * r));
    rgb[1] = static_cast<unsigned char>(std::lround(255.0 * g));
    rgb[2] = static_cast<unsigned char>(std::lround(255.0 * b));
}

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json("none"); }

}  // namespace

std::string canonical_json(const Json& doc) {
    std::string out;
    append(out, doc);
    return out;
}

void write_report(const Json& doc, const std::filesystem::path& path) { write_file(path, canonical_json(doc) + "\n"); }

Json new_document(const std::string& command) {
    return Json{{"schema", kSchema}, {"tool_version", kToolVersion}, {"command", command}};
}

std::string ppm_bytes(const SliceRaster& raster, const Palette& palette) {
    const int m = raster.m;
    std::string out = "P6\n" + std::to_string(m) + " " + std::to_string(m) + "\n255\n";
    const std::size_t header = out.size();
    out.resize(header + 3 * static_cast<std::size_t>(m) * m, '\0');
    for (std::size_t k = 0; k < static_cast<std::size_t>(m) * m; ++k) {
        unsigned char* px = reinterpret_cast<unsigned char*>(&out[header + 3 * k]);
        switch (raster.cls[k]) {
            case CellClass::Kplus: break;
            case CellClass::Undetermined: px[0] = 255; break;
            case CellClass::Uplus: hsv_to_rgb(palette.hue_per_log * std::log(raster.green[k]), palette.saturation, 1.0, px); break;
        }
    }
    return out;
}

void write_ppm(const SliceRaster& raster, const Palette& palette, const std::filesystem::path& path) {
    write_file(path, ppm_bytes(raster, palette));
}

Json to_json(cx z) { return Json::array({z.real(), z.imag()}); }

Json to_json(const PointC2& q) { return Json{{"x", to_json(q.x)}, {"y", to_json(q.y)}}; }

Json to_json(const HenonMap& map) {
    Json factors = Json::array();
    for (const HenonFactor& f : map.factors()) {
        Json coeffs = Json::array();
        for (int k = 0; k < f.poly.degree(); ++k) coeffs.push_back(to_json(f.poly.coeffs()[static_cast<std::size_t>(k)]));
        factors.push_back(Json{{"degree", f.poly.degree()}, {"lower_coeffs", coeffs}, {"a", to_json(f.a)}});
    }
    return Json{{"factors", factors},
                {"degree", map.degree()},
                {"jac", to_json(map.jac())},
                {"escape_radius", map.escape_radius()},
                {"text", map.describe()}};
}

Json to_json(const PeriodicOrbit& orbit, const Classification& cls) {
    Json pts = Json::array();
    for (const PointC2& p : orbit.points) pts.push_back(to_json(p));
    Json j{{"points", pts},
           {"period", orbit.period},
           {"residual", orbit.residual},
           {"kind", to_string(cls.kind)},
           {"lambda1", to_json(cls.lambda1)},
           {"lambda2", to_json(cls.lambda2)}};
    if (cls.kind == OrbitKind::Saddle) j["lyap"] = cls.saddle.lyap;
    return j;
}

Json to_json(const SaddleOrbit& s) {
    Json pts = Json::array();
    for (const PointC2& p : s.points) pts.push_back(to_json(p));
    return Json{{"points", pts},       {"period", s.period},     {"lam_u", to_json(s.lam_u)},
                {"lam_s", to_json(s.lam_s)}, {"v_u", to_json(s.v_u)}, {"v_s", to_json(s.v_s)},
                {"lyap", s.lyap},      {"residual", s.residual}};
}

Json chart_diagnostics(const UnstableChart& chart, int n_samples, const LeafOptions& opt) {
    double conj = 0.0;
    for (int k = 0; k < 64; ++k) {
        const cx z = std::polar(0.5 * chart.rho_val, 2.0 * 3.14159265358979323846 * k / 64.0);
        const PointC2 lhs = apply_n(chart.map, eval_series(chart, z), chart.period(), Direction::Forward);
        const PointC2 rhs = eval_series(chart, chart.multiplier * z);
        conj = std::max(conj, distance(lhs, rhs) / (1.0 + rhs.norm_inf()));
    }
    Json mods = Json::array();
    const double lam = std::abs(chart.multiplier);
    for (int n = 0; n <= 4; ++n) {
        const double r = std::pow(lam, n);
        mods.push_back(Json{{"r", r}, {"M", max_modulus(chart, r, n_samples, opt)}});
    }
    return Json{{"base", to_json(chart.base)},
                {"multiplier", to_json(chart.multiplier)},
                {"alpha", chart.alpha},
                {"rho_val", chart.rho_val},
                {"n_series", chart.n_series},
                {"conjugacy_residual", conj},
                {"max_modulus", mods},
                {"n_samples", n_samples},
                {"tol", opt.tol},
                {"n_max", opt.n_max}};
}

Json to_json(const Witness& w) {
    return Json{{"component", w.component}, {"cells", w.cells},   {"lo", to_json(w.lo)},
                {"hi", to_json(w.hi)},      {"expand", w.expand}, {"charge", w.charge},
                {"charge_err", w.charge_err}};
}

Json to_json(const RingLevel& ring) {
    Json ends = Json::array();
    for (const EndRecord& e : ring.ends) {
        Json je{{"component", e.component}, {"class", to_string(e.cls)}, {"M_ring", e.M_ring},
                {"s", e.s},                 {"M", Json::array()}};
        for (double v : e.M) je["M"].push_back(v);
        if (e.cls == EndClass::Growth) je["growth_constant"] = e.growth_constant;
        if (e.cls == EndClass::Decay) je["t0"] = e.t0;
        ends.push_back(je);
    }
    return Json{{"ring_radius", ring.ring_radius}, {"c", ring.c}, {"g", ring.g},
                {"unclassified", ring.unclassified}, {"ends", ends}};
}

Json to_json(const ComponentReport& rep) {
    Json comps = Json::array();
    for (const Component& c : rep.components)
        comps.push_back(Json{{"id", c.id},
                             {"phase", c.phase == Phase::Kplus ? "Kplus" : "Uplus"},
                             {"cells", c.cells},
                             {"touches_boundary", c.touches_boundary},
                             {"bbox", Json::array({c.i0, c.i1, c.j0, c.j1})},
                             {"max_green", c.max_green}});
    Json rings = Json::array(), wit = Json::array();
    for (const RingLevel& r : rep.levels) rings.push_back(to_json(r));
    for (const Witness& w : rep.witnesses) wit.push_back(to_json(w));
    return Json{{"r", rep.r},
                {"m", rep.m},
                {"n_kplus", rep.n_kplus},
                {"n_uplus", rep.n_uplus},
                {"interior_kplus", rep.interior_kplus},
                {"components", comps},
                {"rings", rings},
                {"witnesses", wit},
                {"candidates_skipped", rep.candidates_skipped},
                {"undetermined", rep.undetermined},
                {"undetermined_fraction", rep.undetermined_fraction},
                {"uplus_s", rep.uplus_s},
                {"uplus_M", rep.uplus_M},
                {"uplus_slope", rep.uplus_slope},
                {"warnings", rep.warnings}};
}

Json to_json(const LevelSummary& l) {
    Json rings = Json::array(), wit = Json::array();
    for (const RingLevel& r : l.rings) rings.push_back(to_json(r));
    for (const Witness& w : l.witnesses) wit.push_back(to_json(w));
    return Json{{"r", l.r},
                {"m", l.m},
                {"n_kplus", l.n_kplus},
                {"n_uplus", l.n_uplus},
                {"undetermined", l.undetermined},
                {"undetermined_fraction", l.undetermined_fraction},
                {"rings", rings},
                {"witnesses", wit},
                {"uplus_slope", l.uplus_slope}};
}

Json to_json(const Verdict& v, const VerdictParams& p) {
    Json levels = Json::array(), refinement = Json::array();
    for (const LevelSummary& l : v.levels) levels.push_back(to_json(l));
    for (const LevelSummary& l : v.refinement) refinement.push_back(to_json(l));
    Json j{{"status", to_string(v.status)},
           {"reason", v.reason},
           {"j_connectivity", v.j_connectivity},
           {"analyzed_map", v.analyzed_inverse ? "inverse" : "forward"},
           {"r_max", v.r_max},
           {"m", v.m},
           {"g_bound", v.g_bound},
           {"g_bound_applies", v.g_bound_applies},
           {"levels", levels},
           {"refinement", refinement},
           {"warnings", v.warnings},
           {"params",
            Json{{"r_schedule", p.r_schedule},
                 {"m", p.m},
                 {"tol", p.tol},
                 {"n_max", p.n_max},
                 {"n_samples", p.n_samples},
                 {"min_charge", p.min_charge},
                 {"max_undetermined", p.max_undetermined}}}};
    if (v.witness) {
        j["witness"] = to_json(*v.witness);
        j["witness_r"] = v.witness_r;
    }
    return j;
}

Json to_json(const LandingStats& st, const RayOptions& opt, double G_start, double G_stop) {
    Json rays = Json::array();
    for (const RayTrace& t : st.traces) {
        Json jr{{"theta", t.theta}, {"landed", t.landed}, {"samples", t.samples.size()},
                {"endpoint_diameter", t.endpoint_diameter}};
        if (t.endpoint) jr["endpoint"] = to_json(*t.endpoint);
        if (t.failure_level) {
            jr["failure_level"] = *t.failure_level;
            jr["failure"] = t.failure;
        }
        rays.push_back(jr);
    }
    return Json{{"n_rays", st.n_rays},
                {"landed", st.landed},
                {"fraction", st.fraction},
                {"G_start", G_start},
                {"G_stop", G_stop},
                {"land_tol", opt.land_tol},
                {"land_window", opt.land_window},
                {"tol", opt.leaf.tol},
                {"n_max", opt.leaf.n_max},
                {"rays", rays}};
}

Json to_json(const SolenoidWindow& w) {
    Json zs = Json::array(), res = Json::array();
    for (std::size_t k = 0; k < w.z.size(); ++k) {
        zs.push_back(w.z[k] ? to_json(*w.z[k]) : Json("none"));
        res.push_back(optional_number(w.residuals[k]));
    }
    return Json{{"j_min", w.j_min}, {"j_max", w.j_max}, {"j_entry", w.j_entry},
                {"z", zs},          {"residuals", res}, {"max_residual", w.max_residual()}};
}

}  // namespace henon
