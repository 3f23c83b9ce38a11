#include "henon/slice_topology.hpp"

#include "henon/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace henon {

int SliceRaster::disk_cells() const {
    int n = 0;
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i) n += in_disk(i, j) ? 1 : 0;
    return n;
}

int SliceRaster::undetermined_cells() const {
    int n = 0;
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i)
            if (in_disk(i, j) && cls[index(i, j)] == CellClass::Undetermined) ++n;
    return n;
}

double SliceRaster::undetermined_fraction() const {
    const int total = disk_cells();
    return total ? static_cast<double>(undetermined_cells()) / total : 0.0;
}

SliceRaster rasterize_slice(const UnstableChart& chart, double r, int m, double tol, int n_max) {
    if (m < 64) throw MapError("raster resolution must be >= 64");
    if (!(r > 0.0)) throw MapError("raster radius must be positive");
    SliceRaster raster;
    raster.r = r;
    raster.m = m;
    raster.tol = tol;
    raster.n_max = n_max;
    const std::size_t cells = static_cast<std::size_t>(m) * m;
    raster.green.assign(cells, 0.0);
    raster.cls.assign(cells, CellClass::Undetermined);
    raster.steps.assign(cells, 0);
    LeafOptions opt;
    opt.n_max = n_max;
    parallel_for(static_cast<std::size_t>(m), [&](std::size_t row) {
        const int j = static_cast<int>(row);
        for (int i = 0; i < m; ++i) {
            const std::size_t idx = raster.index(i, j);
            const GreenValue g = leaf_green(chart, raster.center(i, j), opt);
            raster.green[idx] = g.value;
            raster.steps[idx] = g.steps;
            if (g.fate == Fate::Bounded) raster.cls[idx] = CellClass::Kplus;
            else if (g.fate == Fate::Escaped && g.value > tol) raster.cls[idx] = CellClass::Uplus;
            else raster.cls[idx] = CellClass::Undetermined;
        }
    });
    return raster;
}

SliceRaster make_raster(double r, int m, std::vector<CellClass> cls, std::vector<double> green) {
    const std::size_t cells = static_cast<std::size_t>(m) * m;
    if (cls.size() != cells || green.size() != cells) throw MapError("raster data size mismatch");
    SliceRaster raster;
    raster.r = r;
    raster.m = m;
    raster.cls = std::move(cls);
    raster.green = std::move(green);
    raster.steps.assign(cells, 0);
    return raster;
}

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (a < b) parent[static_cast<std::size_t>(b)] = a;
        else parent[static_cast<std::size_t>(a)] = b;
    }
};

// Labels cells where member(i, j) holds; returns dense labels in scan order (-1 elsewhere).
template <typename Member>
std::vector<int> label_mask(int m, Member member, bool eight, int& count) {
    const std::size_t cells = static_cast<std::size_t>(m) * m;
    UnionFind uf(cells);
    std::vector<char> in(cells, 0);
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i) in[static_cast<std::size_t>(j) * m + i] = member(i, j) ? 1 : 0;
    auto id = [m](int i, int j) { return j * m + i; };
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i) {
            if (!in[static_cast<std::size_t>(id(i, j))]) continue;
            if (i > 0 && in[static_cast<std::size_t>(id(i - 1, j))]) uf.unite(id(i, j), id(i - 1, j));
            if (j > 0 && in[static_cast<std::size_t>(id(i, j - 1))]) uf.unite(id(i, j), id(i, j - 1));
            if (eight && j > 0) {
                if (i > 0 && in[static_cast<std::size_t>(id(i - 1, j - 1))]) uf.unite(id(i, j), id(i - 1, j - 1));
                if (i + 1 < m && in[static_cast<std::size_t>(id(i + 1, j - 1))]) uf.unite(id(i, j), id(i + 1, j - 1));
            }
        }
    std::vector<int> dense(cells, -1);
    std::vector<int> labels(cells, -1);
    count = 0;
    for (std::size_t c = 0; c < cells; ++c) {
        if (!in[c]) continue;
        const int root = uf.find(static_cast<int>(c));
        int& d = dense[static_cast<std::size_t>(root)];
        if (d < 0) d = count++;
        labels[c] = d;
    }
    return labels;
}

bool on_boundary(const SliceRaster& raster, int i, int j) {
    for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di) {
            const int a = i + di, b = j + dj;
            if (a < 0 || b < 0 || a >= raster.m || b >= raster.m) return true;
            if (!raster.in_disk(a, b)) return true;
        }
    return false;
}

std::vector<double> log_grid(double lo, double hi, int k) {
    std::vector<double> s;
    for (int i = 1; i <= k; ++i) s.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / k));
    return s;
}

}  // namespace

ComponentReport label_components(const SliceRaster& raster) {
    ComponentReport rep;
    rep.r = raster.r;
    rep.m = raster.m;
    const int m = raster.m;
    auto is = [&](CellClass c) {
        return [&raster, c](int i, int j) {
            return raster.in_disk(i, j) && raster.cls[raster.index(i, j)] == c;
        };
    };
    int nk = 0, nu = 0;
    const std::vector<int> kl = label_mask(m, is(CellClass::Kplus), false, nk);
    const std::vector<int> ul = label_mask(m, is(CellClass::Uplus), true, nu);
    rep.n_kplus = nk;
    rep.n_uplus = nu;
    rep.components.resize(static_cast<std::size_t>(nk + nu));
    for (int c = 0; c < nk + nu; ++c) {
        Component& comp = rep.components[static_cast<std::size_t>(c)];
        comp.id = c;
        comp.phase = c < nk ? Phase::Kplus : Phase::Uplus;
        comp.i0 = comp.j0 = std::numeric_limits<int>::max();
        comp.i1 = comp.j1 = -1;
    }
    rep.labels.assign(static_cast<std::size_t>(m) * m, -1);
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i) {
            const std::size_t idx = raster.index(i, j);
            int lab = -1;
            if (kl[idx] >= 0) lab = kl[idx];
            else if (ul[idx] >= 0) lab = nk + ul[idx];
            if (lab < 0) continue;
            rep.labels[idx] = lab;
            Component& comp = rep.components[static_cast<std::size_t>(lab)];
            ++comp.cells;
            comp.i0 = std::min(comp.i0, i);
            comp.i1 = std::max(comp.i1, i);
            comp.j0 = std::min(comp.j0, j);
            comp.j1 = std::max(comp.j1, j);
            comp.max_green = std::max(comp.max_green, raster.green[idx]);
            if (!comp.touches_boundary && on_boundary(raster, i, j)) comp.touches_boundary = true;
        }
    for (const Component& c : rep.components)
        if (c.phase == Phase::Kplus && !c.touches_boundary) rep.interior_kplus.push_back(c.id);
    rep.undetermined = raster.undetermined_cells();
    rep.undetermined_fraction = raster.undetermined_fraction();
    return rep;
}

EndRecord classify_end_samples(double ring_radius, double M_ring, const std::vector<double>& s,
                               const std::vector<double>& M) {
    EndRecord e;
    e.s = s;
    e.M = M;
    e.M_ring = M_ring;
    int finite = 0;
    double cmin = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < s.size(); ++k) {
        if (!std::isfinite(M[k])) continue;
        ++finite;
        cmin = std::min(cmin, M[k] / std::sqrt(s[k]));
    }
    if (finite < 3) {
        e.cls = EndClass::Unclassified;
        return e;
    }
    e.cls = EndClass::Decay;
    for (std::size_t k = 0; k < s.size(); ++k) {
        if (!std::isfinite(M[k])) continue;
        if (M[k] > 4.0 * M_ring * std::sqrt(ring_radius / s[k])) {
            e.cls = EndClass::Growth;
            e.t0 = s[k];
            break;
        }
    }
    if (e.cls == EndClass::Growth) e.growth_constant = cmin;
    return e;
}

void classify_ends(const SliceRaster& raster, ComponentReport& report,
                   const std::vector<double>& ring_radii) {
    const int m = raster.m;
    const double h = raster.h();
    report.levels.clear();
    for (double rr : ring_radii) {
        RingLevel level;
        level.ring_radius = rr;
        int n_ends = 0;
        const std::vector<int> el = label_mask(m, [&](int i, int j) {
            return raster.in_disk(i, j) && raster.cls[raster.index(i, j)] == CellClass::Uplus &&
                   std::abs(raster.center(i, j)) > rr;
        }, true, n_ends);
        const std::vector<double> s = log_grid(rr, 0.95 * raster.r, 8);
        struct Acc {
            bool outer = false;
            int component = -1;
            double ring_max = -1.0;
            double inner_max = -1.0;
            double min_abs = std::numeric_limits<double>::infinity();
            std::vector<double> M;
        };
        std::vector<Acc> acc(static_cast<std::size_t>(n_ends));
        for (auto& a : acc) a.M.assign(s.size(), -1.0);
        for (int j = 0; j < m; ++j)
            for (int i = 0; i < m; ++i) {
                const std::size_t idx = raster.index(i, j);
                const int e = el[idx];
                if (e < 0) continue;
                Acc& a = acc[static_cast<std::size_t>(e)];
                const double az = std::abs(raster.center(i, j));
                const double g = raster.green[idx];
                if (!a.outer && on_boundary(raster, i, j)) a.outer = true;
                if (a.component < 0) a.component = report.labels.empty() ? -1 : report.labels[idx];
                if (az - rr <= 1.5 * h) a.ring_max = std::max(a.ring_max, g);
                a.min_abs = std::min(a.min_abs, az);
                for (std::size_t k = 0; k < s.size(); ++k)
                    if (std::abs(az - s[k]) <= 0.75 * h) a.M[k] = std::max(a.M[k], g);
            }
        // fallback reference when an end does not reach the ring: its innermost cells
        for (int j = 0; j < m; ++j)
            for (int i = 0; i < m; ++i) {
                const std::size_t idx = raster.index(i, j);
                const int e = el[idx];
                if (e < 0) continue;
                Acc& a = acc[static_cast<std::size_t>(e)];
                if (std::abs(raster.center(i, j)) - a.min_abs <= 1.5 * h)
                    a.inner_max = std::max(a.inner_max, raster.green[idx]);
            }
        for (int e = 0; e < n_ends; ++e) {
            Acc& a = acc[static_cast<std::size_t>(e)];
            if (!a.outer) continue;
            std::vector<double> M(s.size());
            for (std::size_t k = 0; k < s.size(); ++k)
                M[k] = a.M[k] >= 0.0 ? a.M[k] : std::numeric_limits<double>::quiet_NaN();
            const double ref = a.ring_max >= 0.0 ? a.ring_max : std::max(a.inner_max, 0.0);
            EndRecord rec = classify_end_samples(rr, ref, s, M);
            rec.component = a.component;
            ++level.c;
            if (rec.cls == EndClass::Growth) ++level.g;
            if (rec.cls == EndClass::Unclassified) {
                ++level.unclassified;
                report.warnings.push_back("end with fewer than 3 sampled radii left unclassified");
            }
            level.ends.push_back(std::move(rec));
        }
        report.levels.push_back(std::move(level));
    }

    // M over the whole Uplus slice on the grid of the smallest ring
    if (!ring_radii.empty()) {
        const double rr = *std::min_element(ring_radii.begin(), ring_radii.end());
        report.uplus_s = log_grid(rr, 0.95 * raster.r, 8);
        report.uplus_M.assign(report.uplus_s.size(), 0.0);
        for (int j = 0; j < m; ++j)
            for (int i = 0; i < m; ++i) {
                const std::size_t idx = raster.index(i, j);
                if (!raster.in_disk(i, j) || raster.cls[idx] != CellClass::Uplus) continue;
                const double az = std::abs(raster.center(i, j));
                for (std::size_t k = 0; k < report.uplus_s.size(); ++k)
                    if (std::abs(az - report.uplus_s[k]) <= 0.75 * h)
                        report.uplus_M[k] = std::max(report.uplus_M[k], raster.green[idx]);
            }
        const double M0 = report.uplus_M.front(), M1 = report.uplus_M.back();
        if (M0 > 0.0 && M1 > 0.0)
            report.uplus_slope = std::log(M1 / M0) / std::log(report.uplus_s.back() / report.uplus_s.front());
    }
}

void evaluate_witnesses(const UnstableChart& chart, const SliceRaster& raster, ComponentReport& report,
                        const LeafOptions& opt, double min_charge, int max_candidates) {
    report.witnesses.clear();
    std::vector<int> cand = report.interior_kplus;
    std::stable_sort(cand.begin(), cand.end(), [&](int a, int b) {
        return report.components[static_cast<std::size_t>(a)].cells >
               report.components[static_cast<std::size_t>(b)].cells;
    });
    if (static_cast<int>(cand.size()) > max_candidates) {
        report.candidates_skipped = static_cast<int>(cand.size()) - max_candidates;
        cand.resize(static_cast<std::size_t>(max_candidates));
        report.warnings.push_back("interior K+ candidates beyond the evaluation cap were skipped");
    }
    const double h = raster.h();
    const int m = raster.m;
    for (int id : cand) {
        const Component& c = report.components[static_cast<std::size_t>(id)];
        for (int e = 2; e <= 6; ++e) {
            const cx lo = h * cx{c.i0 - m / 2.0 - e, m / 2.0 - c.j1 - e};
            const cx hi = h * cx{c.i1 - m / 2.0 + e, m / 2.0 - c.j0 + e};
            if (std::abs(lo) > raster.r || std::abs(hi) > raster.r ||
                std::abs(cx{lo.real(), hi.imag()}) > raster.r || std::abs(cx{hi.real(), lo.imag()}) > raster.r)
                break;
            const PolygonLoop loop{lo, cx{hi.real(), lo.imag()}, hi, cx{lo.real(), hi.imag()}};
            try {
                LoopCharge q = loop_charge(chart, loop, opt);
                if (q.value > min_charge) {
                    report.witnesses.push_back({id, c.cells, lo, hi, e, q.value, q.err});
                }
                break;
            } catch (const LeafPathError&) {
                continue;  // loop met K+; widen
            }
        }
    }
}

int g_bound(int degree, double lyap) {
    return static_cast<int>(std::floor(2.0 * std::log(static_cast<double>(degree)) / lyap));
}

namespace {

LevelSummary summarize(const ComponentReport& rep) {
    LevelSummary s;
    s.r = rep.r;
    s.m = rep.m;
    s.n_kplus = rep.n_kplus;
    s.n_uplus = rep.n_uplus;
    s.undetermined = rep.undetermined;
    s.undetermined_fraction = rep.undetermined_fraction;
    s.rings = rep.levels;
    s.witnesses = rep.witnesses;
    s.uplus_slope = rep.uplus_slope;
    return s;
}

bool overlaps(const Witness& a, const Witness& b) {
    return a.lo.real() <= b.hi.real() && b.lo.real() <= a.hi.real() && a.lo.imag() <= b.hi.imag() &&
           b.lo.imag() <= a.hi.imag();
}

}  // namespace

SliceAnalysis analyze_slice(const UnstableChart& chart, double r, int m, const VerdictParams& p) {
    SliceAnalysis run;
    run.raster = rasterize_slice(chart, r, m, p.tol, p.n_max);
    run.report = label_components(run.raster);
    classify_ends(run.raster, run.report, {r / 32.0, r / 16.0, r / 8.0});
    LeafOptions opt;
    opt.n_max = p.n_max;
    evaluate_witnesses(chart, run.raster, run.report, opt, p.min_charge);
    return run;
}

VerdictRun connectivity_verdict(const UnstableChart& chart, const VerdictParams& params) {
    VerdictRun out;
    Verdict& v = out.verdict;
    v.m = params.m;
    const double lam = std::abs(chart.multiplier);
    std::vector<double> schedule = params.r_schedule;
    if (schedule.empty())
        for (int k = 1; k <= 6; ++k) schedule.push_back(std::pow(lam, k));
    std::sort(schedule.begin(), schedule.end());
    v.g_bound = g_bound(chart.map.degree(), chart.saddle.lyap);

    auto inconclusive = [&](std::string why) {
        v.status = VerdictStatus::Inconclusive;
        v.reason = std::move(why);
        v.j_connectivity = "undecided";
    };

    if (params.m < 64) {
        inconclusive("resolution m below 64");
        return out;
    }

    for (double r : schedule) {
        SliceAnalysis run = analyze_slice(chart, r, params.m, params);
        v.levels.push_back(summarize(run.report));
        v.r_max = r;
        for (const auto& w : run.report.warnings) v.warnings.push_back(w);
        out.last_raster = std::move(run.raster);
        if (run.report.undetermined_fraction > params.max_undetermined) {
            inconclusive("undetermined cells exceed budget at r = " + std::to_string(r));
            return out;
        }
        if (!run.report.witnesses.empty()) {
            SliceAnalysis fine = analyze_slice(chart, r, 2 * params.m, params);
            v.refinement.push_back(summarize(fine.report));
            for (const Witness& w : run.report.witnesses)
                for (const Witness& wf : fine.report.witnesses)
                    if (overlaps(w, wf) && !v.witness) {
                        v.witness = w;
                        v.witness_r = r;
                    }
            if (v.witness) {
                v.status = VerdictStatus::UnstablyDisconnected;
                v.reason = "compact K+ slice component with positive loop charge, stable under doubling m";
                v.j_connectivity = "J disconnected";
                return out;
            }
            inconclusive("witness not stable under resolution doubling at r = " + std::to_string(r));
            return out;
        }
    }

    // invariants across the schedule
    struct Point {
        double rr;
        int c, g;
    };
    std::vector<Point> pts;
    for (const LevelSummary& s : v.levels)
        for (const RingLevel& rl : s.rings) {
            if (rl.g > rl.c) {
                inconclusive("g exceeds c at ring radius " + std::to_string(rl.ring_radius));
                return out;
            }
            pts.push_back({rl.ring_radius, rl.c, rl.g});
        }
    std::stable_sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) { return a.rr < b.rr; });
    for (std::size_t k = 1; k < pts.size(); ++k)
        if (pts[k].c < pts[k - 1].c || pts[k].g < pts[k - 1].g) {
            inconclusive("c or g decreases along the ring radii");
            return out;
        }
    v.g_bound_applies = true;
    int gmax = 0;
    for (const Point& pt : pts) gmax = std::max(gmax, pt.g);
    if (gmax > v.g_bound) {
        inconclusive("growth ends exceed the Lyapunov bound");
        return out;
    }
    for (const LevelSummary& s : v.levels) {
        int g = 0;
        for (const RingLevel& rl : s.rings) g = std::max(g, rl.g);
        if (g > 0 && s.uplus_slope < 0.45 * g) {
            inconclusive("U+ growth slope below g/2 with margin");
            return out;
        }
    }

    SliceAnalysis fine = analyze_slice(chart, v.r_max, 2 * params.m, params);
    v.refinement.push_back(summarize(fine.report));
    const LevelSummary& coarse = v.levels.back();
    const LevelSummary& refined = v.refinement.back();
    bool stable = coarse.witnesses.size() == refined.witnesses.size() &&
                  coarse.rings.size() == refined.rings.size();
    for (std::size_t k = 0; stable && k < coarse.rings.size(); ++k)
        stable = coarse.rings[k].c == refined.rings[k].c;
    if (!stable) {
        inconclusive("end count or witness count changes under resolution doubling");
        return out;
    }
    if (fine.report.undetermined_fraction > params.max_undetermined) {
        inconclusive("undetermined cells exceed budget in the refinement run");
        return out;
    }
    v.status = VerdictStatus::UnstablyConnectedEvidence;
    v.reason = "no compact K+ slice component up to r_max; end data within bounds and refinement-stable";
    v.j_connectivity = "J connected";
    return out;
}

std::string to_string(VerdictStatus s) {
    switch (s) {
        case VerdictStatus::UnstablyDisconnected: return "UnstablyDisconnected";
        case VerdictStatus::UnstablyConnectedEvidence: return "UnstablyConnectedEvidence";
        case VerdictStatus::Inconclusive: return "Inconclusive";
    }
    return "Inconclusive";
}

std::string to_string(EndClass c) {
    switch (c) {
        case EndClass::Growth: return "growth";
        case EndClass::Decay: return "decay";
        case EndClass::Unclassified: return "unclassified";
    }
    return "unclassified";
}

}  // namespace henon
