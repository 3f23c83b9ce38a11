#include "henon/rays_solenoid.hpp"

#include "henon/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace henon {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct RayFailure {
    std::string why;
};

struct Walker {
    const UnstableChart& chart;
    const RayOptions& opt;
    cx z;
    cx L;
    int substeps = 0;

    LeafLog eval(cx at) const {
        LeafLog ll = leaf_log(chart, at, opt.leaf, true);
        if (ll.fate != Fate::Escaped || !(ll.green > 0.0)) throw RayFailure{"path reached K+"};
        return ll;
    }

    // Moves along the straight segment in L-space from the current lift to goal.
    void move_to(cx goal) {
        double cap = 0.25;
        while (L != goal) {
            if (++substeps > opt.max_substeps) throw RayFailure{"substep budget exhausted"};
            const LeafLog here = eval(z);
            double spacing = 0.0;
            nearest_lift(chart, here, L.imag(), &spacing);
            const cx deriv = lift_derivative(chart, here);
            if (deriv == cx{0.0}) throw RayFailure{"critical point of the lift"};
            const cx remaining = goal - L;
            const double dist = std::abs(remaining);
            const double len = std::min({dist, cap, 0.05 * spacing});
            const cx L_next = len >= dist ? goal : L + remaining * (len / dist);
            const cx z_pred = z + (L_next - L) / deriv;
            const double tol_abs = 1e-11 * std::max(1.0, std::abs(L_next));

            bool ok = false;
            cx zk = z_pred;
            try {
                for (int it = 0; it < opt.max_newton; ++it) {
                    const LeafLog ll = eval(zk);
                    double dk = 0.0;
                    const cx res = nearest_lift(chart, ll, L_next.imag(), &dk) - L_next;
                    if (std::abs(L_next - L) > 0.1 * dk) break;
                    if (std::abs(res) <= tol_abs) {
                        ok = true;
                        break;
                    }
                    zk -= res / lift_derivative(chart, ll);
                }
            } catch (const RayFailure&) {
                ok = false;
            }
            if (ok && std::abs(zk - z_pred) > 0.5 * std::abs(z_pred - z) + 1e-13 * (1.0 + std::abs(z)))
                ok = false;
            if (!ok) {
                cap = 0.5 * std::min(cap, len);
                if (cap < 1e-13 * (1.0 + std::abs(L))) throw RayFailure{"continuation step underflow"};
                continue;
            }
            z = zk;
            L = L_next;
            cap = std::min(2.0 * cap, 1.0);
        }
    }
};

double diameter(const std::vector<RaySample>& s, std::size_t from) {
    double d = 0.0;
    for (std::size_t a = from; a < s.size(); ++a)
        for (std::size_t b = a + 1; b < s.size(); ++b) d = std::max(d, std::abs(s[a].z - s[b].z));
    return d;
}

}  // namespace

cx find_base_point(const UnstableChart& chart, double r, int n_samples, const LeafOptions& opt) {
    const std::size_t n = static_cast<std::size_t>(std::max(8, n_samples));
    std::vector<double> g(n);
    parallel_for(n, [&](std::size_t i) {
        g[i] = leaf_green(chart, std::polar(r, kTwoPi * static_cast<double>(i) / n), opt).value;
    });
    const std::size_t best = static_cast<std::size_t>(std::max_element(g.begin(), g.end()) - g.begin());
    cx z = std::polar(r, kTwoPi * static_cast<double>(best) / n);
    const double lam = std::abs(chart.multiplier);
    for (int k = 0; k < 200; ++k) {
        const LeafLog ll = leaf_log(chart, z, opt, false);
        if (ll.fate == Fate::Escaped && ll.entry <= 0) return z;
        z *= lam;
    }
    throw LeafPathError("no base point with image in V+ found");
}

RayTrace trace_ray(const UnstableChart& chart, double theta, double G_start, double G_stop, cx base_z,
                   const RayOptions& opt) {
    if (!(G_start > G_stop) || !(G_stop > 0.0)) throw MapError("trace_ray needs G_start > G_stop > 0");
    RayTrace tr;
    tr.theta = theta;
    const cx L_base = base_log(chart, base_z, opt.leaf);
    const double im_target = theta + kTwoPi * std::round((L_base.imag() - theta) / kTwoPi);
    tr.theta_lift = im_target;

    Walker w{chart, opt, base_z, L_base};
    double level = G_start;
    try {
        w.move_to({G_start, L_base.imag()});
        w.move_to({G_start, im_target});
        tr.samples.push_back({G_start, w.z, w.L});
        while (level >= G_stop) {
            level *= 0.5;
            w.move_to({level, im_target});
            tr.samples.push_back({level, w.z, w.L});
        }
    } catch (const RayFailure& f) {
        tr.failure_level = level;
        tr.failure = f.why;
    } catch (const LeafPathError& e) {
        tr.failure_level = level;
        tr.failure = e.what();
    }
    const std::size_t k = static_cast<std::size_t>(opt.land_window);
    if (!tr.failure_level && tr.samples.size() >= k) {
        tr.endpoint_diameter = diameter(tr.samples, tr.samples.size() - k);
        if (tr.endpoint_diameter < opt.land_tol) {
            tr.landed = true;
            tr.endpoint = tr.samples.back().z;
        }
    } else if (tr.samples.size() >= 2) {
        tr.endpoint_diameter = diameter(tr.samples, tr.samples.size() >= k ? tr.samples.size() - k : 0);
    }
    return tr;
}

LandingStats landing_stats(const UnstableChart& chart, int n_rays, double G_start, double G_stop,
                           cx base_z, const RayOptions& opt) {
    if (n_rays < 16) throw MapError("landing_stats needs at least 16 rays");
    LandingStats st;
    st.n_rays = n_rays;
    st.traces.resize(static_cast<std::size_t>(n_rays));
    parallel_for(st.traces.size(), [&](std::size_t k) {
        st.traces[k] = trace_ray(chart, kTwoPi * static_cast<double>(k) / n_rays, G_start, G_stop, base_z, opt);
    });
    for (const RayTrace& t : st.traces) st.landed += t.landed ? 1 : 0;
    st.fraction = static_cast<double>(st.landed) / n_rays;
    return st;
}

double SolenoidWindow::max_residual() const {
    double m = 0.0;
    for (const auto& r : residuals)
        if (r) m = std::max(m, *r);
    return m;
}

namespace {

void fill_residuals(SolenoidWindow& w, int d) {
    w.residuals.assign(w.z.size(), std::nullopt);
    for (std::size_t k = 0; k + 1 < w.z.size(); ++k) {
        if (!w.z[k] || !w.z[k + 1]) continue;
        const cx next = *w.z[k + 1];
        w.residuals[k] = std::abs(next - std::pow(*w.z[k], d)) / std::abs(next);
    }
}

// Direct phi+ values along the forward orbit from index `from` (point q_from) to j_max.
void fill_direct(SolenoidWindow& w, const HenonMap& map, PointC2 q, int from) {
    const int d = map.degree();
    for (int j = from; j <= w.j_max; ++j) {
        if (j >= w.j_min) {
            auto& slot = w.z[static_cast<std::size_t>(j - w.j_min)];
            if (q.finite() && q.norm_inf() < kOverflowMagnitude && map.in_vplus(q)) slot = bottcher_vplus(map, q).z;
            else if (j > w.j_min && w.z[static_cast<std::size_t>(j - 1 - w.j_min)])
                slot = std::pow(*w.z[static_cast<std::size_t>(j - 1 - w.j_min)], d);
        }
        if (q.finite() && q.norm_inf() < kOverflowMagnitude) q = map.forward(q);
    }
}

}  // namespace

SolenoidWindow solenoid_coords(const HenonMap& map, const PointC2& q, int j_min, int j_max, int n_max) {
    if (j_min > j_max) throw MapError("solenoid window needs j_min <= j_max");
    const EscapeRun run = escape_forward(map, q, n_max);
    if (run.fate != Fate::Escaped) throw MapError("not in U+ within budget");
    SolenoidWindow w;
    w.j_min = j_min;
    w.j_max = j_max;
    w.j_entry = run.steps;
    w.z.assign(static_cast<std::size_t>(j_max - j_min + 1), std::nullopt);
    // negative indices: backward orbit points that already lie in V+
    PointC2 p = q;
    for (int j = -1; j >= j_min; --j) {
        p = map.backward(p);
        if (!p.finite() || p.norm_inf() > kOverflowMagnitude) break;
        if (j <= j_max && map.in_vplus(p)) {
            w.z[static_cast<std::size_t>(j - j_min)] = bottcher_vplus(map, p).z;
            w.j_entry = std::min(w.j_entry, j);
        }
    }
    fill_direct(w, map, q, 0);
    fill_residuals(w, map.degree());
    return w;
}

SolenoidWindow solenoid_coords(const UnstableChart& chart, cx z, cx base_z, int j_min, int j_max,
                               const LeafOptions& opt) {
    if (j_min > j_max) throw MapError("solenoid window needs j_min <= j_max");
    const LeafLog ll = leaf_log(chart, z, opt, false);
    if (ll.fate != Fate::Escaped) throw MapError("not in U+ within budget");
    SolenoidWindow w;
    w.j_min = j_min;
    w.j_max = j_max;
    w.j_entry = std::max(ll.entry, 0);
    w.z.assign(static_cast<std::size_t>(j_max - j_min + 1), std::nullopt);
    fill_direct(w, chart.map, eval_chart(chart, z), 0);

    const int n = chart.period();
    const int d = chart.map.degree();
    const cx L_base = base_log(chart, base_z, opt);
    for (int j = j_min; j <= std::min(j_max, w.j_entry - 1); ++j) {
        const int k = (j >= 0) ? j / n : -((-j + n - 1) / n);
        const int r = j - n * k;
        const cx zk = z * std::pow(chart.multiplier, static_cast<double>(k));
        const cx L = continue_log(chart, base_z, L_base, zk, opt);
        w.z[static_cast<std::size_t>(j - j_min)] = std::exp(std::pow(static_cast<double>(d), r) * L);
    }
    fill_residuals(w, d);
    return w;
}

}  // namespace henon
