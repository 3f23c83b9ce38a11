#include "henon/manifold.hpp"

#include "henon/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

namespace henon {

namespace {

using Series = std::vector<cx>;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Series mul(const Series& a, const Series& b, std::size_t order) {
    Series out(order + 1, cx{0.0});
    for (std::size_t i = 0; i <= order && i < a.size(); ++i) {
        if (a[i] == cx{0.0}) continue;
        for (std::size_t j = 0; i + j <= order && j < b.size(); ++j) out[i + j] += a[i] * b[j];
    }
    return out;
}

// One forward step of the map on a pair of truncated series.
void step_series(const HenonMap& map, Series& X, Series& Y, std::size_t order) {
    const auto& fs = map.factors();
    for (auto it = fs.rbegin(); it != fs.rend(); ++it) {
        const int d = it->poly.degree();
        Series acc(order + 1, cx{0.0});
        acc[0] = 1.0;
        for (int k = d - 1; k >= 0; --k) {
            acc = mul(acc, Y, order);
            acc[0] += it->poly.coeffs()[static_cast<std::size_t>(k)];
        }
        for (std::size_t i = 0; i <= order; ++i) acc[i] -= it->a * X[i];
        X = Y;
        Y = std::move(acc);
    }
}

double coeff_norm(const PointC2& c) { return c.norm_inf(); }

double validity_radius(const std::vector<PointC2>& c) {
    const double scale = std::max(1.0, coeff_norm(c[0]));
    const std::size_t N = c.size() - 1;
    double rho = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k <= N; ++k) {
        double a = coeff_norm(c[k]);
        if (a == 0.0) continue;
        rho = std::min(rho, std::pow(10.0 * scale / a, 1.0 / static_cast<double>(k)));
        if (k + 3 > N) rho = std::min(rho, std::pow(1e-16 * scale / a, 1.0 / static_cast<double>(k)));
    }
    if (!std::isfinite(rho)) rho = 1.0;
    return rho;
}

cx lam_pow(cx lambda, int k) { return std::pow(lambda, static_cast<double>(k)); }

}  // namespace

UnstableChart solve_chart(const HenonMap& map, const SaddleOrbit& saddle, int n_series) {
    if (n_series < 2) throw MapError("series order must be >= 2");
    if (!(std::abs(saddle.lam_u) > 1.0)) throw MapError("unstable chart needs |lambda| > 1");
    const std::size_t N = static_cast<std::size_t>(n_series);
    const int n = saddle.period;
    const cx lambda = saddle.lam_u;
    const Mat2 DF = jacobian(map, saddle.base(), n, Direction::Forward);

    std::vector<PointC2> c(N + 1, PointC2{});
    c[0] = saddle.base();
    c[1] = saddle.v_u;
    cx lk = lambda;
    for (std::size_t k = 2; k <= N; ++k) {
        lk *= lambda;
        Series X(k + 1, cx{0.0}), Y(k + 1, cx{0.0});
        for (std::size_t j = 0; j < k; ++j) {
            X[j] = c[j].x;
            Y[j] = c[j].y;
        }
        for (int r = 0; r < n; ++r) step_series(map, X, Y, k);
        Mat2 A{lk - DF.a, -DF.b, -DF.c, lk - DF.d};
        Mat2 Ai = A.inverse();
        double cond = A.norm() * Ai.norm();
        if (!(cond < 1e12))
            throw ResonanceError("near-resonant multiplier at series order " + std::to_string(k) +
                                 " (condition number " + std::to_string(cond) + ")");
        c[k] = Ai.apply(PointC2{X[k], Y[k]});
    }

    UnstableChart chart{map, saddle, saddle.base(), lambda, std::move(c), 1.0, 0.0, n_series};
    chart.rho_val = validity_radius(chart.coeffs);
    return chart;
}

UnstableChart rescale_chart(const UnstableChart& chart, double s) {
    UnstableChart out = chart;
    double sk = 1.0;
    for (auto& ck : out.coeffs) {
        ck = cx{sk} * ck;
        sk *= s;
    }
    out.alpha = chart.alpha * s;
    out.rho_val = chart.rho_val / s;
    return out;
}

UnstableChart push_forward(const UnstableChart& chart, int j) {
    if (j < 0) throw MapError("push_forward needs j >= 0");
    const std::size_t N = chart.coeffs.size() - 1;
    Series X(N + 1), Y(N + 1);
    for (std::size_t k = 0; k <= N; ++k) {
        X[k] = chart.coeffs[k].x;
        Y[k] = chart.coeffs[k].y;
    }
    for (int r = 0; r < j; ++r) step_series(chart.map, X, Y, N);
    UnstableChart out = chart;
    for (std::size_t k = 0; k <= N; ++k) out.coeffs[k] = {X[k], Y[k]};
    out.base = out.coeffs[0];
    auto& pts = out.saddle.points;
    std::rotate(pts.begin(), pts.begin() + (j % static_cast<int>(pts.size())), pts.end());
    out.rho_val = validity_radius(out.coeffs);
    return out;
}

PointC2 eval_series(const UnstableChart& chart, cx z) {
    PointC2 acc{0.0, 0.0};
    for (auto it = chart.coeffs.rbegin(); it != chart.coeffs.rend(); ++it) {
        acc.x = acc.x * z + it->x;
        acc.y = acc.y * z + it->y;
    }
    return acc;
}

PointC2 eval_series(const UnstableChart& chart, cx z, PointC2& dpsi) {
    PointC2 acc{0.0, 0.0};
    PointC2 dacc{0.0, 0.0};
    for (auto it = chart.coeffs.rbegin(); it != chart.coeffs.rend(); ++it) {
        dacc.x = dacc.x * z + acc.x;
        dacc.y = dacc.y * z + acc.y;
        acc.x = acc.x * z + it->x;
        acc.y = acc.y * z + it->y;
    }
    dpsi = dacc;
    return acc;
}

int pullback_steps(const UnstableChart& chart, cx z) {
    const double az = std::abs(z);
    if (az <= chart.rho_val) return 0;
    const double lam = std::abs(chart.multiplier);
    int k = static_cast<int>(std::ceil(std::log(az / chart.rho_val) / std::log(lam)));
    while (k > 0 && az / std::pow(lam, k - 1) <= chart.rho_val) --k;
    while (az / std::pow(lam, k) > chart.rho_val) ++k;
    return k;
}

PointC2 eval_chart(const UnstableChart& chart, cx z) {
    const int k = pullback_steps(chart, z);
    if (k == 0) return eval_series(chart, z);
    PointC2 w = eval_series(chart, z / lam_pow(chart.multiplier, k));
    return apply_n(chart.map, w, chart.period() * k, Direction::Forward);
}

LeafLog leaf_log(const UnstableChart& chart, cx z, const LeafOptions& opt, bool tangent) {
    const int k = pullback_steps(chart, z);
    const int nk = chart.period() * k;
    const cx lk = lam_pow(chart.multiplier, k);
    PointC2 dpsi{0.0, 0.0};
    const PointC2 w = tangent ? eval_series(chart, z / lk, dpsi) : eval_series(chart, z / lk);

    LeafLog out;
    const EscapeRun run = escape_forward(chart.map, w, opt.n_max + nk, nk);
    out.fate = run.fate;
    if (run.fate != Fate::Escaped) {
        out.err = run.fate == Fate::Undetermined ? std::numeric_limits<double>::infinity() : 0.0;
        out.entry = run.steps - nk;
        return out;
    }
    out.entry = run.steps - nk;
    const double scale = std::pow(static_cast<double>(chart.map.degree()), -out.entry);
    if (!chart.map.in_vplus(run.point)) {
        GreenValue g = green_from_run(chart.map, run, opt.tol);
        out.green = g.value * std::pow(static_cast<double>(chart.map.degree()), nk);
        out.err = g.err * std::pow(static_cast<double>(chart.map.degree()), nk);
        out.ell = cx{out.green / scale, 0.0};
        return out;
    }
    LogBottcher lb;
    if (tangent) {
        PointC2 dq{dpsi.x / lk, dpsi.y / lk};
        if (run.steps > 0) dq = jacobian(chart.map, w, run.steps, Direction::Forward).apply(dq);
        lb = log_bottcher_vplus(chart.map, run.point, dq, out.dell, opt.tol);
    } else {
        lb = log_bottcher_vplus(chart.map, run.point, opt.tol);
    }
    out.ell = lb.value;
    out.green = lb.value.real() * scale;
    out.err = lb.err * scale;
    return out;
}

GreenValue leaf_green(const UnstableChart& chart, cx z, const LeafOptions& opt) {
    LeafLog ll = leaf_log(chart, z, opt, false);
    GreenValue g;
    g.fate = ll.fate;
    g.value = ll.green;
    g.err = ll.err;
    g.steps = std::max(ll.entry, 0);
    return g;
}

double max_modulus(const UnstableChart& chart, double r, int n_samples, const LeafOptions& opt) {
    if (!(r > 0.0)) throw MapError("max_modulus needs r > 0");
    if (n_samples < 8) throw MapError("max_modulus needs at least 8 samples");
    const std::size_t n = static_cast<std::size_t>(n_samples);
    auto G = [&](double th) { return leaf_green(chart, std::polar(r, th), opt).value; };
    std::vector<double> vals(n);
    parallel_for(n, [&](std::size_t i) { vals[i] = G(kTwoPi * static_cast<double>(i) / n); });

    std::vector<std::size_t> peaks;
    for (std::size_t i = 0; i < n; ++i) {
        double v = vals[i];
        if (v > 0.0 && v >= vals[(i + n - 1) % n] && v >= vals[(i + 1) % n]) peaks.push_back(i);
    }
    std::stable_sort(peaks.begin(), peaks.end(),
                     [&](std::size_t a, std::size_t b) { return vals[a] > vals[b]; });
    double best = *std::max_element(vals.begin(), vals.end());
    const double dth = kTwoPi / static_cast<double>(n);
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    for (std::size_t p = 0; p < std::min<std::size_t>(3, peaks.size()); ++p) {
        double a = kTwoPi * static_cast<double>(peaks[p]) / n - dth;
        double b = a + 2.0 * dth;
        double c = b - invphi * (b - a), d = a + invphi * (b - a);
        double gc = G(c), gd = G(d);
        for (int it = 0; it < 30; ++it) {
            if (gc > gd) {
                b = d;
                d = c;
                gd = gc;
                c = b - invphi * (b - a);
                gc = G(c);
            } else {
                a = c;
                c = d;
                gc = gd;
                d = a + invphi * (b - a);
                gd = G(d);
            }
        }
        best = std::max({best, gc, gd});
    }
    return best;
}

UnstableChart normalize_chart(const UnstableChart& chart, int n_samples, const LeafOptions& opt) {
    auto M = [&](double s) { return max_modulus(chart, s, n_samples, opt); };
    const double lam = std::abs(chart.multiplier);
    double s = chart.rho_val;
    double Ms = M(s);
    for (int guard = 0; !(Ms > 0.0); ++guard) {
        if (guard > 200) throw MapError("M(p, r) vanishes on the tested range; raise the range");
        s *= lam;
        Ms = M(s);
    }
    for (int guard = 0; Ms < 1.0; ++guard) {
        if (guard > 400) throw MapError("M(p, r) does not reach 1 on the tested range");
        s *= lam;
        Ms = M(s);
    }
    double hi = s;
    double lo = s / lam;
    double Mlo = M(lo);
    for (int guard = 0; Mlo >= 1.0; ++guard) {
        if (guard > 400) throw MapError("M(p, r) does not fall below 1 on the tested range");
        hi = lo;
        lo /= lam;
        Mlo = M(lo);
    }
    while (hi / lo - 1.0 > 1e-12) {
        double mid = std::sqrt(lo * hi);
        if (mid <= lo || mid >= hi) break;
        if (M(mid) >= 1.0) hi = mid;
        else lo = mid;
    }
    return rescale_chart(chart, hi);
}

double g_norm(const UnstableChart& normalized, int j, int n_samples, const LeafOptions& opt) {
    UnstableChart pushed = push_forward(normalized, j);
    UnstableChart renorm = normalize_chart(pushed, n_samples, opt);
    return pushed.alpha / renorm.alpha;
}

cx nearest_lift(const UnstableChart& chart, const LeafLog& ll, double im_ref, double* spacing) {
    const double d = static_cast<double>(chart.map.degree());
    cx base;
    double delta = kTwoPi;
    if (ll.entry > 0) {
        const double dE = std::pow(d, ll.entry);
        base = ll.ell / dE;
        delta = kTwoPi / dE;
    } else {
        base = ll.ell * std::pow(d, -ll.entry);
    }
    const double m = std::round((im_ref - base.imag()) / delta);
    if (spacing) *spacing = delta;
    return {base.real(), base.imag() + m * delta};
}

cx lift_derivative(const UnstableChart& chart, const LeafLog& ll) {
    return ll.dell * std::pow(static_cast<double>(chart.map.degree()), -ll.entry);
}

cx continue_log(const UnstableChart& chart, cx z_from, cx L_from, cx z_to, const LeafOptions& opt) {
    const cx dz = z_to - z_from;
    if (dz == cx{0.0}) return L_from;
    auto eval = [&](cx z) {
        LeafLog ll = leaf_log(chart, z, opt, true);
        if (ll.fate != Fate::Escaped || !(ll.green > 0.0)) throw LeafPathError("path exits leaf's escaping set");
        return ll;
    };
    LeafLog cur = eval(z_from);
    cx L = L_from;
    double t = 0.0;
    double h = 1.0 / 16.0;
    while (t < 1.0) {
        const double t1 = std::min(1.0, t + h);
        const cx pred = L + lift_derivative(chart, cur) * ((t1 - t) * dz);
        const LeafLog ll = eval(z_from + t1 * dz);
        double delta = 0.0;
        const cx L1 = nearest_lift(chart, ll, pred.imag(), &delta);
        if (std::abs(L1 - pred) > 0.05 * delta || std::abs(L1 - L) > 0.25 * delta) {
            h *= 0.5;
            if (h < 1e-12) throw LeafPathError("branch step ambiguity; refine the path");
            continue;
        }
        L = L1;
        cur = ll;
        t = t1;
        h = std::min(2.0 * h, 0.25);
    }
    return L;
}

cx base_log(const UnstableChart& chart, cx base_z, const LeafOptions& opt) {
    const LeafLog ll = leaf_log(chart, base_z, opt, false);
    if (ll.fate != Fate::Escaped || ll.entry > 0)
        throw LeafPathError("base point image is not in V+");
    return nearest_lift(chart, ll, 0.0);
}

BottcherValue leaf_bottcher(const UnstableChart& chart, cx z, cx base_z, const LeafOptions& opt) {
    const LeafLog target = leaf_log(chart, z, opt, false);
    if (target.fate != Fate::Escaped || !(target.green > 0.0))
        throw LeafPathError("leaf_green vanishes at the requested point");
    const cx L = continue_log(chart, base_z, base_log(chart, base_z, opt), z, opt);
    BottcherValue b;
    b.log_z = L;
    b.z = std::exp(L);
    b.err = std::abs(b.z) * target.err;
    return b;
}

namespace {

constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct QuadResult {
    double value = 0.0;
    double err = 0.0;
};

QuadResult gk15(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    const double fc = f(c);
    double k = fc * kWgk[7];
    double g = fc * kWg[3];
    for (int i = 0; i < 7; ++i) {
        const double x = h * kXgk[static_cast<std::size_t>(i)];
        const double s = f(c - x) + f(c + x);
        k += kWgk[static_cast<std::size_t>(i)] * s;
        if (i % 2 == 1) g += kWg[static_cast<std::size_t>(i / 2)] * s;
    }
    return {k * h, std::abs((k - g) * h)};
}

QuadResult adaptive(const std::function<double(double)>& f, double a, double b, double tol, int depth) {
    QuadResult r = gk15(f, a, b);
    if (r.err <= tol || depth >= 30) return r;
    const double m = 0.5 * (a + b);
    QuadResult l = adaptive(f, a, m, 0.5 * tol, depth + 1);
    QuadResult u = adaptive(f, m, b, 0.5 * tol, depth + 1);
    return {l.value + u.value, l.err + u.err};
}

}  // namespace

LoopCharge loop_charge(const UnstableChart& chart, const Loop& loop, const LeafOptions& opt,
                       double quad_tol) {
    LoopCharge out;
    out.min_green = std::numeric_limits<double>::infinity();
    const double margin = 10.0 * opt.tol;

    // d/dn G = Re(L'(z) n) for the holomorphic lift L with Re L = G
    auto flux = [&](cx z, cx normal) {
        const LeafLog ll = leaf_log(chart, z, opt, true);
        if (ll.fate != Fate::Escaped || !(ll.green > margin))
            throw LeafPathError("loop touches K+ (leaf_green below margin)");
        out.min_green = std::min(out.min_green, ll.green);
        return (lift_derivative(chart, ll) * normal).real();
    };

    double total = 0.0, err = 0.0;
    if (const auto* c = std::get_if<CircleLoop>(&loop)) {
        if (!(c->radius > 0.0)) throw MapError("circle loop needs a positive radius");
        for (int i = 0; i < 256; ++i) flux(c->center + std::polar(c->radius, kTwoPi * i / 256), 1.0);
        auto f = [&](double th) {
            const cx e = std::polar(1.0, th);
            return flux(c->center + c->radius * e, e) * c->radius;
        };
        const int panels = 16;
        for (int p = 0; p < panels; ++p) {
            QuadResult r = adaptive(f, kTwoPi * p / panels, kTwoPi * (p + 1) / panels,
                                    quad_tol / panels, 0);
            total += r.value;
            err += r.err;
        }
    } else {
        const auto& poly = std::get<PolygonLoop>(loop);
        if (poly.size() < 3) throw MapError("polygon loop needs at least 3 vertices");
        const std::size_t nv = poly.size();
        for (std::size_t e = 0; e < nv; ++e) {
            const cx a = poly[e], b = poly[(e + 1) % nv];
            const double len = std::abs(b - a);
            if (len == 0.0) continue;
            const cx normal = cx{0.0, -1.0} * (b - a) / len;
            for (int i = 0; i < 32; ++i) flux(a + (b - a) * (i / 32.0), normal);
            auto f = [&](double s) { return flux(a + s * (b - a), normal) * len; };
            const int panels = 4;
            for (int p = 0; p < panels; ++p) {
                QuadResult r = adaptive(f, static_cast<double>(p) / panels,
                                        static_cast<double>(p + 1) / panels,
                                        quad_tol / (panels * nv), 0);
                total += r.value;
                err += r.err;
            }
        }
    }
    out.value = total / kTwoPi;
    out.err = err / kTwoPi;
    return out;
}

}  // namespace henon
