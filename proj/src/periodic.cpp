#include "henon/periodic.hpp"

#include "henon/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace henon {

namespace {

double residual_norm(const HenonMap& map, const PointC2& q, int n) {
    return distance(apply_n(map, q, n, Direction::Forward), q);
}

struct NewtonResult {
    PointC2 q;
    double res;
};

std::optional<NewtonResult> newton_periodic(const HenonMap& map, PointC2 q, int n, int max_steps) {
    auto eval = [&](const PointC2& p) { return apply_n(map, p, n, Direction::Forward) - p; };
    PointC2 F = eval(q);
    double fn = std::hypot(std::abs(F.x), std::abs(F.y));
    for (int it = 0; it < max_steps; ++it) {
        if (!std::isfinite(fn) || q.norm_inf() > 1e8) return std::nullopt;
        if (fn < 1e-14 * (1.0 + q.norm_inf())) break;
        Mat2 J = jacobian(map, q, n, Direction::Forward);
        J.a -= 1.0;
        J.d -= 1.0;
        if (std::abs(J.det()) == 0.0) return std::nullopt;
        PointC2 step = J.inverse().apply(F);
        double t = 1.0;
        bool moved = false;
        for (int h = 0; h < 30; ++h, t *= 0.5) {
            PointC2 cand = q - cx{t} * step;
            PointC2 Fc = eval(cand);
            double fc = std::hypot(std::abs(Fc.x), std::abs(Fc.y));
            if (std::isfinite(fc) && fc < fn) {
                q = cand;
                F = Fc;
                fn = fc;
                moved = true;
                break;
            }
        }
        if (!moved) break;
    }
    if (!(fn < 1e-9 * (1.0 + q.norm_inf()))) return std::nullopt;
    return NewtonResult{q, fn};
}

PointC2 snap_real(PointC2 q) {
    if (std::abs(q.x.imag()) < 1e-12) q.x.imag(0.0);
    if (std::abs(q.y.imag()) < 1e-12) q.y.imag(0.0);
    return q;
}

int cmp_tol(double a, double b) {
    if (std::abs(a - b) <= 1e-9) return 0;
    return a < b ? -1 : 1;
}

}  // namespace

bool lex_less(const PointC2& a, const PointC2& b) {
    int c = cmp_tol(a.x.real(), b.x.real());
    if (c == 0) c = cmp_tol(a.x.imag(), b.x.imag());
    if (c == 0) c = cmp_tol(a.y.real(), b.y.real());
    if (c == 0) c = cmp_tol(a.y.imag(), b.y.imag());
    return c < 0;
}

std::vector<PeriodicOrbit> find_periodic(const HenonMap& map, int n, double box, int seed_grid) {
    if (n < 1) throw MapError("period must be >= 1");
    if (!(box > 0.0)) throw MapError("search box must be positive");
    if (seed_grid < 1) throw MapError("seed grid must be >= 1");

    std::vector<cx> zs;
    for (int i = 0; i < seed_grid; ++i)
        for (int j = 0; j < seed_grid; ++j) {
            double re = seed_grid == 1 ? 0.0 : -box + 2.0 * box * i / (seed_grid - 1);
            double im = seed_grid == 1 ? 0.0 : -box + 2.0 * box * j / (seed_grid - 1);
            zs.emplace_back(re, im);
        }
    std::vector<PointC2> seeds;
    const std::size_t g = static_cast<std::size_t>(seed_grid);
    for (std::size_t i = 0; i < g; ++i)
        for (std::size_t j = 0; j < g; ++j) {
            seeds.push_back({zs[i * g + j], zs[i * g + j]});
            if (i != j) seeds.push_back({zs[i * g + j], zs[j * g + i]});
        }

    std::vector<std::optional<NewtonResult>> roots(seeds.size());
    parallel_for(seeds.size(), [&](std::size_t k) {
        auto r = newton_periodic(map, seeds[k], n, 64);
        if (r) {
            PointC2 s = snap_real(r->q);
            auto polished = newton_periodic(map, s, n, 4);
            if (polished) r = polished;
        }
        roots[k] = r;
    });

    std::vector<PeriodicOrbit> orbits;
    for (const auto& r : roots) {
        if (!r) continue;
        const PointC2 q = r->q;
        // minimal period dividing n
        int period = n;
        for (int k = 1; k < n; ++k) {
            if (n % k == 0 && residual_norm(map, q, k) < 1e-8 * (1.0 + q.norm_inf())) {
                period = k;
                break;
            }
        }
        PeriodicOrbit orb;
        orb.period = period;
        PointC2 p = q;
        for (int k = 0; k < period; ++k) {
            orb.points.push_back(p);
            p = map.forward(p);
        }
        auto first = std::min_element(orb.points.begin(), orb.points.end(), lex_less);
        std::rotate(orb.points.begin(), first, orb.points.end());
        for (const PointC2& pt : orb.points)
            orb.residual = std::max(orb.residual, residual_norm(map, pt, period));
        if (orb.residual >= 1e-10 * (1.0 + orb.points[0].norm_inf())) continue;
        orbits.push_back(std::move(orb));
    }

    std::stable_sort(orbits.begin(), orbits.end(), [](const PeriodicOrbit& a, const PeriodicOrbit& b) {
        if (a.period != b.period) return a.period < b.period;
        return lex_less(a.points[0], b.points[0]);
    });
    std::vector<PeriodicOrbit> unique;
    for (auto& o : orbits) {
        bool dup = false;
        for (const auto& u : unique) {
            if (u.period != o.period) continue;
            for (const PointC2& pt : u.points)
                if (distance(pt, o.points[0]) < 1e-8) dup = true;
            if (dup) break;
        }
        if (!dup) unique.push_back(std::move(o));
    }
    return unique;
}

OrbitKind kind_from_multipliers(cx lambda1, cx lambda2, double margin) {
    double m1 = std::abs(lambda1), m2 = std::abs(lambda2);
    if (std::abs(m1 - 1.0) <= margin || std::abs(m2 - 1.0) <= margin) return OrbitKind::Indeterminate;
    double hi = std::max(m1, m2), lo = std::min(m1, m2);
    if (hi < 1.0) return OrbitKind::Sink;
    if (lo > 1.0) return OrbitKind::Source;
    return OrbitKind::Saddle;
}

namespace {

PointC2 eigenvector(const Mat2& J, cx lambda) {
    PointC2 v1{J.b, lambda - J.a};
    PointC2 v2{lambda - J.d, J.c};
    double n1 = std::hypot(std::abs(v1.x), std::abs(v1.y));
    double n2 = std::hypot(std::abs(v2.x), std::abs(v2.y));
    PointC2 v = n1 >= n2 ? v1 : v2;
    double nv = std::max(n1, n2);
    if (nv == 0.0) v = {1.0, 0.0}, nv = 1.0;
    v = cx{1.0 / nv} * v;
    cx lead = std::abs(v.x) > 1e-14 ? v.x : v.y;
    cx phase = std::conj(lead) / std::abs(lead);
    v = phase * v;
    if (std::abs(v.x) > 1e-14) v.x = cx{v.x.real(), 0.0};
    else v.y = cx{v.y.real(), 0.0};
    return v;
}

}  // namespace

Classification classify(const HenonMap& map, const std::vector<PointC2>& points, int n) {
    if (points.empty()) throw MapError("classify needs at least one orbit point");
    Mat2 J = jacobian(map, points[0], n, Direction::Forward);
    cx tr = J.trace(), det = J.det();
    cx sq = std::sqrt(tr * tr - 4.0 * det);
    cx l1 = 0.5 * (tr + sq), l2 = 0.5 * (tr - sq);
    if (std::abs(l2) > std::abs(l1)) std::swap(l1, l2);
    if (std::abs(l1) > 0.0) l2 = det / l1;

    Classification c;
    c.lambda1 = l1;
    c.lambda2 = l2;
    c.v1 = eigenvector(J, l1);
    c.v2 = eigenvector(J, l2);
    c.kind = kind_from_multipliers(l1, l2);
    if (c.kind == OrbitKind::Saddle) {
        SaddleOrbit& s = c.saddle;
        s.points = points;
        s.period = n;
        s.lam_u = l1;
        s.lam_s = l2;
        s.v_u = c.v1;
        s.v_s = c.v2;
        s.lyap = std::log(std::abs(l1)) / n;
        for (const PointC2& p : points) s.residual = std::max(s.residual, residual_norm(map, p, n));
    }
    return c;
}

std::string to_string(OrbitKind kind) {
    switch (kind) {
        case OrbitKind::Saddle: return "Saddle";
        case OrbitKind::Sink: return "Sink";
        case OrbitKind::Source: return "Source";
        case OrbitKind::Indeterminate: return "Indeterminate";
    }
    return "Indeterminate";
}

std::vector<SaddleOrbit> find_saddles(const HenonMap& map, int n, double box, int seed_grid) {
    std::vector<SaddleOrbit> out;
    for (const PeriodicOrbit& o : find_periodic(map, n, box, seed_grid)) {
        Classification c = classify(map, o.points, o.period);
        if (c.kind == OrbitKind::Saddle) out.push_back(c.saddle);
    }
    return out;
}

}  // namespace henon
