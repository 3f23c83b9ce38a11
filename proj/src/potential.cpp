#include "henon/potential.hpp"

#include <cmath>

namespace henon {

namespace {

const double kLogOverflow = std::log(kOverflowMagnitude);

// Upper bound for |Log w| of the next factor step, given log|Y| and |X| <= |Y|.
double next_term_bound(const HenonFactor& f, double log_abs_y) {
    const int d = f.poly.degree();
    double eps = std::abs(f.a) * std::exp((1 - d) * log_abs_y);
    for (int i = 0; i < d; ++i) {
        double c = std::abs(f.poly.coeffs()[static_cast<std::size_t>(i)]);
        if (c != 0.0) eps += c * std::exp((i - d) * log_abs_y);
    }
    if (eps >= 1.0) return std::numeric_limits<double>::infinity();
    return -std::log1p(-eps);
}

template <bool Tangent>
LogBottcher log_bottcher_impl(const HenonMap& map, const PointC2& q, const PointC2* dq, cx* dlog,
                              double tol) {
    if (!map.in_vplus(q)) throw MapError("point is not in V+ at the certified escape radius");
    const auto& fs = map.factors();
    const std::size_t m = fs.size();

    cx X = q.x;
    cx Y = q.y;
    double log_abs_y = std::log(std::abs(Y));
    cx value = std::log(Y);
    cx u{0.0}, ux{0.0}, dval{0.0};
    if constexpr (Tangent) {
        u = dq->y / Y;
        ux = dq->x / Y;
        dval = u;
    }

    double D = 1.0;
    LogBottcher out;
    for (std::size_t t = 0;; ++t) {
        const HenonFactor& f = fs[m - 1 - (t % m)];
        const int d = f.poly.degree();
        const double bound = next_term_bound(f, log_abs_y) / (D * d);
        if (2.0 * bound < tol || t >= 4096) {
            out.err = 2.0 * bound;
            break;
        }
        const cx yi = 1.0 / Y;
        cx s{0.0}, ds{0.0};
        for (int i = 0; i < d; ++i) {
            const cx c = f.poly.coeffs()[static_cast<std::size_t>(i)];
            s = s * yi + c;
            if constexpr (Tangent) ds = ds * yi + static_cast<double>(i - d) * c;
        }
        s *= yi;
        cx ydi{1.0};
        for (int i = 0; i < d; ++i) ydi *= yi;
        const cx w = 1.0 + s - f.a * X * ydi;
        const cx logw = std::log(w);
        D *= d;
        value += logw / D;
        ++out.terms;

        cx u_next{0.0}, ux_next{0.0};
        if constexpr (Tangent) {
            ds *= yi;
            const cx ydm1 = ydi * Y;  // yi^(d-1)
            const cx dw = u * (ds + f.a * static_cast<double>(d) * X * ydi) - f.a * ux * ydm1;
            dval += dw / (w * D);
            u_next = static_cast<double>(d) * u + dw / w;
            ux_next = u * ydm1 / w;
        }

        const double log_abs_y_next = d * log_abs_y + std::log(std::abs(w));
        if (log_abs_y_next > kLogOverflow) {
            const HenonFactor& g = fs[m - 1 - ((t + 1) % m)];
            out.err = 2.0 * next_term_bound(g, log_abs_y_next) / (D * g.poly.degree());
            break;
        }
        cx Yd{1.0};
        for (int i = 0; i < d; ++i) Yd *= Y;
        X = Y;
        Y = Yd * w;
        log_abs_y = log_abs_y_next;
        if constexpr (Tangent) {
            u = u_next;
            ux = ux_next;
        }
    }
    out.value = value;
    out.err += 4e-16 * (std::abs(value) + out.terms);
    if constexpr (Tangent) *dlog = dval;
    return out;
}

}  // namespace

LogBottcher log_bottcher_vplus(const HenonMap& map, const PointC2& q, double tol) {
    return log_bottcher_impl<false>(map, q, nullptr, nullptr, tol);
}

LogBottcher log_bottcher_vplus(const HenonMap& map, const PointC2& q, const PointC2& dq,
                               cx& dlog, double tol) {
    return log_bottcher_impl<true>(map, q, &dq, &dlog, tol);
}

BottcherValue bottcher_vplus(const HenonMap& map, const PointC2& q, double tol) {
    LogBottcher lb = log_bottcher_vplus(map, q, tol);
    BottcherValue b;
    b.log_z = lb.value;
    b.z = std::exp(lb.value);
    b.err = std::abs(b.z) * lb.err;
    return b;
}

GreenValue green_from_run(const HenonMap& map, const EscapeRun& run, double tol) {
    GreenValue g;
    g.fate = run.fate;
    g.steps = run.steps;
    if (run.fate == Fate::Bounded) return g;
    if (run.fate == Fate::Undetermined) {
        g.err = std::numeric_limits<double>::infinity();
        return g;
    }
    const double scale = std::pow(static_cast<double>(map.degree()), -run.steps);
    if (map.in_vplus(run.point)) {
        LogBottcher lb = log_bottcher_vplus(map, run.point, tol);
        g.value = lb.value.real() * scale;
        g.err = lb.err * scale;
        g.terms = lb.terms;
    } else {
        // overflowed outside V+: crude estimate from the norm
        const double n = run.point.finite() ? run.point.norm_inf() : kOverflowMagnitude;
        g.value = std::log(n) * scale;
        g.err = std::log(2.0 * (1.0 + map.escape_radius())) * scale;
    }
    return g;
}

GreenValue green(const HenonMap& map, const PointC2& q, Side side, double tol, int n_max) {
    if (!(tol > 0.0)) throw MapError("green needs tol > 0");
    GreenValue g;
    if (side == Side::Plus) {
        g = green_from_run(map, escape_forward(map, q, n_max), tol);
    } else {
        const InverseConjugate& inv = map.inverse_conjugate();
        g = green_from_run(*inv.map, escape_forward(*inv.map, inv.to_conjugate(q), n_max), tol);
    }
    g.side = side;
    return g;
}

}  // namespace henon
