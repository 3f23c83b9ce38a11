#include "henon/manifold.hpp"
#include "henon/periodic.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <numbers>

using namespace henon;

namespace {

struct Fixture {
    HenonMap map;
    SaddleOrbit saddle;
    UnstableChart chart;
    UnstableChart normalized;
};

const Fixture& map_a() {
    static const Fixture fx = [] {
        HenonMap map = make_henon({make_factor({0.0, 0.0}, 2, 0.3)});
        SaddleOrbit s = find_saddles(map, 1, map.escape_radius(), 24).at(0);
        UnstableChart ch = solve_chart(map, s, 60);
        UnstableChart nc = normalize_chart(ch);
        return Fixture{map, s, ch, nc};
    }();
    return fx;
}

}  // namespace

TEST_CASE("chart conjugates f to multiplication by lambda") {
    const Fixture& fx = map_a();
    const UnstableChart& ch = fx.chart;
    CHECK(ch.rho_val > 0.0);
    CHECK(distance(eval_chart(ch, 0.0), {1.3, 1.3}) < 1e-14);
    for (double r : {0.5 * ch.rho_val, 2.0 * ch.rho_val, 5.0 * ch.rho_val})
        for (int k = 0; k < 16; ++k) {
            const cx z = std::polar(r, 2 * std::numbers::pi * k / 16 + 0.1);
            const PointC2 lhs = fx.map.forward(eval_chart(ch, z));
            const PointC2 rhs = eval_chart(ch, ch.multiplier * z);
            CHECK(distance(lhs, rhs) < 1e-9 * (1 + rhs.norm_inf()));
        }
}

TEST_CASE("chart derivative at 0 is the unstable eigenvector") {
    const Fixture& fx = map_a();
    PointC2 d;
    eval_series(fx.chart, 0.0, d);
    const cx ratio = d.x / fx.saddle.v_u.x;
    CHECK(distance(d, ratio * fx.saddle.v_u) < 1e-12 * std::abs(ratio));
    const double h = 1e-6;
    const PointC2 fd = eval_series(fx.chart, cx{h}) - eval_series(fx.chart, cx{-h});
    CHECK(distance((1.0 / (2 * h)) * fd, d) < 1e-6);
}

TEST_CASE("rescaling and pushing forward reparametrize the chart") {
    const Fixture& fx = map_a();
    const UnstableChart rs = rescale_chart(fx.chart, 0.7);
    const UnstableChart pf = push_forward(fx.chart, 1);
    for (cx z : {cx{0.3, 0.2}, cx{-1.0, 0.5}, cx{2.0, -1.0}}) {
        CHECK(distance(eval_chart(rs, z), eval_chart(fx.chart, 0.7 * z)) < 1e-10);
        CHECK(distance(eval_chart(pf, z), fx.map.forward(eval_chart(fx.chart, z))) < 1e-9);
    }
}

TEST_CASE("leaf Green function scales by d under z -> lambda z") {
    const Fixture& fx = map_a();
    std::mt19937_64 rng(11);
    for (int k = 0; k < 100; ++k) {
        const cx z = oracle::random_in_disk(rng, 3.0);
        const double g = leaf_green(fx.normalized, z).value;
        const double g2 = leaf_green(fx.normalized, fx.normalized.multiplier * z).value;
        CHECK(std::abs(g2 - 2 * g) < 1e-9 * (1 + g));
    }
}

TEST_CASE("normalized chart: M(1) = 1 and M(lambda s) = d M(s)") {
    const Fixture& fx = map_a();
    CHECK(max_modulus(fx.normalized, 1.0) == doctest::Approx(1.0).epsilon(1e-9));
    const double lam = std::abs(fx.normalized.multiplier);
    for (double s : {0.3, 0.7, 1.9}) {
        const double m1 = max_modulus(fx.normalized, s);
        const double m2 = max_modulus(fx.normalized, lam * s);
        CHECK(m2 == doctest::Approx(2 * m1).epsilon(1e-6));
    }
    CHECK(max_modulus(fx.normalized, 0.5) < max_modulus(fx.normalized, 0.8));
}

TEST_CASE("norm of Df on E^u in the chart metric equals |lambda| at a fixed point") {
    const Fixture& fx = map_a();
    CHECK(g_norm(fx.normalized, 1) == doctest::Approx(std::abs(fx.saddle.lam_u)).epsilon(1e-6));
}

TEST_CASE("continued logarithm agrees with exp and with the Green function") {
    const Fixture& fx = map_a();
    const cx base = 1.0;
    const cx L0 = base_log(fx.normalized, base);
    for (cx z : {cx{1.5, 0.5}, cx{-0.5, 1.2}, cx{2.0, -1.5}}) {
        const cx L = continue_log(fx.normalized, base, L0, z);
        CHECK(std::abs(L.real() - leaf_green(fx.normalized, z).value) < 1e-9);
        const BottcherValue b = leaf_bottcher(fx.normalized, z, base);
        CHECK(std::abs(std::log(std::abs(b.z)) - L.real()) < 1e-9);
    }
}

TEST_CASE("loop charge vanishes on mass-free loops and is positive around K+") {
    const Fixture& fx = map_a();
    const LoopCharge free_loop = loop_charge(fx.normalized, CircleLoop{{2.0, 2.0}, 0.3});
    CHECK(std::abs(free_loop.value) < 1e-6);
    CHECK(free_loop.min_green > 0.0);
    // z = 0 maps to the saddle, which lies in K+
    CHECK_THROWS_AS(loop_charge(fx.normalized, CircleLoop{{0.5, 0.0}, 0.5}), LeafPathError);
}

TEST_CASE("loop charge is additive over a split rectangle") {
    HenonMap map = make_henon({make_factor({-6.0, 0.0}, 2, 0.3)});
    const SaddleOrbit s = find_saddles(map, 1, map.escape_radius(), 24).at(0);
    const UnstableChart ch = normalize_chart(solve_chart(map, s, 60));
    const PolygonLoop whole{{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
    const PolygonLoop left{{-1, -1}, {0.3, -1}, {0.3, 1}, {-1, 1}};
    const PolygonLoop right{{0.3, -1}, {1, -1}, {1, 1}, {0.3, 1}};
    const double w = loop_charge(ch, whole).value;
    const double l = loop_charge(ch, left).value;
    const double r = loop_charge(ch, right).value;
    CHECK(w > 1e-4);
    CHECK(l > 1e-4);
    CHECK(r > 1e-4);
    CHECK(std::abs(w - l - r) < 1e-5);
}

TEST_CASE("solve_chart rejects orbits that are not saddles") {
    const Fixture& fx = map_a();
    SaddleOrbit fake = fx.saddle;
    fake.lam_u = 1.0;
    CHECK_THROWS_AS(solve_chart(fx.map, fake, 20), MapError);
}

TEST_CASE("multiplier 1 + 1e-13 is reported as a resonance") {
    const double a = 0.3, lam = 1.0 + 1e-13;
    const double y = 0.5 * (lam + a / lam);
    const HenonMap map = make_henon({make_factor({(1 + a) * y - y * y, 0.0}, 2, a)});
    const Classification cls = classify(map, {{y, y}}, 1);
    SaddleOrbit s;
    s.points = {{y, y}};
    s.lam_u = cls.lambda1;
    s.lam_s = cls.lambda2;
    s.v_u = cls.v1;
    s.v_s = cls.v2;
    REQUIRE(std::abs(s.lam_u) > 1.0);
    CHECK_THROWS_AS(solve_chart(map, s, 20), ResonanceError);
}

TEST_CASE("chart basics: psi(0) = p, psi'(0) = v_u, coefficient decay") {
    const Fixture& fx = map_a();
    CHECK(distance(fx.chart.coeffs[0], fx.saddle.base()) == 0.0);
    CHECK(distance(fx.chart.coeffs[1], fx.saddle.v_u) == 0.0);
    // log |c_k| is close to linear in k
    std::vector<double> ks, ls;
    for (std::size_t k = 5; k < fx.chart.coeffs.size(); ++k) {
        const double n = fx.chart.coeffs[k].norm_inf();
        if (n < 1e-250) break;
        ks.push_back(static_cast<double>(k));
        ls.push_back(std::log(n));
    }
    REQUIRE(ks.size() > 10);
    const double n = static_cast<double>(ks.size());
    double sk = 0, sl = 0, skk = 0, skl = 0, sll = 0;
    for (std::size_t i = 0; i < ks.size(); ++i) {
        sk += ks[i];
        sl += ls[i];
        skk += ks[i] * ks[i];
        skl += ks[i] * ls[i];
        sll += ls[i] * ls[i];
    }
    const double cov = skl - sk * sl / n, vk = skk - sk * sk / n, vl = sll - sl * sl / n;
    CHECK(cov * cov / (vk * vl) > 0.99);
    CHECK(cov < 0.0);
}

TEST_CASE("series and pullback evaluation agree near rho_val") {
    const Fixture& fx = map_a();
    const UnstableChart& ch = fx.chart;
    for (int k = 0; k < 64; ++k) {
        const cx z = std::polar(ch.rho_val * (0.5 + 0.5 * (k % 8) / 7.0), 2 * std::numbers::pi * k / 64);
        const PointC2 direct = eval_series(ch, z);
        const PointC2 pulled = fx.map.forward(eval_series(ch, z / ch.multiplier));
        CHECK(distance(direct, pulled) < 1e-9 * (1 + direct.norm_inf()));
    }
}

TEST_CASE("leaf Green function vanishes at the saddle") {
    const Fixture& fx = map_a();
    CHECK(leaf_green(fx.normalized, 0.0).value == 0.0);
}

TEST_CASE("normalization is idempotent and gauge invariant") {
    const Fixture& fx = map_a();
    const UnstableChart twice = normalize_chart(fx.normalized);
    CHECK(std::abs(twice.alpha / fx.normalized.alpha - 1.0) < 1e-6);
    const UnstableChart scaled = rescale_chart(fx.chart, 2.0);
    const UnstableChart renorm = normalize_chart(scaled);
    for (cx z : {cx{0.4, 0.1}, cx{-1.2, 0.8}})
        CHECK(distance(eval_chart(renorm, z), eval_chart(fx.normalized, z)) < 1e-6);
}

TEST_CASE("leaf Bottcher coordinate agrees with the V+ coordinate") {
    const Fixture& fx = map_a();
    const UnstableChart& ch = fx.normalized;
    const cx base = 1.0;
    for (cx z : {cx{1.0}, cx{2.5, 0.3}, cx{4.0, -1.0}}) {
        const BottcherValue b = leaf_bottcher(ch, z, base);
        CHECK(std::abs(std::abs(b.z) - std::exp(leaf_green(ch, z).value)) < 1e-6 * std::abs(b.z));
        const PointC2 q = eval_chart(ch, z);
        if (ch.map.in_vplus(q)) {
            const cx direct = bottcher_vplus(ch.map, q).z;
            CHECK(std::abs(b.z - direct) < 1e-8 * std::abs(direct));
        }
    }
}

TEST_CASE("continuation around a contractible loop in U+ returns to the start") {
    const Fixture& fx = map_a();
    const UnstableChart& ch = fx.normalized;
    const std::vector<cx> loop{{1.5, 1.5}, {2.5, 1.5}, {2.5, 2.5}, {1.5, 2.5}, {1.5, 1.5}};
    const cx L0 = continue_log(ch, 1.0, base_log(ch, 1.0), loop[0]);
    cx L = L0;
    for (std::size_t k = 1; k < loop.size(); ++k) L = continue_log(ch, loop[k - 1], L, loop[k]);
    CHECK(std::abs(L - L0) < 1e-8);
}
