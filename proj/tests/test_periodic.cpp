#include "henon/parallel.hpp"
#include "henon/periodic.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <numbers>

using namespace henon;

namespace {

HenonMap quadratic(cx c, cx a) { return make_henon({make_factor({c, 0.0}, 2, a)}); }

bool contains(const std::vector<PeriodicOrbit>& orbits, const PointC2& p) {
    for (const auto& o : orbits)
        for (const auto& q : o.points)
            if (distance(p, q) < 1e-9) return true;
    return false;
}

}  // namespace

TEST_CASE("fixed points of a quadratic map match the quadratic formula") {
    for (cx c : {cx{0.0}, cx{-1.0}, cx{-6.0}, cx{0.2, 0.3}}) {
        const cx a{0.3};
        const HenonMap map = quadratic(c, a);
        const auto orbits = find_periodic(map, 1, map.escape_radius(), 24);
        const auto roots = oracle::quadratic_fixed_points(c, a);
        CHECK(orbits.size() == 2);
        for (cx y : roots) CHECK(contains(orbits, {y, y}));
        for (const auto& o : orbits) CHECK(o.residual < 1e-12);
    }
}

TEST_CASE("map A saddle data agrees with the eigenvalue oracle") {
    const HenonMap map = quadratic(0.0, 0.3);
    const auto saddles = find_saddles(map, 1, map.escape_radius(), 24);
    REQUIRE(saddles.size() == 1);
    const SaddleOrbit& s = saddles[0];
    CHECK(distance(s.base(), {1.3, 1.3}) < 1e-12);
    const auto ev = oracle::eigenvalues(0.0, 1.0, -0.3, 2.6);
    CHECK(std::abs(s.lam_u - ev[0]) < 1e-12);
    CHECK(std::abs(s.lam_s - ev[1]) < 1e-12);
    CHECK(std::abs(s.lam_u * s.lam_s - 0.3) < 1e-12);
    CHECK(s.lyap == doctest::Approx(std::log(std::abs(ev[0]))).epsilon(1e-12));
    // eigenvector: Df v = lambda v
    const Mat2 J = jacobian(map, s.base(), 1, Direction::Forward);
    CHECK(distance(J.apply(s.v_u), s.lam_u * s.v_u) < 1e-12);
    CHECK(distance(J.apply(s.v_s), s.lam_s * s.v_s) < 1e-12);
}

TEST_CASE("period-2 orbit of map A sits on the cube roots of (1 + a)^3") {
    const HenonMap map = quadratic(0.0, 0.3);
    const auto orbits = find_periodic(map, 2, map.escape_radius(), 32);
    std::size_t points = 0;
    for (const auto& o : orbits) points += o.points.size();
    CHECK(orbits.size() == 3);
    CHECK(points == 4);
    const cx w = std::polar(1.0, 2 * std::numbers::pi / 3);
    CHECK(contains(orbits, {1.3 * w * w, 1.3 * w}));
    CHECK(contains(orbits, {1.3 * w, 1.3 * w * w}));
    for (const auto& o : orbits)
        if (o.period == 2) {
            const Classification cls = classify(map, o.points, 2);
            CHECK(std::abs(cls.lambda1 * cls.lambda2 - 0.09) < 1e-10);
        }
}

TEST_CASE("orbit properties: minimal period, closure, multiplier product") {
    const HenonMap map = quadratic(-1.5, cx{0.2, 0.1});
    const auto orbits = find_periodic(map, 3, map.escape_radius(), 24);
    CHECK_FALSE(orbits.empty());
    for (const auto& o : orbits) {
        CHECK(static_cast<int>(o.points.size()) == o.period);
        CHECK(3 % o.period == 0);
        for (std::size_t k = 0; k < o.points.size(); ++k) {
            const PointC2 next = map.forward(o.points[k]);
            CHECK(distance(next, o.points[(k + 1) % o.points.size()]) < 1e-9);
        }
        const Classification cls = classify(map, o.points, o.period);
        CHECK(std::abs(cls.lambda1 * cls.lambda2 - std::pow(map.jac(), o.period)) < 1e-9);
        CHECK(std::abs(cls.lambda1) >= std::abs(cls.lambda2));
    }
    for (std::size_t k = 1; k < orbits.size(); ++k)
        CHECK((orbits[k - 1].period < orbits[k].period ||
               (orbits[k - 1].period == orbits[k].period && !lex_less(orbits[k].points[0], orbits[k - 1].points[0]))));
}

TEST_CASE("multiplier classification") {
    CHECK(kind_from_multipliers(2.0, 0.1) == OrbitKind::Saddle);
    CHECK(kind_from_multipliers(0.5, 0.1) == OrbitKind::Sink);
    CHECK(kind_from_multipliers(3.0, 2.0) == OrbitKind::Source);
    CHECK(kind_from_multipliers(1.0 + 1e-9, 0.3) == OrbitKind::Indeterminate);
    CHECK(kind_from_multipliers(cx{0.0, 1.0 - 1e-9}, 0.3) == OrbitKind::Indeterminate);
}

TEST_CASE("fixed point with multiplier 1 + 1e-9 is indeterminate and not a saddle") {
    const double a = 0.3, lam = 1.0 + 1e-9;
    const double y = 0.5 * (lam + a / lam);  // trace of Df = 2y = lam + a / lam
    const double c = (1 + a) * y - y * y;
    const HenonMap map = quadratic(c, a);
    const Classification cls = classify(map, {{y, y}}, 1);
    CHECK(std::abs(std::abs(cls.lambda1) - lam) < 1e-12);
    CHECK(cls.kind == OrbitKind::Indeterminate);
    for (const auto& s : find_saddles(map, 1, map.escape_radius(), 24)) CHECK(distance(s.base(), {y, y}) > 1e-6);
}

TEST_CASE("periodic search is independent of the worker count") {
    const HenonMap map = quadratic(-1.0, 0.3);
    set_thread_count(1);
    const auto one = find_periodic(map, 4, map.escape_radius(), 24);
    set_thread_count(4);
    const auto four = find_periodic(map, 4, map.escape_radius(), 24);
    set_thread_count(0);
    REQUIRE(one.size() == four.size());
    for (std::size_t k = 0; k < one.size(); ++k) {
        REQUIRE(one[k].points.size() == four[k].points.size());
        for (std::size_t i = 0; i < one[k].points.size(); ++i) {
            CHECK(one[k].points[i].x == four[k].points[i].x);
            CHECK(one[k].points[i].y == four[k].points[i].y);
        }
    }
}

TEST_CASE("map B fixed points and the map A sink") {
    const HenonMap b = quadratic(-6.0, 0.3);
    const auto orbits = find_periodic(b, 1, b.escape_radius(), 24);
    REQUIRE(orbits.size() == 2);
    const double r1 = (1.3 + std::sqrt(25.69)) / 2, r2 = (1.3 - std::sqrt(25.69)) / 2;
    CHECK(contains(orbits, {r1, r1}));
    CHECK(contains(orbits, {r2, r2}));
    CHECK(std::abs(r1 - 3.18427) < 1e-5);
    CHECK(std::abs(r2 + 1.88427) < 1e-5);

    const HenonMap a = quadratic(0.0, 0.3);
    const Classification sink = classify(a, {{0.0, 0.0}}, 1);
    CHECK(sink.kind == OrbitKind::Sink);
    CHECK(std::abs(std::abs(sink.lambda1) - std::sqrt(0.3)) < 1e-12);
    CHECK(std::abs(std::abs(sink.lambda2) - std::sqrt(0.3)) < 1e-12);
    CHECK(std::abs(sink.lambda1 * sink.lambda1 + 0.3) < 1e-12);
}
