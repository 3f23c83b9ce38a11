#include "henon/map_spec.hpp"

#include <doctest.h>

using namespace henon;

TEST_CASE("complex literals") {
    CHECK(parse_complex("0.3") == cx{0.3});
    CHECK(parse_complex("0.3+0.1i") == cx{0.3, 0.1});
    CHECK(parse_complex("-2e-3-i") == cx{-2e-3, -1.0});
    CHECK(parse_complex("(1.5-2i)") == cx{1.5, -2.0});
    CHECK(parse_complex(" 4i ") == cx{0.0, 4.0});
    CHECK_THROWS_AS(parse_complex(""), MapError);
    CHECK_THROWS_AS(parse_complex("1..2"), MapError);
    CHECK_THROWS_AS(parse_complex("1+"), MapError);
}

TEST_CASE("factor grammar") {
    const HenonFactor a = parse_factor("y^2;a=0.3");
    CHECK(a.poly.degree() == 2);
    CHECK(a.poly.coeffs() == std::vector<cx>{0.0, 0.0});
    CHECK(a.a == cx{0.3});

    const HenonFactor b = parse_factor("y^2-6;a=0.3");
    CHECK(b.poly.coeffs()[0] == cx{-6.0});

    const HenonFactor c = parse_factor("y^3 + (0.1+0.2i)y - 1 + 0.5i; a = 0.3+0.1i");
    CHECK(c.poly.degree() == 3);
    CHECK(c.poly.coeffs()[0] == cx{-1.0, 0.5});
    CHECK(c.poly.coeffs()[1] == cx{0.1, 0.2});
    CHECK(c.poly.coeffs()[2] == cx{0.0});
    CHECK(c.a == cx{0.3, 0.1});

    const HenonFactor d = parse_factor("y^4-2.5*y^2+1e-3y;a=-i");
    CHECK(d.poly.coeffs()[2] == cx{-2.5});
    CHECK(d.poly.coeffs()[1] == cx{1e-3});
    CHECK(d.a == cx{0.0, -1.0});
}

TEST_CASE("malformed factors are rejected") {
    CHECK_THROWS_AS(parse_factor("y^2"), MapError);
    CHECK_THROWS_AS(parse_factor("2y^2;a=1"), MapError);
    CHECK_THROWS_AS(parse_factor("y+1;a=1"), MapError);
    CHECK_THROWS_AS(parse_factor("y^2;b=1"), MapError);
    CHECK_THROWS_AS(parse_factor("y^2.5;a=1"), MapError);
    CHECK_THROWS_AS(parse_factor("y^2 x;a=1"), MapError);
    CHECK_THROWS_AS(parse_map({}), MapError);
    CHECK_THROWS_AS(parse_map({"y^2;a=0"}), MapError);
}

TEST_CASE("repeated factors compose in order") {
    const HenonMap m = parse_map({"y^2-1;a=0.5", "y^3;a=0.7"});
    CHECK(m.degree() == 6);
    const PointC2 q{0.1, 0.2};
    CHECK(distance(m.forward(q), m.factors()[0].forward(m.factors()[1].forward(q))) == 0.0);
    CHECK(m.factors()[0].poly.degree() == 2);
}

TEST_CASE("format_complex round trips") {
    for (cx z : {cx{0.3}, cx{0.3, -0.1}, cx{-1e-20, 5.0}}) CHECK(parse_complex(format_complex(z)) == z);
}
