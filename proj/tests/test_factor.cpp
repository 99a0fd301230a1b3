#include "doctest.h"

#include <random>

#include "bnc/factor.hpp"
#include "support.hpp"

using namespace bnc;

TEST_CASE("multiply by the empty-scope identity leaves a factor unchanged") {
    Factor b({0}, {2}, {0.3, 0.7});
    Factor out = Factor::identity().multiply(b);
    CHECK(out.scope() == b.scope());
    CHECK(out.values() == b.values());
}

TEST_CASE("multiply on a shared scope is elementwise") {
    Factor a({0}, {2}, {0.6, 0.4});
    Factor b({0}, {2}, {0.5, 0.5});
    Factor out = a.multiply(b);
    CHECK(out.values()[0] == 0.30);
    CHECK(out.values()[1] == 0.20);
}

TEST_CASE("multiply P(Y) by P(X|Y) reproduces the enumerated joint") {
    std::mt19937_64 rng(17);
    auto u = [&] { return 0.05 + 0.9 * (double(rng() >> 11) * 0x1.0p-53); };
    double py0 = u();
    double px0y0 = u(), px0y1 = u();
    Factor py({0}, {2}, {py0, 1 - py0});
    Factor pxy({0, 1}, {2, 2}, {px0y0, 1 - px0y0, px0y1, 1 - px0y1});
    Factor joint = py.multiply(pxy);
    // direct enumeration oracle
    double expect[2][2] = {{py0 * px0y0, py0 * (1 - px0y0)},
                           {(1 - py0) * px0y1, (1 - py0) * (1 - px0y1)}};
    for (int y = 0; y < 2; ++y)
        for (int x = 0; x < 2; ++x) {
            Instantiation i;
            i.set(0, y);
            i.set(1, x);
            CHECK(joint.at(i) == doctest::Approx(expect[y][x]).epsilon(1e-12));
        }
}

TEST_CASE("multiply is commutative and associative up to scope alignment") {
    std::mt19937_64 rng(23);
    auto u = [&] { return double(rng() >> 11) * 0x1.0p-53; };
    Factor a({0, 2}, {2, 3}, {u(), u(), u(), u(), u(), u()});
    Factor b({1, 2}, {2, 3}, {u(), u(), u(), u(), u(), u()});
    Factor c({0}, {2}, {u(), u()});
    Factor ab = a.multiply(b), ba = b.multiply(a);
    CHECK(ab.scope() == ba.scope());
    for (size_t i = 0; i < ab.size(); ++i)
        CHECK(ab.values()[i] == doctest::Approx(ba.values()[i]).epsilon(1e-12));
    Factor l = a.multiply(b).multiply(c), r = a.multiply(b.multiply(c));
    CHECK(l.scope() == r.scope());
    for (size_t i = 0; i < l.size(); ++i)
        CHECK(l.values()[i] == doctest::Approx(r.values()[i]).epsilon(1e-12));
}

TEST_CASE("project to the full scope is a no-op") {
    Factor a({0, 1}, {2, 2}, {0.54, 0.06, 0.08, 0.32});
    Factor out = a.project(a.scope());
    CHECK(out.values() == a.values());
}

TEST_CASE("project sums out eliminated variables") {
    Factor a({0, 1}, {2, 2}, {0.54, 0.06, 0.08, 0.32});
    Factor out = a.project({0});
    CHECK(out.values()[0] == doctest::Approx(0.60).epsilon(1e-12));
    CHECK(out.values()[1] == doctest::Approx(0.40).epsilon(1e-12));
}

TEST_CASE("project of a normalized joint to the empty scope is 1") {
    Factor a({0, 1}, {2, 2}, {0.54, 0.06, 0.08, 0.32});
    Factor out = a.project({});
    CHECK(out.is_scalar());
    CHECK(out.scalar() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("project with a non-subset target is a structural error") {
    Factor a({0}, {2}, {0.5, 0.5});
    CHECK_THROWS_AS(a.project({1}), StructuralError);
}

TEST_CASE("divide by the identity leaves a factor unchanged") {
    Factor a({0}, {2}, {0.2, 0.8});
    Factor out = a.divide(Factor::identity());
    CHECK(out.values() == a.values());
}

TEST_CASE("divide uses the 0/0 = 0 convention") {
    Factor a({0}, {2}, {0.2, 0.0});
    Factor b({0}, {2}, {0.4, 0.0});
    Factor out = a.divide(b);
    CHECK(out.values()[0] == 0.5);
    CHECK(out.values()[1] == 0.0);
}

TEST_CASE("positive-by-zero division is a numerical error") {
    Factor a({0}, {2}, {0.2, 0.1});
    Factor b({0}, {2}, {0.4, 0.0});
    CHECK_THROWS_AS(a.divide(b), NumericalError);
}

TEST_CASE("divide broadcasts a sub-scope divisor") {
    Factor a({0, 1}, {2, 2}, {0.2, 0.2, 0.3, 0.3});
    Factor b({0}, {2}, {0.4, 0.6});
    Factor out = a.divide(b);
    CHECK(out.values()[0] == doctest::Approx(0.5));
    CHECK(out.values()[1] == doctest::Approx(0.5));
    CHECK(out.values()[2] == doctest::Approx(0.5));
    CHECK(out.values()[3] == doctest::Approx(0.5));
}

TEST_CASE("scope cardinality mismatch is a structural error") {
    Factor a({0}, {2}, {0.5, 0.5});
    Factor b({0}, {3}, {0.2, 0.3, 0.5});
    CHECK_THROWS_AS(a.multiply(b), StructuralError);
}

TEST_CASE("factors reject NaN, infinity and negative entries") {
    CHECK_THROWS_AS(Factor({0}, {2}, {0.5, -0.5}), StructuralError);
    CHECK_THROWS_AS(Factor({0}, {2}, {0.5, std::nan("")}), StructuralError);
}

TEST_CASE("unsorted construction scopes are canonicalized") {
    // values given in (var1, var0) order must land in (var0, var1) layout
    Factor f({1, 0}, {2, 2}, {1.0, 2.0, 3.0, 4.0});
    CHECK(f.scope() == VarSet{0, 1});
    Instantiation i;
    i.set(0, 1);
    i.set(1, 0);
    CHECK(f.at(i) == 2.0); // (v1=0, v0=1)
}

TEST_CASE("reduce slices assigned variables out of the scope") {
    Factor f = testsupport::two_var_net().cpt(1); // P(X|Y) over {Y,X}
    Instantiation e;
    e.set(1, 0); // X = x0
    Factor out = f.reduce(e);
    CHECK(out.scope() == VarSet{0});
    CHECK(out.values()[0] == doctest::Approx(0.9));
    CHECK(out.values()[1] == doctest::Approx(0.2));
}

TEST_CASE("instantiation iteration is lexicographic by variable then state") {
    InstantiationIter it({0, 1}, {2, 3});
    std::vector<std::vector<int>> seen;
    for (; !it.done(); it.next()) seen.push_back(it.states());
    CHECK(seen == std::vector<std::vector<int>>{
                      {0, 0}, {0, 1}, {0, 2}, {1, 0}, {1, 1}, {1, 2}});
}
