#include <catch2/catch_amalgamated.hpp>

#include "regolith/geometry.hpp"
#include "regolith/rng.hpp"

using namespace regolith;

TEST_CASE("normalize_angle wraps into (-pi, pi]", "[geometry]") {
    CHECK(normalize_angle(3.0 * kPi) == Catch::Approx(kPi));
    CHECK(normalize_angle(-kPi) == Catch::Approx(kPi));  // half-open convention
    CHECK(normalize_angle(0.1) == Catch::Approx(0.1));
    CHECK(normalize_angle(kPi) == Catch::Approx(kPi));
    CHECK(normalize_angle(-3.5 * kPi) == Catch::Approx(0.5 * kPi));

    SeededStream rng(42, "angles");
    for (int i = 0; i < 1000; ++i) {
        const double a = rng.uniform(-50.0, 50.0);
        const double n = normalize_angle(a);
        CHECK(n > -kPi);
        CHECK(n <= kPi);
        // Congruent mod 2*pi.
        CHECK(std::remainder(n - a, 2.0 * kPi) == Catch::Approx(0.0).margin(1e-9));
    }
}

TEST_CASE("pose composition group identities", "[geometry]") {
    const Pose2 p{3.0, -2.0, 0.7};

    SECTION("identity element") {
        const Pose2 q = compose(p, Pose2{});
        CHECK(q.x == Catch::Approx(p.x));
        CHECK(q.y == Catch::Approx(p.y));
        CHECK(q.heading == Catch::Approx(p.heading));
    }

    SECTION("inverse") {
        const Pose2 q = compose(p, invert(p));
        CHECK(q.x == Catch::Approx(0.0).margin(1e-12));
        CHECK(q.y == Catch::Approx(0.0).margin(1e-12));
        CHECK(q.heading == Catch::Approx(0.0).margin(1e-12));
    }

    SECTION("associativity on random triples") {
        SeededStream rng(7, "poses");
        for (int i = 0; i < 200; ++i) {
            auto rand_pose = [&rng] {
                return Pose2{rng.uniform(-100.0, 100.0), rng.uniform(-100.0, 100.0),
                             rng.uniform(-kPi, kPi)};
            };
            const Pose2 a = rand_pose(), b = rand_pose(), c = rand_pose();
            const Pose2 lhs = compose(compose(a, b), c);
            const Pose2 rhs = compose(a, compose(b, c));
            CHECK(lhs.x == Catch::Approx(rhs.x).margin(1e-10));
            CHECK(lhs.y == Catch::Approx(rhs.y).margin(1e-10));
            CHECK(normalize_angle(lhs.heading - rhs.heading) ==
                  Catch::Approx(0.0).margin(1e-10));
        }
    }
}

TEST_CASE("advance integrates a body twist", "[geometry]") {
    SECTION("pure forward at heading zero") {
        const Pose2 p = advance({0, 0, 0}, {1.0, 0.0, 0.0}, 2.0);
        CHECK(p.x == Catch::Approx(2.0));
        CHECK(p.y == Catch::Approx(0.0));
    }
    SECTION("forward at heading pi/2 moves along +Y") {
        const Pose2 p = advance({0, 0, kPi / 2}, {1.0, 0.0, 0.0}, 1.0);
        CHECK(p.x == Catch::Approx(0.0).margin(1e-12));
        CHECK(p.y == Catch::Approx(1.0));
    }
    SECTION("strafe moves along body +Y") {
        const Pose2 p = advance({0, 0, 0}, {0.0, 1.0, 0.0}, 1.0);
        CHECK(p.y == Catch::Approx(1.0));
    }
}

TEST_CASE("point to segment distance", "[geometry]") {
    CHECK(point_segment_distance({5, 3}, {0, 0}, {10, 0}) == Catch::Approx(3.0));
    CHECK(point_segment_distance({-4, 3}, {0, 0}, {10, 0}) == Catch::Approx(5.0));
    CHECK(point_segment_distance({12, 0}, {0, 0}, {10, 0}) == Catch::Approx(2.0));
    CHECK(point_segment_distance({1, 1}, {2, 2}, {2, 2}) == Catch::Approx(std::sqrt(2.0)));
}

TEST_CASE("seeded streams are reproducible and independent", "[geometry]") {
    SeededStream a(123, "odometry/0");
    SeededStream b(123, "odometry/0");
    for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());

    // A named substream does not depend on how much the parent has drawn.
    SeededStream parent1(9);
    SeededStream parent2(9);
    (void)parent2.uniform();
    (void)parent2.normal(0, 1);
    SeededStream s1 = parent1.substream("lidar");
    SeededStream s2 = parent2.substream("lidar");
    for (int i = 0; i < 50; ++i) CHECK(s1.uniform() == s2.uniform());

    // Different names give different sequences.
    SeededStream u = parent1.substream("a");
    SeededStream v = parent1.substream("b");
    int same = 0;
    for (int i = 0; i < 32; ++i) same += (u.uniform() == v.uniform());
    CHECK(same < 4);
}

TEST_CASE("normal sampling has sane moments", "[geometry]") {
    SeededStream rng(2024, "gauss");
    const int n = 20000;
    double sum = 0, sum2 = 0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal(1.5, 2.0);
        sum += z;
        sum2 += z * z;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    CHECK(mean == Catch::Approx(1.5).margin(0.05));
    CHECK(var == Catch::Approx(4.0).margin(0.15));
}
