#include <doctest.h>

#include <cmath>
#include <numbers>

#include "giv/arrow.hpp"
#include "giv/errors.hpp"

using namespace giv;

namespace {

constexpr double kPi = std::numbers::pi;

ArrowConfig two_var_isotropic(double separation,
                              const ProbabilityFunction& f) {
    return ArrowConfig::isotropic({{"A", 0.0}, {"B", separation}}, f);
}

}  // namespace

TEST_SUITE("arrow") {

TEST_CASE("angle helpers wrap and reduce") {
    CHECK(wrap_angle(0.0, kPi / 2.0) == doctest::Approx(kPi / 2.0));
    CHECK(wrap_angle(0.0, 3.0 * kPi / 2.0) == doctest::Approx(-kPi / 2.0));
    CHECK(wrap_angle(kPi / 2.0, 0.0) == doctest::Approx(-kPi / 2.0));
    // The branch cut lands on +pi.
    CHECK(wrap_angle(0.0, kPi) == doctest::Approx(kPi));
    CHECK(reduce_angle(-kPi / 2.0) == doctest::Approx(3.0 * kPi / 2.0));
    CHECK(reduce_angle(2.0 * kPi) == doctest::Approx(0.0));
    CHECK(reduce_angle(5.0 * kPi) == doctest::Approx(kPi));
    CHECK_THROWS_AS(reduce_angle(std::nan("")), NotFinite);
}

TEST_CASE("config validation enforces the declared symmetry level") {
    std::map<std::string, double> dirs = {{"A", 0.0}, {"B", 1.0}};
    auto cos2 = ProbabilityFunction::cosine_squared();
    auto lin = ProbabilityFunction::linear();

    CHECK_NOTHROW(ArrowConfig::isotropic(dirs, cos2));
    CHECK_THROWS_AS(ArrowConfig::isotropic({}, cos2), InvalidConfig);

    // Isotropic requires one shared profile.
    CHECK_THROWS_AS(ArrowConfig(dirs,
                                {{"A", FPair{cos2, cos2}},
                                 {"B", FPair{lin, lin}}},
                                SymmetryLevel::isotropic),
                    ConstraintViolation);

    // Half-turn symmetry of spacetime requires f_plus = f_minus.
    CHECK_THROWS_AS(ArrowConfig(dirs,
                                {{"A", FPair{cos2, lin}},
                                 {"B", FPair{cos2, lin}}},
                                SymmetryLevel::c2_spacetime),
                    ConstraintViolation);
    CHECK_NOTHROW(ArrowConfig(dirs,
                              {{"A", FPair{cos2, cos2}},
                               {"B", FPair{lin, lin}}},
                              SymmetryLevel::c2_spacetime));

    // Unequal pairs are legal when no symmetry is declared.
    CHECK_NOTHROW(ArrowConfig(dirs,
                              {{"A", FPair{cos2, lin}},
                               {"B", FPair{cos2, lin}}},
                              SymmetryLevel::none));

    // Directions and profile assignments must use the same keys.
    CHECK_THROWS_AS(ArrowConfig(dirs, {{"A", FPair{cos2, cos2}}},
                                SymmetryLevel::none),
                    InvalidConfig);
}

TEST_CASE("symmetry level names round trip") {
    for (auto level :
         {SymmetryLevel::none, SymmetryLevel::c2_apparatus,
          SymmetryLevel::c2_spacetime, SymmetryLevel::isotropic}) {
        CHECK(symmetry_level_from_name(to_string(level)) == level);
    }
    CHECK_THROWS_AS(symmetry_level_from_name("c3"), InvalidConfig);
}

TEST_CASE("build rejects lonely and axis-sharing configurations") {
    auto cos2 = ProbabilityFunction::cosine_squared();
    CHECK_THROWS_AS(
        build_arrow_system(ArrowConfig::isotropic({{"A", 0.0}}, cos2)),
        InvalidConfig);
    CHECK_THROWS_AS(
        build_arrow_system(two_var_isotropic(0.0, cos2)),
        DegenerateDirections);
    // Anti-parallel directions share an axis too.
    CHECK_THROWS_AS(
        build_arrow_system(two_var_isotropic(kPi, cos2)),
        DegenerateDirections);
    CHECK_THROWS_AS(
        build_arrow_system(two_var_isotropic(2.0 * kPi - 1e-13, cos2)),
        DegenerateDirections);
}

TEST_CASE("built systems carry plus/minus outcomes with unit eigenvalues") {
    ArrowSystem sys = build_arrow_system(
        two_var_isotropic(kPi / 3.0, ProbabilityFunction::cosine_squared()));
    for (const auto& v : sys.giv().variables()) {
        REQUIRE(v.outcome_labels.size() == 2);
        CHECK(v.outcome_labels[0] == "plus");
        CHECK(v.outcome_labels[1] == "minus");
        CHECK(v.eigenvalues[0] == Complex(1.0, 0.0));
        CHECK(v.eigenvalues[1] == Complex(-1.0, 0.0));
    }
    CHECK(sys.direction("B") == doctest::Approx(kPi / 3.0));
}

TEST_CASE("cross embeddings follow the pair geometry") {
    ArrowSystem sys = build_arrow_system(
        two_var_isotropic(kPi / 3.0, ProbabilityFunction::cosine_squared()));
    const Mat& m = sys.giv().embedding("A", "B").matrix();
    // Separation pi/3 under the cosine profile is a rotation by pi/6.
    Mat expected(2, 2);
    double c = std::cos(kPi / 6.0), s = std::sin(kPi / 6.0);
    expected << c, -s, s, c;
    CHECK(max_abs(m - expected) < 1e-14);
    // The reverse embedding is the inverse rotation.
    const Mat& back = sys.giv().embedding("B", "A").matrix();
    CHECK(max_abs(back - expected.transpose()) < 1e-14);
}

TEST_CASE("prepare reproduces eigenstates on the variable axes") {
    ArrowSystem sys = build_arrow_system(
        two_var_isotropic(kPi / 3.0, ProbabilityFunction::linear()));

    GivState along = prepare(sys, 0.0);
    CHECK(max_abs(along.component("A").coords() -
                  Vec(StateVector::axis("A", 2, 0).coords())) == 0.0);

    GivState against = prepare(sys, kPi);
    CHECK(restricted_born(against, "A", 1) == doctest::Approx(1.0));
    CHECK(restricted_born(against, "A", 0) ==
          doctest::Approx(0.0).epsilon(1e-14));

    GivState at_b = prepare(sys, kPi / 3.0);
    CHECK(restricted_born(at_b, "B", 0) == doctest::Approx(1.0));
}

TEST_CASE("prepared probabilities follow f of the angular distance") {
    auto f = ProbabilityFunction::cosine_squared();
    ArrowSystem sys = build_arrow_system(two_var_isotropic(kPi / 2.0, f));
    for (double orientation :
         {0.1, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 2.0 * kPi + 0.7}) {
        GivState state = prepare(sys, orientation);
        for (const std::string id : {"A", "B"}) {
            double theta = std::abs(wrap_angle(sys.direction(id), orientation));
            CHECK(restricted_born(state, id, 0) ==
                  doctest::Approx(f(theta)).epsilon(1e-12));
        }
    }
}

TEST_CASE("closure defect oracle values") {
    CHECK(c2_closure_defect(ProbabilityFunction::linear(), 181) < 1e-12);
    CHECK(c2_closure_defect(ProbabilityFunction::cosine_squared(), 181) <
          1e-12);
    CHECK(c2_closure_defect(ProbabilityFunction::quadratic(), 181) ==
          doctest::Approx(0.5).epsilon(1e-12));
    CHECK_THROWS_AS(c2_closure_defect(ProbabilityFunction::linear(), 1),
                    InvalidConfig);
}

TEST_CASE("omega angle halves the separation only for the cosine profile") {
    auto cos2 = ProbabilityFunction::cosine_squared();
    for (int k = 0; k <= 36; ++k) {
        double theta = kPi * k / 36.0;
        CHECK(omega_angle(cos2, theta) ==
              doctest::Approx(theta / 2.0).epsilon(1e-12));
    }
    CHECK(omega_angle(ProbabilityFunction::linear(), kPi / 2.0) ==
          doctest::Approx(kPi / 4.0).epsilon(1e-12));
    CHECK(std::abs(omega_angle(ProbabilityFunction::linear(), kPi / 3.0) -
                   kPi / 6.0) > 0.05);
}

TEST_CASE("composition defect oracle values") {
    CHECK(composition_defect(ProbabilityFunction::linear(), kPi / 4.0,
                             kPi / 4.0) > 0.01);
    auto cos2 = ProbabilityFunction::cosine_squared();
    for (int i = 0; i <= 8; ++i) {
        for (int j = 0; i + j <= 8; ++j) {
            CHECK(composition_defect(cos2, kPi * i / 8.0, kPi * j / 8.0) <
                  1e-12);
        }
    }
    CHECK_THROWS_AS(
        composition_defect(cos2, 0.7 * kPi, 0.7 * kPi), AngleOutOfRange);
}

TEST_CASE("isotropy scan passes exactly the cosine profile") {
    IsotropyReport report =
        isotropy_scan(builtin_probability_functions(), 91, 1e-9);
    REQUIRE(report.rows.size() == 3);
    for (const auto& row : report.rows) {
        CAPTURE(row.name);
        if (row.name == "cosine_squared") {
            CHECK(row.passes);
            CHECK(row.max_composition_defect <= 1e-9);
            CHECK(row.max_closure_defect <= 1e-9);
        } else {
            CHECK_FALSE(row.passes);
            CHECK(row.max_composition_defect > 1e-2);
        }
    }
    CHECK(report.grid_points == 91);
    CHECK_THROWS_AS(isotropy_scan({}, 91, 1e-9), InvalidConfig);
    CHECK_THROWS_AS(isotropy_scan(builtin_probability_functions(), 1, 1e-9),
                    InvalidConfig);
}

TEST_CASE("spin reference curve") {
    CHECK(spin_half_reference(0.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(spin_half_reference(kPi) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(spin_half_reference(kPi / 2.0) ==
          doctest::Approx(0.5).epsilon(1e-14));
    CHECK(spin_half_reference(2.0 * kPi / 3.0) ==
          doctest::Approx(0.25).epsilon(1e-13));
    CHECK_THROWS_AS(spin_half_reference(-0.5), AngleOutOfRange);
    CHECK_THROWS_AS(spin_half_reference(kPi + 0.5), AngleOutOfRange);
}

TEST_CASE("sampling is reproducible and tracks the model") {
    ArrowSystem sys = build_arrow_system(
        two_var_isotropic(kPi / 2.0, ProbabilityFunction::cosine_squared()));
    FrequencyTable a = sample_frequencies(sys, kPi / 3.0, "A", 20000, 7, 1);
    FrequencyTable b = sample_frequencies(sys, kPi / 3.0, "A", 20000, 7, 1);
    REQUIRE(a.rows.size() == 2);
    CHECK(a.rows[0].count == b.rows[0].count);
    CHECK(a.rows[0].count + a.rows[1].count == 20000);
    CHECK(a.variable == "A");
    CHECK(a.seed == 7);
    CHECK(a.stream == 1);
    CHECK(a.rng == "pcg32");

    for (const auto& row : a.rows) {
        CHECK(row.frequency ==
              doctest::Approx(static_cast<double>(row.count) / 20000)
                  .epsilon(1e-15));
        CHECK(row.std_error ==
              doctest::Approx(std::sqrt(row.probability *
                                        (1.0 - row.probability) / 20000.0))
                  .epsilon(1e-12));
        CHECK(std::abs(row.frequency - row.probability) <
              4.0 * row.std_error);
    }
    CHECK(a.rows[0].probability ==
          doctest::Approx(std::cos(kPi / 6.0) * std::cos(kPi / 6.0))
              .epsilon(1e-12));

    FrequencyTable other_stream =
        sample_frequencies(sys, kPi / 3.0, "A", 20000, 7, 2);
    CHECK(other_stream.rows[0].count != a.rows[0].count);

    CHECK_THROWS_AS(sample_frequencies(sys, 0.0, "A", 0, 1), InvalidConfig);
    CHECK_THROWS_AS(sample_frequencies(sys, 0.0, "nope", 10, 1),
                    UnknownVariable);
}

}  // TEST_SUITE
