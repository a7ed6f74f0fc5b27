#include <doctest.h>

#include <cmath>
#include <map>
#include <numbers>

#include "giv/arrow.hpp"
#include "giv/errors.hpp"
#include "giv/symmetry.hpp"

using namespace giv;

namespace {

constexpr double kPi = std::numbers::pi;

Mat pauli_x() {
    Mat m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

Mat pauli_z() {
    Mat m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

Mat rotation(double angle) {
    Mat m(2, 2);
    m << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    return m;
}

Representation c2_rep(const Mat& flip, bool projective = false) {
    return Representation(FiniteGroup::cyclic(2), "spin",
                          {{"e", Mat::Identity(2, 2)}, {"g", flip}},
                          projective);
}

GivSystem arrow_system(std::map<std::string, double> directions,
                       const ProbabilityFunction& f) {
    return build_arrow_system(ArrowConfig::isotropic(std::move(directions), f))
        .giv();
}

}  // namespace

TEST_SUITE("symmetry") {

TEST_CASE("finite groups validate their multiplication table") {
    FiniteGroup c2 = FiniteGroup::cyclic(2);
    CHECK(c2.size() == 2);
    CHECK(c2.identity() == "e");
    CHECK(c2.op("g", "g") == "e");
    CHECK(c2.inverse(c2.index_of("g")) == c2.index_of("g"));

    FiniteGroup c4 = FiniteGroup::cyclic(4);
    CHECK(c4.op("g", "g3") == "e");
    CHECK(c4.op("g2", "g3") == "g");

    // No identity row.
    CHECK_THROWS_AS(FiniteGroup({"e", "g"}, {{"g", "e"}, {"e", "g"}}, "e"),
                    ConstraintViolation);
    // Broken associativity / latin square.
    CHECK_THROWS_AS(FiniteGroup({"e", "g"}, {{"e", "g"}, {"g", "g"}}, "e"),
                    ConstraintViolation);
    // Unknown element in the table.
    CHECK_THROWS_AS(FiniteGroup({"e", "g"}, {{"e", "g"}, {"g", "x"}}, "e"),
                    InvalidConfig);
    CHECK_THROWS_AS(FiniteGroup::cyclic(25), ConstraintViolation);
    CHECK_THROWS_AS(FiniteGroup::cyclic(0), ConstraintViolation);

    CHECK(c2.same_table(FiniteGroup::cyclic(2)));
    CHECK_FALSE(c2.same_table(c4));
}

TEST_CASE("representation construction checks shapes only") {
    CHECK_NOTHROW(c2_rep(pauli_x()));
    // A matrix set that is NOT a representation still constructs; the
    // verifier is the place that measures it.
    CHECK_NOTHROW(c2_rep(0.5 * pauli_x()));
    CHECK_THROWS_AS(Representation(FiniteGroup::cyclic(2), "spin",
                                   {{"e", Mat::Identity(2, 2)}}),
                    InvalidConfig);
    CHECK_THROWS_AS(Representation(FiniteGroup::cyclic(2), "spin",
                                   {{"e", Mat::Identity(2, 2)},
                                    {"g", Mat::Identity(3, 3)}}),
                    DimensionMismatch);
}

TEST_CASE("verify_representation accepts the half-turn flip") {
    RepresentationCheck check = verify_representation(c2_rep(pauli_x()));
    CHECK(check.valid);
    CHECK(check.max_defect < 1e-14);
    CHECK(check.product_defect < 1e-14);
    CHECK(check.unitarity_defect < 1e-14);
}

TEST_CASE("verify_representation flags every single-entry perturbation") {
    for (const Mat& base : {pauli_x(), pauli_z()}) {
        for (const std::string elem : {"e", "g"}) {
            for (Eigen::Index r = 0; r < 2; ++r) {
                for (Eigen::Index c = 0; c < 2; ++c) {
                    for (double delta : {0.1, -0.1}) {
                        std::map<std::string, Mat> mats = {
                            {"e", Mat::Identity(2, 2)}, {"g", base}};
                        mats[elem](r, c) += delta;
                        Representation rep(FiniteGroup::cyclic(2), "spin",
                                           mats);
                        RepresentationCheck check =
                            verify_representation(rep, 1e-6);
                        CAPTURE(elem);
                        CAPTURE(r);
                        CAPTURE(c);
                        CAPTURE(delta);
                        CHECK_FALSE(check.valid);
                        CHECK(check.max_defect >= 0.09);
                    }
                }
            }
        }
    }
}

TEST_CASE("projective verification allows a global phase per product") {
    // A flip realized with a half-turn spinor rotation squares to minus the
    // identity, so it only closes projectively.
    Mat spinor_flip(2, 2);
    spinor_flip << Complex(0, 0), Complex(-1, 0), Complex(1, 0), Complex(0, 0);
    Representation strict = c2_rep(spinor_flip, false);
    CHECK_FALSE(verify_representation(strict).valid);

    Representation projective = c2_rep(spinor_flip, true);
    RepresentationCheck check = verify_representation(projective);
    CHECK(check.valid);
    CHECK(check.max_defect < 1e-14);
}

TEST_CASE("parallel-axis transition is orthogonal for rigid systems") {
    GivSystem sys = arrow_system({{"A", 0.0}, {"B", kPi / 3.0}},
                                 ProbabilityFunction::cosine_squared());
    TransitionMatrix s = build_S_from_parallel_axes(sys, "A", "B");
    CHECK(s.from() == "A");
    CHECK(s.to() == "B");
    CHECK(is_unitary(s.matrix(), 1e-10).unitary);
    CHECK_THROWS_AS(build_S_from_parallel_axes(sys, "A", "A"), SameVariable);
}

TEST_CASE("parallel-axis transition detects singular embeddings") {
    Mat collapsed(2, 2);
    collapsed << 1, 1, 0, 0;
    VariableSpec a{"a", {"p", "m"}, {}};
    VariableSpec b{"b", {"p", "m"}, {}};
    GivSystem sys({a, b}, {TransitionMatrix("b", "a", collapsed),
                           TransitionMatrix("a", "b", collapsed)});
    CHECK_THROWS_AS(build_S_from_parallel_axes(sys, "a", "b"),
                    SingularEmbedding);
}

TEST_CASE("generalized equivalence certifies conjugated representations") {
    Representation on_a(FiniteGroup::cyclic(2), "a",
                        {{"e", Mat::Identity(2, 2)}, {"g", pauli_x()}});
    Mat r = rotation(kPi / 5.0);
    Representation on_b(FiniteGroup::cyclic(2), "b",
                        {{"e", Mat::Identity(2, 2)},
                         {"g", r * pauli_x() * r.adjoint()}});
    TransitionMatrix s("a", "b", r);
    EquivalenceCertificate cert =
        generalized_equivalence_check(on_a, on_b, s, 1e-9);
    CHECK(cert.valid());
    CHECK(cert.similarity_defect < 1e-12);
    CHECK(cert.unitarity_defect < 1e-12);
    CHECK(cert.from_space == "a");
    CHECK(cert.to_space == "b");
}

TEST_CASE("generalized equivalence rejects structural mismatches") {
    Representation on_a(FiniteGroup::cyclic(2), "a",
                        {{"e", Mat::Identity(2, 2)}, {"g", pauli_x()}});
    Representation on_b(FiniteGroup::cyclic(2), "b",
                        {{"e", Mat::Identity(2, 2)}, {"g", pauli_z()}});

    // Same tables, but sigma_x and sigma_z are not conjugate via I.
    TransitionMatrix ident("a", "b", Mat::Identity(2, 2));
    EquivalenceCertificate bad =
        generalized_equivalence_check(on_a, on_b, ident, 1e-9);
    CHECK_FALSE(bad.valid());
    CHECK(bad.similarity_defect > 0.9);

    // Group tables must agree.
    Representation on_c4(FiniteGroup::cyclic(4), "b",
                         {{"e", Mat::Identity(2, 2)},
                          {"g", Mat::Identity(2, 2)},
                          {"g2", Mat::Identity(2, 2)},
                          {"g3", Mat::Identity(2, 2)}});
    CHECK_THROWS_AS(generalized_equivalence_check(on_a, on_c4, ident, 1e-9),
                    InvalidConfig);

    // The transition endpoints must name the representation spaces.
    TransitionMatrix wrong("x", "y", Mat::Identity(2, 2));
    CHECK_THROWS_AS(generalized_equivalence_check(on_a, on_b, wrong, 1e-9),
                    SpaceMismatch);
}

TEST_CASE("diagonalizer unitarity gates its input") {
    DiagonalizerResult d = diagonalizer_unitarity(rotation(kPi / 3.0));
    CHECK(d.unitarity_defect < 1e-14);
    REQUIRE(d.phases.size() == 2);
    CHECK(d.phases[0] == doctest::Approx(-kPi / 3.0).epsilon(1e-12));
    CHECK(d.phases[1] == doctest::Approx(kPi / 3.0).epsilon(1e-12));
    CHECK_THROWS_AS(diagonalizer_unitarity(2.0 * Mat::Identity(2, 2)),
                    NotUnitaryInput);
}

TEST_CASE("collapse merges a rigid two-variable system") {
    GivSystem sys = arrow_system({{"A", 0.0}, {"B", kPi / 3.0}},
                                 ProbabilityFunction::cosine_squared());
    MergedModel merged = collapse(sys, 1e-9);
    CHECK(merged.reference == "A");
    CHECK(merged.max_unitarity_defect < 1e-12);
    CHECK(merged.max_transition_defect < 1e-12);
    CHECK(merged.max_born_defect < 1e-12);
    CHECK(max_abs(merged.basis_in_merged.at("A") - Mat::Identity(2, 2)) ==
          0.0);
    CHECK(max_abs(merged.basis_in_merged.at("B") -
                  sys.embedding("A", "B").matrix()) == 0.0);
}

TEST_CASE("collapse handles single-variable systems trivially") {
    VariableSpec solo{"only", {"u", "d"}, {}};
    MergedModel merged = collapse(GivSystem({solo}, {}), 1e-9);
    CHECK(merged.reference == "only");
    CHECK(merged.max_unitarity_defect == 0.0);
}

TEST_CASE("collapse succeeds for many cosine variables inside a half turn") {
    std::map<std::string, double> dirs;
    for (int k = 0; k < 8; ++k) {
        dirs["V" + std::to_string(k)] = k * kPi / 8.0;
    }
    GivSystem sys =
        arrow_system(dirs, ProbabilityFunction::cosine_squared());
    MergedModel merged = collapse(sys, 1e-9);
    CHECK(merged.variables.size() == 8);
    CHECK(merged.max_transition_defect < 1e-9);
    CHECK(merged.max_born_defect < 1e-9);
}

TEST_CASE("collapse reports non-unitary transitions with the worst pair") {
    std::map<std::string, double> dirs = {{"A", 0.0}, {"B", kPi / 3.0}};
    ArrowConfig config(dirs,
                       {{"A", FPair{ProbabilityFunction::cosine_squared(),
                                    ProbabilityFunction::linear()}},
                        {"B", FPair{ProbabilityFunction::cosine_squared(),
                                    ProbabilityFunction::linear()}}},
                       SymmetryLevel::none);
    GivSystem sys = build_arrow_system(config).giv();
    try {
        collapse(sys, 1e-9);
        FAIL("expected NonUnitaryTransition");
    } catch (const NonUnitaryTransition& e) {
        CHECK(e.defect() > 1e-3);
        CHECK(e.from() != e.to());
    }
}

TEST_CASE("collapse reports inconsistent transition triples") {
    GivSystem sys =
        arrow_system({{"A", 0.0}, {"B", kPi / 3.0}, {"C", 2.0 * kPi / 3.0}},
                     ProbabilityFunction::linear());
    try {
        collapse(sys, 1e-9);
        FAIL("expected InconsistentTransitions");
    } catch (const InconsistentTransitions& e) {
        CHECK(e.defect() > 1e-2);
    }
}

TEST_CASE("collapse detects the wrap-around obstruction") {
    // Directions spread over more than a half turn cannot be merged even
    // with the cosine profile: composing around the circle picks up a sign.
    GivSystem sys = arrow_system(
        {{"A", 0.0}, {"B", 2.0 * kPi / 3.0}, {"C", 4.0 * kPi / 3.0}},
        ProbabilityFunction::cosine_squared());
    CHECK_THROWS_AS(collapse(sys, 1e-9), InconsistentTransitions);
}

TEST_CASE("eigen invariance check over the flip representation") {
    Representation rep = c2_rep(pauli_x());
    double s = 1.0 / std::sqrt(2.0);
    Vec plus(2), minus(2);
    plus << s, s;
    minus << s, -s;
    std::vector<StateVector> x_basis = {StateVector("spin", plus),
                                        StateVector("spin", minus)};
    std::vector<Complex> eigenvalues;
    CHECK(eigen_invariance_check(rep, "g", x_basis, 1e-10, &eigenvalues));
    REQUIRE(eigenvalues.size() == 2);
    CHECK(std::abs(eigenvalues[0] - Complex(1.0, 0.0)) < 1e-12);
    CHECK(std::abs(eigenvalues[1] - Complex(-1.0, 0.0)) < 1e-12);

    std::vector<StateVector> z_basis = {StateVector::axis("spin", 2, 0),
                                        StateVector::axis("spin", 2, 1)};
    CHECK_FALSE(eigen_invariance_check(rep, "g", z_basis, 1e-10));

    std::vector<StateVector> elsewhere = {StateVector::axis("other", 2, 0),
                                          StateVector::axis("other", 2, 1)};
    CHECK_THROWS_AS(eigen_invariance_check(rep, "g", elsewhere, 1e-10),
                    SpaceMismatch);
}

TEST_CASE("spin bundle ties the pieces together") {
    SpinHalfReport report = spin_half_bundle(91);
    CHECK(report.commutator_residual <= 1e-15);
    // The z basis must NOT be invariant under the x flip; the x basis must.
    CHECK_FALSE(report.common_eigenbasis);
    CHECK(report.x_basis_invariant_under_x);
    CHECK(report.grid_points == 91);
    CHECK(report.max_rotation_mismatch <= 1e-12);
}

}  // TEST_SUITE
