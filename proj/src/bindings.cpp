#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "giv/arrow.hpp"
#include "giv/engine.hpp"
#include "giv/errors.hpp"
#include "giv/experiment.hpp"
#include "giv/hilbert.hpp"
#include "giv/probability.hpp"
#include "giv/rng.hpp"
#include "giv/symmetry.hpp"

namespace py = pybind11;
using namespace giv;

namespace {

py::dict run_experiment_impl(const std::string& config_text, bool degrees,
                             const std::optional<std::string>& kind_name) {
    std::optional<ExperimentKind> kind;
    if (kind_name) {
        kind = experiment_kind_from_name(*kind_name);
    }
    ExperimentConfig config = ExperimentConfig::from_json(
        nlohmann::json::parse(config_text, nullptr, true), degrees, kind);
    RunResult result = run(config);
    py::dict out;
    out["exit_code"] = result.exit_code;
    out["columns"] = result.report.columns;
    out["csv"] = report_to_csv(result.report);
    out["json"] = report_to_json(result.report);
    out["plot"] = emit_plot_data(result.report);
    out["meta"] = py::module_::import("json").attr("loads")(
        result.report.meta.dump());
    out["config_hash"] = config_hash_hex(config.canonical());
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Multi-space probabilistic state laboratory";
    m.attr("__version__") = kToolVersion;

    // Exceptions. Children of the shared base map onto one Python hierarchy.
    auto base = py::register_exception<Error>(m, "GivError", PyExc_RuntimeError);
    py::register_exception<DimensionMismatch>(m, "DimensionMismatch", base);
    py::register_exception<SpaceMismatch>(m, "SpaceMismatch", base);
    py::register_exception<NotNormalized>(m, "NotNormalized", base);
    py::register_exception<NotFinite>(m, "NotFinite", base);
    py::register_exception<NotUnitaryInput>(m, "NotUnitaryInput", base);
    py::register_exception<ProbabilityOutOfRange>(m, "ProbabilityOutOfRange",
                                                  base);
    py::register_exception<AngleOutOfRange>(m, "AngleOutOfRange", base);
    py::register_exception<UnknownVariable>(m, "UnknownVariable", base);
    py::register_exception<IndexOutOfRange>(m, "IndexOutOfRange", base);
    py::register_exception<SameVariable>(m, "SameVariable", base);
    py::register_exception<DegenerateDirections>(m, "DegenerateDirections",
                                                 base);
    py::register_exception<ConstraintViolation>(m, "ConstraintViolation", base);
    py::register_exception<SingularEmbedding>(m, "SingularEmbedding", base);
    py::register_exception<InvalidConfig>(m, "InvalidConfig", base);
    py::register_exception<IoFailure>(m, "IoFailure", base);
    py::register_exception<NonUnitaryTransition>(m, "NonUnitaryTransition",
                                                 base);
    py::register_exception<InconsistentTransitions>(m, "InconsistentTransitions",
                                                    base);

    // hilbert
    py::class_<StateVector>(m, "StateVector")
        .def(py::init<std::string, Vec>(), py::arg("space"), py::arg("coords"))
        .def_static("axis", &StateVector::axis, py::arg("space"),
                    py::arg("dim"), py::arg("index"))
        .def_static("normalized", &StateVector::normalized, py::arg("space"),
                    py::arg("coords"))
        .def_property_readonly("space", &StateVector::space)
        .def_property_readonly("coords", &StateVector::coords)
        .def_property_readonly("dim", &StateVector::dim)
        .def_property_readonly("is_normalized", &StateVector::is_normalized);

    m.def("inner_product", &inner_product, py::arg("u"), py::arg("v"));
    m.def("born_probability", &born_probability, py::arg("axis"),
          py::arg("psi"));
    m.def("commutator", &commutator, py::arg("a"), py::arg("b"));

    py::class_<UnitaryCheck>(m, "UnitaryCheck")
        .def_readonly("unitary", &UnitaryCheck::unitary)
        .def_readonly("defect", &UnitaryCheck::defect);
    m.def("is_unitary", &is_unitary, py::arg("m"),
          py::arg("tol") = kDefaultTol);

    py::class_<Eigenphases>(m, "Eigenphases")
        .def_readonly("phases", &Eigenphases::phases)
        .def_readonly("transform", &Eigenphases::transform);
    m.def("diagonalize_unitary", &diagonalize_unitary, py::arg("u"),
          py::arg("tol") = kDefaultTol);

    py::class_<OrthonormalCheck>(m, "OrthonormalCheck")
        .def_readonly("orthonormal", &OrthonormalCheck::orthonormal)
        .def_readonly("max_defect", &OrthonormalCheck::max_defect);
    m.def("is_orthonormal_set", &is_orthonormal_set, py::arg("vectors"),
          py::arg("tol") = kDefaultTol);

    // rng
    py::class_<Pcg32>(m, "Pcg32")
        .def(py::init<std::uint64_t, std::uint64_t>(), py::arg("seed"),
             py::arg("stream") = 0)
        .def("next_u32", &Pcg32::next_u32)
        .def("next_double", &Pcg32::next_double)
        .def_property_readonly("seed", &Pcg32::seed)
        .def_property_readonly("stream", &Pcg32::stream)
        .def_property_readonly_static(
            "name", [](const py::object&) { return std::string(Pcg32::kName); });
    m.def(
        "sample_index",
        [](const std::vector<double>& probs, double u) {
            return sample_index(std::span<const double>(probs), u);
        },
        py::arg("probabilities"), py::arg("u"));

    // probability profiles
    py::class_<ProbabilityFunction>(m, "ProbabilityFunction")
        .def_static("linear", &ProbabilityFunction::linear)
        .def_static("quadratic", &ProbabilityFunction::quadratic)
        .def_static("cosine_squared", &ProbabilityFunction::cosine_squared)
        .def_static("from_name", &ProbabilityFunction::from_name,
                    py::arg("name"))
        .def_static("custom", &ProbabilityFunction::custom, py::arg("name"),
                    py::arg("fn"))
        .def("__call__", &ProbabilityFunction::operator(), py::arg("theta"))
        .def_property_readonly("name", &ProbabilityFunction::name)
        .def("same_as", &ProbabilityFunction::same_as, py::arg("other"));
    m.def("builtin_probability_functions", &builtin_probability_functions);

    // engine
    py::class_<VariableSpec>(m, "VariableSpec")
        .def(py::init([](std::string id, std::vector<std::string> labels,
                         std::vector<Complex> eigenvalues) {
                 VariableSpec spec;
                 spec.id = std::move(id);
                 spec.outcome_labels = std::move(labels);
                 spec.eigenvalues = std::move(eigenvalues);
                 return spec;
             }),
             py::arg("id"), py::arg("outcome_labels"),
             py::arg("eigenvalues") = std::vector<Complex>{})
        .def_readwrite("id", &VariableSpec::id)
        .def_readwrite("outcome_labels", &VariableSpec::outcome_labels)
        .def_readwrite("eigenvalues", &VariableSpec::eigenvalues)
        .def_property_readonly("dim", &VariableSpec::dim);

    py::class_<TransitionMatrix> tm(m, "TransitionMatrix");
    py::enum_<TransitionMatrix::ColumnNorms>(tm, "ColumnNorms")
        .value("required", TransitionMatrix::ColumnNorms::required)
        .value("free", TransitionMatrix::ColumnNorms::free);
    tm.def(py::init<std::string, std::string, Mat,
                    TransitionMatrix::ColumnNorms>(),
           py::arg("from_variable"), py::arg("to_variable"), py::arg("matrix"),
           py::arg("norms") = TransitionMatrix::ColumnNorms::required)
        .def_property_readonly("from_variable", &TransitionMatrix::from)
        .def_property_readonly("to_variable", &TransitionMatrix::to)
        .def_property_readonly("matrix", &TransitionMatrix::matrix)
        .def_property_readonly("dim", &TransitionMatrix::dim);

    py::class_<GivSystem>(m, "GivSystem")
        .def(py::init<std::vector<VariableSpec>,
                      std::vector<TransitionMatrix>>(),
             py::arg("variables"), py::arg("embeddings"))
        .def_property_readonly("variables", &GivSystem::variables)
        .def("variable", &GivSystem::variable, py::arg("id"))
        .def("has_variable", &GivSystem::has_variable, py::arg("id"))
        .def_property_readonly("dim", &GivSystem::dim)
        .def("embedding", &GivSystem::embedding, py::arg("space"),
             py::arg("of"))
        .def("pair_inverse_defect", &GivSystem::pair_inverse_defect,
             py::arg("a"), py::arg("b"))
        .def_property_readonly("max_pair_inverse_defect",
                               &GivSystem::max_pair_inverse_defect)
        .def("same_model", &GivSystem::same_model, py::arg("other"));

    py::class_<GivState>(m, "GivState")
        .def_static("eigenstate", &GivState::eigenstate, py::arg("system"),
                    py::arg("variable"), py::arg("outcome_index"))
        .def_static("general", &GivState::general, py::arg("system"),
                    py::arg("components"))
        .def_property_readonly("system", &GivState::system)
        .def("component", &GivState::component, py::arg("variable"))
        .def_property_readonly("is_eigenstate", &GivState::is_eigenstate);

    py::enum_<EmbedSign>(m, "EmbedSign")
        .value("standard", EmbedSign::standard)
        .value("all_positive", EmbedSign::all_positive);
    m.def("embed_pair", &embed_pair, py::arg("f_plus"), py::arg("f_minus"),
          py::arg("theta_pp"), py::arg("theta_mm"),
          py::arg("sign") = EmbedSign::standard, py::arg("from_variable") = "b",
          py::arg("to_variable") = "a");
    m.def("orthogonality_defect", &orthogonality_defect, py::arg("f_plus"),
          py::arg("f_minus"), py::arg("theta_pp"), py::arg("theta_mm"));

    py::class_<RotationAngles>(m, "RotationAngles")
        .def_readonly("alpha_plus", &RotationAngles::alpha_plus)
        .def_readonly("alpha_minus", &RotationAngles::alpha_minus)
        .def_readonly("singular_plus", &RotationAngles::singular_plus)
        .def_readonly("singular_minus", &RotationAngles::singular_minus);
    m.def("rotation_angles", &rotation_angles, py::arg("f_plus"),
          py::arg("f_minus"), py::arg("theta"));

    m.def("restricted_born",
          py::overload_cast<const GivState&, const std::string&, Eigen::Index>(
              &restricted_born),
          py::arg("state"), py::arg("variable"), py::arg("outcome_index"));
    m.def("restricted_born_axis",
          py::overload_cast<const GivState&, const StateVector&>(
              &restricted_born),
          py::arg("state"), py::arg("outcome_axis"));

    py::class_<MeasureResult>(m, "MeasureResult")
        .def_readonly("outcome_index", &MeasureResult::outcome_index)
        .def_readonly("outcome_label", &MeasureResult::outcome_label)
        .def_readonly("post_state", &MeasureResult::post_state);
    m.def("measure", &measure, py::arg("state"), py::arg("variable"),
          py::arg("rng"));

    m.def("direct_probability", &direct_probability, py::arg("state"),
          py::arg("variable"), py::arg("outcome_index"));
    m.def("indirect_probability", &indirect_probability, py::arg("state"),
          py::arg("via"), py::arg("target"), py::arg("outcome_index"));
    m.def("interference_deviation", &interference_deviation, py::arg("state"),
          py::arg("via"), py::arg("target"), py::arg("outcome_index"));
    m.def("is_phase_permutation", &is_phase_permutation, py::arg("m"),
          py::arg("tol") = kDefaultTol);

    // arrow
    py::enum_<SymmetryLevel>(m, "SymmetryLevel")
        .value("none", SymmetryLevel::none)
        .value("c2_apparatus", SymmetryLevel::c2_apparatus)
        .value("c2_spacetime", SymmetryLevel::c2_spacetime)
        .value("isotropic", SymmetryLevel::isotropic);
    m.def("symmetry_level_from_name", &symmetry_level_from_name,
          py::arg("name"));

    py::class_<FPair>(m, "FPair")
        .def(py::init<ProbabilityFunction, ProbabilityFunction>(),
             py::arg("plus"), py::arg("minus"))
        .def_readonly("plus", &FPair::plus)
        .def_readonly("minus", &FPair::minus);

    py::class_<ArrowConfig>(m, "ArrowConfig")
        .def(py::init<std::map<std::string, double>,
                      std::map<std::string, FPair>, SymmetryLevel>(),
             py::arg("directions"), py::arg("f_assignment"), py::arg("level"))
        .def_static("isotropic", &ArrowConfig::isotropic, py::arg("directions"),
                    py::arg("shared_f"))
        .def_static("c2_spacetime", &ArrowConfig::c2_spacetime,
                    py::arg("directions"), py::arg("per_variable_f"))
        .def_property_readonly("directions", &ArrowConfig::directions)
        .def("f", &ArrowConfig::f, py::arg("variable"))
        .def_property_readonly("level", &ArrowConfig::level);

    py::class_<ArrowSystem>(m, "ArrowSystem")
        .def_property_readonly("giv", &ArrowSystem::giv)
        .def_property_readonly("config", &ArrowSystem::config)
        .def("direction", &ArrowSystem::direction, py::arg("variable"));

    m.def("build_arrow_system", &build_arrow_system, py::arg("config"));
    m.def("prepare", &prepare, py::arg("system"), py::arg("orientation"));
    m.def("c2_closure_defect", &c2_closure_defect, py::arg("f"),
          py::arg("grid_size"));
    m.def("composition_defect", &composition_defect, py::arg("f"),
          py::arg("theta1"), py::arg("theta2"));
    m.def("omega_angle", &omega_angle, py::arg("f"), py::arg("theta"));

    py::class_<IsotropyRow>(m, "IsotropyRow")
        .def_readonly("name", &IsotropyRow::name)
        .def_readonly("max_composition_defect",
                      &IsotropyRow::max_composition_defect)
        .def_readonly("max_closure_defect", &IsotropyRow::max_closure_defect)
        .def_readonly("passes", &IsotropyRow::passes);
    py::class_<IsotropyReport>(m, "IsotropyReport")
        .def_readonly("rows", &IsotropyReport::rows)
        .def_readonly("grid_points", &IsotropyReport::grid_points)
        .def_readonly("tol", &IsotropyReport::tol);
    m.def("isotropy_scan", &isotropy_scan, py::arg("candidates"),
          py::arg("grid_points") = 91, py::arg("tol") = 1e-9);

    m.def("spin_half_reference", &spin_half_reference, py::arg("theta"));

    py::class_<FrequencyRow>(m, "FrequencyRow")
        .def_readonly("label", &FrequencyRow::label)
        .def_readonly("count", &FrequencyRow::count)
        .def_readonly("frequency", &FrequencyRow::frequency)
        .def_readonly("std_error", &FrequencyRow::std_error)
        .def_readonly("probability", &FrequencyRow::probability);
    py::class_<FrequencyTable>(m, "FrequencyTable")
        .def_readonly("variable", &FrequencyTable::variable)
        .def_readonly("trials", &FrequencyTable::trials)
        .def_readonly("seed", &FrequencyTable::seed)
        .def_readonly("stream", &FrequencyTable::stream)
        .def_readonly("rng", &FrequencyTable::rng)
        .def_readonly("orientation", &FrequencyTable::orientation)
        .def_readonly("rows", &FrequencyTable::rows);
    m.def("sample_frequencies", &sample_frequencies, py::arg("system"),
          py::arg("orientation"), py::arg("variable"), py::arg("trials"),
          py::arg("seed"), py::arg("stream") = 0);

    m.def("wrap_angle", &wrap_angle, py::arg("from_angle"),
          py::arg("to_angle"));
    m.def("reduce_angle", &reduce_angle, py::arg("angle"));

    // symmetry
    py::class_<FiniteGroup>(m, "FiniteGroup")
        .def(py::init<std::vector<std::string>,
                      std::vector<std::vector<std::string>>, std::string>(),
             py::arg("elements"), py::arg("table"), py::arg("identity"))
        .def_static("cyclic", &FiniteGroup::cyclic, py::arg("n"))
        .def_property_readonly("size", &FiniteGroup::size)
        .def_property_readonly("elements", &FiniteGroup::elements)
        .def_property_readonly("identity", &FiniteGroup::identity)
        .def("op",
             py::overload_cast<const std::string&, const std::string&>(
                 &FiniteGroup::op, py::const_),
             py::arg("a"), py::arg("b"))
        .def("same_table", &FiniteGroup::same_table, py::arg("other"));

    py::class_<Representation>(m, "Representation")
        .def(py::init<FiniteGroup, std::string, std::map<std::string, Mat>,
                      bool>(),
             py::arg("group"), py::arg("space_label"), py::arg("matrices"),
             py::arg("projective") = false)
        .def_property_readonly("group", &Representation::group)
        .def_property_readonly("space", &Representation::space)
        .def("matrix", &Representation::matrix, py::arg("element"))
        .def_property_readonly("dim", &Representation::dim)
        .def_property_readonly("projective", &Representation::projective);

    py::class_<RepresentationCheck>(m, "RepresentationCheck")
        .def_readonly("valid", &RepresentationCheck::valid)
        .def_readonly("max_defect", &RepresentationCheck::max_defect)
        .def_readonly("product_defect", &RepresentationCheck::product_defect)
        .def_readonly("unitarity_defect",
                      &RepresentationCheck::unitarity_defect);
    m.def("verify_representation", &verify_representation, py::arg("rep"),
          py::arg("tol") = kDefaultTol);

    m.def("build_S_from_parallel_axes", &build_S_from_parallel_axes,
          py::arg("system"), py::arg("a"), py::arg("b"));

    py::class_<EquivalenceCertificate>(m, "EquivalenceCertificate")
        .def_readonly("from_space", &EquivalenceCertificate::from_space)
        .def_readonly("to_space", &EquivalenceCertificate::to_space)
        .def_readonly("s", &EquivalenceCertificate::s)
        .def_readonly("unitarity_defect",
                      &EquivalenceCertificate::unitarity_defect)
        .def_readonly("similarity_defect",
                      &EquivalenceCertificate::similarity_defect)
        .def_readonly("tol", &EquivalenceCertificate::tol)
        .def("valid", &EquivalenceCertificate::valid);
    m.def("generalized_equivalence_check", &generalized_equivalence_check,
          py::arg("rep_a"), py::arg("rep_b"), py::arg("s"),
          py::arg("tol") = kRoundTripTol);

    py::class_<DiagonalizerResult>(m, "DiagonalizerResult")
        .def_readonly("s", &DiagonalizerResult::s)
        .def_readonly("phases", &DiagonalizerResult::phases)
        .def_readonly("unitarity_defect",
                      &DiagonalizerResult::unitarity_defect);
    m.def("diagonalizer_unitarity", &diagonalizer_unitarity,
          py::arg("b_in_a"), py::arg("tol") = kDefaultTol);

    py::class_<MergedModel>(m, "MergedModel")
        .def_readonly("reference", &MergedModel::reference)
        .def_readonly("variables", &MergedModel::variables)
        .def_readonly("basis_in_merged", &MergedModel::basis_in_merged)
        .def_readonly("max_unitarity_defect",
                      &MergedModel::max_unitarity_defect)
        .def_readonly("max_transition_defect",
                      &MergedModel::max_transition_defect)
        .def_readonly("max_born_defect", &MergedModel::max_born_defect)
        .def_readonly("tol", &MergedModel::tol);
    m.def("collapse", &collapse, py::arg("system"),
          py::arg("tol") = kRoundTripTol);

    m.def(
        "eigen_invariance_check",
        [](const Representation& rep, const std::string& element,
           const std::vector<StateVector>& eigenvectors, double tol) {
            std::vector<Complex> eigenvalues;
            bool ok = eigen_invariance_check(rep, element, eigenvectors, tol,
                                             &eigenvalues);
            return py::make_tuple(ok, eigenvalues);
        },
        py::arg("rep"), py::arg("element"), py::arg("eigenvectors"),
        py::arg("tol") = kDefaultTol);

    py::class_<SpinHalfReport>(m, "SpinHalfReport")
        .def_readonly("commutator_residual", &SpinHalfReport::commutator_residual)
        .def_readonly("common_eigenbasis", &SpinHalfReport::common_eigenbasis)
        .def_readonly("x_basis_invariant_under_x",
                      &SpinHalfReport::x_basis_invariant_under_x)
        .def_readonly("grid_points", &SpinHalfReport::grid_points)
        .def_readonly("max_rotation_mismatch",
                      &SpinHalfReport::max_rotation_mismatch)
        ;
    m.def("spin_half_bundle", &spin_half_bundle, py::arg("grid_points") = 181);

    // experiments
    m.def("run_experiment", &run_experiment_impl, py::arg("config_json"),
          py::arg("degrees") = false,
          py::arg("kind") = std::optional<std::string>{});
}
