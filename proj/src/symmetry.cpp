#include "giv/symmetry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <set>

#include "giv/arrow.hpp"

namespace giv {

namespace {

constexpr std::size_t kMaxGroupSize = 24;

}  // namespace

FiniteGroup::FiniteGroup(std::vector<std::string> elements,
                         std::vector<std::vector<std::string>> table,
                         std::string identity)
    : elements_(std::move(elements)) {
    const std::size_t n = elements_.size();
    if (n == 0) {
        throw InvalidConfig("a group needs at least one element");
    }
    if (n > kMaxGroupSize) {
        throw ConstraintViolation("group size " + std::to_string(n) +
                                  " exceeds the supported maximum of " +
                                  std::to_string(kMaxGroupSize));
    }
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < n; ++i) {
        if (elements_[i].empty()) {
            throw InvalidConfig("group element names must be non-empty");
        }
        if (!index.emplace(elements_[i], i).second) {
            throw InvalidConfig("duplicate group element " + elements_[i]);
        }
    }
    if (table.size() != n) {
        throw InvalidConfig("multiplication table must have one row per element");
    }
    table_.assign(n, std::vector<std::size_t>(n, 0));
    for (std::size_t i = 0; i < n; ++i) {
        if (table[i].size() != n) {
            throw InvalidConfig("multiplication table row " + std::to_string(i) +
                                " has wrong length");
        }
        for (std::size_t j = 0; j < n; ++j) {
            auto it = index.find(table[i][j]);
            if (it == index.end()) {
                throw InvalidConfig("table entry \"" + table[i][j] +
                                    "\" is not a group element");
            }
            table_[i][j] = it->second;
        }
    }
    auto id_it = index.find(identity);
    if (id_it == index.end()) {
        throw InvalidConfig("identity \"" + identity +
                            "\" is not a group element");
    }
    identity_ = id_it->second;
    for (std::size_t i = 0; i < n; ++i) {
        if (table_[identity_][i] != i || table_[i][identity_] != i) {
            throw ConstraintViolation("identity law fails at element " +
                                      elements_[i]);
        }
    }
    inverse_.assign(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (table_[i][j] == identity_ && table_[j][i] == identity_) {
                inverse_[i] = j;
            }
        }
        if (inverse_[i] == n) {
            throw ConstraintViolation("element " + elements_[i] +
                                      " has no inverse");
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t k = 0; k < n; ++k) {
                if (table_[table_[i][j]][k] != table_[i][table_[j][k]]) {
                    throw ConstraintViolation(
                        "associativity fails at (" + elements_[i] + ", " +
                        elements_[j] + ", " + elements_[k] + ")");
                }
            }
        }
    }
}

FiniteGroup FiniteGroup::cyclic(int n) {
    if (n < 1 || static_cast<std::size_t>(n) > kMaxGroupSize) {
        throw ConstraintViolation("cyclic group order must be in [1, " +
                                  std::to_string(kMaxGroupSize) + "]");
    }
    std::vector<std::string> elements;
    for (int k = 0; k < n; ++k) {
        if (k == 0) {
            elements.emplace_back("e");
        } else if (k == 1) {
            elements.emplace_back("g");
        } else {
            elements.emplace_back("g" + std::to_string(k));
        }
    }
    std::vector<std::vector<std::string>> table(
        static_cast<std::size_t>(n),
        std::vector<std::string>(static_cast<std::size_t>(n)));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                elements[static_cast<std::size_t>((i + j) % n)];
        }
    }
    return FiniteGroup(std::move(elements), std::move(table), "e");
}

std::size_t FiniteGroup::index_of(const std::string& element) const {
    for (std::size_t i = 0; i < elements_.size(); ++i) {
        if (elements_[i] == element) return i;
    }
    throw UnknownVariable("no group element " + element);
}

std::size_t FiniteGroup::op(std::size_t i, std::size_t j) const {
    if (i >= size() || j >= size()) {
        throw IndexOutOfRange("group element index out of range");
    }
    return table_[i][j];
}

const std::string& FiniteGroup::op(const std::string& a,
                                   const std::string& b) const {
    return elements_[op(index_of(a), index_of(b))];
}

std::size_t FiniteGroup::inverse(std::size_t i) const {
    if (i >= size()) {
        throw IndexOutOfRange("group element index out of range");
    }
    return inverse_[i];
}

bool FiniteGroup::same_table(const FiniteGroup& other) const {
    return elements_ == other.elements_ && table_ == other.table_ &&
           identity_ == other.identity_;
}

Representation::Representation(FiniteGroup group, std::string space_label,
                               std::map<std::string, Mat> matrices,
                               bool projective)
    : group_(std::move(group)), space_(std::move(space_label)),
      matrices_(std::move(matrices)), projective_(projective) {
    for (const auto& name : group_.elements()) {
        auto it = matrices_.find(name);
        if (it == matrices_.end()) {
            throw InvalidConfig("representation is missing element " + name);
        }
        const Mat& m = it->second;
        if (m.rows() != m.cols() || m.rows() == 0) {
            throw DimensionMismatch("matrix for element " + name +
                                    " must be square and non-empty");
        }
        if (!all_finite(m)) {
            throw NotFinite("matrix for element " + name +
                            " has non-finite entries");
        }
        if (dim_ == 0) {
            dim_ = m.rows();
        } else if (m.rows() != dim_) {
            throw DimensionMismatch("matrix for element " + name +
                                    " has a different dimension");
        }
    }
    if (matrices_.size() != group_.size()) {
        throw InvalidConfig("representation has matrices for unknown elements");
    }
}

const Mat& Representation::matrix(const std::string& element) const {
    auto it = matrices_.find(element);
    if (it == matrices_.end()) {
        throw UnknownVariable("no group element " + element);
    }
    return it->second;
}

RepresentationCheck verify_representation(const Representation& rep,
                                          double tol) {
    const auto& g = rep.group();
    RepresentationCheck check;
    for (const auto& name : g.elements()) {
        check.unitarity_defect = std::max(
            check.unitarity_defect, is_unitary(rep.matrix(name), tol).defect);
    }
    for (const auto& x : g.elements()) {
        for (const auto& y : g.elements()) {
            Mat product = rep.matrix(x) * rep.matrix(y);
            const Mat& target = rep.matrix(g.op(x, y));
            double defect;
            if (rep.projective()) {
                // Best unit-modulus phase in the Frobenius sense; residual
                // measured after applying it.
                Complex overlap = (target.adjoint() * product).trace();
                Complex phase = (std::abs(overlap) > 0.0)
                                    ? overlap / std::abs(overlap)
                                    : Complex(1.0, 0.0);
                defect = max_abs(product - phase * target);
            } else {
                defect = max_abs(product - target);
            }
            check.product_defect = std::max(check.product_defect, defect);
        }
    }
    check.max_defect = std::max(check.product_defect, check.unitarity_defect);
    check.valid = check.max_defect <= tol;
    return check;
}

TransitionMatrix build_S_from_parallel_axes(const GivSystem& system,
                                            const std::string& a,
                                            const std::string& b) {
    if (a == b) {
        throw SameVariable("parallel-axes transition needs two distinct "
                           "variables, got " + a + " twice");
    }
    const Mat& m_ab = system.embedding(a, b).matrix();
    Eigen::FullPivLU<Mat> lu(m_ab);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible()) {
        throw SingularEmbedding("embedding of " + b + " in " + a +
                                " is numerically singular");
    }
    Mat inv = lu.inverse();
    if (!all_finite(inv)) {
        throw SingularEmbedding("embedding of " + b + " in " + a +
                                " produced a non-finite inverse");
    }
    return TransitionMatrix(a, b, std::move(inv),
                            TransitionMatrix::ColumnNorms::free);
}

EquivalenceCertificate generalized_equivalence_check(const Representation& rep_a,
                                                     const Representation& rep_b,
                                                     const TransitionMatrix& s,
                                                     double tol) {
    if (!rep_a.group().same_table(rep_b.group())) {
        throw InvalidConfig("representations are over different groups");
    }
    if (rep_a.dim() != rep_b.dim()) {
        throw DimensionMismatch("equivalence requires equal dimensions, got " +
                                std::to_string(rep_a.dim()) + " and " +
                                std::to_string(rep_b.dim()));
    }
    if (s.from() != rep_a.space() || s.to() != rep_b.space()) {
        throw SpaceMismatch("transition " + s.from() + " -> " + s.to() +
                            " does not connect spaces " + rep_a.space() +
                            " -> " + rep_b.space());
    }
    if (s.dim() != rep_a.dim()) {
        throw DimensionMismatch("transition dimension does not match the "
                                "representations");
    }
    Eigen::FullPivLU<Mat> lu(s.matrix());
    lu.setThreshold(1e-12);
    if (!lu.isInvertible()) {
        throw SingularEmbedding("similarity transform is singular");
    }
    Mat s_inv = lu.inverse();

    EquivalenceCertificate cert{rep_a.space(), rep_b.space(), s, 0.0, 0.0, tol};
    cert.unitarity_defect = is_unitary(s.matrix(), tol).defect;
    for (const auto& name : rep_a.group().elements()) {
        Mat carried = s.matrix() * rep_a.matrix(name) * s_inv;
        cert.similarity_defect = std::max(
            cert.similarity_defect, max_abs(rep_b.matrix(name) - carried));
    }
    return cert;
}

DiagonalizerResult diagonalizer_unitarity(const Mat& b_in_a, double tol) {
    auto gate = is_unitary(b_in_a, tol);
    if (!gate.unitary) {
        throw NotUnitaryInput(
            "operator is not unitary (defect = " + std::to_string(gate.defect) +
            "); it does not act as a symmetry, so the diagonalization "
            "argument does not apply");
    }
    Eigenphases eig = diagonalize_unitary(b_in_a, tol);
    DiagonalizerResult out;
    out.s = eig.transform;
    out.phases = eig.phases;
    out.unitarity_defect = is_unitary(out.s, tol).defect;
    return out;
}

MergedModel collapse(const GivSystem& system, double tol) {
    std::vector<std::string> ids;
    for (const auto& v : system.variables()) {
        ids.push_back(v.id);
    }
    std::sort(ids.begin(), ids.end());
    const std::string& ref = ids.front();

    // Pairwise transitions; each must be unitary for a single space to carry
    // every variable's probabilities.
    std::map<std::pair<std::string, std::string>, Mat> s;
    double worst_unitary = 0.0;
    std::pair<std::string, std::string> worst_pair;
    for (const auto& a : ids) {
        for (const auto& b : ids) {
            if (a == b) continue;
            Mat m = build_S_from_parallel_axes(system, a, b).matrix();
            double defect = is_unitary(m, tol).defect;
            if (defect > worst_unitary) {
                worst_unitary = defect;
                worst_pair = {a, b};
            }
            s.emplace(std::make_pair(a, b), std::move(m));
        }
    }
    if (worst_unitary > tol) {
        throw NonUnitaryTransition(worst_pair.first, worst_pair.second,
                                   worst_unitary);
    }

    double worst_triple = 0.0;
    std::array<std::string, 3> worst_abc;
    for (const auto& a : ids) {
        for (const auto& b : ids) {
            for (const auto& c : ids) {
                if (a == b || b == c || a == c) continue;
                double defect =
                    max_abs(s.at({b, c}) * s.at({a, b}) - s.at({a, c}));
                if (defect > worst_triple) {
                    worst_triple = defect;
                    worst_abc = {a, b, c};
                }
            }
        }
    }
    if (worst_triple > tol) {
        throw InconsistentTransitions(worst_abc[0], worst_abc[1], worst_abc[2],
                                      worst_triple);
    }

    MergedModel model;
    model.reference = ref;
    model.variables = ids;
    model.tol = tol;
    model.max_unitarity_defect = worst_unitary;
    model.max_transition_defect = worst_triple;
    for (const auto& v : ids) {
        model.basis_in_merged[v] = system.embedding(ref, v).matrix();
    }

    // Gleason-style consistency: the one-space probabilities must reproduce
    // every restricted probability of the original model.
    for (const auto& v : ids) {
        const Mat& uv = model.basis_in_merged.at(v);
        for (const auto& w : ids) {
            const Mat& uw = model.basis_in_merged.at(w);
            const Mat& direct = system.embedding(v, w).matrix();
            for (Eigen::Index j = 0; j < system.dim(); ++j) {
                for (Eigen::Index k = 0; k < system.dim(); ++k) {
                    double merged = std::norm(uv.col(j).dot(uw.col(k)));
                    double restricted = std::norm(direct(j, k));
                    model.max_born_defect =
                        std::max(model.max_born_defect,
                                 std::abs(merged - restricted));
                }
            }
        }
    }
    if (model.max_born_defect > tol) {
        throw ConstraintViolation(
            "merged-space probabilities deviate from the restricted ones by " +
            std::to_string(model.max_born_defect));
    }
    return model;
}

bool eigen_invariance_check(const Representation& rep,
                            const std::string& variable_element,
                            const std::vector<StateVector>& eigenvectors,
                            double tol,
                            std::vector<Complex>* eigenvalues_out) {
    const Mat& g = rep.matrix(variable_element);
    if (eigenvalues_out) {
        eigenvalues_out->clear();
    }
    bool ok = true;
    for (const auto& v : eigenvectors) {
        if (v.space() != rep.space()) {
            throw SpaceMismatch("eigenvector from space " + v.space() +
                                " checked against space " + rep.space());
        }
        if (v.dim() != rep.dim()) {
            throw DimensionMismatch("eigenvector dimension does not match the "
                                    "representation");
        }
        if (!v.is_normalized()) {
            throw NotNormalized("eigenvectors must be normalized");
        }
        Vec image = g * v.coords();
        Complex lambda = v.coords().dot(image);
        if (eigenvalues_out) {
            eigenvalues_out->push_back(lambda);
        }
        double residual = (image - lambda * v.coords()).cwiseAbs().maxCoeff();
        if (residual > tol || std::abs(std::abs(lambda) - 1.0) > tol) {
            ok = false;
        }
    }
    return ok;
}

SpinHalfReport spin_half_bundle(int grid_points) {
    if (grid_points < 2) {
        throw InvalidConfig("spin demonstration needs a grid of at least 2 "
                            "points");
    }
    const Complex i1(0.0, 1.0);
    Mat sx(2, 2), sy(2, 2), sz(2, 2);
    sx << Complex(0, 0), Complex(1, 0), Complex(1, 0), Complex(0, 0);
    sy << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
    sz << Complex(1, 0), Complex(0, 0), Complex(0, 0), Complex(-1, 0);
    Mat jx = 0.5 * sx, jy = 0.5 * sy, jz = 0.5 * sz;

    SpinHalfReport report;
    report.grid_points = grid_points;
    report.commutator_residual = max_abs(commutator(jx, jy) - i1 * jz);

    // The x-direction symmetry acting on the z space.
    FiniteGroup c2 = FiniteGroup::cyclic(2);
    Representation rep(c2, "spin_z", {{"e", Mat::Identity(2, 2)}, {"g", sx}});

    std::vector<StateVector> z_basis = {StateVector::axis("spin_z", 2, 0),
                                        StateVector::axis("spin_z", 2, 1)};
    Vec xp(2), xm(2);
    xp << Complex(std::numbers::sqrt2 / 2, 0), Complex(std::numbers::sqrt2 / 2, 0);
    xm << Complex(std::numbers::sqrt2 / 2, 0), Complex(-std::numbers::sqrt2 / 2, 0);
    std::vector<StateVector> x_basis = {StateVector("spin_z", xp),
                                        StateVector("spin_z", xm)};
    report.common_eigenbasis = eigen_invariance_check(rep, "g", z_basis);
    report.x_basis_invariant_under_x = eigen_invariance_check(rep, "g", x_basis);

    Vec up(2);
    up << Complex(1, 0), Complex(0, 0);
    for (int k = 0; k < grid_points; ++k) {
        double theta = std::numbers::pi * static_cast<double>(k) /
                       static_cast<double>(grid_points - 1);
        Mat rot = std::cos(0.5 * theta) * Mat::Identity(2, 2) -
                  i1 * std::sin(0.5 * theta) * sy;
        double p = std::norm(up.dot(rot * up));
        report.max_rotation_mismatch =
            std::max(report.max_rotation_mismatch,
                     std::abs(p - spin_half_reference(theta)));
    }
    return report;
}

}  // namespace giv
