#ifndef GIV_SYMMETRY_HPP
#define GIV_SYMMETRY_HPP

#include <map>
#include <string>
#include <vector>

#include "giv/engine.hpp"
#include "giv/hilbert.hpp"

namespace giv {

/// A finite group given by its multiplication table. Closure, the identity
/// law, inverses, and associativity are verified exhaustively at
/// construction; sizes above 24 are rejected (larger groups are out of this
/// library's scope).
class FiniteGroup {
public:
    /// table[i][j] names the product elements[i] * elements[j].
    FiniteGroup(std::vector<std::string> elements,
                std::vector<std::vector<std::string>> table,
                std::string identity);

    /// Cyclic group of order n with elements "e", "g", "g2", ...
    static FiniteGroup cyclic(int n);

    std::size_t size() const noexcept { return elements_.size(); }
    const std::vector<std::string>& elements() const noexcept {
        return elements_;
    }
    std::size_t index_of(const std::string& element) const;
    std::size_t identity_index() const noexcept { return identity_; }
    const std::string& identity() const noexcept {
        return elements_[identity_];
    }
    std::size_t op(std::size_t i, std::size_t j) const;
    const std::string& op(const std::string& a, const std::string& b) const;
    std::size_t inverse(std::size_t i) const;

    bool same_table(const FiniteGroup& other) const;

private:
    std::vector<std::string> elements_;
    std::vector<std::vector<std::size_t>> table_;
    std::size_t identity_ = 0;
    std::vector<std::size_t> inverse_;
};

/// One matrix per group element, acting on a labeled space. Construction
/// checks shape only; whether the matrices actually realize the group is
/// verify_representation's job, so defective inputs can be measured instead
/// of rejected.
class Representation {
public:
    Representation(FiniteGroup group, std::string space_label,
                   std::map<std::string, Mat> matrices,
                   bool projective = false);

    const FiniteGroup& group() const noexcept { return group_; }
    const std::string& space() const noexcept { return space_; }
    const Mat& matrix(const std::string& element) const;
    Eigen::Index dim() const noexcept { return dim_; }
    /// When set, products are compared up to a unit-modulus phase per pair.
    bool projective() const noexcept { return projective_; }

private:
    FiniteGroup group_;
    std::string space_;
    std::map<std::string, Mat> matrices_;
    Eigen::Index dim_ = 0;
    bool projective_ = false;
};

struct RepresentationCheck {
    bool valid = false;
    /// max(product_defect, unitarity_defect).
    double max_defect = 0.0;
    /// max over element pairs of the product-table residual.
    double product_defect = 0.0;
    /// max over elements of the per-matrix unitarity defect. Group elements
    /// act by unitary matrices; this term catches corruptions the product
    /// table alone cannot see.
    double unitarity_defect = 0.0;
};

RepresentationCheck verify_representation(const Representation& rep,
                                          double tol = kRoundTripTol);

/// Certificate that two representations are related by the similarity S.
struct EquivalenceCertificate {
    std::string from_space;
    std::string to_space;
    TransitionMatrix s;
    double unitarity_defect = 0.0;
    double similarity_defect = 0.0;
    double tol = 0.0;

    bool valid() const noexcept {
        return unitarity_defect <= tol && similarity_defect <= tol;
    }
};

/// The transition carrying A-coordinates to B-coordinates, computed as the
/// inverse of the embedding of B's eigenstates in A's space (the two
/// variables' axes are taken as parallel). Throws SingularEmbedding if the
/// embedding cannot be inverted.
TransitionMatrix build_S_from_parallel_axes(const GivSystem& system,
                                            const std::string& a,
                                            const std::string& b);

/// Measures how well S carries rep_a into rep_b: similarity_defect is the
/// max over elements of the residual of G_b(x) = S G_a(x) S^-1, and
/// unitarity_defect measures S itself.
EquivalenceCertificate generalized_equivalence_check(const Representation& rep_a,
                                                     const Representation& rep_b,
                                                     const TransitionMatrix& s,
                                                     double tol = kRoundTripTol);

struct DiagonalizerResult {
    Mat s;
    std::vector<double> phases;
    double unitarity_defect = 0.0;
};

/// Diagonalizes a symmetry operator's matrix and reports how unitary the
/// diagonalizing transform is. The input must itself be unitary within tol;
/// a non-unitary input is the diagnostic failure case and throws
/// NotUnitaryInput.
DiagonalizerResult diagonalizer_unitarity(const Mat& b_in_a,
                                          double tol = kDefaultTol);

/// Result of merging all spaces of a system into the space of a reference
/// variable (the lexicographically smallest id).
struct MergedModel {
    std::string reference;
    std::vector<std::string> variables;
    /// Per variable, the unitary whose column j is that variable's j-th
    /// eigenvector in merged coordinates.
    std::map<std::string, Mat> basis_in_merged;
    double max_unitarity_defect = 0.0;
    /// Worst composition residual over variable triples.
    double max_transition_defect = 0.0;
    /// Worst |unrestricted probability in the merged space - restricted
    /// probability in the original| over all eigenstate/outcome pairs.
    double max_born_defect = 0.0;
    double tol = 0.0;
};

/// Merges the system's spaces into one. Fails with NonUnitaryTransition when
/// any pairwise transition is not unitary within tol (the model genuinely
/// needs separate spaces) and with InconsistentTransitions when pairwise
/// transitions do not compose across triples.
MergedModel collapse(const GivSystem& system, double tol = kRoundTripTol);

/// Checks that each given vector is an eigenvector of the element's matrix
/// with a unit-modulus eigenvalue. Fills eigenvalues_out (if non-null) with
/// the Rayleigh estimates for the vectors, valid only when returning true.
bool eigen_invariance_check(const Representation& rep,
                            const std::string& variable_element,
                            const std::vector<StateVector>& eigenvectors,
                            double tol = kDefaultTol,
                            std::vector<Complex>* eigenvalues_out = nullptr);

/// Spin demonstration: generators from the three 2x2 spin matrices,
/// commutator closure, absence of a common eigenbasis between the z and x
/// generators, and rotation transition probabilities against the closed-form
/// reference.
struct SpinHalfReport {
    double commutator_residual = 0.0;
    /// True if the z eigenbasis is invariant under the x symmetry (it is
    /// not; that absence is the point).
    bool common_eigenbasis = false;
    bool x_basis_invariant_under_x = false;
    int grid_points = 0;
    /// max over the grid of | |<up|R_y(theta)|up>|^2 - reference(theta) |.
    double max_rotation_mismatch = 0.0;
};

SpinHalfReport spin_half_bundle(int grid_points = 181);

}  // namespace giv

#endif
