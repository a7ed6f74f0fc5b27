#ifndef GIV_HILBERT_HPP
#define GIV_HILBERT_HPP

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "giv/errors.hpp"

namespace giv {

using Complex = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;

/// Default tolerance for structural invariants (normalization, unitarity).
inline constexpr double kDefaultTol = 1e-10;

/// Tolerance for reconstruction round trips that accumulate error.
inline constexpr double kRoundTripTol = 1e-9;

/// Largest absolute entry of a matrix, 0 for an empty matrix.
double max_abs(const Mat& m);

/// True if every entry of m is finite.
bool all_finite(const Mat& m);
bool all_finite(const Vec& v);

/// A complex vector tagged with the label of the state space it lives in.
/// Operations that mix vectors check the labels and throw SpaceMismatch on
/// disagreement; same-space operations never consult anything but the label.
class StateVector {
public:
    /// Validates finiteness and non-emptiness; records whether the norm is
    /// within kDefaultTol of 1.
    StateVector(std::string space, Vec coords);

    /// The i-th standard basis vector of a dim-dimensional space.
    static StateVector axis(std::string space, Eigen::Index dim, Eigen::Index i);

    /// Rescales coords to unit norm. Throws NotNormalized on (near-)zero input.
    static StateVector normalized(std::string space, Vec coords);

    const std::string& space() const noexcept { return space_; }
    const Vec& coords() const noexcept { return coords_; }
    Eigen::Index dim() const noexcept { return coords_.size(); }
    bool is_normalized() const noexcept { return normalized_; }

private:
    std::string space_;
    Vec coords_;
    bool normalized_;
};

/// <u|v>, conjugate linear in the first argument.
/// Throws SpaceMismatch for vectors from different spaces and
/// DimensionMismatch for unequal lengths.
Complex inner_product(const StateVector& u, const StateVector& v);

/// |<axis|psi>|^2 for a normalized axis and normalized state of the same
/// space. Result is clamped to [0, 1]; a violation beyond 1e-12 throws
/// ProbabilityOutOfRange.
double born_probability(const StateVector& axis, const StateVector& psi);

/// A B - B A for square matrices of equal dimension.
Mat commutator(const Mat& a, const Mat& b);

struct UnitaryCheck {
    bool unitary = false;
    /// max-norm of M^H M - I.
    double defect = 0.0;
};

/// Checks M^H M = I within tol. Invariant under multiplication of M by a
/// unit-modulus scalar phase.
UnitaryCheck is_unitary(const Mat& m, double tol = kDefaultTol);

struct Eigenphases {
    /// Eigenvalue phases in (-pi, pi], sorted ascending.
    std::vector<double> phases;
    /// Unitary S with S U S^{-1} = diag(exp(i phases[k])).
    Mat transform;
};

/// Diagonalizes a unitary matrix. The result is deterministic: phases are
/// sorted ascending, phases closer than 1e-8 are treated as one degenerate
/// cluster whose eigenvectors are re-orthonormalized and ordered by the row
/// index of their largest-magnitude component, and each eigenvector's overall
/// phase is fixed by making that component real and positive.
/// Throws NotUnitaryInput if U fails is_unitary at tol.
Eigenphases diagonalize_unitary(const Mat& u, double tol = kDefaultTol);

struct OrthonormalCheck {
    bool orthonormal = false;
    /// max-norm of the Gram matrix minus I.
    double max_defect = 0.0;
};

/// Checks pairwise inner products of a set of same-space vectors against the
/// identity Gram matrix. Throws SpaceMismatch if the set mixes spaces.
OrthonormalCheck is_orthonormal_set(const std::vector<StateVector>& vectors,
                                    double tol = kDefaultTol);

}  // namespace giv

#endif
