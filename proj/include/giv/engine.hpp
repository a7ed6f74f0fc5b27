#ifndef GIV_ENGINE_HPP
#define GIV_ENGINE_HPP

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "giv/hilbert.hpp"
#include "giv/probability.hpp"
#include "giv/rng.hpp"

namespace giv {

/// One measurable variable: an id, one outcome label per axis of its state
/// space, and one eigenvalue per outcome.
struct VariableSpec {
    std::string id;
    std::vector<std::string> outcome_labels;
    /// Defaults to 1, 2, ... when left empty.
    std::vector<Complex> eigenvalues;

    Eigen::Index dim() const {
        return static_cast<Eigen::Index>(outcome_labels.size());
    }
};

/// Square matrix whose column j holds the j-th eigenstate of variable `from`
/// written in the coordinates of variable `to`'s space. As a linear map it
/// carries from-coordinates to to-coordinates. Embedding columns must have
/// unit norm within 1e-10; column orthogonality is NOT required here (that
/// distinction carries the whole rigid-vs-non-rigid story). Inverse-derived
/// transitions opt out of the column-norm check, since inverting a
/// non-orthogonal embedding denormalizes the columns.
class TransitionMatrix {
public:
    enum class ColumnNorms { required, free };

    TransitionMatrix(std::string from, std::string to, Mat matrix,
                     ColumnNorms norms = ColumnNorms::required);

    const std::string& from() const noexcept { return from_; }
    const std::string& to() const noexcept { return to_; }
    const Mat& matrix() const noexcept { return m_; }
    Eigen::Index dim() const noexcept { return m_.rows(); }

private:
    std::string from_;
    std::string to_;
    Mat m_;
};

/// Immutable model: a set of variables, one state space per variable, and a
/// full table of pairwise embeddings. embedding(space, of) returns the matrix
/// whose columns are `of`'s eigenstates in `space` coordinates; the diagonal
/// entries are the identity.
///
/// The inverse relation between embedding(a, b) and embedding(b, a) is NOT
/// enforced: with both directions built from unit-norm columns it can only
/// hold when the embedding is orthogonal, which asymmetric models violate by
/// design. It is recorded per pair as pair_inverse_defect instead.
class GivSystem {
public:
    GivSystem(std::vector<VariableSpec> variables,
              std::vector<TransitionMatrix> embeddings);

    const std::vector<VariableSpec>& variables() const noexcept;
    const VariableSpec& variable(const std::string& id) const;
    bool has_variable(const std::string& id) const noexcept;
    /// Common dimension of all state spaces.
    Eigen::Index dim() const noexcept;
    /// Matrix of `of`-eigenstates in `space`-coordinates.
    const TransitionMatrix& embedding(const std::string& space,
                                      const std::string& of) const;
    /// max-norm of embedding(a,b) * embedding(b,a) - I.
    double pair_inverse_defect(const std::string& a,
                               const std::string& b) const;
    double max_pair_inverse_defect() const noexcept;

    /// Identity of the underlying immutable model (states hold a share).
    bool same_model(const GivSystem& other) const noexcept;

private:
    struct Model;
    std::shared_ptr<const Model> model_;
};

/// A state of the whole system: one normalized component per variable's
/// space. Probabilities for a variable are computed from that variable's own
/// component only; components are never contracted across spaces.
class GivState {
public:
    /// The tuple representing outcome `outcome_index` of `variable`: axis
    /// `outcome_index` in the variable's own space, the matching embedding
    /// column everywhere else.
    static GivState eigenstate(const GivSystem& system,
                               const std::string& variable,
                               Eigen::Index outcome_index);

    /// A general tuple from explicit per-variable components (each must be
    /// normalized within 1e-10 and cover every variable).
    static GivState general(const GivSystem& system,
                            const std::map<std::string, Vec>& components);

    const GivSystem& system() const noexcept { return system_; }
    const StateVector& component(const std::string& variable) const;

    bool is_eigenstate() const noexcept { return eigen_.has_value(); }
    const std::string& eigen_variable() const;
    Eigen::Index eigen_index() const;

private:
    GivState(GivSystem system, std::map<std::string, StateVector> components,
             std::optional<std::pair<std::string, Eigen::Index>> eigen);

    GivSystem system_;
    std::map<std::string, StateVector> comps_;
    std::optional<std::pair<std::string, Eigen::Index>> eigen_;
};

/// Sign convention for the second embedded column.
enum class EmbedSign {
    /// Minus sign on the first entry of the minus column (the convention the
    /// pair construction fixes; makes symmetric pairs orthogonal).
    standard,
    /// All-positive variant, kept to show that orthogonality conclusions
    /// depend on the phase choice.
    all_positive,
};

/// Two-outcome pair embedding. Column 1 = (sqrt(f+(theta_pp)),
/// sqrt(1 - f+(theta_pp))), column 2 = (-sqrt(1 - f-(theta_mm)),
/// sqrt(f-(theta_mm))) under the standard sign. Angles in [0, pi].
TransitionMatrix embed_pair(const ProbabilityFunction& f_plus,
                            const ProbabilityFunction& f_minus,
                            double theta_pp, double theta_mm,
                            EmbedSign sign = EmbedSign::standard,
                            const std::string& from = "b",
                            const std::string& to = "a");

/// Inner product of the two embedded columns under the standard sign:
/// sqrt(1-f+) sqrt(f-) - sqrt(1-f-) sqrt(f+). Zero iff the embedded pair is
/// orthogonal in the host space.
double orthogonality_defect(const ProbabilityFunction& f_plus,
                            const ProbabilityFunction& f_minus,
                            double theta_pp, double theta_mm);

struct RotationAngles {
    double alpha_plus = 0.0;
    double alpha_minus = 0.0;
    /// Set when f(theta) = 0 makes the angle land exactly on pi/2; reported
    /// rather than thrown.
    bool singular_plus = false;
    bool singular_minus = false;
};

/// Per-column rotation angles alpha = arctan(sqrt(1-f)/sqrt(f)) in [0, pi/2].
RotationAngles rotation_angles(const ProbabilityFunction& f_plus,
                               const ProbabilityFunction& f_minus,
                               double theta);

/// |<axis_i | component in the variable's own space>|^2. Never contracts
/// across spaces.
double restricted_born(const GivState& state, const std::string& variable,
                       Eigen::Index outcome_index);

/// Same, with the outcome axis given explicitly. The axis's space label must
/// name the measured variable; anything else is a SpaceMismatch.
double restricted_born(const GivState& state, const StateVector& outcome_axis);

struct MeasureResult {
    Eigen::Index outcome_index;
    std::string outcome_label;
    GivState post_state;
};

/// Samples an outcome from the restricted probabilities and collapses to the
/// full eigenstate tuple of that outcome (every component replaced).
MeasureResult measure(const GivState& state, const std::string& variable,
                      Pcg32& rng);

/// Alias of restricted_born, named for experiment reports.
double direct_probability(const GivState& state, const std::string& variable,
                          Eigen::Index i);

/// Sum over intermediate outcomes j of P_(b_j)(a_i) * P_state(b_j), each
/// factor a restricted probability in its own space.
double indirect_probability(const GivState& state, const std::string& via,
                            const std::string& target, Eigen::Index i);

/// direct_probability - indirect_probability.
double interference_deviation(const GivState& state, const std::string& via,
                              const std::string& target, Eigen::Index i);

/// True if m is a permutation matrix whose nonzero entries are unit-modulus
/// phases (within tol). Such an embedding makes two variables compatible.
bool is_phase_permutation(const Mat& m, double tol = kDefaultTol);

}  // namespace giv

#endif
