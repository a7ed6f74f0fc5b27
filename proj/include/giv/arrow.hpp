#ifndef GIV_ARROW_HPP
#define GIV_ARROW_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "giv/engine.hpp"
#include "giv/probability.hpp"

namespace giv {

/// How much symmetry the model declares. Levels only add constraints on the
/// f assignment; the planar angle identities hold at every level because the
/// geometry supplies them.
enum class SymmetryLevel {
    /// Independent f per variable and per outcome sign.
    none,
    /// Two-fold symmetry of the measuring device; no f constraint beyond the
    /// angle identities.
    c2_apparatus,
    /// Two-fold symmetry of the surrounding space: f_plus = f_minus per
    /// variable.
    c2_spacetime,
    /// Full rotational symmetry: one shared f for every variable.
    isotropic,
};

std::string to_string(SymmetryLevel level);
SymmetryLevel symmetry_level_from_name(const std::string& name);

/// The f pair of one direction variable.
struct FPair {
    ProbabilityFunction plus;
    ProbabilityFunction minus;
};

/// A planar model of direction variables: each variable is a direction in
/// the plane with two outcomes (along, against), an f pair, and a declared
/// symmetry level. Directions are stored reduced to [0, 2 pi).
class ArrowConfig {
public:
    ArrowConfig(std::map<std::string, double> directions,
                std::map<std::string, FPair> f_assignment, SymmetryLevel level);

    /// One shared f for every variable.
    static ArrowConfig isotropic(std::map<std::string, double> directions,
                                 const ProbabilityFunction& shared_f);

    /// Per-variable f with f_plus = f_minus.
    static ArrowConfig c2_spacetime(
        std::map<std::string, double> directions,
        const std::map<std::string, ProbabilityFunction>& per_variable_f);

    const std::map<std::string, double>& directions() const noexcept {
        return directions_;
    }
    const FPair& f(const std::string& variable) const;
    SymmetryLevel level() const noexcept { return level_; }

private:
    std::map<std::string, double> directions_;
    std::map<std::string, FPair> f_;
    SymmetryLevel level_;
};

/// A built model: the GivSystem plus the geometry it came from.
class ArrowSystem {
public:
    ArrowSystem(ArrowConfig config, GivSystem system);

    const GivSystem& giv() const noexcept { return system_; }
    const ArrowConfig& config() const noexcept { return config_; }
    double direction(const std::string& variable) const;

private:
    ArrowConfig config_;
    GivSystem system_;
};

/// Builds the pairwise embeddings from the direction geometry: for each
/// ordered pair the separation is theta = |wrap(phi_of - phi_space)| and the
/// column signs follow the sign of the wrapped offset, so that transitions
/// compose consistently across more than two variables. Outcome labels are
/// "plus"/"minus" with eigenvalues +1/-1.
ArrowSystem build_arrow_system(const ArrowConfig& config);

/// The state of an arrow pointing along `orientation`, componentwise in each
/// variable's space via the pair construction. An orientation on a variable's
/// axis (or its opposite) reproduces that eigenstate in the variable's own
/// space exactly.
GivState prepare(const ArrowSystem& system, double orientation);

/// max over a grid of theta in [0, pi] of |f(theta) + f(pi - theta) - 1|.
double c2_closure_defect(const ProbabilityFunction& f, int grid_size);

/// max-norm of M(theta1) M(theta2) - M(theta1 + theta2) where M(t) is the
/// plane rotation by omega(t) = arctan(sqrt(1 - f(t))/sqrt(f(t))).
/// Requires theta1, theta2, theta1 + theta2 in [0, pi].
double composition_defect(const ProbabilityFunction& f, double theta1,
                          double theta2);

/// Rotation angle omega(theta) induced by f.
double omega_angle(const ProbabilityFunction& f, double theta);

struct IsotropyRow {
    std::string name;
    double max_composition_defect = 0.0;
    double max_closure_defect = 0.0;
    bool passes = false;
};

struct IsotropyReport {
    int grid_points = 0;
    double tol = 0.0;
    std::vector<IsotropyRow> rows;
};

/// Scans each candidate for composition additivity over the triangle
/// theta1 + theta2 <= pi (grid_points per axis) and for the closure
/// constraint; flags candidates whose both defects stay within tol.
IsotropyReport isotropy_scan(const std::vector<ProbabilityFunction>& candidates,
                             int grid_points, double tol = 1e-9);

/// |<up| exp(-i theta sigma_y / 2) |up>|^2 computed through the 2x2 matrix
/// exponential; equals cos^2(theta/2).
double spin_half_reference(double theta);

struct FrequencyRow {
    std::string label;
    std::int64_t count = 0;
    double frequency = 0.0;
    double std_error = 0.0;
    /// The model probability the frequency estimates.
    double probability = 0.0;
};

struct FrequencyTable {
    std::string variable;
    std::int64_t trials = 0;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    std::string rng;
    double orientation = 0.0;
    std::vector<FrequencyRow> rows;
};

/// Repeatedly prepares at `orientation` and measures `variable`, n times.
/// Deterministic for a given seed/stream pair.
FrequencyTable sample_frequencies(const ArrowSystem& system, double orientation,
                                  const std::string& variable, std::int64_t n,
                                  std::uint64_t seed, std::uint64_t stream = 0);

/// Signed offset from `from_angle` to `to_angle` wrapped into (-pi, pi].
double wrap_angle(double from_angle, double to_angle);

/// Angle reduced into [0, 2 pi).
double reduce_angle(double angle);

}  // namespace giv

#endif
