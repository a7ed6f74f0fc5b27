#ifndef GIV_PROBABILITY_HPP
#define GIV_PROBABILITY_HPP

#include <functional>
#include <string>
#include <vector>

#include "giv/errors.hpp"

namespace giv {

/// A candidate outcome-probability profile f(theta) on [0, pi] with the
/// boundary conditions f(0) = 1 and f(pi) = 0.
///
/// Instances are admitted either as named builtins or through custom(),
/// which validates the boundary conditions (within 1e-12) and checks the
/// range [0, 1] on a 1001-point grid before accepting the callable.
class ProbabilityFunction {
public:
    enum class Kind { linear, quadratic, cosine_squared, custom };

    /// f(theta) = 1 - theta/pi.
    static ProbabilityFunction linear();
    /// f(theta) = 1 - (theta/pi)^2.
    static ProbabilityFunction quadratic();
    /// f(theta) = cos(theta/2)^2.
    static ProbabilityFunction cosine_squared();
    /// Builtin by name ("linear", "quadratic", "cosine_squared").
    /// Throws InvalidConfig for unknown names.
    static ProbabilityFunction from_name(const std::string& name);
    /// Admits a user-supplied profile after validation.
    static ProbabilityFunction custom(std::string name,
                                      std::function<double(double)> f);

    /// Evaluates f. Throws AngleOutOfRange outside [0, pi] and
    /// ProbabilityOutOfRange if the value leaves [0, 1] by more than 1e-12;
    /// values inside the slack are clamped.
    double operator()(double theta) const;

    const std::string& name() const noexcept { return name_; }
    Kind kind() const noexcept { return kind_; }

    /// Profiles are considered equal when their names match.
    bool same_as(const ProbabilityFunction& other) const noexcept {
        return name_ == other.name_;
    }

private:
    ProbabilityFunction(Kind kind, std::string name,
                        std::function<double(double)> f);

    Kind kind_;
    std::string name_;
    std::function<double(double)> f_;
};

/// The three builtin candidates in a fixed order (linear, quadratic,
/// cosine_squared).
std::vector<ProbabilityFunction> builtin_probability_functions();

}  // namespace giv

#endif
