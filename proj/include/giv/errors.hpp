#ifndef GIV_ERRORS_HPP
#define GIV_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace giv {

/// Base class for all domain errors thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Two objects that must share a dimension do not.
class DimensionMismatch : public Error {
public:
    using Error::Error;
};

/// An operation combined vectors that live in different state spaces.
/// Cross-space inner products and projections are undefined in this model;
/// they must go through a transition matrix instead.
class SpaceMismatch : public Error {
public:
    using Error::Error;
};

/// A vector that must have unit norm does not.
class NotNormalized : public Error {
public:
    using Error::Error;
};

/// A value that must be finite is NaN or infinite.
class NotFinite : public Error {
public:
    using Error::Error;
};

/// A matrix argument that must be unitary is not (within tolerance).
class NotUnitaryInput : public Error {
public:
    using Error::Error;
};

/// A probability left [0, 1] by more than the numerical tolerance.
class ProbabilityOutOfRange : public Error {
public:
    using Error::Error;
};

/// An angle argument lies outside its admissible interval.
class AngleOutOfRange : public Error {
public:
    using Error::Error;
};

/// A variable id was not found in the system.
class UnknownVariable : public Error {
public:
    using Error::Error;
};

/// An outcome or component index is out of bounds.
class IndexOutOfRange : public Error {
public:
    using Error::Error;
};

/// An operation requires two distinct variables but got the same one twice.
class SameVariable : public Error {
public:
    using Error::Error;
};

/// Two direction variables coincide modulo pi, so their pair geometry
/// is degenerate.
class DegenerateDirections : public Error {
public:
    using Error::Error;
};

/// A structural constraint of the requested symmetry level is violated.
class ConstraintViolation : public Error {
public:
    using Error::Error;
};

/// An embedding matrix is numerically singular and cannot be inverted.
class SingularEmbedding : public Error {
public:
    using Error::Error;
};

/// A pairwise transition matrix fails the unitarity required to merge
/// spaces. Carries the offending pair and the measured defect.
class NonUnitaryTransition : public Error {
public:
    NonUnitaryTransition(std::string from, std::string to, double defect)
        : Error("transition " + from + " -> " + to +
                " is not unitary, defect = " + std::to_string(defect)),
          from_(std::move(from)), to_(std::move(to)), defect_(defect) {}

    const std::string& from() const noexcept { return from_; }
    const std::string& to() const noexcept { return to_; }
    double defect() const noexcept { return defect_; }

private:
    std::string from_;
    std::string to_;
    double defect_;
};

/// Pairwise transitions are individually unitary but mutually inconsistent:
/// composing A->B with B->C disagrees with the direct A->C transition.
class InconsistentTransitions : public Error {
public:
    InconsistentTransitions(std::string a, std::string b, std::string c,
                            double defect)
        : Error("transitions are inconsistent along " + a + " -> " + b +
                " -> " + c + ", defect = " + std::to_string(defect)),
          a_(std::move(a)), b_(std::move(b)), c_(std::move(c)),
          defect_(defect) {}

    const std::string& a() const noexcept { return a_; }
    const std::string& b() const noexcept { return b_; }
    const std::string& c() const noexcept { return c_; }
    double defect() const noexcept { return defect_; }

private:
    std::string a_;
    std::string b_;
    std::string c_;
    double defect_;
};

/// A configuration file or object is malformed or contains unknown keys.
class InvalidConfig : public Error {
public:
    using Error::Error;
};

/// A file could not be read or written.
class IoFailure : public Error {
public:
    using Error::Error;
};

}  // namespace giv

#endif
