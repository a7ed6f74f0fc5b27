#include "giv/probability.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

namespace giv {

namespace {

constexpr double kSlack = 1e-12;

double eval_raw(const std::function<double(double)>& f, double theta) {
    double v = f(theta);
    if (!std::isfinite(v)) {
        throw NotFinite("probability profile returned a non-finite value");
    }
    return v;
}

}  // namespace

ProbabilityFunction::ProbabilityFunction(Kind kind, std::string name,
                                         std::function<double(double)> f)
    : kind_(kind), name_(std::move(name)), f_(std::move(f)) {}

ProbabilityFunction ProbabilityFunction::linear() {
    return ProbabilityFunction(Kind::linear, "linear", [](double t) {
        return 1.0 - t / std::numbers::pi;
    });
}

ProbabilityFunction ProbabilityFunction::quadratic() {
    return ProbabilityFunction(Kind::quadratic, "quadratic", [](double t) {
        double r = t / std::numbers::pi;
        return 1.0 - r * r;
    });
}

ProbabilityFunction ProbabilityFunction::cosine_squared() {
    return ProbabilityFunction(Kind::cosine_squared, "cosine_squared",
                               [](double t) {
                                   double c = std::cos(0.5 * t);
                                   return c * c;
                               });
}

ProbabilityFunction ProbabilityFunction::from_name(const std::string& name) {
    if (name == "linear") return linear();
    if (name == "quadratic") return quadratic();
    if (name == "cosine_squared") return cosine_squared();
    throw InvalidConfig("unknown probability profile \"" + name + "\"");
}

ProbabilityFunction ProbabilityFunction::custom(
    std::string name, std::function<double(double)> f) {
    if (!f) {
        throw InvalidConfig("custom profile requires a callable");
    }
    if (name.empty()) {
        throw InvalidConfig("custom profile requires a name");
    }
    double at0 = eval_raw(f, 0.0);
    double atpi = eval_raw(f, std::numbers::pi);
    if (std::abs(at0 - 1.0) > kSlack) {
        throw ConstraintViolation("profile \"" + name + "\" has f(0) = " +
                                  std::to_string(at0) + ", expected 1");
    }
    if (std::abs(atpi) > kSlack) {
        throw ConstraintViolation("profile \"" + name + "\" has f(pi) = " +
                                  std::to_string(atpi) + ", expected 0");
    }
    constexpr int kGrid = 1001;
    for (int i = 0; i < kGrid; ++i) {
        double t = std::numbers::pi * static_cast<double>(i) /
                   static_cast<double>(kGrid - 1);
        double v = eval_raw(f, t);
        if (v < -kSlack || v > 1.0 + kSlack) {
            throw ProbabilityOutOfRange(
                "profile \"" + name + "\" leaves [0, 1] at theta = " +
                std::to_string(t) + " with value " + std::to_string(v));
        }
    }
    return ProbabilityFunction(Kind::custom, std::move(name), std::move(f));
}

double ProbabilityFunction::operator()(double theta) const {
    if (!std::isfinite(theta) || theta < -kSlack ||
        theta > std::numbers::pi + kSlack) {
        throw AngleOutOfRange("theta = " + std::to_string(theta) +
                              " outside [0, pi]");
    }
    double t = std::clamp(theta, 0.0, std::numbers::pi);
    double v = eval_raw(f_, t);
    if (v < -kSlack || v > 1.0 + kSlack) {
        throw ProbabilityOutOfRange("profile \"" + name_ + "\" returned " +
                                    std::to_string(v));
    }
    return std::clamp(v, 0.0, 1.0);
}

std::vector<ProbabilityFunction> builtin_probability_functions() {
    return {ProbabilityFunction::linear(), ProbabilityFunction::quadratic(),
            ProbabilityFunction::cosine_squared()};
}

}  // namespace giv
