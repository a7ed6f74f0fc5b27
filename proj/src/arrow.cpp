#include "giv/arrow.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace giv {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kAxisTol = 1e-9;

}  // namespace

std::string to_string(SymmetryLevel level) {
    switch (level) {
        case SymmetryLevel::none: return "none";
        case SymmetryLevel::c2_apparatus: return "c2_apparatus";
        case SymmetryLevel::c2_spacetime: return "c2_spacetime";
        case SymmetryLevel::isotropic: return "isotropic";
    }
    throw Error("unreachable symmetry level");
}

SymmetryLevel symmetry_level_from_name(const std::string& name) {
    if (name == "none") return SymmetryLevel::none;
    if (name == "c2_apparatus") return SymmetryLevel::c2_apparatus;
    if (name == "c2_spacetime") return SymmetryLevel::c2_spacetime;
    if (name == "isotropic") return SymmetryLevel::isotropic;
    throw InvalidConfig("unknown symmetry level \"" + name + "\"");
}

double reduce_angle(double angle) {
    if (!std::isfinite(angle)) {
        throw NotFinite("angle is not finite");
    }
    double a = std::fmod(angle, 2.0 * kPi);
    if (a < 0.0) a += 2.0 * kPi;
    if (a >= 2.0 * kPi) a = 0.0;
    return a;
}

double wrap_angle(double from_angle, double to_angle) {
    double d = std::fmod(to_angle - from_angle, 2.0 * kPi);
    if (d <= -kPi) d += 2.0 * kPi;
    if (d > kPi) d -= 2.0 * kPi;
    return d;
}

ArrowConfig::ArrowConfig(std::map<std::string, double> directions,
                         std::map<std::string, FPair> f_assignment,
                         SymmetryLevel level)
    : directions_(std::move(directions)), f_(std::move(f_assignment)),
      level_(level) {
    if (directions_.empty()) {
        throw InvalidConfig("arrow config needs at least one variable");
    }
    for (auto& [id, angle] : directions_) {
        if (id.empty()) {
            throw InvalidConfig("variable id must be non-empty");
        }
        angle = reduce_angle(angle);
    }
    for (const auto& [id, angle] : directions_) {
        if (!f_.count(id)) {
            throw InvalidConfig("missing f assignment for variable " + id);
        }
    }
    for (const auto& [id, pair] : f_) {
        if (!directions_.count(id)) {
            throw InvalidConfig("f assigned to unknown variable " + id);
        }
    }
    if (level_ == SymmetryLevel::c2_spacetime ||
        level_ == SymmetryLevel::isotropic) {
        for (const auto& [id, pair] : f_) {
            if (!pair.plus.same_as(pair.minus)) {
                throw ConstraintViolation(
                    "symmetry level " + to_string(level_) + " requires equal "
                    "plus/minus f for variable " + id);
            }
        }
    }
    if (level_ == SymmetryLevel::isotropic) {
        const auto& first = f_.begin()->second.plus;
        for (const auto& [id, pair] : f_) {
            if (!pair.plus.same_as(first)) {
                throw ConstraintViolation(
                    "isotropic level requires one shared f; variable " + id +
                    " uses " + pair.plus.name() + " instead of " +
                    first.name());
            }
        }
    }
}

ArrowConfig ArrowConfig::isotropic(std::map<std::string, double> directions,
                                   const ProbabilityFunction& shared_f) {
    std::map<std::string, FPair> f;
    for (const auto& [id, angle] : directions) {
        f.emplace(id, FPair{shared_f, shared_f});
    }
    return ArrowConfig(std::move(directions), std::move(f),
                       SymmetryLevel::isotropic);
}

ArrowConfig ArrowConfig::c2_spacetime(
    std::map<std::string, double> directions,
    const std::map<std::string, ProbabilityFunction>& per_variable_f) {
    std::map<std::string, FPair> f;
    for (const auto& [id, fn] : per_variable_f) {
        f.emplace(id, FPair{fn, fn});
    }
    return ArrowConfig(std::move(directions), std::move(f),
                       SymmetryLevel::c2_spacetime);
}

const FPair& ArrowConfig::f(const std::string& variable) const {
    auto it = f_.find(variable);
    if (it == f_.end()) {
        throw UnknownVariable("no f assignment for variable " + variable);
    }
    return it->second;
}

ArrowSystem::ArrowSystem(ArrowConfig config, GivSystem system)
    : config_(std::move(config)), system_(std::move(system)) {}

double ArrowSystem::direction(const std::string& variable) const {
    auto it = config_.directions().find(variable);
    if (it == config_.directions().end()) {
        throw UnknownVariable("no variable " + variable);
    }
    return it->second;
}

namespace {

/// Second-column sign flip for a negative direction offset. Keeping the sign
/// tied to the offset's orientation is what makes transitions between more
/// than two variables compose instead of clashing.
Mat signed_pair_matrix(const ProbabilityFunction& f_plus,
                       const ProbabilityFunction& f_minus, double theta,
                       double sign) {
    double fp = f_plus(theta);
    double fm = f_minus(theta);
    Mat m(2, 2);
    m(0, 0) = std::sqrt(fp);
    m(1, 0) = sign * std::sqrt(1.0 - fp);
    m(0, 1) = -sign * std::sqrt(1.0 - fm);
    m(1, 1) = std::sqrt(fm);
    return m;
}

}  // namespace

ArrowSystem build_arrow_system(const ArrowConfig& config) {
    const auto& dirs = config.directions();
    if (dirs.size() < 2) {
        throw InvalidConfig("arrow system needs at least two variables");
    }
    for (auto a = dirs.begin(); a != dirs.end(); ++a) {
        for (auto b = std::next(a); b != dirs.end(); ++b) {
            double theta = std::abs(wrap_angle(a->second, b->second));
            if (theta < kAxisTol || theta > kPi - kAxisTol) {
                throw DegenerateDirections("variables " + a->first + " and " +
                                           b->first +
                                           " share one axis (directions " +
                                           std::to_string(a->second) + ", " +
                                           std::to_string(b->second) + ")");
            }
        }
    }

    std::vector<VariableSpec> vars;
    for (const auto& [id, angle] : dirs) {
        vars.push_back(VariableSpec{
            id, {"plus", "minus"}, {Complex(1.0, 0.0), Complex(-1.0, 0.0)}});
    }

    std::vector<TransitionMatrix> embeddings;
    for (const auto& [space_id, space_angle] : dirs) {
        for (const auto& [of_id, of_angle] : dirs) {
            if (space_id == of_id) continue;
            double delta = wrap_angle(space_angle, of_angle);
            double theta = std::abs(delta);
            double sign = (delta >= 0.0) ? 1.0 : -1.0;
            const FPair& f = config.f(space_id);
            embeddings.emplace_back(
                of_id, space_id,
                signed_pair_matrix(f.plus, f.minus, theta, sign));
        }
    }
    return ArrowSystem(config, GivSystem(std::move(vars), std::move(embeddings)));
}

GivState prepare(const ArrowSystem& system, double orientation) {
    double head = reduce_angle(orientation);
    std::map<std::string, Vec> comps;
    for (const auto& [id, angle] : system.config().directions()) {
        double delta = wrap_angle(angle, head);
        double theta = std::abs(delta);
        double sign = (delta >= 0.0) ? 1.0 : -1.0;
        double fp = system.config().f(id).plus(theta);
        Vec c(2);
        c(0) = std::sqrt(fp);
        c(1) = sign * std::sqrt(1.0 - fp);
        comps.emplace(id, std::move(c));
    }
    return GivState::general(system.giv(), comps);
}

double c2_closure_defect(const ProbabilityFunction& f, int grid_size) {
    if (grid_size < 2) {
        throw InvalidConfig("closure scan needs a grid of at least 2 points");
    }
    double worst = 0.0;
    for (int i = 0; i < grid_size; ++i) {
        double theta = kPi * static_cast<double>(i) /
                       static_cast<double>(grid_size - 1);
        double r = f(theta) + f(kPi - theta) - 1.0;
        worst = std::max(worst, std::abs(r));
    }
    return worst;
}

double omega_angle(const ProbabilityFunction& f, double theta) {
    double v = f(theta);
    return std::atan2(std::sqrt(1.0 - v), std::sqrt(v));
}

namespace {

Mat omega_rotation(const ProbabilityFunction& f, double theta) {
    double w = omega_angle(f, theta);
    Mat m(2, 2);
    m(0, 0) = std::cos(w);
    m(0, 1) = -std::sin(w);
    m(1, 0) = std::sin(w);
    m(1, 1) = std::cos(w);
    return m;
}

}  // namespace

double composition_defect(const ProbabilityFunction& f, double theta1,
                          double theta2) {
    constexpr double slack = 1e-12;
    if (theta1 < -slack || theta2 < -slack || theta1 > kPi + slack ||
        theta2 > kPi + slack || theta1 + theta2 > kPi + slack) {
        throw AngleOutOfRange("composition angles must satisfy theta1, theta2, "
                              "theta1 + theta2 in [0, pi]");
    }
    Mat lhs = omega_rotation(f, theta1) * omega_rotation(f, theta2);
    Mat rhs = omega_rotation(f, theta1 + theta2);
    return max_abs(lhs - rhs);
}

IsotropyReport isotropy_scan(const std::vector<ProbabilityFunction>& candidates,
                             int grid_points, double tol) {
    if (candidates.empty()) {
        throw InvalidConfig("isotropy scan needs at least one candidate");
    }
    if (grid_points < 2) {
        throw InvalidConfig("isotropy scan needs a grid of at least 2 points");
    }
    IsotropyReport report;
    report.grid_points = grid_points;
    report.tol = tol;
    for (const auto& f : candidates) {
        IsotropyRow row;
        row.name = f.name();
        row.max_closure_defect = c2_closure_defect(f, grid_points);
        double step = kPi / static_cast<double>(grid_points - 1);
        for (int i = 0; i < grid_points; ++i) {
            for (int j = 0; i + j < grid_points; ++j) {
                row.max_composition_defect =
                    std::max(row.max_composition_defect,
                             composition_defect(f, step * i, step * j));
            }
        }
        row.passes = row.max_composition_defect <= tol &&
                     row.max_closure_defect <= tol;
        report.rows.push_back(std::move(row));
    }
    return report;
}

double spin_half_reference(double theta) {
    if (!(theta >= -1e-12 && theta <= kPi + 1e-12)) {
        throw AngleOutOfRange("theta outside [0, pi]");
    }
    // exp(-i theta sigma_y / 2) in closed form.
    Mat sigma_y(2, 2);
    sigma_y(0, 0) = Complex(0.0, 0.0);
    sigma_y(0, 1) = Complex(0.0, -1.0);
    sigma_y(1, 0) = Complex(0.0, 1.0);
    sigma_y(1, 1) = Complex(0.0, 0.0);
    Mat u = std::cos(0.5 * theta) * Mat::Identity(2, 2) -
            Complex(0.0, 1.0) * std::sin(0.5 * theta) * sigma_y;
    Vec up(2);
    up << Complex(1.0, 0.0), Complex(0.0, 0.0);
    Complex amp = up.dot(u * up);
    return std::norm(amp);
}

FrequencyTable sample_frequencies(const ArrowSystem& system, double orientation,
                                  const std::string& variable, std::int64_t n,
                                  std::uint64_t seed, std::uint64_t stream) {
    if (n < 1) {
        throw InvalidConfig("trial count must be at least 1");
    }
    const auto& var = system.giv().variable(variable);
    GivState state = prepare(system, orientation);
    std::vector<double> probs(static_cast<size_t>(var.dim()));
    for (Eigen::Index i = 0; i < var.dim(); ++i) {
        probs[static_cast<size_t>(i)] = restricted_born(state, variable, i);
    }
    std::vector<std::int64_t> counts(probs.size(), 0);
    Pcg32 rng(seed, stream);
    for (std::int64_t t = 0; t < n; ++t) {
        ++counts[sample_index(probs, rng.next_double())];
    }
    FrequencyTable table;
    table.variable = variable;
    table.trials = n;
    table.seed = seed;
    table.stream = stream;
    table.rng = Pcg32::kName;
    table.orientation = reduce_angle(orientation);
    for (size_t i = 0; i < probs.size(); ++i) {
        FrequencyRow row;
        row.label = var.outcome_labels[i];
        row.count = counts[i];
        row.frequency =
            static_cast<double>(counts[i]) / static_cast<double>(n);
        row.probability = probs[i];
        row.std_error =
            std::sqrt(probs[i] * (1.0 - probs[i]) / static_cast<double>(n));
        table.rows.push_back(std::move(row));
    }
    return table;
}

}  // namespace giv
