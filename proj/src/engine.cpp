#include "giv/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace giv {

namespace {

constexpr double kProbSlack = 1e-12;

double checked_probability(double p, const char* what) {
    if (p < -kProbSlack || p > 1.0 + kProbSlack) {
        throw ProbabilityOutOfRange(std::string(what) + " = " +
                                    std::to_string(p) + " outside [0, 1]");
    }
    return std::clamp(p, 0.0, 1.0);
}

}  // namespace

TransitionMatrix::TransitionMatrix(std::string from, std::string to, Mat matrix,
                                   ColumnNorms norms)
    : from_(std::move(from)), to_(std::move(to)), m_(std::move(matrix)) {
    if (m_.rows() != m_.cols() || m_.rows() == 0) {
        throw DimensionMismatch("transition matrix must be square and non-empty");
    }
    if (!all_finite(m_)) {
        throw NotFinite("transition matrix has non-finite entries");
    }
    if (norms == ColumnNorms::required) {
        for (Eigen::Index j = 0; j < m_.cols(); ++j) {
            double n = m_.col(j).norm();
            if (std::abs(n - 1.0) > kDefaultTol) {
                throw NotNormalized("column " + std::to_string(j) +
                                    " of transition " + from_ + " -> " + to_ +
                                    " has norm " + std::to_string(n));
            }
        }
    }
}

struct GivSystem::Model {
    std::vector<VariableSpec> variables;
    std::map<std::string, size_t> index;
    Eigen::Index dim = 0;
    std::map<std::pair<std::string, std::string>, TransitionMatrix> embeddings;
    std::map<std::pair<std::string, std::string>, double> inverse_defects;
    double max_inverse_defect = 0.0;
};

GivSystem::GivSystem(std::vector<VariableSpec> variables,
                     std::vector<TransitionMatrix> embeddings) {
    auto model = std::make_shared<Model>();
    if (variables.empty()) {
        throw InvalidConfig("a system needs at least one variable");
    }
    for (auto& v : variables) {
        if (v.id.empty()) {
            throw InvalidConfig("variable id must be non-empty");
        }
        if (v.outcome_labels.size() < 2) {
            throw InvalidConfig("variable " + v.id +
                                " needs at least two outcomes");
        }
        std::set<std::string> labels(v.outcome_labels.begin(),
                                     v.outcome_labels.end());
        if (labels.size() != v.outcome_labels.size()) {
            throw InvalidConfig("variable " + v.id +
                                " has duplicate outcome labels");
        }
        if (v.eigenvalues.empty()) {
            for (size_t k = 0; k < v.outcome_labels.size(); ++k) {
                v.eigenvalues.emplace_back(static_cast<double>(k + 1), 0.0);
            }
        }
        if (v.eigenvalues.size() != v.outcome_labels.size()) {
            throw DimensionMismatch("variable " + v.id +
                                    " has eigenvalue count different from its "
                                    "outcome count");
        }
        if (model->index.count(v.id)) {
            throw InvalidConfig("duplicate variable id " + v.id);
        }
        model->index[v.id] = model->variables.size();
        model->variables.push_back(std::move(v));
    }
    model->dim = model->variables.front().dim();
    for (const auto& v : model->variables) {
        if (v.dim() != model->dim) {
            throw DimensionMismatch(
                "all state spaces must share one dimension; variable " + v.id +
                " differs");
        }
    }

    for (auto& tm : embeddings) {
        if (!model->index.count(tm.from()) || !model->index.count(tm.to())) {
            throw UnknownVariable("embedding references unknown variable " +
                                  (model->index.count(tm.from()) ? tm.to()
                                                                 : tm.from()));
        }
        if (tm.dim() != model->dim) {
            throw DimensionMismatch("embedding " + tm.from() + " -> " +
                                    tm.to() + " has wrong dimension");
        }
        if (tm.from() == tm.to()) {
            Mat diff = tm.matrix() - Mat::Identity(model->dim, model->dim);
            if (max_abs(diff) > 1e-12) {
                throw ConstraintViolation("self embedding of " + tm.from() +
                                          " must be the identity");
            }
            continue;  // replaced by an exact identity below
        }
        auto key = std::make_pair(tm.to(), tm.from());
        if (model->embeddings.count(key)) {
            throw InvalidConfig("duplicate embedding " + tm.from() + " -> " +
                                tm.to());
        }
        model->embeddings.emplace(key, std::move(tm));
    }
    for (const auto& v : model->variables) {
        model->embeddings.emplace(
            std::make_pair(v.id, v.id),
            TransitionMatrix(v.id, v.id, Mat::Identity(model->dim, model->dim)));
    }
    for (const auto& a : model->variables) {
        for (const auto& b : model->variables) {
            if (!model->embeddings.count({a.id, b.id})) {
                throw InvalidConfig("missing embedding of " + b.id + " in " +
                                    a.id);
            }
        }
    }
    for (const auto& a : model->variables) {
        for (const auto& b : model->variables) {
            const Mat& ab = model->embeddings.at({a.id, b.id}).matrix();
            const Mat& ba = model->embeddings.at({b.id, a.id}).matrix();
            Mat prod = ab * ba;
            prod.diagonal().array() -= 1.0;
            double defect = max_abs(prod);
            model->inverse_defects[{a.id, b.id}] = defect;
            model->max_inverse_defect =
                std::max(model->max_inverse_defect, defect);
        }
    }
    model_ = std::move(model);
}

const std::vector<VariableSpec>& GivSystem::variables() const noexcept {
    return model_->variables;
}

const VariableSpec& GivSystem::variable(const std::string& id) const {
    auto it = model_->index.find(id);
    if (it == model_->index.end()) {
        throw UnknownVariable("no variable " + id);
    }
    return model_->variables[it->second];
}

bool GivSystem::has_variable(const std::string& id) const noexcept {
    return model_->index.count(id) > 0;
}

Eigen::Index GivSystem::dim() const noexcept { return model_->dim; }

const TransitionMatrix& GivSystem::embedding(const std::string& space,
                                             const std::string& of) const {
    if (!model_->index.count(space)) {
        throw UnknownVariable("no variable " + space);
    }
    if (!model_->index.count(of)) {
        throw UnknownVariable("no variable " + of);
    }
    return model_->embeddings.at({space, of});
}

double GivSystem::pair_inverse_defect(const std::string& a,
                                      const std::string& b) const {
    embedding(a, b);
    return model_->inverse_defects.at({a, b});
}

double GivSystem::max_pair_inverse_defect() const noexcept {
    return model_->max_inverse_defect;
}

bool GivSystem::same_model(const GivSystem& other) const noexcept {
    return model_ == other.model_;
}

GivState::GivState(GivSystem system, std::map<std::string, StateVector> components,
                   std::optional<std::pair<std::string, Eigen::Index>> eigen)
    : system_(std::move(system)), comps_(std::move(components)),
      eigen_(std::move(eigen)) {}

GivState GivState::eigenstate(const GivSystem& system,
                              const std::string& variable,
                              Eigen::Index outcome_index) {
    const auto& var = system.variable(variable);
    if (outcome_index < 0 || outcome_index >= var.dim()) {
        throw IndexOutOfRange("outcome index " + std::to_string(outcome_index) +
                              " out of range for variable " + variable);
    }
    std::map<std::string, StateVector> comps;
    for (const auto& v : system.variables()) {
        Vec c = system.embedding(v.id, variable).matrix().col(outcome_index);
        comps.emplace(v.id, StateVector(v.id, std::move(c)));
    }
    return GivState(system, std::move(comps),
                    std::make_pair(variable, outcome_index));
}

GivState GivState::general(const GivSystem& system,
                           const std::map<std::string, Vec>& components) {
    std::map<std::string, StateVector> comps;
    for (const auto& v : system.variables()) {
        auto it = components.find(v.id);
        if (it == components.end()) {
            throw UnknownVariable("missing component for variable " + v.id);
        }
        if (it->second.size() != system.dim()) {
            throw DimensionMismatch("component for " + v.id +
                                    " has wrong dimension");
        }
        StateVector sv(v.id, it->second);
        if (!sv.is_normalized()) {
            throw NotNormalized("component for " + v.id + " is not normalized");
        }
        comps.emplace(v.id, std::move(sv));
    }
    for (const auto& [id, vec] : components) {
        if (!system.has_variable(id)) {
            throw UnknownVariable("component for unknown variable " + id);
        }
    }
    return GivState(system, std::move(comps), std::nullopt);
}

const StateVector& GivState::component(const std::string& variable) const {
    auto it = comps_.find(variable);
    if (it == comps_.end()) {
        throw UnknownVariable("no component for variable " + variable);
    }
    return it->second;
}

const std::string& GivState::eigen_variable() const {
    if (!eigen_) {
        throw Error("state is not an eigenstate");
    }
    return eigen_->first;
}

Eigen::Index GivState::eigen_index() const {
    if (!eigen_) {
        throw Error("state is not an eigenstate");
    }
    return eigen_->second;
}

TransitionMatrix embed_pair(const ProbabilityFunction& f_plus,
                            const ProbabilityFunction& f_minus,
                            double theta_pp, double theta_mm, EmbedSign sign,
                            const std::string& from, const std::string& to) {
    double fp = f_plus(theta_pp);
    double fm = f_minus(theta_mm);
    double s = (sign == EmbedSign::standard) ? -1.0 : 1.0;
    Mat m(2, 2);
    m(0, 0) = std::sqrt(fp);
    m(1, 0) = std::sqrt(1.0 - fp);
    m(0, 1) = s * std::sqrt(1.0 - fm);
    m(1, 1) = std::sqrt(fm);
    return TransitionMatrix(from, to, std::move(m));
}

double orthogonality_defect(const ProbabilityFunction& f_plus,
                            const ProbabilityFunction& f_minus,
                            double theta_pp, double theta_mm) {
    double fp = f_plus(theta_pp);
    double fm = f_minus(theta_mm);
    return std::sqrt(1.0 - fp) * std::sqrt(fm) -
           std::sqrt(1.0 - fm) * std::sqrt(fp);
}

namespace {

std::pair<double, bool> one_rotation_angle(const ProbabilityFunction& f,
                                           double theta) {
    double v = f(theta);
    if (v == 0.0) {
        return {std::numbers::pi / 2.0, true};
    }
    return {std::atan2(std::sqrt(1.0 - v), std::sqrt(v)), false};
}

}  // namespace

RotationAngles rotation_angles(const ProbabilityFunction& f_plus,
                               const ProbabilityFunction& f_minus,
                               double theta) {
    RotationAngles out;
    auto [ap, sp] = one_rotation_angle(f_plus, theta);
    auto [am, sm] = one_rotation_angle(f_minus, theta);
    out.alpha_plus = ap;
    out.singular_plus = sp;
    out.alpha_minus = am;
    out.singular_minus = sm;
    return out;
}

double restricted_born(const GivState& state, const std::string& variable,
                       Eigen::Index outcome_index) {
    const auto& var = state.system().variable(variable);
    if (outcome_index < 0 || outcome_index >= var.dim()) {
        throw IndexOutOfRange("outcome index " + std::to_string(outcome_index) +
                              " out of range for variable " + variable);
    }
    const StateVector& comp = state.component(variable);
    double p = std::norm(comp.coords()(outcome_index));
    return checked_probability(p, "restricted probability");
}

double restricted_born(const GivState& state, const StateVector& outcome_axis) {
    if (!state.system().has_variable(outcome_axis.space())) {
        throw UnknownVariable("no variable " + outcome_axis.space());
    }
    return born_probability(outcome_axis, state.component(outcome_axis.space()));
}

MeasureResult measure(const GivState& state, const std::string& variable,
                      Pcg32& rng) {
    const auto& var = state.system().variable(variable);
    std::vector<double> probs(static_cast<size_t>(var.dim()));
    for (Eigen::Index i = 0; i < var.dim(); ++i) {
        probs[static_cast<size_t>(i)] = restricted_born(state, variable, i);
    }
    auto k = static_cast<Eigen::Index>(sample_index(probs, rng.next_double()));
    return {k, var.outcome_labels[static_cast<size_t>(k)],
            GivState::eigenstate(state.system(), variable, k)};
}

double direct_probability(const GivState& state, const std::string& variable,
                          Eigen::Index i) {
    return restricted_born(state, variable, i);
}

double indirect_probability(const GivState& state, const std::string& via,
                            const std::string& target, Eigen::Index i) {
    if (via == target) {
        throw SameVariable("indirect path requires distinct variables, got " +
                           via + " twice");
    }
    const auto& sys = state.system();
    const auto& via_var = sys.variable(via);
    const auto& target_var = sys.variable(target);
    if (i < 0 || i >= target_var.dim()) {
        throw IndexOutOfRange("outcome index " + std::to_string(i) +
                              " out of range for variable " + target);
    }
    double total = 0.0;
    for (Eigen::Index j = 0; j < via_var.dim(); ++j) {
        double p_via = restricted_born(state, via, j);
        // Probability of the target outcome from the intermediate eigenstate,
        // computed inside the target's own space.
        double p_step =
            std::norm(sys.embedding(target, via).matrix()(i, j));
        p_step = checked_probability(p_step, "step probability");
        total += p_via * p_step;
    }
    return checked_probability(total, "indirect probability");
}

double interference_deviation(const GivState& state, const std::string& via,
                              const std::string& target, Eigen::Index i) {
    return direct_probability(state, target, i) -
           indirect_probability(state, via, target, i);
}

bool is_phase_permutation(const Mat& m, double tol) {
    if (m.rows() != m.cols()) return false;
    const Eigen::Index n = m.rows();
    for (Eigen::Index j = 0; j < n; ++j) {
        Eigen::Index hits = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            double a = std::abs(m(i, j));
            if (a > tol) {
                if (std::abs(a - 1.0) > tol) return false;
                ++hits;
            }
        }
        if (hits != 1) return false;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::Index hits = 0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (std::abs(m(i, j)) > tol) ++hits;
        }
        if (hits != 1) return false;
    }
    return true;
}

}  // namespace giv
