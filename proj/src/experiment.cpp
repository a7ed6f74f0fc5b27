#include "giv/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "giv/symmetry.hpp"

namespace giv {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDegenerate = 1e-9;

using nlohmann::json;

void require_keys(const json& j, const std::set<std::string>& allowed,
                  const std::string& where) {
    if (!j.is_object()) {
        throw InvalidConfig(where + " must be an object");
    }
    for (const auto& [key, value] : j.items()) {
        if (!allowed.count(key)) {
            throw InvalidConfig("unknown key \"" + key + "\" in " + where);
        }
    }
}

double number_at(const json& j, const std::string& where) {
    if (!j.is_number()) {
        throw InvalidConfig(where + " must be a number");
    }
    double v = j.get<double>();
    if (!std::isfinite(v)) {
        throw InvalidConfig(where + " must be finite");
    }
    return v;
}

double angle_at(const json& j, const std::string& where, bool degrees) {
    double v = number_at(j, where);
    return degrees ? v * kPi / 180.0 : v;
}

std::string string_at(const json& j, const std::string& where) {
    if (!j.is_string()) {
        throw InvalidConfig(where + " must be a string");
    }
    return j.get<std::string>();
}

std::int64_t integer_at(const json& j, const std::string& where) {
    if (!j.is_number_integer()) {
        throw InvalidConfig(where + " must be an integer");
    }
    return j.get<std::int64_t>();
}

Complex complex_at(const json& j, const std::string& where) {
    if (j.is_number()) {
        return Complex(j.get<double>(), 0.0);
    }
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
        return Complex(j[0].get<double>(), j[1].get<double>());
    }
    throw InvalidConfig(where + " must be a number or an [re, im] pair");
}

Vec vector_at(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) {
        throw InvalidConfig(where + " must be a non-empty array");
    }
    Vec v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        v(static_cast<Eigen::Index>(i)) =
            complex_at(j[i], where + "[" + std::to_string(i) + "]");
    }
    return v;
}

Mat matrix_at(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) {
        throw InvalidConfig(where + " must be a non-empty array of rows");
    }
    const auto rows = static_cast<Eigen::Index>(j.size());
    Mat m;
    for (Eigen::Index r = 0; r < rows; ++r) {
        const json& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array()) {
            throw InvalidConfig(where + " rows must be arrays");
        }
        if (r == 0) {
            m.resize(rows, static_cast<Eigen::Index>(row.size()));
        }
        if (static_cast<Eigen::Index>(row.size()) != m.cols()) {
            throw InvalidConfig(where + " rows have unequal lengths");
        }
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            m(r, c) = complex_at(row[static_cast<std::size_t>(c)],
                                 where + "[" + std::to_string(r) + "][" +
                                     std::to_string(c) + "]");
        }
    }
    return m;
}

json complex_to_json(const Complex& z) {
    return json::array({z.real(), z.imag()});
}

json matrix_to_json(const Mat& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            row.push_back(complex_to_json(m(r, c)));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

ArrowConfig parse_arrow_system(const json& j, bool degrees) {
    require_keys(j, {"type", "symmetry_level", "directions", "f"}, "system");
    if (!j.contains("directions")) {
        throw InvalidConfig("arrow system needs \"directions\"");
    }
    if (!j.contains("f")) {
        throw InvalidConfig("arrow system needs \"f\"");
    }
    SymmetryLevel level = symmetry_level_from_name(
        j.contains("symmetry_level")
            ? string_at(j.at("symmetry_level"), "system.symmetry_level")
            : "isotropic");

    std::map<std::string, double> directions;
    if (!j.at("directions").is_object()) {
        throw InvalidConfig("system.directions must map variable ids to angles");
    }
    for (const auto& [id, angle] : j.at("directions").items()) {
        directions[id] =
            angle_at(angle, "system.directions." + id, degrees);
    }

    std::map<std::string, FPair> f;
    const json& fj = j.at("f");
    if (fj.is_string()) {
        // One shared name for every variable.
        auto fn = ProbabilityFunction::from_name(fj.get<std::string>());
        for (const auto& [id, angle] : directions) {
            f.emplace(id, FPair{fn, fn});
        }
    } else if (fj.is_object()) {
        for (const auto& [id, spec] : fj.items()) {
            if (spec.is_string()) {
                auto fn = ProbabilityFunction::from_name(spec.get<std::string>());
                f.emplace(id, FPair{fn, fn});
            } else if (spec.is_object()) {
                require_keys(spec, {"plus", "minus"}, "system.f." + id);
                if (!spec.contains("plus") || !spec.contains("minus")) {
                    throw InvalidConfig("system.f." + id +
                                        " needs \"plus\" and \"minus\"");
                }
                f.emplace(id,
                          FPair{ProbabilityFunction::from_name(string_at(
                                    spec.at("plus"), "system.f." + id + ".plus")),
                                ProbabilityFunction::from_name(
                                    string_at(spec.at("minus"),
                                              "system.f." + id + ".minus"))});
            } else {
                throw InvalidConfig("system.f." + id +
                                    " must be a name or a {plus, minus} object");
            }
        }
    } else {
        throw InvalidConfig("system.f must be a name or an object");
    }
    return ArrowConfig(std::move(directions), std::move(f), level);
}

GivSystem parse_explicit_system(const json& j) {
    require_keys(j, {"type", "variables", "embeddings"}, "system");
    if (!j.contains("variables") || !j.at("variables").is_array()) {
        throw InvalidConfig("explicit system needs a \"variables\" array");
    }
    if (!j.contains("embeddings") || !j.at("embeddings").is_array()) {
        throw InvalidConfig("explicit system needs an \"embeddings\" array");
    }
    std::vector<VariableSpec> vars;
    for (const auto& vj : j.at("variables")) {
        require_keys(vj, {"id", "outcome_labels", "eigenvalues"},
                     "system.variables entry");
        if (!vj.contains("id") || !vj.contains("outcome_labels")) {
            throw InvalidConfig(
                "variable entries need \"id\" and \"outcome_labels\"");
        }
        VariableSpec spec;
        spec.id = string_at(vj.at("id"), "variable id");
        for (const auto& label : vj.at("outcome_labels")) {
            spec.outcome_labels.push_back(string_at(label, "outcome label"));
        }
        if (vj.contains("eigenvalues")) {
            for (const auto& ev : vj.at("eigenvalues")) {
                spec.eigenvalues.push_back(complex_at(ev, "eigenvalue"));
            }
        }
        vars.push_back(std::move(spec));
    }
    std::vector<TransitionMatrix> embeddings;
    for (const auto& ej : j.at("embeddings")) {
        require_keys(ej, {"space", "of", "matrix"}, "system.embeddings entry");
        if (!ej.contains("space") || !ej.contains("of") ||
            !ej.contains("matrix")) {
            throw InvalidConfig(
                "embedding entries need \"space\", \"of\", \"matrix\"");
        }
        embeddings.emplace_back(
            string_at(ej.at("of"), "embedding of"),
            string_at(ej.at("space"), "embedding space"),
            matrix_at(ej.at("matrix"), "embedding matrix"));
    }
    return GivSystem(std::move(vars), std::move(embeddings));
}

std::vector<ProbabilityFunction> parse_candidates(const json& j,
                                                  const std::string& where) {
    if (!j.is_array() || j.empty()) {
        throw InvalidConfig(where + " must be a non-empty array of names");
    }
    std::vector<ProbabilityFunction> out;
    for (const auto& name : j) {
        out.push_back(ProbabilityFunction::from_name(string_at(name, where)));
    }
    return out;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::probability_table: return "probability_table";
        case ExperimentKind::defect_scan: return "defect_scan";
        case ExperimentKind::interference: return "interference";
        case ExperimentKind::collapse_report: return "collapse_report";
        case ExperimentKind::sample: return "sample";
        case ExperimentKind::spin_half: return "spin_half";
        case ExperimentKind::isotropy_scan: return "isotropy_scan";
    }
    throw Error("unreachable experiment kind");
}

ExperimentKind experiment_kind_from_name(const std::string& name) {
    if (name == "probability_table") return ExperimentKind::probability_table;
    if (name == "defect_scan") return ExperimentKind::defect_scan;
    if (name == "interference") return ExperimentKind::interference;
    if (name == "collapse_report") return ExperimentKind::collapse_report;
    if (name == "sample") return ExperimentKind::sample;
    if (name == "spin_half") return ExperimentKind::spin_half;
    if (name == "isotropy_scan") return ExperimentKind::isotropy_scan;
    throw InvalidConfig("unknown experiment \"" + name + "\"");
}

ExperimentConfig ExperimentConfig::from_file(
    const std::string& path, bool degrees,
    std::optional<ExperimentKind> kind_override) {
    json parsed;
    try {
        parsed = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw InvalidConfig("config file " + path + " is not valid JSON: " +
                            e.what());
    }
    return from_json(parsed, degrees, kind_override);
}

ExperimentConfig ExperimentConfig::defaults(ExperimentKind kind) {
    return from_json(json{{"experiment", to_string(kind)}}, false, kind);
}

ExperimentConfig ExperimentConfig::from_json(
    const json& j, bool degrees, std::optional<ExperimentKind> kind_override) {
    if (!j.is_object()) {
        throw InvalidConfig("config must be a JSON object");
    }
    ExperimentConfig cfg;

    if (j.contains("experiment")) {
        cfg.kind_ = experiment_kind_from_name(
            string_at(j.at("experiment"), "experiment"));
        if (kind_override && *kind_override != cfg.kind_) {
            throw InvalidConfig("config experiment \"" + to_string(cfg.kind_) +
                                "\" does not match the requested \"" +
                                to_string(*kind_override) + "\"");
        }
    } else if (kind_override) {
        cfg.kind_ = *kind_override;
    } else {
        throw InvalidConfig("config needs an \"experiment\" field");
    }

    std::set<std::string> allowed = {"experiment", "seed", "stream"};
    switch (cfg.kind_) {
        case ExperimentKind::probability_table:
            allowed.insert({"system", "grid"});
            break;
        case ExperimentKind::defect_scan:
            allowed.insert({"candidates", "f_pairs", "grid"});
            break;
        case ExperimentKind::interference:
            allowed.insert({"system", "state", "target", "via", "grid"});
            break;
        case ExperimentKind::collapse_report:
            allowed.insert({"system", "tolerance"});
            break;
        case ExperimentKind::sample:
            allowed.insert({"system", "orientation", "variable", "trials"});
            break;
        case ExperimentKind::spin_half:
            allowed.insert({"grid"});
            break;
        case ExperimentKind::isotropy_scan:
            allowed.insert({"candidates", "grid", "tolerance"});
            break;
    }
    require_keys(j, allowed, "config");

    if (j.contains("seed")) {
        std::int64_t s = integer_at(j.at("seed"), "seed");
        if (s < 0) {
            throw InvalidConfig("seed must be non-negative");
        }
        cfg.seed_ = static_cast<std::uint64_t>(s);
        cfg.seed_given_ = true;
    }
    if (j.contains("stream")) {
        std::int64_t s = integer_at(j.at("stream"), "stream");
        if (s < 0) {
            throw InvalidConfig("stream must be non-negative");
        }
        cfg.stream_ = static_cast<std::uint64_t>(s);
    }
    if (j.contains("tolerance")) {
        cfg.tolerance_ = number_at(j.at("tolerance"), "tolerance");
        if (cfg.tolerance_ <= 0.0) {
            throw InvalidConfig("tolerance must be positive");
        }
    }
    if (j.contains("trials")) {
        cfg.trials_ = integer_at(j.at("trials"), "trials");
        if (cfg.trials_ < 1) {
            throw InvalidConfig("trials must be at least 1");
        }
    }

    if (j.contains("grid")) {
        const json& g = j.at("grid");
        require_keys(g, {"points", "min", "max"}, "grid");
        if (g.contains("points")) {
            std::int64_t p = integer_at(g.at("points"), "grid.points");
            if (p < 2) {
                throw InvalidConfig("grid.points must be at least 2");
            }
            cfg.grid_.points = static_cast<int>(p);
        }
        if (g.contains("min")) {
            cfg.grid_.min_angle = angle_at(g.at("min"), "grid.min", degrees);
            cfg.grid_.min_set = true;
        }
        if (g.contains("max")) {
            cfg.grid_.max_angle = angle_at(g.at("max"), "grid.max", degrees);
            cfg.grid_.max_set = true;
        }
        if (cfg.grid_.min_set && cfg.grid_.max_set &&
            cfg.grid_.max_angle <= cfg.grid_.min_angle) {
            throw InvalidConfig("grid.max must exceed grid.min");
        }
    }
    if (cfg.kind_ == ExperimentKind::isotropy_scan && !j.contains("grid")) {
        cfg.grid_.points = 91;
    }

    if (j.contains("system")) {
        const json& sys = j.at("system");
        if (!sys.is_object() || !sys.contains("type")) {
            throw InvalidConfig("system needs a \"type\"");
        }
        std::string type = string_at(sys.at("type"), "system.type");
        if (type == "arrow") {
            cfg.arrow_ = parse_arrow_system(sys, degrees);
        } else if (type == "explicit") {
            cfg.explicit_system_ = parse_explicit_system(sys);
        } else {
            throw InvalidConfig("system.type must be \"arrow\" or \"explicit\"");
        }
    }

    switch (cfg.kind_) {
        case ExperimentKind::probability_table:
        case ExperimentKind::interference:
            if (!cfg.arrow_) {
                throw InvalidConfig(to_string(cfg.kind_) +
                                    " requires an arrow system");
            }
            break;
        case ExperimentKind::sample:
            if (!cfg.arrow_) {
                throw InvalidConfig("sample requires an arrow system");
            }
            break;
        case ExperimentKind::collapse_report:
            if (!cfg.arrow_ && !cfg.explicit_system_) {
                throw InvalidConfig("collapse_report requires a system");
            }
            break;
        default:
            break;
    }

    if (j.contains("state")) {
        const json& st = j.at("state");
        require_keys(st, {"type", "variable", "outcome", "angle", "components"},
                     "state");
        std::string type = st.contains("type")
                               ? string_at(st.at("type"), "state.type")
                               : std::string("eigenstate");
        if (type == "eigenstate") {
            if (!st.contains("variable") || !st.contains("outcome")) {
                throw InvalidConfig(
                    "eigenstate state needs \"variable\" and \"outcome\"");
            }
            cfg.state_.type = StateSpec::Type::eigenstate;
            cfg.state_.variable = string_at(st.at("variable"), "state.variable");
            cfg.state_.outcome_label =
                string_at(st.at("outcome"), "state.outcome");
        } else if (type == "orientation") {
            if (!st.contains("angle")) {
                throw InvalidConfig("orientation state needs \"angle\"");
            }
            cfg.state_.type = StateSpec::Type::orientation;
            cfg.state_.angle = angle_at(st.at("angle"), "state.angle", degrees);
        } else if (type == "components") {
            if (!st.contains("components") || !st.at("components").is_object()) {
                throw InvalidConfig(
                    "components state needs a \"components\" object");
            }
            cfg.state_.type = StateSpec::Type::components;
            for (const auto& [id, vec] : st.at("components").items()) {
                cfg.state_.components[id] =
                    vector_at(vec, "state.components." + id);
            }
        } else {
            throw InvalidConfig("state.type must be eigenstate, orientation, "
                                "or components");
        }
    }

    if (j.contains("target")) {
        const json& t = j.at("target");
        require_keys(t, {"variable", "outcome"}, "target");
        if (!t.contains("variable") || !t.contains("outcome")) {
            throw InvalidConfig("target needs \"variable\" and \"outcome\"");
        }
        cfg.target_ = {string_at(t.at("variable"), "target.variable"),
                       string_at(t.at("outcome"), "target.outcome")};
    }
    if (j.contains("via")) {
        cfg.via_ = string_at(j.at("via"), "via");
    }
    if (j.contains("variable")) {
        cfg.sample_variable_ = string_at(j.at("variable"), "variable");
    }
    if (j.contains("orientation")) {
        cfg.orientation_ =
            angle_at(j.at("orientation"), "orientation", degrees);
        cfg.orientation_given_ = true;
    }

    if (j.contains("candidates")) {
        cfg.candidates_ = parse_candidates(j.at("candidates"), "candidates");
    }
    if (j.contains("f_pairs")) {
        const json& fp = j.at("f_pairs");
        if (!fp.is_array()) {
            throw InvalidConfig("f_pairs must be an array");
        }
        for (const auto& pair : fp) {
            require_keys(pair, {"plus", "minus"}, "f_pairs entry");
            if (!pair.contains("plus") || !pair.contains("minus")) {
                throw InvalidConfig("f_pairs entries need \"plus\" and "
                                    "\"minus\"");
            }
            cfg.f_pairs_.emplace_back(
                string_at(pair.at("plus"), "f_pairs plus"),
                string_at(pair.at("minus"), "f_pairs minus"));
        }
    }

    cfg.rebuild_canonical();
    return cfg;
}

void ExperimentConfig::override_seed(std::uint64_t seed) {
    seed_ = seed;
    seed_given_ = true;
    rebuild_canonical();
}

void ExperimentConfig::override_grid_points(int points) {
    if (points < 2) {
        throw InvalidConfig("grid.points must be at least 2");
    }
    grid_.points = points;
    rebuild_canonical();
}

void ExperimentConfig::rebuild_canonical() {
    json c;
    c["experiment"] = to_string(kind_);
    c["seed"] = seed_;
    c["stream"] = stream_;
    if (arrow_) {
        json dirs;
        for (const auto& [id, angle] : arrow_->directions()) {
            dirs[id] = angle;
        }
        json f;
        for (const auto& [id, angle] : arrow_->directions()) {
            const FPair& pair = arrow_->f(id);
            f[id] = {{"plus", pair.plus.name()}, {"minus", pair.minus.name()}};
        }
        c["system"] = {{"type", "arrow"},
                       {"symmetry_level", to_string(arrow_->level())},
                       {"directions", dirs},
                       {"f", f}};
    } else if (explicit_system_) {
        json vars = json::array();
        for (const auto& v : explicit_system_->variables()) {
            json evs = json::array();
            for (const auto& ev : v.eigenvalues) {
                evs.push_back(complex_to_json(ev));
            }
            vars.push_back({{"id", v.id},
                            {"outcome_labels", v.outcome_labels},
                            {"eigenvalues", evs}});
        }
        json embeds = json::array();
        for (const auto& a : explicit_system_->variables()) {
            for (const auto& b : explicit_system_->variables()) {
                if (a.id == b.id) continue;
                embeds.push_back(
                    {{"space", a.id},
                     {"of", b.id},
                     {"matrix", matrix_to_json(
                                    explicit_system_->embedding(a.id, b.id)
                                        .matrix())}});
            }
        }
        c["system"] = {
            {"type", "explicit"}, {"variables", vars}, {"embeddings", embeds}};
    }
    switch (kind_) {
        case ExperimentKind::probability_table:
        case ExperimentKind::interference:
        case ExperimentKind::spin_half:
        case ExperimentKind::defect_scan: {
            double max_angle = grid_.max_set ? grid_.max_angle : kPi;
            double min_angle = grid_.min_set ? grid_.min_angle : 0.0;
            c["grid"] = {{"points", grid_.points},
                         {"min", min_angle},
                         {"max", max_angle}};
            break;
        }
        case ExperimentKind::isotropy_scan:
            c["grid"] = {{"points", grid_.points}};
            c["tolerance"] = tolerance_;
            break;
        case ExperimentKind::collapse_report:
            c["tolerance"] = tolerance_;
            break;
        case ExperimentKind::sample:
            c["trials"] = trials_;
            c["orientation"] = orientation_;
            if (sample_variable_) {
                c["variable"] = *sample_variable_;
            }
            break;
    }
    if (kind_ == ExperimentKind::interference) {
        json st;
        switch (state_.type) {
            case StateSpec::Type::system_default:
                st = {{"type", "eigenstate"}, {"default", true}};
                break;
            case StateSpec::Type::eigenstate:
                st = {{"type", "eigenstate"},
                      {"variable", state_.variable},
                      {"outcome", state_.outcome_label}};
                break;
            case StateSpec::Type::orientation:
                st = {{"type", "orientation"}, {"angle", state_.angle}};
                break;
            case StateSpec::Type::components: {
                json comps;
                for (const auto& [id, vec] : state_.components) {
                    json arr = json::array();
                    for (Eigen::Index i = 0; i < vec.size(); ++i) {
                        arr.push_back(complex_to_json(vec(i)));
                    }
                    comps[id] = std::move(arr);
                }
                st = {{"type", "components"}, {"components", comps}};
                break;
            }
        }
        c["state"] = st;
        if (target_) {
            c["target"] = {{"variable", target_->first},
                           {"outcome", target_->second}};
        }
        if (via_) {
            c["via"] = *via_;
        }
    }
    if (kind_ == ExperimentKind::defect_scan ||
        kind_ == ExperimentKind::isotropy_scan) {
        json names = json::array();
        if (candidates_.empty()) {
            for (const auto& f : builtin_probability_functions()) {
                names.push_back(f.name());
            }
        } else {
            for (const auto& f : candidates_) {
                names.push_back(f.name());
            }
        }
        c["candidates"] = names;
        if (kind_ == ExperimentKind::defect_scan && !f_pairs_.empty()) {
            json pairs = json::array();
            for (const auto& [plus, minus] : f_pairs_) {
                pairs.push_back({{"plus", plus}, {"minus", minus}});
            }
            c["f_pairs"] = pairs;
        }
    }
    canonical_ = std::move(c);
}

// ---------------------------------------------------------------------------
// Execution

struct Runner {
    const ExperimentConfig& cfg;

    using StateSpec = ExperimentConfig::StateSpec;

    double grid_theta(int k, double min_angle, double max_angle) const {
        return min_angle + (max_angle - min_angle) * static_cast<double>(k) /
                               static_cast<double>(cfg.grid_.points - 1);
    }

    Eigen::Index outcome_index(const GivSystem& sys, const std::string& var,
                               const std::string& label) const {
        const auto& spec = sys.variable(var);
        for (std::size_t i = 0; i < spec.outcome_labels.size(); ++i) {
            if (spec.outcome_labels[i] == label) {
                return static_cast<Eigen::Index>(i);
            }
        }
        throw InvalidConfig("variable " + var + " has no outcome \"" + label +
                            "\"");
    }

    json base_meta() const {
        json meta;
        meta["experiment"] = to_string(cfg.kind_);
        meta["version"] = kToolVersion;
        meta["seed"] = cfg.seed_;
        meta["stream"] = cfg.stream_;
        meta["rng"] = Pcg32::kName;
        meta["config"] = cfg.canonical();
        meta["config_hash"] = config_hash_hex(cfg.canonical());
        return meta;
    }

    RunResult probability_table() const {
        ArrowSystem sys = build_arrow_system(*cfg.arrow_);
        Report report;
        report.columns = {"orientation_rad"};
        for (const auto& v : sys.giv().variables()) {
            for (const auto& label : v.outcome_labels) {
                report.columns.push_back("p_" + v.id + "_" + label);
            }
        }
        double lo = cfg.grid_.min_set ? cfg.grid_.min_angle : 0.0;
        double hi = cfg.grid_.max_set ? cfg.grid_.max_angle : kPi;
        for (int k = 0; k < cfg.grid_.points; ++k) {
            double theta = grid_theta(k, lo, hi);
            GivState state = prepare(sys, theta);
            std::vector<ReportValue> row;
            row.emplace_back(theta);
            for (const auto& v : sys.giv().variables()) {
                for (Eigen::Index i = 0; i < v.dim(); ++i) {
                    row.emplace_back(restricted_born(state, v.id, i));
                }
            }
            report.rows.push_back(std::move(row));
        }
        report.meta = base_meta();
        return {0, std::move(report)};
    }

    RunResult defect_scan() const {
        std::vector<std::pair<std::string, FPair>> series;
        auto candidates = cfg.candidates_;
        if (candidates.empty() && cfg.f_pairs_.empty()) {
            candidates = builtin_probability_functions();
        }
        for (const auto& f : candidates) {
            series.emplace_back(f.name(), FPair{f, f});
        }
        for (const auto& [plus, minus] : cfg.f_pairs_) {
            series.emplace_back(plus + "|" + minus,
                                FPair{ProbabilityFunction::from_name(plus),
                                      ProbabilityFunction::from_name(minus)});
        }
        Report report;
        report.columns = {"series", "theta_rad", "orthogonality_defect",
                          "unitarity_defect", "closure_residual"};
        double lo = cfg.grid_.min_set ? cfg.grid_.min_angle : 0.0;
        double hi = cfg.grid_.max_set ? cfg.grid_.max_angle : kPi;
        if (lo < 0.0 || hi > kPi) {
            throw InvalidConfig("defect_scan grid must stay inside [0, pi]");
        }
        for (const auto& [label, pair] : series) {
            for (int k = 0; k < cfg.grid_.points; ++k) {
                double theta = grid_theta(k, lo, hi);
                double ortho =
                    orthogonality_defect(pair.plus, pair.minus, theta, theta);
                double unit =
                    is_unitary(
                        embed_pair(pair.plus, pair.minus, theta, theta).matrix(),
                        kDefaultTol)
                        .defect;
                double closure =
                    std::abs(pair.plus(theta) + pair.minus(kPi - theta) - 1.0);
                report.rows.push_back({ReportValue(label), ReportValue(theta),
                                       ReportValue(ortho), ReportValue(unit),
                                       ReportValue(closure)});
            }
        }
        report.meta = base_meta();
        return {0, std::move(report)};
    }

    RunResult interference() const {
        const auto& dirs = cfg.arrow_->directions();
        if (dirs.size() != 2) {
            throw InvalidConfig(
                "interference needs an arrow system with exactly two "
                "variables");
        }
        std::string target_var = dirs.begin()->first;
        std::string via_var = std::next(dirs.begin())->first;
        if (cfg.via_) {
            if (!dirs.count(*cfg.via_)) {
                throw InvalidConfig("via variable " + *cfg.via_ +
                                    " is not in the system");
            }
            via_var = *cfg.via_;
            target_var = (via_var == dirs.begin()->first)
                             ? std::next(dirs.begin())->first
                             : dirs.begin()->first;
        }
        if (cfg.target_) {
            if (!dirs.count(cfg.target_->first)) {
                throw InvalidConfig("target variable " + cfg.target_->first +
                                    " is not in the system");
            }
            target_var = cfg.target_->first;
            if (target_var == via_var) {
                throw SameVariable("target and via must differ");
            }
        }

        double base_dir = dirs.at(target_var);
        Report report;
        report.columns = {"theta_rad", "p_direct", "p_indirect", "deviation"};
        double lo = cfg.grid_.min_set ? cfg.grid_.min_angle : 0.0;
        double hi = cfg.grid_.max_set ? cfg.grid_.max_angle : kPi;
        double max_abs_dev = 0.0;
        for (int k = 0; k < cfg.grid_.points; ++k) {
            double theta = grid_theta(k, lo, hi);
            // Separations on a shared axis have no pair geometry; skip them.
            double wrapped = std::abs(wrap_angle(0.0, theta));
            if (std::min(wrapped, kPi - wrapped) < kDegenerate) continue;

            std::map<std::string, double> swept = dirs;
            swept[via_var] = base_dir + theta;
            std::map<std::string, FPair> f;
            for (const auto& [id, angle] : swept) {
                f.emplace(id, cfg.arrow_->f(id));
            }
            ArrowSystem sys = build_arrow_system(
                ArrowConfig(std::move(swept), std::move(f),
                            cfg.arrow_->level()));

            GivState state = resolve_state(sys);
            Eigen::Index i = cfg.target_
                                 ? outcome_index(sys.giv(), target_var,
                                                 cfg.target_->second)
                                 : 1;
            double p_dir = direct_probability(state, target_var, i);
            double p_ind = indirect_probability(state, via_var, target_var, i);
            double dev = p_dir - p_ind;
            max_abs_dev = std::max(max_abs_dev, std::abs(dev));
            report.rows.push_back({ReportValue(theta), ReportValue(p_dir),
                                   ReportValue(p_ind), ReportValue(dev)});
        }
        report.meta = base_meta();
        report.meta["target_variable"] = target_var;
        report.meta["via_variable"] = via_var;
        report.meta["max_abs_deviation"] = max_abs_dev;
        return {0, std::move(report)};
    }

    GivState resolve_state(const ArrowSystem& sys) const {
        switch (cfg.state_.type) {
            case StateSpec::Type::system_default:
                return GivState::eigenstate(
                    sys.giv(), sys.giv().variables().front().id, 0);
            case StateSpec::Type::eigenstate:
                return GivState::eigenstate(
                    sys.giv(), cfg.state_.variable,
                    outcome_index(sys.giv(), cfg.state_.variable,
                                  cfg.state_.outcome_label));
            case StateSpec::Type::orientation:
                return prepare(sys, cfg.state_.angle);
            case StateSpec::Type::components:
                return GivState::general(sys.giv(), cfg.state_.components);
        }
        throw Error("unreachable state type");
    }

    RunResult collapse_report() const {
        GivSystem sys = cfg.arrow_ ? build_arrow_system(*cfg.arrow_).giv()
                                   : *cfg.explicit_system_;
        Report report;
        report.columns = {"from_variable", "to_variable", "unitarity_defect",
                          "inverse_defect"};
        std::vector<std::string> ids;
        for (const auto& v : sys.variables()) ids.push_back(v.id);
        std::sort(ids.begin(), ids.end());
        for (const auto& a : ids) {
            for (const auto& b : ids) {
                if (a == b) continue;
                double defect = is_unitary(
                                    build_S_from_parallel_axes(sys, a, b)
                                        .matrix(),
                                    kDefaultTol)
                                    .defect;
                report.rows.push_back(
                    {ReportValue(a), ReportValue(b), ReportValue(defect),
                     ReportValue(sys.pair_inverse_defect(a, b))});
            }
        }
        report.meta = base_meta();
        report.meta["tolerance"] = cfg.tolerance_;
        int exit_code = 0;
        try {
            MergedModel merged = collapse(sys, cfg.tolerance_);
            report.meta["status"] = "collapsed";
            report.meta["reference"] = merged.reference;
            report.meta["max_unitarity_defect"] = merged.max_unitarity_defect;
            report.meta["max_transition_defect"] = merged.max_transition_defect;
            report.meta["max_born_defect"] = merged.max_born_defect;
        } catch (const NonUnitaryTransition& e) {
            report.meta["status"] = "non_unitary_transition";
            report.meta["worst_pair"] = json::array({e.from(), e.to()});
            report.meta["worst_defect"] = e.defect();
            exit_code = 3;
        } catch (const InconsistentTransitions& e) {
            report.meta["status"] = "inconsistent_transitions";
            report.meta["worst_triple"] = json::array({e.a(), e.b(), e.c()});
            report.meta["worst_defect"] = e.defect();
            exit_code = 3;
        }
        return {exit_code, std::move(report)};
    }

    RunResult sample() const {
        if (!cfg.sample_variable_) {
            throw InvalidConfig("sample needs a \"variable\"");
        }
        ArrowSystem sys = build_arrow_system(*cfg.arrow_);
        FrequencyTable table =
            sample_frequencies(sys, cfg.orientation_, *cfg.sample_variable_,
                               cfg.trials_, cfg.seed_, cfg.stream_);
        Report report;
        report.columns = {"outcome", "count", "frequency", "std_error",
                          "probability"};
        for (const auto& row : table.rows) {
            report.rows.push_back({ReportValue(row.label),
                                   ReportValue(row.count),
                                   ReportValue(row.frequency),
                                   ReportValue(row.std_error),
                                   ReportValue(row.probability)});
        }
        report.meta = base_meta();
        report.meta["variable"] = table.variable;
        report.meta["orientation_rad"] = table.orientation;
        report.meta["trials"] = table.trials;
        return {0, std::move(report)};
    }

    RunResult spin_half() const {
        SpinHalfReport bundle = spin_half_bundle(cfg.grid_.points);

        // Probabilities from an actual two-direction model, compared against
        // the closed-form spin reference.
        std::map<std::string, double> dirs = {{"A", 0.0}, {"B", kPi / 2.0}};
        ArrowSystem sys = build_arrow_system(ArrowConfig::isotropic(
            dirs, ProbabilityFunction::cosine_squared()));

        Report report;
        report.columns = {"theta_rad", "arrow_probability",
                          "reference_probability", "abs_difference"};
        double lo = cfg.grid_.min_set ? cfg.grid_.min_angle : 0.0;
        double hi = cfg.grid_.max_set ? cfg.grid_.max_angle : kPi;
        if (lo < 0.0 || hi > kPi) {
            throw InvalidConfig("spin_half grid must stay inside [0, pi]");
        }
        double max_diff = 0.0;
        for (int k = 0; k < cfg.grid_.points; ++k) {
            double theta = grid_theta(k, lo, hi);
            GivState state = prepare(sys, theta);
            double p_arrow = restricted_born(state, "A", 0);
            double p_ref = spin_half_reference(theta);
            double diff = std::abs(p_arrow - p_ref);
            max_diff = std::max(max_diff, diff);
            report.rows.push_back({ReportValue(theta), ReportValue(p_arrow),
                                   ReportValue(p_ref), ReportValue(diff)});
        }
        report.meta = base_meta();
        report.meta["commutator_residual"] = bundle.commutator_residual;
        report.meta["common_eigenbasis"] = bundle.common_eigenbasis;
        report.meta["x_basis_invariant_under_x"] =
            bundle.x_basis_invariant_under_x;
        report.meta["max_rotation_mismatch"] = bundle.max_rotation_mismatch;
        report.meta["max_reference_mismatch"] = max_diff;
        return {0, std::move(report)};
    }

    RunResult isotropy() const {
        auto candidates = cfg.candidates_.empty()
                              ? builtin_probability_functions()
                              : cfg.candidates_;
        IsotropyReport scan =
            isotropy_scan(candidates, cfg.grid_.points, cfg.tolerance_);
        Report report;
        report.columns = {"f_name", "max_composition_defect",
                          "max_closure_defect", "passes"};
        json passing = json::array();
        for (const auto& row : scan.rows) {
            if (row.passes) passing.push_back(row.name);
            report.rows.push_back(
                {ReportValue(row.name), ReportValue(row.max_composition_defect),
                 ReportValue(row.max_closure_defect),
                 ReportValue(static_cast<std::int64_t>(row.passes ? 1 : 0))});
        }
        report.meta = base_meta();
        report.meta["grid_points"] = scan.grid_points;
        report.meta["tolerance"] = scan.tol;
        report.meta["passing"] = passing;
        return {0, std::move(report)};
    }
};

RunResult run(const ExperimentConfig& config) {
    Runner runner{config};
    switch (config.kind()) {
        case ExperimentKind::probability_table: return runner.probability_table();
        case ExperimentKind::defect_scan: return runner.defect_scan();
        case ExperimentKind::interference: return runner.interference();
        case ExperimentKind::collapse_report: return runner.collapse_report();
        case ExperimentKind::sample: return runner.sample();
        case ExperimentKind::spin_half: return runner.spin_half();
        case ExperimentKind::isotropy_scan: return runner.isotropy();
    }
    throw Error("unreachable experiment kind");
}

// ---------------------------------------------------------------------------
// Serialization

std::string format_double(double v) {
    if (!std::isfinite(v)) {
        throw NotFinite("report cells must be finite");
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::string cell_to_string(const ReportValue& v) {
    if (std::holds_alternative<double>(v)) {
        return format_double(std::get<double>(v));
    }
    if (std::holds_alternative<std::int64_t>(v)) {
        return std::to_string(std::get<std::int64_t>(v));
    }
    return std::get<std::string>(v);
}

json cell_to_json(const ReportValue& v) {
    if (std::holds_alternative<double>(v)) {
        double d = std::get<double>(v);
        if (!std::isfinite(d)) {
            throw NotFinite("report cells must be finite");
        }
        return d;
    }
    if (std::holds_alternative<std::int64_t>(v)) {
        return std::get<std::int64_t>(v);
    }
    return std::get<std::string>(v);
}

}  // namespace

std::string report_to_csv(const Report& report) {
    std::string out;
    for (std::size_t c = 0; c < report.columns.size(); ++c) {
        if (c) out += ',';
        out += report.columns[c];
    }
    out += '\n';
    for (const auto& row : report.rows) {
        if (row.size() != report.columns.size()) {
            throw Error("report row width does not match its header");
        }
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out += ',';
            out += cell_to_string(row[c]);
        }
        out += '\n';
    }
    return out;
}

std::string report_to_json(const Report& report) {
    json doc;
    doc["meta"] = report.meta;
    doc["meta"]["columns"] = report.columns;
    json rows = json::array();
    for (const auto& row : report.rows) {
        if (row.size() != report.columns.size()) {
            throw Error("report row width does not match its header");
        }
        json obj;
        for (std::size_t c = 0; c < row.size(); ++c) {
            obj[report.columns[c]] = cell_to_json(row[c]);
        }
        rows.push_back(std::move(obj));
    }
    doc["rows"] = std::move(rows);
    return doc.dump(2) + "\n";
}

namespace {

void plot_row(std::string& out, const std::string& series,
              const ReportValue& x, const ReportValue& y) {
    out += series;
    out += ',';
    out += cell_to_string(x);
    out += ',';
    out += cell_to_string(y);
    out += '\n';
}

}  // namespace

std::string emit_plot_data(const Report& report) {
    std::string out = "series,x,y\n";
    if (report.rows.empty()) {
        return out;
    }
    std::string experiment =
        report.meta.contains("experiment")
            ? report.meta.at("experiment").get<std::string>()
            : std::string();
    if (experiment == "defect_scan") {
        for (const auto& row : report.rows) {
            plot_row(out, std::get<std::string>(row[0]), row[1], row[2]);
        }
    } else if (experiment == "sample") {
        for (std::size_t r = 0; r < report.rows.size(); ++r) {
            plot_row(out, std::get<std::string>(report.rows[r][0]),
                     ReportValue(static_cast<std::int64_t>(r)),
                     report.rows[r][2]);
        }
    } else if (experiment == "collapse_report") {
        for (std::size_t r = 0; r < report.rows.size(); ++r) {
            plot_row(out, "unitarity_defect",
                     ReportValue(static_cast<std::int64_t>(r)),
                     report.rows[r][2]);
        }
    } else if (experiment == "isotropy_scan") {
        for (const auto& row : report.rows) {
            plot_row(out, std::get<std::string>(row[0]),
                     ReportValue(static_cast<std::int64_t>(0)), row[1]);
            plot_row(out, std::get<std::string>(row[0]),
                     ReportValue(static_cast<std::int64_t>(1)), row[2]);
        }
    } else {
        // Grid experiments: first column is x, every later numeric column is
        // one series named by its header.
        for (std::size_t c = 1; c < report.columns.size(); ++c) {
            for (const auto& row : report.rows) {
                if (!std::holds_alternative<std::string>(row[c])) {
                    plot_row(out, report.columns[c], row[0], row[c]);
                }
            }
        }
    }
    return out;
}

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t hash = 14695981039346656037ULL;
    for (unsigned char byte : data) {
        hash ^= byte;
        hash *= 1099511628211ULL;
    }
    return hash;
}

std::string config_hash_hex(const nlohmann::json& canonical) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(canonical.dump())));
    return buf;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoFailure("cannot open " + path + " for reading");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) {
        throw IoFailure("failed while reading " + path);
    }
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoFailure("cannot open " + path + " for writing");
    }
    out << content;
    out.flush();
    if (!out) {
        throw IoFailure("failed while writing " + path);
    }
}

}  // namespace giv
