#ifndef GIV_EXPERIMENT_HPP
#define GIV_EXPERIMENT_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "giv/arrow.hpp"
#include "giv/engine.hpp"

namespace giv {

#ifndef GIVLAB_VERSION
#define GIVLAB_VERSION "0.0.0"
#endif
inline constexpr const char* kToolVersion = GIVLAB_VERSION;

enum class ExperimentKind {
    probability_table,
    defect_scan,
    interference,
    collapse_report,
    sample,
    spin_half,
    isotropy_scan,
};

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_name(const std::string& name);

/// Angle grid for sweep experiments, in radians.
struct GridSpec {
    int points = 181;
    double min_angle = 0.0;
    double max_angle = 0.0;  // defaulted per experiment when unset

    bool max_set = false;
    bool min_set = false;
};

/// Parsed and validated experiment description. All angles are radians by
/// the time parsing finishes; unknown keys anywhere in the input are
/// rejected.
class ExperimentConfig {
public:
    /// Parses a config object. `degrees` converts user-supplied angle fields
    /// (directions, orientation, grid bounds, state angles) from degrees.
    /// `kind_override` is the subcommand's experiment, which a config file
    /// may omit or must match.
    static ExperimentConfig from_json(
        const nlohmann::json& j, bool degrees = false,
        std::optional<ExperimentKind> kind_override = std::nullopt);

    static ExperimentConfig from_file(
        const std::string& path, bool degrees = false,
        std::optional<ExperimentKind> kind_override = std::nullopt);

    /// Defaults-only config for experiments that need no file.
    static ExperimentConfig defaults(ExperimentKind kind);

    ExperimentKind kind() const noexcept { return kind_; }

    void override_seed(std::uint64_t seed);
    void override_grid_points(int points);

    /// Canonical form: defaults filled in, angles in radians, keys sorted.
    /// This is what reports echo and what the config hash covers.
    const nlohmann::json& canonical() const noexcept { return canonical_; }

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }
    bool seed_given() const noexcept { return seed_given_; }

private:
    friend struct Runner;
    ExperimentConfig() = default;
    void rebuild_canonical();

    ExperimentKind kind_ = ExperimentKind::spin_half;
    nlohmann::json canonical_;

    // System description (absent for spin_half / isotropy_scan / defect_scan).
    std::optional<ArrowConfig> arrow_;
    std::optional<GivSystem> explicit_system_;

    GridSpec grid_;
    std::int64_t trials_ = 100000;
    std::uint64_t seed_ = 0;
    std::uint64_t stream_ = 0;
    bool seed_given_ = false;
    double tolerance_ = 1e-9;

    // State/target/via selections, already resolved to indices where
    // applicable at run time (labels validated during parse against the
    // system when one exists).
    struct StateSpec {
        enum class Type { system_default, eigenstate, orientation, components };
        Type type = Type::system_default;
        std::string variable;
        std::string outcome_label;
        double angle = 0.0;
        std::map<std::string, Vec> components;
    };
    StateSpec state_;
    std::optional<std::pair<std::string, std::string>> target_;  // variable, label
    std::optional<std::string> via_;
    std::optional<std::string> sample_variable_;
    double orientation_ = 0.0;
    bool orientation_given_ = false;

    std::vector<ProbabilityFunction> candidates_;
    std::vector<std::pair<std::string, std::string>> f_pairs_;
};

using ReportValue = std::variant<double, std::int64_t, std::string>;

/// Tabular experiment output plus deterministic metadata. The meta object
/// never contains timestamps; wall-clock data goes to a separate sidecar so
/// identical runs produce byte-identical report bodies.
struct Report {
    std::vector<std::string> columns;
    std::vector<std::vector<ReportValue>> rows;
    nlohmann::json meta;
};

struct RunResult {
    int exit_code = 0;
    Report report;
};

/// Executes the experiment. Validation problems throw; a collapse run whose
/// finding is a non-unitary or inconsistent transition still produces its
/// report and returns exit code 3.
RunResult run(const ExperimentConfig& config);

/// Report serialization. 17 significant digits for doubles.
std::string format_double(double v);
std::string report_to_csv(const Report& report);
std::string report_to_json(const Report& report);

/// Long-format plot data: header "series,x,y", one row per plotted point.
std::string emit_plot_data(const Report& report);

/// FNV-1a 64-bit hash, reported as 16 hex digits.
std::uint64_t fnv1a64(std::string_view data);
std::string config_hash_hex(const nlohmann::json& canonical);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace giv

#endif
