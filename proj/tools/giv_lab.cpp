#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "giv/experiment.hpp"

namespace {

struct CliOptions {
    std::string config_path;
    std::string out_path;
    std::string plot_path;
    std::string format = "csv";
    std::optional<std::uint64_t> seed;
    std::optional<int> grid_points;
    bool degrees = false;
};

// Built-in model used when a system-requiring subcommand runs without
// --config: two direction variables a quarter turn apart.
nlohmann::json default_config(giv::ExperimentKind kind) {
    nlohmann::json j;
    j["experiment"] = giv::to_string(kind);
    switch (kind) {
        case giv::ExperimentKind::probability_table:
        case giv::ExperimentKind::interference:
        case giv::ExperimentKind::collapse_report:
        case giv::ExperimentKind::sample:
            j["system"] = {
                {"type", "arrow"},
                {"symmetry_level", "isotropic"},
                {"directions",
                 {{"A", 0.0}, {"B", std::numbers::pi / 2.0}}},
                {"f", "cosine_squared"}};
            break;
        default:
            break;
    }
    if (kind == giv::ExperimentKind::sample) {
        j["variable"] = "A";
    }
    return j;
}

std::string iso8601_now() {
    using clock = std::chrono::system_clock;
    std::time_t t = clock::to_time_t(clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

int run_subcommand(giv::ExperimentKind kind, const CliOptions& opt) {
    giv::ExperimentConfig config =
        opt.config_path.empty()
            ? giv::ExperimentConfig::from_json(default_config(kind),
                                               opt.degrees, kind)
            : giv::ExperimentConfig::from_file(opt.config_path, opt.degrees,
                                               kind);

    if (opt.seed) {
        config.override_seed(*opt.seed);
    } else if (!config.seed_given()) {
        if (const char* env = std::getenv("GIV_LAB_SEED")) {
            char* end = nullptr;
            unsigned long long v = std::strtoull(env, &end, 10);
            if (end == env || *end != '\0') {
                throw giv::InvalidConfig(
                    "GIV_LAB_SEED must be a non-negative integer");
            }
            config.override_seed(static_cast<std::uint64_t>(v));
        }
    }
    if (opt.grid_points) {
        config.override_grid_points(*opt.grid_points);
    }
    if (opt.format != "csv" && opt.format != "json") {
        throw giv::InvalidConfig("--format must be csv or json");
    }

    giv::RunResult result = giv::run(config);

    std::string body = opt.format == "csv"
                           ? giv::report_to_csv(result.report)
                           : giv::report_to_json(result.report);

    if (opt.out_path.empty()) {
        std::cout << body;
    } else {
        giv::write_text_file(opt.out_path, body);
        nlohmann::json run_info = {
            {"timestamp", iso8601_now()},
            {"experiment", giv::to_string(config.kind())},
            {"out", opt.out_path},
            {"format", opt.format},
            {"seed", config.seed()},
            {"config_hash", giv::config_hash_hex(config.canonical())},
            {"version", giv::kToolVersion}};
        giv::write_text_file(opt.out_path + ".run.json",
                             run_info.dump(2) + "\n");
        if (opt.format == "csv") {
            nlohmann::json meta = result.report.meta;
            meta["columns"] = result.report.columns;
            giv::write_text_file(opt.out_path + ".meta.json",
                                 meta.dump(2) + "\n");
        }
    }
    if (!opt.plot_path.empty()) {
        giv::write_text_file(opt.plot_path,
                             giv::emit_plot_data(result.report));
    }
    return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Laboratory for multi-space probabilistic models"};
    app.set_version_flag("--version",
                         std::string("giv-lab ") + giv::kToolVersion);
    app.require_subcommand(1);

    CliOptions opt;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config_path,
                        "JSON config file (defaults used when omitted)");
        sub->add_option("--out", opt.out_path,
                        "Report file (stdout when omitted)");
        sub->add_option("--format", opt.format, "Report format: csv or json")
            ->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--seed", opt.seed,
                        "RNG seed (overrides config and GIV_LAB_SEED)");
        sub->add_option("--grid", opt.grid_points, "Grid point count")
            ->check(CLI::Range(2, 1000000));
        sub->add_flag("--degrees", opt.degrees,
                      "Interpret command-line and config angles as degrees");
        sub->add_option("--plot", opt.plot_path,
                        "Also write series,x,y plot data to this file");
    };

    struct SubSpec {
        const char* name;
        const char* help;
        giv::ExperimentKind kind;
    };
    const SubSpec subs[] = {
        {"arrow", "Tabulate outcome probabilities against orientation",
         giv::ExperimentKind::probability_table},
        {"defect", "Scan pair embeddings for unitarity and closure defects",
         giv::ExperimentKind::defect_scan},
        {"interference", "Compare direct and two-step outcome probabilities",
         giv::ExperimentKind::interference},
        {"collapse", "Try to merge all variables into one reference space",
         giv::ExperimentKind::collapse_report},
        {"sample", "Draw outcome samples and report frequencies",
         giv::ExperimentKind::sample},
        {"spin-half", "Check the two-outcome model against spin formulas",
         giv::ExperimentKind::spin_half},
        {"isotropy", "Test candidate profiles for rotational consistency",
         giv::ExperimentKind::isotropy_scan},
    };

    for (const auto& spec : subs) {
        CLI::App* sub = app.add_subcommand(spec.name, spec.help);
        add_common(sub);
        sub->callback([&opt, kind = spec.kind]() {
            int code = run_subcommand(kind, opt);
            if (code != 0) {
                std::exit(code);
            }
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const giv::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
