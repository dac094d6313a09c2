#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nullfold/csvio.hpp"
#include "nullfold/suite.hpp"
#include "nullfold/version.hpp"

namespace {

using namespace nullfold;

Vec parse_point(const std::string& text) {
    std::vector<double> entries;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t comma = text.find(',', start);
        std::string token = text.substr(
            start, comma == std::string::npos ? std::string::npos : comma - start);
        const char* begin = token.c_str();
        char* end = nullptr;
        double value = std::strtod(begin, &end);
        if (end == begin || *end != '\0') {
            throw ConfigError("cannot parse point entry '" + token + "'", 0, "at");
        }
        entries.push_back(value);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    Vec point(static_cast<int>(entries.size()));
    for (std::size_t i = 0; i < entries.size(); ++i) {
        point(static_cast<int>(i)) = entries[i];
    }
    return point;
}

void print_checks(const DiagnosticsReport& report) {
    for (const CheckRecord& check : report.checks) {
        const char* tag = check.status == "pass"      ? "[PASS]"
                          : check.status == "skipped" ? "[SKIP]"
                                                      : "[FAIL]";
        std::printf("%s %s%s%s%s\n", tag, check.id.c_str(),
                    check.note.empty() ? "" : " (", check.note.c_str(),
                    check.note.empty() ? "" : ")");
    }
    std::printf("summary: %d passed, %d failed, %d skipped\n", report.passed(),
                report.failed(), report.skipped());
}

int cmd_list() {
    for (const ExampleSystem& example : builtin_examples()) {
        const ExampleFacts& facts = example.facts;
        std::string available;
        auto note = [&](bool have, const char* name) {
            if (!have) return;
            if (!available.empty()) available += ",";
            available += name;
        };
        note(!std::isnan(facts.c_expected), "decay-constant");
        note(!facts.transversal_eigenvalues.empty(), "spectrum");
        note(facts.h3_holds, "contraction-rate");
        note(facts.limit_expected.size() > 0, "reduced-limit");
        note(!std::isnan(facts.attractor_dim_expected), "attractor-dimension");
        note(bool(example.sigma_distance), "sigma-distance");
        std::printf("%-18s m=%d k=%d leaves=%s facts=%s\n", example.name.c_str(),
                    facts.manifold_dim, facts.corank,
                    facts.leaves_compact ? "compact" : "noncompact",
                    available.empty() ? "-" : available.c_str());
    }
    return 0;
}

int cmd_run(const std::string& config_path, const std::string& out_override,
            bool has_seed, std::uint64_t seed) {
    ExperimentConfig config = load_config(config_path);
    if (!out_override.empty()) config.out_dir = out_override;
    if (has_seed) config.seed = seed;
    RunResult result = run_experiment(config);
    print_checks(result.report);
    std::printf("wrote %s/report.json (config hash %s)\n", result.out_dir.c_str(),
                result.report.config_hash.c_str());
    return result.report.all_passed() ? 0 : 1;
}

int cmd_check(const std::string& name, double tol_scale) {
    DiagnosticsReport report = check_suite(name, tol_scale);
    print_checks(report);
    return report.all_passed() ? 0 : 1;
}

int cmd_spectrum(const std::string& name, const std::string& at_text, double eta) {
    const ExampleSystem& example = find_example(name);
    Vec point = at_text.empty() ? example.facts.spectral_point : parse_point(at_text);
    if (point.size() != example.manifold.state_dim()) {
        throw ConfigError("point has " + std::to_string(point.size()) +
                              " entries, example state has " +
                              std::to_string(example.manifold.state_dim()),
                          0, "at");
    }
    const double eta_used = std::isnan(eta) ? example.facts.eta_default : eta;
    SpectralReport report =
        spectral_report(example.field, example.manifold, point, eta_used);
    std::printf("example: %s\n", example.name.c_str());
    std::printf("point:  %s\n", [&] {
        std::string s;
        for (int j = 0; j < point.size(); ++j) {
            s += (j ? ", " : "") + format_double(point(j));
        }
        return s;
    }().c_str());
    std::printf("transversal eigenvalues:\n");
    for (const auto& z : report.gap.eigenvalues) {
        std::printf("  %s %s%si\n", format_double(z.real()).c_str(),
                    z.imag() < 0 ? "" : "+", format_double(z.imag()).c_str());
    }
    std::printf("spectral abscissa: %s\n",
                format_double(report.gap.spectral_abscissa).c_str());
    std::printf("center band: %s (center-free: %s)\n",
                format_double(report.gap.center_tolerance).c_str(),
                report.gap.center_free ? "yes" : "no");
    std::printf("gap at eta=%s: %s (margin %s)\n", format_double(eta_used).c_str(),
                report.gap.gap_holds ? "holds" : "fails",
                format_double(report.eta_margin).c_str());
    return report.gap.gap_holds ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nullfold: numerical laboratory for dissipative flows on degenerate "
                 "constraint manifolds"};
    app.set_version_flag("--version", std::string(nullfold::kVersion));
    app.require_subcommand(1);

    CLI::App* list_cmd = app.add_subcommand("list", "List built-in examples");

    std::string config_path, out_override;
    std::uint64_t seed = 0;
    CLI::App* run_cmd = app.add_subcommand("run", "Run a configured experiment");
    run_cmd->add_option("--config", config_path, "Path to the TOML config file")
        ->required();
    run_cmd->add_option("--out", out_override,
                        "Output directory (overrides config and NULLFOLD_OUT)");
    CLI::Option* seed_opt =
        run_cmd->add_option("--seed", seed, "Override the ensemble seed");

    std::string check_name;
    double tol_scale = 1.0;
    CLI::App* check_cmd =
        app.add_subcommand("check", "Run the full check battery on an example");
    check_cmd->add_option("example", check_name, "Example name")->required();
    check_cmd->add_option("--tol-scale", tol_scale, "Scale all default tolerances");

    std::string spectrum_name, at_text;
    double eta = std::numeric_limits<double>::quiet_NaN();
    CLI::App* spectrum_cmd =
        app.add_subcommand("spectrum", "Transversal spectrum at a state point");
    spectrum_cmd->add_option("example", spectrum_name, "Example name")->required();
    spectrum_cmd->add_option("--at", at_text,
                             "Comma-separated state coordinates "
                             "(default: the example's reference point)");
    spectrum_cmd->add_option("--eta", eta, "Gap threshold (default: example's)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (list_cmd->parsed()) return cmd_list();
        if (run_cmd->parsed()) {
            return cmd_run(config_path, out_override, seed_opt->count() > 0, seed);
        }
        if (check_cmd->parsed()) return cmd_check(check_name, tol_scale);
        if (spectrum_cmd->parsed()) return cmd_spectrum(spectrum_name, at_text, eta);
    } catch (const nullfold::ConfigError& e) {
        if (e.line > 0) {
            std::fprintf(stderr, "config error (line %d, field '%s'): %s\n", e.line,
                         e.field.c_str(), e.what());
        } else if (!e.field.empty()) {
            std::fprintf(stderr, "config error (field '%s'): %s\n", e.field.c_str(),
                         e.what());
        } else {
            std::fprintf(stderr, "config error: %s\n", e.what());
        }
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
