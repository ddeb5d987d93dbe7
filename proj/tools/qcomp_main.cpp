/// Command-line experiment runner. `qcomp run <config.json>` executes every
/// scenario in the config and writes JSON reports, CSV data, and plot columns
/// into the output directory; `qcomp list` prints the bundled scenario table.
///
/// Exit status: 0 when every scenario lands as expected (controls marked
/// expected_fail must fail), 1 when any scenario misbehaves, 2 on config or
/// I/O errors.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include <qcomp/scenario.hpp>

namespace {

struct BundledEntry {
    const char* file;
    const char* id;
    const char* kind;
    const char* theorem;
};

/// Mirrors the configs shipped under scenarios/.
const BundledEntry kBundled[] = {
    {"scenarios/reference.json", "thm1.1-mc-dirichlet", "mc_dirichlet",
     "Theorem 1.1: modulus-of-continuity comparison, Dirichlet heat flow"},
    {"scenarios/reference.json", "thm5.1-mc-neumann", "mc_neumann",
     "Theorem 5.1: modulus-of-continuity comparison, Neumann condition"},
    {"scenarios/reference.json", "thm6.1-decay", "decay",
     "Theorem 6.1: pointwise decay below the model eigen-barrier"},
    {"scenarios/reference.json", "prop7.1-decay-rate-heat", "decay_rate",
     "Proposition 7.1: exponential decay rate of the heat flow"},
    {"scenarios/reference.json", "prop7.1-decay-rate-3lap", "decay_rate",
     "Proposition 7.1: decay rate of the normalized 3-Laplacian flow"},
    {"scenarios/reference.json", "thm1.2-dirichlet-eigen", "eigen_dirichlet",
     "Theorem 1.2: Dirichlet principal eigenvalue lower bound"},
    {"scenarios/reference.json", "thm5.2-neumann-eigen-p", "eigen_neumann",
     "Theorem 5.2: Neumann p-Laplacian eigenvalue lower bound"},
    {"scenarios/reference.json", "thm3.1-supersolution", "supersolution",
     "Theorem 3.1: distance-to-boundary barrier is a supersolution"},
    {"scenarios/reference.json", "thm4.2-two-point", "two_point",
     "Theorem 4.2: two-point drift inequality for the distance coupling"},
    {"scenarios/reference.json", "thm8.1-parabolic-gradient", "gradient_parabolic",
     "Theorem 8.1: height-dependent gradient bound, parabolic flow"},
    {"scenarios/reference.json", "thm9.1-elliptic-gradient", "gradient_elliptic",
     "Theorem 9.1: height-dependent gradient bound, elliptic equation"},
    {"scenarios/fuzz.json", "fuzz-dirichlet-eigen", "eigen_dirichlet",
     "Theorem 1.2 under randomized smooth densities (effective bounds)"},
    {"scenarios/fuzz.json", "fuzz-neumann-eigen", "eigen_neumann",
     "Theorem 5.2 under randomized smooth densities (effective bounds)"},
    {"scenarios/sharpness.json", "sharp-dirichlet-model", "eigen_dirichlet",
     "Theorem 1.2 equality case: the model density attains the bound"},
    {"scenarios/sharpness.json", "sharp-neumann-flat-p3", "eigen_neumann",
     "Theorem 5.2 equality case: flat density, p = 3"},
    {"scenarios/negative_controls.json", "ctrl-mc-flipped-drift", "mc_dirichlet",
     "control: barrier drift sign flipped, admissibility must fail"},
    {"scenarios/negative_controls.json", "ctrl-eigen-inflated-kappa", "eigen_dirichlet",
     "control: claimed curvature exceeds the space's, bound must fail"},
    {"scenarios/negative_controls.json", "ctrl-two-point-wrong-kappa", "two_point",
     "control: concave density against a flat claim, inequality must fail"},
    {"scenarios/negative_controls.json", "ctrl-supersolution-kappa", "supersolution",
     "control: hypothesis gap in the claimed curvature must be reported"},
    {"scenarios/negative_controls.json", "ctrl-gradient-parabolic-shrunk", "gradient_parabolic",
     "control: barrier slopes shrunk 10 percent, gradient bound must fail"},
    {"scenarios/negative_controls.json", "ctrl-gradient-elliptic-shrunk", "gradient_elliptic",
     "control: barrier slopes shrunk 10 percent, gradient bound must fail"},
};

int cmd_list() {
    std::printf("%-34s %-20s %s\n", "id", "kind", "reference");
    for (const auto& e : kBundled)
        std::printf("%-34s %-20s %s  [%s]\n", e.id, e.kind, e.theorem, e.file);
    return 0;
}

int cmd_run(const std::string& config_path, std::string out_dir, int jobs,
            std::uint64_t seed) {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) {
        std::fprintf(stderr, "error: cannot read config '%s'\n", config_path.c_str());
        return 2;
    }
    std::ostringstream buf;
    buf << in.rdbuf();

    qcomp::RunConfig config;
    try {
        config = qcomp::parse_config(buf.str(), config_path);
    } catch (const qcomp::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }

    const auto outcomes = qcomp::run_all(config, seed, jobs);

    namespace fs = std::filesystem;
    try {
        fs::create_directories(out_dir);
        for (const auto& out : outcomes) {
            qcomp::write_text_file((fs::path(out_dir) / (out.id + ".json")).string(),
                                   qcomp::outcome_to_json(out).dump());
            for (const auto& [name, content] : out.artifacts)
                qcomp::write_text_file((fs::path(out_dir) / name).string(), content);
        }
        qcomp::write_text_file((fs::path(out_dir) / "summary.json").string(),
                               qcomp::summary_to_json(outcomes).dump());
        qcomp::write_text_file((fs::path(out_dir) / "summary.csv").string(),
                               qcomp::summary_csv(outcomes));
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }

    int ok_count = 0;
    for (const auto& out : outcomes) {
        const bool ok = out.outcome_ok();
        ok_count += ok ? 1 : 0;
        std::printf("[%s] %-34s %-20s%s%s\n", ok ? " ok " : "FAIL", out.id.c_str(),
                    out.kind.c_str(), out.expected_fail ? " (control)" : "",
                    out.error.empty() ? "" : (" error: " + out.error).c_str());
    }
    std::printf("summary: %d/%zu scenarios as expected; reports in %s\n", ok_count,
                outcomes.size(), out_dir.c_str());
    return ok_count == static_cast<int>(outcomes.size()) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"verification scenario runner for quasilinear comparison estimates"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string out_dir = "qcomp_out";
    int jobs = 1;
    std::uint64_t seed = 12345;
    app.add_option("--out", out_dir, "output directory (env QCOMP_OUT overrides)");
    app.add_option("--jobs", jobs, "scenario-level parallelism")->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "seed for randomized-density scenarios");

    std::string config_path;
    auto* run = app.add_subcommand("run", "execute a scenario config");
    run->add_option("config", config_path, "path to JSON config")->required();
    auto* list = app.add_subcommand("list", "describe the bundled scenarios");

    CLI11_PARSE(app, argc, argv);

    if (const char* env = std::getenv("QCOMP_OUT"); env && *env) out_dir = env;

    if (list->parsed()) return cmd_list();
    return cmd_run(config_path, out_dir, jobs, seed);
}
