#include <string>
#include <vector>

#include "CLI11.hpp"
#include "edgeflow/commands.hpp"
#include "edgeflow/version.hpp"

int main(int argc, char** argv) {
    CLI::App app{"normalized Yamabe flow laboratory on model cone manifolds"};
    app.require_subcommand(1);
    app.set_version_flag("--version", edgeflow::kVersion);

    edgeflow::CliOptions opts;
    std::string sweep_param;
    std::vector<double> sweep_values;
    std::string audit_dir;

    CLI::App* run = app.add_subcommand("run", "integrate the flow and audit every law");
    run->add_option("--config", opts.config_path, "config file (JSON)")->required();
    run->add_option("--out", opts.out_dir, "artifact directory");
    run->add_flag("--quiet", opts.quiet, "suppress the summary table");

    CLI::App* spectral =
        app.add_subcommand("spectral", "first eigenpair, invariant estimate, trichotomy");
    spectral->add_option("--config", opts.config_path, "config file (JSON)")->required();
    spectral->add_option("--out", opts.out_dir, "report directory");
    spectral->add_flag("--quiet", opts.quiet, "suppress the summary line");

    CLI::App* sweep = app.add_subcommand("sweep", "independent runs over one varied key");
    sweep->add_option("--config", opts.config_path, "base config file (JSON)")->required();
    sweep->add_option("--param", sweep_param, "dotted config key, e.g. flow.tau")->required();
    sweep->add_option("--values", sweep_values, "values for the varied key")
        ->required()
        ->delimiter(',');
    sweep->add_option("--out", opts.out_dir, "sweep directory");
    sweep->add_flag("--quiet", opts.quiet, "suppress the summary table");

    CLI::App* audit = app.add_subcommand("audit", "recompute verdicts from an artifact");
    audit->add_option("dir", audit_dir, "artifact directory")->required();
    audit->add_flag("--quiet", opts.quiet, "suppress the verdict table");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2; // usage problems share the configuration-error exit code
    }

    if (run->parsed()) return edgeflow::cmd_run(opts);
    if (spectral->parsed()) return edgeflow::cmd_spectral(opts);
    if (sweep->parsed()) return edgeflow::cmd_sweep(opts, sweep_param, sweep_values);
    if (audit->parsed()) return edgeflow::cmd_audit(audit_dir, opts.quiet);
    return 2;
}
