#include "edgeflow/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include "edgeflow/artifact.hpp"
#include "edgeflow/config.hpp"
#include "edgeflow/diagnostics.hpp"
#include "edgeflow/flow.hpp"
#include "edgeflow/mesh.hpp"
#include "edgeflow/spectral.hpp"
#include "edgeflow/version.hpp"

namespace edgeflow {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string default_out_dir(const std::string& config_path) {
    const char* root = std::getenv("EDGEFLOW_OUTPUT_ROOT");
    const std::string base = (root && *root) ? root : "runs";
    std::string stem = fs::path(config_path).stem().string();
    if (stem.empty()) stem = "run";
    return base + "/" + stem;
}

void print_verdict_table(const std::vector<Verdict>& verdicts) {
    std::printf("%-22s %-6s %-14s %-14s\n", "check", "status", "measured", "threshold");
    for (const Verdict& v : verdicts)
        std::printf("%-22s %-6s %-14.6g %-14.6g\n", v.check_id.c_str(),
                    v.pass ? "PASS" : "FAIL", v.measured, v.threshold);
}

bool all_pass(const std::vector<Verdict>& verdicts) {
    return std::all_of(verdicts.begin(), verdicts.end(),
                       [](const Verdict& v) { return v.pass; });
}

struct RunOutcome {
    int exit_code = 0;
    RunArtifact artifact;
    bool wrote_artifact = false;
};

/* Flow + diagnostics + spectral + artifact for one validated config.
 * ConfigError escapes (the caller maps it to exit 2); everything else is
 * handled here so partial artifacts get flushed. */
RunOutcome execute_run(RunConfig cfg, const std::string& out_dir, bool quiet) {
    RunOutcome outcome;
    const auto t_start = std::chrono::steady_clock::now();

    const EdgeModel& model = cfg.model;
    const Mesh mesh = build_mesh(cfg.K, cfg.gamma, model.x_max, model);
    const CurvatureField scal0 = initial_curvature(model, mesh);

    if (!cfg.t_end_given) {
        const double b = -*std::max_element(scal0.values.begin(), scal0.values.end());
        if (!(b > 0.0))
            throw ConfigError({"flow.t_end: required explicitly when the initial "
                               "curvature is not strictly negative (no default decay "
                               "rate 10/b available)"});
        cfg.flow.t_end = 10.0 / b;
        cfg.t_end_given = true;
    }

    const ConformalState init = make_initial_state(std::vector<double>(mesh.x.size(), 1.0),
                                                   model, mesh);
    FlowRecord record;
    ConformalState final_state;
    bool flow_aborted = false;
    std::string abort_reason;
    try {
        FlowResult result = run_flow(init, cfg.flow, model, mesh);
        record = std::move(result.record);
        final_state = std::move(result.final_state);
    } catch (const FlowAborted& fa) {
        record = fa.record;
        final_state = fa.last_state;
        flow_aborted = true;
        abort_reason = fa.what();
    }

    double mp_u = 0.0, mp_scal = 0.0;
    for (const FlowRecordRow& r : record.rows) {
        mp_u = std::max(mp_u, r.mp_u_violation);
        mp_scal = std::max(mp_scal, r.mp_scal_violation);
    }

    std::optional<SpectralSummary> spectral;
    bool spectral_failed = false;
    if (cfg.spectral.enabled && !flow_aborted) {
        try {
            const TrichotomyReport rep =
                trichotomy_check(model, mesh, cfg.spectral.iters, cfg.spectral.step);
            SpectralSummary s;
            s.lambda1 = rep.result.lambda1;
            s.nu_estimate = rep.result.nu_estimate;
            s.signs = rep.result.trichotomy_signs;
            s.identity_dev = rep.identity_dev;
            s.pass = rep.pass;
            spectral = s;
        } catch (const std::exception& e) {
            spectral_failed = true;
            std::fprintf(stderr, "spectral stage failed: %s\n", e.what());
        }
    }

    RunArtifact art;
    art.config = cfg;
    art.record = std::move(record);
    art.final_x = mesh.x;
    art.final_u = final_state.u;
    art.spectral = spectral;
    art.convergence = detect_convergence(art.record, cfg.flow.stop_tol);
    art.mp_max_u_excess = mp_u;
    art.mp_max_scal_excess = mp_scal;
    art.version = kVersion;
    try {
        art.verdicts = standard_verdicts(model, art.record,
                                         scal_noise_floor(mesh.x[1], model.m), mp_u,
                                         mp_scal, spectral);
    } catch (const std::exception& e) {
        // keep the partial artifact writable even if an audit's hypothesis fails
        std::fprintf(stderr, "verdict assembly failed: %s\n", e.what());
        art.verdicts.clear();
    }
    art.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

    write_artifact(out_dir, art);
    outcome.wrote_artifact = true;

    if (!quiet) {
        std::printf("run: %s\n", out_dir.c_str());
        std::printf("termination: %s after %zu recorded rows; final gap %.6g; rho %.6g; "
                    "converged: %s\n",
                    art.record.termination.c_str(), art.record.rows.size(),
                    art.convergence.final_gap, art.convergence.final_rho,
                    art.convergence.converged ? "yes" : "no");
        print_verdict_table(art.verdicts);
    }

    if (flow_aborted) {
        std::fprintf(stderr, "flow aborted: %s (partial artifact in %s)\n",
                     abort_reason.c_str(), out_dir.c_str());
        outcome.exit_code = 3;
    } else if (spectral_failed) {
        outcome.exit_code = 3;
    } else {
        outcome.exit_code = all_pass(art.verdicts) && !art.verdicts.empty() ? 0 : 1;
    }
    outcome.artifact = std::move(art);
    return outcome;
}

int report_config_error(const std::exception& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
}

} // namespace

int cmd_run(const CliOptions& opts) {
    RunConfig cfg;
    try {
        cfg = parse_config(opts.config_path);
    } catch (const std::exception& e) {
        return report_config_error(e);
    }
    const std::string out =
        !opts.out_dir.empty()
            ? opts.out_dir
            : (!cfg.output.directory.empty() ? cfg.output.directory
                                             : default_out_dir(opts.config_path));
    try {
        return execute_run(std::move(cfg), out, opts.quiet).exit_code;
    } catch (const ConfigError& e) {
        return report_config_error(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "runtime abort: %s\n", e.what());
        return 3;
    }
}

int cmd_spectral(const CliOptions& opts) {
    RunConfig cfg;
    try {
        cfg = parse_config(opts.config_path);
        if (!cfg.spectral.enabled)
            throw ConfigError({"spectral.enabled: must be true for the spectral subcommand"});
    } catch (const std::exception& e) {
        return report_config_error(e);
    }
    try {
        const Mesh mesh = build_mesh(cfg.K, cfg.gamma, cfg.model.x_max, cfg.model);
        const TrichotomyReport rep =
            trichotomy_check(cfg.model, mesh, cfg.spectral.iters, cfg.spectral.step);

        json j;
        j["lambda1"] = rep.result.lambda1;
        j["nu"] = rep.result.nu_estimate;
        j["signs"] = rep.result.trichotomy_signs;
        j["identity_dev"] = rep.identity_dev;
        j["pass"] = rep.pass;
        j["config"] = config_to_json(cfg);

        const std::string out =
            !opts.out_dir.empty()
                ? opts.out_dir
                : (!cfg.output.directory.empty() ? cfg.output.directory
                                                 : default_out_dir(opts.config_path));
        fs::create_directories(out);
        std::ofstream f(out + "/spectral_report.json", std::ios::binary);
        f << j.dump(2) << "\n";
        if (!f) throw std::runtime_error("cannot write " + out + "/spectral_report.json");

        if (!opts.quiet) {
            std::printf("lambda1 = %.12g   nu = %.12g   identity dev = %.3g\n",
                        rep.result.lambda1, rep.result.nu_estimate, rep.identity_dev);
            std::printf("signs (lambda1, scal~, nu): (%d, %d, %d)  %s\n",
                        rep.result.trichotomy_signs[0], rep.result.trichotomy_signs[1],
                        rep.result.trichotomy_signs[2], rep.pass ? "AGREE" : "DISAGREE");
        }
        return rep.pass ? 0 : 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "runtime abort: %s\n", e.what());
        return 3;
    }
}

namespace {

// "flow.tau" -> j["flow"]["tau"] = value (integral values stored as integers)
void set_dotted(json& j, const std::string& param, double value) {
    json* node = &j;
    std::stringstream ss(param);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) parts.push_back(part);
    for (size_t i = 0; i + 1 < parts.size(); ++i) node = &((*node)[parts[i]]);
    if (std::floor(value) == value && std::abs(value) < 9e15)
        (*node)[parts.back()] = (long long)(value);
    else
        (*node)[parts.back()] = value;
}

struct SweepRow {
    double value = 0.0;
    std::string status; // ok | config-error | abort
    bool pass = false;
    double vol_drift = NAN, final_gap = NAN, lambda1 = NAN;
};

} // namespace

int cmd_sweep(const CliOptions& opts, const std::string& param,
              const std::vector<double>& values) {
    if (values.empty()) {
        std::fprintf(stderr, "sweep needs a nonempty --values list\n");
        return 2;
    }
    if (param.empty() || param.find_first_not_of(
                             "abcdefghijklmnopqrstuvwxyz_.0123456789") != std::string::npos) {
        std::fprintf(stderr, "sweep --param must be a dotted config key\n");
        return 2;
    }

    json base;
    try {
        std::ifstream in(opts.config_path);
        if (!in) throw std::runtime_error("cannot open config file: " + opts.config_path);
        base = json::parse(in);
        parse_config_json(base); // the base config must already be valid
    } catch (const std::exception& e) {
        return report_config_error(e);
    }

    const std::string out = !opts.out_dir.empty() ? opts.out_dir
                                                  : default_out_dir(opts.config_path) + "_sweep";

    // isolated concurrent runs; each writes its own subdirectory
    std::vector<std::future<SweepRow>> futures;
    for (double value : values) {
        futures.push_back(std::async(std::launch::async, [&, value]() {
            SweepRow row;
            row.value = value;
            json j = base;
            set_dotted(j, param, value);
            std::ostringstream name;
            name << param << "=" << value;
            const std::string subdir = out + "/" + name.str();
            try {
                RunConfig cfg = parse_config_json(j);
                const RunOutcome res = execute_run(std::move(cfg), subdir, true);
                row.status = res.exit_code == 3 ? "abort" : "ok";
                row.pass = res.exit_code == 0;
                for (const Verdict& v : res.artifact.verdicts)
                    if (v.check_id == "volume_preserved") row.vol_drift = v.measured;
                row.final_gap = res.artifact.convergence.final_gap;
                if (res.artifact.spectral) row.lambda1 = res.artifact.spectral->lambda1;
            } catch (const ConfigError&) {
                row.status = "config-error";
            } catch (const std::exception&) {
                row.status = "abort";
            }
            return row;
        }));
    }

    std::vector<SweepRow> rows;
    for (auto& f : futures) rows.push_back(f.get());

    fs::create_directories(out);
    {
        std::ofstream f(out + "/sweep_summary.csv", std::ios::binary);
        f << "param,value,status,all_pass,vol_drift,final_gap,lambda1\n";
        for (const SweepRow& r : rows)
            f << param << ',' << format_double(r.value) << ',' << r.status << ','
              << (r.pass ? 1 : 0) << ',' << format_double(r.vol_drift) << ','
              << format_double(r.final_gap) << ',' << format_double(r.lambda1) << "\n";
        if (!f) {
            std::fprintf(stderr, "cannot write %s/sweep_summary.csv\n", out.c_str());
            return 3;
        }
    }
    if (!opts.quiet) {
        std::printf("%-12s %-14s %-12s %-6s %-12s %-12s %-12s\n", "param", "value", "status",
                    "pass", "vol_drift", "final_gap", "lambda1");
        for (const SweepRow& r : rows)
            std::printf("%-12s %-14.6g %-12s %-6s %-12.4g %-12.4g %-12.6g\n", param.c_str(),
                        r.value, r.status.c_str(), r.pass ? "yes" : "no", r.vol_drift,
                        r.final_gap, r.lambda1);
    }

    bool any_abort = false, any_fail = false;
    for (const SweepRow& r : rows) {
        if (r.status != "ok") any_abort = true;
        if (!r.pass) any_fail = true;
    }
    if (any_abort) return 3;
    return any_fail ? 1 : 0;
}

int cmd_audit(const std::string& artifact_dir, bool quiet) {
    RunArtifact art;
    try {
        art = read_artifact(artifact_dir);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "cannot read artifact: %s\n", e.what());
        return 2;
    }
    std::vector<Verdict> fresh;
    try {
        const double floor =
            art.final_x.size() > 1
                ? scal_noise_floor(art.final_x[1], art.config.model.m)
                : 0.0;
        fresh = standard_verdicts(art.config.model, art.record, floor,
                                  art.mp_max_u_excess, art.mp_max_scal_excess,
                                  art.spectral);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "audit recomputation failed: %s\n", e.what());
        return 2;
    }

    bool identical = fresh.size() == art.verdicts.size();
    for (size_t i = 0; identical && i < fresh.size(); ++i) {
        const Verdict& a = fresh[i];
        const Verdict& b = art.verdicts[i];
        identical = a.check_id == b.check_id && a.pass == b.pass &&
                    a.measured == b.measured && a.threshold == b.threshold;
    }
    if (!quiet) {
        print_verdict_table(fresh);
        std::printf("stored verdicts %s recomputed verdicts\n",
                    identical ? "match" : "DIFFER from");
    }
    if (!identical) {
        std::fprintf(stderr, "re-audit mismatch in %s\n", artifact_dir.c_str());
        return 1;
    }
    return all_pass(fresh) ? 0 : 1;
}

} // namespace edgeflow
