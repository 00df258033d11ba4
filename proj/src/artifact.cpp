#include "edgeflow/artifact.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace edgeflow {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

constexpr const char* kSeriesHeader =
    "t,rho,vol,scal_min,scal_max,u_min,u_max,scal_minus_rho_sup,dudt_sup";

double row_gap(const FlowRecordRow& r) { return r.scal_minus_rho_sup; }
double row_dudt(const FlowRecordRow& r) { return r.dudt_sup; }

/* Decay fit over [t_end/2, t_end], truncated at the first row that sinks to the
 * roundoff floor of sup-norm curvature values; nullopt when too short or when
 * the whole window is floor. */
std::optional<DecayFit> tail_fit(const FlowRecord& record,
                                 double (*field)(const FlowRecordRow&),
                                 double noise_floor) {
    if (record.rows.size() < 2) return std::nullopt;
    const double floor =
        std::max(noise_floor, 1e-12 * std::max(1.0, std::abs(record.rho0)));
    const double t_hi = record.rows.back().t;
    const double t_lo = 0.5 * t_hi;
    std::vector<double> ts, vs;
    for (const FlowRecordRow& r : record.rows) {
        if (r.t < t_lo || r.t > t_hi) continue;
        const double v = field(r);
        if (v <= floor) break;
        ts.push_back(r.t);
        vs.push_back(v);
    }
    if (ts.size() < 10) return std::nullopt;
    // a window spanning < 2 e-foldings of decay cannot certify a rate
    if (vs.front() < 7.389056098930650 * vs.back()) return std::nullopt;
    return fit_exponential(ts, vs, ts.front(), ts.back());
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out) throw std::runtime_error("cannot write " + path);
}

void write_json_file(const std::string& path, const json& j) {
    write_text(path, j.dump(2) + "\n");
}

json fit_to_json(const std::optional<DecayFit>& fit) {
    if (!fit) return nullptr;
    return json{{"rate", fit->rate},
                {"amplitude", fit->amplitude},
                {"r_squared", fit->r_squared},
                {"t_lo", fit->t_lo},
                {"t_hi", fit->t_hi}};
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error("invalid JSON in " + path + ": " + e.what());
    }
}

std::vector<std::vector<double>> read_csv(const std::string& path,
                                          const std::string& expect_header) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty table in " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != expect_header)
        throw std::runtime_error("unexpected header in " + path + ": " + line);
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str() || *end != '\0')
                throw std::runtime_error("bad number '" + cell + "' in " + path);
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace

std::vector<Verdict> standard_verdicts(const EdgeModel& model, const FlowRecord& record,
                                       double noise_floor, double mp_max_u_excess,
                                       double mp_max_scal_excess,
                                       const std::optional<SpectralSummary>& spectral) {
    std::vector<Verdict> out = audit_monotonicity(record, noise_floor);
    {
        const std::vector<Verdict> ub = audit_u_bounds(record, model);
        out.insert(out.end(), ub.begin(), ub.end());
    }
    {
        Verdict v;
        v.check_id = "max_principle_rows";
        v.measured = std::max(mp_max_u_excess, mp_max_scal_excess);
        v.threshold = 0.0;
        v.pass = v.measured <= 0.0;
        v.law = "the elliptic and parabolic extremum monitors are clean (no violation "
                "beyond the mesh tolerance) at every recorded step";
        out.push_back(v);
    }
    {
        Verdict v;
        v.check_id = "devolved_identity";
        v.measured = record.max_identity_dev;
        v.threshold = kIdentityTol;
        v.pass = v.measured <= v.threshold;
        v.law = "du/dt computed in devolved form equals (m-2)/4 (rho - scal) u node-wise "
                "at every step";
        out.push_back(v);
    }
    {
        Verdict v;
        v.check_id = "scal_gap_decay";
        v.threshold = 0.9 * record.b_rate;
        const std::optional<DecayFit> fit = tail_fit(record, row_gap, noise_floor);
        if (fit) {
            v.measured = fit->rate;
            v.pass = fit->rate >= v.threshold && fit->r_squared >= 0.98;
            v.law = "||scal - rho||_inf decays exponentially on the tail window at rate "
                    ">= 0.9 b with r^2 >= 0.98";
        } else {
            v.measured = 0.0;
            v.pass = true;
            v.law = "||scal - rho||_inf decay (skipped: window too short or series at "
                    "the numerical floor)";
        }
        out.push_back(v);
    }
    {
        Verdict v;
        v.check_id = "dudt_decay";
        v.threshold = 0.9 * record.b_rate;
        const std::optional<DecayFit> fit =
            tail_fit(record, row_dudt, 0.25 * double(model.m - 2) * noise_floor);
        if (fit) {
            v.measured = fit->rate;
            v.pass = fit->rate >= v.threshold && fit->r_squared >= 0.98;
            v.law = "||du/dt||_inf decays exponentially on the tail window at rate >= "
                    "0.9 b with r^2 >= 0.98";
        } else {
            v.measured = 0.0;
            v.pass = true;
            v.law = "||du/dt||_inf decay (skipped: window too short or series at the "
                    "numerical floor)";
        }
        out.push_back(v);
    }
    if (spectral) {
        Verdict v;
        v.check_id = "trichotomy_signs";
        v.measured = spectral->pass ? 1.0 : 0.0;
        v.threshold = 1.0;
        v.pass = spectral->pass;
        v.law = "the signs of lambda1, the conformal curvature of the eigen-metric, and "
                "the Yamabe-type invariant estimate agree";
        out.push_back(v);
    }
    return out;
}

void write_artifact(const std::string& dir, const RunArtifact& artifact) {
    fs::create_directories(dir);
    const auto& formats = artifact.config.output.formats;
    const bool want_csv = std::count(formats.begin(), formats.end(), "csv") > 0;
    const bool want_json = std::count(formats.begin(), formats.end(), "json") > 0;

    write_json_file(dir + "/config.json", config_to_json(artifact.config));

    if (want_csv) {
        std::ostringstream os;
        os << kSeriesHeader << "\n";
        for (const FlowRecordRow& r : artifact.record.rows) {
            os << format_double(r.t) << ',' << format_double(r.rho) << ','
               << format_double(r.vol) << ',' << format_double(r.scal_min) << ','
               << format_double(r.scal_max) << ',' << format_double(r.u_min) << ','
               << format_double(r.u_max) << ',' << format_double(r.scal_minus_rho_sup)
               << ',' << format_double(r.dudt_sup) << "\n";
        }
        write_text(dir + "/series.csv", os.str());

        std::ostringstream fs_os;
        fs_os << "x,u\n";
        for (size_t i = 0; i < artifact.final_u.size(); ++i)
            fs_os << format_double(artifact.final_x[i]) << ','
                  << format_double(artifact.final_u[i]) << "\n";
        write_text(dir + "/final_state.csv", fs_os.str());
    }

    if (want_json) {
        json jv = json::array();
        for (const Verdict& v : artifact.verdicts)
            jv.push_back({{"check_id", v.check_id},
                          {"pass", v.pass},
                          {"measured", v.measured},
                          {"threshold", v.threshold},
                          {"law", v.law}});
        write_json_file(dir + "/verdicts.json", jv);

        json jr;
        jr["termination"] = artifact.record.termination;
        jr["aborted"] = artifact.record.aborted;
        jr["a_bound"] = artifact.record.a_bound;
        jr["b_rate"] = artifact.record.b_rate;
        jr["rho0"] = artifact.record.rho0;
        jr["tau"] = artifact.record.tau;
        jr["max_identity_dev"] = artifact.record.max_identity_dev;
        jr["scal0"] = artifact.record.scal0;
        jr["mp"] = {{"max_u_excess", artifact.mp_max_u_excess},
                    {"max_scal_excess", artifact.mp_max_scal_excess}};
        const double floor =
            artifact.final_x.size() > 1
                ? scal_noise_floor(artifact.final_x[1], artifact.config.model.m)
                : 0.0;
        jr["decay"] = {
            {"scal_gap", fit_to_json(tail_fit(artifact.record, row_gap, floor))},
            {"dudt",
             fit_to_json(tail_fit(artifact.record, row_dudt,
                                  0.25 * double(artifact.config.model.m - 2) * floor))}};
        jr["convergence"] = {{"final_gap", artifact.convergence.final_gap},
                             {"final_rho", artifact.convergence.final_rho},
                             {"final_spread", artifact.convergence.final_spread},
                             {"converged", artifact.convergence.converged}};
        if (artifact.spectral) {
            jr["spectral"] = {{"lambda1", artifact.spectral->lambda1},
                              {"nu", artifact.spectral->nu_estimate},
                              {"signs", artifact.spectral->signs},
                              {"identity_dev", artifact.spectral->identity_dev},
                              {"pass", artifact.spectral->pass}};
        } else {
            jr["spectral"] = nullptr;
        }
        write_json_file(dir + "/reports.json", jr);
    }

    json jm;
    jm["version"] = artifact.version;
    jm["wall_seconds"] = artifact.wall_seconds;
    {
        std::time_t now = std::time(nullptr);
        char buf[32];
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        jm["written_at"] = buf;
    }
    write_json_file(dir + "/meta.json", jm);
}

RunArtifact read_artifact(const std::string& dir) {
    RunArtifact art;
    art.config = parse_config_json(read_json_file(dir + "/config.json"));

    const auto series = read_csv(dir + "/series.csv", kSeriesHeader);
    for (const auto& row : series) {
        if (row.size() != 9) throw std::runtime_error("series row width != 9 in " + dir);
        FlowRecordRow r{};
        r.t = row[0];
        r.rho = row[1];
        r.vol = row[2];
        r.scal_min = row[3];
        r.scal_max = row[4];
        r.u_min = row[5];
        r.u_max = row[6];
        r.scal_minus_rho_sup = row[7];
        r.dudt_sup = row[8];
        r.mp_u_violation = 0.0; // per-row monitors live in reports.json as maxima
        r.mp_scal_violation = 0.0;
        art.record.rows.push_back(r);
    }
    for (const auto& row : read_csv(dir + "/final_state.csv", "x,u")) {
        if (row.size() != 2) throw std::runtime_error("final state row width != 2 in " + dir);
        art.final_x.push_back(row[0]);
        art.final_u.push_back(row[1]);
    }

    const json jr = read_json_file(dir + "/reports.json");
    art.record.termination = jr.at("termination").get<std::string>();
    art.record.aborted = jr.at("aborted").get<bool>();
    art.record.a_bound = jr.at("a_bound").get<double>();
    art.record.b_rate = jr.at("b_rate").get<double>();
    art.record.rho0 = jr.at("rho0").get<double>();
    art.record.tau = jr.at("tau").get<double>();
    art.record.max_identity_dev = jr.at("max_identity_dev").get<double>();
    art.record.scal0 = jr.at("scal0").get<std::vector<double>>();
    art.mp_max_u_excess = jr.at("mp").at("max_u_excess").get<double>();
    art.mp_max_scal_excess = jr.at("mp").at("max_scal_excess").get<double>();
    art.convergence.final_gap = jr.at("convergence").at("final_gap").get<double>();
    art.convergence.final_rho = jr.at("convergence").at("final_rho").get<double>();
    art.convergence.final_spread = jr.at("convergence").at("final_spread").get<double>();
    art.convergence.converged = jr.at("convergence").at("converged").get<bool>();
    if (!jr.at("spectral").is_null()) {
        SpectralSummary s;
        s.lambda1 = jr["spectral"].at("lambda1").get<double>();
        s.nu_estimate = jr["spectral"].at("nu").get<double>();
        const auto signs = jr["spectral"].at("signs").get<std::vector<int>>();
        if (signs.size() != 3) throw std::runtime_error("spectral signs width != 3 in " + dir);
        s.signs = {signs[0], signs[1], signs[2]};
        s.identity_dev = jr["spectral"].at("identity_dev").get<double>();
        s.pass = jr["spectral"].at("pass").get<bool>();
        art.spectral = s;
    }

    for (const json& v : read_json_file(dir + "/verdicts.json")) {
        Verdict verdict;
        verdict.check_id = v.at("check_id").get<std::string>();
        verdict.pass = v.at("pass").get<bool>();
        verdict.measured = v.at("measured").get<double>();
        verdict.threshold = v.at("threshold").get<double>();
        verdict.law = v.at("law").get<std::string>();
        art.verdicts.push_back(std::move(verdict));
    }

    const json jm = read_json_file(dir + "/meta.json");
    art.version = jm.at("version").get<std::string>();
    art.wall_seconds = jm.at("wall_seconds").get<double>();
    return art;
}

} // namespace edgeflow
