// isospec command line: single experiment runs and refinement sweeps with
// CSV/JSON reports. Exit codes: 0 all checks passed, 1 check failure,
// 2 invalid input.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "isospec/isospec.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace isospec;

namespace {

constexpr const char* kVersion = "0.1.0";

enum class LogLevel { quiet, info, debug };

LogLevel log_level() {
    const char* env = std::getenv("ISOSPEC_LOG");
    if (!env) return LogLevel::info;
    const std::string v = env;
    if (v == "quiet") return LogLevel::quiet;
    if (v == "debug") return LogLevel::debug;
    return LogLevel::info;
}

void log_info(const std::string& msg) {
    if (log_level() != LogLevel::quiet) std::cerr << "[isospec] " << msg << "\n";
}

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    std::string experiment;
    std::vector<int> n_list;     // single-element for `run`
    std::uint64_t seed = 1;
    SigmaFamily sigma{"affine", {1.0, -1.0}};
    OmegaKind omega_kind = OmegaKind::constant;
    int omega_degree = 1;
    ZeroSet zeros;
    KernelSource kernel_source = KernelSource::poisson_logF;
    Tolerances tols;
    std::string out_dir = ".";
    std::string format = "csv";
    json echo;
};

void reject_unknown_keys(const json& obj, const std::vector<std::string>& allowed,
                         const std::string& scope) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
            throw ConfigError("unknown key '" + scope + it.key() + "'");
    }
}

ExperimentConfig parse_config(const fs::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file '" + path.string() + "'");
    json j;
    try {
        j = json::parse(f);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    reject_unknown_keys(j, {"experiment", "n", "n_list", "seed", "sigma", "omega", "zeros",
                            "kernel_source", "tolerances", "output"},
                        "");
    ExperimentConfig cfg;
    cfg.echo = j;
    if (!j.contains("experiment") || !j["experiment"].is_string())
        throw ConfigError("missing or invalid key 'experiment'");
    cfg.experiment = j["experiment"];
    const std::vector<std::string> known = {"framework_random", "d1_cauchy", "d1_antiperiodic",
                                            "laplace2d"};
    if (std::find(known.begin(), known.end(), cfg.experiment) == known.end())
        throw ConfigError("invalid value for key 'experiment': " + cfg.experiment);

    if (j.contains("n") && j.contains("n_list"))
        throw ConfigError("keys 'n' and 'n_list' are mutually exclusive");
    if (j.contains("n")) {
        if (!j["n"].is_number_integer() || j["n"].get<int>() < 4)
            throw ConfigError("invalid value for key 'n'");
        cfg.n_list = {j["n"].get<int>()};
    } else if (j.contains("n_list")) {
        if (!j["n_list"].is_array()) throw ConfigError("invalid value for key 'n_list'");
        for (const auto& e : j["n_list"]) {
            if (!e.is_number_integer() || e.get<int>() < 4)
                throw ConfigError("invalid entry in 'n_list'");
            cfg.n_list.push_back(e.get<int>());
        }
    } else {
        throw ConfigError("missing key 'n' (or 'n_list')");
    }

    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) throw ConfigError("invalid value for key 'seed'");
        cfg.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("sigma")) {
        const auto& s = j["sigma"];
        reject_unknown_keys(s, {"family", "params"}, "sigma.");
        if (!s.contains("family") || !s["family"].is_string())
            throw ConfigError("missing or invalid key 'sigma.family'");
        cfg.sigma.name = s["family"];
        cfg.sigma.params.clear();
        if (s.contains("params")) {
            if (!s["params"].is_array()) throw ConfigError("invalid value for key 'sigma.params'");
            for (const auto& p : s["params"]) {
                if (!p.is_number()) throw ConfigError("invalid entry in 'sigma.params'");
                cfg.sigma.params.push_back(p.get<double>());
            }
        }
    }
    if (j.contains("omega")) {
        const auto& o = j["omega"];
        reject_unknown_keys(o, {"kind", "degree"}, "omega.");
        if (!o.contains("kind") || !o["kind"].is_string())
            throw ConfigError("missing or invalid key 'omega.kind'");
        const std::string kind = o["kind"];
        if (kind == "constant")
            cfg.omega_kind = OmegaKind::constant;
        else if (kind == "re_power")
            cfg.omega_kind = OmegaKind::re_power;
        else if (kind == "im_power")
            cfg.omega_kind = OmegaKind::im_power;
        else
            throw ConfigError("invalid value for key 'omega.kind': " + kind);
        if (o.contains("degree")) {
            if (!o["degree"].is_number_integer() || o["degree"].get<int>() < 1)
                throw ConfigError("invalid value for key 'omega.degree'");
            cfg.omega_degree = o["degree"].get<int>();
        }
    }
    if (j.contains("zeros")) {
        if (!j["zeros"].is_array()) throw ConfigError("invalid value for key 'zeros'");
        for (const auto& z : j["zeros"]) {
            if (!z.is_array() || z.size() != 3 || !z[0].is_number() || !z[1].is_number() ||
                !z[2].is_number_integer())
                throw ConfigError("invalid entry in 'zeros' (expected [re, im, mult])");
            cfg.zeros.zeros.push_back(
                {Complex(z[0].get<double>(), z[1].get<double>()), z[2].get<int>()});
        }
    }
    if (j.contains("kernel_source")) {
        const std::string src = j["kernel_source"];
        if (src == "explicit")
            cfg.kernel_source = KernelSource::explicit_field;
        else if (src == "poisson_logF")
            cfg.kernel_source = KernelSource::poisson_logF;
        else
            throw ConfigError("invalid value for key 'kernel_source': " + src);
    }
    if (j.contains("tolerances")) {
        const auto& t = j["tolerances"];
        reject_unknown_keys(t, {"match_tol", "transfer_tol"}, "tolerances.");
        if (t.contains("match_tol")) {
            if (!t["match_tol"].is_number() || t["match_tol"].get<double>() <= 0)
                throw ConfigError("invalid value for key 'tolerances.match_tol'");
            cfg.tols.match_tol = t["match_tol"].get<double>();
        }
        if (t.contains("transfer_tol")) {
            if (!t["transfer_tol"].is_number() || t["transfer_tol"].get<double>() <= 0)
                throw ConfigError("invalid value for key 'tolerances.transfer_tol'");
            cfg.tols.transfer_tol = t["transfer_tol"].get<double>();
        }
    }
    if (j.contains("output")) {
        const auto& o = j["output"];
        reject_unknown_keys(o, {"dir", "format"}, "output.");
        if (o.contains("dir")) {
            if (!o["dir"].is_string()) throw ConfigError("invalid value for key 'output.dir'");
            cfg.out_dir = o["dir"];
        }
        if (o.contains("format")) {
            const std::string fmt = o["format"];
            if (fmt != "csv" && fmt != "json")
                throw ConfigError("invalid value for key 'output.format': " + fmt);
            cfg.format = fmt;
        }
    }
    return cfg;
}

struct RunOutcome {
    SpectralReport report;
    std::map<std::string, bool> checks;
    double riesz = 0.0;
    double greens = 0.0;              // laplace2d only
    double top_eig_rel_err = 0.0;     // d1_antiperiodic only
    bool passed = false;
};

RunOutcome execute_single(const ExperimentConfig& cfg, int n) {
    RunOutcome out;
    if (cfg.experiment == "framework_random") {
        auto res = experiments::run_framework_random(n, cfg.seed, cfg.tols);
        out.report = res.match;
        out.riesz = res.riesz;
        out.checks["spectra_match"] = res.match.passed;
        bool ids_ok = true;
        for (const auto& id : res.identities) ids_ok = ids_ok && id.max_residual <= 1e-9;
        out.checks["identity_suite"] = ids_ok;
        out.passed = res.passed;
    } else if (cfg.experiment == "d1_cauchy") {
        const Grid1D grid{n, Scheme::left_rectangle};
        const SigmaSpec spec = volterra1d::make_sigma_spec(grid, cfg.sigma, SigmaKind::cauchy);
        out.report = volterra1d::volterra_certificate(grid, spec, cfg.tols);
        out.checks["volterra_certificate"] = out.report.passed;
        out.passed = out.report.passed;
    } else if (cfg.experiment == "d1_antiperiodic") {
        auto res = experiments::run_d1_antiperiodic(n, cfg.sigma, cfg.tols.match_tol, cfg.tols);
        out.report = res.match;
        out.top_eig_rel_err = res.top_eig_rel_err;
        out.checks["spectra_match"] = res.match.passed;
        out.checks["closed_form_top_eigenvalues"] = res.top_eig_rel_err <= 5e-3;
        out.passed = res.passed;
    } else {  // laplace2d
        const HarmonicWeight omega =
            laplace2d::harmonic_weight(RectGrid{n}, cfg.omega_kind, cfg.omega_degree);
        auto res = experiments::run_laplace2d(n, omega, cfg.zeros, cfg.kernel_source, 20,
                                              cfg.tols);
        out.report = res.match;
        out.riesz = res.riesz.condition;
        out.greens = res.greens_discrepancy;
        out.checks["spectra_match"] = res.match.passed;
        if (!cfg.zeros.zeros.empty()) {
            out.checks["closed_form_spectrum"] = res.closed_form_err <= cfg.tols.match_tol;
            out.checks["eigvec_transfer"] = res.transfer.passed;
        }
        out.passed = res.passed;
    }
    if (out.report.riesz_condition == 0.0) out.report.riesz_condition = out.riesz;
    return out;
}

void write_report(const ExperimentConfig& cfg, const fs::path& dir, const std::string& stem,
                  const SpectralReport& rep) {
    if (cfg.format == "csv") {
        report_io::write_text_file((dir / (stem + ".csv")).string(),
                                   report_io::spectral_report_csv(rep));
    } else {
        report_io::write_text_file((dir / (stem + ".json")).string(),
                                   report_io::spectral_report_json(rep).dump(2) + "\n");
    }
}

void write_manifest(const ExperimentConfig& cfg, const fs::path& dir,
                    const std::map<std::string, bool>& checks,
                    const std::map<std::string, double>& stage_seconds, bool passed) {
    nlohmann::ordered_json m;
    m["version"] = kVersion;
    m["config"] = cfg.echo;
    nlohmann::ordered_json stages;
    for (const auto& [k, v] : stage_seconds) stages[k] = report_io::format_double(v);
    m["wall_clock_seconds"] = stages;
    nlohmann::ordered_json ch;
    for (const auto& [k, v] : checks) ch[k] = v;
    m["checks"] = ch;
    m["passed"] = passed;
    report_io::write_text_file((dir / "manifest.json").string(), m.dump(2) + "\n");
}

int cmd_run(const ExperimentConfig& cfg) {
    if (cfg.n_list.size() != 1)
        throw ConfigError("'run' expects a single 'n' (use 'sweep' for 'n_list')");
    const fs::path dir = cfg.out_dir;
    fs::create_directories(dir);
    std::map<std::string, bool> checks;
    std::map<std::string, double> stages;
    bool passed = false;
    try {
        log_info("run: experiment=" + cfg.experiment + " n=" + std::to_string(cfg.n_list[0]));
        const auto t0 = std::chrono::steady_clock::now();
        RunOutcome out = execute_single(cfg, cfg.n_list[0]);
        const auto t1 = std::chrono::steady_clock::now();
        stages["run"] = std::chrono::duration<double>(t1 - t0).count();
        checks = out.checks;
        passed = out.passed;
        write_report(cfg, dir, "spectral_report", out.report);
        const auto t2 = std::chrono::steady_clock::now();
        stages["write"] = std::chrono::duration<double>(t2 - t1).count();
        write_manifest(cfg, dir, checks, stages, passed);
    } catch (const AdmissibilityError&) {
        write_manifest(cfg, dir, checks, stages, false);
        throw;
    } catch (const std::exception& e) {
        checks["error_free"] = false;
        write_manifest(cfg, dir, checks, stages, false);
        log_info(std::string("run failed: ") + e.what());
        return 1;
    }
    log_info(passed ? "all checks passed" : "checks FAILED");
    return passed ? 0 : 1;
}

int cmd_sweep(const ExperimentConfig& cfg) {
    if (cfg.n_list.size() < 2) throw ConfigError("'n_list' must have at least 2 entries");
    for (size_t i = 1; i < cfg.n_list.size(); ++i)
        if (cfg.n_list[i] <= cfg.n_list[i - 1])
            throw ConfigError("'n_list' must be strictly ascending");
    const fs::path dir = cfg.out_dir;
    fs::create_directories(dir);

    std::string table = "n,max_abs_diff,riesz_condition,greens_discrepancy,verdict\n";
    std::map<std::string, bool> checks;
    std::map<std::string, double> stages;
    std::vector<double> trend_metric;
    bool all_pass = true;
    try {
        for (int n : cfg.n_list) {
            log_info("sweep: n=" + std::to_string(n));
            const auto t0 = std::chrono::steady_clock::now();
            RunOutcome out = execute_single(cfg, n);
            const auto t1 = std::chrono::steady_clock::now();
            stages["n=" + std::to_string(n)] = std::chrono::duration<double>(t1 - t0).count();
            write_report(cfg, dir, "spectral_report_n" + std::to_string(n), out.report);

            // Trend metric: Green's split discrepancy for laplace2d, closed-form
            // eigenvalue error for d1_antiperiodic, spectra mismatch otherwise.
            double metric = out.report.max_abs_diff;
            if (cfg.experiment == "laplace2d") metric = out.greens;
            if (cfg.experiment == "d1_antiperiodic") metric = out.top_eig_rel_err;
            trend_metric.push_back(metric);

            table += std::to_string(n) + "," + report_io::format_double(out.report.max_abs_diff) +
                     "," + report_io::format_double(out.riesz) + "," +
                     (cfg.experiment == "laplace2d" ? report_io::format_double(out.greens)
                                                    : std::string("")) +
                     "," + (out.passed ? "pass" : "fail") + "\n";
            checks["n=" + std::to_string(n)] = out.passed;
            all_pass = all_pass && out.passed;
        }
        bool decreasing = true;
        for (size_t i = 1; i < trend_metric.size(); ++i)
            decreasing = decreasing && trend_metric[i] < trend_metric[i - 1];
        table += "trend,,,," + std::string(decreasing ? "decreasing" : "not_decreasing") + "\n";
        checks["trend_decreasing"] = decreasing;
        all_pass = all_pass && decreasing;
        report_io::write_text_file((dir / "convergence_table.csv").string(), table);
        write_manifest(cfg, dir, checks, stages, all_pass);
    } catch (const AdmissibilityError&) {
        write_manifest(cfg, dir, checks, stages, false);
        throw;
    } catch (const std::exception& e) {
        checks["error_free"] = false;
        write_manifest(cfg, dir, checks, stages, false);
        log_info(std::string("sweep failed: ") + e.what());
        return 1;
    }
    log_info(all_pass ? "all checks passed" : "checks FAILED");
    return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"isospec: spectrum-preserving singular perturbation experiments"};
    app.require_subcommand(1);
    std::string config_path;
    std::string out_override;

    auto* run = app.add_subcommand("run", "execute a single experiment");
    run->add_option("config", config_path, "path to the JSON config")->required();
    run->add_option("--out", out_override, "override the output directory");

    auto* sweep = app.add_subcommand("sweep", "execute a refinement sweep over n_list");
    sweep->add_option("config", config_path, "path to the JSON config")->required();
    sweep->add_option("--out", out_override, "override the output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        ExperimentConfig cfg = parse_config(config_path);
        if (!out_override.empty()) cfg.out_dir = out_override;
        if (app.got_subcommand(run)) return cmd_run(cfg);
        return cmd_sweep(cfg);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const AdmissibilityError& e) {
        std::cerr << "inadmissible input: " << e.what() << "\n";
        return 2;
    } catch (const ShapeError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
