// dpir: double phase image restoration toolkit — command-line surface.
//
// Subcommands:
//   synth        write a deterministic synthetic test image
//   denoise      restore an image under the rof / double_phase / i_eps model
//   gamma-sweep  sweep the regularized minimizers against the limit energy
//   maximal      capped-maximal-function L^p experiment
//
// Configuration: built-in defaults < --config file ([section] key = value)
// < --override section.key=value < explicit flags.  All commands are
// deterministic given their settings and seed; re-runs produce bit-identical
// images, CSV, and JSON.
//
// Exit codes: 0 success, 1 unusable input or invalid configuration (nothing
// is written), 2 solver finished without certifying convergence (outputs are
// still written from the best iterate).

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dpir/csv.hpp"
#include "dpir/energy.hpp"
#include "dpir/field.hpp"
#include "dpir/gamma.hpp"
#include "dpir/image_io.hpp"
#include "dpir/maximal.hpp"
#include "dpir/solver.hpp"
#include "dpir/synth.hpp"
#include "dpir/weight.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

// ---------------------------------------------------------------------------
// configuration file + overrides

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
    std::map<std::string, std::string> kv;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3)
                throw std::runtime_error("config: bad section header at line " +
                                         std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config: expected key = value at line " +
                                     std::to_string(lineno));
        const std::string key = trim(line.substr(0, eq));
        if (key.empty())
            throw std::runtime_error("config: empty key at line " + std::to_string(lineno));
        kv[section.empty() ? key : section + "." + key] = trim(line.substr(eq + 1));
    }
    return kv;
}

void apply_override(std::map<std::string, std::string>& kv, const std::string& spec) {
    const std::size_t eq = spec.find('=');
    if (eq == std::string::npos)
        throw std::runtime_error("--override expects section.key=value, got '" + spec + "'");
    const std::string key = trim(spec.substr(0, eq));
    if (key.empty()) throw std::runtime_error("--override has an empty key in '" + spec + "'");
    kv[key] = trim(spec.substr(eq + 1));
}

double parse_number(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw std::runtime_error(what + ": '" + s + "' is not a number");
    }
}

long parse_integer(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        const long v = std::stol(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw std::runtime_error(what + ": '" + s + "' is not an integer");
    }
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        std::size_t comma = s.find(',', start);
        if (comma == std::string::npos) comma = s.size();
        const std::string item = trim(s.substr(start, comma - start));
        if (!item.empty()) out.push_back(item);
        start = comma + 1;
    }
    return out;
}

// Settings resolver: explicit flag wins, then config/override, then default.
struct Cfg {
    std::map<std::string, std::string> kv;

    bool has(const std::string& key) const { return kv.count(key) > 0; }

    std::string str(const CLI::Option* opt, const std::string& flag_value, const std::string& key,
                    const std::string& fallback) const {
        if (opt->count() > 0) return flag_value;
        auto it = kv.find(key);
        return it == kv.end() ? fallback : it->second;
    }
    double num(const CLI::Option* opt, double flag_value, const std::string& key,
               double fallback) const {
        if (opt->count() > 0) return flag_value;
        auto it = kv.find(key);
        return it == kv.end() ? fallback : parse_number(it->second, key);
    }
    long integer(const CLI::Option* opt, long flag_value, const std::string& key,
                 long fallback) const {
        if (opt->count() > 0) return flag_value;
        auto it = kv.find(key);
        return it == kv.end() ? fallback : parse_integer(it->second, key);
    }
    bool flag(const CLI::Option* opt, bool flag_value, const std::string& key,
              bool fallback) const {
        if (opt->count() > 0) return flag_value;
        auto it = kv.find(key);
        if (it == kv.end()) return fallback;
        const std::string v = it->second;
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        throw std::runtime_error(key + ": '" + v + "' is not a boolean");
    }
};

dpir::RegularizationMode parse_mode(const std::string& s) {
    if (s == "exponent") return dpir::RegularizationMode::exponent;
    if (s == "weight") return dpir::RegularizationMode::weight;
    if (s == "combined") return dpir::RegularizationMode::combined;
    throw std::runtime_error("mode must be exponent, weight, or combined; got '" + s + "'");
}

std::string mode_name(dpir::RegularizationMode m) {
    switch (m) {
        case dpir::RegularizationMode::exponent: return "exponent";
        case dpir::RegularizationMode::weight: return "weight";
        case dpir::RegularizationMode::combined: return "combined";
    }
    return "?";
}

void write_text(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

void write_trace_csv(const std::string& path, const dpir::SolveResult& r) {
    dpir::CsvTable t({"iteration", "energy", "certificate"});
    for (const auto& row : r.trace)
        t.add_row({dpir::csv_number(row.iteration), dpir::csv_number(row.energy),
                   dpir::csv_number(row.certificate)});
    t.save(path);
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
    std::string kind = "two-region", out = "synth.pgm";
    long size = 64;
    double spacing = 0.0;
    long depth = 8;
    CLI::Option *kind_o = nullptr, *out_o = nullptr, *size_o = nullptr, *spacing_o = nullptr,
                *depth_o = nullptr;
};

int cmd_synth(const Cfg& cfg, const SynthArgs& a, std::uint64_t seed) {
    const std::string kind = cfg.str(a.kind_o, a.kind, "synth.kind", "two-region");
    const long size = cfg.integer(a.size_o, a.size, "synth.size", 64);
    const double spacing = cfg.num(a.spacing_o, a.spacing, "synth.spacing", 0.0);
    const std::string out = cfg.str(a.out_o, a.out, "synth.out", "synth.pgm");
    const long depth = cfg.integer(a.depth_o, a.depth, "synth.depth", 8);
    const dpir::ScalarField u = dpir::synth_image(kind, static_cast<int>(size), seed, spacing);
    dpir::write_image(out, u, static_cast<int>(depth));
    std::printf("wrote %s (kind=%s size=%ld seed=%llu depth=%ld)\n", out.c_str(), kind.c_str(),
                size, static_cast<unsigned long long>(seed), depth);
    return 0;
}

// ---------------------------------------------------------------------------
// shared weight construction

dpir::WeightSpec weight_spec_from(const Cfg& cfg) {
    dpir::WeightSpec s;
    auto pick = [&cfg](const std::string& key, double fallback) {
        auto it = cfg.kv.find(key);
        return it == cfg.kv.end() ? fallback : parse_number(it->second, key);
    };
    s.presmooth_sigma = pick("weight.presmooth_sigma", s.presmooth_sigma);
    s.edge_threshold = pick("weight.edge_threshold", s.edge_threshold);
    s.a_max = pick("weight.a_max", s.a_max);
    s.holder_alpha = pick("weight.holder_alpha", s.holder_alpha);
    s.modulus_constant = pick("weight.modulus_constant", s.modulus_constant);
    return s;
}

dpir::ScalarField load_or_estimate_weight(const Cfg& cfg, const std::string& weight_path,
                                          const dpir::ScalarField& f) {
    if (!weight_path.empty() && weight_path != "estimate") {
        dpir::ScalarField a = dpir::read_image(weight_path, f.spacing);
        if (a.width != f.width || a.height != f.height)
            throw std::runtime_error("weight image dimensions do not match the input image");
        return a;
    }
    return dpir::estimate_weight(f, weight_spec_from(cfg));
}

// ---------------------------------------------------------------------------
// denoise

struct DenoiseArgs {
    std::string input, out_dir = "denoise_out", model = "double_phase", mode = "weight",
                weight = "estimate";
    double epsilon = 0.1, lambda = 1.0, spacing = 0.0, tol = 1e-6;
    long max_iters = 20000, trace_every = 25, depth = 8;
    CLI::Option *input_o = nullptr, *out_dir_o = nullptr, *model_o = nullptr, *mode_o = nullptr,
                *weight_o = nullptr, *epsilon_o = nullptr, *lambda_o = nullptr,
                *spacing_o = nullptr, *tol_o = nullptr, *max_iters_o = nullptr,
                *trace_every_o = nullptr, *depth_o = nullptr;
};

int cmd_denoise(const Cfg& cfg, const DenoiseArgs& a) {
    const std::string input = cfg.str(a.input_o, a.input, "denoise.input", "");
    if (input.empty()) throw std::runtime_error("denoise: no input image given (--input)");
    const std::string out_dir = cfg.str(a.out_dir_o, a.out_dir, "denoise.out_dir", "denoise_out");
    const std::string model = cfg.str(a.model_o, a.model, "denoise.model", "double_phase");
    if (model != "rof" && model != "double_phase" && model != "i_eps")
        throw std::runtime_error("denoise: model must be rof, double_phase, or i_eps");
    const double epsilon = cfg.num(a.epsilon_o, a.epsilon, "denoise.epsilon", 0.1);
    const dpir::RegularizationMode mode =
        parse_mode(cfg.str(a.mode_o, a.mode, "denoise.mode", "weight"));
    const double lambda = cfg.num(a.lambda_o, a.lambda, "denoise.lambda", 1.0);
    const double spacing = cfg.num(a.spacing_o, a.spacing, "denoise.spacing", 0.0);
    const long depth = cfg.integer(a.depth_o, a.depth, "denoise.depth", 8);
    const std::string weight_src = cfg.str(a.weight_o, a.weight, "weight.source", "estimate");

    dpir::SolveOptions opts;
    opts.tol = cfg.num(a.tol_o, a.tol, "solve.tol", 1e-6);
    opts.max_iters = static_cast<int>(cfg.integer(a.max_iters_o, a.max_iters, "solve.max_iters", 20000));
    opts.trace_every = static_cast<int>(cfg.integer(a.trace_every_o, a.trace_every, "solve.trace_every", 25));

    // Read and validate everything before writing anything.
    const dpir::ScalarField f = dpir::read_image(input, spacing);
    dpir::ScalarField a_field = model == "rof"
                                    ? dpir::ScalarField(f.width, f.height, f.spacing, 0.0)
                                    : load_or_estimate_weight(cfg, weight_src, f);

    dpir::SolveResult res;
    if (model == "rof") {
        res = dpir::rof_baseline(f, lambda, opts);
    } else if (model == "double_phase") {
        res = dpir::minimize_I(f, a_field, opts);
    } else {
        res = dpir::minimize_I_eps(f, a_field, epsilon, mode, opts);
    }

    fs::create_directories(out_dir);
    const std::string restored_path = (fs::path(out_dir) / "restored.pgm").string();
    const std::string weight_path = (fs::path(out_dir) / "weight.pgm").string();
    const std::string report_path = (fs::path(out_dir) / "report.json").string();
    const std::string trace_path = (fs::path(out_dir) / "trace.csv").string();
    dpir::write_image(restored_path, res.minimizer, static_cast<int>(depth));
    dpir::write_image(weight_path, a_field, static_cast<int>(depth));
    write_trace_csv(trace_path, res);

    ordered_json j;
    j["command"] = "denoise";
    j["input"] = input;
    j["model"] = model;
    if (model == "i_eps") {
        j["epsilon"] = epsilon;
        j["mode"] = mode_name(mode);
    }
    if (model == "rof") j["lambda"] = lambda;
    j["converged"] = res.converged;
    j["iterations"] = res.iterations;
    j["tol_used"] = res.tol_used;
    j["certificate"] = res.certificate;
    j["energy"] = {{"tv_part", res.report.tv_part},
                   {"weighted_part", res.report.weighted_part},
                   {"fidelity_part", res.report.fidelity_part},
                   {"regularizer_surplus", res.report.regularizer_surplus},
                   {"total", res.report.total},
                   {"epsilon", res.report.epsilon}};
    j["staircase_metric"] = dpir::staircase_metric(res.minimizer);
    // Bare file names: the report lives next to the files it describes.
    j["outputs"] = {{"restored", "restored.pgm"}, {"weight", "weight.pgm"}, {"trace", "trace.csv"}};
    write_text(report_path, j.dump(2) + "\n");

    if (res.converged) {
        std::printf("converged in %d iterations (certificate %.3e); outputs in %s\n",
                    res.iterations, res.certificate, out_dir.c_str());
        return 0;
    }
    std::printf("did not converge in %d iterations (certificate %.3e); best iterate written to %s\n",
                res.iterations, res.certificate, out_dir.c_str());
    return 2;
}

// ---------------------------------------------------------------------------
// gamma-sweep

struct GammaArgs {
    std::string input, weight, out_dir = "gamma_out", eps_list = "1e-1,1e-2,1e-3,1e-4",
                mode = "weight";
    double spacing = 0.0, tol = 1e-7;
    long size = 64, max_iters = 40000;
    bool override_boundary = false;
    CLI::Option *input_o = nullptr, *weight_o = nullptr, *out_dir_o = nullptr,
                *eps_list_o = nullptr, *mode_o = nullptr, *spacing_o = nullptr, *tol_o = nullptr,
                *size_o = nullptr, *max_iters_o = nullptr, *override_o = nullptr;
};

int cmd_gamma_sweep(const Cfg& cfg, const GammaArgs& a, std::uint64_t seed) {
    const std::string out_dir = cfg.str(a.out_dir_o, a.out_dir, "gamma.out_dir", "gamma_out");
    const std::string input = cfg.str(a.input_o, a.input, "gamma.input", "");
    const std::string weight_src = cfg.str(a.weight_o, a.weight, "gamma.weight", "");
    const dpir::RegularizationMode mode =
        parse_mode(cfg.str(a.mode_o, a.mode, "gamma.mode", "weight"));
    const bool override_boundary =
        cfg.flag(a.override_o, a.override_boundary, "gamma.override_boundary", false);

    std::vector<double> eps;
    for (const std::string& s : split_list(cfg.str(a.eps_list_o, a.eps_list, "gamma.eps_list",
                                                   "1e-1,1e-2,1e-3,1e-4")))
        eps.push_back(parse_number(s, "gamma.eps_list"));

    dpir::SolveOptions opts;
    opts.tol = cfg.num(a.tol_o, a.tol, "solve.tol", 1e-7);
    opts.max_iters = static_cast<int>(cfg.integer(a.max_iters_o, a.max_iters, "solve.max_iters", 40000));
    opts.trace_every = 0;

    // Default instance: the canonical two-region image on the coarse grid
    // with the matched edge-vanishing weight.
    dpir::ScalarField f, aw;
    if (input.empty()) {
        const long size = cfg.integer(a.size_o, a.size, "gamma.size", 64);
        const double spacing = cfg.num(a.spacing_o, a.spacing, "gamma.spacing", 0.2);
        f = dpir::synth_two_region(static_cast<int>(size), seed, spacing);
        aw = weight_src.empty()
                 ? dpir::two_region_edge_weight(static_cast<int>(size), spacing)
                 : dpir::read_image(weight_src, f.spacing);
    } else {
        const double spacing = cfg.num(a.spacing_o, a.spacing, "gamma.spacing", 0.0);
        f = dpir::read_image(input, spacing);
        aw = load_or_estimate_weight(cfg, weight_src, f);
    }
    if (aw.width != f.width || aw.height != f.height)
        throw std::runtime_error("gamma-sweep: weight dimensions do not match the image");

    const dpir::GammaSweepRun run = dpir::gamma_sweep_full(f, aw, eps, opts, override_boundary, mode);

    fs::create_directories(out_dir);
    dpir::CsvTable sweep({"epsilon", "delta", "minimizer_energy_eps", "minimizer_energy_I",
                          "recovery_energy", "target_energy", "iterations", "flagged",
                          "resolution_limited", "l1_minimizer", "l1_recovery"});
    int flagged = 0;
    for (const auto& r : run.records) {
        flagged += r.flagged ? 1 : 0;
        sweep.add_row({dpir::csv_number(r.epsilon), dpir::csv_number(r.delta),
                       dpir::csv_number(r.minimizer_energy_eps),
                       dpir::csv_number(r.minimizer_energy_I),
                       dpir::csv_number(r.recovery_energy), dpir::csv_number(r.target_energy),
                       dpir::csv_number(r.iterations), dpir::csv_number(int(r.flagged)),
                       dpir::csv_number(int(r.resolution_limited)),
                       dpir::csv_number(r.l1_minimizer), dpir::csv_number(r.l1_recovery)});
    }
    sweep.save((fs::path(out_dir) / "sweep.csv").string());

    dpir::CsvTable recovery({"epsilon", "delta", "sup_grad", "c", "coupling_pow", "coupling_sq",
                             "eps_delta_ratio", "l1_distance", "resolution_limited"});
    for (const auto& r : run.recovery.rows)
        recovery.add_row({dpir::csv_number(r.epsilon), dpir::csv_number(r.delta),
                          dpir::csv_number(r.sup_grad), dpir::csv_number(r.c),
                          dpir::csv_number(r.coupling_pow), dpir::csv_number(r.coupling_sq),
                          dpir::csv_number(r.eps_delta_ratio), dpir::csv_number(r.l1_distance),
                          dpir::csv_number(int(r.resolution_limited))});
    recovery.save((fs::path(out_dir) / "recovery.csv").string());

    dpir::write_image((fs::path(out_dir) / "reference.pgm").string(), run.reference.minimizer, 16);
    for (std::size_t i = 0; i < run.recovery.fields.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "recovery_%02zu.pgm", i);
        dpir::write_image((fs::path(out_dir) / name).string(), run.recovery.fields[i], 16);
    }

    std::string summary;
    if (run.records.size() < 2) {
        summary += "insufficient sweep: one epsilon supports no limit claims\n";
    } else {
        const double target = run.records.front().target_energy;
        double min_rec = run.records.front().recovery_energy;
        bool mono = true;
        for (std::size_t i = 0; i < run.records.size(); ++i) {
            min_rec = std::min(min_rec, run.records[i].recovery_energy);
            if (i && run.records[i].minimizer_energy_eps >
                         run.records[i - 1].minimizer_energy_eps * (1.0 + 1e-9))
                mono = false;
        }
        summary += std::string("recovery bound: ") +
                   (min_rec <= 1.05 * target ? "PASS" : "FAIL") + " (min recovery " +
                   dpir::csv_number(min_rec) + " vs 1.05 * target " + dpir::csv_number(target) +
                   ")\n";
        const double last_pow = run.recovery.rows.back().coupling_pow;
        summary += std::string("coupling (c/delta^n)^eps -> 1: ") +
                   (std::fabs(last_pow - 1.0) <= 0.10 ? "PASS" : "FAIL") + " (last row " +
                   dpir::csv_number(last_pow) + ")\n";
        bool decade_ok = true;
        for (std::size_t i = 1; i < run.recovery.rows.size(); ++i) {
            const double expect = std::pow(run.records[i - 1].epsilon / run.records[i].epsilon,
                                           1.0 / 3.0);
            const double got = run.recovery.rows[i - 1].eps_delta_ratio /
                               run.recovery.rows[i].eps_delta_ratio;
            if (std::fabs(got / expect - 1.0) > 0.05) decade_ok = false;
        }
        summary += std::string("eps*delta^(-2n) decay rate: ") + (decade_ok ? "PASS" : "FAIL") +
                   "\n";
        summary += std::string("minimizer energies non-increasing: ") + (mono ? "PASS" : "FAIL") +
                   "\n";
    }
    if (flagged > 0)
        summary += "warning: " + std::to_string(flagged) +
                   " row(s) did not certify convergence (flagged in sweep.csv)\n";
    write_text((fs::path(out_dir) / "summary.txt").string(), summary);
    std::fputs(summary.c_str(), stdout);
    std::printf("outputs in %s\n", out_dir.c_str());
    return flagged > 0 ? 2 : 0;
}

// ---------------------------------------------------------------------------
// maximal

struct MaximalArgs {
    std::string out_dir = "maximal_out", resolutions = "64,128,256,512";
    double alpha = 0.75, sigma = 1.0, p = 3.0;
    CLI::Option *out_dir_o = nullptr, *resolutions_o = nullptr, *alpha_o = nullptr,
                *sigma_o = nullptr, *p_o = nullptr;
};

int cmd_maximal(const Cfg& cfg, const MaximalArgs& a) {
    const std::string out_dir = cfg.str(a.out_dir_o, a.out_dir, "maximal.out_dir", "maximal_out");
    const double alpha = cfg.num(a.alpha_o, a.alpha, "maximal.alpha", 0.75);
    const double sigma = cfg.num(a.sigma_o, a.sigma, "maximal.sigma", 1.0);
    const double p = cfg.num(a.p_o, a.p, "maximal.p", 3.0);
    std::vector<int> resolutions;
    for (const std::string& s : split_list(cfg.str(a.resolutions_o, a.resolutions,
                                                   "maximal.resolutions", "64,128,256,512")))
        resolutions.push_back(static_cast<int>(parse_integer(s, "maximal.resolutions")));

    const double p_star = dpir::threshold_p(2, sigma, alpha);
    const dpir::LpResult res = dpir::lp_experiment(alpha, sigma, p, resolutions);

    fs::create_directories(out_dir);
    dpir::CsvTable t({"resolution", "integral"});
    for (const auto& row : res.rows)
        t.add_row({dpir::csv_number(row.resolution), dpir::csv_number(row.integral)});
    t.save((fs::path(out_dir) / "lp.csv").string());

    char line[160];
    std::string summary;
    std::snprintf(line, sizeof(line), "p* = %g\n", p_star);
    summary += line;
    std::snprintf(line, sizeof(line), "p = %g, alpha = %g, sigma = %g\n", p, alpha, sigma);
    summary += line;
    std::snprintf(line, sizeof(line), "slope = %s\n", dpir::csv_number(res.slope).c_str());
    summary += line;
    // Past the threshold exponent the truncated integral grows like a genuine
    // power of the resolution (at least res^(1/8) for the exponents of
    // interest, measured well above 0.2 at these grids), while on the
    // integrable side the fitted slope is pure preasymptotic drift that decays
    // like res^(-1/4).  0.2 separates the two regimes at the default grids.
    summary += res.slope < 0.2 ? "slope ≈ 0: integrable side\n" : "slope > 0: divergent side\n";
    write_text((fs::path(out_dir) / "summary.txt").string(), summary);
    std::fputs(summary.c_str(), stdout);
    std::printf("outputs in %s\n", out_dir.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dpir: double phase image restoration toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    std::uint64_t seed = 0;
    app.add_option("--config", config_path, "configuration file ([section] key = value)");
    app.add_option("--override", overrides, "override a config entry: section.key=value");
    app.add_option("--seed", seed, "seed for synthetic inputs (default 0)");

    CLI::App* synth = app.add_subcommand("synth", "write a deterministic synthetic image");
    synth->fallthrough();
    SynthArgs sa;
    sa.kind_o = synth->add_option("--kind", sa.kind, "step | ramp | disk | ramp-noise | two-region");
    sa.size_o = synth->add_option("--size", sa.size, "image side length");
    sa.spacing_o = synth->add_option("--spacing", sa.spacing, "pixel spacing (0 = 1/size)");
    sa.out_o = synth->add_option("--out", sa.out, "output image path (.pgm or .png)");
    sa.depth_o = synth->add_option("--depth", sa.depth, "stored bit depth, 8 or 16");

    CLI::App* den = app.add_subcommand("denoise", "restore an image");
    den->fallthrough();
    DenoiseArgs da;
    da.input_o = den->add_option("--input", da.input, "input image (PGM or grayscale PNG)");
    da.out_dir_o = den->add_option("--out-dir", da.out_dir, "output directory");
    da.model_o = den->add_option("--model", da.model, "rof | double_phase | i_eps");
    da.epsilon_o = den->add_option("--epsilon", da.epsilon, "epsilon for the i_eps model");
    da.mode_o = den->add_option("--mode", da.mode, "exponent | weight | combined (i_eps)");
    da.lambda_o = den->add_option("--lambda", da.lambda, "fidelity weight for rof");
    da.weight_o = den->add_option("--weight", da.weight, "'estimate' or path to a weight image");
    da.spacing_o = den->add_option("--spacing", da.spacing, "pixel spacing (0 = 1/max(w,h))");
    da.tol_o = den->add_option("--tol", da.tol, "relative certificate tolerance");
    da.max_iters_o = den->add_option("--max-iters", da.max_iters, "iteration budget");
    da.trace_every_o = den->add_option("--trace-every", da.trace_every, "trace row stride");
    da.depth_o = den->add_option("--depth", da.depth, "output bit depth, 8 or 16");

    CLI::App* gam = app.add_subcommand("gamma-sweep", "regularization sweep against the limit");
    gam->fallthrough();
    GammaArgs ga;
    ga.input_o = gam->add_option("--input", ga.input, "input image (default: built-in instance)");
    ga.weight_o = gam->add_option("--weight", ga.weight, "weight image path");
    ga.out_dir_o = gam->add_option("--out-dir", ga.out_dir, "output directory");
    ga.eps_list_o = gam->add_option("--eps-list", ga.eps_list, "comma-separated decreasing epsilons");
    ga.mode_o = gam->add_option("--mode", ga.mode, "exponent | weight | combined");
    ga.size_o = gam->add_option("--size", ga.size, "built-in instance side length");
    ga.spacing_o = gam->add_option("--spacing", ga.spacing, "pixel spacing");
    ga.tol_o = gam->add_option("--tol", ga.tol, "relative certificate tolerance");
    ga.max_iters_o = gam->add_option("--max-iters", ga.max_iters, "iteration budget");
    ga.override_o = gam->add_flag("--override-boundary", ga.override_boundary,
                                  "run even if the weight vanishes on part of the boundary");

    CLI::App* mx = app.add_subcommand("maximal", "L^p experiment for the capped maximal function");
    mx->fallthrough();
    MaximalArgs ma;
    ma.alpha_o = mx->add_option("--alpha", ma.alpha, "fractional order, 0 < alpha < n - sigma");
    ma.sigma_o = mx->add_option("--sigma", ma.sigma, "cap exponent (plane experiment needs 1)");
    ma.p_o = mx->add_option("--p", ma.p, "integrability exponent");
    ma.resolutions_o = mx->add_option("--resolutions", ma.resolutions,
                                      "comma-separated increasing grid sizes");
    ma.out_dir_o = mx->add_option("--out-dir", ma.out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        Cfg cfg;
        if (!config_path.empty()) cfg.kv = parse_config_file(config_path);
        for (const std::string& o : overrides) apply_override(cfg.kv, o);
        if (app.got_subcommand(synth)) return cmd_synth(cfg, sa, seed);
        if (app.got_subcommand(den)) return cmd_denoise(cfg, da);
        if (app.got_subcommand(gam)) return cmd_gamma_sweep(cfg, ga, seed);
        if (app.got_subcommand(mx)) return cmd_maximal(cfg, ma);
        std::fprintf(stderr, "error: no subcommand\n");
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
