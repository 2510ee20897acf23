// dqdnoise: batch front end for spectrum, sweep, steady and check.
//
// Exit codes: 0 ok, 1 unexpected, 2 configuration, 3 numerical, 4 invariant failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dqdnoise/check.hpp"
#include "dqdnoise/io.hpp"
#include "dqdnoise/noise.hpp"
#include "dqdnoise/steady.hpp"
#include "dqdnoise/sweep.hpp"

using namespace dqdnoise;

namespace {

struct Flags {
    std::string config;
    std::string preset;
    std::string out;
    std::string format;
    int fock_cutoff{0};
    int workers{0};
    std::string methods;
    std::string check;
};

RunConfig resolve(const Flags& f) {
    RunConfig c = f.config.empty() ? RunConfig{} : parse_config(f.config);
    if (!f.preset.empty()) {
        if (!c.preset.empty() && c.preset != f.preset)
            throw ConfigError("--preset " + f.preset + " conflicts with preset '" + c.preset + "' in the config file");
        if (c.preset.empty() && (c.model != ModelParams{} || c.sweep))
            throw ConfigError("--preset " + f.preset + " conflicts with model/sweep keys in the config file; use one source of truth");
        std::string text = "preset = " + f.preset + "\n";
        RunConfig p = parse_config_text(text, "--preset");
        p.spectrum = c.spectrum;
        p.output_path = c.output_path;
        p.format = c.format;
        p.methods = c.methods;
        p.check = c.check;
        p.workers = c.workers;
        c = p;
    }
    if (!f.out.empty()) c.output_path = f.out;
    if (!f.format.empty()) {
        if (f.format == "csv") c.format = OutputFormat::csv;
        else if (f.format == "json") c.format = OutputFormat::json;
        else throw ConfigError("--format: expected csv or json");
    }
    if (f.fock_cutoff != 0) {
        if (f.fock_cutoff < 1) throw ConfigError("--fock-cutoff: must be >= 1");
        c.model.n_fock = f.fock_cutoff;
        if (c.sweep) c.sweep->fixed_cutoff = f.fock_cutoff;
    }
    if (f.workers != 0) {
        if (f.workers < 1) throw ConfigError("--workers: must be >= 1");
        c.workers = f.workers;
    }
    if (c.workers == 0) c.workers = default_workers();
    if (!f.methods.empty()) {
        c.methods.clear();
        for (const std::string& m : detail::split_list(f.methods)) {
            try {
                c.methods.push_back(method_from_string(m));
            } catch (const std::invalid_argument& e) {
                throw ConfigError(std::string("--methods: ") + e.what());
            }
        }
    }
    if (!f.check.empty()) {
        if (f.check == "fast") c.check = CheckLevel::fast;
        else if (f.check == "full") c.check = CheckLevel::full;
        else throw ConfigError("--check: expected fast or full");
    }
    return c;
}

void emit(const RunConfig& c, const std::string& text) {
    if (c.output_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(c.output_path, std::ios::binary);
    if (!out) throw ConfigError("cannot open output file " + c.output_path);
    out << text;
}

// Single-point model for spectrum/steady; presets use their base point at the converged cutoff.
ModelParams point_model(const RunConfig& c) {
    if (c.preset.empty() || !c.sweep) return c.model;
    ModelParams p = c.sweep->base;
    p.n_fock = sweep_cutoff(*c.sweep).cutoff;
    return p;
}

int cmd_spectrum(const RunConfig& c) {
    const ModelParams p = point_model(c);
    const SpectrumConfig& sc = c.spectrum;
    const std::vector<double> omegas = linspace(sc.start, sc.stop, sc.count);
    const Superoperator L = build_model_liouvillian(p);
    const SteadyState ss = solve_steady_state(L);
    ResolventSolver solver(L, ss);
    const double Ii = solver.current(sc.pair.i);

    std::vector<NoiseSpectrum> spectra;
    for (NoiseMethod m : c.methods) {
        NoiseSpectrum s{sc.pair, omegas, {}, sc.normalization, m};
        if (m == NoiseMethod::resolvent) {
            s = noise_spectrum_resolvent(solver, sc.pair, omegas, sc.normalization);
        } else if (m == NoiseMethod::eigen) {
            if (!sc.pair.diagonal()) throw ConfigError("methods: eigen expansion is defined for i = j pairs only");
            const EigenExpansion ex(L, sc.pair.i);
            for (double w : omegas) {
                const EigenNoiseValue v = noise_eigen_expansion(ex, w);
                if (v.warning)
                    std::cerr << "warning: eigen expansion imaginary residue " << v.imaginary_residue << " at omega = " << w << "\n";
                s.values.push_back(sc.normalization == Normalization::fano ? v.value : v.value * 2.0 * ex.current());
            }
        } else {
            MacDonaldOptions o = auto_macdonald_options(L);
            if (sc.t_max > 0) o.t_max = sc.t_max;
            o.dt = std::min(o.dt, sc.dt);
            for (double w : omegas)
                s.values.push_back(normalize_noise(noise_macdonald_oracle(L, ss, sc.pair.i, sc.pair.j, w, o).value, sc.pair,
                                                   sc.normalization, Ii));
        }
        spectra.push_back(std::move(s));
    }
    emit(c, c.format == OutputFormat::csv ? spectra_csv(spectra) : spectra_json(spectra, p));
    return 0;
}

int cmd_sweep(const RunConfig& c) {
    if (!c.sweep) throw ConfigError("sweep: give a preset or sweep.axis1.* keys");
    const GridResult g = run_sweep(*c.sweep, c.workers);
    if (!g.convergence.monotone) std::cerr << "warning: Fock convergence ladder was not monotone\n";
    for (const std::string& f : g.failures) std::cerr << "warning: point failed: " << f << "\n";
    emit(c, c.format == OutputFormat::csv ? grid_csv(g) : grid_json(g));
    return 0;
}

int cmd_steady(const RunConfig& c) {
    const ModelParams p = point_model(c);
    const Superoperator L = build_model_liouvillian(p);
    const SteadyState ss = solve_steady_state(L);
    emit(c, moment_json(moment_report(ss, L), p));
    return 0;
}

int cmd_check(const RunConfig& c) {
    std::vector<std::string> presets;
    if (!c.preset.empty()) presets.push_back(c.preset);
    const CheckReport rep =
        run_checks(c.check, presets, [](const std::string& name) { std::cerr << "checking " << name << "\n"; });
    const std::string table = rep.table();
    std::cout << table;
    if (!c.output_path.empty()) emit(c, table);
    return rep.all_passed() ? 0 : static_cast<int>(ErrorKind::invariant);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Steady states and finite-frequency current noise of a transport qubit coupled to a resonator"};
    app.require_subcommand(1);
    Flags flags;
    auto add_common = [&flags](CLI::App* sub) {
        sub->add_option("--config", flags.config, "config file (key = value lines, or JSON)");
        sub->add_option("--preset", flags.preset, "figure preset (fig2, fig3, fig4a, fig4b, fig5a, fig5b, fig5c, fig6a, fig6b, fig6c)");
        sub->add_option("--out", flags.out, "output path (default stdout)");
        sub->add_option("--format", flags.format, "csv or json");
        sub->add_option("--fock-cutoff", flags.fock_cutoff, "fixed Fock cutoff N_b (skips the convergence ladder)");
        sub->add_option("--workers", flags.workers, "worker threads (default $DQDNOISE_WORKERS or hardware concurrency)");
        sub->add_option("--methods", flags.methods, "comma list of resolvent, eigen, macdonald");
        sub->add_option("--check", flags.check, "check level: fast or full");
    };
    CLI::App* spectrum = app.add_subcommand("spectrum", "noise spectrum S(omega) for one parameter point");
    CLI::App* sweep = app.add_subcommand("sweep", "parameter grid or figure preset");
    CLI::App* steady = app.add_subcommand("steady", "steady state moments as JSON");
    CLI::App* check = app.add_subcommand("check", "invariant self-check suite");
    for (CLI::App* s : {spectrum, sweep, steady, check}) add_common(s);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(ErrorKind::config);
    }

    try {
        const RunConfig c = resolve(flags);
        std::cerr << kUnitsNote << "\n";
        if (spectrum->parsed()) return cmd_spectrum(c);
        if (sweep->parsed()) return cmd_sweep(c);
        if (steady->parsed()) return cmd_steady(c);
        return cmd_check(c);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(ErrorKind::config);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
