#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "lgi/errors.hpp"
#include "lgi/optimizer.hpp"
#include "lgi/protocol.hpp"

namespace lgi::cli {

namespace {

std::string real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void line(std::ostream& out, std::string_view key, const std::string& value) {
    out << key << ' ' << value << '\n';
}

std::array<double, 3> triple(const std::vector<double>& v, std::string_view flag) {
    if (v.size() != 3) {
        throw ConfigError(std::string(flag) + " expects three comma-separated values");
    }
    return {v[0], v[1], v[2]};
}

struct StateOptions {
    std::optional<double> alpha;
    std::vector<double> bloch;

    DensityMatrix build() const {
        if (alpha) return pure_state(*alpha);
        if (!bloch.empty()) {
            const auto m = triple(bloch, "--bloch");
            return mixed_state({m[0], m[1], m[2]});
        }
        throw ConfigError("a state is required: --alpha A or --bloch mx,my,mz");
    }
};

void add_state_options(CLI::App* app, StateOptions& s) {
    auto* alpha = app->add_option("--alpha", s.alpha, "pure state alpha|0> + sqrt(1-alpha^2)|1>");
    auto* bloch = app->add_option("--bloch", s.bloch, "Bloch vector mx,my,mz")->delimiter(',');
    alpha->excludes(bloch);
}

struct ModelOptions {
    std::string model = "none";
    double gamma = 0.0;
    std::vector<double> axis{0.0, 0.0, 1.0};

    DephasingModel build() const {
        return DephasingModel::make(parse_dephasing_kind(model), gamma, triple(axis, "--axis"));
    }
};

void add_model_options(CLI::App* app, ModelOptions& m) {
    app->add_option("--model", m.model, "none, z, x, diag45 or axis")->capture_default_str();
    app->add_option("--gamma", m.gamma, "dephasing rate hbar*gamma/J")->capture_default_str();
    app->add_option("--axis", m.axis, "dephasing axis nx,ny,nz (model axis)")->delimiter(',');
}

void add_search_options(CLI::App* app, SearchConfig& s) {
    app->add_option("--theta-points", s.theta_points)->capture_default_str();
    app->add_option("--phi-points", s.phi_points)->capture_default_str();
    app->add_option("--dt-points", s.dt_points)->capture_default_str();
    app->add_option("--dt-max", s.dt_max, "upper end of the dt window, hbar/J")
        ->capture_default_str();
    app->add_option("--refine-iterations", s.refine_iterations)->capture_default_str();
    app->add_option("--refine-starts", s.refine_starts)->capture_default_str();
}

struct SweepOptions {
    std::string family = "pure_alpha";
    double family_min = 0.0;
    double family_max = 1.0;
    int family_count = 101;
    double delta_min = -1.0;
    double delta_max = 1.0;
    int delta_count = 101;
    std::vector<double> gammas;
    std::string model = "none";
    std::vector<double> axis{0.0, 0.0, 1.0};
    std::vector<double> fixed{0.0, 0.0, 0.0};
    std::string vary = "z";
    SearchConfig search;
    double tolerance = 1e-4;
    std::string output;
    std::string format = "csv";
    std::optional<int> jobs;
};

void add_sweep_options(CLI::App* app, SweepOptions& o) {
    app->set_config("--config", "", "key = value file; keys are the flag names");
    app->allow_config_extras(CLI::config_extras_mode::error);
    app->add_option("--family", o.family, "pure_alpha, bloch_mx, bloch_mz or bloch_general")
        ->capture_default_str();
    app->add_option("--family-min", o.family_min)->capture_default_str();
    app->add_option("--family-max", o.family_max)->capture_default_str();
    app->add_option("--family-count", o.family_count)->capture_default_str();
    app->add_option("--delta-min", o.delta_min, "units of J")->capture_default_str();
    app->add_option("--delta-max", o.delta_max, "units of J")->capture_default_str();
    app->add_option("--delta-count", o.delta_count)->capture_default_str();
    app->add_option("--gamma", o.gammas, "comma-separated hbar*gamma/J values")->delimiter(',');
    app->add_option("--model", o.model, "none, z, x, diag45 or axis")->capture_default_str();
    app->add_option("--axis", o.axis, "dephasing axis nx,ny,nz (model axis)")->delimiter(',');
    app->add_option("--fixed", o.fixed, "bloch_general fixed components mx,my,mz")
        ->delimiter(',');
    app->add_option("--vary", o.vary, "bloch_general varied component x, y or z")
        ->capture_default_str();
    add_search_options(app, o.search);
    app->add_option("--tolerance", o.tolerance, "constraint half-width, units of J")
        ->capture_default_str();
    app->add_option("--output", o.output, "output file (default: stdout)");
    app->add_option("--format", o.format, "csv or json")->capture_default_str();
    app->add_option("--jobs", o.jobs, "worker threads (default: $LG_JOBS or all cores)");
}

SweepSpec build_spec(const SweepOptions& o) {
    SweepSpec spec;
    spec.family = parse_state_family(o.family);
    spec.family_grid = {o.family_min, o.family_max, o.family_count};
    spec.delta_grid = {o.delta_min, o.delta_max, o.delta_count};
    spec.model = parse_dephasing_kind(o.model);
    spec.gammas = o.gammas.empty() ? default_gammas(spec.model) : o.gammas;
    spec.axis = triple(o.axis, "--axis");
    const auto fixed = triple(o.fixed, "--fixed");
    spec.fixed = {fixed[0], fixed[1], fixed[2]};
    if (o.vary == "x") {
        spec.vary_axis = 0;
    } else if (o.vary == "y") {
        spec.vary_axis = 1;
    } else if (o.vary == "z") {
        spec.vary_axis = 2;
    } else {
        throw ConfigError("--vary expects x, y or z");
    }
    spec.search = o.search;
    spec.tolerance = o.tolerance;
    spec.validate();
    return spec;
}

int resolve_jobs(const std::optional<int>& flag) {
    if (flag) return *flag;
    if (const char* env = std::getenv("LG_JOBS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0') {
            throw ConfigError("LG_JOBS must be an integer");
        }
        return static_cast<int>(v);
    }
    return 0;
}

std::vector<double> delta_scan(double lo, double hi, double step) {
    if (!(step > 0.0) || !(hi >= lo)) {
        throw ConfigError("delta scan needs step > 0 and max >= min");
    }
    return uniform_grid(lo, hi, static_cast<int>(std::lround((hi - lo) / step)) + 1);
}

void print_outcome(std::ostream& out, const LGOutcome& o) {
    line(out, "c12", real(o.c12));
    line(out, "c23", real(o.c23));
    line(out, "c13", real(o.c13));
    line(out, "k3", real(o.k3));
    line(out, "delta_e12", real(o.delta_e12));
    line(out, "delta_e23", real(o.delta_e23));
    line(out, "delta_e13", real(o.delta_e13));
    line(out, "delta_e_avg", real(o.delta_e_avg));
}

void parse(CLI::App& app, const std::vector<std::string>& args) {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
}

}  // namespace

SweepSpec parse_sweep_spec(const std::vector<std::string>& args) {
    CLI::App app{"sweep"};
    SweepOptions options;
    add_sweep_options(&app, options);
    try {
        parse(app, args);
    } catch (const CLI::ParseError& e) {
        throw ConfigError(e.what());
    }
    return build_spec(options);
}

namespace {

// Runs as its own top-level app: CLI11 reads --config files only there.
int sweep_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Heatmap sweep over (family value, delta, gamma) to CSV or JSON", "lgi sweep"};
    SweepOptions options;
    add_sweep_options(&app, options);
    try {
        parse(app, args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kInputError;
    }
    try {
        const SweepSpec spec = build_spec(options);
        if (options.format != "csv" && options.format != "json") {
            throw ConfigError("--format expects csv or json");
        }
        const auto cells = run_sweep(spec, resolve_jobs(options.jobs),
                                     [&err](const std::string& msg) { err << msg << '\n'; });
        const bool json = options.format == "json";
        if (options.output.empty()) {
            out << (json ? to_json(cells) : to_csv(cells, resolution_comment(spec)));
        } else if (json) {
            export_json(cells, options.output);
        } else {
            export_csv(cells, options.output, resolution_comment(spec));
        }
        return kOk;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
    }
    return kInputError;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    if (!args.empty() && args.front() == "sweep") {
        return sweep_command({args.begin() + 1, args.end()}, out, err);
    }

    CLI::App app{"Leggett-Garg K3 under energy constraints and dephasing", "lgi"};
    app.require_subcommand(1);

    StateOptions state;
    ModelOptions model;
    SearchConfig search;
    double theta = 0.0;
    double phi = 0.0;
    double dt = 0.5;
    double delta = 0.0;
    double tolerance = 1e-4;

    auto* k3 = app.add_subcommand("k3", "single protocol run");
    add_state_options(k3, state);
    add_model_options(k3, model);
    k3->add_option("--theta", theta)->capture_default_str();
    k3->add_option("--phi", phi)->capture_default_str();
    k3->add_option("--dt", dt, "measurement interval, hbar/J")->capture_default_str();

    auto* optimize = app.add_subcommand("optimize", "K3 maximized at fixed energy cost");
    add_state_options(optimize, state);
    add_model_options(optimize, model);
    add_search_options(optimize, search);
    optimize->add_option("--delta", delta, "energy cost, units of J")->required();
    optimize->add_option("--tolerance", tolerance)->capture_default_str();

    std::optional<double> feasible_delta;
    bool numeric = false;
    auto* feasible = app.add_subcommand("feasible", "reachable energy costs");
    add_state_options(feasible, state);
    add_model_options(feasible, model);
    add_search_options(feasible, search);
    feasible->add_option("--delta", feasible_delta, "test one energy cost");
    feasible->add_option("--tolerance", tolerance)->capture_default_str();
    feasible->add_flag("--numeric", numeric, "force the numeric scan");

    std::string theorem;
    double delta_min = -1.0;
    double delta_max = 1.0;
    double delta_step = 0.01;
    auto* verify = app.add_subcommand("verify", "locate the K3_opt maximum over delta");
    add_state_options(verify, state);
    add_model_options(verify, model);
    add_search_options(verify, search);
    verify->add_option("--theorem", theorem, "1, 2 or shift")
        ->required()
        ->check(CLI::IsMember({"1", "2", "shift"}));
    verify->add_option("--delta-min", delta_min)->capture_default_str();
    verify->add_option("--delta-max", delta_max)->capture_default_str();
    verify->add_option("--delta-step", delta_step)->capture_default_str();
    verify->add_option("--tolerance", tolerance)->capture_default_str();

    app.add_subcommand("sweep", "heatmap sweep to CSV or JSON (see lgi sweep --help)");

    try {
        parse(app, args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kInputError;
    }

    try {
        if (k3->parsed()) {
            const MeasurementSetting setting(theta, phi);
            print_outcome(out, lg_run(state.build(), setting, model.build(), dt));
            return kOk;
        }

        if (optimize->parsed()) {
            const auto r = k3_opt(state.build(), model.build(), {delta, tolerance}, search);
            line(out, "feasible", r.feasible ? "true" : "false");
            if (r.feasible) {
                line(out, "k3_opt", real(*r.k3_opt));
                line(out, "theta_star", real(r.argmax->theta));
                line(out, "phi_star", real(r.argmax->phi));
                line(out, "dt_star", real(r.argmax->dt));
            } else {
                line(out, "k3_opt", "infeasible");
            }
            line(out, "residual", real(r.constraint_residual));
            line(out, "evaluations", std::to_string(r.evaluations));
            return kOk;
        }

        if (feasible->parsed()) {
            const DensityMatrix rho = state.build();
            const DephasingModel m = model.build();
            const bool closed = state.alpha && m.kind() == DephasingKind::None;
            if (closed) {
                const EnergyBand b = feasible_bounds_pure(*state.alpha);
                line(out, "band_closed_form", real(b.lower) + ' ' + real(b.upper));
            }
            if (!closed || numeric || feasible_delta) {
                const CanonicalProblem problem(rho, m, search);
                const EnergyBand& b = problem.energy_band();
                line(out, "band_numeric", real(b.lower) + ' ' + real(b.upper));
                if (feasible_delta) {
                    const auto f = problem.feasibility({*feasible_delta, tolerance});
                    line(out, "feasible", f.feasible ? "true" : "false");
                    if (f.witness) {
                        line(out, "witness", real(f.witness->theta) + ' ' + real(f.witness->phi) +
                                                 ' ' + real(f.witness->dt));
                    }
                    line(out, "residual", real(f.residual));
                }
            }
            return kOk;
        }

        if (verify->parsed()) {
            const DephasingModel m = model.build();
            if (theorem == "1" && m.kind() != DephasingKind::None) {
                throw ConfigError("--theorem 1 is the noiseless statement; use --model none");
            }
            const std::vector<double> grid = delta_scan(delta_min, delta_max, delta_step);
            const MaxLineReport r =
                verify_theorem_max_line(state.build(), m, grid, search, tolerance);
            line(out, "theorem", theorem);
            line(out, "predicted_delta", real(r.predicted_delta));
            if (r.degenerate) {
                line(out, "degenerate", "true");
                line(out, "result", "fail");
                return kVerificationFailed;
            }
            line(out, "argmax_delta", real(r.argmax_delta));
            line(out, "deviation", real(r.deviation));
            line(out, "grid_step", real(r.grid_step));
            line(out, "shifted", r.shifted ? "true" : "false");
            line(out, "k3_at_argmax", real(r.k3_at_argmax));
            line(out, "k3_on_line", r.k3_on_line ? real(*r.k3_on_line) : "infeasible");
            bool pass = theorem == "shift" ? r.shifted : !r.shifted;
            if (theorem == "1") {
                pass = pass && r.k3_on_line && std::abs(*r.k3_on_line - 1.5) <= 1e-3;
            }
            line(out, "result", pass ? "pass" : "fail");
            return pass ? kOk : kVerificationFailed;
        }
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }
    return kInputError;
}

}  // namespace lgi::cli
