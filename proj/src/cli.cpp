#include "pseudoscope/cli.hpp"

#include <cmath>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pseudoscope/errors.hpp"
#include "pseudoscope/io.hpp"
#include "pseudoscope/text.hpp"

namespace pseudoscope::cli {

namespace {

using Json = nlohmann::ordered_json;

ConfigFile load_config(const CommonOptions& options, std::string_view section) {
    if (!options.config) {
        throw ConfigError("--config is required for the " + std::string(section) + " command");
    }
    ConfigFile file = ConfigFile::load(*options.config);
    file.require_section(section);
    return file;
}

void prepare_out(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) {
        throw Error("cannot create output directory " + dir.string());
    }
}

template <typename Write>
void write_stream_file(const std::filesystem::path& dir, const std::string& name, Write write) {
    std::ostringstream buffer;
    write(buffer);
    io::write_file(dir, name, buffer.str());
}

std::string config_path_text(const CommonOptions& options) {
    return options.config ? options.config->string() : std::string();
}

// Runs a command body and maps exceptions to exit codes.
template <typename Body>
int guarded(std::ostream& err, Body body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const InvalidArgument& e) {
        err << "invalid configuration: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DimensionMismatch& e) {
        err << "invalid configuration: " << e.what() << "\n";
        return kExitUsage;
    } catch (const TrialFailureCap& e) {
        err << "failure cap exceeded: " << e.what() << "\n";
        return kExitFailureCap;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitCheckFailed;
    }
}

std::size_t positive_size(const ConfigFile& file, std::string_view key, std::size_t fallback) {
    const std::size_t n = file.get_size(key, fallback);
    if (n == 0) {
        file.fail(file.require(key).line, "key '" + std::string(key) + "' must be positive");
    }
    return n;
}

double positive_double(const ConfigFile& file, std::string_view key, double fallback) {
    const double x = file.get_double(key, fallback);
    if (!(x > 0.0)) {
        file.fail(file.require(key).line, "key '" + std::string(key) + "' must be positive");
    }
    return x;
}

}  // namespace

ExperimentConfig experiment_config(const ConfigFile& file, std::optional<std::uint64_t> seed_override) {
    file.require_known({"structure", "d", "eps", "trials", "seed", "solver", "region", "tau"});
    ExperimentConfig cfg;
    cfg.structure = file.get_structure("structure");
    cfg.d = positive_size(file, "d", cfg.d);
    cfg.eps = positive_double(file, "eps", cfg.eps);
    cfg.trials = file.has("trials") ? positive_size(file, "trials", 1) : 0;
    cfg.seed = seed_override ? *seed_override : file.get_u64("seed", 0);
    const std::string solver = file.get_string("solver", "auto");
    if (solver != "auto") {
        try {
            cfg.solver = parse_solver_kind(solver);
        } catch (const Error& e) {
            file.fail(file.require("solver").line, e.what());
        }
    }
    const std::string region = file.get_string("region", "auto");
    if (region != "auto") {
        cfg.delta = positive_double(file, "region", 1.0);
    }
    if (file.has("tau")) {
        cfg.tau = positive_double(file, "tau", 1.0);
    }
    try {
        return resolve(cfg);
    } catch (const Error& e) {
        file.fail(file.require("structure").line, e.what());
    }
}

ScalingSettings scaling_settings(const ConfigFile& file, std::optional<std::uint64_t> seed_override) {
    file.require_known({"structure", "dims", "eps", "trials", "seed"});
    ScalingSettings s;
    s.structure = file.get_structure("structure");
    const auto& dims_entry = file.require("dims");
    s.dims = file.get_sizes("dims", {});
    if (s.dims.size() < 3) {
        file.fail(dims_entry.line, "key 'dims' needs at least three dimensions for a fit, got " +
                                       std::to_string(s.dims.size()));
    }
    s.eps = positive_double(file, "eps", s.eps);
    s.trials = positive_size(file, "trials", s.trials);
    s.seed = seed_override ? *seed_override : file.get_u64("seed", 0);
    for (std::size_t d : s.dims) {
        if (d < 16) {
            file.fail(dims_entry.line, "key 'dims': every dimension must be at least 16, got " + std::to_string(d));
        }
        ExperimentConfig probe;
        probe.structure = s.structure;
        probe.d = d;
        probe.eps = s.eps;
        probe.trials = s.trials;
        try {
            resolve(probe);
        } catch (const Error& e) {
            file.fail(dims_entry.line, "d = " + std::to_string(d) + ": " + e.what());
        }
    }
    return s;
}

TailSettings tail_settings(const ConfigFile& file, std::optional<std::uint64_t> seed_override) {
    file.require_known({"which", "d", "k", "t", "samples", "seed", "entries", "delta", "c"});
    TailSettings s;
    const auto& which_entry = file.require("which");
    s.which = which_entry.value;
    s.d = positive_size(file, "d", s.d);
    s.samples = positive_size(file, "samples", s.samples);
    s.seed = seed_override ? *seed_override : file.get_u64("seed", 0);
    const auto reject = [&](std::initializer_list<std::string_view> keys) {
        for (std::string_view key : keys) {
            if (const auto* e = file.find(key)) {
                file.fail(e->line, "key '" + std::string(key) + "' does not apply to which = " + s.which);
            }
        }
    };
    if (s.which == "norm") {
        reject({"k", "entries", "delta", "c"});
        s.t = file.get_doubles("t", {0.1, 0.3, 0.5});
    } else if (s.which == "hw" || s.which == "cw") {
        reject({"entries", "delta", "c"});
        s.k = file.get_size("k", s.which == "hw" ? s.d - 1 : 1);
        if (s.k >= s.d) {
            file.fail(file.require("k").line, "key 'k' must be below d");
        }
        if (s.which == "hw") {
            s.t = file.get_doubles("t", {0.0, 0.5, 1.0, 2.0, 4.0, 8.0});
        } else {
            std::vector<double> grid;
            for (int j = 0; j <= 8; ++j) {
                grid.push_back(1e-3 * std::pow(10.0, j / 4.0));
            }
            s.t = file.get_doubles("t", grid);
        }
    } else if (s.which == "qf-diag") {
        reject({"k", "delta", "c"});
        if (file.has("entries") && file.has("d")) {
            file.fail(file.require("d").line, "give either 'd' (identity) or 'entries', not both");
        }
        s.entries = file.get_complexes("entries", std::vector<Complex>(s.d, Complex(1.0)));
        s.d = s.entries.size();
        s.t = file.get_doubles("t", {0.0, 0.05, 0.1, 0.15, 0.2, 0.3});
    } else if (s.which == "corner") {
        reject({"k", "entries", "t"});
        if (file.has("delta") && file.has("c")) {
            file.fail(file.require("c").line, "give either 'delta' or 'c' (delta = c / d), not both");
        }
        s.delta = file.has("delta") ? positive_double(file, "delta", 1.0)
                                    : positive_double(file, "c", 3.0) / static_cast<double>(s.d);
        s.t = {s.delta};
    } else {
        file.fail(which_entry.line, "unknown which '" + s.which + "' (expected norm, hw, cw, qf-diag or corner)");
    }
    if (s.t.empty()) {
        file.fail(file.require("t").line, "key 't' is empty");
    }
    return s;
}

TailTable run_tails(const TailSettings& s, const ExecutionOptions& exec) {
    if (s.which == "norm") {
        return tail_norm_concentration(s.d, s.t, s.samples, s.seed, exec);
    }
    if (s.which == "hw") {
        return tail_hanson_wright(s.d, s.k, s.t, s.samples, s.seed, exec);
    }
    if (s.which == "cw") {
        return tail_carbery_wright(s.d, s.k, s.t, s.samples, s.seed, exec);
    }
    if (s.which == "qf-diag") {
        return tail_quadratic_form_diag(s.entries, s.t, s.samples, s.seed, exec);
    }
    if (s.which == "corner") {
        return corner_annulus_table(s.d, s.delta, s.samples, s.seed, exec);
    }
    throw InvalidArgument("unknown tail check '" + s.which + "'");
}

int cmd_experiment(const CommonOptions& options, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const ConfigFile file = load_config(options, "experiment");
        const ExperimentConfig cfg = experiment_config(file, options.seed);
        prepare_out(options.out);
        const ConcentrationReport report = run_experiment(cfg, {.threads = options.threads});

        write_stream_file(options.out, "eigenvalues.csv", [&](std::ostream& s) { io::write_eigenvalues_csv(s, report); });
        write_stream_file(options.out, "trials.csv", [&](std::ostream& s) { io::write_trials_csv(s, report); });
        io::write_file(options.out, "report.json", io::report_json(report, "eigenvalues.csv"));
        io::write_file(options.out, "scatter.svg", io::scatter_svg(report));
        io::write_manifest(options.out, "experiment", config_path_text(options), io::config_json(report.config),
                           {"eigenvalues.csv", "trials.csv", "report.json", "scatter.svg"});

        out << to_string(report.config.structure) << " d=" << report.config.d << " eps="
            << text::format_double(report.config.eps) << " trials=" << report.completed_trials << "/"
            << report.config.trials << " delta=" << text::format_double(*report.config.delta) << "\n"
            << "containment_fraction=" << text::format_double(report.containment_fraction)
            << " eigenvalue_containment_fraction=" << text::format_double(report.eigenvalue_containment_fraction)
            << " rescued_fraction=" << text::format_double(report.rescued_fraction) << "\n"
            << "deviation q50=" << text::format_double(report.deviation.q50)
            << " q90=" << text::format_double(report.deviation.q90)
            << " q99=" << text::format_double(report.deviation.q99)
            << " max=" << text::format_double(report.deviation.max) << "\n";
        return kExitOk;
    });
}

int cmd_scaling(const CommonOptions& options, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const ConfigFile file = load_config(options, "scaling");
        const ScalingSettings s = scaling_settings(file, options.seed);
        prepare_out(options.out);
        const ScalingFit fit = scaling_fit(s.structure, s.dims, s.eps, s.trials, s.seed, {.threads = options.threads});

        write_stream_file(options.out, "scaling.csv", [&](std::ostream& o) { io::write_scaling_csv(o, fit); });
        const std::string json = io::scaling_json(fit, s.structure, s.eps, s.trials, s.seed);
        io::write_file(options.out, "scaling.json", json);
        io::write_file(options.out, "scaling.svg", io::scaling_svg(fit));
        Json echo = Json::parse(json);
        echo.erase("points");
        io::write_manifest(options.out, "scaling", config_path_text(options), echo.dump(),
                           {"scaling.csv", "scaling.json", "scaling.svg"});

        for (const auto& p : fit.points) {
            out << "d=" << p.d << " median=" << text::format_double(p.median_deviation)
                << " q90=" << text::format_double(p.q90_deviation) << "\n";
        }
        out << "slope=" << text::format_double(fit.slope) << " intercept=" << text::format_double(fit.intercept)
            << "\n";
        return kExitOk;
    });
}

int cmd_tails(const CommonOptions& options, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const ConfigFile file = load_config(options, "tails");
        const TailSettings s = tail_settings(file, options.seed);
        prepare_out(options.out);
        const TailTable table = run_tails(s, {.threads = options.threads});

        write_stream_file(options.out, "tails.csv", [&](std::ostream& o) { io::write_tails_csv(o, table); });
        const std::string json = io::tails_json(table);
        io::write_file(options.out, "tails.json", json);
        io::write_manifest(options.out, "tails", config_path_text(options), json, {"tails.csv", "tails.json"});

        for (const auto& row : table.rows) {
            out << row.series << " t=" << text::format_double(row.t)
                << " empirical=" << text::format_double(row.empirical);
            if (!std::isnan(row.reference)) {
                out << " " << row.reference_kind << "=" << text::format_double(row.reference);
            }
            out << (row.pass ? "" : " (outside tolerance)") << "\n";
        }
        if (table.fitted) {
            out << table.fitted_name << "=" << text::format_double(*table.fitted) << "\n";
        }
        if (table.ks_statistic) {
            out << "ks=" << text::format_double(*table.ks_statistic)
                << " limit=" << text::format_double(*table.ks_limit) << "\n";
        }
        out << "verdict=" << (table.pass ? "pass" : "fail") << "\n";
        return table.pass ? kExitOk : kExitCheckFailed;
    });
}

int cmd_oracle_check(const CommonOptions& options, std::optional<std::size_t> d_max, bool corrupt_fast_path,
                     std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        OracleCheckOptions o;
        if (options.config) {
            ConfigFile file = ConfigFile::load(*options.config);
            file.require_section("oracle-check");
            file.require_known({"d_max", "trials", "seed"});
            o.d_max = file.get_size("d_max", o.d_max);
            o.trials = positive_size(file, "trials", o.trials);
            o.seed = file.get_u64("seed", o.seed);
        }
        if (d_max) {
            o.d_max = *d_max;
        }
        if (options.seed) {
            o.seed = *options.seed;
        }
        if (o.d_max < 1 || o.d_max > 100) {
            throw ConfigError("--d-max must lie in [1, 100], got " + std::to_string(o.d_max));
        }
        o.corrupt_fast_path = corrupt_fast_path;
        const OracleCheckReport report = oracle_check(o, {.threads = options.threads});
        for (const auto& row : report.rows) {
            out << row.structure << " trials=" << row.trials
                << " max_distance=" << text::format_double(row.max_distance)
                << " max_relative_distance=" << text::format_double(row.max_relative_distance)
                << (row.pass ? " ok" : " FAILED") << "\n";
        }
        out << "oracle-check " << (report.pass ? "passed" : "failed") << " (tolerance "
            << text::format_double(o.tolerance) << " * (1 + max|l|))\n";
        return report.pass ? kExitOk : kExitCheckFailed;
    });
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Eigenvalue clouds of rank-1 perturbed triangular matrices"};
    app.require_subcommand(1);

    CommonOptions options;
    std::string config;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    std::size_t d_max = 0;
    bool corrupt = false;

    const auto add_common = [&](CLI::App* sub, bool config_required) {
        auto* c = sub->add_option("--config", config, "Configuration file");
        if (config_required) {
            c->required();
        }
        sub->add_option("--out", out_dir, "Output directory (created if missing)");
        sub->add_option("--seed", seed, "Seed, overriding the configuration");
        sub->add_option("--threads", options.threads,
                        "Worker threads (0: PSEUDOSCOPE_THREADS or the hardware count)");
    };
    auto* experiment = app.add_subcommand("experiment", "Monte Carlo eigenvalue cloud of one structure");
    add_common(experiment, true);
    auto* scaling = app.add_subcommand("scaling", "Concentration exponent fit across dimensions");
    add_common(scaling, true);
    auto* tails = app.add_subcommand("tails", "Empirical tail and small-ball checks");
    add_common(tails, true);
    auto* oracle = app.add_subcommand("oracle-check", "Fast solvers against dense QR");
    add_common(oracle, false);
    oracle->add_option("--d-max", d_max, "Largest dimension drawn (1 to 100)");
    oracle->add_flag("--corrupt-fast-path", corrupt, "Negative control")->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    if (!config.empty()) {
        options.config = config;
    }
    options.out = out_dir;
    for (const auto* sub : {experiment, scaling, tails, oracle}) {
        if (sub->count("--seed") > 0) {
            options.seed = seed;
        }
    }
    if (experiment->parsed()) {
        return cmd_experiment(options, out, err);
    }
    if (scaling->parsed()) {
        return cmd_scaling(options, out, err);
    }
    if (tails->parsed()) {
        return cmd_tails(options, out, err);
    }
    const std::optional<std::size_t> d_max_opt = oracle->count("--d-max") > 0 ? std::optional(d_max) : std::nullopt;
    return cmd_oracle_check(options, d_max_opt, corrupt, out, err);
}

}  // namespace pseudoscope::cli
