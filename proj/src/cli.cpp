#include "levyglass/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "levyglass/errors.hpp"
#include "levyglass/exact.hpp"
#include "levyglass/report.hpp"

namespace levyglass {

namespace {

int default_threads() {
    if (const char* env = std::getenv("LEVYGLASS_THREADS")) {
        int parsed = std::atoi(env);
        if (parsed > 0) return parsed;
    }
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    return hw > 0 ? hw : 1;
}

void add_experiment_flags(CLI::App* cmd, CliInvocation& inv, bool& threads_given) {
    ExperimentConfig& cfg = inv.config;
    cmd->add_option("--alpha", cfg.alpha, "Tail exponent, in (1, 2)")
        ->capture_default_str()
        ->check(CLI::Range(1.0 + TailLaw::alpha_margin, 2.0 - TailLaw::alpha_margin));
    cmd->add_option("--c0", cfg.c0, "Tail constant, in (0, 1]")
        ->capture_default_str()
        ->check(CLI::Range(1e-9, 1.0));
    cmd->add_option("--epsilon", cfg.epsilon, "Tail-cut exponent, in (0, min(1/alpha, 0.2))")
        ->capture_default_str()
        ->check(CLI::Range(1e-9, 0.2));
    cmd->add_option("--beta", cfg.beta, "Inverse temperature")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd->add_option("--delta", cfg.delta, "Concentration slack")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd->add_option("--n", cfg.n, "Site count")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--n-grid", cfg.n_grid, "Site-count grid (default 8,12,16)")
        ->delimiter(',');
    cmd->add_option("--n1", cfg.n1, "Block split (default floor(n/2))")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--samples", cfg.samples, "Disorder replica count")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd->add_option("--seed", cfg.base_seed, "Base seed (mandatory; record it)")->required();
    auto* threads_opt =
        cmd->add_option("--threads", cfg.threads,
                        "Worker threads (default: LEVYGLASS_THREADS or machine parallelism)");
    threads_opt->check(CLI::PositiveNumber);
    cmd->callback([threads_opt, &threads_given] {
        if (threads_opt->count() > 0) threads_given = true;
    });
    cmd->add_option("--burkholder-p", cfg.burkholder_p,
                    "Aggregation exponent in (1, alpha); default (1 + alpha)/2")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--r-grid", cfg.r_grid, "Interpolation indices (default 0,S/2,S)")
        ->delimiter(',');
    cmd->add_option("--x-grid", cfg.x_grid, "Certificate magnitudes")
        ->delimiter(',')
        ->capture_default_str();
    cmd->add_option("--format", inv.format, "Report format")
        ->capture_default_str()
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--out", inv.out_path, "Output path (default stdout)");
    cmd->add_option("--config", "Optional key=value config file; flags override")
        ->expected(1);
}

// Plain "key=value" config support: file entries become flag tokens inserted
// after the subcommand, skipping any flag the command line already carries.
std::vector<std::string> merge_config_tokens(const std::vector<std::string>& args,
                                             std::string* error) {
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    if (path.empty()) return args;

    std::ifstream file(path);
    if (!file) {
        *error = "cannot open config file " + path;
        return args;
    }
    std::set<std::string> given;
    for (const std::string& a : args)
        if (a.rfind("--", 0) == 0) given.insert(a.substr(0, a.find('=')));

    std::vector<std::string> tokens;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(file, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos || eq == 0) {
            *error = path + ":" + std::to_string(line_no) + ": expected key=value";
            return args;
        }
        std::string flag = "--" + line.substr(0, eq);
        if (given.count(flag)) continue;
        tokens.push_back(flag);
        tokens.push_back(line.substr(eq + 1));
    }

    std::vector<std::string> merged;
    std::size_t insert_at = args.size();
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i].rfind("--", 0) != 0) {  // the subcommand token
            insert_at = i + 1;
            break;
        }
    }
    merged.assign(args.begin(), args.begin() + static_cast<std::ptrdiff_t>(insert_at));
    merged.insert(merged.end(), tokens.begin(), tokens.end());
    merged.insert(merged.end(), args.begin() + static_cast<std::ptrdiff_t>(insert_at),
                  args.end());
    return merged;
}

}  // namespace

ParseResult parse_cli(const std::vector<std::string>& args) {
    ParseResult result;
    CliInvocation& inv = result.invocation;
    bool threads_given = false;

    CLI::App app{"levyglass: heavy-tailed mean-field spin glass experiments"};
    app.require_subcommand(1);

    struct SubSpec {
        const char* name;
        const char* description;
    };
    const SubSpec experiment_subs[] = {
        {"free-energy", "Quenched free energy of one model family"},
        {"reduce", "Reduction chain across model families"},
        {"superadd", "Superadditivity of the multi-edge model"},
        {"interp", "Interpolation sweep and per-step certificates"},
        {"concentrate", "Self-averaging and variance scaling"},
        {"martingale", "Per-coupling deviation bounds and aggregate scaling"},
        {"multiedge", "Duplicate counts and the distinct-edge growth process"},
        {"chernoff", "Edge-count concentration of the truncated model"},
        {"jensen", "Jensen sandwich audits"},
        {"bounded", "Uniform free-energy bound"},
    };
    for (const SubSpec& sub : experiment_subs) {
        CLI::App* cmd = app.add_subcommand(sub.name, sub.description);
        add_experiment_flags(cmd, inv, threads_given);
        if (std::string(sub.name) == "free-energy") {
            cmd->add_option_function<std::string>(
                   "--model",
                   [&inv](const std::string& value) {
                       if (value == "full") inv.model_kind = ModelKind::full;
                       else if (value == "truncated") inv.model_kind = ModelKind::truncated;
                       else if (value == "fixed-edge") inv.model_kind = ModelKind::fixed_edge;
                       else inv.model_kind = ModelKind::multi_edge;
                   },
                   "Model family (default full)")
                ->check(CLI::IsMember({"full", "truncated", "fixed-edge", "multi-edge"}));
        }
    }
    CLI::App* exact_cmd =
        app.add_subcommand("exact", "Exact log partition of a serialized instance");
    exact_cmd->add_option("--instance", inv.instance_path, "Instance file")->required();

    std::string config_error;
    std::vector<std::string> merged = merge_config_tokens(args, &config_error);
    if (!config_error.empty()) {
        result.exit_code = exit_usage;
        result.message = "error: " + config_error + "\n";
        return result;
    }
    std::vector<std::string> reversed(merged.rbegin(), merged.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        result.exit_code = exit_ok;
        std::ostringstream help;
        help << app.help();
        result.message = help.str();
        return result;
    } catch (const CLI::ParseError& e) {
        result.exit_code = exit_usage;
        std::ostringstream text;
        text << e.what() << "\n\n" << app.help();
        result.message = text.str();
        return result;
    }

    inv.subcommand = app.get_subcommands().front()->get_name();
    if (!threads_given && inv.subcommand != "exact") inv.config.threads = default_threads();

    if (inv.subcommand != "exact") {
        try {
            inv.config.validate();
        } catch (const std::invalid_argument& e) {
            result.exit_code = exit_usage;
            result.message = std::string("invalid configuration: ") + e.what();
            return result;
        }
    }
    result.ok = true;
    return result;
}

namespace {

void print_config(const CliInvocation& inv, std::ostream& out) {
    const ExperimentConfig& cfg = inv.config;
    out << "# levyglass " << inv.subcommand << "\n";
    out << "# alpha=" << format_double(cfg.alpha) << " c0=" << format_double(cfg.c0)
        << " epsilon=" << format_double(cfg.epsilon) << " beta=" << format_double(cfg.beta)
        << " delta=" << format_double(cfg.delta) << "\n";
    out << "# n=" << cfg.n << " n-grid=";
    const auto grid = cfg.resolved_n_grid();
    for (std::size_t i = 0; i < grid.size(); ++i) out << (i ? "," : "") << grid[i];
    out << " n1=" << cfg.n1 << " samples=" << cfg.samples << " seed=" << cfg.base_seed
        << " threads=" << cfg.threads << "\n";
    out << "# burkholder-p=" << format_double(cfg.resolved_burkholder_p()) << " r-grid=";
    if (cfg.r_grid.empty()) {
        out << "auto";
    } else {
        for (std::size_t i = 0; i < cfg.r_grid.size(); ++i)
            out << (i ? "," : "") << cfg.r_grid[i];
    }
    out << " x-grid=";
    for (std::size_t i = 0; i < cfg.x_grid.size(); ++i)
        out << (i ? "," : "") << format_double(cfg.x_grid[i]);
    out << " format=" << inv.format << " out=" << (inv.out_path.empty() ? "-" : inv.out_path)
        << "\n";
}

ExperimentReport dispatch(const CliInvocation& inv) {
    const ExperimentConfig& cfg = inv.config;
    const std::string& sub = inv.subcommand;
    if (sub == "free-energy") return quenched_free_energy(cfg, inv.model_kind);
    if (sub == "reduce") return reduction_chain(cfg);
    if (sub == "superadd") return superadditivity_trial(cfg);
    if (sub == "interp") return interpolation_sweep(cfg);
    if (sub == "concentrate") return concentration_scaling(cfg);
    if (sub == "martingale") return coupling_deviation_profile(cfg);
    if (sub == "multiedge") return multiedge_loop_stats(cfg);
    if (sub == "chernoff") return edge_count_concentration(cfg);
    if (sub == "jensen") return jensen_sandwich_audit(cfg);
    if (sub == "bounded") return boundedness_audit(cfg);
    throw std::invalid_argument("unknown subcommand: " + sub);
}

int run_exact(const CliInvocation& inv, std::ostream& console, std::ostream& errors) {
    std::ifstream in(inv.instance_path);
    if (!in) {
        errors << "error: cannot open instance file " << inv.instance_path << "\n";
        return exit_io;
    }
    ModelInstance inst;
    try {
        inst = read_instance(in);
    } catch (const std::exception& e) {
        errors << "error: " << e.what() << "\n";
        return exit_usage;
    }
    ExactSummary summary = log_partition(inst);
    console << "log_z " << format_double(summary.log_z) << "\n";
    return exit_ok;
}

}  // namespace

int run_invocation(const CliInvocation& inv, std::ostream& console, std::ostream& errors) {
    try {
        if (inv.subcommand == "exact") return run_exact(inv, console, errors);

        print_config(inv, console);
        ExperimentReport report = dispatch(inv);

        std::ostringstream rendered;
        if (inv.format == "json")
            write_json(report, rendered);
        else
            write_csv(report, rendered);

        if (inv.out_path.empty()) {
            console << rendered.str();
        } else {
            std::ofstream out(inv.out_path, std::ios::binary);
            if (!out) {
                errors << "error: cannot open output path " << inv.out_path << "\n";
                return exit_io;
            }
            out << rendered.str();
            if (!out.good()) {
                errors << "error: short write to " << inv.out_path << "\n";
                return exit_io;
            }
        }
        return report.all_pass() ? exit_ok : exit_fail;
    } catch (const std::invalid_argument& e) {
        errors << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const capacity_exceeded& e) {
        errors << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::ios_base::failure& e) {
        errors << "error: " << e.what() << "\n";
        return exit_io;
    }
}

int run_cli(int argc, const char* const* argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    ParseResult parsed = parse_cli(args);
    if (!parsed.ok) {
        (parsed.exit_code == exit_ok ? std::cout : std::cerr) << parsed.message;
        return parsed.exit_code;
    }
    return run_invocation(parsed.invocation, std::cout, std::cerr);
}

}  // namespace levyglass
