// SPDX-License-Identifier: Apache-2.0
#include "scorelab/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <ostream>

#include "scorelab/analytic.hpp"
#include "scorelab/ensemble.hpp"
#include "scorelab/equivalence.hpp"
#include "scorelab/errors.hpp"
#include "scorelab/io.hpp"
#include "scorelab/metrics.hpp"
#include "scorelab/oracle.hpp"
#include "scorelab/sampler.hpp"
#include "scorelab/schedule.hpp"
#include "scorelab/sweep.hpp"

namespace scorelab::cli {

namespace {

// Thrown for bad flag values discovered after parsing.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::uint64_t default_seed() {
    if (const char* env = std::getenv("SCORELAB_SEED")) {
        std::uint64_t v = 0;
        const std::string_view s(env);
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec == std::errc{} && ptr == s.data() + s.size()) return v;
    }
    return 0;
}

// Flags shared by sample and diagnose.
struct ChainFlags {
    std::string scheme;
    double epsilon = 1.0;
    std::size_t n = 0;
    double sigma_first = 0.0;
    double sigma_last = 0.0;
    std::string oracle;
    std::size_t dim = 1;
    std::size_t corrector_steps = 0;
    std::size_t steps_per_level = 1;
    bool final_denoise = false;
    bool als_alpha_squared = false;
    std::uint64_t seed = 0;
    std::size_t threads = 0;

    void add_to(CLI::App& app) {
        app.add_option("--scheme", scheme, "als | cas-b | cas-c | pc | denoise-interp | noise-denoise")->required();
        app.add_option("--eps", epsilon, "eps_a (als, pc corrector), eps_b (cas-b) or eps_c (cas-c)");
        app.add_option("--n", n, "number of noise levels N")->required();
        app.add_option("--sigma-first", sigma_first, "largest noise level sigma_1")->required();
        app.add_option("--sigma-last", sigma_last, "smallest noise level sigma_N")->required();
        app.add_option("--oracle", oracle, "gauss:<mean>:<std> | points:<x>,<w>;... | noisy:<inner>:<rho>:<seed>")
            ->required();
        app.add_option("--dim", dim, "state dimension");
        app.add_option("--corrector-steps", corrector_steps, "Langevin corrector steps per level (pc)");
        app.add_option("--steps-per-level", steps_per_level, "Langevin steps per level (als)");
        app.add_flag("--final-denoise", final_denoise, "finish with x <- H(x, sigma_N)");
        app.add_flag("--als-alpha-squared", als_alpha_squared, "alpha = eps_a (sigma_i / sigma_N)^2");
        app.add_option("--seed", seed, "base seed (default: $SCORELAB_SEED or 0)");
        app.add_option("--threads", threads, "worker threads (0: all cores)");
    }

    SamplerConfig config() const {
        const auto s = parse_scheme(scheme);
        if (!s) throw UsageError("unknown scheme '" + scheme + "'");
        return {*s, epsilon, corrector_steps, final_denoise, steps_per_level, als_alpha_squared};
    }

    NoiseSchedule schedule() const {
        try {
            return NoiseSchedule::build_geometric(sigma_first, sigma_last, n);
        } catch (const DomainError& e) {
            throw UsageError(e.what());
        }
    }

    OraclePtr make_oracle() const {
        try {
            return parse_oracle(oracle, dim);
        } catch (const std::exception& e) {
            throw UsageError(std::string("bad --oracle: ") + e.what());
        }
    }
};

template <class T>
std::vector<T> parse_list(const std::string& text) {
    std::vector<T> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto pos = std::min(text.find(',', start), text.size());
        const std::string item = text.substr(start, pos - start);
        T v{};
        auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (item.empty() || ec != std::errc{} || ptr != item.data() + item.size()) {
            throw UsageError("bad list entry '" + item + "' in '" + text + "'");
        }
        out.push_back(v);
        start = pos + 1;
    }
    return out;
}

std::string trim(std::string_view v) {
    const auto b = v.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = v.find_last_not_of(" \t\r");
    return std::string(v.substr(b, e - b + 1));
}

// Flat `key = value` file to `--key=value` tokens. Blank lines and lines
// starting with '#' or ';' are skipped.
std::vector<std::string> config_tokens(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw UsageError("cannot read config file '" + path + "'");
    std::vector<std::string> tokens;
    std::string line;
    for (int lineno = 1; std::getline(f, line); ++lineno) {
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw UsageError(path + ":" + std::to_string(lineno) + ": expected key = value");
        }
        std::string key = trim(std::string_view(t).substr(0, eq));
        std::string value = trim(std::string_view(t).substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        if (key.rfind("--", 0) == 0) key = key.substr(2);
        if (key.empty() || key == "config") {
            throw UsageError(path + ":" + std::to_string(lineno) + ": bad key '" + key + "'");
        }
        tokens.push_back("--" + key + "=" + value);
    }
    return tokens;
}

// Splices every `--config <file>` (or `--config=<file>`) into the argument
// list right after the subcommand, ahead of command-line flags.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
    if (args.empty()) return args;
    std::vector<std::string> from_files;
    std::vector<std::string> rest;
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw UsageError("--config needs a file");
            const auto t = config_tokens(args[++i]);
            from_files.insert(from_files.end(), t.begin(), t.end());
        } else if (args[i].rfind("--config=", 0) == 0) {
            const auto t = config_tokens(args[i].substr(9));
            from_files.insert(from_files.end(), t.begin(), t.end());
        } else {
            rest.push_back(args[i]);
        }
    }
    std::vector<std::string> out{args.front()};
    out.insert(out.end(), from_files.begin(), from_files.end());
    out.insert(out.end(), rest.begin(), rest.end());
    return out;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw UsageError("cannot open '" + path + "' for writing");
    f << content;
}

// --- sample -----------------------------------------------------------------

struct SampleCommand {
    ChainFlags flags;
    std::size_t chains = 1;
    std::string out_path = "trace.json";

    int run(std::ostream& out, std::ostream& err) const {
        const SamplerConfig cfg = flags.config();
        const NoiseSchedule sched = flags.schedule();
        const OraclePtr oracle = flags.make_oracle();
        if (chains == 0) throw UsageError("--chains must be >= 1");

        const StepPlan plan = plan_steps(sched, cfg);  // beta domain errors surface here
        if (plan.amplification_warning) {
            err << "warning: eta = " << format_double(*plan.eta)
                << " > 1 amplifies the remaining noise at every step\n";
        }

        nlohmann::json doc = nlohmann::json::array();
        std::vector<Vec> finals;
        std::size_t diverged = 0;
        for (std::size_t c = 0; c < chains; ++c) {
            const ChainTrace trace = run_chain(*oracle, sched, cfg, flags.seed, flags.dim, std::nullopt, c);
            if (trace.diverged) {
                ++diverged;
            } else {
                finals.push_back(trace.final_state);
            }
            doc.push_back(to_json(trace));
        }
        write_file(out_path, (chains == 1 ? doc.front() : doc).dump(1) + "\n");

        out << "chains=" << chains << " diverged=" << diverged << " trace=" << out_path << "\n";
        if (finals.empty()) {
            err << "error: all chains diverged\n";
            return kAllDiverged;
        }
        // Pooled over components.
        double mean = 0.0;
        for (const auto& v : finals) for (double x : v) mean += x;
        const double count = static_cast<double>(finals.size() * flags.dim);
        mean /= count;
        double var = 0.0;
        for (const auto& v : finals) for (double x : v) var += (x - mean) * (x - mean);
        const double sd = count > 1 ? std::sqrt(var / (count - 1)) : 0.0;
        out << "final_mean=" << format_double(mean) << " final_std=" << format_double(sd) << "\n";
        if (const auto* g = dynamic_cast<const GaussianOracle*>(&base_oracle(*oracle))) {
            out << "w2_to_target=" << format_double(w2_gaussian_closed(mean, sd, g->mean()[0], g->data_std()))
                << "\n";
        }
        return kOk;
    }
};

// --- diagnose ---------------------------------------------------------------

struct DiagnoseCommand {
    ChainFlags flags;
    bool analytic = false;
    std::size_t mc_chains = 0;
    std::string out_path = "consistency.csv";
    std::string json_path;

    int run(std::ostream& out, std::ostream&) const {
        const SamplerConfig cfg = flags.config();
        const NoiseSchedule sched = flags.schedule();
        const OraclePtr oracle = flags.make_oracle();
        if (analytic && mc_chains > 0) throw UsageError("--analytic and --mc are exclusive");

        ConsistencyReport report;
        if (mc_chains > 0) {
            EnsembleOptions opts;
            opts.chains = mc_chains;
            opts.seed = flags.seed;
            opts.dim = flags.dim;
            opts.keep_final_states = false;
            opts.step_moments = true;
            opts.threads = flags.threads;
            const auto result = run_ensemble(*oracle, sched, cfg, opts);
            std::vector<double> tau;
            for (std::size_t k : level_end_steps(result.plan, sched.size())) {
                tau.push_back(std::sqrt(result.moments[k + 1].variance));
            }
            report = make_consistency_report(sched, tau);
        } else {
            if (!oracle->is_affine()) {
                throw UsageError("--analytic needs an affine oracle; use --mc <chains> for " + oracle->describe());
            }
            if (!is_point_mass(*oracle)) {
                throw UsageError("effective noise needs a point-mass oracle (gauss:<mean>:0)");
            }
            report = consistency_report(*oracle, sched, cfg);
        }
        write_file(out_path, report_to_csv(report));
        if (!json_path.empty()) write_file(json_path, to_json(report).dump(1) + "\n");
        out << "max_deviation=" << format_double(report.max_deviation) << "\n";
        return kOk;
    }
};

// --- verify -----------------------------------------------------------------

struct VerifyCommand {
    std::string gammas = "0.5,0.9,0.99";
    std::string dims = "1,8";
    std::uint64_t seed = 2021;
    double tolerance = 1e-12;
    double beta_fault = 0.0;

    int run(std::ostream& out, std::ostream& err) const {
        EquivalenceOptions opts;
        opts.gammas = parse_list<double>(gammas);
        opts.dims = parse_list<std::size_t>(dims);
        opts.seed = seed;
        opts.tolerance = tolerance;
        opts.beta_fault = beta_fault;
        for (double g : opts.gammas) {
            if (!(g > 0.0 && g < 1.0)) throw UsageError("--gammas entries must lie in (0, 1)");
        }
        for (auto d : opts.dims) {
            if (d == 0) throw UsageError("--dims entries must be >= 1");
        }

        const auto checks = verify_equivalences(opts);
        std::vector<std::string> failed;
        for (const auto& c : checks) {
            out << (c.passed ? "PASS " : "FAIL ") << c.name << " gamma=" << format_double(c.gamma)
                << " dim=" << c.dim << " max_rel_error=" << format_double(c.max_error) << "\n";
            if (!c.passed && std::find(failed.begin(), failed.end(), c.name) == failed.end()) {
                failed.push_back(c.name);
            }
        }
        if (!failed.empty()) {
            err << "failed identities:";
            for (const auto& f : failed) err << " " << f;
            err << "\n";
            return kVerifyFailed;
        }
        out << checks.size() << " checks passed\n";
        return kOk;
    }
};

// --- sweep ------------------------------------------------------------------

struct SweepCommand {
    std::string oracle;
    std::size_t dim = 1;
    double sigma_first = 1.0;
    double sigma_last = 0.01;
    std::string n_grid;
    std::string scheme;
    std::string eps_grid;
    std::string eps_range;
    std::size_t chains = 1000;
    std::uint64_t seed = 0;
    std::string metric = "w1";
    std::size_t projections = 64;
    bool final_denoise = false;
    std::size_t corrector_steps = 0;
    bool timing = false;
    std::string out_path = "sweep.csv";
    std::size_t threads = 0;

    SweepSpec spec() const {
        SweepSpec s;
        s.oracle = oracle;
        s.dim = dim;
        s.sigma_first = sigma_first;
        s.sigma_last = sigma_last;
        s.n_values = parse_list<std::size_t>(n_grid);
        const auto sc = parse_scheme(scheme);
        if (!sc) throw UsageError("unknown scheme '" + scheme + "'");
        s.scheme = *sc;
        if (!eps_grid.empty() == !eps_range.empty()) {
            throw UsageError("give exactly one of --eps-grid and --eps-range");
        }
        if (!eps_grid.empty()) {
            s.epsilons = parse_list<double>(eps_grid);
        } else {
            std::string r = eps_range;
            std::replace(r.begin(), r.end(), ':', ',');
            const auto parts = parse_list<double>(r);
            if (parts.size() != 3 || parts[2] < 1 || parts[2] != std::floor(parts[2])) {
                throw UsageError("--eps-range expects lo:hi:count");
            }
            try {
                s.epsilons = log_spaced(parts[0], parts[1], static_cast<std::size_t>(parts[2]));
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
        }
        s.chains = chains;
        s.seed = seed;
        if (metric == "w1") {
            s.metric = SweepMetric::W1;
        } else if (metric == "sliced-w2") {
            s.metric = SweepMetric::SlicedW2;
        } else {
            throw UsageError("unknown metric '" + metric + "'");
        }
        s.projections = projections;
        s.final_denoise = final_denoise;
        s.corrector_steps = corrector_steps;
        s.threads = threads;
        try {
            s.validate();
            // Surface oracle and schedule-endpoint errors before any cell runs.
            (void)parse_oracle(s.oracle, s.dim);
            (void)NoiseSchedule::build_geometric(s.sigma_first, s.sigma_last, 2);
        } catch (const std::exception& e) {
            throw UsageError(e.what());
        }
        return s;
    }

    int run(std::ostream& out, std::ostream&) const {
        const SweepSpec s = spec();
        const auto rows = run_sweep(s);
        write_file(out_path, sweep_to_csv(rows, timing));

        std::size_t errors = 0;
        for (const auto& r : rows) errors += r.status == "domain_error" ? 1 : 0;
        out << "cells=" << rows.size() << " domain_errors=" << errors << " csv=" << out_path << "\n";
        for (std::size_t n : s.n_values) {
            const SweepRow* best = nullptr;
            for (const auto& r : rows) {
                if (r.n == n && r.q && (!best || *r.q > *best->q)) best = &r;
            }
            out << "N=" << n << " best_epsilon=" << (best ? format_double(best->epsilon) : "none")
                << " best_q=" << (best ? format_double(*best->q) : "none") << "\n";
        }
        return kOk;
    }
};

void add_config_help(CLI::App& cmd) {
    // Consumed by expand_config before parsing; declared so it shows in --help.
    cmd.add_option("--config", "flat key = value file; flags override it");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Sampling laboratory for score-based generative models", "scorelab"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    SampleCommand sample;
    auto* sample_cmd = app.add_subcommand("sample", "run sampling chains and write JSON traces");
    sample.flags.seed = default_seed();
    sample.flags.add_to(*sample_cmd);
    sample_cmd->add_option("--chains", sample.chains, "number of chains");
    sample_cmd->add_option("--out", sample.out_path, "trace file");
    add_config_help(*sample_cmd);

    DiagnoseCommand diagnose;
    auto* diagnose_cmd = app.add_subcommand("diagnose", "effective noise against the schedule");
    diagnose.flags.seed = default_seed();
    diagnose.flags.add_to(*diagnose_cmd);
    diagnose_cmd->add_flag("--analytic", diagnose.analytic, "exact propagation (default)");
    diagnose_cmd->add_option("--mc", diagnose.mc_chains, "Monte Carlo with this many chains");
    diagnose_cmd->add_option("--out", diagnose.out_path, "consistency CSV");
    diagnose_cmd->add_option("--json", diagnose.json_path, "also write the report as JSON");
    add_config_help(*diagnose_cmd);

    VerifyCommand verify;
    auto* verify_cmd = app.add_subcommand("verify", "check the scheme equivalences");
    verify_cmd->add_option("--gammas", verify.gammas, "comma-separated ratios");
    verify_cmd->add_option("--dims", verify.dims, "comma-separated dimensions");
    verify_cmd->add_option("--seed", verify.seed, "seed for test states");
    verify_cmd->add_option("--tolerance", verify.tolerance, "relative tolerance");
    verify_cmd->add_option("--inject-beta-fault", verify.beta_fault)->group("");
    add_config_help(*verify_cmd);

    SweepCommand sweep;
    sweep.seed = default_seed();
    auto* sweep_cmd = app.add_subcommand("sweep", "quality over an (N, epsilon) grid");
    sweep_cmd->add_option("--oracle", sweep.oracle, "oracle mini-language")->required();
    sweep_cmd->add_option("--dim", sweep.dim, "state dimension");
    sweep_cmd->add_option("--sigma-first", sweep.sigma_first, "sigma_1");
    sweep_cmd->add_option("--sigma-last", sweep.sigma_last, "sigma_N");
    sweep_cmd->add_option("--n-grid", sweep.n_grid, "comma-separated N values")->required();
    sweep_cmd->add_option("--scheme", sweep.scheme, "sampler scheme")->required();
    sweep_cmd->add_option("--eps-grid", sweep.eps_grid, "comma-separated epsilon values");
    sweep_cmd->add_option("--eps-range", sweep.eps_range, "log-spaced lo:hi:count");
    sweep_cmd->add_option("--chains", sweep.chains, "chains per cell");
    sweep_cmd->add_option("--seed", sweep.seed, "base seed");
    sweep_cmd->add_option("--metric", sweep.metric, "w1 | sliced-w2");
    sweep_cmd->add_option("--projections", sweep.projections, "directions for sliced-w2");
    sweep_cmd->add_flag("--final-denoise", sweep.final_denoise, "finish with x <- H(x, sigma_N)");
    sweep_cmd->add_option("--corrector-steps", sweep.corrector_steps, "pc corrector steps");
    sweep_cmd->add_flag("--timing", sweep.timing, "fill the runtime_ms column");
    sweep_cmd->add_option("--out", sweep.out_path, "sweep CSV");
    sweep_cmd->add_option("--threads", sweep.threads, "worker threads (0: all cores)");
    add_config_help(*sweep_cmd);

    std::vector<std::string> expanded;
    try {
        expanded = expand_config(args);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }
    std::vector<std::string> reversed(expanded.rbegin(), expanded.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n";
        const CLI::App* failing = &app;
        for (auto* sub : app.get_subcommands()) failing = sub;
        err << failing->help();
        return kUsage;
    }

    try {
        if (*sample_cmd) return sample.run(out, err);
        if (*diagnose_cmd) return diagnose.run(out, err);
        if (*verify_cmd) return verify.run(out, err);
        if (*sweep_cmd) return sweep.run(out, err);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return kDomain;
    } catch (const UnsupportedOperation& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}

}  // namespace scorelab::cli
