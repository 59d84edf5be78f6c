// Command-line front end: run experiments, sweep h, print threshold
// reports, and run the lemma-verification suites. Outputs are CSV for
// curves/tables and JSON for structured reports; every JSON envelope
// embeds the fully resolved config and master seed so a run can be
// reproduced from the file alone.
#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tsh/harness.hpp"
#include "tsh/policy.hpp"
#include "tsh/theory.hpp"

using json = nlohmann::ordered_json;

namespace {

constexpr const char* kSchemaVersion = "1";

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

// File-name-safe rendering of an h value (dots become 'p').
std::string fmt_h_tag(double h) {
    std::string s = fmt_double(h);
    for (char& c : s)
        if (c == '.') c = 'p';
    return s;
}

std::vector<double> parse_mu_list(const std::string& text) {
    std::vector<double> mus;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t pos = 0;
            const double v = std::stod(item, &pos);
            if (pos != item.size()) throw std::invalid_argument(item);
            mus.push_back(v);
        } catch (const std::exception&) {
            throw std::domain_error("--mu: cannot parse '" + item + "'");
        }
    }
    if (mus.empty()) throw std::domain_error("--mu: empty list");
    return mus;
}

std::vector<std::int64_t> parse_checkpoints(const std::string& schedule,
                                            std::int64_t horizon) {
    if (schedule == "geometric") return tsh::geometric_checkpoints(horizon);
    if (schedule.rfind("linear:", 0) == 0) {
        const std::int64_t k = std::strtoll(schedule.c_str() + 7, nullptr, 10);
        if (k < 1) throw std::domain_error("--checkpoints: linear:<k> needs k >= 1");
        return tsh::linear_checkpoints(horizon, k);
    }
    throw std::domain_error("--checkpoints: expected geometric or linear:<k>");
}

std::vector<double> parse_h_grid(const std::string& text) {
    double start = 0.0, stop = 0.0, step = 0.0;
    char c1 = 0, c2 = 0;
    std::stringstream ss(text);
    if (!(ss >> start >> c1 >> stop >> c2 >> step) || c1 != ':' || c2 != ':')
        throw std::domain_error("--h-grid: expected start:stop:step");
    if (!(step > 0.0)) throw std::domain_error("--h-grid: step must be > 0");
    std::vector<double> grid;
    for (double h = start; h <= stop + 1e-12; h += step) grid.push_back(h);
    if (grid.empty()) throw std::domain_error("--h-grid: empty grid");
    return grid;
}

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << contents;
}

std::string curve_csv(const tsh::RegretCurve& curve) {
    std::string text = "t,mean_regret,stderr,runs\n";
    for (std::size_t i = 0; i < curve.t.size(); ++i) {
        text += std::to_string(static_cast<long long>(curve.t[i]));
        text += ',';
        text += fmt_double(curve.mean_regret[i]);
        text += ',';
        text += fmt_double(curve.stderr_regret[i]);
        text += ',';
        text += std::to_string(static_cast<long long>(curve.runs));
        text += '\n';
    }
    return text;
}

std::string envelope_stem(const std::string& out_path) {
    const std::size_t dot = out_path.find_last_of('.');
    const std::size_t slash = out_path.find_last_of('/');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
        return out_path;
    return out_path.substr(0, dot);
}

struct RunOptions {
    std::string mu_text;
    double h = 1.0;
    std::int64_t horizon = 10000;
    std::int64_t runs = 100;
    std::uint64_t seed = 0;
    std::string out;
    std::string checkpoints = "geometric";
    bool baseline = false;
    bool emit_json = false;
};

tsh::ExperimentConfig build_config(const RunOptions& opts) {
    auto instance = tsh::make_instance(parse_mu_list(opts.mu_text));
    auto policy = tsh::make_policy(
        opts.h, opts.baseline ? tsh::SelectionMode::posterior_draw_baseline
                              : tsh::SelectionMode::exact_probability);
    return tsh::make_experiment(std::move(instance), policy, opts.horizon,
                                opts.runs, opts.seed,
                                parse_checkpoints(opts.checkpoints, opts.horizon));
}

json config_json(const RunOptions& opts, const tsh::ExperimentConfig& config) {
    json cfg;
    cfg["mu"] = config.instance.means;
    cfg["h"] = opts.h;
    cfg["selection_mode"] =
        opts.baseline ? "posterior_draw_baseline" : "exact_probability";
    cfg["horizon"] = config.horizon;
    cfg["runs"] = config.runs;
    cfg["seed"] = config.master_seed;
    cfg["checkpoints"] = opts.checkpoints;
    cfg["checkpoint_list"] = config.checkpoints;
    return cfg;
}

int cmd_run(const RunOptions& opts) {
    const auto start = std::chrono::steady_clock::now();
    const tsh::ExperimentConfig config = build_config(opts);
    const tsh::RegretCurve curve = tsh::run_experiment(config);
    write_file(opts.out, curve_csv(curve));

    json envelope;
    envelope["schema_version"] = kSchemaVersion;
    envelope["command"] = "run";
    envelope["config"] = config_json(opts, config);
    envelope["results"] = {{"curve_csv", opts.out},
                           {"final_mean_regret", curve.mean_regret.back()},
                           {"final_stderr", curve.stderr_regret.back()}};
    envelope["wall_time_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    write_file(envelope_stem(opts.out) + ".json", envelope.dump(2) + "\n");
    if (opts.emit_json) std::cout << envelope.dump(2) << "\n";
    return 0;
}

int cmd_thresholds(double mu1, double mu2, double h,
                   std::optional<double> horizon) {
    const tsh::ThresholdReport report =
        tsh::make_threshold_report(mu1, mu2, h, horizon);
    json out;
    out["schema_version"] = kSchemaVersion;
    out["command"] = "thresholds";
    out["config"] = {{"mu1", mu1}, {"mu2", mu2}, {"h", h}};
    if (horizon) out["config"]["horizon"] = *horizon;
    json body;
    body["y"] = report.y;
    body["delta"] = report.delta;
    body["kl"] = report.kl;
    body["N"] = report.phase_n ? json(*report.phase_n) : json(nullptr);
    body["R"] = report.r_value;
    body["S"] = report.s_value;
    body["U"] = report.u_value;
    body["h_range"] = {report.h_range.lo, report.h_range.hi};
    body["regime"] = tsh::to_string(report.regime);
    out["report"] = body;
    std::cout << out.dump(2) << "\n";
    return 0;
}

// Streams one JSON object per grid point while a suite runs, so lemma3's
// four-million-point report never has to sit in memory.
class CheckStreamer {
  public:
    explicit CheckStreamer(std::ostream& out) : out_(out) {}

    tsh::CheckSink sink() {
        return [this](const tsh::VerificationCheck& check) { write(check); };
    }

    void write(const tsh::VerificationCheck& check) {
        json j;
        j["lemma"] = check.lemma;
        j["grid_point"] = check.grid_point;
        j["lhs"] = check.lhs;
        j["rhs"] = check.rhs;
        j["pass"] = check.pass;
        out_ << (first_ ? "" : ",\n") << "    " << j.dump();
        first_ = false;
    }

  private:
    std::ostream& out_;
    bool first_ = true;
};

tsh::VerificationReport run_suite(const std::string& name,
                                  const tsh::CheckSink& sink) {
    if (name == "lemma3") return tsh::verify_lemma3(200, 99, true, sink);
    if (name == "lemma4") {
        const auto n_grid = tsh::default_lemma4_n_grid();
        const auto p_grid = tsh::default_lemma4_p_grid();
        const auto d_grid = tsh::default_lemma4_delta_grid();
        return tsh::verify_lemma4(n_grid, p_grid, d_grid, true, sink);
    }
    if (name == "fact2") return tsh::verify_fact2(200, sink);
    if (name == "lemma567") {
        const auto grid = tsh::default_lemma567_grid();
        return tsh::verify_lemma567(grid, sink);
    }
    if (name == "chernoff") return tsh::verify_chernoff(500, sink);
    if (name == "exceedance") return tsh::verify_exceedance(20240101, sink);
    throw std::domain_error("unknown suite: " + name);
}

int cmd_verify(const std::string& suite, bool emit_json, const std::string& out) {
    std::vector<std::string> suites;
    if (suite == "all")
        suites = {"lemma3", "lemma4", "fact2", "lemma567", "chernoff", "exceedance"};
    else
        suites = {suite};

    std::ofstream file;
    std::ostream* stream = nullptr;
    if (emit_json || !out.empty()) {
        if (!out.empty()) {
            file.open(out, std::ios::binary);
            if (!file) throw std::runtime_error("cannot open " + out);
            stream = &file;
        } else {
            stream = &std::cout;
        }
    }

    bool all_passed = true;
    if (stream) *stream << "{\n  \"schema_version\": \"" << kSchemaVersion
                        << "\",\n  \"suites\": [\n";
    bool first_suite = true;
    for (const std::string& name : suites) {
        tsh::VerificationReport report;
        if (stream) {
            if (!first_suite) *stream << ",\n";
            first_suite = false;
            *stream << "  {\n  \"suite\": \"" << name << "\",\n  \"checks\": [\n";
            CheckStreamer streamer(*stream);
            report = run_suite(name, streamer.sink());
            *stream << "\n  ],\n";
        } else {
            report = run_suite(name, {});
        }
        std::printf("%-12s points=%-9lld violations=%-6lld max_residual=%s\n",
                    name.c_str(), static_cast<long long>(report.points_checked),
                    static_cast<long long>(report.violations),
                    fmt_double(report.max_residual).c_str());
        if (stream)
            *stream << "  \"points_checked\": " << report.points_checked
                    << ",\n  \"violations\": " << report.violations
                    << ",\n  \"max_residual\": " << fmt_double(report.max_residual)
                    << "\n  }";
        if (!report.passed()) {
            all_passed = false;
            for (std::size_t i = 0; i < report.failures.size() && i < 10; ++i) {
                const auto& f = report.failures[i];
                std::fprintf(stderr, "  VIOLATION %s %s lhs=%s rhs=%s\n",
                             f.lemma.c_str(), f.grid_point.c_str(),
                             fmt_double(f.lhs).c_str(), fmt_double(f.rhs).c_str());
            }
        }
    }
    if (stream) *stream << "\n  ]\n}\n";
    return all_passed ? 0 : 1;
}

int cmd_sweep(const RunOptions& opts, const std::string& h_grid_text,
              bool gnuplot) {
    const auto start = std::chrono::steady_clock::now();
    const std::vector<double> h_grid = parse_h_grid(h_grid_text);
    RunOptions base = opts;
    base.h = h_grid.front();
    const tsh::ExperimentConfig config = build_config(base);
    const std::vector<tsh::SweepRow> rows = tsh::sweep_h(config, h_grid);

    const std::string stem = envelope_stem(opts.out);
    std::string summary = "h,final_regret_mean,stderr,log_slope,power_exponent,"
                          "predicted_regime\n";
    std::string long_csv = "h,t,mean_regret,stderr\n";
    std::vector<std::string> curve_files;
    for (const auto& row : rows) {
        const std::string curve_path = stem + "_h" + fmt_h_tag(row.h) + ".csv";
        write_file(curve_path, curve_csv(row.curve));
        curve_files.push_back(curve_path);

        summary += fmt_double(row.h) + ',' +
                   fmt_double(row.curve.mean_regret.back()) + ',' +
                   fmt_double(row.curve.stderr_regret.back()) + ',' +
                   fmt_double(row.log_slope) + ',';
        summary += row.power_exponent ? fmt_double(*row.power_exponent) : "nan";
        summary += ',';
        summary += row.predicted_regime ? tsh::to_string(*row.predicted_regime)
                                        : "n/a";
        summary += '\n';

        for (std::size_t i = 0; i < row.curve.t.size(); ++i) {
            long_csv += fmt_double(row.h) + ',' +
                        std::to_string(static_cast<long long>(row.curve.t[i])) +
                        ',' + fmt_double(row.curve.mean_regret[i]) + ',' +
                        fmt_double(row.curve.stderr_regret[i]) + '\n';
        }
    }
    write_file(opts.out, summary);
    write_file(stem + "_long.csv", long_csv);

    if (gnuplot) {
        std::string gp = "set logscale x\nset xlabel 't'\nset ylabel "
                         "'mean cumulative pseudo-regret'\nset key left top\n"
                         "set datafile separator ','\nplot \\\n";
        for (std::size_t i = 0; i < rows.size(); ++i) {
            gp += "  '" + curve_files[i] + "' every ::1 using 1:2 with "
                  "linespoints title 'h=" + fmt_double(rows[i].h) + "'";
            gp += (i + 1 < rows.size()) ? ", \\\n" : "\n";
        }
        write_file(stem + ".gp", gp);
    }

    json envelope;
    envelope["schema_version"] = kSchemaVersion;
    envelope["command"] = "sweep";
    envelope["config"] = config_json(base, config);
    envelope["config"]["h_grid"] = h_grid_text;
    envelope["results"] = {{"summary_csv", opts.out},
                           {"long_csv", stem + "_long.csv"},
                           {"curve_csvs", curve_files}};
    envelope["wall_time_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    write_file(stem + ".json", envelope.dump(2) + "\n");
    if (opts.emit_json) std::cout << envelope.dump(2) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Thompson Sampling with exponent h: Bernoulli-bandit "
                 "simulator, thresholds, and lemma verification"};
    app.require_subcommand(1);
    // --h is an option of this tool, so help is long-form only.
    app.set_help_flag("--help", "Print help");

    RunOptions run_opts;
    CLI::App* run = app.add_subcommand("run", "Run one Monte Carlo experiment");
    run->set_help_flag("--help", "Print help");
    run->add_option("--mu", run_opts.mu_text, "Comma-separated arm means")
        ->required();
    run->add_option("--h", run_opts.h, "Selection exponent h (default 1)");
    run->add_option("--horizon", run_opts.horizon, "Steps per run");
    run->add_option("--runs", run_opts.runs, "Independent replications");
    run->add_option("--seed", run_opts.seed, "Master seed");
    run->add_option("--out", run_opts.out, "Curve CSV path")->required();
    run->add_option("--checkpoints", run_opts.checkpoints,
                    "geometric or linear:<k>");
    run->add_flag("--baseline", run_opts.baseline,
                  "Use draw-argmax baseline TS instead of the exact rule");
    run->add_flag("--json", run_opts.emit_json, "Echo the JSON envelope to stdout");

    double mu1 = 0.0, mu2 = 0.0, th_h = 1.0;
    double th_horizon = -1.0;
    CLI::App* thresholds = app.add_subcommand(
        "thresholds", "Print y, delta, N, R, S, U, the logarithmic-regret "
                      "h-range, and the regret regime as JSON");
    thresholds->set_help_flag("--help", "Print help");
    thresholds->add_option("--mu1", mu1, "Optimal arm mean")->required();
    thresholds->add_option("--mu2", mu2, "Suboptimal arm mean")->required();
    thresholds->add_option("--h", th_h, "Selection exponent (default 1)");
    thresholds->add_option("--horizon", th_horizon, "Horizon for N = 16lnT/delta^2");

    std::string suite;
    std::string verify_out;
    bool verify_json = false;
    CLI::App* verify = app.add_subcommand("verify", "Run verification suites");
    verify->set_help_flag("--help", "Print help");
    verify->add_option("--suite", suite, "Suite name")
        ->required()
        ->check(CLI::IsMember({"all", "lemma3", "lemma4", "fact2", "lemma567",
                               "chernoff", "exceedance"}));
    verify->add_flag("--json", verify_json, "Stream per-grid-point JSON to stdout");
    verify->add_option("--out", verify_out, "Write per-grid-point JSON to a file");

    RunOptions sweep_opts;
    std::string h_grid_text;
    bool gnuplot = false;
    CLI::App* sweep = app.add_subcommand("sweep", "Run one experiment per h");
    sweep->set_help_flag("--help", "Print help");
    sweep->add_option("--mu", sweep_opts.mu_text, "Comma-separated arm means")
        ->required();
    sweep->add_option("--h-grid", h_grid_text, "start:stop:step")->required();
    sweep->add_option("--horizon", sweep_opts.horizon, "Steps per run");
    sweep->add_option("--runs", sweep_opts.runs, "Independent replications");
    sweep->add_option("--seed", sweep_opts.seed, "Master seed");
    sweep->add_option("--out", sweep_opts.out, "Summary CSV path")->required();
    sweep->add_option("--checkpoints", sweep_opts.checkpoints,
                      "geometric or linear:<k>");
    sweep->add_flag("--baseline", sweep_opts.baseline,
                    "Use draw-argmax baseline TS instead of the exact rule");
    sweep->add_flag("--gnuplot", gnuplot, "Also write a gnuplot script");
    sweep->add_flag("--json", sweep_opts.emit_json,
                    "Echo the JSON envelope to stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*run) return cmd_run(run_opts);
        if (*thresholds)
            return cmd_thresholds(mu1, mu2, th_h,
                                  th_horizon > 0.0
                                      ? std::optional<double>(th_horizon)
                                      : std::nullopt);
        if (*verify) return cmd_verify(suite, verify_json, verify_out);
        if (*sweep) return cmd_sweep(sweep_opts, h_grid_text, gnuplot);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
