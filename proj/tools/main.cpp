// Command-line front end: rate bounds, estimation, sessions, figures and
// parameter sweeps. Exit codes: 0 success/secure, 2 insecure rate, 1 error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "qkdcal/config.hpp"
#include "qkdcal/estimation.hpp"
#include "qkdcal/keyrate.hpp"
#include "qkdcal/sim.hpp"
#include "svg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qkdcal;

namespace {

std::string fmt9(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

// Tabular output shared by the commands: CSV (normative, 9 significant
// digits) or JSON lines.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::string> comments;  // emitted as leading # lines in CSV
    std::vector<std::vector<json>> rows;

    void add_row(std::initializer_list<json> cells) { rows.emplace_back(cells); }

    static std::string cell_csv(const json& v) {
        if (v.is_number_float()) return fmt9(v.get<double>());
        if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
        if (v.is_string()) return v.get<std::string>();
        return v.dump();
    }

    void write(std::ostream& out, const std::string& format) const {
        if (format == "jsonlines") {
            for (const auto& row : rows) {
                json obj;
                for (size_t i = 0; i < columns.size(); ++i) obj[columns[i]] = row[i];
                out << obj.dump() << "\n";
            }
            return;
        }
        for (const auto& c : comments) out << "# " << c << "\n";
        for (size_t i = 0; i < columns.size(); ++i) {
            out << columns[i] << (i + 1 < columns.size() ? "," : "");
        }
        out << "\n";
        for (const auto& row : rows) {
            for (size_t i = 0; i < row.size(); ++i) {
                out << cell_csv(row[i]) << (i + 1 < row.size() ? "," : "");
            }
            out << "\n";
        }
    }
};

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    return out;
}

const char* attack_state_name(AttackState s) {
    switch (s) {
        case AttackState::none: return "honest";
        case AttackState::blinded: return "blinded";
        case AttackState::blocked: return "blocked";
        case AttackState::sensitive: return "sensitive";
        case AttackState::vacuum: return "vacuum";
        case AttackState::shifted: return "shifted";
    }
    return "?";
}

const char* gate_kind_name(GateKind k) {
    switch (k) {
        case GateKind::signal: return "signal";
        case GateKind::test: return "test";
        case GateKind::dark: return "dark";
    }
    return "?";
}

void write_trace(const fs::path& path, const SessionResult& res) {
    auto out = open_out(path);
    out << "# gate_index\tkind\tattack_state\tclick\tin_gate_time\tbit\tbasis_match\terror\n";
    for (const auto& r : res.trace) {
        out << r.gate_index << '\t' << gate_kind_name(r.kind) << '\t'
            << attack_state_name(r.attack_state) << '\t' << (r.click ? 1 : 0) << '\t';
        if (r.click) out << fmt9(r.time);
        else out << '-';
        out << '\t';
        if (r.bit >= 0) out << r.bit;
        else out << '-';
        out << '\t';
        if (r.basis_match >= 0) out << r.basis_match;
        else out << '-';
        out << '\t';
        if (r.error >= 0) out << r.error;
        else out << '-';
        out << '\n';
    }
}

// Rate table for one set of inputs: the average-efficiency bound evaluated
// at the worst-case completion, the plain estimate, and the ceiling variant.
Table rate_table(const KeyRateInputs& in) {
    validate(in);
    Table t;
    t.columns = {"bound",   "q_bar",          "delta_bar",     "eta_e_bar",
                 "eta_max", "rate",           "secure",        "insecure_threshold",
                 "out_of_regime", "eta_exceeds_max"};

    const double eta_bar =
        std::min(1.0, std::max(0.0, eta_bar_from_eta_e(in.q_bar, in.eta_e_bar)));
    const RateResult avg = rate_avg_eta(in.q_bar, eta_bar, in.delta_bar);
    const RateResult est = rate_estimated(in);
    const RateResult cap = rate_estimated_etamax(in);

    const auto row = [&](const char* name, const RateResult& r) {
        t.add_row({name, in.q_bar, in.delta_bar, in.eta_e_bar, in.eta_max, r.rate, r.secure,
                   r.insecure_threshold, r.out_of_regime, r.eta_exceeds_max});
    };
    row("avg_eta", avg);
    row("estimated", est);
    row("estimated_etamax", cap);
    return t;
}

int rate_verdict(const KeyRateInputs& in) {
    return rate_estimated_etamax(in).secure ? 0 : 2;
}

void emit_estimate_text(std::ostream& out, const EstimateResult& est, const RateResult& rate,
                        const RateResult& rate_cap) {
    const auto& in = est.inputs;
    const auto& d = est.diag;
    const auto line = [&](const char* k, const std::string& v) { out << k << " = " << v << "\n"; };
    line("q_bar", format_exact(in.q_bar));
    line("delta_bar", format_exact(in.delta_bar));
    line("eta_e_bar", format_exact(in.eta_e_bar));
    line("eta_max", format_exact(in.eta_max));
    line("rate_estimated", format_exact(rate.rate));
    line("rate_estimated_secure", rate.secure ? "true" : "false");
    line("rate_estimated_etamax", format_exact(rate_cap.rate));
    line("rate_estimated_etamax_secure", rate_cap.secure ? "true" : "false");
    line("q_t_raw", format_exact(d.q_t_raw));
    line("q_t_used", format_exact(d.q_t_used));
    line("eps_tot", format_exact(d.eps_tot));
    line("zeta", format_exact(d.zeta));
    line("zeta_clamped", d.zeta_clamped ? "true" : "false");
    line("eta_t", format_exact(d.eta_t));
    line("eta_t_clamped", d.eta_t_clamped ? "true" : "false");
    line("eta_t_no_information", d.eta_t_no_information ? "true" : "false");
    line("dark_measured", d.dark_measured ? "true" : "false");
    if (d.dark_measured) {
        line("dark_point", format_exact(d.dark.point));
        line("dark_upper", format_exact(d.dark.upper));
        line("dark_confidence", format_exact(d.dark.confidence));
    }
    line("se_q_bar", format_exact(d.se_q_bar));
    line("se_delta_bar", format_exact(d.se_delta_bar));
    line("se_q_t", format_exact(d.se_q_t));
    line("eta_e_exceeds_eta_max", d.eta_e_exceeds_eta_max ? "true" : "false");
    line("q_omega_consistent", d.q_omega_consistent ? "true" : "false");
}

int cmd_rate(const RunConfig& cfg, const std::string& format,
             const std::optional<fs::path>& out_dir) {
    const Table t = rate_table(cfg.keyrate);
    if (out_dir) {
        auto out = open_out(*out_dir / (format == "jsonlines" ? "rate.jsonl" : "rate.csv"));
        t.write(out, format);
    } else {
        t.write(std::cout, format);
    }
    return rate_verdict(cfg.keyrate);
}

int cmd_estimate(const RunConfig& cfg, const std::string& format,
                 const std::optional<fs::path>& out_dir) {
    if (!cfg.has_counts) {
        throw std::invalid_argument("estimate needs a [counts] section (--config or --counts)");
    }
    const EstimateResult est =
        estimate_pipeline(cfg.counts, cfg.source, cfg.assumptions, cfg.keyrate.eta_max);
    const RateResult rate = rate_estimated(est.inputs);
    const RateResult cap = rate_estimated_etamax(est.inputs);

    if (format == "text") {
        if (out_dir) {
            auto out = open_out(*out_dir / "estimate.txt");
            emit_estimate_text(out, est, rate, cap);
        } else {
            emit_estimate_text(std::cout, est, rate, cap);
        }
    } else {
        Table t;
        t.columns = {"q_bar", "delta_bar", "eta_e_bar", "eta_max", "q_t_raw", "q_t_used",
                     "eps_tot", "zeta", "eta_t", "dark_point", "rate_estimated",
                     "rate_estimated_etamax", "secure", "eta_e_exceeds_eta_max"};
        t.add_row({est.inputs.q_bar, est.inputs.delta_bar, est.inputs.eta_e_bar,
                   est.inputs.eta_max, est.diag.q_t_raw, est.diag.q_t_used, est.diag.eps_tot,
                   est.diag.zeta, est.diag.eta_t, est.diag.dark.point, rate.rate, cap.rate,
                   cap.secure, est.diag.eta_e_exceeds_eta_max});
        if (out_dir) {
            auto out =
                open_out(*out_dir / (format == "jsonlines" ? "estimate.jsonl" : "estimate.csv"));
            t.write(out, format);
        } else {
            t.write(std::cout, format);
        }
    }
    return cap.secure ? 0 : 2;
}

int cmd_simulate(const RunConfig& cfg, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    const SessionResult res =
        run_session(cfg.n_gates, cfg.detector, cfg.source, cfg.attack, cfg.seed, cfg.trace);
    write_counts_file((out_dir / "counts.ini").string(), res.counts, cfg);
    if (cfg.trace) write_trace(out_dir / "trace.tsv", res);

    const KeyRateInputs truth = true_keyrate_inputs(res);
    const EveInfoReport report = eve_information(res, truth);
    auto out = open_out(out_dir / "summary.txt");
    const auto& c = res.counts;
    out << "n_gates = " << cfg.n_gates << "\n";
    out << "seed = " << cfg.seed << "\n";
    out << "signal_gates = " << c.signal_gates << "\n";
    out << "q_bar = " << format_exact(truth.q_bar) << "\n";
    out << "delta_bar = " << format_exact(truth.delta_bar) << "\n";
    out << "q_t = "
        << format_exact(c.test_gates > 0
                            ? static_cast<double>(c.test_clicks) / c.test_gates
                            : 0.0)
        << "\n";
    out << "dark_point = "
        << format_exact(c.dark_gates > 0
                            ? static_cast<double>(c.dark_clicks) / c.dark_gates
                            : 0.0)
        << "\n";
    out << "true_eta_bar = " << format_exact(res.true_eta_bar()) << "\n";
    out << "eve_known_fraction = " << format_exact(res.eve_known_fraction) << "\n";
    out << "eve_bound = " << format_exact(report.bound) << "\n";
    out << "eve_margin = " << format_exact(report.margin) << "\n";
    out << "eve_bound_violated = " << (report.violated ? "true" : "false") << "\n";
    return 0;
}

Table figure3(int points) {
    Table t;
    t.comments = {"estimated-efficiency rate bound vs eta_e_bar",
                  "curve parameters (q_bar, delta_bar) are tool defaults, not normative"};
    t.columns = {"q_bar", "delta_bar", "eta_e_bar", "rate", "secure"};
    const std::vector<std::pair<double, double>> curves = {
        {1.0, 0.0}, {0.9, 0.01}, {0.8, 0.03}, {0.7, 0.05}};
    for (const auto& [q, delta] : curves) {
        for (int i = 0; i <= points; ++i) {
            const double eta_e = static_cast<double>(i) / points;
            const auto r = rate_estimated({q, delta, eta_e, 1.0});
            t.add_row({q, delta, eta_e, r.rate, r.secure});
        }
    }
    return t;
}

Table figure4(int points) {
    Table t;
    t.comments = {"rate bound when the estimate equals the trusted ceiling",
                  "valid for any yield; error rates are tool defaults"};
    t.columns = {"delta_bar", "eta_e_bar", "rate", "secure"};
    for (const double delta : {0.0, 0.02, 0.05}) {
        for (int i = 1; i <= points; ++i) {
            const double eta = static_cast<double>(i) / points;
            const auto r = rate_estimated_etamax({1.0, delta, eta, eta});
            t.add_row({delta, eta, r.rate, r.secure});
        }
    }
    return t;
}

Table figure5(int points) {
    Table t;
    t.comments = {"estimated efficiency vs test-pulse mean photon number",
                  "independent per-photon detection; zeta = eps_tot = 0"};
    t.columns = {"eta", "dark_rate", "mu", "q_t", "eta_t", "eta_e"};
    const ReceiverAssumptions a;
    const std::vector<std::pair<double, double>> detectors = {{0.1, 2e-5}, {0.4, 2e-5}};
    const double lg_lo = std::log10(1e-4), lg_hi = std::log10(0.5);
    for (const auto& [eta, d] : detectors) {
        for (int i = 0; i <= points; ++i) {
            const double mu =
                std::pow(10.0, lg_lo + (lg_hi - lg_lo) * static_cast<double>(i) / points);
            const double q_t = poisson_click_probability(mu, eta, d);
            const double eta_t = eta_t_faint_laser(q_t, mu, d, a).value;
            const double eta_e = eta_e_faint_laser(eta_t, 0.0);
            t.add_row({eta, d, mu, q_t, eta_t, eta_e});
        }
    }
    return t;
}

void figure_svg(int which, const Table& t, const fs::path& path) {
    using qkdcal_cli::LineChart;
    using qkdcal_cli::Series;
    if (which == 3) {
        LineChart chart("rate bound vs estimated efficiency", "eta_e_bar", "rate");
        Series s;
        std::string cur;
        for (const auto& row : t.rows) {
            const std::string label =
                "q=" + fmt9(row[0].get<double>()) + " d=" + fmt9(row[1].get<double>());
            if (label != cur) {
                if (!s.x.empty()) chart.add(s);
                s = Series{label, {}, {}};
                cur = label;
            }
            s.x.push_back(row[2].get<double>());
            s.y.push_back(std::max(0.0, row[3].get<double>()));
        }
        if (!s.x.empty()) chart.add(s);
        chart.write(path.string());
    } else if (which == 4) {
        LineChart chart("rate bound at the trusted ceiling", "eta_e_bar = eta_max", "rate");
        Series s;
        std::string cur;
        for (const auto& row : t.rows) {
            const std::string label = "delta=" + fmt9(row[0].get<double>());
            if (label != cur) {
                if (!s.x.empty()) chart.add(s);
                s = Series{label, {}, {}};
                cur = label;
            }
            s.x.push_back(row[1].get<double>());
            s.y.push_back(std::max(0.0, row[2].get<double>()));
        }
        if (!s.x.empty()) chart.add(s);
        chart.write(path.string());
    } else {
        LineChart chart("estimated efficiency vs mean photon number", "mu", "eta_e", true);
        Series s;
        std::string cur;
        for (const auto& row : t.rows) {
            const std::string label = "eta=" + fmt9(row[0].get<double>());
            if (label != cur) {
                if (!s.x.empty()) chart.add(s);
                s = Series{label, {}, {}};
                cur = label;
            }
            s.x.push_back(row[2].get<double>());
            s.y.push_back(row[5].get<double>());
        }
        if (!s.x.empty()) chart.add(s);
        chart.write(path.string());
    }
}

int cmd_figures(int which, const fs::path& out_dir, const std::string& format, int points) {
    fs::create_directories(out_dir);
    const std::vector<int> all = which == 0 ? std::vector<int>{3, 4, 5} : std::vector<int>{which};
    for (const int fig : all) {
        Table t;
        if (fig == 3) t = figure3(points);
        else if (fig == 4) t = figure4(points);
        else t = figure5(points);
        const std::string stem = "fig" + std::to_string(fig);
        auto out = open_out(out_dir / (stem + (format == "jsonlines" ? ".jsonl" : ".csv")));
        t.write(out, format);
        figure_svg(fig, t, out_dir / (stem + ".svg"));
    }
    return 0;
}

int cmd_sweep(const RunConfig& cfg, const std::string& format,
              const std::optional<fs::path>& out_dir) {
    if (!cfg.has_sweep) {
        throw std::invalid_argument("sweep needs a [sweep] section or --param/--min/--max/--steps");
    }
    const auto& sw = cfg.sweep;
    if (sw.steps < 1) throw std::invalid_argument("sweep: steps must be >= 1");
    const bool known = sw.parameter == "q_bar" || sw.parameter == "delta_bar" ||
                       sw.parameter == "eta_e_bar" || sw.parameter == "eta_max" ||
                       sw.parameter == "eta_ceiling";
    if (!known) {
        throw std::invalid_argument(
            "sweep: unknown parameter '" + sw.parameter +
            "' (expected q_bar, delta_bar, eta_e_bar, eta_max or eta_ceiling)");
    }

    Table t;
    t.columns = {"index",   "parameter",      "value",
                 "q_bar",   "delta_bar",      "eta_e_bar",
                 "eta_max", "rate_avg_eta",   "rate_estimated",
                 "rate_estimated_etamax", "secure"};
    for (int i = 0; i <= sw.steps; ++i) {
        KeyRateInputs in = cfg.keyrate;
        const double v = sw.min + (sw.max - sw.min) * static_cast<double>(i) / sw.steps;
        if (sw.parameter == "q_bar") in.q_bar = v;
        else if (sw.parameter == "delta_bar") in.delta_bar = v;
        else if (sw.parameter == "eta_e_bar") in.eta_e_bar = v;
        else if (sw.parameter == "eta_max") in.eta_max = v;
        else {
            // estimate pinned to the ceiling: the detector performs exactly
            // as trusted
            in.eta_e_bar = v;
            in.eta_max = v;
        }
        const double eta_bar =
            std::min(1.0, std::max(0.0, eta_bar_from_eta_e(in.q_bar, in.eta_e_bar)));
        const auto avg = rate_avg_eta(in.q_bar, eta_bar, in.delta_bar);
        const auto est = rate_estimated(in);
        const auto cap = rate_estimated_etamax(in);
        t.add_row({i, sw.parameter, v, in.q_bar, in.delta_bar, in.eta_e_bar, in.eta_max,
                   avg.rate, est.rate, cap.rate, cap.secure});
    }
    if (out_dir) {
        auto out = open_out(*out_dir / (format == "jsonlines" ? "sweep.jsonl" : "sweep.csv"));
        t.write(out, format);
    } else {
        t.write(std::cout, format);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"BB84 key-rate bounds with real-time receiver calibration"};
    app.require_subcommand(1);

    std::string config_path, counts_path, format = "csv", out_path;
    uint64_t seed = 0, gates = 0;
    bool trace_flag = false;
    double q_bar = -1.0, delta_bar = -1.0, eta_e = -1.0, eta_max = -1.0;
    double sweep_min = 0.0, sweep_max = 1.0;
    std::string sweep_param;
    int sweep_steps = 0, fig_which = 0, fig_points = 200;

    const auto add_common = [&](CLI::App* cmd, bool with_format = true) {
        cmd->add_option("--config", config_path, "configuration file");
        cmd->add_option("--seed", seed, "override the configured seed");
        cmd->add_option("--out", out_path, "output directory");
        if (with_format) {
            cmd->add_option("--format", format, "csv or jsonlines")
                ->check(CLI::IsMember({"csv", "jsonlines", "text"}));
        }
    };

    CLI::App* rate = app.add_subcommand("rate", "evaluate the rate bounds for given inputs");
    add_common(rate);
    rate->add_option("--q-bar", q_bar, "average yield");
    rate->add_option("--delta-bar", delta_bar, "average error rate");
    rate->add_option("--eta-e", eta_e, "estimated detection efficiency");
    rate->add_option("--eta-max", eta_max, "trusted efficiency ceiling");

    CLI::App* estimate = app.add_subcommand("estimate", "counts -> efficiency estimate and rate");
    add_common(estimate);
    estimate->add_option("--counts", counts_path, "counts file from a simulation");
    estimate->add_option("--eta-max", eta_max, "trusted efficiency ceiling");

    CLI::App* simulate = app.add_subcommand("simulate", "run a Monte-Carlo session");
    add_common(simulate, false);
    simulate->add_option("--gates", gates, "override the configured gate count");
    simulate->add_flag("--trace", trace_flag, "write the per-gate trace");

    CLI::App* figures = app.add_subcommand("figures", "emit rate/estimation curves");
    add_common(figures);
    figures->add_option("--which", fig_which, "3, 4 or 5 (default: all)")
        ->check(CLI::IsMember({3, 4, 5}));
    figures->add_option("--points", fig_points, "samples per curve")
        ->check(CLI::PositiveNumber);

    CLI::App* sweep = app.add_subcommand("sweep", "sweep one rate parameter");
    add_common(sweep);
    sweep->add_option("--param", sweep_param, "q_bar, delta_bar, eta_e_bar or eta_max");
    sweep->add_option("--min", sweep_min, "sweep start");
    sweep->add_option("--max", sweep_max, "sweep end");
    sweep->add_option("--steps", sweep_steps, "number of intervals");
    sweep->add_option("--q-bar", q_bar, "base yield");
    sweep->add_option("--delta-bar", delta_bar, "base error rate");
    sweep->add_option("--eta-e", eta_e, "base efficiency estimate");
    sweep->add_option("--eta-max", eta_max, "base efficiency ceiling");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        RunConfig cfg;
        if (estimate->parsed() && !counts_path.empty()) {
            // The counts file is self-contained; an explicit --config
            // overrides the sections it also defines.
            cfg = load_config(counts_path);
            if (!cfg.has_counts) {
                throw std::invalid_argument("counts file lacks a [counts] section");
            }
            if (!config_path.empty()) {
                const RunConfig main_cfg = load_config(config_path);
                if (main_cfg.has_assumptions) cfg.assumptions = main_cfg.assumptions;
                if (main_cfg.has_source) cfg.source = main_cfg.source;
                if (main_cfg.has_keyrate) cfg.keyrate = main_cfg.keyrate;
            }
        } else if (!config_path.empty()) {
            cfg = load_config(config_path);
        }

        CLI::App* active = app.get_subcommands().front();
        const auto given = [&](const char* name) {
            const CLI::Option* opt = active->get_option_no_throw(name);
            return opt != nullptr && opt->count() > 0;
        };
        if (given("--seed")) cfg.seed = seed;
        if (given("--gates")) cfg.n_gates = gates;
        if (trace_flag) cfg.trace = true;
        if (q_bar >= 0.0) cfg.keyrate.q_bar = q_bar;
        if (delta_bar >= 0.0) cfg.keyrate.delta_bar = delta_bar;
        if (eta_e >= 0.0) cfg.keyrate.eta_e_bar = eta_e;
        if (eta_max >= 0.0) cfg.keyrate.eta_max = eta_max;
        if (!sweep_param.empty()) {
            cfg.has_sweep = true;
            cfg.sweep.parameter = sweep_param;
            cfg.sweep.min = sweep_min;
            cfg.sweep.max = sweep_max;
        }
        if (sweep_steps > 0) {
            cfg.has_sweep = cfg.has_sweep || !cfg.sweep.parameter.empty();
            cfg.sweep.steps = sweep_steps;
        }

        const std::optional<fs::path> out_dir =
            out_path.empty() ? std::nullopt : std::optional<fs::path>(out_path);
        if (out_dir) fs::create_directories(*out_dir);

        if (rate->parsed()) return cmd_rate(cfg, format == "text" ? "csv" : format, out_dir);
        if (estimate->parsed()) {
            if (format == "csv" && !estimate->count("--format")) format = "text";
            return cmd_estimate(cfg, format, out_dir);
        }
        if (simulate->parsed()) {
            if (out_path.empty()) throw std::invalid_argument("simulate needs --out DIR");
            return cmd_simulate(cfg, out_path);
        }
        if (figures->parsed()) {
            if (out_path.empty()) throw std::invalid_argument("figures needs --out DIR");
            return cmd_figures(fig_which, out_path, format == "text" ? "csv" : format,
                               fig_points);
        }
        return cmd_sweep(cfg, format == "text" ? "csv" : format, out_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
