#include "qkdcal/config.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace qkdcal {

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s = {
        {"keyrate", {"q_bar", "delta_bar", "eta_e_bar", "eta_max"}},
        {"assumptions",
         {"eps_e", "eps_omega", "eps_t", "eps_i", "eps_s", "zeta_omega", "zeta_k", "q_omega"}},
        {"detector",
         {"eta_plateau", "rise_fraction", "fall_fraction", "dark_rate", "blindable",
          "blind_click_threshold", "superlinearity"}},
        {"source",
         {"kind", "mu", "p_test", "deflecting", "dark_calibration_fraction",
          "deflection_leakage"}},
        {"attack",
         {"kind", "loss", "blind_fraction", "trigger_intensity", "basis_policy",
          "eta_bar_target", "delta_bar_target", "q_bar_target", "shift"}},
        {"run", {"n_gates", "seed", "trace"}},
        {"sweep", {"parameter", "min", "max", "steps"}},
        {"counts",
         {"test_gates", "test_clicks", "dark_gates", "dark_clicks", "signal_gates",
          "signal_clicks", "sifted_errors", "sifted_bits"}},
    };
    return s;
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

[[noreturn]] void fail(const std::string& origin, int line, const std::string& msg) {
    throw std::invalid_argument(origin + ":" + std::to_string(line) + ": " + msg);
}

double to_double(const std::string& v, const std::string& origin, int line) {
    try {
        size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        fail(origin, line, "expected a number, got '" + v + "'");
    }
}

uint64_t to_count(const std::string& v, const std::string& origin, int line) {
    try {
        size_t pos = 0;
        const unsigned long long n = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return n;
    } catch (const std::exception&) {
        fail(origin, line, "expected a nonnegative integer, got '" + v + "'");
    }
}

int to_int(const std::string& v, const std::string& origin, int line) {
    try {
        size_t pos = 0;
        const int n = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return n;
    } catch (const std::exception&) {
        fail(origin, line, "expected an integer, got '" + v + "'");
    }
}

bool to_bool(const std::string& v, const std::string& origin, int line) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    fail(origin, line, "expected true/false, got '" + v + "'");
}

}  // namespace

RunConfig parse_config(std::istream& in, const std::string& origin) {
    RunConfig cfg;
    std::string attack_kind = "honest";
    HonestChannel honest;
    BlindingAttack blinding;
    TightnessAttack tightness;
    TimeShiftAttack time_shift;
    bool has_attack = false;

    std::string section;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']') fail(origin, lineno, "unterminated section header");
            section = trim(t.substr(1, t.size() - 2));
            if (schema().find(section) == schema().end()) {
                fail(origin, lineno, "unknown section [" + section + "]");
            }
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) fail(origin, lineno, "expected key = value");
        if (section.empty()) fail(origin, lineno, "key outside any section");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        const auto& keys = schema().at(section);
        if (keys.find(key) == keys.end()) {
            fail(origin, lineno, "unknown key '" + key + "' in section [" + section + "]");
        }

        if (section == "keyrate") {
            cfg.has_keyrate = true;
            if (key == "q_bar") cfg.keyrate.q_bar = to_double(value, origin, lineno);
            else if (key == "delta_bar") cfg.keyrate.delta_bar = to_double(value, origin, lineno);
            else if (key == "eta_e_bar") cfg.keyrate.eta_e_bar = to_double(value, origin, lineno);
            else cfg.keyrate.eta_max = to_double(value, origin, lineno);
        } else if (section == "assumptions") {
            cfg.has_assumptions = true;
            const double d = to_double(value, origin, lineno);
            auto& a = cfg.assumptions;
            if (key == "eps_e") a.eps_e = d;
            else if (key == "eps_omega") a.eps_omega = d;
            else if (key == "eps_t") a.eps_t = d;
            else if (key == "eps_i") a.eps_i = d;
            else if (key == "eps_s") a.eps_s = d;
            else if (key == "zeta_omega") a.zeta_omega = d;
            else if (key == "zeta_k") a.zeta_k = d;
            else a.q_omega = d;
        } else if (section == "detector") {
            cfg.has_detector = true;
            auto& det = cfg.detector;
            if (key == "eta_plateau") det.eta_plateau = to_double(value, origin, lineno);
            else if (key == "rise_fraction") det.rise_fraction = to_double(value, origin, lineno);
            else if (key == "fall_fraction") det.fall_fraction = to_double(value, origin, lineno);
            else if (key == "dark_rate") det.dark_rate = to_double(value, origin, lineno);
            else if (key == "blindable") det.blindable = to_bool(value, origin, lineno);
            else if (key == "blind_click_threshold")
                det.blind_click_threshold = to_double(value, origin, lineno);
            else det.superlinearity = to_double(value, origin, lineno);
        } else if (section == "source") {
            cfg.has_source = true;
            auto& src = cfg.source;
            if (key == "kind") {
                if (value == "single_photon") src.kind = SourceKind::single_photon;
                else if (value == "poisson") src.kind = SourceKind::poisson;
                else fail(origin, lineno, "source kind must be single_photon or poisson");
            } else if (key == "mu") src.mu = to_double(value, origin, lineno);
            else if (key == "p_test") src.p_test = to_double(value, origin, lineno);
            else if (key == "deflecting") src.deflecting = to_bool(value, origin, lineno);
            else if (key == "dark_calibration_fraction")
                src.dark_calibration_fraction = to_double(value, origin, lineno);
            else src.deflection_leakage = to_double(value, origin, lineno);
        } else if (section == "attack") {
            has_attack = true;
            if (key == "kind") {
                if (value != "honest" && value != "blinding" && value != "tightness" &&
                    value != "time_shift") {
                    fail(origin, lineno, "unknown attack kind '" + value + "'");
                }
                attack_kind = value;
            } else if (key == "loss") honest.loss = to_double(value, origin, lineno);
            else if (key == "blind_fraction")
                blinding.blind_fraction = to_double(value, origin, lineno);
            else if (key == "trigger_intensity")
                blinding.trigger_intensity = to_double(value, origin, lineno);
            else if (key == "basis_policy") {
                if (value == "random") blinding.basis_policy = EveBasisPolicy::uniform_random;
                else if (value == "fixed_z") blinding.basis_policy = EveBasisPolicy::fixed_z;
                else fail(origin, lineno, "basis_policy must be random or fixed_z");
            } else if (key == "eta_bar_target")
                tightness.eta_bar_target = to_double(value, origin, lineno);
            else if (key == "delta_bar_target")
                tightness.delta_bar_target = to_double(value, origin, lineno);
            else if (key == "q_bar_target")
                tightness.q_bar_target = to_double(value, origin, lineno);
            else time_shift.shift = to_double(value, origin, lineno);
        } else if (section == "run") {
            if (key == "n_gates") cfg.n_gates = to_count(value, origin, lineno);
            else if (key == "seed") cfg.seed = to_count(value, origin, lineno);
            else cfg.trace = to_bool(value, origin, lineno);
        } else if (section == "sweep") {
            cfg.has_sweep = true;
            if (key == "parameter") cfg.sweep.parameter = value;
            else if (key == "min") cfg.sweep.min = to_double(value, origin, lineno);
            else if (key == "max") cfg.sweep.max = to_double(value, origin, lineno);
            else cfg.sweep.steps = to_int(value, origin, lineno);
        } else if (section == "counts") {
            cfg.has_counts = true;
            auto& c = cfg.counts;
            const uint64_t n = to_count(value, origin, lineno);
            if (key == "test_gates") c.test_gates = n;
            else if (key == "test_clicks") c.test_clicks = n;
            else if (key == "dark_gates") c.dark_gates = n;
            else if (key == "dark_clicks") c.dark_clicks = n;
            else if (key == "signal_gates") c.signal_gates = n;
            else if (key == "signal_clicks") c.signal_clicks = n;
            else if (key == "sifted_errors") c.sifted_errors = n;
            else c.sifted_bits = n;
        }
    }

    if (has_attack) {
        if (attack_kind == "honest") cfg.attack = honest;
        else if (attack_kind == "blinding") cfg.attack = blinding;
        else if (attack_kind == "tightness") cfg.attack = tightness;
        else cfg.attack = time_shift;
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("cannot open config file '" + path + "'");
    }
    return parse_config(in, path);
}

std::string format_exact(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_counts_file(std::ostream& out, const TestCounts& counts, const RunConfig& cfg) {
    out << "# session counts, consumable by the estimate command\n";
    out << "[counts]\n";
    out << "test_gates = " << counts.test_gates << "\n";
    out << "test_clicks = " << counts.test_clicks << "\n";
    out << "dark_gates = " << counts.dark_gates << "\n";
    out << "dark_clicks = " << counts.dark_clicks << "\n";
    out << "signal_gates = " << counts.signal_gates << "\n";
    out << "signal_clicks = " << counts.signal_clicks << "\n";
    out << "sifted_errors = " << counts.sifted_errors << "\n";
    out << "sifted_bits = " << counts.sifted_bits << "\n";
    out << "\n[assumptions]\n";
    const auto& a = cfg.assumptions;
    out << "eps_e = " << format_exact(a.eps_e) << "\n";
    out << "eps_omega = " << format_exact(a.eps_omega) << "\n";
    out << "eps_t = " << format_exact(a.eps_t) << "\n";
    out << "eps_i = " << format_exact(a.eps_i) << "\n";
    out << "eps_s = " << format_exact(a.eps_s) << "\n";
    out << "zeta_omega = " << format_exact(a.zeta_omega) << "\n";
    out << "zeta_k = " << format_exact(a.zeta_k) << "\n";
    out << "q_omega = " << format_exact(a.q_omega) << "\n";
    out << "\n[source]\n";
    const auto& s = cfg.source;
    out << "kind = " << (s.kind == SourceKind::single_photon ? "single_photon" : "poisson")
        << "\n";
    out << "mu = " << format_exact(s.mu) << "\n";
    out << "p_test = " << format_exact(s.p_test) << "\n";
    out << "deflecting = " << (s.deflecting ? "true" : "false") << "\n";
    out << "dark_calibration_fraction = " << format_exact(s.dark_calibration_fraction) << "\n";
    out << "deflection_leakage = " << format_exact(s.deflection_leakage) << "\n";
    out << "\n[keyrate]\n";
    out << "eta_max = " << format_exact(cfg.keyrate.eta_max) << "\n";
}

void write_counts_file(const std::string& path, const TestCounts& counts,
                       const RunConfig& cfg) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write counts file '" + path + "'");
    }
    write_counts_file(out, counts, cfg);
}

}  // namespace qkdcal
