#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qkdcal/estimation.hpp"
#include "qkdcal/keyrate.hpp"
#include "qkdcal/rng.hpp"
#include "qkdcal/sim.hpp"

namespace py = pybind11;
using namespace qkdcal;

PYBIND11_MODULE(_qkdcal, m) {
    m.doc() = "BB84 key-rate bounds with real-time receiver calibration: closed-form "
              "rate and estimation formulas plus a gate-level Monte-Carlo simulator.";

    // ---- key rate -----------------------------------------------------------
    m.def("binary_entropy", &binary_entropy, py::arg("x"));

    py::class_<KeyRateInputs>(m, "KeyRateInputs")
        .def(py::init<>())
        .def(py::init<double, double, double, double>(), py::arg("q_bar"),
             py::arg("delta_bar"), py::arg("eta_e_bar"), py::arg("eta_max") = 1.0)
        .def_readwrite("q_bar", &KeyRateInputs::q_bar)
        .def_readwrite("delta_bar", &KeyRateInputs::delta_bar)
        .def_readwrite("eta_e_bar", &KeyRateInputs::eta_e_bar)
        .def_readwrite("eta_max", &KeyRateInputs::eta_max)
        .def("__repr__", [](const KeyRateInputs& in) {
            return "KeyRateInputs(q_bar=" + std::to_string(in.q_bar) +
                   ", delta_bar=" + std::to_string(in.delta_bar) +
                   ", eta_e_bar=" + std::to_string(in.eta_e_bar) +
                   ", eta_max=" + std::to_string(in.eta_max) + ")";
        });

    py::class_<MixtureComponent>(m, "MixtureComponent")
        .def(py::init<double, double, double, double>(), py::arg("p"), py::arg("q"),
             py::arg("eta"), py::arg("delta"))
        .def_readwrite("p", &MixtureComponent::p)
        .def_readwrite("q", &MixtureComponent::q)
        .def_readwrite("eta", &MixtureComponent::eta)
        .def_readwrite("delta", &MixtureComponent::delta);

    py::class_<MixtureAverages>(m, "MixtureAverages")
        .def_readonly("q_bar", &MixtureAverages::q_bar)
        .def_readonly("eta_bar", &MixtureAverages::eta_bar)
        .def_readonly("delta_bar", &MixtureAverages::delta_bar);

    m.def(
        "mixture_averages",
        [](const std::vector<MixtureComponent>& components) {
            return mixture_averages(EveMixture{components});
        },
        py::arg("components"));

    py::class_<EntropyBound>(m, "EntropyBound")
        .def_readonly("h_per_pulse", &EntropyBound::h_per_pulse)
        .def_readonly("in_regime", &EntropyBound::in_regime);
    m.def("privacy_amp_bound", &privacy_amp_bound, py::arg("q_bar"), py::arg("eta_bar"),
          py::arg("delta_bar"));

    m.def("rate_constant_eta", &rate_constant_eta, py::arg("eta"), py::arg("delta_bar"));

    py::class_<RateResult>(m, "RateResult")
        .def_readonly("rate", &RateResult::rate)
        .def_readonly("secure", &RateResult::secure)
        .def_readonly("insecure_threshold", &RateResult::insecure_threshold)
        .def_readonly("out_of_regime", &RateResult::out_of_regime)
        .def_readonly("eta_exceeds_max", &RateResult::eta_exceeds_max)
        .def("__repr__", [](const RateResult& r) {
            return "RateResult(rate=" + std::to_string(r.rate) +
                   ", secure=" + (r.secure ? std::string("True") : std::string("False")) + ")";
        });
    m.def("rate_avg_eta", &rate_avg_eta, py::arg("q_bar"), py::arg("eta_bar"),
          py::arg("delta_bar"));
    m.def("rate_estimated", &rate_estimated, py::arg("inputs"));
    m.def("rate_estimated_etamax", &rate_estimated_etamax, py::arg("inputs"));
    m.def("eta_e_from_eta_bar", &eta_e_from_eta_bar, py::arg("q_bar"), py::arg("eta_bar"),
          py::arg("eta_max") = 1.0);
    m.def("eta_bar_from_eta_e", &eta_bar_from_eta_e, py::arg("q_bar"), py::arg("eta_e_bar"),
          py::arg("eta_max") = 1.0);

    // ---- estimation ----------------------------------------------------------
    py::enum_<TestMode>(m, "TestMode")
        .value("deflecting", TestMode::deflecting)
        .value("non_deflecting", TestMode::non_deflecting);

    py::class_<ReceiverAssumptions>(m, "ReceiverAssumptions")
        .def(py::init<>())
        .def_readwrite("eps_e", &ReceiverAssumptions::eps_e)
        .def_readwrite("eps_omega", &ReceiverAssumptions::eps_omega)
        .def_readwrite("eps_t", &ReceiverAssumptions::eps_t)
        .def_readwrite("eps_i", &ReceiverAssumptions::eps_i)
        .def_readwrite("eps_s", &ReceiverAssumptions::eps_s)
        .def_readwrite("zeta_omega", &ReceiverAssumptions::zeta_omega)
        .def_readwrite("zeta_k", &ReceiverAssumptions::zeta_k)
        .def_readwrite("q_omega", &ReceiverAssumptions::q_omega);
    m.def("eps_total", &eps_total, py::arg("assumptions"), py::arg("mode"));

    py::class_<TestCounts>(m, "TestCounts")
        .def(py::init<>())
        .def_readwrite("test_gates", &TestCounts::test_gates)
        .def_readwrite("test_clicks", &TestCounts::test_clicks)
        .def_readwrite("dark_gates", &TestCounts::dark_gates)
        .def_readwrite("dark_clicks", &TestCounts::dark_clicks)
        .def_readwrite("signal_gates", &TestCounts::signal_gates)
        .def_readwrite("signal_clicks", &TestCounts::signal_clicks)
        .def_readwrite("sifted_errors", &TestCounts::sifted_errors)
        .def_readwrite("sifted_bits", &TestCounts::sifted_bits);

    py::enum_<SourceKind>(m, "SourceKind")
        .value("single_photon", SourceKind::single_photon)
        .value("poisson", SourceKind::poisson);

    py::class_<TestSourceConfig>(m, "TestSourceConfig")
        .def(py::init<>())
        .def_readwrite("kind", &TestSourceConfig::kind)
        .def_readwrite("mu", &TestSourceConfig::mu)
        .def_readwrite("p_test", &TestSourceConfig::p_test)
        .def_readwrite("deflecting", &TestSourceConfig::deflecting)
        .def_readwrite("dark_calibration_fraction", &TestSourceConfig::dark_calibration_fraction)
        .def_readwrite("deflection_leakage", &TestSourceConfig::deflection_leakage);

    py::class_<ZetaResult>(m, "ZetaResult")
        .def_readonly("zeta", &ZetaResult::zeta)
        .def_readonly("clamped", &ZetaResult::clamped);
    m.def("zeta_total", &zeta_total, py::arg("delta_bar"), py::arg("assumptions"));

    py::class_<EfficiencyBound>(m, "EfficiencyBound")
        .def_readonly("value", &EfficiencyBound::value)
        .def_readonly("clamped", &EfficiencyBound::clamped)
        .def_readonly("no_information", &EfficiencyBound::no_information);
    m.def("eta_t_single_photon", &eta_t_single_photon, py::arg("q_t"), py::arg("assumptions"),
          py::arg("mode") = TestMode::deflecting, py::arg("q_bar") = 0.0);
    m.def("eta_e_single_photon", &eta_e_single_photon, py::arg("eta_t"), py::arg("zeta"));
    m.def("eta_t_faint_laser", &eta_t_faint_laser, py::arg("q_t"), py::arg("mu"),
          py::arg("dark_rate"), py::arg("assumptions"),
          py::arg("mode") = TestMode::deflecting);
    m.def("eta_e_faint_laser", &eta_e_faint_laser, py::arg("eta_t"), py::arg("zeta"));
    m.def("poisson_click_probability", &poisson_click_probability, py::arg("mu"),
          py::arg("eta"), py::arg("dark_rate"));

    py::class_<DarkCountBound>(m, "DarkCountBound")
        .def_readonly("point", &DarkCountBound::point)
        .def_readonly("upper", &DarkCountBound::upper)
        .def_readonly("confidence", &DarkCountBound::confidence);
    m.def("dark_count_bound", &dark_count_bound, py::arg("counts"),
          py::arg("confidence") = 1.0 - 1e-6);

    py::class_<EstimateDiagnostics>(m, "EstimateDiagnostics")
        .def_readonly("q_t_raw", &EstimateDiagnostics::q_t_raw)
        .def_readonly("q_t_used", &EstimateDiagnostics::q_t_used)
        .def_readonly("eps_tot", &EstimateDiagnostics::eps_tot)
        .def_readonly("zeta", &EstimateDiagnostics::zeta)
        .def_readonly("zeta_clamped", &EstimateDiagnostics::zeta_clamped)
        .def_readonly("eta_t", &EstimateDiagnostics::eta_t)
        .def_readonly("eta_t_clamped", &EstimateDiagnostics::eta_t_clamped)
        .def_readonly("eta_t_no_information", &EstimateDiagnostics::eta_t_no_information)
        .def_readonly("dark", &EstimateDiagnostics::dark)
        .def_readonly("dark_measured", &EstimateDiagnostics::dark_measured)
        .def_readonly("se_q_bar", &EstimateDiagnostics::se_q_bar)
        .def_readonly("se_delta_bar", &EstimateDiagnostics::se_delta_bar)
        .def_readonly("se_q_t", &EstimateDiagnostics::se_q_t)
        .def_readonly("eta_e_exceeds_eta_max", &EstimateDiagnostics::eta_e_exceeds_eta_max)
        .def_readonly("q_omega_consistent", &EstimateDiagnostics::q_omega_consistent);

    py::class_<EstimateResult>(m, "EstimateResult")
        .def_readonly("inputs", &EstimateResult::inputs)
        .def_readonly("diag", &EstimateResult::diag);
    m.def("estimate_pipeline", &estimate_pipeline, py::arg("counts"), py::arg("source"),
          py::arg("assumptions"), py::arg("eta_max") = 1.0);

    // ---- simulation ------------------------------------------------------------
    py::class_<DetectorModel>(m, "DetectorModel")
        .def(py::init<>())
        .def_readwrite("eta_plateau", &DetectorModel::eta_plateau)
        .def_readwrite("rise_fraction", &DetectorModel::rise_fraction)
        .def_readwrite("fall_fraction", &DetectorModel::fall_fraction)
        .def_readwrite("dark_rate", &DetectorModel::dark_rate)
        .def_readwrite("blindable", &DetectorModel::blindable)
        .def_readwrite("blind_click_threshold", &DetectorModel::blind_click_threshold)
        .def_readwrite("superlinearity", &DetectorModel::superlinearity);
    m.def("efficiency_at", &efficiency_at, py::arg("detector"), py::arg("t"));

    py::class_<HonestChannel>(m, "HonestChannel")
        .def(py::init<double>(), py::arg("loss") = 0.0)
        .def_readwrite("loss", &HonestChannel::loss);
    py::enum_<EveBasisPolicy>(m, "EveBasisPolicy")
        .value("uniform_random", EveBasisPolicy::uniform_random)
        .value("fixed_z", EveBasisPolicy::fixed_z);
    py::class_<BlindingAttack>(m, "BlindingAttack")
        .def(py::init<double, double, EveBasisPolicy>(), py::arg("blind_fraction") = 1.0,
             py::arg("trigger_intensity") = 1.5,
             py::arg("basis_policy") = EveBasisPolicy::uniform_random)
        .def_readwrite("blind_fraction", &BlindingAttack::blind_fraction)
        .def_readwrite("trigger_intensity", &BlindingAttack::trigger_intensity)
        .def_readwrite("basis_policy", &BlindingAttack::basis_policy);
    py::class_<TightnessAttack>(m, "TightnessAttack")
        .def(py::init<double, double, double>(), py::arg("eta_bar_target") = 0.5,
             py::arg("delta_bar_target") = 0.0, py::arg("q_bar_target") = 0.5)
        .def_readwrite("eta_bar_target", &TightnessAttack::eta_bar_target)
        .def_readwrite("delta_bar_target", &TightnessAttack::delta_bar_target)
        .def_readwrite("q_bar_target", &TightnessAttack::q_bar_target);
    py::class_<TimeShiftAttack>(m, "TimeShiftAttack")
        .def(py::init<double>(), py::arg("shift") = 0.0)
        .def_readwrite("shift", &TimeShiftAttack::shift);

    py::enum_<GateKind>(m, "GateKind")
        .value("signal", GateKind::signal)
        .value("test", GateKind::test)
        .value("dark", GateKind::dark);
    py::enum_<AttackState>(m, "AttackState")
        .value("none", AttackState::none)
        .value("blinded", AttackState::blinded)
        .value("blocked", AttackState::blocked)
        .value("sensitive", AttackState::sensitive)
        .value("vacuum", AttackState::vacuum)
        .value("shifted", AttackState::shifted);
    py::class_<TraceRecord>(m, "TraceRecord")
        .def_readonly("gate_index", &TraceRecord::gate_index)
        .def_readonly("kind", &TraceRecord::kind)
        .def_readonly("attack_state", &TraceRecord::attack_state)
        .def_readonly("click", &TraceRecord::click)
        .def_readonly("time", &TraceRecord::time)
        .def_readonly("bit", &TraceRecord::bit)
        .def_readonly("basis_match", &TraceRecord::basis_match)
        .def_readonly("error", &TraceRecord::error);

    py::class_<SessionResult>(m, "SessionResult")
        .def_readonly("counts", &SessionResult::counts)
        .def_readonly("eve_known_sifted", &SessionResult::eve_known_sifted)
        .def_readonly("eve_known_fraction", &SessionResult::eve_known_fraction)
        .def_readonly("sum_eta_detected", &SessionResult::sum_eta_detected)
        .def_readonly("trace", &SessionResult::trace)
        .def("true_eta_bar", &SessionResult::true_eta_bar);

    m.def("run_session", &run_session, py::arg("n_gates"), py::arg("detector"),
          py::arg("source"), py::arg("attack"), py::arg("seed"),
          py::arg("record_trace") = false,
          py::call_guard<py::gil_scoped_release>());

    py::class_<EveInfoReport>(m, "EveInfoReport")
        .def_readonly("eve_known_fraction", &EveInfoReport::eve_known_fraction)
        .def_readonly("bound", &EveInfoReport::bound)
        .def_readonly("margin", &EveInfoReport::margin)
        .def_readonly("tolerance", &EveInfoReport::tolerance)
        .def_readonly("violated", &EveInfoReport::violated)
        .def_readonly("out_of_regime", &EveInfoReport::out_of_regime);
    m.def("eve_information", &eve_information, py::arg("result"), py::arg("bound_inputs"));
    m.def("true_keyrate_inputs", &true_keyrate_inputs, py::arg("result"));

    py::class_<PhiloxStream>(m, "PhiloxStream")
        .def(py::init<uint64_t, uint64_t, uint64_t, uint64_t>(), py::arg("key0"),
             py::arg("key1"), py::arg("stream_lo"), py::arg("stream_hi") = 0)
        .def("next_u64", &PhiloxStream::next_u64)
        .def("next_unit", &PhiloxStream::next_unit)
        .def("bernoulli", &PhiloxStream::bernoulli, py::arg("p"))
        .def("poisson", &PhiloxStream::poisson, py::arg("mean"));
}
