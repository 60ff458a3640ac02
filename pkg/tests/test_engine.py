import warnings

import numpy as np
import pytest

from dacsim.analysis import bound_report
from dacsim.engine import (
    ConfigInvalid,
    SimConfig,
    SimTrace,
    WindowTooLarge,
    chattering_index,
    parameter_warnings,
    run,
    run_pair_equivalence,
    steady_state_error,
)
from dacsim.graph import Topology, TopologySchedule, build_incidence
from dacsim.protocols import ProtocolParams
from dacsim.signals import SignalBank, SignalSpec, benchmark_bank, constant_bank


def static_schedule(topology, t0=0.0):
    return TopologySchedule(((t0, topology),))


def quiet_run(config):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return run(config)


@pytest.fixture(scope="module")
def benchmark_alg1_trace(benchmark_schedule):
    config = SimConfig(0.0, 10.0, 0.01, "alg1", ProtocolParams(rho=16.0, c=1.0),
                       benchmark_schedule, benchmark_bank())
    return quiet_run(config)


class TestConfigValidation:
    def base(self, triangle):
        return SimConfig(0.0, 1.0, 0.01, "alg1", ProtocolParams(),
                         static_schedule(triangle), constant_bank([1, 2, 3]))

    def test_valid(self, triangle):
        self.base(triangle).validate()

    @pytest.mark.parametrize("field,value,message", [
        ("protocol_kind", "alg3", "protocol_kind"),
        ("integrator", "rk45", "integrator"),
        ("tf", -1.0, "tf"),
        ("dt", 0.0, "dt"),
        ("dt", 5.0, "dt"),
        ("record_stride", 0, "record_stride"),
        ("eta0", np.zeros(5), "eta0"),
    ])
    def test_rejects(self, triangle, field, value, message):
        config = self.base(triangle)
        setattr(config, field, value)
        with pytest.raises(ConfigInvalid, match=message):
            config.validate()

    def test_schedule_must_start_at_t0(self, triangle):
        config = self.base(triangle)
        config.schedule = TopologySchedule(((0.5, triangle),))
        with pytest.raises(ConfigInvalid, match="schedule"):
            config.validate()

    def test_bank_size_must_match(self, triangle):
        config = self.base(triangle)
        config.bank = constant_bank([1, 2])
        with pytest.raises(ConfigInvalid, match="signals"):
            config.validate()


class TestRunBasics:
    def test_constant_signals_reach_exact_average(self, triangle):
        config = SimConfig(0.0, 10.0, 1e-3, "alg1", ProtocolParams(rho=5.0, c=1.0),
                           static_schedule(triangle), constant_bank([1, 2, 3]))
        trace = quiet_run(config)
        assert np.max(np.abs(trace.gamma[-1] - 2.0)) <= 1e-6

    def test_initial_row_is_signal_vector(self, benchmark_alg1_trace):
        assert benchmark_alg1_trace.times[0] == 0.0
        assert benchmark_alg1_trace.gamma[0] == pytest.approx(
            [5, 4, 3, 2, 1, -1, -2, -3, -4], abs=0)

    def test_recording_grid(self, benchmark_alg1_trace):
        assert benchmark_alg1_trace.n_recorded == 1001
        assert benchmark_alg1_trace.times[-1] == pytest.approx(10.0)

    def test_switch_event_recorded(self, benchmark_alg1_trace):
        assert len(benchmark_alg1_trace.events) == 1
        when, desc = benchmark_alg1_trace.events[0]
        assert when == pytest.approx(2.0)
        assert "12 -> 9" in desc

    def test_component_ids_change_at_switch(self, benchmark_alg1_trace):
        t = benchmark_alg1_trace.times
        ids = benchmark_alg1_trace.component_ids
        assert set(ids[t < 2.0].ravel()) == {0}
        post = ids[t >= 2.0]
        assert post[:, 1].max() == 1  # agent 2 in its own component

    def test_disagreement_dimension_tracks_topology(self, benchmark_alg1_trace):
        t = benchmark_alg1_trace.times
        first_post = int(np.argmax(t >= 2.0))
        assert benchmark_alg1_trace.disagreement[first_post - 1].shape == (12,)
        assert benchmark_alg1_trace.disagreement[first_post].shape == (9,)

    def test_determinism(self, benchmark_schedule):
        config = SimConfig(0.0, 3.0, 0.01, "alg1", ProtocolParams(rho=16.0, c=1.0),
                           benchmark_schedule, benchmark_bank())
        a, b = quiet_run(config), quiet_run(config)
        assert np.array_equal(a.gamma, b.gamma)
        assert np.array_equal(a.lyapunov, b.lyapunov)
        assert np.array_equal(a.times, b.times)

    def test_eta0_vector_offsets_initial_output(self, triangle):
        eta0 = np.array([0.5, -0.25, 1.0])
        config = SimConfig(0.0, 1.0, 0.01, "alg1", ProtocolParams(rho=2.0, c=1.0),
                           static_schedule(triangle), constant_bank([0, 0, 0]), eta0=eta0)
        trace = quiet_run(config)
        B = build_incidence(triangle).matrix
        assert trace.gamma[0] == pytest.approx(B @ eta0, abs=0)

    def test_record_stride(self, triangle):
        config = SimConfig(0.0, 1.0, 0.01, "alg1", ProtocolParams(rho=2.0, c=1.0),
                           static_schedule(triangle), constant_bank([1, 2, 3]),
                           record_stride=7)
        trace = quiet_run(config)
        assert trace.times[0] == 0.0
        assert trace.times[-1] == pytest.approx(1.0)  # final step always kept
        assert np.all(np.diff(trace.times)[:-1] == pytest.approx(0.07))


class TestZeroSumAndBounds:
    def test_global_error_sums_to_zero_across_switch(self, benchmark_alg1_trace):
        sums = benchmark_alg1_trace.gamma_tilde_global.sum(axis=1)
        assert np.max(np.abs(sums)) <= 1e-9

    def test_lyapunov_nonnegative(self, benchmark_alg1_trace):
        assert benchmark_alg1_trace.lyapunov.min() >= 0.0

    def test_bound_column_matches_analysis(self, benchmark_alg1_trace, benchmark_schedule):
        bank = benchmark_bank()
        params = ProtocolParams(rho=16.0, c=1.0)
        t = benchmark_alg1_trace.times
        for start, topo in benchmark_schedule.phases:
            expected = max(r.ultimate_bound_inf
                           for r in bound_report(topo, bank, params, "alg1"))
            rows = (t >= start) if start > 0 else (t < 2.0)
            assert benchmark_alg1_trace.bound_inf[rows] == pytest.approx(expected)

    def test_bound_column_nan_for_alg2(self, benchmark_schedule):
        config = SimConfig(0.0, 1.0, 0.01, "alg2",
                           ProtocolParams(rho=4.1, c=4.0, alpha=0.16),
                           benchmark_schedule, benchmark_bank())
        trace = quiet_run(config)
        assert np.all(np.isnan(trace.bound_inf))

    def test_alg2_lyapunov_nonincreasing_for_constant_signals(self):
        k4 = Topology((1, 2, 3, 4), tuple((i, j) for i in range(1, 5)
                                          for j in range(i + 1, 5)))
        # lambda2 = 4 for the complete 4-graph, so alpha = 0.3 > 1/lambda2
        config = SimConfig(0.0, 5.0, 1e-3, "alg2",
                           ProtocolParams(rho=2.0, c=1.0, alpha=0.3),
                           static_schedule(k4), constant_bank([3.0, -1.0, 2.0, 0.0]))
        trace = quiet_run(config)
        assert np.all(np.diff(trace.lyapunov) <= 1e-9)


class TestIntegrators:
    def test_euler_grid_refinement_is_first_order(self, triangle):
        bank = SignalBank(tuple(SignalSpec("sinusoid", amplitude=a, omega=1.0)
                                for a in (2.0, -1.0, 0.5)))

        def final_gamma(dt):
            config = SimConfig(0.0, 2.0, dt, "alg1", ProtocolParams(rho=4.0, c=1.0),
                               static_schedule(triangle), bank, record_stride=10 ** 9)
            return quiet_run(config).gamma[-1]

        d1 = np.max(np.abs(final_gamma(0.02) - final_gamma(0.01)))
        d2 = np.max(np.abs(final_gamma(0.01) - final_gamma(0.005)))
        assert 1.5 <= d1 / d2 <= 2.5

    def test_rk4_beats_euler(self, triangle):
        bank = SignalBank(tuple(SignalSpec("sinusoid", amplitude=a, omega=1.0)
                                for a in (2.0, -1.0, 0.5)))

        def final(integrator, dt):
            config = SimConfig(0.0, 2.0, dt, "alg1", ProtocolParams(rho=4.0, c=1.0),
                               static_schedule(triangle), bank, integrator=integrator,
                               record_stride=10 ** 9)
            return quiet_run(config).gamma[-1]

        reference = final("rk4", 1e-4)
        assert np.max(np.abs(final("rk4", 0.01) - reference)) \
            < 1e-3 * np.max(np.abs(final("euler", 0.01) - reference))


class TestPairEquivalence:
    def test_constant_signals_exact(self, triangle):
        config = SimConfig(0.0, 5.0, 1e-3, "alg2",
                           ProtocolParams(rho=2.0, c=1.0, alpha=0.4),
                           static_schedule(triangle), constant_bank([1, 2, 3]),
                           integrator="rk4")
        assert run_pair_equivalence(config) <= 1e-12

    def test_alpha_zero_identical(self, triangle):
        bank = SignalBank(tuple(SignalSpec("sinusoid", amplitude=a, omega=1.0)
                                for a in (1.0, 2.0, -1.0)))
        config = SimConfig(0.0, 3.0, 1e-3, "alg2",
                           ProtocolParams(rho=3.0, c=1.0, alpha=0.0),
                           static_schedule(triangle), bank, integrator="rk4")
        assert run_pair_equivalence(config) == 0.0

    def test_requires_alg2(self, triangle):
        config = SimConfig(0.0, 1.0, 0.01, "alg1", ProtocolParams(),
                           static_schedule(triangle), constant_bank([1, 2, 3]))
        with pytest.raises(ConfigInvalid):
            run_pair_equivalence(config)

    def test_benchmark_short_horizon(self, benchmark_schedule):
        config = SimConfig(0.0, 4.0, 1e-3, "alg2",
                           ProtocolParams(rho=4.1, c=4.0, alpha=0.16),
                           benchmark_schedule, benchmark_bank(), integrator="rk4")
        assert run_pair_equivalence(config) <= 1e-9


class TestChatteringIndex:
    def test_zero_disagreement_scores_zero(self, triangle):
        config = SimConfig(0.0, 1.0, 0.01, "alg1", ProtocolParams(rho=2.0, c=1.0),
                           static_schedule(triangle), constant_bank([2, 2, 2]))
        trace = quiet_run(config)
        assert chattering_index(trace, 50) == 0.0

    def test_strict_alternation_scores_one(self, benchmark_alg1_trace):
        synthetic = tuple(((-1.0) ** k) * np.ones(3) for k in range(40))
        trace = SimTrace(
            node_ids=(1, 2, 3), protocol_kind="alg1", dt=0.01,
            times=np.arange(40) * 0.01, gamma=np.zeros((40, 3)),
            gamma_tilde_global=np.zeros((40, 3)), gamma_tilde_component=np.zeros((40, 3)),
            component_ids=np.zeros((40, 3), dtype=int), disagreement=synthetic,
            lyapunov=np.zeros(40), bound_inf=np.zeros(40), events=(),
        )
        assert chattering_index(trace, 40) == 1.0

    def test_window_too_large(self, benchmark_alg1_trace):
        with pytest.raises(WindowTooLarge):
            chattering_index(benchmark_alg1_trace, benchmark_alg1_trace.n_recorded + 1)

    def test_window_spanning_switch_rejected(self, benchmark_alg1_trace):
        with pytest.raises(WindowTooLarge, match="switch"):
            chattering_index(benchmark_alg1_trace, benchmark_alg1_trace.n_recorded)


class TestSteadyStateError:
    def test_uses_final_phase_transient_cutoff(self, benchmark_alg1_trace):
        t = benchmark_alg1_trace.times
        expected = np.max(np.abs(benchmark_alg1_trace.gamma_tilde_component[t >= 5.0]))
        assert steady_state_error(benchmark_alg1_trace) == pytest.approx(expected)


class TestParameterWarnings:
    def test_low_rho_warns_but_runs(self, triangle):
        config = SimConfig(0.0, 1.0, 0.01, "alg1", ProtocolParams(rho=1.0, c=1.0),
                           static_schedule(triangle),
                           SignalBank(tuple(SignalSpec("sinusoid", amplitude=a, omega=1.0)
                                            for a in (2.0, 1.0, -1.0))))
        messages = parameter_warnings(config)
        assert any("rho" in m and "derivative" in m for m in messages)
        with pytest.warns(RuntimeWarning, match="rho"):
            run(config)

    def test_benchmark_alg2_alpha_warning(self, benchmark_schedule):
        config = SimConfig(0.0, 1.0, 0.01, "alg2",
                           ProtocolParams(rho=4.1, c=4.0, alpha=0.16),
                           benchmark_schedule, benchmark_bank())
        messages = parameter_warnings(config)
        assert any("alpha" in m for m in messages)

    def test_valid_benchmark_alg1_is_silent(self, benchmark_schedule):
        config = SimConfig(0.0, 1.0, 0.01, "alg1", ProtocolParams(rho=16.0, c=1.0),
                           benchmark_schedule, benchmark_bank())
        assert parameter_warnings(config) == ()
