import numpy as np
import pytest

from Models.compositeModel import CompositeState
from Models.gridModel import Grid1D, Quasimatrix
from Models.transportModel import VelocityField
from Services.timeintService import Observer, TimeIntegrationService
from Services.transportService import TransportService
from Utils.errors import ContractViolation, NumericalFailure, ObserverError


def _decay(t, cs):
    return CompositeState({'y': -cs['y']}, t)


def _scalar(value, t=0.0):
    return CompositeState({'y': np.array([value])}, t)


def test_single_step_of_linear_decay():
    out = TimeIntegrationService.rk4_step(_scalar(1.0), _decay, 0.1)
    assert out['y'][0] == pytest.approx(0.9048375, abs=1e-12)
    assert out.t == pytest.approx(0.1)


def test_zero_rhs_keeps_state_bitwise(rng):
    start = CompositeState({'a': rng.standard_normal((4, 3)), 'b': rng.standard_normal(5)}, 0.0)
    zero = lambda t, cs: CompositeState({k: np.zeros_like(cs[k]) for k in cs}, t)
    end = TimeIntegrationService.integrate(start, zero, 0.01, 1.0).state
    assert end['a'].tobytes() == start['a'].tobytes()
    assert end['b'].tobytes() == start['b'].tobytes()


def test_observers_follow_their_stride():
    seen = []
    result = TimeIntegrationService.integrate(_scalar(1.0), _decay, 1.0 / 256.0, 4.0,
                                              observers=[Observer(lambda k, cs: seen.append(cs.t), 16)])
    assert result.steps == 1024
    assert len(seen) == 65
    assert seen[0] == 0.0 and seen[-1] == 4.0


def test_zero_length_interval_observes_once():
    seen = []
    result = TimeIntegrationService.integrate(_scalar(1.0), _decay, 0.1, 0.0,
                                              observers=[Observer(lambda k, cs: seen.append(k))])
    assert result.steps == 0
    assert seen == [0]


def test_interval_must_be_a_multiple_of_dt():
    with pytest.raises(ContractViolation):
        TimeIntegrationService.integrate(_scalar(1.0), _decay, 0.3, 1.0)


def test_observer_stride_must_be_positive():
    with pytest.raises(ContractViolation):
        Observer(lambda k, cs: None, 0)


def test_non_finite_stage_is_reported():
    def blow_up(t, cs):
        return CompositeState({'y': np.array([np.nan if t > 0 else 1.0])}, t)

    with pytest.raises(NumericalFailure) as exc:
        TimeIntegrationService.rk4_step(_scalar(1.0), blow_up, 0.1)
    assert exc.value.stage == 2


def test_observer_failure_carries_time():
    def fail(step, cs):
        if step == 3:
            raise RuntimeError("disk full")

    with pytest.raises(ObserverError) as exc:
        TimeIntegrationService.integrate(_scalar(1.0), _decay, 0.25, 1.0, observers=[Observer(fail)])
    assert exc.value.t == pytest.approx(0.75)
    assert "disk full" in str(exc.value)


def test_post_step_hook_runs_once_per_step():
    calls = []

    def hook(cs):
        calls.append(cs.t)
        return cs

    TimeIntegrationService.integrate(_scalar(1.0), _decay, 0.1, 1.0, post_step=hook)
    assert len(calls) == 10


def test_combine_rejects_layout_change():
    with pytest.raises(ContractViolation):
        _scalar(1.0).combine([1.0], [CompositeState({'z': np.array([1.0])})], 0.0)


def test_replace_rejects_unknown_block():
    with pytest.raises(ContractViolation):
        _scalar(1.0).replace(z=np.array([1.0]))


# ********************************************************
# BURGERS
# ********************************************************

def _burgers(grid, nu=0.01):
    def rhs(t, cs):
        v = VelocityField(Quasimatrix(grid, cs['v']), nu=nu)
        return CompositeState({'v': TransportService.burgers_rhs(v).values[:, 0]}, t)
    return rhs


def test_restart_reproduces_unsplit_run():
    grid = Grid1D(64, 2 * np.pi)
    rhs = _burgers(grid)
    dt = 1.0 / 64.0
    start = CompositeState({'v': TransportService.burgers_initial_velocity(grid).values[:, 0]}, 0.0)

    whole = TimeIntegrationService.integrate(start, rhs, dt, 1.0)
    first = TimeIntegrationService.integrate(start, rhs, dt, 0.5)
    second = TimeIntegrationService.integrate(first.state, rhs, dt, 1.0, first_step=first.last_step,
                                              t_origin=0.0, observe_initial=False)
    assert second.last_step == whole.last_step == 64
    assert second.state.t == whole.state.t
    assert np.max(np.abs(second.state['v'] - whole.state['v'])) <= 1e-13


def test_rk4_order_on_burgers():
    grid = Grid1D(64, 2 * np.pi)
    rhs = _burgers(grid)
    start = CompositeState({'v': TransportService.burgers_initial_velocity(grid).values[:, 0]}, 0.0)
    finals = [TimeIntegrationService.integrate(start, rhs, dt, 1.0).state['v']
              for dt in (1.0 / 50.0, 1.0 / 100.0, 1.0 / 200.0)]
    order = np.log2(np.linalg.norm(finals[0] - finals[1]) / np.linalg.norm(finals[1] - finals[2]))
    assert 3.7 <= order <= 4.3


@pytest.mark.slow
def test_burgers_matches_fine_grid_reference():
    coarse_grid, fine_grid = Grid1D(512, 2 * np.pi), Grid1D(2048, 2 * np.pi)
    coarse = TimeIntegrationService.integrate(
        CompositeState({'v': TransportService.burgers_initial_velocity(coarse_grid).values[:, 0]}, 0.0),
        _burgers(coarse_grid), 1.0 / 256.0, 4.0)
    fine = TimeIntegrationService.integrate(
        CompositeState({'v': TransportService.burgers_initial_velocity(fine_grid).values[:, 0]}, 0.0),
        _burgers(fine_grid), 1.0 / 2048.0, 4.0)
    # les noeuds grossiers sont un noeud fin sur quatre
    assert np.max(np.abs(coarse.state['v'] - fine.state['v'][::4])) <= 1e-6
