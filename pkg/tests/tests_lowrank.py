import logging

import numpy as np
import pytest
import scipy.linalg

from Models.compositeModel import CompositeState
from Models.dboModel import ORTH_TOL, DboState, SkewGauge
from Models.fomModel import FomState
from Models.gridModel import Grid1D, Quasimatrix
from Models.transportModel import DiffusivitySpec, VelocityField
from Services.fomService import FomService
from Services.kineticsService import KineticsService
from Services.lowrankService import LowRankService
from Services.simulationService import SimulationService
from Services.spectralService import SpectralService
from Services.timeintService import Observer, TimeIntegrationService
from Services.transportService import TransportService
from Utils.errors import ContractViolation


def _tangent_projection(s, M):
    """Minimiseur de ||dU S Y^T + U dS Y^T + U S dY^T - M|| par moindres carrés."""
    U, S, Y = s.U.values, s.Sigma, s.Y
    N, r, n_s = U.shape[0], s.r, s.n_s
    cols = []
    for i in range(N):
        for j in range(r):
            dU = np.zeros((N, r))
            dU[i, j] = 1.0
            cols.append((dU @ S @ Y.T).ravel())
    for a in range(r):
        for b in range(r):
            dS = np.zeros((r, r))
            dS[a, b] = 1.0
            cols.append((U @ dS @ Y.T).ravel())
    for i in range(n_s):
        for j in range(r):
            dY = np.zeros((n_s, r))
            dY[i, j] = 1.0
            cols.append((U @ S @ dY.T).ravel())
    J = np.column_stack(cols)
    w = np.sqrt(s.grid.dx)
    c, *_ = np.linalg.lstsq(w * J, w * M.ravel(), rcond=None)
    return (J @ c).reshape(N, n_s)


def _assembled(s, dU, dSigma, dY):
    return dU.values @ s.Sigma @ s.Y.T + s.U.values @ dSigma @ s.Y.T + s.U.values @ s.Sigma @ dY.T


# ********************************************************
# INITIALISATION ET RECONSTRUCTION
# ********************************************************

def test_init_reproduces_rank_one_field(grid):
    y = np.array([1.0, -2.0, 0.5, 3.0])
    phi = Quasimatrix(grid, np.outer(np.sin(grid.nodes), y))
    s = LowRankService.init_from_field(phi, 1)
    assert np.max(np.abs(LowRankService.reconstruct(s).values - phi.values)) < 1e-13
    assert max(LowRankService.orthonormality_residuals(s)) < 1e-13


def test_init_truncation_is_best_approximation(grid, rng):
    phi = Quasimatrix(grid, rng.standard_normal((grid.n_points, 6)))
    s = LowRankService.init_from_field(phi, 3)
    ref = FomService.ipca(FomState(phi, 0.0))
    assert LowRankService.relative_error(s, phi) == pytest.approx(ref.truncation_error(3), rel=1e-10)


def test_init_pads_rank_deficient_field(grid, caplog):
    phi = Quasimatrix(grid, np.outer(np.sin(grid.nodes), [1.0, 2.0, 3.0]))
    with caplog.at_level(logging.WARNING):
        s = LowRankService.init_from_field(phi, 2)
    assert "numerical rank 1" in caplog.text
    assert np.all(np.linalg.svd(s.Sigma, compute_uv=False) > 0)
    assert max(LowRankService.orthonormality_residuals(s)) < 1e-12


def test_init_rejects_excessive_rank(grid):
    phi = Quasimatrix(grid, np.ones((grid.n_points, 3)))
    with pytest.raises(ContractViolation):
        LowRankService.init_from_field(phi, 4)


def test_reconstruct_subset_matches_full(grid, rng, make_state):
    s = make_state(rng, grid, 7, 3)
    full = LowRankService.reconstruct(s).values
    part = LowRankService.reconstruct(s, [0, 4, 6]).values
    assert np.allclose(part, full[:, [0, 4, 6]], rtol=0, atol=1e-14)


def test_reconstruct_rejects_bad_index(grid, rng, make_state):
    s = make_state(rng, grid, 5, 2)
    with pytest.raises(ContractViolation):
        LowRankService.reconstruct(s, [5])


def test_state_checks_shapes(grid, rng, make_state):
    s = make_state(rng, grid, 5, 2)
    with pytest.raises(ContractViolation):
        s.replace(Sigma=np.eye(3))


# ********************************************************
# ÉQUATIONS D'ÉVOLUTION
# ********************************************************

@pytest.mark.parametrize('seed', range(50))
def test_evolution_is_the_tangent_space_projection(seed, make_state):
    rng = np.random.Generator(np.random.PCG64(seed))
    grid = Grid1D(16, 2 * np.pi)
    n_s = int(rng.integers(3, 7))
    r = int(rng.integers(1, 4))
    s = make_state(rng, grid, n_s, r)
    v = VelocityField(Quasimatrix(grid, rng.standard_normal(grid.n_points)))
    scaling = (lambda x, t: 1.0 + 0.5 * np.sin(x)) if seed % 2 else None
    diff = DiffusivitySpec(0.1 * rng.random(n_s), scaling=scaling)
    src = KineticsService.build('toy_abc', {'k': 1.0 + rng.random()})

    proj = TransportService.project_model_rhs(s, v, diff, src)
    dU, dSigma, dY = LowRankService.dbo_rhs(s, proj.MY, proj.MtU)
    M = FomService.fom_rhs(FomState(LowRankService.reconstruct(s), s.t), v, diff, src).values

    target = _tangent_projection(s, M)
    scale = max(np.linalg.norm(M), 1.0)
    assert np.linalg.norm(_assembled(s, dU, dSigma, dY) - target) <= 1e-9 * scale
    assert LowRankService.optimality_residual(s, proj, dU, dSigma, dY) < 1e-10


def test_field_derivative_does_not_depend_on_gauge(grid, rng, make_state):
    s = make_state(rng, grid, 6, 3)
    v = VelocityField(Quasimatrix(grid, np.sin(grid.nodes)))
    diff = DiffusivitySpec.inverse_sqrt_law(6, 0.05)
    src = KineticsService.build('toy_abc')
    proj = TransportService.project_model_rhs(s, v, diff, src)
    zero = _assembled(s, *LowRankService.dbo_rhs(s, proj.MY, proj.MtU))
    gauged = _assembled(s, *LowRankService.dbo_rhs(s, proj.MY, proj.MtU, SkewGauge.random(3, 5, 1.0)))
    assert np.linalg.norm(zero - gauged) <= 1e-12 * np.linalg.norm(zero)


def test_zero_gauge_keeps_modes_orthogonal_to_their_derivatives(grid, rng, make_state):
    s = make_state(rng, grid, 6, 3)
    v = VelocityField(Quasimatrix(grid, np.cos(grid.nodes)))
    proj = TransportService.project_model_rhs(s, v, DiffusivitySpec.constant(6, 0.02),
                                              KineticsService.build('none'))
    dU, _, dY = LowRankService.dbo_rhs(s, proj.MY, proj.MtU)
    assert np.max(np.abs(SpectralService.gram(s.U, dU))) < 1e-12
    assert np.max(np.abs(s.Y.T @ dY)) < 1e-12


def test_perturbed_derivative_has_large_residual(grid, rng, make_state):
    s = make_state(rng, grid, 5, 2)
    v = VelocityField(Quasimatrix(grid, np.sin(grid.nodes)))
    proj = TransportService.project_model_rhs(s, v, DiffusivitySpec.constant(5, 0.02),
                                              KineticsService.build('none'))
    dU, dSigma, dY = LowRankService.dbo_rhs(s, proj.MY, proj.MtU)
    assert LowRankService.optimality_residual(s, proj, dU, dSigma + 0.1, dY) > 1e-3


def test_singular_sigma_stays_finite(grid, rng, make_state, caplog):
    s = make_state(rng, grid, 5, 2).replace(Sigma=np.diag([1.0, 0.0]))
    with caplog.at_level(logging.WARNING):
        inverse = LowRankService.regularized_inverse(s.Sigma)
    assert np.all(np.isfinite(inverse))
    assert "ill-conditioned" in caplog.text
    assert LowRankService.condition_number(s.Sigma) == float('inf')


def test_gauge_transport_rhs_vanishes_for_identical_gauges():
    gauge = SkewGauge.random(3, 1, 0.5)
    dR_U, dR_Y = LowRankService.gauge_transport_rhs(np.eye(3), np.eye(3), gauge, gauge)
    assert np.max(np.abs(dR_U)) < 1e-15 and np.max(np.abs(dR_Y)) < 1e-15


# ********************************************************
# RÉORTHONORMALISATION ET FORME CANONIQUE
# ********************************************************

def test_reorthonormalize_restores_modes_and_keeps_field(grid, rng, make_state):
    s = make_state(rng, grid, 6, 3)
    noisy = s.replace(U=s.U.with_values(s.U.values + 1e-3 * rng.standard_normal(s.U.values.shape)),
                      Y=s.Y + 1e-3 * rng.standard_normal(s.Y.shape))
    fixed = LowRankService.reorthonormalize(noisy)
    assert max(LowRankService.orthonormality_residuals(fixed)) < ORTH_TOL
    before = LowRankService.reconstruct(noisy).values
    after = LowRankService.reconstruct(fixed).values
    assert np.linalg.norm(after - before) <= 1e-12 * np.linalg.norm(before)


def test_canonical_form(grid, rng, make_state):
    s = make_state(rng, grid, 6, 3)
    c = LowRankService.canonical_form(s)
    assert np.all(np.diff(c.sigma_tilde) <= 0)
    assert np.allclose(c.R_U @ np.diag(c.sigma_tilde) @ c.R_Y.T, s.Sigma, atol=1e-13)
    lead = np.argmax(np.abs(c.R_U), axis=0)
    assert np.all(c.R_U[lead, np.arange(3)] > 0)
    rebuilt = c.U_tilde.values @ np.diag(c.sigma_tilde) @ c.Y_tilde.T
    assert np.allclose(rebuilt, LowRankService.reconstruct(s).values, atol=1e-12)


def test_canonical_form_is_rotation_invariant(grid, rng, make_state):
    s = make_state(rng, grid, 6, 3)
    R, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    Q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    rotated = s.replace(U=s.U.with_values(s.U.values @ R), Sigma=R.T @ s.Sigma @ Q, Y=s.Y @ Q)
    a = LowRankService.canonical_form(s)
    b = LowRankService.canonical_form(rotated)
    assert np.allclose(a.sigma_tilde, b.sigma_tilde, rtol=1e-13)
    overlap = SpectralService.gram(a.U_tilde, b.U_tilde)
    assert np.allclose(np.abs(overlap), np.eye(3), atol=1e-11)


def test_relative_error(grid, rng, make_state):
    s = make_state(rng, grid, 5, 2)
    phi = LowRankService.reconstruct(s)
    assert LowRankService.relative_error(s, phi) < 1e-14
    assert LowRankService.relative_error(s, phi.with_values(2 * phi.values)) == pytest.approx(0.5, rel=1e-12)
    with pytest.raises(ContractViolation):
        LowRankService.relative_error(s, phi.with_values(np.zeros_like(phi.values)))


# ********************************************************
# INTÉGRATION
# ********************************************************

def _dbo_rhs(grid, v, diff, src, gauge):
    def rhs(t, cs):
        s = DboState(U=Quasimatrix(grid, cs['U']), Sigma=cs['Sigma'], Y=cs['Y'], t=t)
        proj = TransportService.project_model_rhs(s, v, diff, src)
        dU, dSigma, dY = LowRankService.dbo_rhs(s, proj.MY, proj.MtU, gauge)
        return CompositeState({'U': dU.values, 'Sigma': dSigma, 'Y': dY}, t)
    return rhs


def test_gauges_are_equivalent_up_to_rotation(rng):
    grid = Grid1D(64, 2 * np.pi)
    n_s, r = 8, 3
    x = grid.nodes
    basis = np.column_stack([f(m * x) for m in (1, 2, 3) for f in (np.sin, np.cos)])
    decay = 1.0 / np.repeat([1.0, 2.0, 4.0], 2)
    phi0 = Quasimatrix(grid, basis @ (decay[:, None] * rng.standard_normal((6, n_s))))
    s0 = LowRankService.init_from_field(phi0, r)

    v = VelocityField(Quasimatrix(grid, 0.5 + 0.2 * np.sin(x)))
    diff = DiffusivitySpec(0.01 + 0.04 * rng.random(n_s))
    src = KineticsService.build('none')
    gauge = SkewGauge.random(r, 7, 0.5)
    start = CompositeState({'U': s0.U.values, 'Sigma': s0.Sigma, 'Y': s0.Y}, 0.0)
    dt = 1.0 / 256.0

    a = TimeIntegrationService.integrate(start, _dbo_rhs(grid, v, diff, src, SkewGauge.zero(r)), dt, 1.0).state
    b = TimeIntegrationService.integrate(start, _dbo_rhs(grid, v, diff, src, gauge), dt, 1.0).state

    phi_a = a['U'] @ a['Sigma'] @ a['Y'].T
    phi_b = b['U'] @ b['Sigma'] @ b['Y'].T
    assert np.linalg.norm(phi_a - phi_b) <= 1e-8 * np.linalg.norm(phi_a)

    R_U = scipy.linalg.expm(gauge.phi)
    R_Y = scipy.linalg.expm(gauge.theta)
    assert np.linalg.norm(b['U'] - a['U'] @ R_U) <= 1e-8 * np.linalg.norm(a['U'])
    assert np.linalg.norm(b['Y'] - a['Y'] @ R_Y) <= 1e-8


def test_rotation_ode_matches_matrix_exponential():
    gauge_a = SkewGauge.zero(3)
    gauge_b = SkewGauge.random(3, 3, 0.5)

    def rhs(t, cs):
        dR_U, dR_Y = LowRankService.gauge_transport_rhs(cs['R_U'], cs['R_Y'], gauge_a, gauge_b)
        return CompositeState({'R_U': dR_U, 'R_Y': dR_Y}, t)

    start = CompositeState({'R_U': np.eye(3), 'R_Y': np.eye(3)}, 0.0)
    end = TimeIntegrationService.integrate(start, rhs, 1.0 / 64.0, 1.0).state
    assert np.max(np.abs(end['R_U'] - scipy.linalg.expm(gauge_b.phi))) < 1e-9
    assert np.max(np.abs(end['R_Y'] - scipy.linalg.expm(gauge_b.theta))) < 1e-9


@pytest.mark.parametrize('alpha_c', [0.02, 0.0])
def test_low_rank_field_is_evolved_exactly(alpha_c, default_config):
    """Rang initial r, diffusivités égales, sans source : DBO = solution complète."""
    cfg = (default_config
           .with_section('grid', n_points=32)
           .with_section('time', dt=1.0 / 256.0, t_final=0.25)
           .with_section('model', alpha_law='constant', alpha_c=alpha_c)
           .with_section('species', n_species=5)
           .with_section('reduction', rank=2)
           .with_section('outputs', profiles=(1,)))
    setup = SimulationService.build_setup(cfg)
    grid = setup.grid
    x = grid.nodes
    y = np.random.Generator(np.random.PCG64(3)).standard_normal((2, 5))
    phi0 = np.outer(np.sin(x), y[0]) + np.outer(0.5 * np.cos(2 * x), y[1])
    s0 = LowRankService.init_from_field(Quasimatrix(grid, phi0), 2)
    start = CompositeState({'U': s0.U.values, 'Sigma': s0.Sigma, 'Y': s0.Y,
                            'v': setup.initial_velocity(), 'phi': phi0}, 0.0)
    checks = []

    def check(step, cs):
        s = SimulationService.dbo_state(setup, cs)
        phi = Quasimatrix(grid, cs['phi'])
        v = setup.velocity(cs['v'])
        proj = TransportService.project_model_rhs(s, v, setup.diff, setup.src)
        leak = proj.MtU - s.Y @ (s.Y.T @ proj.MtU)
        checks.append((LowRankService.relative_error(s, phi),
                       np.max(np.abs(s.Y - s0.Y)),
                       np.linalg.norm(leak) / max(np.linalg.norm(proj.MtU), 1e-300)))

    TimeIntegrationService.integrate(start, SimulationService.composite_rhs(setup), cfg.time.dt,
                                     cfg.time.t_final, observers=[Observer(check, 1)],
                                     post_step=SimulationService.reorthonormalization_hook(setup))
    assert len(checks) == cfg.time.n_steps + 1
    errors, drifts, leaks = np.array(checks).T
    assert errors.max() <= 1e-9
    assert drifts.max() <= 1e-12
    assert leaks.max() <= 1e-12
