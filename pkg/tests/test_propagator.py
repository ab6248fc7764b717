import math

import numpy as np
import pytest
from scipy.linalg import expm

from trilevel import algebra, fields, observables, oracle, propagator, riccati


def test_exp_generator_at_zero_is_identity():
    for gen in (algebra.B_PLUS, algebra.B_MINUS, algebra.B_Z):
        assert np.allclose(propagator.exp_generator(0.0, gen), np.eye(8), atol=1e-16)


def test_exp_of_bz_with_real_exponent_is_unitary():
    for mu in (0.3, -1.7, 12.0):
        u = propagator.exp_generator(-1j * mu, algebra.B_Z)
        assert np.max(np.abs(u @ u.conj().T - np.eye(8))) <= 1e-12


@pytest.mark.parametrize("gen", [algebra.B_PLUS, algebra.B_MINUS, algebra.B_Z])
def test_exp_generator_matches_dense_matrix_exponential(gen):
    rng = np.random.default_rng(3)
    for _ in range(5):
        c = complex(rng.standard_normal(), rng.standard_normal())
        ours = propagator.exp_generator(c, gen)
        reference = expm(c * np.asarray(gen))
        assert np.max(np.abs(ours - reference)) <= 1e-12 * max(1.0, np.max(np.abs(reference)))


def test_nilpotent_exponential_equals_truncated_series():
    c = 0.37 - 1.21j
    series = sum((c ** k / math.factorial(k)) * np.linalg.matrix_power(algebra.B_PLUS, k)
                 for k in range(5))
    assert np.max(np.abs(propagator.exp_generator(c, algebra.B_PLUS) - series)) <= 1e-13


def test_evolve_eta_at_time_zero_is_identity():
    cfg = fields.preset("fig3").config
    mus = riccati.solve_mu(cfg, 5.0, 1e-10)
    eta0 = algebra.rho_to_eta(np.diag([1.0, 0.0, 0.0]))
    out = propagator.evolve_eta(eta0, mus, cfg.Gamma, 0.0)
    assert np.max(np.abs(out - eta0)) == 0.0


def test_evolve_eta_norm_decays_exponentially():
    cfg = fields.preset("fig9").config
    mus = riccati.solve_mu(cfg, 10.0, 1e-10,
                           halt=lambda t, v: max(abs(v[0]), abs(v[1]), abs(v[2].imag)) > 1.0)
    eta0 = algebra.rho_to_eta(fields.InitialState("level2").density())
    n0 = observables.coherence_norm(eta0)
    for t in np.linspace(0.0, mus.t_final, 7):
        eta_t = propagator.evolve_eta(eta0, mus, cfg.Gamma, float(t))
        assert observables.coherence_norm(eta_t) == pytest.approx(
            math.exp(-cfg.Gamma * t) * n0, abs=1e-8)


def test_evolve_eta_rejects_out_of_range_time():
    cfg = fields.preset("fig1").config
    mus = riccati.solve_mu(cfg, 2.0, 1e-9)
    with pytest.raises(ValueError):
        propagator.evolve_eta(np.zeros(8), mus, cfg.Gamma, 3.0)


def test_long_time_coherence_vector_vanishes():
    # fig1 fields stay on a single factorization chart out to t = 500
    ps = fields.preset("fig1")
    cfg = ps.config
    mus = riccati.solve_mu(cfg, 500.0, 1e-9)
    eta0 = algebra.rho_to_eta(ps.initial.density())
    eta_t = propagator.evolve_eta(eta0, mus, cfg.Gamma, 500.0)
    n0 = observables.coherence_norm(eta0)
    assert observables.coherence_norm(eta_t) <= 1e-4 * n0 + 1e-8


def test_run_matches_direct_integration_on_fig1():
    ps = fields.preset("fig1")
    rho0 = ps.initial.density()
    prod = propagator.run(ps.config, rho0, 100.0, 1.0, 1e-10)
    direct = oracle.integrate_eta_direct(ps.config, algebra.rho_to_eta(rho0), 100.0, 1.0, 1e-10)
    assert np.max(np.abs(prod.eta - direct.eta)) <= 1e-6
    assert np.max(np.abs(prod.rho - direct.rho)) <= 1e-6


def test_run_relaxes_to_the_maximally_mixed_state():
    ps = fields.preset("fig2")
    traj = propagator.run(ps.config, ps.initial.density(), 500.0, 250.0, 1e-9)
    assert np.max(np.abs(traj.rho[-1] - np.eye(3) / 3.0)) <= 2e-4


def test_stark_eigenstate_is_frozen_without_decoherence():
    ps = fields.preset("fig16")
    rho0 = ps.initial.density()
    traj = propagator.run(ps.config, rho0, 50.0, 1.0, 1e-12)
    assert np.max(np.abs(traj.rho - rho0)) <= 1e-8


def test_trajectory_trace_and_hermiticity_invariants():
    for name in ("fig3", "fig8", "fig10"):
        ps = fields.preset(name)
        traj = propagator.run(ps.config, ps.initial.density(), 20.0, 0.5, 1e-9)
        for rho in traj.rho:
            assert abs(np.trace(rho) - 1.0) <= 1e-9
            assert algebra.hermiticity_deviation(rho) <= 1e-9


def test_segmented_restart_is_a_cocycle():
    ps = fields.preset("fig9")
    rho0 = ps.initial.density()
    plain = propagator.run(ps.config, rho0, 20.0, 0.5, 1e-12)
    forced = propagator.run(ps.config, rho0, 20.0, 0.5, 1e-12,
                            checkpoints=[3.7, 8.13, 11.0, 15.5])
    assert np.max(np.abs(plain.eta - forced.eta)) <= 1e-8


def test_run_continues_through_chart_singularity():
    # constant coupling: the exponent functions blow up at pi/(2 J0) = pi,
    # while the physical state stays perfectly regular
    j0 = 0.5
    cfg = fields.FieldConfig(A=0.0, Omega=0.0, B=2 * j0, omega=0.0)
    rho0 = np.diag([1.0, 0.0, 0.0]).astype(complex)
    traj = propagator.run(cfg, rho0, 8.0, 0.1, 1e-10)
    direct = oracle.integrate_eta_direct(cfg, algebra.rho_to_eta(rho0), 8.0, 0.1, 1e-12)
    assert np.max(np.abs(traj.eta - direct.eta)) <= 1e-6


def test_run_with_restarts_disabled_still_handles_the_singularity():
    j0 = 0.5
    cfg = fields.FieldConfig(A=0.0, Omega=0.0, B=2 * j0, omega=0.0)
    rho0 = np.diag([1.0, 0.0, 0.0]).astype(complex)
    traj = propagator.run(cfg, rho0, 8.0, 0.5, 1e-10, chart_limit=None)
    direct = oracle.integrate_eta_direct(cfg, algebra.rho_to_eta(rho0), 8.0, 0.5, 1e-12)
    assert np.max(np.abs(traj.eta - direct.eta)) <= 1e-6


def test_purity_law_along_a_run():
    ps = fields.preset("fig7")
    rho0 = ps.initial.density()
    eta0 = algebra.rho_to_eta(rho0)
    norm0_sq = observables.coherence_norm(eta0) ** 2
    traj = propagator.run(ps.config, rho0, 40.0, 1.0, 1e-10)
    for k, t in enumerate(traj.grid):
        expected = 1.0 / 3.0 + 0.5 * math.exp(-2 * ps.config.Gamma * t) * norm0_sq
        assert traj.observables[k].purity == pytest.approx(expected, abs=1e-7)


def test_eigenvalue_law_for_pure_initial_state():
    ps = fields.preset("fig5")
    traj = propagator.run(ps.config, ps.initial.density(), 40.0, 2.0, 1e-10)
    for k, t in enumerate(traj.grid):
        x = math.exp(-ps.config.Gamma * t)
        lam = np.array([traj.observables[k].eig1, traj.observables[k].eig2,
                        traj.observables[k].eig3])
        law = np.array([(1 + 2 * x) / 3, (1 - x) / 3, (1 - x) / 3])
        assert np.max(np.abs(lam - law)) <= 1e-7


def test_output_grid_row_counts():
    assert len(propagator.output_grid(100.0, 0.1)) == 1001
    assert len(propagator.output_grid(1.0, 0.3)) == 5
    grid = propagator.output_grid(1.0, 0.3)
    assert grid[-1] == 1.0
    assert grid[0] == 0.0


def test_run_input_validation():
    cfg = fields.preset("fig1").config
    rho0 = np.diag([1.0, 0.0, 0.0]).astype(complex)
    with pytest.raises(ValueError):
        propagator.run(cfg, rho0, -1.0, 0.1, 1e-9)
    with pytest.raises(ValueError):
        propagator.run(cfg, rho0, 1.0, 0.0, 1e-9)
    with pytest.raises(ValueError):
        propagator.run(cfg, rho0, 1.0, 0.1, 0.0)
    with pytest.raises(ValueError):
        propagator.run(cfg, np.eye(3), 1.0, 0.1, 1e-9)  # trace 3


def test_trajectory_from_etas_projects_to_physical_states():
    grid = np.array([0.0, 1.0])
    eta = algebra.rho_to_eta(np.diag([0.4, 0.35, 0.25]).astype(complex))
    noisy = np.vstack([eta, eta + 1e-12 * (1 + 1j)])
    traj = propagator.trajectory_from_etas(grid, noisy)
    for rho in traj.rho:
        assert algebra.hermiticity_deviation(rho) <= 1e-15
        assert abs(np.trace(rho) - 1.0) <= 1e-15
