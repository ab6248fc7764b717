"""Product-of-exponentials propagation of the coherence vector.

The non-decaying part of the evolution is the product, applied right to left,

    exp(-i mu_plus(t) B_plus) exp(-i mu_minus(t) B_minus) exp(-i mu(t) B_z)

acting on eta(0); decoherence multiplies the result by the real scalar
exp(-Gamma t), which is why the density matrix stays Hermitian as it relaxes.

Because B_plus and B_minus are nilpotent their exponentials are short exact
polynomials; only exp of B_z needs a scaled Taylor evaluation.  The exponent
functions come from :mod:`trilevel.riccati`.  When they grow (or blow up at a
chart singularity of the factorization), the propagator composes the group
element accumulated so far and restarts the exponents from zero at that time;
the evolution operator is a cocycle, so segmentation is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import algebra, observables
from .fields import FieldConfig
from .riccati import MuTrajectory, SingularityError, solve_mu

#: Chart restart threshold on max(|mu_plus|, |mu_minus|, |Im mu|).  Keeping
#: the exponent magnitudes of order one keeps every factor of the product well
#: conditioned; without it, strong or slowly modulated drives lose digits to
#: cancellation between large factors.
CHART_LIMIT = 1.0

#: A restart that advances time by less than this is treated as failure.
MIN_SEGMENT = 1e-6

_EXP_SERIES_RTOL = 1e-14

_FACTORIALS = [math.factorial(n) for n in range(24)]


class PropagationError(RuntimeError):
    """Propagation could not continue (restart failed to advance)."""


def _nilpotent_powers(m: np.ndarray) -> list[np.ndarray]:
    degree = algebra.nilpotency_degree(m)
    powers = [np.eye(m.shape[0], dtype=complex)]
    for _ in range(degree - 1):
        powers.append(powers[-1] @ m)
    return powers


_BP_POWERS = _nilpotent_powers(algebra.B_PLUS)
_BM_POWERS = _nilpotent_powers(algebra.B_MINUS)


def _exp_nilpotent(c: complex, powers: list[np.ndarray]) -> np.ndarray:
    out = powers[0].copy()
    ck = 1.0 + 0j
    for n in range(1, len(powers)):
        ck *= c
        out += (ck / _FACTORIALS[n]) * powers[n]
    return out


def _exp_taylor(m: np.ndarray) -> np.ndarray:
    """Scaling-and-squaring Taylor evaluation of exp(m) for small matrices."""
    norm = float(np.max(np.sum(np.abs(m), axis=1)))
    squarings = max(0, int(math.ceil(math.log2(norm / 0.5))) if norm > 0.5 else 0)
    ms = m / (2.0 ** squarings)
    out = np.eye(m.shape[0], dtype=complex)
    term = np.eye(m.shape[0], dtype=complex)
    for n in range(1, len(_FACTORIALS)):
        term = term @ ms / n
        out += term
        if np.max(np.abs(term)) <= _EXP_SERIES_RTOL * np.max(np.abs(out)):
            break
    for _ in range(squarings):
        out = out @ out
    return out


def exp_generator(c: complex, generator: np.ndarray) -> np.ndarray:
    """exp(c * generator) for the 8x8 generators.

    The nilpotent ladder matrices use their terminating power series; anything
    else falls back to scaling-and-squaring.
    """
    if generator is algebra.B_PLUS:
        return _exp_nilpotent(c, _BP_POWERS)
    if generator is algebra.B_MINUS:
        return _exp_nilpotent(c, _BM_POWERS)
    return _exp_taylor(c * np.asarray(generator, dtype=complex))


def chart_matrix(mu_plus: complex, mu_minus: complex, mu: complex) -> np.ndarray:
    """The non-decaying 8x8 propagator factor for given exponent values."""
    return (_exp_nilpotent(-1j * mu_plus, _BP_POWERS)
            @ _exp_nilpotent(-1j * mu_minus, _BM_POWERS)
            @ exp_generator(-1j * mu, algebra.B_Z))


def evolve_eta(eta0: np.ndarray, mus: MuTrajectory, Gamma: float, t: float) -> np.ndarray:
    """Apply the product propagator at time ``t`` within a single chart.

    Factors act right to left: B_z first, then B_minus, then B_plus, then the
    scalar decay.  ``t`` must lie inside the solved range of ``mus``.
    """
    mp, mm, mu = mus.evaluate(t)
    eta = exp_generator(-1j * mu, algebra.B_Z) @ np.asarray(eta0, dtype=complex)
    eta = _exp_nilpotent(-1j * mm, _BM_POWERS) @ eta
    eta = _exp_nilpotent(-1j * mp, _BP_POWERS) @ eta
    return math.exp(-Gamma * (t - mus.t_start)) * eta


@dataclass
class Trajectory:
    """Output grid with density matrices, coherence vectors and observables."""

    grid: np.ndarray
    rho: np.ndarray
    eta: np.ndarray
    observables: list[observables.ObservableRecord]

    def __len__(self) -> int:
        return len(self.grid)


def trajectory_from_etas(grid: np.ndarray, etas: np.ndarray, trace: float = 1.0) -> Trajectory:
    """Build a trajectory from coherence vectors.

    The coherence vectors are projected onto the physical reality pattern
    (equivalently, rho is replaced by its Hermitian part), so the trace and
    hermiticity guarantees hold structurally at any solver tolerance.
    """
    grid = np.asarray(grid, dtype=float)
    n = len(grid)
    eta_out = np.empty((n, 8), dtype=complex)
    rho_out = np.empty((n, 3, 3), dtype=complex)
    records = []
    for k in range(n):
        eta_k = algebra.project_physical_eta(etas[k])
        rho_k = algebra.eta_to_rho(eta_k, trace)
        eta_out[k] = eta_k
        rho_out[k] = rho_k
        records.append(observables.record(grid[k], rho_k, eta_k))
    return Trajectory(grid, rho_out, eta_out, records)


def trajectory_from_rhos(grid: np.ndarray, rhos: np.ndarray) -> Trajectory:
    """Build a trajectory from density matrices (hermitized the same way)."""
    grid = np.asarray(grid, dtype=float)
    n = len(grid)
    eta_out = np.empty((n, 8), dtype=complex)
    rho_out = np.empty((n, 3, 3), dtype=complex)
    records = []
    for k in range(n):
        r = np.asarray(rhos[k], dtype=complex)
        r = 0.5 * (r + r.conj().T)
        eta_k = algebra.rho_to_eta(r)
        eta_out[k] = eta_k
        rho_out[k] = r
        records.append(observables.record(grid[k], r, eta_k))
    return Trajectory(grid, rho_out, eta_out, records)


def output_grid(t_end: float, dt_out: float) -> np.ndarray:
    """Uniform output times 0, dt, 2dt, ... with the last sample at t_end."""
    n = int(math.ceil(t_end / dt_out - 1e-9))
    grid = np.arange(n + 1) * dt_out
    grid[-1] = min(grid[-1], t_end)
    if grid[-1] < t_end:
        grid = np.append(grid, t_end)
    return grid


def _chart_health(vals: tuple[complex, complex, complex]) -> float:
    mp, mm, mu = vals
    return max(abs(mp), abs(mm), abs(mu.imag))


def run(cfg: FieldConfig, rho0: np.ndarray, t_end: float, dt_out: float, tol: float, *,
        checkpoints=None, chart_limit: float | None = CHART_LIMIT) -> Trajectory:
    """Propagate ``rho0`` over [0, t_end], sampling every ``dt_out``.

    The exponent functions are solved on consecutive charts; a new chart is
    started whenever the current one is halted by the health limit, hits a
    blow-up, or reaches a forced checkpoint.  ``checkpoints`` forces restarts
    at the given interior times (used to exercise the cocycle property);
    ``chart_limit=None`` disables proactive restarts so charts only end at
    blow-ups.
    """
    if t_end <= 0:
        raise ValueError("t_end must be positive")
    if dt_out <= 0:
        raise ValueError("dt_out must be positive")
    if tol <= 0:
        raise ValueError("tol must be positive")
    rho0 = algebra.validate_density_matrix(rho0)
    eta0 = algebra.rho_to_eta(rho0)
    trace = float(np.trace(rho0).real)

    grid = output_grid(t_end, dt_out)
    etas = np.empty((len(grid), 8), dtype=complex)

    cps = sorted({float(c) for c in (checkpoints or []) if 0.0 < float(c) < t_end})

    halt = None
    if chart_limit is not None:
        halt = lambda _t, vals: _chart_health(vals) > chart_limit

    accumulated = eta0.copy()   # chart-start value of the non-decaying part
    t_base = 0.0
    oi = 0
    guard = 0
    while oi < len(grid):
        target = t_end
        for c in cps:
            if c > t_base + 1e-15:
                target = min(target, c)
                break
        try:
            chart = solve_mu(cfg, target, tol, t_start=t_base, halt=halt)
            complete = not chart.halted
        except SingularityError as exc:
            chart = exc.partial
            complete = False

        if complete:
            cover = target
        else:
            # Compose at the last sample whose exponents are still small, so
            # the composed factor is well conditioned even near a blow-up.
            walk_limit = chart_limit if chart_limit is not None else CHART_LIMIT
            idx = len(chart.grid) - 1
            while idx > 1 and _chart_health(chart.evaluate(float(chart.grid[idx]))) > walk_limit:
                idx -= 1
            if idx < 1:
                raise PropagationError(
                    f"chart from t = {t_base:.9g} produced no usable samples")
            cover = float(chart.grid[idx])

        if not complete and cover <= t_base + MIN_SEGMENT:
            raise PropagationError(
                f"restart at t = {t_base:.9g} advanced less than {MIN_SEGMENT}")

        fuzz = 1e-12 * max(1.0, abs(cover))
        while oi < len(grid) and grid[oi] <= cover + fuzz:
            t = float(min(grid[oi], cover))
            mvals = chart.evaluate(t)
            eta_t = chart_matrix(*mvals) @ accumulated
            etas[oi] = math.exp(-cfg.Gamma * t) * eta_t
            oi += 1
        if oi >= len(grid):
            break

        accumulated = chart_matrix(*chart.evaluate(cover)) @ accumulated
        t_base = cover
        guard += 1
        if guard > 10_000_000:
            raise PropagationError("too many chart restarts")

    return trajectory_from_etas(grid, etas, trace)
