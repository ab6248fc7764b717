"""Exponent functions of the product-form propagator.

The propagator factorizes as exp(-i mu_plus B_plus) exp(-i mu_minus B_minus)
exp(-i mu B_z) times the scalar decay, with three complex exponent functions
obeying

    d(mu_plus)/dt  = -i eps(t) mu_plus + J(t) (1 + mu_plus^2)
    d(mu)/dt       =  eps(t) + 2i J(t) mu_plus
    d(mu_minus)/dt =  J(t) + i d(mu)/dt mu_minus

with all three starting from zero.  Only the first (a classical Riccati
equation) is nonlinear; the other two are quadratures driven by it.  The
Riccati variable can blow up in finite time; this is a coordinate failure of
the factorization, not a physical divergence (compare tan(J0 t) for constant
coupling), and is reported as :class:`SingularityError` so the caller can
restart the factorization from a fresh reference point.

The integrator is an explicit embedded Dormand-Prince 5(4) pair.  Dense
output is quintic Hermite interpolation from the exact first and second
derivatives at the accepted nodes (the cosine drives differentiate in closed
form), so interpolated values and ODE residuals stay at the accuracy of the
accepted steps at any tolerance.
"""

from __future__ import annotations

import numpy as np

from .fields import FieldConfig, epsilon, epsilon_dot, j_coupling, j_coupling_dot

#: |mu_plus| beyond this is treated as a factorization singularity.
BLOWUP_THRESHOLD = 1e6

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0
_ORDER_EXP = 0.2  # error exponent for the 5(4) pair

# Dormand-Prince 5(4) tableau.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0])
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
)
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])


class SingularityError(RuntimeError):
    """The Riccati variable crossed the blow-up threshold at time ``t_star``.

    ``partial`` holds the trajectory accumulated up to the last sample below
    the threshold, so a caller can compose a restart from there.
    """

    def __init__(self, t_star: float, partial: "MuTrajectory"):
        super().__init__(f"mu_plus blow-up at t = {t_star:.9g} (factorization chart singular)")
        self.t_star = t_star
        self.partial = partial


def mu_rhs(t: float, y: np.ndarray, cfg: FieldConfig) -> np.ndarray:
    """Right-hand side of the coupled exponent-function system."""
    eps = epsilon(t, cfg)
    j = j_coupling(t, cfg)
    mp, mm, _ = y
    dmu = eps + 2j * j * mp
    return np.array([
        -1j * eps * mp + j * (1.0 + mp * mp),
        j + 1j * dmu * mm,
        dmu,
    ])


def _mu_rhs2(t: float, y: np.ndarray, f: np.ndarray, cfg: FieldConfig) -> np.ndarray:
    """Exact second derivatives along a solution (for the dense output)."""
    eps = epsilon(t, cfg)
    j = j_coupling(t, cfg)
    deps = epsilon_dot(t, cfg)
    dj = j_coupling_dot(t, cfg)
    mp, mm, _ = y
    dmp, dmm, dmu = f
    d2mu = deps + 2j * (dj * mp + j * dmp)
    return np.array([
        -1j * (deps * mp + eps * dmp) + dj * (1.0 + mp * mp) + 2.0 * j * mp * dmp,
        dj + 1j * (d2mu * mm + dmu * dmm),
        d2mu,
    ])


class MuTrajectory:
    """Sampled exponent functions with dense evaluation between samples.

    ``grid``, ``mu_plus``, ``mu_minus`` and ``mu`` expose the accepted
    integrator samples; ``evaluate`` interpolates between them with quintic
    Hermite polynomials built from the exact node derivatives.  ``halted`` is
    True when integration was stopped early by a caller-supplied predicate
    rather than reaching the requested end time.
    """

    def __init__(self, grid: np.ndarray, values: np.ndarray, derivs: np.ndarray,
                 derivs2: np.ndarray, halted: bool = False):
        self.grid = np.asarray(grid, dtype=float)
        self._values = values    # (n, 3): mu_plus, mu_minus, mu at the nodes
        self._derivs = derivs    # (n, 3): first derivatives at the nodes
        self._derivs2 = derivs2  # (n, 3): second derivatives at the nodes
        self.halted = halted
        for arr in (self.grid, self._values, self._derivs, self._derivs2):
            arr.setflags(write=False)

    @property
    def mu_plus(self) -> np.ndarray:
        return self._values[:, 0]

    @property
    def mu_minus(self) -> np.ndarray:
        return self._values[:, 1]

    @property
    def mu(self) -> np.ndarray:
        return self._values[:, 2]

    @property
    def t_start(self) -> float:
        return float(self.grid[0])

    @property
    def t_final(self) -> float:
        return float(self.grid[-1])

    def _locate(self, t: float) -> int:
        if not (self.t_start <= t <= self.t_final):
            raise ValueError(f"time {t!r} outside solved range "
                             f"[{self.t_start!r}, {self.t_final!r}]")
        i = int(np.searchsorted(self.grid, t, side="right")) - 1
        return min(max(i, 0), len(self.grid) - 2)

    def evaluate(self, t: float) -> tuple[complex, complex, complex]:
        """Interpolated (mu_plus, mu_minus, mu) at time ``t``."""
        if len(self.grid) == 1:
            if t != self.t_start:
                raise ValueError(f"time {t!r} outside solved range")
            v = self._values[0]
            return complex(v[0]), complex(v[1]), complex(v[2])
        i = self._locate(t)
        if t == self.grid[i] or t == self.grid[i + 1]:
            v = self._values[i if t == self.grid[i] else i + 1]
            return complex(v[0]), complex(v[1]), complex(v[2])
        h = self.grid[i + 1] - self.grid[i]
        s = (t - self.grid[i]) / h
        s2, s3 = s * s, s * s * s
        s4, s5 = s3 * s, s3 * s * s
        h0 = 1 - 10 * s3 + 15 * s4 - 6 * s5
        h1 = s - 6 * s3 + 8 * s4 - 3 * s5
        h2 = 0.5 * (s2 - 3 * s3 + 3 * s4 - s5)
        h3 = 10 * s3 - 15 * s4 + 6 * s5
        h4 = -4 * s3 + 7 * s4 - 3 * s5
        h5 = 0.5 * (s3 - 2 * s4 + s5)
        v = (h0 * self._values[i] + h3 * self._values[i + 1]
             + h * (h1 * self._derivs[i] + h4 * self._derivs[i + 1])
             + h * h * (h2 * self._derivs2[i] + h5 * self._derivs2[i + 1]))
        return complex(v[0]), complex(v[1]), complex(v[2])

    def evaluate_derivative(self, t: float) -> tuple[complex, complex, complex]:
        """Time derivative of the interpolant at ``t`` (for residual checks)."""
        if len(self.grid) == 1:
            d = self._derivs[0]
            return complex(d[0]), complex(d[1]), complex(d[2])
        i = self._locate(t)
        h = self.grid[i + 1] - self.grid[i]
        s = (t - self.grid[i]) / h
        s2, s3, s4 = s * s, s * s * s, s * s * s * s
        d0 = (-30 * s2 + 60 * s3 - 30 * s4) / h
        d1 = 1 - 18 * s2 + 32 * s3 - 15 * s4
        d2 = 0.5 * (2 * s - 9 * s2 + 12 * s3 - 5 * s4)
        d3 = (30 * s2 - 60 * s3 + 30 * s4) / h
        d4 = -12 * s2 + 28 * s3 - 15 * s4
        d5 = 0.5 * (3 * s2 - 8 * s3 + 5 * s4)
        d = (d0 * self._values[i] + d3 * self._values[i + 1]
             + d1 * self._derivs[i] + d4 * self._derivs[i + 1]
             + h * (d2 * self._derivs2[i] + d5 * self._derivs2[i + 1]))
        return complex(d[0]), complex(d[1]), complex(d[2])


def residuals(traj: MuTrajectory, cfg: FieldConfig, times: np.ndarray) -> np.ndarray:
    """ODE residuals of the dense interpolant at the given times, shape (n, 3)."""
    out = np.empty((len(times), 3), dtype=complex)
    for k, t in enumerate(times):
        vals = np.array(traj.evaluate(float(t)))
        derivs = np.array(traj.evaluate_derivative(float(t)))
        out[k] = derivs - mu_rhs(float(t), vals, cfg)
    return out


def _error_norm(err: np.ndarray, y0: np.ndarray, y1: np.ndarray, tol: float) -> float:
    scale = tol + tol * np.maximum(np.abs(y0), np.abs(y1))
    return float(np.sqrt(np.mean(np.abs(err / scale) ** 2)))


def _initial_step(t0: float, y0: np.ndarray, f0: np.ndarray, t_end: float,
                  cfg: FieldConfig, tol: float) -> float:
    span = t_end - t0
    scale = tol + tol * np.abs(y0)
    d0 = float(np.sqrt(np.mean(np.abs(y0 / scale) ** 2)))
    d1 = float(np.sqrt(np.mean(np.abs(f0 / scale) ** 2)))
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, span)
    f1 = mu_rhs(t0 + h0, y0 + h0 * f0, cfg)
    d2 = float(np.sqrt(np.mean(np.abs((f1 - f0) / scale) ** 2))) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** _ORDER_EXP
    return min(100 * h0, h1, span)


def _find_crossing(t0: float, h: float, y0, f0, g0, y1, f1, g1, threshold: float) -> float:
    # Bisection on |mu_plus| of the quintic interpolant inside the blown step.
    def mag(s: float) -> float:
        s2, s3 = s * s, s * s * s
        s4, s5 = s3 * s, s3 * s * s
        v = ((1 - 10 * s3 + 15 * s4 - 6 * s5) * y0[0]
             + (10 * s3 - 15 * s4 + 6 * s5) * y1[0]
             + h * ((s - 6 * s3 + 8 * s4 - 3 * s5) * f0[0]
                    + (-4 * s3 + 7 * s4 - 3 * s5) * f1[0])
             + h * h * (0.5 * (s2 - 3 * s3 + 3 * s4 - s5) * g0[0]
                        + 0.5 * (s3 - 2 * s4 + s5) * g1[0]))
        return abs(v)

    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if mag(mid) >= threshold:
            hi = mid
        else:
            lo = mid
    return t0 + hi * h


def solve_mu(cfg: FieldConfig, t_end: float, tol: float, *,
             t_start: float = 0.0, halt=None) -> MuTrajectory:
    """Integrate the exponent-function system over [t_start, t_end].

    ``tol`` is used as both absolute and relative local error tolerance of the
    embedded 5(4) pair.  ``halt``, if given, is called as ``halt(t, (mu_plus,
    mu_minus, mu))`` at every accepted sample; returning True stops the
    integration there and the result is marked ``halted``.

    Raises :class:`SingularityError` when |mu_plus| crosses
    :data:`BLOWUP_THRESHOLD`; the exception carries the crossing time and the
    partial trajectory up to the last sample below the threshold.
    """
    if t_end <= t_start:
        raise ValueError("t_end must exceed t_start")
    if tol <= 0:
        raise ValueError("tol must be positive")

    if cfg.A == 0.0 and cfg.B == 0.0:
        # Degenerate drive: all exponents stay identically zero.
        grid = np.array([t_start, t_end])
        zeros = np.zeros((2, 3), complex)
        return MuTrajectory(grid, zeros, zeros.copy(), zeros.copy())

    t = t_start
    y = np.zeros(3, dtype=complex)
    f = mu_rhs(t, y, cfg)
    g = _mu_rhs2(t, y, f, cfg)
    ts = [t]
    ys = [y]
    fs = [f]
    gs = [g]

    h = _initial_step(t, y, f, t_end, cfg, tol)
    k = np.empty((7, 3), dtype=complex)

    while t < t_end:
        h = min(h, t_end - t)
        if h < 1e-14 * max(1.0, abs(t)):
            raise RuntimeError(f"step size collapsed at t = {t:.9g}")

        k[0] = f
        for i in range(1, 6):
            yi = y + h * sum(a * k[j] for j, a in enumerate(_A[i]))
            k[i] = mu_rhs(t + _C[i] * h, yi, cfg)
        y_new = y + h * (k[:6].T @ _B5)
        f_new = mu_rhs(t + h, y_new, cfg)
        k[6] = f_new
        y4 = y + h * (k.T @ _B4)

        if not (np.all(np.isfinite(y_new.view(float))) and np.all(np.isfinite(y4.view(float)))):
            h *= 0.25
            continue
        err = _error_norm(y_new - y4, y, y_new, tol)
        if err > 1.0:
            h *= max(_MIN_FACTOR, _SAFETY * err ** -_ORDER_EXP)
            continue

        t_new = t + h
        g_new = _mu_rhs2(t_new, y_new, f_new, cfg)
        if abs(y_new[0]) >= BLOWUP_THRESHOLD:
            t_star = _find_crossing(t, h, y, f, g, y_new, f_new, g_new, BLOWUP_THRESHOLD)
            partial = MuTrajectory(np.array(ts), np.array(ys), np.array(fs), np.array(gs))
            raise SingularityError(t_star, partial)

        t, y, f, g = t_new, y_new, f_new, g_new
        ts.append(t)
        ys.append(y)
        fs.append(f)
        gs.append(g)
        factor = _MAX_FACTOR if err == 0.0 else min(_MAX_FACTOR, _SAFETY * err ** -_ORDER_EXP)
        h *= max(_MIN_FACTOR, factor)

        if halt is not None and halt(t, (complex(y[0]), complex(y[1]), complex(y[2]))):
            return MuTrajectory(np.array(ts), np.array(ys), np.array(fs), np.array(gs),
                                halted=True)

    return MuTrajectory(np.array(ts), np.array(ys), np.array(fs), np.array(gs))
