"""Per-sample physical quantities: populations, coherences, entropy, purity.

Entropy is reported in nats; the maximally mixed three-level value is ln 3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

LN3 = math.log(3.0)

# Eigenvalues inside [-CLAMP_WINDOW, 1 + CLAMP_WINDOW] are clamped to [0, 1]
# before taking logs, so roundoff near pure states cannot produce NaNs.
CLAMP_WINDOW = 1e-9


def spectrum(rho: np.ndarray) -> np.ndarray:
    """Real eigenvalues of a Hermitian density matrix, sorted descending."""
    return np.linalg.eigvalsh(np.asarray(rho))[::-1].copy()


def _clamped_spectrum(rho: np.ndarray) -> np.ndarray:
    lam = spectrum(rho)
    return np.clip(lam, 0.0, 1.0)


def entropy(rho: np.ndarray) -> float:
    """Von Neumann entropy -sum(lam ln lam) in nats, with 0 ln 0 = 0."""
    lam = _clamped_spectrum(rho)
    nz = lam[lam > 0.0]
    return float(-np.sum(nz * np.log(nz)))


def purity(rho: np.ndarray) -> float:
    """Tr rho^2."""
    r = np.asarray(rho)
    return float(np.real(np.trace(r @ r)))


def coherence_norm(eta: np.ndarray) -> float:
    """Euclidean norm sqrt(sum |eta_i|^2) of a coherence vector."""
    return float(np.sqrt(np.sum(np.abs(np.asarray(eta)) ** 2)))


@dataclass(frozen=True)
class ObservableRecord:
    """One output sample of a simulated trajectory."""

    t: float
    pop1: float
    pop2: float
    pop3: float
    re12: float
    im12: float
    re13: float
    im13: float
    re23: float
    im23: float
    entropy: float
    purity: float
    eig1: float
    eig2: float
    eig3: float
    eta_norm: float

    CSV_FIELDS = ("t", "pop1", "pop2", "pop3", "re12", "im12", "re13", "im13",
                  "re23", "im23", "entropy", "purity", "eig1", "eig2", "eig3",
                  "eta_norm")

    def as_row(self) -> tuple[float, ...]:
        return tuple(getattr(self, name) for name in self.CSV_FIELDS)


def record(t: float, rho: np.ndarray, eta: np.ndarray) -> ObservableRecord:
    """Assemble the observable record for one sample."""
    r = np.asarray(rho)
    lam = spectrum(r)
    return ObservableRecord(
        t=float(t),
        pop1=float(r[0, 0].real),
        pop2=float(r[1, 1].real),
        pop3=float(r[2, 2].real),
        re12=float(r[0, 1].real), im12=float(r[0, 1].imag),
        re13=float(r[0, 2].real), im13=float(r[0, 2].imag),
        re23=float(r[1, 2].real), im23=float(r[1, 2].imag),
        entropy=entropy(r),
        purity=purity(r),
        eig1=float(lam[0]), eig2=float(lam[1]), eig3=float(lam[2]),
        eta_norm=coherence_norm(eta),
    )
