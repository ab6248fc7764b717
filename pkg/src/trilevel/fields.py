"""Driving-field configurations, the coherence-vector generator, and presets.

The two fields are ``epsilon(t) = A cos(Omega t)`` on the 1-2 coupling and
``J(t) = (B/2) cos(omega t + delta)`` on the 2-3 coupling.  A uniform
decoherence rate ``Gamma`` enters the 8x8 generator as ``-i Gamma`` times the
identity, so the dissipative part is a plain scalar decay of the coherence
vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from importlib import resources

import numpy as np

from . import algebra, config

_SQRT2 = math.sqrt(2.0)

FIELD_KEYS = ("A", "Omega", "B", "omega", "delta", "Gamma", "sign")

INITIAL_KINDS = ("level1", "level2", "level3",
                 "stark_plus", "stark_minus", "stark_zero", "custom")

# Parabolic (Stark) eigenstates of the degenerate n=3 hydrogen manifold in the
# (s, p, d) level ordering.
STARK_PLUS_VECTOR = np.array([1.0 / math.sqrt(3), 1.0 / _SQRT2, 1.0 / math.sqrt(6)], dtype=complex)
STARK_MINUS_VECTOR = np.array([1.0 / math.sqrt(3), -1.0 / _SQRT2, 1.0 / math.sqrt(6)], dtype=complex)
STARK_ZERO_VECTOR = np.array([1.0 / math.sqrt(3), 0.0, -_SQRT2 / math.sqrt(3)], dtype=complex)
for _v in (STARK_PLUS_VECTOR, STARK_MINUS_VECTOR, STARK_ZERO_VECTOR):
    _v.setflags(write=False)


class UnknownPresetError(ValueError):
    def __init__(self, name: str, valid: tuple[str, ...]):
        super().__init__(f"unknown preset {name!r}; valid names: {', '.join(valid)}")
        self.name = name
        self.valid = valid


@dataclass(frozen=True)
class FieldConfig:
    """Amplitudes, frequencies, relative phase and decoherence rate.

    ``sign_convention`` multiplies both couplings; populations do not depend
    on it, but amplitude-level comparison with the hydrogen Stark solution
    fixes it to -1 for the hydrogen presets.
    """

    A: float
    Omega: float
    B: float
    omega: float
    delta: float = 0.0
    Gamma: float = 0.0
    sign_convention: float = 1.0

    def __post_init__(self):
        if self.Gamma < 0:
            raise ValueError("Gamma must be >= 0")
        if self.sign_convention not in (1.0, -1.0, 1, -1):
            raise ValueError("sign_convention must be +1 or -1")

    def with_updates(self, **changes) -> "FieldConfig":
        return replace(self, **changes)

    def as_entries(self) -> dict[str, float]:
        return {"A": self.A, "Omega": self.Omega, "B": self.B, "omega": self.omega,
                "delta": self.delta, "Gamma": self.Gamma, "sign": self.sign_convention}


def field_config_from_entries(entries: dict[str, str]) -> FieldConfig:
    """Build a FieldConfig from raw config entries, validating each key."""
    cfg_kwargs = dict(
        A=config.get_float(entries, "A"),
        Omega=config.get_float(entries, "Omega"),
        B=config.get_float(entries, "B"),
        omega=config.get_float(entries, "omega"),
        delta=config.get_float(entries, "delta", 0.0),
        Gamma=config.get_float(entries, "Gamma", 0.0),
        sign_convention=config.get_float(entries, "sign", 1.0),
    )
    if cfg_kwargs["Gamma"] < 0:
        raise config.ConfigError("Gamma must be >= 0", key="Gamma")
    if cfg_kwargs["sign_convention"] not in (1.0, -1.0):
        raise config.ConfigError("sign must be 1 or -1", key="sign")
    return FieldConfig(**cfg_kwargs)


def epsilon(t: float, cfg: FieldConfig) -> float:
    """Instantaneous 1-2 coupling strength."""
    return cfg.sign_convention * cfg.A * math.cos(cfg.Omega * t)


def j_coupling(t: float, cfg: FieldConfig) -> float:
    """Instantaneous 2-3 coupling strength (half the B amplitude)."""
    return cfg.sign_convention * 0.5 * cfg.B * math.cos(cfg.omega * t + cfg.delta)


def epsilon_dot(t: float, cfg: FieldConfig) -> float:
    """Time derivative of the 1-2 coupling."""
    return -cfg.sign_convention * cfg.A * cfg.Omega * math.sin(cfg.Omega * t)


def j_coupling_dot(t: float, cfg: FieldConfig) -> float:
    """Time derivative of the 2-3 coupling."""
    return -cfg.sign_convention * 0.5 * cfg.B * cfg.omega * math.sin(cfg.omega * t + cfg.delta)


def liouvillian(t: float, cfg: FieldConfig) -> np.ndarray:
    """8x8 generator of the coherence-vector equation of motion.

    ``i d(eta)/dt = liouvillian(t) eta``; the field part is Hermitian, the
    decoherence part is ``-i Gamma`` times the identity.
    """
    out = (epsilon(t, cfg) * algebra.B_Z + 2.0 * j_coupling(t, cfg) * algebra.B_X).astype(complex)
    if cfg.Gamma != 0.0:
        out -= 1j * cfg.Gamma * np.eye(8)
    return out


@dataclass(frozen=True)
class InitialState:
    """Named initial density matrix, or a custom one."""

    kind: str
    custom_rho: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in INITIAL_KINDS:
            raise ValueError(f"initial state kind must be one of {INITIAL_KINDS}, got {self.kind!r}")
        if self.kind == "custom" and self.custom_rho is None:
            raise ValueError("custom initial state requires custom_rho")

    def density(self) -> np.ndarray:
        if self.kind == "custom":
            return algebra.validate_density_matrix(self.custom_rho)
        if self.kind.startswith("level"):
            i = int(self.kind[-1]) - 1
            rho = np.zeros((3, 3), dtype=complex)
            rho[i, i] = 1.0
            return rho
        vec = {"stark_plus": STARK_PLUS_VECTOR,
               "stark_minus": STARK_MINUS_VECTOR,
               "stark_zero": STARK_ZERO_VECTOR}[self.kind]
        return np.outer(vec, vec.conj())


@dataclass(frozen=True)
class Preset:
    """A named parameter set: field config, initial state, output window."""

    name: str
    config: FieldConfig
    initial: InitialState
    t_end: float
    dt_out: float
    desk_scale: bool = True
    note: str = ""


def hydrogen_config(amplitude: float, omega: float = 1.0, Gamma: float = 0.0) -> FieldConfig:
    """Field config for the n=3 hydrogen manifold in an oscillating field.

    Locks the two couplings to the dipole ratio (A/B = sqrt(2)), equal
    frequencies, zero relative phase, and the sign convention that matches the
    Stark closed form at amplitude level.
    """
    return FieldConfig(A=amplitude, Omega=omega, B=amplitude / _SQRT2, omega=omega,
                       delta=0.0, Gamma=Gamma, sign_convention=-1.0)


@lru_cache(maxsize=1)
def _preset_table() -> dict[str, Preset]:
    text = resources.files("trilevel").joinpath("presets.cfg").read_text(encoding="utf-8")
    table = {}
    for name, entries in config.parse_blocks(text).items():
        cfg = field_config_from_entries(entries)
        initial = InitialState(config.get_choice(entries, "initial", INITIAL_KINDS[:-1]))
        table[name] = Preset(
            name=name,
            config=cfg,
            initial=initial,
            t_end=config.get_float(entries, "t_end"),
            dt_out=config.get_float(entries, "dt_out"),
            desk_scale=config.get_bool(entries, "desk_scale", True),
            note=config.get_str(entries, "note", ""),
        )
    return table


def preset_names() -> tuple[str, ...]:
    return tuple(_preset_table())


def preset(name: str) -> Preset:
    """Look up a bundled preset by name (fig1..fig17, hydrogen)."""
    table = _preset_table()
    if name not in table:
        raise UnknownPresetError(name, tuple(table))
    return table[name]
