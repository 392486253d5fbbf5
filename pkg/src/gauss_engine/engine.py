"""The two-oscillator engine: each working oscillator couples to a finite ring bath.

Mode order is ``x_c, x_h, q_c1..q_cN, q_h1..q_hN``. The coupling
``lam f(t) x_c x_h`` between the two working oscillators is the only
time dependence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields

import numpy as np

from .errors import InvariantViolationError, NotPositiveDefiniteError
from .dynamics import DriveProtocol
from .gaussian import (
    GaussianState,
    ModeLayout,
    QuadraticHamiltonian,
    build_hamiltonian,
    direct_sum,
    log_partition_from_freqs,
    mean_energy,
    reduce,
    thermal_state,
)

SIDES = ("c", "h")


@dataclass(frozen=True)
class EngineConfig:
    omega_c: float = 1.0
    omega_h: float = 2.0
    lam: float = 0.08
    lambda_c: float = 0.04
    lambda_h: float = 0.04
    T_c: float = 0.8
    T_h: float = 8.0
    n_bath: int = 300
    n_cycles: int = 50
    n_steps_on: int = 2000
    delta_frac: float = 0.45

    def validate(self) -> "EngineConfig":
        for name in ("omega_c", "omega_h", "T_c", "T_h"):
            if not getattr(self, name) > 0:
                raise InvariantViolationError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.omega_h == self.omega_c:
            raise InvariantViolationError("omega_h must differ from omega_c (sets t_on, t_off)")
        if self.n_bath < 3:
            raise InvariantViolationError(f"n_bath must be >= 3, got {self.n_bath}")
        if self.n_cycles < 1:
            raise InvariantViolationError(f"n_cycles must be >= 1, got {self.n_cycles}")
        if self.n_steps_on < 2 or self.n_steps_on % 2:
            raise InvariantViolationError(f"n_steps_on must be even and >= 2, got {self.n_steps_on}")
        if not 0 < self.delta_frac <= 0.5:
            raise InvariantViolationError(f"delta_frac must lie in (0, 0.5], got {self.delta_frac}")
        return self

    def mirrored(self) -> "EngineConfig":
        """Same engine with the cold and hot labels exchanged."""
        return EngineConfig(
            omega_c=self.omega_h, omega_h=self.omega_c, lam=self.lam,
            lambda_c=self.lambda_h, lambda_h=self.lambda_c, T_c=self.T_h, T_h=self.T_c,
            n_bath=self.n_bath, n_cycles=self.n_cycles, n_steps_on=self.n_steps_on,
            delta_frac=self.delta_frac,
        )

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]


def switching_times(omega_c: float, omega_h: float) -> tuple[float, float]:
    """``(t_on, t_off)`` tied to the detuning of the working oscillators."""
    base = 2.0 * math.pi / abs(omega_h - omega_c) + 1.0
    return 41.0 * base / 40.0, 5.0 * base


def ring_frequencies(omega: float, coupling: float, n: int) -> np.ndarray:
    """Normal-mode frequencies of a periodic chain, ascending.

    ``V = omega^2 I + coupling (shift + shift^T)`` is circulant with
    eigenvalues ``omega^2 + 2 coupling cos(2 pi k / n)``.
    """
    k = np.arange(n)
    w2 = omega**2 + 2.0 * coupling * np.cos(2.0 * np.pi * k / n)
    if w2.min() <= 0:
        raise NotPositiveDefiniteError(f"ring with omega={omega}, coupling={coupling} is unstable")
    return np.sort(np.sqrt(w2))


def ring_potential(omega: float, coupling: float, n: int) -> np.ndarray:
    V = omega**2 * np.eye(n)
    k = np.arange(n)
    V[k, (k + 1) % n] += coupling
    V[(k + 1) % n, k] += coupling
    return V


@dataclass(frozen=True)
class EngineModel:
    config: EngineConfig
    layout: ModeLayout
    V_base: np.ndarray = field(repr=False)
    V_drive: np.ndarray = field(repr=False)
    drive_pair: tuple[int, int]
    protocol: DriveProtocol
    H_base: QuadraticHamiltonian = field(repr=False)
    #: per side: working oscillator, bath ring, oscillator-bath coupling form, and the
    #: oscillator + ring + coupling block the initial state is thermal in
    H_sys: dict = field(repr=False)
    H_bath: dict = field(repr=False)
    H_int: dict = field(repr=False)
    H_side: dict = field(repr=False)
    sys_modes: dict = field(repr=False)
    bath_modes: dict = field(repr=False)
    bath_freqs: dict = field(repr=False)

    @property
    def temperatures(self) -> dict:
        return {"c": self.config.T_c, "h": self.config.T_h}

    @property
    def T_min(self) -> float:
        return min(self.config.T_c, self.config.T_h)

    @property
    def T_max(self) -> float:
        return max(self.config.T_c, self.config.T_h)

    @property
    def system_modes(self) -> list[str]:
        return self.sys_modes["c"] + self.sys_modes["h"]

    @property
    def reservoir_modes(self) -> list[str]:
        return self.bath_modes["c"] + self.bath_modes["h"]

    def bath_log_partition(self, side: str) -> float:
        return log_partition_from_freqs(self.bath_freqs[side], self.temperatures[side])


def build_engine(cfg: EngineConfig) -> EngineModel:
    cfg.validate()
    N = cfg.n_bath
    omega = {"c": cfg.omega_c, "h": cfg.omega_h}
    coupling = {"c": cfg.lambda_c, "h": cfg.lambda_h}
    sys_modes = {s: [f"x_{s}"] for s in SIDES}
    bath_modes = {s: [f"q_{s}{k}" for k in range(1, N + 1)] for s in SIDES}
    layout = ModeLayout(tuple(sys_modes["c"] + sys_modes["h"] + bath_modes["c"] + bath_modes["h"]))
    n = layout.n_modes

    V = np.zeros((n, n))
    ix = {"c": 0, "h": 1}
    start = {"c": 2, "h": 2 + N}
    H_sys, H_bath, H_int, H_side, bath_freqs = {}, {}, {}, {}, {}
    for s in SIDES:
        w, g, i0 = omega[s], coupling[s], start[s]
        block = slice(i0, i0 + N)
        ring = ring_potential(w, g, N)
        V[ix[s], ix[s]] = w**2
        V[block, block] = ring
        V[ix[s], i0] = V[i0, ix[s]] = g

        H_sys[s] = build_hamiltonian(layout.subset(sys_modes[s]), [[w**2]])
        H_bath[s] = build_hamiltonian(layout.subset(bath_modes[s]), ring)
        H_int[s] = build_hamiltonian(
            layout.subset([sys_modes[s][0], bath_modes[s][0]]), [[0.0, g], [g, 0.0]], kinetic=False
        )
        side_idx = [ix[s]] + list(range(i0, i0 + N))
        H_side[s] = build_hamiltonian(layout.subset(side_idx), V[np.ix_(side_idx, side_idx)])
        bath_freqs[s] = ring_frequencies(w, g, N)

    V_drive = np.zeros((n, n))
    V_drive[0, 1] = V_drive[1, 0] = 1.0
    H_base = build_hamiltonian(layout, V)
    for s in SIDES:
        H_side[s].require_positive_definite()
    H_base.require_positive_definite()

    t_on, t_off = switching_times(cfg.omega_c, cfg.omega_h)
    protocol = DriveProtocol(t_on, t_off, cfg.delta_frac * t_on, cfg.lam)
    V_on = V + cfg.lam * V_drive
    try:
        np.linalg.cholesky(V_on)
    except np.linalg.LinAlgError:
        raise NotPositiveDefiniteError("potential with the drive fully on is not positive definite") from None

    return EngineModel(
        config=cfg, layout=layout, V_base=H_base.V, V_drive=V_drive, drive_pair=(0, 1),
        protocol=protocol, H_base=H_base, H_sys=H_sys, H_bath=H_bath, H_int=H_int,
        H_side=H_side, sys_modes=sys_modes, bath_modes=bath_modes, bath_freqs=bath_freqs,
    )


def initial_state(model: EngineModel, cfg: EngineConfig | None = None) -> GaussianState:
    """Product of the two side Gibbs states, each including its oscillator-bath coupling."""
    cfg = cfg or model.config
    temps = {"c": cfg.T_c, "h": cfg.T_h}
    sides = [thermal_state(model.H_side[s], temps[s]) for s in SIDES]
    joint = direct_sum(*sides)
    # reorder into the model layout (x_c, x_h, cold ring, hot ring)
    return reduce(joint, list(model.layout.labels))


def bath_temperature_diagnostic(
    s0: GaussianState, model: EngineModel, cfg: EngineConfig | None = None
) -> dict:
    """Per bath, ``<H_j>`` in ``s0`` minus its Gibbs value at the configured temperature."""
    cfg = cfg or model.config
    temps = {"c": cfg.T_c, "h": cfg.T_h}
    out = {}
    for s in SIDES:
        # Gibbs energy of a ring straight from its closed-form spectrum
        w = model.bath_freqs[s]
        gibbs = float(np.sum(0.5 * w / np.tanh(w / (2.0 * temps[s]))))
        out[s] = mean_energy(s0, model.H_bath[s]) - gibbs
    return out
