"""Energetic and entropic bookkeeping of a correlated engine over one cycle.

All quantities are evaluated at cycle boundaries, where the drive between
the working oscillators is off, so every boundary energy is unambiguous.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import NoHeatInputError
from .gaussian import (
    GaussianState,
    log_partition,
    mean_energy,
    reduce,
    relative_entropy_from_parts,
    von_neumann_entropy,
)

THERMAL = "thermal"
ATHERMAL = "athermal"
NOT_ENGINE = "not_engine"
#: ratio eta / (gamma eta_th) separating the two engine regimes
REGIME_THRESHOLD = 2.0
#: |W_tot| below this (energy units) is numerical noise, not work
WORK_FLOOR = 1e-10
#: floor of the energy scale for relative residuals, as a fraction of the total
#: energy (rounding noise of boundary energies is relative to the total)
ENERGY_FLOOR = 1e-9
PER_SUBSYSTEM = "per_subsystem"
JOINT = "joint"
INTAKE_MODES = (PER_SUBSYSTEM, JOINT)


@dataclass(frozen=True)
class CycleLedger:
    """Energy changes over one cycle, keyed by side (``"c"``, ``"h"``).

    ``Q`` is heat absorbed by each bath, ``dU_S`` the change of each working
    oscillator's energy, ``dU_int`` the change of each oscillator-bath
    coupling energy and ``W_tot`` the change of the total energy.
    ``E_total`` is the total energy at the start of the cycle.
    """

    Q: dict
    dU_S: dict
    dU_int: dict
    W_tot: float
    cycle_index: int = 1
    E_total: float = 0.0

    @property
    def first_law_residual(self) -> float:
        parts = sum(self.Q.values()) + sum(self.dU_S.values()) + sum(self.dU_int.values())
        return abs(self.W_tot - parts)

    @property
    def energy_scale(self) -> float:
        """Largest single energy flow of the cycle, used to make residuals relative."""
        terms = [self.W_tot, *self.Q.values(), *self.dU_S.values(), *self.dU_int.values()]
        return max(abs(v) for v in terms)

    def relative(self, residual: float) -> float:
        """``residual`` over :attr:`energy_scale`, floored at ``ENERGY_FLOOR * |E_total|``."""
        scale = max(self.energy_scale, ENERGY_FLOOR * abs(self.E_total))
        return residual / scale if scale > 0 else residual


def _energies(s: GaussianState, model) -> dict:
    return {
        "Q": {k: mean_energy(s, H) for k, H in model.H_bath.items()},
        "dU_S": {k: mean_energy(s, H) for k, H in model.H_sys.items()},
        "dU_int": {k: mean_energy(s, H) for k, H in model.H_int.items()},
        "total": mean_energy(s, model.H_base),
    }


def cycle_ledger(
    s_start: GaussianState, s_end: GaussianState, model, cycle_index: int = 1
) -> CycleLedger:
    e0, e1 = _energies(s_start, model), _energies(s_end, model)
    diff = {key: {k: e1[key][k] - e0[key][k] for k in e0[key]} for key in ("Q", "dU_S", "dU_int")}
    return CycleLedger(
        diff["Q"], diff["dU_S"], diff["dU_int"], e1["total"] - e0["total"], cycle_index, e0["total"]
    )


@dataclass(frozen=True)
class EntropyReport:
    S_i: dict
    S_j: dict
    S_sys: float
    S_res: float
    S_total: float
    I_SR: float
    C_S: float
    C_R: float
    D_j: dict
    D_i: dict
    Sigma: float
    sigma: float
    t: float = 0.0

    def constituents(self) -> dict:
        out = {"I_SR": self.I_SR, "C_S": self.C_S, "C_R": self.C_R}
        out.update({f"D_R{k}": v for k, v in self.D_j.items()})
        out.update({f"D_S{k}": v for k, v in self.D_i.items()})
        return out


def entropy_report(s: GaussianState, model, t: float = 0.0) -> EntropyReport:
    """Entropies, correlations and relative entropies of ``s``.

    Bath references are Gibbs states at the configured bath temperatures;
    the working-oscillator references sit at the lowest bath temperature.
    """
    temps = model.temperatures
    T_min = model.T_min
    S_i, S_j, D_i, D_j = {}, {}, {}, {}
    for k in model.H_sys:
        red = reduce(s, model.sys_modes[k])
        S_i[k] = von_neumann_entropy(red)
        H = model.H_sys[k]
        D_i[k] = relative_entropy_from_parts(S_i[k], mean_energy(red, H), log_partition(H, T_min), T_min)
    for k in model.H_bath:
        red = reduce(s, model.bath_modes[k])
        S_j[k] = von_neumann_entropy(red)
        D_j[k] = relative_entropy_from_parts(
            S_j[k], mean_energy(red, model.H_bath[k]), model.bath_log_partition(k), temps[k]
        )
    S_sys = von_neumann_entropy(reduce(s, model.system_modes))
    S_res = von_neumann_entropy(reduce(s, model.reservoir_modes))
    S_total = von_neumann_entropy(s)
    I_SR = S_sys + S_res - S_total
    C_S = sum(S_i.values()) - S_sys
    C_R = sum(S_j.values()) - S_res
    Sigma = I_SR + C_S + C_R + sum(D_j.values())
    sigma = Sigma + sum(D_i.values())
    return EntropyReport(S_i, S_j, S_sys, S_res, S_total, I_SR, C_S, C_R, D_j, D_i, Sigma, sigma, t)


def conservation_residual(r_start: EntropyReport, r_end: EntropyReport) -> float:
    """Residual of ``sum dS_i + sum dS_j = dI + dC_S + dC_R``.

    Vanishes exactly when the global entropy is conserved.
    """
    lhs = sum(r_end.S_i[k] - r_start.S_i[k] for k in r_start.S_i)
    lhs += sum(r_end.S_j[k] - r_start.S_j[k] for k in r_start.S_j)
    rhs = (r_end.I_SR - r_start.I_SR) + (r_end.C_S - r_start.C_S) + (r_end.C_R - r_start.C_R)
    return abs(lhs - rhs)


def second_law_residual(
    r_start: EntropyReport, r_end: EntropyReport, ledger: CycleLedger, T: dict
) -> float:
    """``|sum_i dS_i + sum_j Q_j / T_j - dSigma|``."""
    dS = sum(r_end.S_i[k] - r_start.S_i[k] for k in r_start.S_i)
    flux = sum(ledger.Q[k] / T[k] for k in ledger.Q)
    return abs(dS + flux - (r_end.Sigma - r_start.Sigma))


def local_carnot(T: dict) -> dict:
    T_min = min(T.values())
    return {k: 1.0 - T_min / v for k, v in T.items()}


def work_decomposition_residual(
    ledger: CycleLedger, r_start: EntropyReport, r_end: EntropyReport, T: dict
) -> float:
    """``|W - sum_j eta_j Q_j - dU_int - T_min dsigma|``."""
    eta_j = local_carnot(T)
    T_min = min(T.values())
    d_sigma = r_end.sigma - r_start.sigma
    thermal = sum(eta_j[k] * ledger.Q[k] for k in ledger.Q)
    return abs(ledger.W_tot - thermal - sum(ledger.dU_int.values()) - T_min * d_sigma)


def _intake(values) -> float:
    # energy drawn from a set of sources: sum of the negative changes, sign flipped
    return sum((abs(v) - v) / 2.0 for v in values)


@dataclass(frozen=True)
class EfficiencyReport:
    Q_in: float
    dU_S_in: float
    dU_int_in: float
    eta: Optional[float]
    gamma: float
    eta_th: Optional[float]
    eta_j: dict
    eta_C: float
    eta_O: Optional[float]
    T_min: float
    d_sigma: float
    ratio: Optional[float]
    regime: str
    W_tot: float
    thermal_work: float
    dU_int: float

    @property
    def is_engine(self) -> bool:
        return self.regime != NOT_ENGINE

    @property
    def eq6_residual(self) -> Optional[float]:
        """Mismatch between the two sides of the regime identity, when both exist."""
        if self.ratio is None or self.thermal_work == 0:
            return None
        lhs = (self.T_min * self.d_sigma + self.dU_int) / self.thermal_work
        return abs(lhs - (self.ratio - 1.0))


def classify(W_tot: float, ratio: Optional[float]) -> str:
    """Regime of a cycle; work within ``WORK_FLOOR`` of zero is not an engine."""
    if W_tot >= -WORK_FLOOR:
        return NOT_ENGINE
    if ratio is None:
        # work out with no heat-driven contribution to compare against
        return ATHERMAL
    return THERMAL if ratio <= REGIME_THRESHOLD else ATHERMAL


def efficiency_report(
    ledger: CycleLedger,
    d_sigma: float,
    T: dict,
    omegas: Optional[tuple] = None,
    intake: str = PER_SUBSYSTEM,
) -> EfficiencyReport:
    """Efficiency, heat fraction ``gamma``, thermal efficiency and regime of one cycle.

    ``omegas`` (working-oscillator frequencies) only feeds the Otto
    reference ``1 - min(omegas) / max(omegas)``.

    ``intake`` controls how the working-substance energy drawn during the
    cycle is counted: ``"per_subsystem"`` sums the decrease of each working
    oscillator separately, ``"joint"`` treats the coupled pair as a single
    subsystem and only counts a decrease of their summed energy. The ratio
    ``eta / (gamma eta_th)`` and hence the regime do not depend on it.
    """
    if intake not in INTAKE_MODES:
        raise ValueError(f"intake must be one of {INTAKE_MODES}, got {intake!r}")
    T_min, T_max = min(T.values()), max(T.values())
    eta_j = local_carnot(T)
    Q_in = _intake(ledger.Q.values())
    if intake == JOINT:
        dU_S_in = _intake([sum(ledger.dU_S.values())])
    else:
        dU_S_in = _intake(ledger.dU_S.values())
    dU_int_in = _intake(ledger.dU_int.values())
    denom = Q_in + dU_S_in + dU_int_in
    eta = -ledger.W_tot / denom if denom > 0 else None
    thermal_work = sum(eta_j[k] * ledger.Q[k] for k in ledger.Q)
    if Q_in > 0:
        gamma = 1.0 / (1.0 + (dU_S_in + dU_int_in) / Q_in)
        eta_th = -thermal_work / Q_in
    else:
        gamma, eta_th = 0.0, None
    engine = ledger.W_tot < -WORK_FLOOR
    if engine and eta is not None and gamma > 0 and eta_th:
        ratio = eta / (gamma * eta_th)
    else:
        ratio = None
    eta_O = 1.0 - min(omegas) / max(omegas) if omegas else None
    return EfficiencyReport(
        Q_in=Q_in, dU_S_in=dU_S_in, dU_int_in=dU_int_in, eta=eta, gamma=gamma, eta_th=eta_th,
        eta_j=eta_j, eta_C=1.0 - T_min / T_max, eta_O=eta_O, T_min=T_min, d_sigma=d_sigma,
        ratio=ratio, regime=classify(ledger.W_tot, ratio), W_tot=ledger.W_tot,
        thermal_work=thermal_work, dU_int=sum(ledger.dU_int.values()),
    )


def efficiency_bound(report: EfficiencyReport, sigma_start: float) -> tuple[float, float]:
    """Upper bounds ``(eta_th + T_min sigma / Q_in, eta_C + T_min sigma / Q_in)``."""
    if not report.Q_in > 0:
        raise NoHeatInputError("efficiency bound needs a positive heat intake")
    extra = report.T_min * sigma_start / report.Q_in
    return report.eta_th + extra, report.eta_C + extra


def bound_surface(gamma_grid, eta_th_grid) -> tuple[np.ndarray, np.ndarray]:
    """Device-independent bound ``1/(gamma eta_th) - 1`` on a grid.

    Rows follow ``gamma_grid``, columns ``eta_th_grid``. The mask marks
    where thermal operation is guaranteed, ``gamma * eta_th > 1/2``.
    """
    g = np.asarray(gamma_grid, dtype=float)[:, None]
    e = np.asarray(eta_th_grid, dtype=float)[None, :]
    if np.any(g <= 0) or np.any(g > 1) or np.any(e <= 0) or np.any(e > 1):
        raise ValueError("grid values must lie in (0, 1]")
    prod = g * e
    return 1.0 / prod - 1.0, prod > 0.5
