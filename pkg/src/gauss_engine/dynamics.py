"""Propagation of Gaussian moments under (time-dependent) quadratic Hamiltonians.

Moments obey ``dz/dt = A(t) z`` with ``A = [[0, I], [-V(t), 0]]``; a
propagator ``S`` maps ``mean -> S mean`` and ``cov -> S cov S^T``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.integrate import simpson

from .errors import LayoutMismatchError, NotPositiveDefiniteError, SymplecticityLostError
from .gaussian import GaussianState, QuadraticHamiltonian, normal_modes, symplectic_form

SYMPLECTIC_TOL = 1e-8
DEFAULT_STEPS_ON = 2000
LAB = "lab"
INTERACTION = "interaction"
INTEGRATORS = (LAB, INTERACTION)
# beyond this |cot|, sech^2 underflows and the switching ramp is flat
_FLAT_COT = 350.0


@dataclass(frozen=True)
class DriveProtocol:
    """Periodic smooth on/off switching of the oscillator coupling.

    ``f`` ramps 0 -> 1 over ``[0, delta]``, stays at 1, ramps back to 0 over
    ``[t_on - delta, t_on]`` and is zero for the remaining ``t_off``.
    """

    t_on: float
    t_off: float
    delta: float
    lam: float

    def __post_init__(self):
        if not (0 < 2 * self.delta <= self.t_on):
            raise ValueError(f"need 0 < 2*delta <= t_on, got delta={self.delta}, t_on={self.t_on}")
        if self.t_off < 0:
            raise ValueError(f"t_off must be >= 0, got {self.t_off}")

    @property
    def period(self) -> float:
        return self.t_on + self.t_off


def _ramp_parts(p: DriveProtocol, t):
    u = np.mod(np.asarray(t, dtype=float), p.period)
    rise = (u >= 0) & (u <= p.delta)
    fall = (u >= p.t_on - p.delta) & (u <= p.t_on)
    plateau = (u > p.delta) & (u < p.t_on - p.delta)
    with np.errstate(divide="ignore", invalid="ignore"):
        x_rise = np.pi * u / p.delta
        x_fall = np.pi * (u - p.t_on) / p.delta
        c_rise = np.cos(x_rise) / np.sin(x_rise)
        c_fall = np.cos(x_fall) / np.sin(x_fall)
    # endpoints are taken as one-sided limits
    c_rise = np.where(u == 0, np.inf, np.where(u == p.delta, -np.inf, c_rise))
    c_fall = np.where(u == p.t_on - p.delta, np.inf, np.where(u == p.t_on, -np.inf, c_fall))
    return u, rise, fall, plateau, c_rise, c_fall


def bump_value(p: DriveProtocol, t):
    """Switching function ``f(t)`` in ``[0, 1]``, periodic with ``p.period``."""
    u, rise, fall, plateau, c_rise, c_fall = _ramp_parts(p, t)
    f = np.zeros_like(u)
    f = np.where(rise, 0.5 * (1.0 - np.tanh(c_rise)), f)
    f = np.where(fall, 0.5 * (1.0 + np.tanh(c_fall)), f)
    f = np.where(plateau, 1.0, f)
    return f if f.ndim else float(f)


def _sech2_csc2(c):
    # sech^2(c) * (1 + c^2), zero where the ramp is flat to machine precision
    c = np.asarray(c, dtype=float)
    out = np.zeros_like(c)
    ok = np.abs(c) < _FLAT_COT
    e = np.exp(-2.0 * np.abs(c[ok]))
    out[ok] = 4.0 * e / (1.0 + e) ** 2 * (1.0 + c[ok] ** 2)
    return out


def bump_derivative(p: DriveProtocol, t):
    """Analytic ``df/dt``."""
    u, rise, fall, _, c_rise, c_fall = _ramp_parts(p, t)
    k = 0.5 * np.pi / p.delta
    df = np.zeros_like(u)
    df = np.where(rise, k * _sech2_csc2(c_rise), df)
    df = np.where(fall, -k * _sech2_csc2(c_fall), df)
    return df if df.ndim else float(df)


def potential_at(model, t: float) -> np.ndarray:
    """Dense potential ``V(t) = V_base + lam f(t) V_drive`` of an engine model."""
    f = bump_value(model.protocol, t)
    return model.V_base + model.protocol.lam * f * model.V_drive


@dataclass(frozen=True)
class Propagator:
    S: np.ndarray
    interval: tuple[float, float]

    @property
    def dim(self) -> int:
        return self.S.shape[0]

    def then(self, later: "Propagator") -> "Propagator":
        """Apply ``self`` first, then ``later``."""
        return Propagator(later.S @ self.S, (self.interval[0], later.interval[1]))

    def power(self, k: int) -> "Propagator":
        t0, t1 = self.interval
        return Propagator(np.linalg.matrix_power(self.S, k), (t0, t0 + k * (t1 - t0)))


def symplecticity_defect(P: Propagator | np.ndarray) -> float:
    """``||S^T Omega S - Omega||_F / ||Omega||_F``."""
    S = P.S if isinstance(P, Propagator) else np.asarray(P)
    omega = symplectic_form(S.shape[0] // 2)
    return float(np.linalg.norm(S.T @ omega @ S - omega) / np.linalg.norm(omega))


def constant_propagator(H: QuadraticHamiltonian, dt: float, t0: float = 0.0) -> Propagator:
    """Exact propagator of a time-independent ``H`` over ``dt``."""
    if dt == 0:
        return Propagator(np.eye(2 * H.n_modes), (t0, t0))
    nm = normal_modes(H)
    O, w = nm.O, nm.freqs
    cos, sin = np.cos(w * dt), np.sin(w * dt)
    xx = (O * cos) @ O.T
    xp = (O * (sin / w)) @ O.T
    px = -(O * (w * sin)) @ O.T
    return Propagator(np.block([[xx, xp], [px, xx]]), (t0, t0 + dt))


def evolve(s: GaussianState, P: Propagator) -> GaussianState:
    if P.dim != 2 * s.n_modes:
        raise LayoutMismatchError(f"propagator of size {P.dim} for {s.n_modes} modes")
    S = P.S
    return GaussianState(s.layout, S @ s.mean, S @ s.cov @ S.T)


@dataclass(frozen=True)
class OnPhaseTrace:
    """Rows of ``S(t)`` for the two driven coordinates on the RK4 grid.

    Enough to reconstruct ``<x_c x_h>(t)`` for any state at the start of a
    cycle, which is what the work integral needs.
    """

    times: np.ndarray
    f: np.ndarray
    fdot: np.ndarray
    rows_a: np.ndarray
    rows_b: np.ndarray


def _drive_grid(protocol: DriveProtocol, n_steps: int):
    if n_steps < 2 or n_steps % 2:
        raise ValueError(f"n_steps must be a positive even integer, got {n_steps}")
    h = protocol.t_on / n_steps
    times = np.linspace(0.0, protocol.t_on, n_steps + 1)
    half = times[:-1] + 0.5 * h
    return h, times, bump_value(protocol, times), bump_value(protocol, half)


def propagate_driven_lab(
    V_base, pair: tuple[int, int], protocol: DriveProtocol, n_steps: int
) -> tuple[Propagator, OnPhaseTrace]:
    """Plain RK4 on ``dS/dt = A(t) S`` in the lab frame.

    Costs ``O(n_steps * nnz(V) * n)``; fine for baths of a few dozen modes,
    slow (minutes) for hundreds.
    """
    h, times, f_nodes, f_half = _drive_grid(protocol, n_steps)
    Vb = sp.csr_matrix(V_base)
    n = Vb.shape[0]
    a, b = pair
    lam = protocol.lam

    def deriv(y, ft):
        out = np.empty_like(y)
        out[:n] = y[n:]
        out[n:] = -(Vb @ y[:n])
        out[n + a] -= lam * ft * y[b]
        out[n + b] -= lam * ft * y[a]
        return out

    S = np.eye(2 * n)
    rows_a = np.empty((n_steps + 1, 2 * n))
    rows_b = np.empty((n_steps + 1, 2 * n))
    rows_a[0], rows_b[0] = S[a], S[b]
    for k in range(n_steps):
        k1 = deriv(S, f_nodes[k])
        k2 = deriv(S + 0.5 * h * k1, f_half[k])
        k3 = deriv(S + 0.5 * h * k2, f_half[k])
        k4 = deriv(S + h * k3, f_nodes[k + 1])
        S = S + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        rows_a[k + 1], rows_b[k + 1] = S[a], S[b]
    trace = OnPhaseTrace(times, f_nodes, bump_derivative(protocol, times), rows_a, rows_b)
    return Propagator(S, (0.0, protocol.t_on)), trace


def _free_vectors(O, w, a, b, taus):
    """Rows ``x_b, x_a`` of ``U0(t)`` and columns ``p_a, p_b`` of ``U0(-t)``.

    Returned as arrays of shape ``(len(taus), 2, 2n)`` and ``(len(taus), 2n, 2)``.
    """
    n = O.shape[0]
    wt = np.outer(taus, w)
    cos, sin = np.cos(wt), np.sin(wt)
    Q = np.empty((taus.size, 2, 2 * n))
    P = np.empty((taus.size, 2 * n, 2))
    for slot, (row, col) in enumerate(((b, a), (a, b))):
        Q[:, slot, :n] = (cos * O[row]) @ O.T
        Q[:, slot, n:] = (sin / w * O[row]) @ O.T
        P[:, :n, slot] = -(sin / w * O[col]) @ O.T
        P[:, n:, slot] = (cos * O[col]) @ O.T
    return Q, P


def propagate_driven(
    V_base,
    pair: tuple[int, int],
    protocol: DriveProtocol,
    n_steps: int,
    block: int = 50,
) -> tuple[Propagator, OnPhaseTrace]:
    """RK4 propagator over ``[0, t_on]`` for ``V_base + lam f(t) (E_ab + E_ba)``.

    RK4 runs in the interaction picture of ``V_base``, whose free motion is
    exact through its normal modes. There the generator
    ``-lam f(t) P(t) Q(t)^T`` has rank two, so each step is a rank-six
    update; updates are batched over ``block`` steps into matrix products.
    """
    h, times, f_nodes, f_half = _drive_grid(protocol, n_steps)
    V = V_base.toarray() if sp.issparse(V_base) else np.asarray(V_base, dtype=float)
    w2, O = np.linalg.eigh(V)
    if w2[0] <= 0:
        raise NotPositiveDefiniteError("V_base is not positive definite")
    w = np.sqrt(w2)
    n = V.shape[0]
    a, b = pair
    g_nodes = protocol.lam * f_nodes
    g_half = protocol.lam * f_half

    W = np.eye(2 * n)
    rows_a = np.empty((n_steps + 1, 2 * n))
    rows_b = np.empty((n_steps + 1, 2 * n))
    for k0 in range(0, n_steps, block):
        nb = min(block, n_steps - k0)
        # stage times t_k0 + i h/2, i = 0 .. 2 nb
        taus = times[k0] + 0.5 * h * np.arange(2 * nb + 1)
        Q, P = _free_vectors(O, w, a, b, taus)
        R = (Q.reshape(-1, 2 * n) @ W).reshape(-1, 2, 2 * n)  # Q(tau)^T W, kept current
        G = np.einsum("tij,ujk->tuik", Q, P)  # Q(tau_t)^T P(tau_u)
        D = np.zeros((2 * nb + 1, 2, 2 * n))
        for j in range(nb):
            k = k0 + j
            i0, i1, i2 = 2 * j, 2 * j + 1, 2 * j + 2
            rows_b[k], rows_a[k] = R[i0]
            c1 = -g_nodes[k] * R[i0]
            c2 = -g_half[k] * (R[i1] + 0.5 * h * G[i1, i0] @ c1)
            c3 = -g_half[k] * (R[i1] + 0.5 * h * G[i1, i1] @ c2)
            c4 = -g_nodes[k + 1] * (R[i2] + h * G[i2, i1] @ c3)
            d0, d1, d2 = (h / 6.0) * c1, (h / 3.0) * (c2 + c3), (h / 6.0) * c4
            D[i0] += d0
            D[i1] += d1
            D[i2] += d2
            rest = G[i2:, i0:i2 + 1]  # (t, 3, 2, 2)
            lhs = rest.transpose(0, 2, 1, 3).reshape(-1, 6)
            R[i2:] += (lhs @ np.concatenate([d0, d1, d2])).reshape(-1, 2, 2 * n)
        W += P.transpose(1, 0, 2).reshape(2 * n, -1) @ D.reshape(-1, 2 * n)
        rows_b[k0 + nb], rows_a[k0 + nb] = R[2 * nb]

    cos, sin = np.cos(w * protocol.t_on), np.sin(w * protocol.t_on)
    U0 = np.block([
        [(O * cos) @ O.T, (O * (sin / w)) @ O.T],
        [-(O * (w * sin)) @ O.T, (O * cos) @ O.T],
    ])
    trace = OnPhaseTrace(times, f_nodes, bump_derivative(protocol, times), rows_a, rows_b)
    return Propagator(U0 @ W, (0.0, protocol.t_on)), trace


@dataclass(frozen=True)
class CycleDynamics:
    """Everything needed to advance an engine by whole cycles."""

    on: Propagator
    off: Propagator
    cycle: Propagator
    trace: OnPhaseTrace
    lam: float
    defect: float

    def work_integral(self, s: GaussianState) -> float:
        """``int <d_t H_tot> dt`` over one cycle starting from ``s`` (Simpson)."""
        tr = self.trace
        G = s.cov @ tr.rows_b.T
        corr = np.einsum("kj,jk->k", tr.rows_a, G)
        corr += (tr.rows_a @ s.mean) * (tr.rows_b @ s.mean)
        return float(simpson(self.lam * tr.fdot * corr, x=tr.times))


def prepare_cycle(
    model,
    n_steps_on: int = DEFAULT_STEPS_ON,
    tol: float = SYMPLECTIC_TOL,
    integrator: str = INTERACTION,
):
    """Build the one-period propagator of an engine model.

    The drive is periodic, so the result is reused for every cycle.
    ``integrator`` selects RK4 in the interaction picture of the undriven
    Hamiltonian (``"interaction"``, the default: the free motion is exact,
    so only the weak drive is integrated) or plain lab-frame RK4
    (``"lab"``, slower for large baths and slightly dissipative).

    Raises :class:`SymplecticityLostError` if the integrated propagator's
    symplectic defect exceeds ``tol``.
    """
    if integrator not in INTEGRATORS:
        raise ValueError(f"integrator must be one of {INTEGRATORS}, got {integrator!r}")
    p = model.protocol
    step = propagate_driven_lab if integrator == LAB else propagate_driven
    on, trace = step(model.V_base, model.drive_pair, p, n_steps_on)
    off = constant_propagator(model.H_base, p.t_off, t0=p.t_on)
    cycle = on.then(off)
    defect = symplecticity_defect(cycle)
    if not defect <= tol:
        raise SymplecticityLostError(
            f"cycle propagator symplectic defect {defect:.3e} > {tol:.1e} "
            f"with n_steps_on={n_steps_on}; increase n_steps_on"
        )
    return CycleDynamics(on, off, cycle, trace, p.lam, defect)


def cycle_propagator(model, n_steps_on: int = DEFAULT_STEPS_ON, integrator: str = INTERACTION) -> Propagator:
    return prepare_cycle(model, n_steps_on, integrator=integrator).cycle
