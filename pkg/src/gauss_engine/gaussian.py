"""Gaussian states of quadratic bosonic Hamiltonians.

Conventions: unit masses, hbar = k_B = 1, phase-space vector ordered as
``z = (x_1, ..., x_n, p_1, ..., p_n)`` and covariance
``cov_ab = <{dz_a, dz_b}>/2`` so that the vacuum has ``cov = I/2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np
from scipy.special import xlogy

from .errors import (
    BadPartitionError,
    EmptySubsetError,
    LayoutMismatchError,
    ModeIndexError,
    NegativeTemperatureError,
    NonSymmetricError,
    NotPositiveDefiniteError,
    UnphysicalStateError,
)

#: tolerance below 1/2 tolerated (and clamped) for symplectic eigenvalues
EPS_PHYS = 1e-8
SYMMETRY_TOL = 1e-12
PAIRING_TOL = 1e-8

ModeRef = Union[int, str]


def symplectic_form(n: int) -> np.ndarray:
    """Return the ``2n x 2n`` symplectic form ``[[0, I], [-I, 0]]``."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


@dataclass(frozen=True)
class ModeLayout:
    """Ordered, uniquely labelled set of bosonic modes."""

    labels: tuple[str, ...]

    def __post_init__(self):
        labels = tuple(str(lbl) for lbl in self.labels)
        if len(labels) == 0:
            raise EmptySubsetError("a layout needs at least one mode")
        if len(set(labels)) != len(labels):
            raise ValueError("mode labels must be unique")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "_index", {lbl: k for k, lbl in enumerate(labels)})

    @classmethod
    def numbered(cls, n: int, prefix: str = "m") -> "ModeLayout":
        return cls(tuple(f"{prefix}{k}" for k in range(n)))

    @property
    def n_modes(self) -> int:
        return len(self.labels)

    def __len__(self) -> int:
        return len(self.labels)

    def omega(self) -> np.ndarray:
        return symplectic_form(self.n_modes)

    def index(self, mode: ModeRef) -> int:
        if isinstance(mode, (int, np.integer)):
            if not 0 <= mode < self.n_modes:
                raise ModeIndexError(f"mode index {mode} outside 0..{self.n_modes - 1}")
            return int(mode)
        try:
            return self._index[mode]
        except KeyError:
            raise ModeIndexError(f"unknown mode label {mode!r}") from None

    def indices(self, modes: Iterable[ModeRef]) -> list[int]:
        return [self.index(m) for m in modes]

    def subset(self, modes: Iterable[ModeRef]) -> "ModeLayout":
        return ModeLayout(tuple(self.labels[k] for k in self.indices(modes)))


def _phase_space_indices(idx: Sequence[int], n: int) -> np.ndarray:
    idx = np.asarray(idx, dtype=int)
    return np.concatenate([idx, idx + n])


@dataclass(frozen=True)
class QuadraticHamiltonian:
    """``H = (p.p)/2 + (x.V.x)/2`` over the modes of ``layout``.

    With ``kinetic=False`` the form is a pure position coupling ``x.V.x/2``;
    this is how interaction terms such as ``lam * x_c * q_1`` are stored
    (``V`` then holds ``lam`` on both off-diagonal entries).
    """

    layout: ModeLayout
    V: np.ndarray
    kinetic: bool = True

    @property
    def n_modes(self) -> int:
        return self.layout.n_modes

    def phase_space_matrix(self) -> np.ndarray:
        """``M`` with ``H = z.M.z / 2``."""
        n = self.n_modes
        M = np.zeros((2 * n, 2 * n))
        M[:n, :n] = self.V
        if self.kinetic:
            M[n:, n:] = np.eye(n)
        return M

    def require_positive_definite(self) -> None:
        if not self.kinetic:
            raise NotPositiveDefiniteError("interaction form has no kinetic term")
        try:
            np.linalg.cholesky(self.V)
        except np.linalg.LinAlgError:
            raise NotPositiveDefiniteError("potential matrix is not positive definite") from None


def build_hamiltonian(layout: ModeLayout, V, kinetic: bool = True) -> QuadraticHamiltonian:
    """Validate ``V`` and wrap it into a :class:`QuadraticHamiltonian`.

    Small asymmetries (relative defect below 1e-12) are symmetrized away;
    anything larger raises :class:`NonSymmetricError`.
    """
    V = np.array(V, dtype=float)
    n = layout.n_modes
    if V.shape != (n, n):
        raise LayoutMismatchError(f"V has shape {V.shape}, layout has {n} modes")
    scale = max(np.abs(V).max(), 1.0)
    defect = np.abs(V - V.T).max() / scale
    if defect > SYMMETRY_TOL:
        raise NonSymmetricError(f"potential asymmetric by {defect:.3e} (relative)")
    V = 0.5 * (V + V.T)
    V.setflags(write=False)
    return QuadraticHamiltonian(layout, V, kinetic)


@dataclass(frozen=True)
class NormalModes:
    """Spectral form ``V = O diag(freqs**2) O^T`` with ascending ``freqs``."""

    O: np.ndarray
    freqs: np.ndarray


def normal_modes(H: QuadraticHamiltonian) -> NormalModes:
    if not H.kinetic:
        raise NotPositiveDefiniteError("interaction form has no normal modes")
    w2, O = np.linalg.eigh(H.V)
    if w2[0] <= 0:
        raise NotPositiveDefiniteError(f"smallest eigenvalue of V is {w2[0]:.3e}")
    return NormalModes(O, np.sqrt(w2))


def _coth_half(freqs: np.ndarray, T: float) -> np.ndarray:
    """``coth(freqs / 2T)`` with the T = 0 limit taken exactly."""
    if T < 0:
        raise NegativeTemperatureError(f"temperature {T} < 0")
    if T == 0:
        return np.ones_like(freqs)
    return 1.0 / np.tanh(freqs / (2.0 * T))


@dataclass(frozen=True)
class GaussianState:
    """First and second moments of a Gaussian state over ``layout``."""

    layout: ModeLayout
    mean: np.ndarray
    cov: np.ndarray = field(repr=False)

    def __post_init__(self):
        n = self.layout.n_modes
        mean = np.asarray(self.mean, dtype=float)
        cov = np.asarray(self.cov, dtype=float)
        if mean.shape != (2 * n,) or cov.shape != (2 * n, 2 * n):
            raise LayoutMismatchError(
                f"moments of shape {mean.shape}, {cov.shape} do not fit {n} modes"
            )
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def n_modes(self) -> int:
        return self.layout.n_modes

    @classmethod
    def vacuum(cls, layout: ModeLayout) -> "GaussianState":
        n = layout.n_modes
        return cls(layout, np.zeros(2 * n), 0.5 * np.eye(2 * n))

    def check_physical(self) -> np.ndarray:
        """Raise :class:`UnphysicalStateError` unless ``cov + i/2 Omega >= 0``."""
        return symplectic_eigenvalues(self.cov)


def thermal_state(H: QuadraticHamiltonian, T: float) -> GaussianState:
    """Gibbs state ``exp(-H/T)/Z`` (ground state for ``T = 0``)."""
    if T < 0:
        raise NegativeTemperatureError(f"temperature {T} < 0")
    nm = normal_modes(H)
    c = _coth_half(nm.freqs, T)
    n = H.n_modes
    cov = np.zeros((2 * n, 2 * n))
    cov[:n, :n] = (nm.O * (c / (2.0 * nm.freqs))) @ nm.O.T
    cov[n:, n:] = (nm.O * (nm.freqs * c / 2.0)) @ nm.O.T
    return GaussianState(H.layout, np.zeros(2 * n), cov)


def log_partition_from_freqs(freqs, T: float) -> float:
    """``ln Z = -sum_k ln(2 sinh(w_k / 2T))`` evaluated without overflow."""
    if T <= 0:
        raise NegativeTemperatureError(f"log partition needs T > 0, got {T}")
    x = np.asarray(freqs, dtype=float) / (2.0 * T)
    # ln(2 sinh x) = x + ln(1 - exp(-2x))
    return float(-np.sum(x + np.log1p(-np.exp(-2.0 * x))))


def log_partition(H: QuadraticHamiltonian, T: float) -> float:
    return log_partition_from_freqs(normal_modes(H).freqs, T)


def mean_energy(s: GaussianState, H: QuadraticHamiltonian) -> float:
    """``<H> = tr(M cov)/2 + r.M.r/2`` on the modes of ``H``."""
    try:
        idx = s.layout.indices(H.layout.labels)
    except ModeIndexError as exc:
        raise LayoutMismatchError(str(exc)) from None
    n = s.n_modes
    ix = np.asarray(idx)
    ip = ix + n
    X = s.cov[np.ix_(ix, ix)]
    rx = s.mean[ix]
    energy = np.sum(H.V * X) + rx @ H.V @ rx
    if H.kinetic:
        rp = s.mean[ip]
        energy += np.trace(s.cov[np.ix_(ip, ip)]) + rp @ rp
    return 0.5 * float(energy)


def reduce(s: GaussianState, modes: Sequence[ModeRef]) -> GaussianState:
    """Partial trace keeping ``modes`` (in the order given)."""
    modes = list(modes)
    if not modes:
        raise EmptySubsetError("cannot reduce onto an empty set of modes")
    idx = s.layout.indices(modes)
    if len(set(idx)) != len(idx):
        raise ValueError("duplicate modes in reduction")
    ps = _phase_space_indices(idx, s.n_modes)
    return GaussianState(
        ModeLayout(tuple(s.layout.labels[k] for k in idx)),
        s.mean[ps],
        s.cov[np.ix_(ps, ps)],
    )


def direct_sum(*states: GaussianState) -> GaussianState:
    """Product state of independent Gaussian states, layouts concatenated."""
    labels = sum((st.layout.labels for st in states), ())
    layout = ModeLayout(labels)
    n = layout.n_modes
    mean = np.zeros(2 * n)
    cov = np.zeros((2 * n, 2 * n))
    off = 0
    for st in states:
        k = st.n_modes
        src = np.arange(2 * k)
        dst = np.concatenate([np.arange(off, off + k), np.arange(n + off, n + off + k)])
        mean[dst] = st.mean[src]
        cov[np.ix_(dst, dst)] = st.cov
        off += k
    return GaussianState(layout, mean, cov)


def _pair_up(values: np.ndarray) -> np.ndarray:
    """Collapse a sorted list of doubly degenerate values to one per pair."""
    a, b = values[0::2], values[1::2]
    scale = np.maximum(np.abs(a), 1.0)
    mismatch = np.max(np.abs(a - b) / scale) if a.size else 0.0
    if mismatch > PAIRING_TOL:
        raise UnphysicalStateError(f"symplectic spectrum pairing off by {mismatch:.3e}")
    return 0.5 * (a + b)


def symplectic_eigenvalues(cov, method: str = "cholesky") -> np.ndarray:
    """Symplectic eigenvalues ``nu_k`` of ``cov``, descending.

    ``method="cholesky"`` factors ``cov = L L^T`` and takes the singular
    values of the antisymmetric ``L^T Omega L``; ``method="eig"`` reads the
    imaginary parts of the eigenvalues of ``Omega cov``. Values within
    ``EPS_PHYS`` below 1/2 are clamped to 1/2.
    """
    cov = np.asarray(cov, dtype=float)
    dim = cov.shape[0]
    if cov.shape != (dim, dim) or dim % 2:
        raise LayoutMismatchError(f"covariance shape {cov.shape} is not 2n x 2n")
    n = dim // 2
    if method == "cholesky":
        try:
            L = np.linalg.cholesky(0.5 * (cov + cov.T))
        except np.linalg.LinAlgError:
            raise UnphysicalStateError("covariance matrix is not positive definite") from None
        omega_L = np.concatenate([L[n:], -L[:n]])
        M = L.T @ omega_L
        sq = np.linalg.eigvalsh(M.T @ M)
        nu = np.sqrt(np.clip(_pair_up(sq), 0.0, None))
    elif method == "eig":
        ev = np.linalg.eigvals(symplectic_form(n) @ cov)
        nu = _pair_up(np.sort(np.abs(ev.imag)))
    else:
        raise ValueError(f"unknown method {method!r}")
    nu = np.sort(nu)[::-1]
    if nu[-1] < 0.5 - EPS_PHYS:
        raise UnphysicalStateError(f"symplectic eigenvalue {nu[-1]:.12g} < 1/2")
    return np.maximum(nu, 0.5)


def entropy_from_symplectic(nu) -> float:
    nu = np.asarray(nu, dtype=float)
    return float(np.sum(xlogy(nu + 0.5, nu + 0.5) - xlogy(nu - 0.5, nu - 0.5)))


def von_neumann_entropy(s: GaussianState | np.ndarray, method: str = "cholesky") -> float:
    cov = s.cov if isinstance(s, GaussianState) else s
    return entropy_from_symplectic(symplectic_eigenvalues(cov, method=method))


def relative_entropy_from_parts(
    entropy: float, energy: float, log_z: float, T_ref: float
) -> float:
    """``D(rho || exp(-H/T)/Z) = -S(rho) + <H>/T + ln Z``."""
    return -entropy + energy / T_ref + log_z


def relative_entropy_thermal(
    s: GaussianState, H_ref: QuadraticHamiltonian, T_ref: float
) -> float:
    if T_ref <= 0:
        raise NegativeTemperatureError(f"reference temperature must be > 0, got {T_ref}")
    if tuple(H_ref.layout.labels) != tuple(s.layout.labels):
        raise LayoutMismatchError("reference Hamiltonian must act on exactly the modes of s")
    return relative_entropy_from_parts(
        von_neumann_entropy(s), mean_energy(s, H_ref), log_partition(H_ref, T_ref), T_ref
    )


def _check_partition(s: GaussianState, parts: Sequence[Sequence[ModeRef]]) -> list[list[int]]:
    idx_parts = []
    for part in parts:
        part = list(part)
        if not part:
            raise BadPartitionError("empty part")
        try:
            idx_parts.append(s.layout.indices(part))
        except ModeIndexError as exc:
            raise BadPartitionError(str(exc)) from None
    flat = sorted(k for part in idx_parts for k in part)
    if flat != list(range(s.n_modes)):
        raise BadPartitionError("parts must be disjoint and cover every mode")
    return idx_parts


def total_correlation(s: GaussianState, parts: Sequence[Sequence[ModeRef]]) -> float:
    """``C = sum_k S(rho_k) - S(rho)`` for a partition of all modes."""
    idx_parts = _check_partition(s, parts)
    marginals = sum(von_neumann_entropy(reduce(s, p)) for p in idx_parts)
    return marginals - von_neumann_entropy(s)


def mutual_information(s: GaussianState, part_a, part_b) -> float:
    """``I(A:B)`` of two disjoint mode sets; modes outside both are traced out."""
    part_a, part_b = list(part_a), list(part_b)
    if not part_a or not part_b:
        raise BadPartitionError("empty part")
    try:
        sub = reduce(s, part_a + part_b)
    except ModeIndexError as exc:
        raise BadPartitionError(str(exc)) from None
    except ValueError:
        raise BadPartitionError("parts must be disjoint") from None
    k = len(part_a)
    return total_correlation(sub, [range(k), range(k, sub.n_modes)])
