"""Command-line front end.

Usage::

    gauss-engine run|sweep|validate|bound-surface --config <path> --out <path> [--workers N]

The configuration is a plain ``key = value`` file; ``#`` starts a comment
and missing keys fall back to the reference parameters (see ``CONFIG_KEYS``).
All output is CSV with a header row and 17 significant digits, so two runs
with the same configuration produce identical bytes.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .dynamics import INTEGRATORS, INTERACTION, bump_value, constant_propagator, evolve, prepare_cycle
from .engine import EngineConfig, build_engine, initial_state, ring_frequencies, ring_potential
from .errors import (
    GaussEngineError,
    InvariantViolationError,
    ParseError,
    SymplecticityLostError,
    UnknownKeyError,
)
from .gaussian import (
    QuadraticHamiltonian,
    ModeLayout,
    log_partition,
    symplectic_eigenvalues,
    thermal_state,
    von_neumann_entropy,
)
from .simulate import CycleRecord, run_engine
from .thermo import INTAKE_MODES, PER_SUBSYSTEM, bound_surface

log = logging.getLogger(__name__)

MODES = ("run", "sweep", "validate", "bound-surface")

#: config key -> EngineConfig field
ENGINE_KEYS = {
    "omega_c": "omega_c",
    "omega_h": "omega_h",
    "lambda": "lam",
    "lambda_c": "lambda_c",
    "lambda_h": "lambda_h",
    "T_c": "T_c",
    "T_h": "T_h",
    "n_bath": "n_bath",
    "n_cycles": "n_cycles",
    "n_steps_on": "n_steps_on",
    "delta_frac": "delta_frac",
}
RUN_KEYS = ("mode", "out", "workers", "sweep_T_h", "sweep_lambda_b", "bound_gamma", "bound_eta_th", "intake", "integrator")
CONFIG_KEYS = tuple(ENGINE_KEYS) + RUN_KEYS

TIMESERIES_COLUMNS = (
    "cycle", "t", "W_cycle", "W_cum", "Q_c", "Q_h", "dU_Sc", "dU_Sh", "dU_int_c", "dU_int_h",
    "S_Sc", "S_Sh", "S_Rc", "S_Rh", "I_SR", "C_S", "C_R", "D_Rc", "D_Rh", "D_Sc", "D_Sh",
    "Sigma", "sigma", "d_sigma", "Tmin_d_sigma", "eta", "gamma", "eta_th", "eta_C", "eta_O",
    "ratio", "regime", "secondlaw_residual", "firstlaw_residual", "entropy_drift",
)
SWEEP_COLUMNS = ("T_h", "lambda_b", "W_tot", "gamma", "eta_th", "eta", "ratio", "regime", "bound", "error")
BOUND_COLUMNS = ("gamma", "eta_th", "bound", "guaranteed_thermal")

VALIDATE_N_BATH = 60
# pass thresholds of the validation suite
ORACLE_TOL = 1e-10
FIRST_LAW_TOL = 1e-6
SECOND_LAW_TOL = 1e-6
CONSERVATION_TOL = 1e-7
EQ6_TOL = 1e-6
SIGMA_FLOOR = -1e-9
DRIFT_TOL = 1e-6
WORK_TOL = 1e-6
STATIONARY_TOL = 1e-8


def _default_T_h() -> tuple:
    return tuple(np.linspace(1.7, 8.0, 10))


def _default_lambda_b(lam: float = 0.08) -> tuple:
    return tuple(np.linspace(lam / 15.0, lam / 2.0, 10))


@dataclass(frozen=True)
class RunConfig:
    engine: EngineConfig = field(default_factory=EngineConfig)
    mode: str = "run"
    out: Optional[str] = None
    workers: int = 1
    sweep_T_h: tuple = field(default_factory=_default_T_h)
    sweep_lambda_b: tuple = field(default_factory=_default_lambda_b)
    bound_gamma: tuple = tuple(np.linspace(0.01, 1.0, 100))
    bound_eta_th: tuple = tuple(np.linspace(0.01, 1.0, 100))
    intake: str = PER_SUBSYSTEM
    integrator: str = INTERACTION

    def validate(self) -> "RunConfig":
        self.engine.validate()
        if self.mode not in MODES:
            raise InvariantViolationError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.workers < 1:
            raise InvariantViolationError(f"workers must be >= 1, got {self.workers}")
        if self.mode == "sweep" and not (self.sweep_T_h and self.sweep_lambda_b):
            raise InvariantViolationError("sweep ranges must be nonempty")
        if self.intake not in INTAKE_MODES:
            raise InvariantViolationError(f"intake must be one of {INTAKE_MODES}, got {self.intake!r}")
        if self.integrator not in INTEGRATORS:
            raise InvariantViolationError(f"integrator must be one of {INTEGRATORS}, got {self.integrator!r}")
        return self


def parse_values(text: str) -> tuple:
    """``"1, 2, 3"`` -> (1.0, 2.0, 3.0); ``"a:b:n"`` -> n evenly spaced points."""
    text = text.strip()
    if not text:
        return ()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"range must be start:stop:count, got {text!r}")
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        if count < 1:
            raise ValueError("range count must be >= 1")
        return tuple(float(v) for v in np.linspace(start, stop, count))
    return tuple(float(v) for v in text.split(","))


def _int_value(text: str) -> int:
    value = float(text)
    if not value.is_integer():
        raise ValueError(f"expected an integer, got {text!r}")
    return int(value)


def parse_config(text: str) -> RunConfig:
    """Parse ``key = value`` lines into a validated :class:`RunConfig`.

    Raises:
        UnknownKeyError: a key outside ``CONFIG_KEYS``.
        ParseError: a malformed line or value; the message carries the line number.
        InvariantViolationError: values that parse but describe an invalid engine.
    """
    engine_kw: dict = {}
    run_kw: dict = {}
    int_fields = {f.name for f in fields(EngineConfig) if f.type in (int, "int")}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise UnknownKeyError(f"line {lineno}: unknown key {key!r}")
        try:
            if key in ENGINE_KEYS:
                name = ENGINE_KEYS[key]
                engine_kw[name] = _int_value(value) if name in int_fields else float(value)
            elif key == "workers":
                run_kw[key] = _int_value(value)
            elif key in ("mode", "out", "intake", "integrator"):
                run_kw[key] = value
            else:
                run_kw[key] = parse_values(value)
        except ValueError as exc:
            raise ParseError(f"line {lineno}: bad value for {key!r}: {exc}") from None
    engine = EngineConfig(**engine_kw)
    if "sweep_lambda_b" not in run_kw:
        run_kw["sweep_lambda_b"] = _default_lambda_b(engine.lam)
    return RunConfig(engine=engine, **run_kw).validate()


def load_config(path: Optional[str]) -> RunConfig:
    if path is None:
        return parse_config("")
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


# --- CSV -------------------------------------------------------------------


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def write_csv(rows: Sequence[dict], columns: Sequence[str], out) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(row.get(c)) for c in columns])


def to_csv_text(rows: Sequence[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    write_csv(rows, columns, buf)
    return buf.getvalue()


# --- run ---------------------------------------------------------------------


def timeseries_row(rec: CycleRecord) -> dict:
    led, ent, eff = rec.ledger, rec.entropy, rec.efficiency
    return {
        "cycle": rec.cycle, "t": rec.t, "W_cycle": led.W_tot, "W_cum": rec.W_cum,
        "Q_c": led.Q["c"], "Q_h": led.Q["h"],
        "dU_Sc": led.dU_S["c"], "dU_Sh": led.dU_S["h"],
        "dU_int_c": led.dU_int["c"], "dU_int_h": led.dU_int["h"],
        "S_Sc": ent.S_i["c"], "S_Sh": ent.S_i["h"], "S_Rc": ent.S_j["c"], "S_Rh": ent.S_j["h"],
        "I_SR": ent.I_SR, "C_S": ent.C_S, "C_R": ent.C_R,
        "D_Rc": ent.D_j["c"], "D_Rh": ent.D_j["h"], "D_Sc": ent.D_i["c"], "D_Sh": ent.D_i["h"],
        "Sigma": ent.Sigma, "sigma": ent.sigma, "d_sigma": eff.d_sigma,
        "Tmin_d_sigma": eff.T_min * eff.d_sigma,
        "eta": eff.eta, "gamma": eff.gamma, "eta_th": eff.eta_th, "eta_C": eff.eta_C,
        "eta_O": eff.eta_O, "ratio": eff.ratio, "regime": eff.regime,
        "secondlaw_residual": rec.second_law_residual,
        "firstlaw_residual": rec.first_law_residual,
        "entropy_drift": rec.entropy_drift,
    }


def run_timeseries(cfg: RunConfig) -> list[dict]:
    """One row per cycle of the configured engine."""
    traj = run_engine(cfg.engine, intake=cfg.intake, integrator=cfg.integrator)
    for side, mismatch in traj.bath_diagnostic.items():
        log.info("bath %s: <H> - Gibbs energy at configured T = %.3e", side, mismatch)
    return [timeseries_row(rec) for rec in traj.records]


# --- sweep -------------------------------------------------------------------


def sweep_point(
    engine: EngineConfig, T_h: float, lambda_b: float, intake: str = PER_SUBSYSTEM, integrator: str = INTERACTION
) -> dict:
    """Cycle-1 quantities of one grid point; failures land in the ``error`` column."""
    row = {"T_h": T_h, "lambda_b": lambda_b}
    try:
        cfg = replace(engine, T_h=T_h, lambda_c=lambda_b, lambda_h=lambda_b, n_cycles=1)
        rec = run_engine(cfg, intake=intake, integrator=integrator).records[0]
    except GaussEngineError as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
        return row
    eff = rec.efficiency
    row.update(W_tot=eff.W_tot, gamma=eff.gamma, eta_th=eff.eta_th, eta=eff.eta,
               ratio=eff.ratio, regime=eff.regime)
    if eff.gamma > 0 and eff.eta_th:
        row["bound"] = 1.0 / (eff.gamma * eff.eta_th) - 1.0
    return row


def _sweep_task(args) -> dict:
    return sweep_point(*args)


def run_sweep(cfg: RunConfig) -> list[dict]:
    """Grid over ``T_h`` (outer) and ``lambda_c = lambda_h`` (inner), in grid order."""
    tasks = [(cfg.engine, float(T_h), float(lb), cfg.intake, cfg.integrator) for T_h in cfg.sweep_T_h for lb in cfg.sweep_lambda_b]
    if cfg.workers == 1 or len(tasks) == 1:
        return [_sweep_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
        # map keeps submission order whatever the completion order
        return list(pool.map(_sweep_task, tasks))


def athermal_fraction(rows: Sequence[dict]) -> Optional[float]:
    """Share of athermal points among the grid points that run as an engine."""
    regimes = [r.get("regime") for r in rows if r.get("regime") in ("thermal", "athermal")]
    if not regimes:
        return None
    return sum(r == "athermal" for r in regimes) / len(regimes)


# --- bound surface -----------------------------------------------------------


def run_bound_surface(cfg: RunConfig) -> list[dict]:
    bound, mask = bound_surface(cfg.bound_gamma, cfg.bound_eta_th)
    rows = []
    for i, g in enumerate(cfg.bound_gamma):
        for j, e in enumerate(cfg.bound_eta_th):
            rows.append({"gamma": g, "eta_th": e, "bound": bound[i, j], "guaranteed_thermal": bool(mask[i, j])})
    return rows


# --- validate ----------------------------------------------------------------


@dataclass
class Check:
    name: str
    passed: bool
    value: Optional[float] = None
    threshold: Optional[float] = None
    note: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        parts = [f"[{status}] {self.name}"]
        if self.value is not None:
            parts.append(f"value={self.value:.3e}")
        if self.threshold is not None:
            parts.append(f"threshold={self.threshold:.1e}")
        if self.note:
            parts.append(self.note)
        return "  ".join(parts)


def _below(name: str, value: float, tol: float) -> Check:
    return Check(name, bool(np.isfinite(value) and value <= tol), float(value), tol)


def _scalar_oracles() -> list[Check]:
    # single mode, omega = 1, T = 0.8, evaluated independently with plain math
    w, T = 1.0, 0.8
    nu_ref = 0.5 / math.tanh(w / (2 * T))
    S_ref = (nu_ref + 0.5) * math.log(nu_ref + 0.5) - (nu_ref - 0.5) * math.log(nu_ref - 0.5)
    lnZ_ref = -math.log(2 * math.sinh(w / (2 * T)))
    layout = ModeLayout(("x",))
    H = QuadraticHamiltonian(layout, np.array([[w**2]]))
    s = thermal_state(H, T)
    nu = symplectic_eigenvalues(s.cov)[0]
    return [
        _below("oracle: symplectic eigenvalue", abs(nu - nu_ref), ORACLE_TOL),
        _below("oracle: entropy", abs(von_neumann_entropy(s) - S_ref), ORACLE_TOL),
        _below("oracle: log partition", abs(log_partition(H, T) - lnZ_ref), ORACLE_TOL),
    ]


def _circulant_check(engine: EngineConfig) -> list[Check]:
    out = []
    for side, w, g in (("c", engine.omega_c, engine.lambda_c), ("h", engine.omega_h, engine.lambda_h)):
        V = ring_potential(w, g, engine.n_bath)
        numeric = np.sqrt(np.linalg.eigvalsh(V))
        err = float(np.max(np.abs(numeric - ring_frequencies(w, g, engine.n_bath))))
        out.append(_below(f"circulant spectrum ({side})", err, ORACLE_TOL))
    return out


def _periodicity_check(model) -> Check:
    p = model.protocol
    t = np.linspace(0.0, p.period, 257)
    shifted = np.abs(bump_value(p, t + 3 * p.period) - bump_value(p, t))
    edges = abs(float(bump_value(p, 0.0))) + abs(float(bump_value(p, p.t_on)))
    return _below("drive periodicity", float(shifted.max()) + edges, 1e-12)


def validation_checks(cfg: RunConfig) -> list[Check]:
    """Every check of the validation suite, at ``n_bath <= 60``."""
    engine = replace(cfg.engine, n_bath=min(cfg.engine.n_bath, VALIDATE_N_BATH))
    checks = _scalar_oracles() + _circulant_check(engine)
    model = build_engine(engine)
    checks.append(_periodicity_check(model))

    s0 = initial_state(model)
    drift = evolve(s0, constant_propagator(model.H_base, model.protocol.period))
    checks.append(_below("stationarity of the undriven state", float(np.max(np.abs(drift.cov - s0.cov))), STATIONARY_TOL))

    try:
        dyn = prepare_cycle(model, engine.n_steps_on, integrator=cfg.integrator)
    except SymplecticityLostError as exc:
        checks.append(Check("symplecticity", False, note=f"SymplecticityLost: {exc}"))
        return checks
    checks.append(_below("symplecticity", dyn.defect, 1e-8))

    traj = run_engine(engine, model=model, dynamics=dyn, intake=cfg.intake)
    recs = traj.records
    first = max(r.ledger.relative(r.ledger.first_law_residual) for r in recs)
    checks.append(_below("first law (relative)", first, FIRST_LAW_TOL))
    checks.append(_below("second law", max(r.second_law_residual for r in recs), SECOND_LAW_TOL))
    checks.append(_below("entropy conservation", max(r.conservation_residual for r in recs), CONSERVATION_TOL))
    eq6 = [r.efficiency.eq6_residual for r in recs if r.efficiency.eq6_residual is not None]
    checks.append(_below("regime identity", max(eq6, default=0.0), EQ6_TOL))
    sigma_min = min(min(r.entropy.Sigma for r in recs), traj.initial.Sigma)
    checks.append(Check("entropy production nonnegative", sigma_min >= SIGMA_FLOOR, sigma_min, SIGMA_FLOOR))
    checks.append(_below("total entropy drift", max(r.entropy_drift for r in recs), DRIFT_TOL))
    work = max(r.ledger.relative(abs(r.ledger.W_tot - r.work_integral)) for r in recs)
    checks.append(_below("work cross-check (relative)", work, WORK_TOL))
    return checks


def run_validate(cfg: RunConfig, echo: Callable[[str], None] = print) -> bool:
    checks = validation_checks(cfg)
    for c in checks:
        echo(c.line())
    ok = all(c.passed for c in checks)
    echo(f"{sum(c.passed for c in checks)}/{len(checks)} checks passed")
    return ok


# --- entry point -------------------------------------------------------------


def _open_out(path: Optional[str]):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gauss-engine", description=__doc__.splitlines()[0])
    ap.add_argument("mode", choices=MODES)
    ap.add_argument("--config", help="key = value configuration file (defaults if omitted)")
    ap.add_argument("--out", help="output CSV path ('-' or omitted: stdout)")
    ap.add_argument("--workers", type=int, help="parallel sweep points")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        overrides = {"mode": args.mode}
        if args.out is not None:
            overrides["out"] = args.out
        if args.workers is not None:
            overrides["workers"] = args.workers
        cfg = replace(cfg, **overrides).validate()

        if cfg.mode == "validate":
            lines: list[str] = []
            ok = run_validate(cfg, echo=lambda s: (print(s), lines.append(s)))
            if cfg.out not in (None, "-"):
                with open(cfg.out, "w", encoding="utf-8") as fh:
                    fh.write("\n".join(lines) + "\n")
            return 0 if ok else 1

        if cfg.mode == "run":
            rows, cols = run_timeseries(cfg), TIMESERIES_COLUMNS
        elif cfg.mode == "sweep":
            rows, cols = run_sweep(cfg), SWEEP_COLUMNS
            frac = athermal_fraction(rows)
            if frac is not None:
                log.info("athermal fraction among engine points: %.3f", frac)
        else:
            rows, cols = run_bound_surface(cfg), BOUND_COLUMNS
        out, close = _open_out(cfg.out)
        try:
            write_csv(rows, cols, out)
        finally:
            if close:
                out.close()
        return 0
    except (GaussEngineError, ValueError, OSError) as exc:
        print(f"gauss-engine: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
