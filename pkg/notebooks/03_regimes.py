"""Thermal versus athermal operation.

An engine cycle can turn heat into work, or it can spend correlations and
non-equilibrium displacement (the entropic resource sigma) instead.  The
ratio eta / (gamma * eta_th) separates the two: at or below 2 the work is
accounted for by heat conversion, above 2 the entropic resource dominates.

With weak bath coupling and a small temperature gap, the working
oscillators start far from the states they are driven to and the first
cycles draw heavily on sigma.  This script compares two such corners and
shows how the efficiency depends on whether the intake counts each
oscillator's energy change separately or their sum.

Run with ``python notebooks/03_regimes.py``.
"""

import numpy as np

from gauss_engine import EngineConfig, run_engine
from gauss_engine.simulate import recount
from gauss_engine.thermo import JOINT, bound_surface

corners = {
    "strong coupling, T_h = 8  ": EngineConfig(T_h=8.0, lambda_c=0.04, lambda_h=0.04, n_bath=60, n_cycles=40),
    "weak coupling,   T_h = 1.7": EngineConfig(T_h=1.7, lambda_c=0.08 / 15, lambda_h=0.08 / 15, n_bath=60, n_cycles=40),
}

for name, cfg in corners.items():
    traj = run_engine(cfg)
    print(f"\n{name}: eta_C = {traj.records[0].efficiency.eta_C:.4f}")
    print(f"{'n':>3} {'Tmin*dsigma':>12} {'eta':>7} {'eta(joint)':>10} {'ratio':>9}  regime")
    for rec in traj.records[:5] + traj.records[9::10]:
        eff = rec.efficiency
        joint = recount(rec, traj.model, JOINT)
        print(f"{rec.cycle:3d} {eff.T_min * eff.d_sigma:12.4e} {eff.eta:7.4f} {joint.eta:10.4f} "
              f"{eff.ratio:9.3f}  {eff.regime}")

# A device-independent statement: whenever gamma * eta_th > 1/2 the ratio
# cannot exceed 2, so the cycle is guaranteed to be thermal.
g = np.linspace(0.1, 1.0, 10)
bound, mask = bound_surface(g, g)
print("\nguaranteed-thermal region (rows gamma, columns eta_th, 0.1 ... 1.0):")
for gi, row in zip(g, mask):
    print(f"{gi:4.1f} " + "".join("#" if m else "." for m in row))
