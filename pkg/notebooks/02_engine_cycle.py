"""Running the two-oscillator engine.

Two oscillators (omega_c = 1, omega_h = 2), each attached to its own ring
of bath oscillators, are coupled for a short while once per period.  The
cold and hot sides start in their own thermal equilibrium, including the
oscillator-bath correlations, and then the whole closed system evolves
unitarily.  Heat, work and entropy production are read off the covariance
matrix after every period.

This script uses 60 bath sites per side so it finishes in seconds; the
qualitative picture is the same as with 300.

Run with ``python notebooks/02_engine_cycle.py``.
"""

from gauss_engine import EngineConfig, run_engine

cfg = EngineConfig(T_h=8.0, lambda_c=0.04, lambda_h=0.04, n_bath=60, n_cycles=30)
traj = run_engine(cfg)

p = traj.model.protocol
print(f"coupling on for {p.t_on:.4f}, off for {p.t_off:.4f}; period {p.period:.4f}")
print(f"bath energy mismatch at t=0 (second order in the coupling): {traj.bath_diagnostic}")

# Heat flows out of the hot side and into the cold side, and the cycle
# delivers work (W < 0 is work out).  After a few periods the efficiency
# settles at the Otto value 1 - omega_c/omega_h = 0.5.
print(f"\n{'n':>3} {'W':>11} {'Q_h':>11} {'Q_c':>11} {'eta':>7} {'gamma':>7} {'ratio':>7}  regime")
for rec in traj.records:
    led, eff = rec.ledger, rec.efficiency
    print(f"{rec.cycle:3d} {led.W_tot:11.4e} {led.Q['h']:11.4e} {led.Q['c']:11.4e} "
          f"{eff.eta:7.4f} {eff.gamma:7.4f} {eff.ratio:7.3f}  {eff.regime}")

# Bookkeeping checks that hold on every cycle: energy balance, the
# entropy-production identity and conservation of the global entropy.
worst = max(r.ledger.relative(r.first_law_residual) for r in traj.records)
print(f"\nworst relative first-law residual: {worst:.2e}")
print(f"worst second-law residual        : {max(r.second_law_residual for r in traj.records):.2e}")
print(f"global entropy drift             : {max(r.entropy_drift for r in traj.records):.2e}")
