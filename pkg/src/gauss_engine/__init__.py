"""Gaussian-state simulation of a two-oscillator quantum heat engine with finite baths.

The package is layered:

* :mod:`gauss_engine.gaussian` -- covariance-matrix states, symplectic spectra, entropies
* :mod:`gauss_engine.dynamics` -- exact and RK4 propagation of Gaussian moments
* :mod:`gauss_engine.engine` -- the engine Hamiltonian and its initial state
* :mod:`gauss_engine.thermo` -- first/second-law bookkeeping, efficiencies, regimes
* :mod:`gauss_engine.simulate` -- cycle-by-cycle runs
* :mod:`gauss_engine.cli` -- the ``gauss-engine`` command
"""

from .dynamics import (
    CycleDynamics,
    DriveProtocol,
    Propagator,
    bump_derivative,
    bump_value,
    constant_propagator,
    cycle_propagator,
    evolve,
    prepare_cycle,
    propagate_driven,
    propagate_driven_lab,
    symplecticity_defect,
)
from .engine import (
    EngineConfig,
    EngineModel,
    bath_temperature_diagnostic,
    build_engine,
    initial_state,
    ring_frequencies,
    switching_times,
)
from .errors import *  # noqa: F401,F403
from .gaussian import (
    GaussianState,
    ModeLayout,
    QuadraticHamiltonian,
    build_hamiltonian,
    direct_sum,
    log_partition,
    mean_energy,
    mutual_information,
    normal_modes,
    reduce,
    relative_entropy_thermal,
    symplectic_eigenvalues,
    symplectic_form,
    thermal_state,
    total_correlation,
    von_neumann_entropy,
)
from .simulate import CycleRecord, Trajectory, first_cycle, iter_cycles, recount, run_engine
from .thermo import (
    CycleLedger,
    EfficiencyReport,
    EntropyReport,
    bound_surface,
    classify,
    cycle_ledger,
    efficiency_bound,
    efficiency_report,
    entropy_report,
)

__version__ = "0.1.0"
