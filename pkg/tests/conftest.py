import numpy as np
import pytest

from gauss_engine import EngineConfig, run_engine

#: desk-scale bath size used by most integration tests
DESK_N = 60
ATHERMAL_LAMBDA = 0.08 / 15

# lines reported by the acceptance suite, echoed once at the end of the run
ACCEPTANCE_LINES: list[str] = []


def thermal_corner(**kw) -> EngineConfig:
    return EngineConfig(T_h=8.0, lambda_c=0.04, lambda_h=0.04, **kw)


def athermal_corner(**kw) -> EngineConfig:
    return EngineConfig(T_h=1.7, lambda_c=ATHERMAL_LAMBDA, lambda_h=ATHERMAL_LAMBDA, **kw)


@pytest.fixture(scope="session")
def desk_thermal():
    return run_engine(thermal_corner(n_bath=DESK_N, n_cycles=50))


@pytest.fixture(scope="session")
def desk_athermal():
    return run_engine(athermal_corner(n_bath=DESK_N, n_cycles=50))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
