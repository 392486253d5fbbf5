"""Exception types raised across the package."""


class GaussEngineError(Exception):
    """Base class for all package errors."""


class NonSymmetricError(GaussEngineError, ValueError):
    pass


class NotPositiveDefiniteError(GaussEngineError, ValueError):
    pass


class NegativeTemperatureError(GaussEngineError, ValueError):
    pass


class LayoutMismatchError(GaussEngineError, ValueError):
    pass


class UnphysicalStateError(GaussEngineError, ValueError):
    pass


class EmptySubsetError(GaussEngineError, ValueError):
    pass


class ModeIndexError(GaussEngineError, IndexError):
    pass


class BadPartitionError(GaussEngineError, ValueError):
    pass


class SymplecticityLostError(GaussEngineError, RuntimeError):
    """The integrated propagator drifted off the symplectic group.

    Raise ``n_steps_on`` and retry.
    """


class NoHeatInputError(GaussEngineError, ValueError):
    pass


class ConfigError(GaussEngineError, ValueError):
    pass


class UnknownKeyError(ConfigError):
    pass


class ParseError(ConfigError):
    pass


class InvariantViolationError(ConfigError):
    pass
