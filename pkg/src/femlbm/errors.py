"""Exception types shared across the package."""


class FemlbmError(Exception):
    """Base class for solver errors."""


class StabilityError(FemlbmError):
    """A stability guard was violated (low-Mach limit, tau < 1/2, ...)."""


class NegativityError(FemlbmError):
    """A population dropped below the negativity tolerance."""


class InfeasibleFluxError(FemlbmError):
    """Prescribed boundary flux cannot be carried by non-negative populations."""


class SolverFailure(FemlbmError):
    """Linear solver breakdown or non-convergence."""


class OutOfDomainError(FemlbmError):
    """A probe point lies outside the mesh."""

    def __init__(self, message, nearest_element=None):
        super().__init__(message)
        self.nearest_element = nearest_element


class GeometryError(FemlbmError):
    """Interface node could not be located during transfer-map construction."""


class ConfigError(FemlbmError):
    """Scenario configuration failed validation; carries all messages."""

    def __init__(self, messages):
        if isinstance(messages, str):
            messages = [messages]
        self.messages = list(messages)
        super().__init__("; ".join(self.messages))
