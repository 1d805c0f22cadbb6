"""Exception hierarchy shared by the solver modules and the CLI."""


class BlochError(Exception):
    """Base class for all errors raised by this package."""


class ZeroVector(BlochError, ValueError):
    """A shifted wave vector gamma = beta + I vanished where a direction is needed."""


class GridTooCoarse(BlochError, ValueError):
    pass


class MissingCoefficient(BlochError, KeyError):
    pass


class NotFrequencyIndependent(BlochError, ValueError):
    pass


class EigenFailure(BlochError, RuntimeError):
    pass


class SingularA(EigenFailure):
    pass


class SingularFactor(EigenFailure):
    pass


class ArnoldiNoConvergence(EigenFailure):
    """Raised when restarted Arnoldi exhausts its restarts.

    The partial result (with per-value convergence flags) is attached as
    ``result`` so callers can still inspect what did converge.
    """

    def __init__(self, k_converged: int, result=None):
        super().__init__(f"Arnoldi converged only {k_converged} Ritz values")
        self.k_converged = k_converged
        self.result = result


class NotAVector(BlochError, ValueError):
    pass


class OutOfRange(BlochError, ValueError):
    pass


class NoAdmissibleTau(BlochError, ValueError):
    def __init__(self, omega: float):
        super().__init__(f"no regularization shift tau gives a positive coercivity margin at omega={omega!r}")
        self.omega = omega


class NotAdmissible(BlochError, ValueError):
    """Raised by strict solves when the coercivity margin is not positive."""


class DimensionTooLarge(BlochError, ValueError):
    pass


class ConfigError(BlochError, ValueError):
    pass
