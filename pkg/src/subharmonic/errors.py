"""Exception hierarchy shared by all solver routes."""


class SteadyStateError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(SteadyStateError, ValueError):
    """Malformed or incomplete parameter configuration."""


# parameter chain
class DegenerateElimination(SteadyStateError):
    """The strongly damped mode has zero complex loss, so it cannot be eliminated."""


class ZeroDrive(SteadyStateError):
    """Effective two-photon drive vanishes; the scaled variables are singular."""


class ZeroNonlinearity(SteadyStateError):
    """Effective complex nonlinearity g vanishes."""


class NonPhysicalParameters(SteadyStateError):
    """Parameters imply negative loss rates."""


# special functions / series
class PoleProximity(SteadyStateError):
    def __init__(self, j, distance):
        self.j = j
        self.distance = distance
        super().__init__(f"Pochhammer denominator (c)_{j + 1} nearly vanishes: |c + {j}| = {distance:.3e}")


class SeriesDivergence(SteadyStateError):
    """Moment series did not meet its truncation tolerance before the index cap."""


class DivisionByZero(SteadyStateError, ArithmeticError):
    """Second-order coherence requested for a vanishing photon number."""


class SingularGridPoint(SteadyStateError):
    def __init__(self, axis, value):
        self.axis = axis
        self.value = value
        super().__init__(f"grid node {axis}={value!r} lies on a branch point of the distribution")


# Fock-basis solver
class CutoffTooSmall(SteadyStateError):
    pass


class DegenerateNullSpace(SteadyStateError):
    def __init__(self, dimension, message=None):
        self.dimension = dimension
        super().__init__(message or f"null space of the transition matrix has dimension {dimension}")


class NonConvergence(SteadyStateError):
    pass


class CutoffExplosion(SteadyStateError):
    pass


class NonPhysicalCoefficients(SteadyStateError):
    """Undamped-state coefficients do not describe a density matrix."""
