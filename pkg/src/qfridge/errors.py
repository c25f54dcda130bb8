"""Exception hierarchy shared by all modules."""


class QFridgeError(Exception):
    """Base class for every error raised by the package."""


class DomainError(QFridgeError, ValueError):
    """An argument lies outside the domain of a formula."""


class PreconditionError(QFridgeError, ValueError):
    """A documented precondition of an operation does not hold."""


class NumericalError(QFridgeError, ArithmeticError):
    """A numerical procedure (quadrature, root finding) failed to converge."""


class DegeneracyError(NumericalError):
    """The generator has more than one stationary state."""


class IntegrationError(NumericalError):
    """Time integration produced an unphysical state."""


class ModelViolation(QFridgeError):
    """A modelling assumption (e.g. diagonal reduced states) was violated."""


class ConfigError(QFridgeError, ValueError):
    """Malformed or inconsistent configuration text."""
