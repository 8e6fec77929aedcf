"""Exception types shared across the library."""


class QbsimError(Exception):
    """Base class for all qbsim errors."""


class ParseError(QbsimError):
    """A document or CLI argument could not be parsed at all."""


class ValidationError(QbsimError):
    """A model, document, or parameter record violates its contract.

    ``violations`` holds one human-readable message per broken rule.
    """

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class NumericalError(QbsimError):
    """A numerical routine failed (non-convergence, singularity, overflow)."""


class GapClosedError(NumericalError):
    """A point-gap quantity was requested at a reference energy on the spectrum."""


class NonDiagonalizableError(NumericalError):
    """Eigenvector basis too ill-conditioned to trust (at or near an EP)."""

    def __init__(self, message, cluster_report=None):
        super().__init__(message)
        self.cluster_report = cluster_report
