"""Exception taxonomy shared across the toolkit.

Every failure mode the CLI can report maps onto one of these classes; the
process exit codes are fixed so that scripts driving the tool can dispatch
on them.
"""


class HcglError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 1


class DomainError(HcglError):
    """An input is outside the mathematical domain of the operation."""

    exit_code = 4


class CapacityError(HcglError):
    """An exact evaluator was asked for more than its configured cap allows."""

    exit_code = 3


class CompositionError(HcglError):
    """Two exact scalars with incompatible structure were combined."""

    exit_code = 4


class ZeroDenominatorError(DomainError):
    """A ratio's denominator vanished (path ratios: the activity is periodic)."""


class UndefinedRatioError(DomainError):
    """The occupation ratio R = Z_out/Z is undefined because Z = 0."""


class SearchExhaustedError(HcglError):
    """A bounded scan ended without a hit; carries parameters to resume it."""

    exit_code = 5

    def __init__(self, message, resume=None):
        super().__init__(message)
        self.resume = resume or {}


class CertificateError(HcglError):
    """Replaying a construction certificate hit a pole or missed its target."""

    exit_code = 4


class VerificationFailedError(HcglError):
    """An exact identity that must hold for a valid construction did not."""

    exit_code = 2


class InternalError(HcglError):
    """A guaranteed-to-terminate iteration hit its safety cap (a bug, not an input problem)."""

    exit_code = 1
