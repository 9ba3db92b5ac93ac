"""
Exception hierarchy for the character-sum laboratory.

Every error raised on purpose by the package derives from LabError, so the CLI
can separate user mistakes (exit 2) from crashes.
"""


class LabError(Exception):
    """Base class for all laboratory errors."""


# finite_field
class NotPrime(LabError, ValueError):
    pass


class FieldTooSmall(LabError, ValueError):
    pass


class FieldTooLarge(LabError, ValueError):
    pass


class SearchExhausted(LabError, RuntimeError):
    pass


class FieldDivisionByZero(LabError, ZeroDivisionError):
    pass


# characters
class EvalAtZero(LabError, ValueError):
    pass


class SizeOutOfRange(LabError, ValueError):
    pass


# dft_engine
class LengthMismatch(LabError, ValueError):
    pass


class PrecisionCapExceeded(LabError):
    pass


# exp_sums
class ProductTrivial(LabError, ValueError):
    pass


class TrivialCharacter(LabError, ValueError):
    pass


class ZeroArgument(LabError, ValueError):
    pass


class TrivialTwist(LabError, ValueError):
    pass


# discrepancy
class NotOnCircle(LabError, ValueError):
    pass


class TupleBudgetExceeded(LabError):
    pass


# moments_bounds
class DomainError(LabError, ValueError):
    pass


# invariant_dims
class Unclassified(LabError, ValueError):
    pass


class CongruenceViolated(LabError, ValueError):
    pass


# config / cli
class ConfigInvalid(LabError, ValueError):
    pass
