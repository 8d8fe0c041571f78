"""Exception types shared across the package."""


class ErgohtError(Exception):
    """Base class for all package-specific errors."""


class DigitExhaustionError(ErgohtError):
    """A computation needs more continued-fraction digits than are known.

    ``needed`` is the digit index that was requested, ``available`` the
    number of digits currently known.
    """

    def __init__(self, needed: int, available: int, detail: str = ""):
        self.needed = needed
        self.available = available
        msg = f"need {needed} CF digits, only {available} available"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class MeasureError(ErgohtError):
    """An interval union fails the exact measure-1/2 requirement."""


class WeightMismatchError(ErgohtError):
    """A trace was built with weights incompatible with the requested identity."""


class CountShortfallError(ErgohtError):
    """A decomposition window holds fewer remaining signs than guaranteed.

    Genuine rotation signs can never trigger this; it signals a sign
    evaluation bug or invalid synthetic input.
    """


class DecompositionError(ErgohtError):
    """Decomposition preconditions violated (e.g. q_1 <= 4B without a shift)."""


class InfeasibleSizeError(ErgohtError):
    """A requested enumeration is too large to materialize.

    Carries ``size`` (the offending magnitude, possibly a bound on it) so
    callers can switch to a relaxed/symbolic mode.
    """

    def __init__(self, size, detail: str = ""):
        self.size = size
        msg = f"infeasible enumeration size {size}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class InvariantViolationError(ErgohtError):
    """A proven invariant failed at runtime; indicates a bug, not bad input."""


class ConfigError(ErgohtError):
    """Malformed CLI or run configuration."""
