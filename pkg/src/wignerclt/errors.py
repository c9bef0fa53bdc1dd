class NumericalFailure(RuntimeError):
    """An eigensolver or reduction failed to converge or produced non-finite values."""


class InsufficientDataError(ValueError):
    """Too few replicates or samples for the requested statistic."""


class CapacityError(OverflowError):
    """A bounded sample buffer overflowed."""
