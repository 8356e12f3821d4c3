"""Exception types shared across the package."""


class DegenerateInputError(ValueError):
    """Input violates a general-position assumption (cocircular, flat, rank deficient)."""


class CoverageError(RuntimeError):
    """A probe left the region covered by the site set."""


class ConsistencyError(RuntimeError):
    """Two computations that must agree did not; indicates a bug, not bad input."""


class UnboundedCellError(ValueError):
    """A volume or measure was requested for an unbounded cell."""
