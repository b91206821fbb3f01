"""Exception types shared across the package."""


class CfError(Exception):
    """Base class for numerical failures in this package."""


class NotPositiveDefiniteError(CfError):
    """A moment / Hankel / Gram matrix is not positive definite."""


class IllConditionedError(CfError):
    """Matrix condition estimate exceeds the configured limit."""

    def __init__(self, condition, limit):
        self.condition = float(condition)
        self.limit = float(limit)
        super().__init__(
            f"condition estimate {self.condition:.3e} exceeds limit "
            f"{self.limit:.3e}; consider rescaling data to [-1, 1]^d "
            "(see cfdis.moments.affine_rescale) or lowering the degree"
        )


class NotInInteriorError(CfError):
    """The target polynomial is not in the interior of the SOS / weighted cone."""


class MaxIterationsError(CfError):
    """Newton solver exhausted its iteration budget without converging."""


class InvalidRegionError(CfError):
    """Curve-region specification has b(x) - a(x) <= 0 somewhere on X."""
