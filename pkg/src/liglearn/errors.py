"""Exception types shared across the package."""


class CapacityError(RuntimeError):
    """An exhaustive operation exceeded its configured size cap.

    Raised instead of silently sampling; callers above the cap must switch to
    Monte Carlo estimation or a smaller instance.
    """


class InvalidModelError(ValueError):
    """A (game, q) pair violates the mixture-model validity rules.

    An empty equilibrium set forces q=0, a full one forces q=1, and any
    non-trivial game needs 0 < q < 1 for the mixture to be a proper PMF.
    """


class NumericError(RuntimeError):
    """An optimizer produced a non-finite value; carries the iterate."""

    def __init__(self, message, W=None, b=None):
        super().__init__(message)
        self.W = W
        self.b = b
