"""Exception types raised by the package."""


class BqoError(Exception):
    """Base class for all errors raised by bqobt."""


class ShapeMismatch(BqoError, ValueError):
    pass


class NonFinite(BqoError, ValueError):
    pass


class NotStable(BqoError):
    """The state matrix has an eigenvalue with nonnegative real part."""


class SingularDecomposition(BqoError):
    """Back-substitution hit a (numerically) zero pivot, i.e. lambda_i + lambda_j ~ 0."""


class NoConvergence(BqoError):
    """Fixed-point iteration stopped at the iteration cap.

    The last iterate is available as ``solution``.
    """

    def __init__(self, msg, solution=None):
        super().__init__(msg)
        self.solution = solution


class DimTooLarge(BqoError, ValueError):
    pass


class SingularOperator(BqoError):
    pass


class NotPsd(BqoError):
    pass


class VerificationFailed(BqoError):
    pass


class BadGamma(BqoError, ValueError):
    pass


class BadSpec(BqoError, ValueError):
    pass


class RankDeficient(BqoError):
    def __init__(self, msg, achievable_r):
        super().__init__(msg)
        self.achievable_r = achievable_r


class NonFiniteState(BqoError):
    pass


class GridMismatch(BqoError, ValueError):
    pass
