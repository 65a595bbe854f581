"""Exception and warning types raised across the package."""


class RSRError(Exception):
    """Base class for all package errors."""


class AllZero(RSRError, ValueError):
    pass


class DimensionMismatch(RSRError, ValueError):
    pass


class DimensionError(RSRError, ValueError):
    pass


class DivisibilityError(RSRError, ValueError):
    pass


class ZeroVector(RSRError, ValueError):
    pass


class TangencyViolation(RSRError, ValueError):
    pass


class ZeroColumn(RSRError, ValueError):
    """A column that must be spherized is exactly zero.

    ``index`` is the offending column; ``pair`` is set when the column came
    from symmetrizing two identical points.
    """

    def __init__(self, index, pair=None):
        self.index = int(index)
        self.pair = pair
        msg = f"column {self.index} is the zero vector"
        if pair is not None:
            msg += f" (difference of duplicate points {pair[0]} and {pair[1]})"
        super().__init__(msg)


class TooLarge(RSRError, ValueError):
    def __init__(self, n, limit):
        self.n = n
        self.limit = limit
        super().__init__(f"N={n} exceeds the enumeration guard of {limit}")


class RankDeficientData(RSRError, ValueError):
    pass


class OffSubspace(RSRError, ValueError):
    def __init__(self, index, angle):
        self.index = int(index)
        self.angle = float(angle)
        super().__init__(f"point {self.index} is at angle {self.angle:.3e} from the subspace")


class NonFiniteEnergy(RSRError, FloatingPointError):
    def __init__(self, trace):
        self.trace = trace
        super().__init__("energy became non-finite")


class DegenerateInliers(RSRError, ValueError):
    pass


class ConfigError(RSRError, ValueError):
    """Invalid experiment configuration; message carries section/field context."""


class EigenGapWarning(UserWarning):
    pass


class NonMonotoneWarning(UserWarning):
    pass
