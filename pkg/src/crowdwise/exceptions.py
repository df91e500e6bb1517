"""Exception types raised across crowdwise."""


class CrowdwiseError(Exception):
    """Base class for library errors."""


class NotStochasticError(CrowdwiseError, ValueError):
    """Matrix is not a valid row-stochastic matrix."""


class ZeroOutDegreeError(CrowdwiseError, ValueError):
    def __init__(self, node):
        self.node = int(node)
        super().__init__(f"zero out-degree at node {self.node}")


class ConvergenceError(CrowdwiseError, RuntimeError):
    """Power iteration failed to converge.

    Usually a sign of a periodic or nearly reducible matrix.
    """

    def __init__(self, residual, n_iter):
        self.residual = float(residual)
        self.n_iter = int(n_iter)
        super().__init__(
            f"power iteration did not converge after {self.n_iter} iterations "
            f"(last one-norm residual {self.residual:.3e}); the matrix may be "
            "periodic or nearly reducible"
        )


class ExceedsCapError(CrowdwiseError, RuntimeError):
    """No time step up to ``cap`` satisfies the mixing criterion."""

    def __init__(self, cap, hint=None):
        self.cap = int(cap)
        msg = f"mixing time exceeds cap {self.cap}"
        super().__init__(f"{msg}; {hint}" if hint else msg)


class NotPrimitiveError(CrowdwiseError, ValueError):
    """Operation requires a primitive matrix."""


class TripletFormatError(CrowdwiseError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)
