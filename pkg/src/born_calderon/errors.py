"""Exception types shared across the package."""


class BornCalderonError(Exception):
    """Base class for numerical failures raised by this package."""


class AccuracyError(BornCalderonError):
    """A series or quadrature did not reach its requested accuracy."""


class ResonanceError(BornCalderonError):
    """Zero is (numerically) a Dirichlet eigenvalue of -Delta + q."""


class ConvergenceError(BornCalderonError):
    """A perturbation series is outside its guaranteed convergence regime."""


class SolverError(BornCalderonError):
    """A linear system or ODE integration failed."""


class SchemaError(BornCalderonError):
    """A potential-specification file failed validation."""
