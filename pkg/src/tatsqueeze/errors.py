"""Exception types; the CLI maps each to a distinct exit code."""


class ParameterError(ValueError):
    """A physical or configuration value is out of its allowed range."""


class ModelViolationError(ArithmeticError):
    """A covariance matrix stopped being physical (or numerically resolvable)."""


class ConvergenceError(RuntimeError):
    """An iterative procedure hit its cap before meeting its tolerance."""
