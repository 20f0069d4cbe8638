"""Exception types shared across the package."""


class MorreyflowError(Exception):
    """Base class for all package errors."""


class ParameterError(MorreyflowError, ValueError):
    """Invalid physical or numerical parameters (wrong exponent regime, bad grid sizes, ...)."""


class GridError(MorreyflowError, ValueError):
    """Grid construction or grid compatibility failure."""


class SolverError(MorreyflowError, RuntimeError):
    """A linear or nonlinear solve failed or its stability restriction is violated."""


class FitError(MorreyflowError, RuntimeError):
    """A least-squares fit could not be performed on the given samples."""
