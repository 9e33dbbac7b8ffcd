"""Exception types shared across the package."""


class NoncevecError(Exception):
    """Base class for package-specific errors."""


class FormatError(NoncevecError):
    """A file (vector store, dataset, grid spec) violates its format.

    Messages name the offending record or line so corrupt inputs can be
    located without a debugger.
    """


class DivergenceError(NoncevecError):
    """Training produced a non-finite value; the run cannot continue."""


class UnevaluableError(NoncevecError):
    """An evaluation item has no usable signal (e.g. nothing to sum)."""
