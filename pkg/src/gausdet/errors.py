"""Exception hierarchy shared across the package.

InvalidInput covers malformed arguments (negative intensities, bad weights,
mismatched dimensions).  OutOfRegime marks inputs outside the domain where a
formula is valid (e.g. a chi-square tail lemma applied on the wrong side of
its threshold); callers can often recover by choosing different parameters,
so it is kept distinct from InvalidInput.
"""


class GausdetError(Exception):
    """Base class for all package-specific errors."""


class InvalidInput(GausdetError, ValueError):
    """An argument violates a documented invariant."""


class DimensionMismatch(InvalidInput):
    """Vector arguments have inconsistent lengths."""


class OutOfRegime(GausdetError):
    """The requested quantity is not defined for these parameters."""
