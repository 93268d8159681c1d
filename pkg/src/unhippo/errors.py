"""Exception types shared across the library."""


class NumericError(RuntimeError):
    """A computation produced non-finite values or a decomposition failed."""
